//! Request and response bodies. Field names are part of the public API;
//! unknown request fields are ignored.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use shamba_core::kb::{DocumentOutcome, Manifest};
use shamba_core::pipeline::UnansweredCategory;
use shamba_core::store::{IssueTag, Thumb, Turn, TurnSource};

/// Version stamped on every response body.
pub const API_VERSION: u32 = 1;

fn v() -> u32 {
    API_VERSION
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ChatRequest {
    /// Created by the server when absent.
    #[serde(default)]
    pub session_id: Option<String>,
    pub user_id: String,
    #[serde(default)]
    pub text: Option<String>,
    /// Base64 audio; exactly one of `text` and `audio_base64` must be set.
    #[serde(default)]
    pub audio_base64: Option<String>,
    /// BCP-47-style language hint; detected from the text when absent.
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub selected_crop: Option<String>,
    /// Defaults to the server's configured collection.
    #[serde(default)]
    pub collection_id: Option<String>,
    /// `typed` (default) or `followup_click`; audio requests are always
    /// recorded as `voice`.
    #[serde(default)]
    pub source: Option<TurnSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuReply {
    pub step: MenuStep,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    #[serde(default = "v")]
    pub v: u32,
    /// Absent only for menu-navigation replies, which are not turns.
    pub turn_id: Option<String>,
    pub session_id: String,
    pub response_text: String,
    /// Synthesized reply, present when the request carried audio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_base64: Option<String>,
    pub citations: Vec<String>,
    pub followups: Vec<String>,
    pub answered: bool,
    pub unanswered_category: Option<UnansweredCategory>,
    /// Buttons to offer next during menu navigation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<MenuReply>,
}

impl ChatResponse {
    pub fn from_turn(turn: &Turn, audio_base64: Option<String>) -> Self {
        Self {
            v: API_VERSION,
            turn_id: Some(turn.turn_id.clone()),
            session_id: turn.session_id.clone(),
            response_text: turn.result.response_text.clone(),
            audio_base64,
            citations: turn.result.citations.clone(),
            followups: turn.result.followups.clone(),
            answered: turn.result.answered,
            unanswered_category: turn.result.unanswered_category,
            menu: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub turn_id: String,
    #[serde(default)]
    pub thumb: Option<Thumb>,
    /// 1–5.
    #[serde(default)]
    pub stars: Option<u8>,
    #[serde(default)]
    pub issue_tags: BTreeSet<IssueTag>,
    #[serde(default)]
    pub freeform: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub v: u32,
    pub turn_id: String,
    pub stored: bool,
}

/// Either an inline manifest (relative document URIs resolve against the
/// server's data directory) or the path of a manifest file on the server.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestRequest {
    #[serde(default)]
    pub manifest: Option<Manifest>,
    #[serde(default)]
    pub manifest_path: Option<String>,
    /// Overrides the manifest's collection id.
    #[serde(default)]
    pub collection_id: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestResponse {
    pub v: u32,
    pub collection_id: String,
    pub documents: Vec<DocumentOutcome>,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticsResponse {
    pub v: u32,
    pub metric: String,
    pub from: Option<String>,
    pub to: Option<String>,
    /// Turns inside the window.
    pub turns: usize,
    /// `null` when the window holds no turns.
    pub report: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionSummary {
    pub collection_id: String,
    pub region: String,
    pub crops: BTreeSet<String>,
    pub documents: usize,
    pub chunks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuStep {
    /// Show the categories.
    Start,
    /// A category was picked; show its crops.
    Category,
    /// A crop was picked; remember it for the chat.
    Crop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WebhookButton {
    /// Index into the follow-ups of the chat's previous reply.
    Followup { index: usize },
    Menu {
        step: MenuStep,
        #[serde(default)]
        value: Option<String>,
    },
}

/// One platform message. Exactly one of `text`, `voice_base64` and
/// `button` must be set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WebhookUpdate {
    pub message_id: String,
    pub chat_id: String,
    /// Defaults to `wh-<chat_id>`.
    #[serde(default)]
    pub user_id: Option<String>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub voice_base64: Option<String>,
    #[serde(default)]
    pub button: Option<WebhookButton>,
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub collection_id: Option<String>,
}
