//! Platform-neutral messaging webhook.
//!
//! Each chat maps to the session `wh-<chat_id>`. Follow-up buttons carry the
//! index of a suggestion in the chat's previous reply and are answered as a
//! `followup_click` turn with that suggestion's text. Menu buttons walk
//! three steps — `start` → `category` → `crop` — and the chosen crop is kept
//! on the user's profile in the conversation store, so it survives restarts.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::Json;
use shamba_core::store::{Gender, Role, TurnSource, UserProfile};

use crate::error::ApiError;
use crate::routes::run_serialized;
use crate::state::{decode_audio, parse_language, AppState, PendingTurn, Utterance};
use crate::types::{ChatResponse, MenuReply, MenuStep, WebhookButton, WebhookUpdate, API_VERSION};

/// Menu categories. Livestock value chains are listed explicitly;
/// everything else a collection covers is a crop.
pub const CATEGORIES: [&str; 2] = ["crops", "livestock"];
const LIVESTOCK: [&str; 5] = ["dairy", "poultry", "goat", "sheep", "pig"];

pub fn session_for(chat_id: &str) -> String {
    format!("wh-{chat_id}")
}

fn category_of(crop: &str) -> &'static str {
    if LIVESTOCK.contains(&crop) {
        "livestock"
    } else {
        "crops"
    }
}

fn menu_reply(session_id: String, text: String, step: MenuStep, options: Vec<String>) -> ChatResponse {
    ChatResponse {
        v: API_VERSION,
        turn_id: None,
        session_id,
        response_text: text,
        audio_base64: None,
        citations: Vec::new(),
        followups: Vec::new(),
        answered: true,
        unanswered_category: None,
        menu: Some(MenuReply { step, options }),
    }
}

pub async fn webhook(
    State(state): State<Arc<AppState>>,
    body: Result<Json<WebhookUpdate>, JsonRejection>,
) -> Result<Json<ChatResponse>, ApiError> {
    let Json(update) = body?;
    if update.chat_id.trim().is_empty() || update.message_id.trim().is_empty() {
        return Err(ApiError::bad_request("chat_id and message_id are required"));
    }
    let session_id = session_for(&update.chat_id);
    let user_id = update
        .user_id
        .clone()
        .filter(|u| !u.trim().is_empty())
        .unwrap_or_else(|| session_id.clone());
    let collection = state.collection(update.collection_id.as_deref())?;
    let saved_crop = state
        .store
        .profile(&user_id)
        .and_then(|p| p.crops.into_iter().next());
    let language = parse_language(update.language.as_deref())?;

    let payloads = [update.text.is_some(), update.voice_base64.is_some(), update.button.is_some()];
    if payloads.iter().filter(|&&p| p).count() != 1 {
        return Err(ApiError::bad_request("exactly one of text, voice_base64 and button is required"));
    }

    let pending = |utterance, source, language| PendingTurn {
        session_id: session_id.clone(),
        user_id: user_id.clone(),
        utterance,
        language,
        selected_crop: saved_crop.clone(),
        collection: Arc::clone(&collection),
        source,
    };

    let response = match (update.text, update.voice_base64, update.button) {
        (Some(text), _, _) => run_serialized(&state, pending(Utterance::Text(text), TurnSource::Typed, language)).await?,
        (_, Some(voice), _) => {
            let audio = decode_audio(&voice)?;
            run_serialized(&state, pending(Utterance::Audio(audio), TurnSource::Voice, language)).await?
        }
        (_, _, Some(WebhookButton::Followup { index })) => {
            let previous = state
                .store
                .session_turns(&session_id)
                .pop()
                .ok_or_else(|| ApiError::bad_request("this chat has no reply to follow up on"))?;
            let text = previous.result.followups.get(index).cloned().ok_or_else(|| {
                ApiError::bad_request(format!(
                    "follow-up {index} does not exist; the last reply offered {}",
                    previous.result.followups.len()
                ))
            })?;
            let mut p = pending(
                Utterance::Text(text),
                TurnSource::FollowupClick,
                language.or(Some(previous.query.language.clone())),
            );
            p.selected_crop = previous.query.selected_crop.or(p.selected_crop);
            run_serialized(&state, p).await?
        }
        (_, _, Some(WebhookButton::Menu { step, value })) => {
            let supported = collection.crops();
            match step {
                MenuStep::Start => menu_reply(
                    session_id,
                    "Welcome! Choose a category.".into(),
                    MenuStep::Start,
                    CATEGORIES.iter().map(|c| c.to_string()).collect(),
                ),
                MenuStep::Category => {
                    let category = value.unwrap_or_default();
                    if !CATEGORIES.contains(&category.as_str()) {
                        return Err(ApiError::bad_request(format!(
                            "unknown category `{category}`; expected one of {}",
                            CATEGORIES.join(", ")
                        )));
                    }
                    let crops: Vec<String> = supported
                        .iter()
                        .filter(|c| category_of(c) == category)
                        .cloned()
                        .collect();
                    let text = if crops.is_empty() {
                        format!("No {category} are covered yet.")
                    } else {
                        format!("Choose one: {}.", crops.join(", "))
                    };
                    menu_reply(session_id, text, MenuStep::Category, crops)
                }
                MenuStep::Crop => {
                    let crop = value.unwrap_or_default().trim().to_lowercase();
                    if !supported.contains(&crop) {
                        return Err(ApiError::bad_request(format!("crop `{crop}` is not covered by this collection")));
                    }
                    let mut profile = state.store.profile(&user_id).unwrap_or(UserProfile {
                        user_id: user_id.clone(),
                        role: Role::Farmer,
                        gender: Gender::Unspecified,
                        language: language.clone().unwrap_or_else(shamba_core::provider::LanguageTag::english),
                        county: String::new(),
                        crops: BTreeSet::new(),
                    });
                    profile.crops = BTreeSet::from([crop.clone()]);
                    let st = Arc::clone(&state);
                    tokio::task::spawn_blocking(move || st.store.upsert_profile(profile)).await??;
                    menu_reply(
                        session_id,
                        format!("You chose {crop}. Ask me anything about {crop}."),
                        MenuStep::Crop,
                        Vec::new(),
                    )
                }
            }
        }
        (None, None, None) => unreachable!("payload count checked above"),
    };
    Ok(Json(response))
}
