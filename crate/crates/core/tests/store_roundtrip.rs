mod common;

use std::collections::BTreeSet;

use chrono::{Duration, TimeZone, Utc};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::synthetic_turn;
use shamba_core::pipeline::UnansweredCategory;
use shamba_core::provider::LanguageTag;
use shamba_core::store::{
    import_log, ConversationStore, FeedbackRecord, Gender, IssueTag, LogRecord, Role, StoreError,
    Thumb, TimeRange, Turn, TurnSource, UserProfile,
};

const CATEGORIES: [Option<UnansweredCategory>; 4] = [
    None,
    Some(UnansweredCategory::OutOfContext),
    Some(UnansweredCategory::OutOfCollection),
    Some(UnansweredCategory::OutOfContent),
];

fn random_text(rng: &mut StdRng) -> String {
    const ALPHABET: &[&str] = &["a", "b", "z", " ", "é", "ñ", "\"", "\\", "\n", "⟦", "🌽", "maize", "?"];
    (0..rng.gen_range(1..30)).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect()
}

/// A store holding `profiles` profiles, `turns` turns and `feedback`
/// feedback records with randomized text, timestamps and latencies.
fn random_store(seed: u64, profiles: usize, turns: usize, feedback: usize) -> ConversationStore {
    let mut rng = StdRng::seed_from_u64(seed);
    let store = ConversationStore::in_memory();
    for p in 0..profiles {
        store
            .upsert_profile(UserProfile {
                user_id: format!("u{p}"),
                role: [Role::Farmer, Role::LeadFarmer, Role::ExtensionAgent, Role::Agripreneur][p % 4],
                gender: [Gender::Female, Gender::Male, Gender::Unspecified][p % 3],
                language: LanguageTag::english(),
                county: random_text(&mut rng),
                crops: BTreeSet::from(["coffee".to_string()]),
            })
            .unwrap();
    }
    let base = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let mut ids = Vec::new();
    for i in 0..turns {
        let user = format!("u{}", rng.gen_range(0..profiles.max(1)));
        let ts = base + Duration::nanoseconds(i as i64 * 3_600_123_456_789);
        let mut t = synthetic_turn(
            &format!("t{i}"),
            &user,
            ts,
            &random_text(&mut rng),
            CATEGORIES[rng.gen_range(0..4)],
            [TurnSource::Typed, TurnSource::Voice, TurnSource::FollowupClick][i % 3],
        );
        t.result.response_text = random_text(&mut rng);
        t.result.latency.retrieve = rng.gen::<f64>() * 10.0;
        t.result.latency.generate = rng.gen::<f64>() * 1e-7;
        t.result.latency.total = t.result.latency.stage_sum();
        ids.push(t.turn_id.clone());
        store.append_turn(t).unwrap();
    }
    for j in 0..feedback {
        let turn_id = ids[rng.gen_range(0..ids.len())].clone();
        store
            .record_feedback(FeedbackRecord {
                turn_id,
                thumb: [Some(Thumb::Up), Some(Thumb::Down), None][j % 3],
                stars: Some(rng.gen_range(1..=5)),
                issue_tags: if j % 2 == 0 { BTreeSet::from([IssueTag::Incomplete]) } else { BTreeSet::new() },
                freeform: (j % 5 == 0).then(|| random_text(&mut rng)),
                recorded_at: base + Duration::milliseconds(j as i64 * 7919),
            })
            .unwrap();
    }
    store
}

fn export_all(store: &ConversationStore) -> (usize, Vec<u8>) {
    let mut out = Vec::new();
    let n = store.export_log(TimeRange::all(), &mut out).unwrap();
    (n, out)
}

fn body(bytes: &[u8]) -> &[u8] {
    let first_newline = bytes.iter().position(|&b| b == b'\n').unwrap();
    &bytes[first_newline + 1..]
}

#[test]
fn thousand_record_log_round_trips_losslessly() {
    let store = random_store(42, 50, 700, 250);
    let (n, bytes) = export_all(&store);
    assert_eq!(n, 1000);
    let imported = import_log(bytes.as_slice()).unwrap();
    assert!(imported.header.is_some());
    assert_eq!(imported.records.len(), 1000);
    assert_eq!(imported.records, store.records());

    let reloaded = ConversationStore::in_memory();
    reloaded.extend(imported.records).unwrap();
    let (_, again) = export_all(&reloaded);
    assert_eq!(body(&again), body(&bytes));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_store_round_trips(seed in any::<u64>(), profiles in 1usize..6, turns in 1usize..40, feedback in 0usize..20) {
        let store = random_store(seed, profiles, turns, feedback);
        let (n, bytes) = export_all(&store);
        prop_assert_eq!(n, profiles + turns + feedback);
        let imported = import_log(bytes.as_slice()).unwrap();
        prop_assert_eq!(imported.records, store.records());
    }
}

#[test]
fn feedback_for_unknown_turn_is_rejected_on_import() {
    let store = random_store(1, 2, 3, 0);
    let (_, mut bytes) = export_all(&store);
    bytes.extend_from_slice(
        br#"{"v":1,"type":"feedback","turn_id":"missing","thumb":"up","recorded_at":"2024-01-01T00:00:00Z"}"#,
    );
    bytes.push(b'\n');
    match import_log(bytes.as_slice()) {
        Err(StoreError::Malformed { line, .. }) => assert_eq!(line, 7),
        other => panic!("expected a malformed-line error, got {other:?}"),
    }
    let live = ConversationStore::in_memory();
    let err = live.record_feedback(FeedbackRecord {
        turn_id: "missing".into(),
        thumb: Some(Thumb::Up),
        stars: None,
        issue_tags: BTreeSet::new(),
        freeform: None,
        recorded_at: Utc::now(),
    });
    assert!(matches!(err, Err(StoreError::UnknownTurn(_))));
}

#[test]
fn newer_log_version_is_rejected() {
    let line = br#"{"v":2,"type":"header","format":"shamba-conversation-log","created_at":"2024-01-01T00:00:00Z"}"#;
    assert!(import_log(&line[..]).is_err());
}

#[test]
fn time_window_is_half_open() {
    let store = random_store(3, 2, 10, 0);
    let turns: Vec<Turn> = store.all_turns();
    let range = TimeRange { from: Some(turns[2].timestamp), to: Some(turns[5].timestamp) };
    let mut out = Vec::new();
    store.export_log(range, &mut out).unwrap();
    let ids: Vec<String> = import_log(out.as_slice()).unwrap().turns().into_iter().map(|t| t.turn_id).collect();
    assert_eq!(ids, ["t2", "t3", "t4"]);
}

#[test]
fn file_store_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log/conversations.ndjson");
    let source = random_store(9, 3, 20, 5);
    {
        let store = ConversationStore::open(&path).unwrap();
        store.extend(source.records()).unwrap();
    }
    let reopened = ConversationStore::open(&path).unwrap();
    assert_eq!(reopened.records(), source.records());
    assert!(matches!(reopened.records()[0], LogRecord::Profile(_)));
}
