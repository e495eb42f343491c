mod common;

use std::io::Write;

use chrono::Utc;
use contourbench::game::SessionStatus;
use contourbench_gateway::submissions::{load, LogError, SubmissionLog, SubmissionRecord, LOG_FILE};

fn record(i: usize) -> SubmissionRecord {
    SubmissionRecord {
        timestamp: Utc::now(),
        image_id: "sq".into(),
        session_id: format!("s{i}"),
        drawing: common::square_drawing(),
        score_fraction: 0.5,
        status: if i.is_multiple_of(2) { SessionStatus::Accepted } else { SessionStatus::Rejected },
    }
}

#[tokio::test]
async fn records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let log = SubmissionLog::open(dir.path()).unwrap();
    let recs: Vec<_> = (0..5).map(record).collect();
    for r in &recs {
        log.append(r.clone()).await.unwrap();
    }
    assert_eq!(load(log.path()).unwrap().records, recs);
}

#[tokio::test]
async fn concurrent_appends_stay_line_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let log = SubmissionLog::open(dir.path()).unwrap();
    let tasks: Vec<_> = (0..32)
        .map(|i| {
            let log = log.clone();
            tokio::spawn(async move { log.append(record(i)).await })
        })
        .collect();
    for t in tasks {
        t.await.unwrap().unwrap();
    }
    let mut ids: Vec<String> = load(log.path()).unwrap().records.into_iter().map(|r| r.session_id).collect();
    ids.sort();
    let mut expected: Vec<String> = (0..32).map(|i| format!("s{i}")).collect();
    expected.sort();
    assert_eq!(ids, expected);
}

#[tokio::test]
async fn truncated_tail_is_skipped_and_repaired() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(LOG_FILE);
    {
        let log = SubmissionLog::open(dir.path()).unwrap();
        log.append(record(0)).await.unwrap();
        log.append(record(1)).await.unwrap();
    }
    // simulate a crash halfway through a write
    let partial = serde_json::to_string(&record(2)).unwrap();
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    f.write_all(&partial.as_bytes()[..partial.len() / 2]).unwrap();
    drop(f);

    let loaded = load(&path).unwrap();
    assert_eq!(loaded.records.len(), 2);
    assert_eq!(loaded.truncated_tail, partial.len() / 2);

    let log = SubmissionLog::open(dir.path()).unwrap();
    log.append(record(3)).await.unwrap();
    let after = load(&path).unwrap();
    assert_eq!(after.truncated_tail, 0);
    let ids: Vec<_> = after.records.iter().map(|r| r.session_id.as_str()).collect();
    assert_eq!(ids, ["s0", "s1", "s3"]);
}

#[test]
fn corrupt_middle_line_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(LOG_FILE);
    let good = serde_json::to_string(&record(0)).unwrap();
    std::fs::write(&path, format!("{good}\n{{garbage\n{good}\n")).unwrap();
    assert!(matches!(load(&path), Err(LogError::Corrupt { line: 2, .. })));
    assert!(load(&dir.path().join("missing.jsonl")).unwrap().records.is_empty());
}
