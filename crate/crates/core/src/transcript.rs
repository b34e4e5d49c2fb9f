//! Deterministic line-delimited transcripts of protocol runs.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ledger::LogEntry;

/// One accepted transaction as seen by the protocol driver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRow {
    pub phase: String,
    pub actor: String,
    pub label: String,
    /// Digest of the published witness data.
    pub digest: String,
    pub height: u64,
}

impl TranscriptRow {
    pub fn from_log(phase: &str, actor: &str, entry: &LogEntry) -> Self {
        let mut h = Sha256::new();
        for stack in &entry.witnesses {
            for elem in stack {
                h.update((elem.len() as u32).to_le_bytes());
                h.update(elem);
            }
        }
        TranscriptRow {
            phase: phase.to_string(),
            actor: actor.to_string(),
            label: entry.label.clone(),
            digest: hex::encode(&h.finalize()[..8]),
            height: entry.height,
        }
    }
}

/// Serialize rows as JSON lines.
pub fn to_jsonl(rows: &[TranscriptRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("transcript row serializes"));
        out.push('\n');
    }
    out
}
