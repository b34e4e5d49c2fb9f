//! Fixed-width encodings of the dispute's protocol messages. Both the
//! drivers and the on-chain checks speak exactly these layouts.

use crate::hashchain::StepHash;
use crate::isa::Word;
use crate::machine::Status;
use crate::trace::{TraceEntry, WhichRead};

/// Exit status as committed in the kickoff claim.
pub const STATUS_HALTED: u8 = 0;
pub const STATUS_TRAPPED: u8 = 1;
pub const STATUS_RUNNING: u8 = 2;

pub fn status_byte(status: Status) -> u8 {
    match status {
        Status::Halted(_) => STATUS_HALTED,
        Status::Trapped(_) => STATUS_TRAPPED,
        Status::Running => STATUS_RUNNING,
    }
}

/// The prover's claim: program input, last real step, exit status and the
/// final real step hash.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KickoffClaim {
    pub input_words: Vec<Word>,
    pub final_step: i64,
    pub status: u8,
    pub final_hash: StepHash,
}

impl KickoffClaim {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.input_words.len() * 4 + 41);
        for w in &self.input_words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.extend_from_slice(&self.final_step.to_le_bytes());
        out.push(self.status);
        out.extend_from_slice(&self.final_hash.0);
        out
    }

    pub fn decode(raw: &[u8], input_capacity: usize) -> Option<Self> {
        if raw.len() != input_capacity * 4 + 41 {
            return None;
        }
        let input_words = raw[..input_capacity * 4]
            .chunks(4)
            .map(|c| Word::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let rest = &raw[input_capacity * 4..];
        Some(KickoffClaim {
            input_words,
            final_step: i64::from_le_bytes(rest[..8].try_into().unwrap()),
            status: rest[8],
            final_hash: StepHash::from_bytes(&rest[9..41])?,
        })
    }

    /// The claimed chain value at the final padded index `m - 1`.
    pub fn padded_final(&self, m: i64) -> Option<StepHash> {
        if self.final_step == m - 1 {
            return Some(self.final_hash);
        }
        if self.final_step > m - 1 || self.final_step < 0 {
            return None;
        }
        match self.status {
            STATUS_HALTED => Some(StepHash::ONE),
            STATUS_TRAPPED => Some(StepHash::EXCEPTION),
            _ => None,
        }
    }
}

/// The verifier's read-value branch choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchChoice {
    pub which: WhichRead,
    pub scenario: u8,
    pub k: i64,
}

impl BranchChoice {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.which.tag(), self.scenario];
        out.extend_from_slice(&self.k.to_le_bytes());
        out
    }

    pub fn decode(raw: &[u8]) -> Option<Self> {
        if raw.len() != 10 {
            return None;
        }
        Some(BranchChoice {
            which: WhichRead::from_tag(raw[0])?,
            scenario: raw[1],
            k: i64::from_le_bytes(raw[2..10].try_into().unwrap()),
        })
    }
}

/// One (stepHash, trace) pair as revealed during auxiliary search rounds.
pub type HashTracePair = (StepHash, TraceEntry);

pub fn encode_pair(pair: &HashTracePair) -> Vec<u8> {
    let mut out = Vec::with_capacity(44);
    out.extend_from_slice(&pair.0 .0);
    out.extend_from_slice(&pair.1.to_bytes());
    out
}

pub fn decode_pair(raw: &[u8]) -> Option<HashTracePair> {
    if raw.len() != 44 {
        return None;
    }
    Some((StepHash::from_bytes(&raw[..32])?, TraceEntry::from_bytes(&raw[32..44])?))
}

pub fn encode_pairs(pairs: &[HashTracePair]) -> Vec<u8> {
    pairs.iter().flat_map(|p| encode_pair(p)).collect()
}

pub fn decode_pairs(raw: &[u8]) -> Option<Vec<HashTracePair>> {
    if raw.len() % 44 != 0 {
        return None;
    }
    raw.chunks(44).map(decode_pair).collect()
}

/// The prover's scenario reveal: the anchors around step k plus the first
/// reverse-search round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioMsg {
    pub hash_before_k: StepHash,
    pub hash_k: StepHash,
    pub trace_k: TraceEntry,
    pub round1_pairs: Vec<HashTracePair>,
}

impl ScenarioMsg {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(76 + self.round1_pairs.len() * 44);
        out.extend_from_slice(&self.hash_before_k.0);
        out.extend_from_slice(&self.hash_k.0);
        out.extend_from_slice(&self.trace_k.to_bytes());
        out.extend_from_slice(&encode_pairs(&self.round1_pairs));
        out
    }

    pub fn decode(raw: &[u8], n: u32) -> Option<Self> {
        let pair_len = (n as usize - 1) * 44;
        if raw.len() != 76 + pair_len {
            return None;
        }
        Some(ScenarioMsg {
            hash_before_k: StepHash::from_bytes(&raw[..32])?,
            hash_k: StepHash::from_bytes(&raw[32..64])?,
            trace_k: TraceEntry::from_bytes(&raw[64..76])?,
            round1_pairs: decode_pairs(&raw[76..])?,
        })
    }
}

/// The verifier's pc-challenge data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcDataMsg {
    pub hash_two_before: StepHash,
    pub trace_before: TraceEntry,
}

impl PcDataMsg {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(44);
        out.extend_from_slice(&self.hash_two_before.0);
        out.extend_from_slice(&self.trace_before.to_bytes());
        out
    }

    pub fn decode(raw: &[u8]) -> Option<Self> {
        if raw.len() != 44 {
            return None;
        }
        Some(PcDataMsg {
            hash_two_before: StepHash::from_bytes(&raw[..32])?,
            trace_before: TraceEntry::from_bytes(&raw[32..44])?,
        })
    }
}

pub fn encode_hashes(hashes: &[StepHash]) -> Vec<u8> {
    hashes.iter().flat_map(|h| h.0).collect()
}

pub fn decode_hashes(raw: &[u8]) -> Option<Vec<StepHash>> {
    if raw.len() % 32 != 0 {
        return None;
    }
    raw.chunks(32).map(StepHash::from_bytes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kickoff_round_trip() {
        let claim = KickoffClaim {
            input_words: vec![1, 2, 3],
            final_step: 57,
            status: STATUS_HALTED,
            final_hash: StepHash([7; 32]),
        };
        assert_eq!(KickoffClaim::decode(&claim.encode(), 3), Some(claim));
    }

    #[test]
    fn padded_final_derivation() {
        let mut claim = KickoffClaim {
            input_words: vec![],
            final_step: 57,
            status: STATUS_HALTED,
            final_hash: StepHash([7; 32]),
        };
        assert_eq!(claim.padded_final(64), Some(StepHash::ONE));
        claim.status = STATUS_TRAPPED;
        assert_eq!(claim.padded_final(64), Some(StepHash::EXCEPTION));
        claim.final_step = 63;
        assert_eq!(claim.padded_final(64), Some(StepHash([7; 32])));
        claim.final_step = 64;
        assert_eq!(claim.padded_final(64), None);
    }

    #[test]
    fn scenario_round_trip() {
        let msg = ScenarioMsg {
            hash_before_k: StepHash([1; 32]),
            hash_k: StepHash([2; 32]),
            trace_k: TraceEntry { write_address: 3, write_value: 4, write_pc: 5 },
            round1_pairs: vec![
                (StepHash([6; 32]), TraceEntry::default()),
                (StepHash([7; 32]), TraceEntry::default()),
                (StepHash([8; 32]), TraceEntry::default()),
            ],
        };
        assert_eq!(ScenarioMsg::decode(&msg.encode(), 4), Some(msg));
    }
}
