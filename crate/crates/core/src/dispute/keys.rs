//! Per-message one-time keys for the dispute graph.
//!
//! Every protocol message a party can ever publish gets its own one-time key
//! at setup, identified by a `RevealTag`. The public halves form the key
//! registry bound into every assertion check, so on-chain checks can verify
//! that witness data really is what the owning party committed.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::ledger::Party;
use crate::ots::{keygen, OneTimeKeyPair, OtsError, OtsPublicKey, Scheme};
use crate::search::SearchConfig;
use crate::trace::FULL_TRACE_ENTRY_LEN;

/// Identifies one OT-committed protocol message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RevealTag {
    /// Prover: input bytes, final step index, exit status, final step hash.
    Kickoff,
    /// Verifier: the dispute flag.
    Challenge,
    /// Prover: the n-1 interior hashes of search round r (1-based).
    MainReveal(u32),
    /// Verifier: the interval identifier of round r.
    MainSelect(u32),
    /// Prover: the full trace entry of the first conflicting step.
    FullTrace,
    /// Verifier: (which read, scenario, step k) opening the read-value path.
    BranchReadValue,
    /// Verifier: opens the opcode path.
    BranchOpcode,
    /// Prover: stepHash_{k-1}, stepHash_k, trace_k, plus the first
    /// reverse-search round's (hash, trace) pairs.
    Scenario,
    /// Verifier: reverse-search interval identifier of round r (1-based).
    AuxSelect(u32),
    /// Prover: reverse-search (hash, trace) pairs of round r (2-based;
    /// round 1 rides inside `Scenario`).
    AuxReveal(u32),
    /// Prover: negative-search (hash, trace) pairs of round r.
    NegReveal(u32),
    /// Verifier: negative-search interval identifier of round r.
    NegSelect(u32),
    /// Prover: the pinned loading entry, in full.
    NegTarget,
    /// Verifier: stepHash_{j-2} || trace_{j-1} for the pc challenge.
    PcData,
}

impl RevealTag {
    pub fn owner(self) -> Party {
        match self {
            RevealTag::Kickoff
            | RevealTag::MainReveal(_)
            | RevealTag::FullTrace
            | RevealTag::Scenario
            | RevealTag::AuxReveal(_)
            | RevealTag::NegReveal(_)
            | RevealTag::NegTarget => Party::Prover,
            RevealTag::Challenge
            | RevealTag::MainSelect(_)
            | RevealTag::BranchReadValue
            | RevealTag::BranchOpcode
            | RevealTag::AuxSelect(_)
            | RevealTag::NegSelect(_)
            | RevealTag::PcData => Party::Verifier,
        }
    }

    pub fn encode(self) -> [u8; 2] {
        match self {
            RevealTag::Kickoff => [0, 0],
            RevealTag::Challenge => [1, 0],
            RevealTag::MainReveal(r) => [2, r as u8],
            RevealTag::MainSelect(r) => [3, r as u8],
            RevealTag::FullTrace => [4, 0],
            RevealTag::BranchReadValue => [5, 0],
            RevealTag::BranchOpcode => [6, 0],
            RevealTag::Scenario => [7, 0],
            RevealTag::AuxSelect(r) => [8, r as u8],
            RevealTag::AuxReveal(r) => [9, r as u8],
            RevealTag::NegReveal(r) => [10, r as u8],
            RevealTag::NegSelect(r) => [11, r as u8],
            RevealTag::NegTarget => [12, 0],
            RevealTag::PcData => [13, 0],
        }
    }

    pub fn decode(raw: &[u8]) -> Option<Self> {
        if raw.len() != 2 {
            return None;
        }
        let r = raw[1] as u32;
        Some(match raw[0] {
            0 => RevealTag::Kickoff,
            1 => RevealTag::Challenge,
            2 => RevealTag::MainReveal(r),
            3 => RevealTag::MainSelect(r),
            4 => RevealTag::FullTrace,
            5 => RevealTag::BranchReadValue,
            6 => RevealTag::BranchOpcode,
            7 => RevealTag::Scenario,
            8 => RevealTag::AuxSelect(r),
            9 => RevealTag::AuxReveal(r),
            10 => RevealTag::NegReveal(r),
            11 => RevealTag::NegSelect(r),
            12 => RevealTag::NegTarget,
            13 => RevealTag::PcData,
            _ => return None,
        })
    }
}

/// Fixed byte length of each message kind.
pub fn message_len(tag: RevealTag, cfg: &SearchConfig, input_capacity: usize) -> usize {
    let n1 = cfg.n() as usize - 1;
    match tag {
        RevealTag::Kickoff => input_capacity * 4 + 8 + 1 + 32,
        RevealTag::Challenge => 1,
        RevealTag::MainReveal(_) => n1 * 32,
        RevealTag::MainSelect(_) | RevealTag::AuxSelect(_) | RevealTag::NegSelect(_) => 1,
        RevealTag::FullTrace | RevealTag::NegTarget => FULL_TRACE_ENTRY_LEN,
        RevealTag::BranchReadValue => 10,
        RevealTag::BranchOpcode => 1,
        RevealTag::Scenario => 32 + 32 + 12 + n1 * 44,
        RevealTag::AuxReveal(_) | RevealTag::NegReveal(_) => n1 * 44,
        RevealTag::PcData => 44,
    }
}

/// All tags a session with these parameters ever uses.
pub fn all_tags(cfg: &SearchConfig, neg_cfg: &SearchConfig) -> Vec<RevealTag> {
    let mut tags = vec![
        RevealTag::Kickoff,
        RevealTag::Challenge,
        RevealTag::FullTrace,
        RevealTag::BranchReadValue,
        RevealTag::BranchOpcode,
        RevealTag::Scenario,
        RevealTag::NegTarget,
        RevealTag::PcData,
    ];
    for r in 1..=cfg.rounds() {
        tags.push(RevealTag::MainReveal(r));
        tags.push(RevealTag::MainSelect(r));
        tags.push(RevealTag::AuxSelect(r));
        if r >= 2 {
            tags.push(RevealTag::AuxReveal(r));
        }
    }
    for r in 1..=neg_cfg.rounds() {
        tags.push(RevealTag::NegReveal(r));
        tags.push(RevealTag::NegSelect(r));
    }
    tags
}

/// Public halves, bound into assertion checks at setup.
pub type KeyRegistry = BTreeMap<RevealTag, OtsPublicKey>;

/// One party's secret halves.
#[derive(Debug)]
pub struct Keyring {
    pub keys: BTreeMap<RevealTag, OneTimeKeyPair>,
}

impl Keyring {
    pub fn key_mut(&mut self, tag: RevealTag) -> &mut OneTimeKeyPair {
        self.keys.get_mut(&tag).expect("keyring holds every owned tag")
    }
}

fn tag_seed(session_seed: &[u8; 32], tag: RevealTag) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(session_seed);
    h.update(tag.encode());
    h.finalize().into()
}

/// Generate every key for a session: the registry plus both keyrings.
pub fn generate_session_keys(
    session_seed: [u8; 32],
    cfg: &SearchConfig,
    neg_cfg: &SearchConfig,
    input_capacity: usize,
) -> Result<(KeyRegistry, Keyring, Keyring), OtsError> {
    let mut registry = KeyRegistry::new();
    let mut prover = BTreeMap::new();
    let mut verifier = BTreeMap::new();
    for tag in all_tags(cfg, neg_cfg) {
        let len = message_len(tag, cfg, input_capacity);
        let key = keygen(tag_seed(&session_seed, tag), len, Scheme::Winternitz { w: 4 })?;
        registry.insert(tag, key.public().clone());
        match tag.owner() {
            Party::Prover => prover.insert(tag, key),
            Party::Verifier => verifier.insert(tag, key),
        };
    }
    Ok((registry, Keyring { keys: prover }, Keyring { keys: verifier }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        let cfg = SearchConfig::new(4, 3).unwrap();
        let neg = SearchConfig::new(4, 2).unwrap();
        for tag in all_tags(&cfg, &neg) {
            assert_eq!(RevealTag::decode(&tag.encode()), Some(tag));
        }
    }

    #[test]
    fn keyrings_split_by_owner() {
        let cfg = SearchConfig::new(2, 2).unwrap();
        let neg = SearchConfig::new(2, 1).unwrap();
        let (registry, prover, verifier) = generate_session_keys([5; 32], &cfg, &neg, 2).unwrap();
        assert_eq!(registry.len(), prover.keys.len() + verifier.keys.len());
        for tag in prover.keys.keys() {
            assert_eq!(tag.owner(), Party::Prover);
        }
        for tag in verifier.keys.keys() {
            assert_eq!(tag.owner(), Party::Verifier);
        }
    }
}
