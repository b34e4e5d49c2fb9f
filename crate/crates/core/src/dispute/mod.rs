//! The challenge-response dispute game: claim, n-ary conflicting-step
//! search, full-trace reveal, the challenge fan-out, auxiliary searches and
//! the terminal on-chain assertions that award the stake.

pub mod checks;
pub mod drivers;
pub mod graph;
pub mod keys;
pub mod wire;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::hashchain::{ChainHasher, StepHash};
use crate::ledger::{Amount, Chain, LedgerError, Party, Transaction, TxTemplate};
use crate::machine::Program;
use crate::ots::OtsError;
use crate::search::{MainSearch, NegSearch, ReverseSearch, SearchConfig, SearchError};
use crate::trace::{FullTraceEntry, TraceEntry, WhichRead};
use crate::transcript::TranscriptRow;

use checks::{Binding, CheckKind};
use graph::{build_graph, DisputeGraph};
use keys::{generate_session_keys, Keyring, RevealTag};
use wire::{BranchChoice, KickoffClaim, ScenarioMsg};

#[derive(Debug, Error)]
pub enum DisputeError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Ots(#[from] OtsError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("program must execute at least one step and load at least one word")]
    EmptyProgram,
    #[error("loading region of {m_load} words needs {need} search rounds but only {have} are pre-signed")]
    TemplateBudget { m_load: usize, need: u32, have: u32 },
    #[error("message {0:?} is not legal in phase {1}")]
    WrongPhase(RevealTag, String),
    #[error("malformed message for {0:?}")]
    Malformed(RevealTag),
}

/// Final result of a dispute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    ProverWins,
    VerifierWins,
}

/// The challenge the verifier picks once the conflicting step is revealed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChallengeKind {
    TraceHash,
    ProgramInput(WhichRead),
    /// Direct check of the revealed lastStep metadata (out of bounds, or
    /// INITIAL with a nonzero value).
    ReadMeta(WhichRead),
    ReadValue { which: WhichRead, scenario: u8 },
    LastStepHash,
    ProgramCounter,
    OpCode,
    Execution,
}

/// Protocol phase; transitions follow the pre-signed graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    AwaitKickoff,
    AwaitChallenge,
    MainReveal(u32),
    MainSelect(u32),
    AwaitFullTrace,
    ChallengeSelection,
    AwaitScenario,
    ReadValueChoice,
    AuxReveal(u32),
    AuxSelect(u32),
    AwaitLshAssert,
    NegReveal(u32),
    NegSelect(u32),
    AwaitNegTarget,
    AwaitOpAssert,
    Done,
}

impl Phase {
    pub fn actor(&self) -> Party {
        match self {
            Phase::AwaitKickoff
            | Phase::MainReveal(_)
            | Phase::AwaitFullTrace
            | Phase::AwaitScenario
            | Phase::AuxReveal(_)
            | Phase::NegReveal(_)
            | Phase::AwaitNegTarget => Party::Prover,
            _ => Party::Verifier,
        }
    }

    pub fn name(&self) -> String {
        format!("{self:?}")
    }
}

/// Everything the setup ceremony needs.
pub struct SessionConfig {
    pub n: u32,
    pub rounds: u32,
    pub program: Program,
    pub deadline_blocks: u64,
    pub stake: Amount,
    pub seed: [u8; 32],
    pub hasher: Arc<dyn ChainHasher>,
}

/// The live protocol state: the chain, the phase, and every value either
/// party has committed on chain so far.
pub struct DisputeSession {
    pub binding: Arc<Binding>,
    pub graph: DisputeGraph,
    pub deadline: u64,
    pub stake: Amount,
    pub chain: Chain,
    pub phase: Phase,
    /// Raw (message, signature) bytes per published tag.
    pub messages: BTreeMap<RevealTag, (Vec<u8>, Vec<u8>)>,
    pub claim: Option<KickoffClaim>,
    pub main: MainSearch,
    pub reverse: Option<ReverseSearch>,
    pub neg: Option<NegSearch>,
    /// Prover-committed step hashes by index (anchors included).
    pub revealed_hashes: BTreeMap<i64, StepHash>,
    /// Prover-committed trace data by index.
    pub revealed_traces: BTreeMap<i64, TraceEntry>,
    pub full_trace_j: Option<FullTraceEntry>,
    pub branch: Option<BranchChoice>,
    pub scenario: Option<ScenarioMsg>,
    pub neg_target: Option<FullTraceEntry>,
    pub outcome: Option<Outcome>,
    pub challenge_path: Vec<String>,
    pub tx_count: usize,
    pub transcript: Vec<TranscriptRow>,
    last_label: String,
}

/// Run the setup ceremony: derive every one-time key, build and pre-sign the
/// whole transaction graph, and fund it.
pub fn setup_session(
    config: &SessionConfig,
) -> Result<(DisputeSession, Keyring, Keyring), DisputeError> {
    let cfg = SearchConfig::new(config.n, config.rounds)?;
    let m_load = config.program.loading_len();
    if m_load == 0 || config.program.instructions.is_empty() {
        return Err(DisputeError::EmptyProgram);
    }
    let neg_cfg = SearchConfig::covering(config.n, m_load as u64)?;
    if neg_cfg.rounds() > cfg.rounds() {
        return Err(DisputeError::TemplateBudget {
            m_load,
            need: neg_cfg.rounds(),
            have: cfg.rounds(),
        });
    }
    let input_capacity = config.program.input_region.len as usize;
    let (registry, prover_keys, verifier_keys) =
        generate_session_keys(config.seed, &cfg, &neg_cfg, input_capacity)?;
    let binding = Arc::new(Binding {
        cfg,
        neg_cfg,
        program: config.program.clone(),
        hasher: config.hasher.clone(),
        keys: registry,
    });
    let mut chain = Chain::new();
    let graph = build_graph(&mut chain, &binding, config.stake, config.deadline_blocks);
    let session = DisputeSession {
        main: MainSearch::new(binding.cfg),
        binding,
        graph,
        deadline: config.deadline_blocks,
        stake: config.stake,
        chain,
        phase: Phase::AwaitKickoff,
        messages: BTreeMap::new(),
        claim: None,
        reverse: None,
        neg: None,
        revealed_hashes: BTreeMap::new(),
        revealed_traces: BTreeMap::new(),
        full_trace_j: None,
        branch: None,
        scenario: None,
        neg_target: None,
        outcome: None,
        challenge_path: Vec::new(),
        tx_count: 0,
        transcript: Vec::new(),
        last_label: String::new(),
    };
    Ok((session, prover_keys, verifier_keys))
}

impl DisputeSession {
    fn cfg_rounds(&self) -> u32 {
        self.binding.cfg.rounds()
    }

    /// Template and duplicated-predecessor tag for a message in the current
    /// phase.
    fn route(&self, tag: RevealTag) -> Result<(TxTemplate, Option<RevealTag>), DisputeError> {
        use RevealTag as T;
        let l = self.cfg_rounds();
        let l_neg = self.binding.neg_cfg.rounds();
        let pair = match (self.phase, tag) {
            (Phase::AwaitKickoff, T::Kickoff) => (self.graph.kickoff.clone(), None),
            (Phase::AwaitChallenge, T::Challenge) => {
                (self.graph.challenge.clone(), Some(T::Kickoff))
            }
            (Phase::MainReveal(r), T::MainReveal(q)) if q == r => (
                self.graph.main_reveal[r as usize - 1].clone(),
                Some(if r == 1 { T::Challenge } else { T::MainSelect(r - 1) }),
            ),
            (Phase::MainSelect(r), T::MainSelect(q)) if q == r => {
                (self.graph.main_select[r as usize - 1].clone(), Some(T::MainReveal(r)))
            }
            (Phase::AwaitFullTrace, T::FullTrace) => {
                (self.graph.full_trace.clone(), Some(T::MainSelect(l)))
            }
            (Phase::ChallengeSelection, T::BranchReadValue) => {
                (self.graph.branch_read_value.clone(), Some(T::FullTrace))
            }
            (Phase::ChallengeSelection, T::BranchOpcode) => {
                (self.graph.branch_opcode.clone(), Some(T::FullTrace))
            }
            (Phase::AwaitScenario, T::Scenario) => {
                (self.graph.scenario_reveal.clone(), Some(T::BranchReadValue))
            }
            (Phase::ReadValueChoice, T::AuxSelect(1)) => {
                (self.graph.aux_select[0].clone(), Some(T::Scenario))
            }
            (Phase::AuxReveal(r), T::AuxReveal(q)) if q == r => {
                (self.graph.aux_reveal[r as usize - 2].clone(), Some(T::AuxSelect(r - 1)))
            }
            (Phase::AuxSelect(r), T::AuxSelect(q)) if q == r => {
                (self.graph.aux_select[r as usize - 1].clone(), Some(T::AuxReveal(r)))
            }
            (Phase::NegReveal(r), T::NegReveal(q)) if q == r => (
                self.graph.neg_reveal[r as usize - 1].clone(),
                Some(if r == 1 { T::BranchOpcode } else { T::NegSelect(r - 1) }),
            ),
            (Phase::NegSelect(r), T::NegSelect(q)) if q == r => {
                (self.graph.neg_select[r as usize - 1].clone(), Some(T::NegReveal(r)))
            }
            (Phase::AwaitNegTarget, T::NegTarget) => {
                (self.graph.neg_target.clone(), Some(T::NegSelect(l_neg)))
            }
            _ => return Err(DisputeError::WrongPhase(tag, self.phase.name())),
        };
        Ok(pair)
    }

    /// Publish a protocol message: sign it, duplicate the predecessor into
    /// the witness, broadcast, parse, advance the phase.
    pub fn publish(
        &mut self,
        tag: RevealTag,
        bytes: Vec<u8>,
        keyring: &mut Keyring,
    ) -> Result<(), DisputeError> {
        let (template, prev) = self.route(tag)?;
        let mut signed = Vec::new();
        if let Some(p) = prev {
            signed.extend_from_slice(&self.messages[&p].0);
        }
        signed.extend_from_slice(&bytes);
        let sig = keyring.key_mut(tag).sign(&signed)?;
        let witness = match prev {
            None => vec![bytes.clone(), sig.to_bytes()],
            Some(p) => {
                let (prev_msg, prev_sig) = self.messages[&p].clone();
                vec![prev_msg, prev_sig, bytes.clone(), sig.to_bytes()]
            }
        };
        let label = template.label.clone();
        let tx = Transaction::new(template, vec![witness]);
        self.chain = self.chain.broadcast(&tx)?;
        self.messages.insert(tag, (bytes.clone(), sig.to_bytes()));
        let actor = self.phase.actor().name();
        self.record(&label, actor);
        self.after_accept(tag, &bytes)?;
        Ok(())
    }

    fn record(&mut self, label: &str, actor: &str) {
        self.tx_count += 1;
        self.last_label = label.to_string();
        let entry = self.chain.log.last().expect("just broadcast");
        self.transcript.push(TranscriptRow::from_log(&self.phase.name(), actor, entry));
    }

    fn after_accept(&mut self, tag: RevealTag, bytes: &[u8]) -> Result<(), DisputeError> {
        use RevealTag as T;
        let l = self.cfg_rounds();
        let l_neg = self.binding.neg_cfg.rounds();
        let malformed = || DisputeError::Malformed(tag);
        match tag {
            T::Kickoff => {
                let claim = KickoffClaim::decode(bytes, self.binding.input_capacity())
                    .ok_or_else(malformed)?;
                let initial =
                    self.binding.initial_hash(&claim.input_words).unwrap_or(StepHash::ZERO);
                self.revealed_hashes.insert(-1, initial);
                self.revealed_hashes.insert(claim.final_step, claim.final_hash);
                if let Some(final_padded) = claim.padded_final(self.binding.cfg.m() as i64) {
                    self.revealed_hashes.insert(self.binding.cfg.m() as i64 - 1, final_padded);
                }
                self.claim = Some(claim);
                self.phase = Phase::AwaitChallenge;
            }
            T::Challenge => self.phase = Phase::MainReveal(1),
            T::MainReveal(r) => {
                let hashes = wire::decode_hashes(bytes).ok_or_else(malformed)?;
                let indices = self.main.reveal_indices();
                if hashes.len() != indices.len() {
                    return Err(malformed());
                }
                for (i, h) in indices.into_iter().zip(hashes) {
                    self.revealed_hashes.insert(i, h);
                }
                self.phase = Phase::MainSelect(r);
            }
            T::MainSelect(r) => {
                let t = *bytes.first().ok_or_else(malformed)?;
                if (t as u32) >= self.binding.cfg.n() {
                    return Err(malformed());
                }
                self.main.apply_pick(t);
                self.phase =
                    if r < l { Phase::MainReveal(r + 1) } else { Phase::AwaitFullTrace };
            }
            T::FullTrace => {
                let entry = FullTraceEntry::from_bytes(bytes).ok_or_else(malformed)?;
                let j = self.main.conflict_index();
                self.revealed_traces.insert(j, entry.outputs());
                self.full_trace_j = Some(entry);
                self.phase = Phase::ChallengeSelection;
            }
            T::BranchReadValue => {
                let branch = BranchChoice::decode(bytes).ok_or_else(malformed)?;
                let j = self.main.conflict_index();
                self.reverse = ReverseSearch::new(self.binding.cfg, branch.k, j - 1);
                self.branch = Some(branch);
                self.challenge_path.push(format!(
                    "ReadValue(read{},scenario{})",
                    branch.which.tag(),
                    branch.scenario
                ));
                self.phase = Phase::AwaitScenario;
            }
            T::BranchOpcode => {
                self.neg = Some(NegSearch::new(self.binding.neg_cfg));
                self.challenge_path.push("OpCode".to_string());
                self.phase = Phase::NegReveal(1);
            }
            T::Scenario => {
                let msg =
                    ScenarioMsg::decode(bytes, self.binding.cfg.n()).ok_or_else(malformed)?;
                if let Some(branch) = &self.branch {
                    self.revealed_hashes.insert(branch.k - 1, msg.hash_before_k);
                    self.revealed_hashes.insert(branch.k, msg.hash_k);
                    self.revealed_traces.insert(branch.k, msg.trace_k);
                }
                if let Some(reverse) = &self.reverse {
                    for (i, pair) in
                        reverse.reveal_indices().into_iter().zip(&msg.round1_pairs)
                    {
                        self.revealed_hashes.insert(i, pair.0);
                        self.revealed_traces.insert(i, pair.1);
                    }
                }
                self.scenario = Some(msg);
                self.phase = Phase::ReadValueChoice;
            }
            T::AuxSelect(r) => {
                let t = *bytes.first().ok_or_else(malformed)?;
                let reverse = self.reverse.as_mut().ok_or_else(malformed)?;
                reverse.apply_pick(t);
                if r == 1 {
                    self.challenge_path.push("LastStepHash".to_string());
                }
                self.phase = if r < l { Phase::AuxReveal(r + 1) } else { Phase::AwaitLshAssert };
            }
            T::AuxReveal(r) => {
                let pairs = wire::decode_pairs(bytes).ok_or_else(malformed)?;
                if let Some(reverse) = &self.reverse {
                    for (i, pair) in reverse.reveal_indices().into_iter().zip(&pairs) {
                        self.revealed_hashes.insert(i, pair.0);
                        self.revealed_traces.insert(i, pair.1);
                    }
                }
                self.phase = Phase::AuxSelect(r);
            }
            T::NegReveal(r) => {
                let pairs = wire::decode_pairs(bytes).ok_or_else(malformed)?;
                if let Some(neg) = &self.neg {
                    for (i, pair) in neg.reveal_indices().into_iter().zip(&pairs) {
                        self.revealed_hashes.insert(i, pair.0);
                        self.revealed_traces.insert(i, pair.1);
                    }
                }
                self.phase = Phase::NegSelect(r);
            }
            T::NegSelect(r) => {
                let t = *bytes.first().ok_or_else(malformed)?;
                let neg = self.neg.as_mut().ok_or_else(malformed)?;
                neg.apply_pick(t);
                self.phase =
                    if r < l_neg { Phase::NegReveal(r + 1) } else { Phase::AwaitNegTarget };
            }
            T::NegTarget => {
                let entry = FullTraceEntry::from_bytes(bytes).ok_or_else(malformed)?;
                if let Some(neg) = &self.neg {
                    self.revealed_traces.insert(neg.target_index(), entry.outputs());
                }
                self.neg_target = Some(entry);
                self.phase = Phase::AwaitOpAssert;
            }
            T::PcData => return Err(DisputeError::WrongPhase(tag, self.phase.name())),
        }
        Ok(())
    }

    /// Attempt a terminal assertion; acceptance settles the dispute for the
    /// verifier, rejection leaves the chain (and phase) unchanged.
    pub fn try_assert(&mut self, kind: CheckKind, witness: Vec<Vec<u8>>) -> bool {
        let template = self.graph.assert_for(kind).clone();
        let tx = Transaction::new(template, vec![witness]);
        match self.chain.broadcast(&tx) {
            Ok(next) => {
                self.chain = next;
                self.record(&format!("assert/{}", kind.name()), "verifier");
                self.challenge_path.push(kind.name().to_string());
                self.settle_with(Outcome::VerifierWins);
                true
            }
            Err(_) => false,
        }
    }

    /// The current actor walks away: advance past the deadline and let the
    /// waiting party sweep through the pending timeout branch.
    pub fn timeout_current(&mut self) {
        let timeout = self
            .graph
            .timeout_for(&self.last_label)
            .expect("every hop has a timeout branch")
            .clone();
        self.chain = self.chain.tick(self.deadline);
        let tx = Transaction::new(timeout.clone(), vec![vec![]]);
        self.chain = self.chain.broadcast(&tx).expect("timeout spend after deadline");
        let winner = timeout.outputs[0].leaves[0]
            .presign
            .iter()
            .next()
            .copied()
            .unwrap_or(Party::Prover);
        self.record(&timeout.label.clone(), winner.name());
        self.challenge_path.push(format!("Timeout({})", winner.name()));
        self.settle_with(match winner {
            Party::Prover => Outcome::ProverWins,
            Party::Verifier => Outcome::VerifierWins,
        });
    }

    /// A premature timeout attempt; fails (chain unchanged) before the
    /// deadline.
    pub fn try_timeout_now(&mut self) -> bool {
        let Some(timeout) = self.graph.timeout_for(&self.last_label) else {
            return false;
        };
        let template = timeout.clone();
        let winner = template.outputs[0].leaves[0]
            .presign
            .iter()
            .next()
            .copied()
            .unwrap_or(Party::Prover);
        let tx = Transaction::new(template, vec![vec![]]);
        match self.chain.broadcast(&tx) {
            Ok(next) => {
                self.chain = next;
                self.record(&tx.template.label.clone(), winner.name());
                self.challenge_path.push(format!("Timeout({})", winner.name()));
                self.settle_with(match winner {
                    Party::Prover => Outcome::ProverWins,
                    Party::Verifier => Outcome::VerifierWins,
                });
                true
            }
            Err(_) => false,
        }
    }

    fn settle_with(&mut self, outcome: Outcome) {
        debug_assert!(self.outcome.is_none(), "outcome set exactly once");
        self.outcome = Some(outcome);
        self.phase = Phase::Done;
    }

    /// The settled outcome.
    pub fn settle(&self) -> Option<Outcome> {
        self.outcome
    }

    /// The conflicting step pinned by the first-stage search, if finished.
    pub fn conflict_index(&self) -> Option<i64> {
        self.main.is_pinned().then(|| self.main.conflict_index())
    }
}

pub use drivers::{
    run_dispute, select_challenge, DisputeReport, ExecutionArtifacts, ProverDriver,
    ProverStrategy, VerifierDriver, VerifierPolicy,
};
