//! The scripted prover and verifier that play the dispute to completion.
//!
//! The prover answers from its (honest or faulty) execution artifacts; the
//! honest verifier compares every reveal against its own run, narrows the
//! search to the first conflicting step, picks the cheapest applicable
//! challenge and assembles the terminal assertion's witness from the
//! on-chain record. A seeded adversarial verifier policy drives the
//! completeness suite: it challenges honest claims, steers the search
//! arbitrarily, attempts every assertion and premature timeouts, and loses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hashchain::{build_chain, HashChain, StepHash};
use crate::ledger::Party;
use crate::machine::{load_program, run_to_budget, CpuError, Program, Status};
use crate::search::{lowest_correct_incorrect, lowest_incorrect_correct};
use crate::trace::{last_step_oracle, FullTrace, FullTraceEntry, LastStep, TraceEntry, WhichRead};

use super::checks::{acceptable_successors, expected_step, Binding, CheckKind};
use super::keys::{Keyring, RevealTag};
use super::wire::{
    encode_hashes, encode_pairs, status_byte, BranchChoice, HashTracePair, KickoffClaim,
    PcDataMsg, ScenarioMsg,
};
use super::{ChallengeKind, DisputeSession, Outcome, Phase};

/// One party's view of an execution: the combined trace, exit status and the
/// padded hash chain.
#[derive(Clone, Debug)]
pub struct ExecutionArtifacts {
    pub input_words: Vec<u32>,
    pub trace: FullTrace,
    pub status: Status,
    pub chain: HashChain,
    /// Index of the last real execution step.
    pub final_step: i64,
}

impl ExecutionArtifacts {
    /// Execute honestly and build the padded chain.
    pub fn run(
        binding: &Binding,
        input_words: &[u32],
    ) -> Result<Self, CpuError> {
        Self::run_program(&binding.program, binding, input_words)
    }

    fn run_program(
        program: &Program,
        binding: &Binding,
        input_words: &[u32],
    ) -> Result<Self, CpuError> {
        let m = binding.cfg.m();
        let (machine, loading) = load_program(program, input_words)?;
        let (finished, execution) = run_to_budget(machine, m);
        let chain =
            build_chain(binding.hasher.as_ref(), &loading, &execution, finished.status, m as usize);
        Ok(ExecutionArtifacts {
            input_words: input_words.to_vec(),
            final_step: execution.len() as i64 - 1,
            trace: FullTrace::new(loading, execution),
            status: finished.status,
            chain,
        })
    }

    /// Assemble artifacts from an already-built (typically faulty) run.
    pub fn from_parts(
        input_words: Vec<u32>,
        trace: FullTrace,
        status: Status,
        chain: HashChain,
    ) -> Self {
        ExecutionArtifacts {
            input_words,
            final_step: trace.execution_len() as i64 - 1,
            trace,
            status,
            chain,
        }
    }

    pub fn claim(&self) -> KickoffClaim {
        KickoffClaim {
            input_words: self.input_words.clone(),
            final_step: self.final_step,
            status: status_byte(self.status),
            final_hash: self
                .chain
                .hash_at(self.final_step)
                .expect("chain covers the final step"),
        }
    }

    pub fn hash_at(&self, index: i64) -> StepHash {
        self.chain.hash_at(index).unwrap_or(StepHash::ZERO)
    }

    /// The full record at `index`; past termination this is the terminal
    /// step's record verbatim (the halted machine is a fixpoint), below the
    /// loading base it is the empty record.
    pub fn full_entry_at(&self, index: i64) -> FullTraceEntry {
        if let Some(e) = self.trace.entry_at(index) {
            return *e;
        }
        if index > self.final_step {
            return self.trace.entry_at(self.final_step).copied().unwrap_or_default();
        }
        FullTraceEntry::default()
    }

    pub fn trace_at(&self, index: i64) -> TraceEntry {
        self.full_entry_at(index).outputs()
    }

    pub fn pair_at(&self, index: i64) -> HashTracePair {
        (self.hash_at(index), self.trace_at(index))
    }

    /// Brute-force last-writer lookup over the whole combined trace.
    pub fn last_writer(&self, address: u32, before_step: i64) -> LastStep {
        last_step_oracle(&self.trace, address, before_step)
    }

    /// The loading index whose write created `address`, if any.
    pub fn loading_writer(&self, address: u32) -> Option<i64> {
        let base = self.trace.base_index;
        self.trace
            .loading_entries()
            .iter()
            .position(|e| e.write_address == address)
            .map(|off| base + off as i64)
    }
}

/// How the prover behaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProverStrategy {
    /// Answer every request truthfully relative to its own chain — the
    /// strongest strategy against hash-chain bisection.
    Faithful,
    /// Stop responding after this many published messages.
    StallAfter(usize),
    /// Reveal a corrupted stepHash_k in the scenario message (when the
    /// escalation has room), forcing the reverse search.
    FabricateScenarioHash,
}

pub struct ProverDriver {
    pub artifacts: ExecutionArtifacts,
    pub keys: Keyring,
    pub strategy: ProverStrategy,
    published: usize,
}

impl ProverDriver {
    pub fn new(artifacts: ExecutionArtifacts, keys: Keyring, strategy: ProverStrategy) -> Self {
        ProverDriver { artifacts, keys, strategy, published: 0 }
    }

    /// The message for the current prover phase, or `None` to stall.
    pub fn act(&mut self, session: &DisputeSession) -> Option<(RevealTag, Vec<u8>)> {
        if let ProverStrategy::StallAfter(limit) = self.strategy {
            if self.published >= limit {
                return None;
            }
        }
        let a = &self.artifacts;
        let msg = match session.phase {
            Phase::AwaitKickoff => (RevealTag::Kickoff, a.claim().encode()),
            Phase::MainReveal(r) => {
                let hashes: Vec<StepHash> =
                    session.main.reveal_indices().iter().map(|i| a.hash_at(*i)).collect();
                (RevealTag::MainReveal(r), encode_hashes(&hashes))
            }
            Phase::AwaitFullTrace => {
                let j = session.main.conflict_index();
                (RevealTag::FullTrace, a.full_entry_at(j).to_bytes().to_vec())
            }
            Phase::AwaitScenario => {
                let branch = session.branch.as_ref()?;
                let k = branch.k;
                let j = session.main.conflict_index();
                let mut hash_k = a.hash_at(k);
                if self.strategy == ProverStrategy::FabricateScenarioHash && k < j - 1 {
                    hash_k.0[0] ^= 0x01;
                }
                let n1 = session.binding.cfg.n() as usize - 1;
                let round1_pairs = match &session.reverse {
                    Some(rev) => rev.reveal_indices().iter().map(|i| a.pair_at(*i)).collect(),
                    None => vec![(StepHash::ZERO, TraceEntry::default()); n1],
                };
                let msg = ScenarioMsg {
                    hash_before_k: a.hash_at(k - 1),
                    hash_k,
                    trace_k: a.trace_at(k),
                    round1_pairs,
                };
                (RevealTag::Scenario, msg.encode())
            }
            Phase::AuxReveal(r) => {
                let rev = session.reverse.as_ref()?;
                let pairs: Vec<HashTracePair> =
                    rev.reveal_indices().iter().map(|i| a.pair_at(*i)).collect();
                (RevealTag::AuxReveal(r), encode_pairs(&pairs))
            }
            Phase::NegReveal(r) => {
                let neg = session.neg.as_ref()?;
                let pairs: Vec<HashTracePair> =
                    neg.reveal_indices().iter().map(|i| a.pair_at(*i)).collect();
                (RevealTag::NegReveal(r), encode_pairs(&pairs))
            }
            Phase::AwaitNegTarget => {
                let neg = session.neg.as_ref()?;
                (RevealTag::NegTarget, a.full_entry_at(neg.target_index()).to_bytes().to_vec())
            }
            _ => return None,
        };
        self.published += 1;
        Some(msg)
    }
}

/// How the verifier behaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifierPolicy {
    Honest,
    /// A seeded adversarial schedule for completeness testing: challenges
    /// regardless of agreement, steers the search randomly, attempts
    /// premature timeouts and every terminal assertion before giving up.
    Adversarial,
}

pub enum VerifierAction {
    Message(RevealTag, Vec<u8>),
    Assert(CheckKind, Vec<Vec<u8>>),
    EarlyTimeout,
    Decline,
    Stall,
}

pub struct VerifierDriver {
    pub keys: Keyring,
    pub policy: VerifierPolicy,
    pub local: Option<ExecutionArtifacts>,
    rng: ChaCha8Rng,
    early_timeout_attempts: u32,
    pc_data: Option<(Vec<u8>, Vec<u8>)>,
    asserts_tried: Vec<CheckKind>,
}

impl VerifierDriver {
    pub fn new(keys: Keyring, policy: VerifierPolicy) -> Self {
        Self::with_seed(keys, policy, 0)
    }

    pub fn with_seed(keys: Keyring, policy: VerifierPolicy, seed: u64) -> Self {
        VerifierDriver {
            keys,
            policy,
            local: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            early_timeout_attempts: 2,
            pc_data: None,
            asserts_tried: Vec::new(),
        }
    }

    fn ensure_local(&mut self, session: &DisputeSession) {
        if self.local.is_none() {
            let claim = session.claim.as_ref().expect("kickoff seen");
            self.local = Some(
                ExecutionArtifacts::run(&session.binding, &claim.input_words)
                    .expect("agreed program runs"),
            );
        }
    }

    /// Is the prover's committed value at `index` consistent with the local
    /// chain?
    fn hash_correct(&self, session: &DisputeSession, index: i64) -> bool {
        let local = self.local.as_ref().expect("local run exists");
        match session.revealed_hashes.get(&index) {
            Some(h) => *h == local.hash_at(index),
            None => true, // unrevealed values cannot be contested
        }
    }

    /// The interval identifier choosing the lowest correct -> incorrect
    /// boundary pair of the current round.
    fn select_interval(&self, session: &DisputeSession) -> u8 {
        let (lo, hi) = session.main.bounds();
        let mut flags = vec![self.hash_correct(session, lo)];
        for i in session.main.reveal_indices() {
            flags.push(self.hash_correct(session, i));
        }
        flags.push(self.hash_correct(session, hi));
        lowest_correct_incorrect(&flags).map(|t| t as u8).unwrap_or(0)
    }

    fn reverse_select(&self, session: &DisputeSession) -> u8 {
        let rev = session.reverse.as_ref().expect("reverse search live");
        let (lo, hi) = rev.bounds();
        let mut flags = vec![self.hash_correct(session, lo)];
        for i in rev.reveal_indices() {
            flags.push(self.hash_correct(session, i));
        }
        flags.push(self.hash_correct(session, hi));
        lowest_incorrect_correct(&flags).map(|t| t as u8).unwrap_or(0)
    }

    /// Steer the opcode search toward the loading write of the disputed
    /// instruction.
    fn neg_select(&self, session: &DisputeSession, target: i64) -> u8 {
        let neg = session.neg.as_ref().expect("neg search live");
        let (lo, hi) = neg.pos_bounds();
        let n = session.binding.neg_cfg.n() as i64;
        let step = (hi - lo) / n;
        let pos = neg.to_pos(target);
        (((pos - lo - 1) / step).clamp(0, n - 1)) as u8
    }

    /// Assemble the witness triples for a terminal assertion from the
    /// on-chain record (plus the verifier's own pc data when needed).
    fn assert_witness(&mut self, session: &DisputeSession, kind: CheckKind) -> Vec<Vec<u8>> {
        let mut tags: Vec<RevealTag> = vec![RevealTag::Kickoff, RevealTag::FullTrace];
        for r in 1..=session.binding.cfg.rounds() {
            tags.push(RevealTag::MainSelect(r));
            tags.push(RevealTag::MainReveal(r));
        }
        match kind {
            CheckKind::ReadValueScenario { .. }
            | CheckKind::ReadRevealLink
            | CheckKind::LastStepHashMismatch => {
                tags.push(RevealTag::BranchReadValue);
                tags.push(RevealTag::Scenario);
                for r in 1..=session.binding.cfg.rounds() {
                    tags.push(RevealTag::AuxSelect(r));
                    if r >= 2 {
                        tags.push(RevealTag::AuxReveal(r));
                    }
                }
            }
            CheckKind::OpCodeMismatch => {
                tags.push(RevealTag::NegTarget);
                for r in 1..=session.binding.neg_cfg.rounds() {
                    tags.push(RevealTag::NegReveal(r));
                    tags.push(RevealTag::NegSelect(r));
                }
            }
            _ => {}
        }
        let mut witness = Vec::new();
        for tag in tags {
            if let Some((msg, sig)) = session.messages.get(&tag) {
                witness.push(tag.encode().to_vec());
                witness.push(msg.clone());
                witness.push(sig.clone());
            }
        }
        if kind == CheckKind::ProgramCounterMismatch {
            if let Some((msg, sig)) = self.pc_data_item(session) {
                witness.push(RevealTag::PcData.encode().to_vec());
                witness.push(msg);
                witness.push(sig);
            }
        }
        witness
    }

    /// The verifier's own committed (stepHash_{j-2}, trace_{j-1}), signed
    /// once with its pc-data key.
    fn pc_data_item(&mut self, session: &DisputeSession) -> Option<(Vec<u8>, Vec<u8>)> {
        if self.pc_data.is_none() {
            let local = self.local.as_ref()?;
            let j = session.conflict_index()?;
            let msg = PcDataMsg {
                hash_two_before: local.hash_at(j - 2),
                trace_before: local.trace_at(j - 1),
            }
            .encode();
            let sig = self.keys.key_mut(RevealTag::PcData).sign(&msg).ok()?;
            self.pc_data = Some((msg, sig.to_bytes()));
        }
        self.pc_data.clone()
    }

    pub fn act(&mut self, session: &DisputeSession) -> VerifierAction {
        match self.policy {
            VerifierPolicy::Honest => self.act_honest(session),
            VerifierPolicy::Adversarial => self.act_adversarial(session),
        }
    }

    fn act_honest(&mut self, session: &DisputeSession) -> VerifierAction {
        match session.phase {
            Phase::AwaitChallenge => {
                self.ensure_local(session);
                let local = self.local.as_ref().unwrap();
                let claim = session.claim.as_ref().unwrap();
                if *claim == local.claim() {
                    VerifierAction::Decline
                } else {
                    VerifierAction::Message(RevealTag::Challenge, vec![1])
                }
            }
            Phase::MainSelect(r) => {
                VerifierAction::Message(RevealTag::MainSelect(r), vec![self.select_interval(session)])
            }
            Phase::ChallengeSelection => self.choose_challenge(session),
            Phase::ReadValueChoice => self.read_value_choice(session),
            Phase::AuxSelect(r) => {
                VerifierAction::Message(RevealTag::AuxSelect(r), vec![self.reverse_select(session)])
            }
            Phase::AwaitLshAssert => {
                let w = self.assert_witness(session, CheckKind::LastStepHashMismatch);
                VerifierAction::Assert(CheckKind::LastStepHashMismatch, w)
            }
            Phase::NegSelect(r) => {
                let target = self.opcode_target(session);
                match target {
                    Some(t) => VerifierAction::Message(
                        RevealTag::NegSelect(r),
                        vec![self.neg_select(session, t)],
                    ),
                    None => VerifierAction::Stall,
                }
            }
            Phase::AwaitOpAssert => {
                let w = self.assert_witness(session, CheckKind::OpCodeMismatch);
                VerifierAction::Assert(CheckKind::OpCodeMismatch, w)
            }
            _ => VerifierAction::Stall,
        }
    }

    /// The loading index holding the instruction the conflicting step
    /// claims to have fetched.
    fn opcode_target(&self, session: &DisputeSession) -> Option<i64> {
        let local = self.local.as_ref()?;
        let entry = session.full_trace_j.as_ref()?;
        local.loading_writer(entry.read_pc_address)
    }

    /// The spec's challenge selection, then the concrete action for it.
    fn choose_challenge(&mut self, session: &DisputeSession) -> VerifierAction {
        self.ensure_local(session);
        let local = self.local.as_ref().unwrap();
        let entry = match &session.full_trace_j {
            Some(e) => *e,
            None => return VerifierAction::Stall,
        };
        let j = session.main.conflict_index();
        let kind = match select_challenge(&session.binding, local, session, j, &entry) {
            Some(k) => k,
            None => return VerifierAction::Stall, // our own state must be wrong; concede
        };
        match kind {
            ChallengeKind::TraceHash => {
                let w = self.assert_witness(session, CheckKind::TraceHashMismatch);
                VerifierAction::Assert(CheckKind::TraceHashMismatch, w)
            }
            ChallengeKind::Execution => {
                let w = self.assert_witness(session, CheckKind::ExecutionMismatch);
                VerifierAction::Assert(CheckKind::ExecutionMismatch, w)
            }
            ChallengeKind::ProgramCounter => {
                let w = self.assert_witness(session, CheckKind::ProgramCounterMismatch);
                VerifierAction::Assert(CheckKind::ProgramCounterMismatch, w)
            }
            ChallengeKind::ProgramInput(which) => {
                let k = CheckKind::ProgramInputMismatch { which };
                let w = self.assert_witness(session, k);
                VerifierAction::Assert(k, w)
            }
            ChallengeKind::ReadMeta(which) => {
                let k = CheckKind::ReadMeta { which };
                let w = self.assert_witness(session, k);
                VerifierAction::Assert(k, w)
            }
            ChallengeKind::ReadValue { which, scenario } => {
                let k = match scenario {
                    2 => entry.read_last_step(which).step().unwrap_or(0),
                    _ => match local.last_writer(entry.read_address(which), j) {
                        LastStep::Step(k) => k,
                        LastStep::Initial => return VerifierAction::Stall,
                    },
                };
                let branch = BranchChoice { which, scenario, k };
                VerifierAction::Message(RevealTag::BranchReadValue, branch.encode())
            }
            ChallengeKind::OpCode => {
                VerifierAction::Message(RevealTag::BranchOpcode, vec![0])
            }
            ChallengeKind::LastStepHash => VerifierAction::Stall, // never chosen up front
        }
    }

    /// After the scenario reveal: assert the scenario if the reveal is
    /// honest, prove the broken link if it is inconsistent, or escalate to
    /// the reverse search when the prover committed a wrong hash.
    fn read_value_choice(&mut self, session: &DisputeSession) -> VerifierAction {
        let local = self.local.as_ref().unwrap();
        let branch = match &session.branch {
            Some(b) => *b,
            None => return VerifierAction::Stall,
        };
        let sc = match &session.scenario {
            Some(s) => s.clone(),
            None => return VerifierAction::Stall,
        };
        let j = session.main.conflict_index();
        let hash_k_correct = sc.hash_k == local.hash_at(branch.k);
        if !hash_k_correct && branch.k < j - 1 {
            // escalate: reverse search round 1 select
            return VerifierAction::Message(
                RevealTag::AuxSelect(1),
                vec![self.reverse_select(session)],
            );
        }
        let kind = CheckKind::ReadValueScenario { which: branch.which, scenario: branch.scenario };
        if !self.asserts_tried.contains(&kind) {
            self.asserts_tried.push(kind);
            let w = self.assert_witness(session, kind);
            return VerifierAction::Assert(kind, w);
        }
        if !self.asserts_tried.contains(&CheckKind::ReadRevealLink) {
            self.asserts_tried.push(CheckKind::ReadRevealLink);
            let w = self.assert_witness(session, CheckKind::ReadRevealLink);
            return VerifierAction::Assert(CheckKind::ReadRevealLink, w);
        }
        VerifierAction::Stall
    }

    fn act_adversarial(&mut self, session: &DisputeSession) -> VerifierAction {
        if self.early_timeout_attempts > 0 && self.rng.gen_bool(0.3) {
            self.early_timeout_attempts -= 1;
            return VerifierAction::EarlyTimeout;
        }
        let n = session.binding.cfg.n();
        match session.phase {
            Phase::AwaitChallenge => VerifierAction::Message(RevealTag::Challenge, vec![1]),
            Phase::MainSelect(r) => {
                let t = self.rng.gen_range(0..n) as u8;
                VerifierAction::Message(RevealTag::MainSelect(r), vec![t])
            }
            Phase::ChallengeSelection => {
                // try every direct assertion with a best-effort witness,
                // then descend a random branch, then give up
                let direct = [
                    CheckKind::TraceHashMismatch,
                    CheckKind::ExecutionMismatch,
                    CheckKind::ProgramCounterMismatch,
                    CheckKind::ProgramInputMismatch { which: WhichRead::Read1 },
                    CheckKind::ProgramInputMismatch { which: WhichRead::Read2 },
                    CheckKind::ReadMeta { which: WhichRead::Read1 },
                    CheckKind::ReadMeta { which: WhichRead::Read2 },
                ];
                for kind in direct {
                    if !self.asserts_tried.contains(&kind) {
                        self.asserts_tried.push(kind);
                        self.ensure_local(session);
                        let w = self.assert_witness(session, kind);
                        return VerifierAction::Assert(kind, w);
                    }
                }
                if self.rng.gen_bool(0.5) {
                    let entry = session.full_trace_j.as_ref();
                    let which =
                        if self.rng.gen_bool(0.5) { WhichRead::Read1 } else { WhichRead::Read2 };
                    let scenario = self.rng.gen_range(1..=3u8);
                    let j = session.main.conflict_index();
                    let k = entry
                        .and_then(|e| e.read_last_step(which).step())
                        .unwrap_or_else(|| self.rng.gen_range(0..j.max(1)));
                    let branch = BranchChoice { which, scenario, k };
                    VerifierAction::Message(RevealTag::BranchReadValue, branch.encode())
                } else {
                    VerifierAction::Message(RevealTag::BranchOpcode, vec![0])
                }
            }
            Phase::ReadValueChoice => {
                let branch = session.branch.expect("branch published");
                let kind =
                    CheckKind::ReadValueScenario { which: branch.which, scenario: branch.scenario };
                for k in [kind, CheckKind::ReadRevealLink] {
                    if !self.asserts_tried.contains(&k) {
                        self.asserts_tried.push(k);
                        self.ensure_local(session);
                        let w = self.assert_witness(session, k);
                        return VerifierAction::Assert(k, w);
                    }
                }
                let t = self.rng.gen_range(0..n) as u8;
                VerifierAction::Message(RevealTag::AuxSelect(1), vec![t])
            }
            Phase::AuxSelect(r) => {
                let t = self.rng.gen_range(0..n) as u8;
                VerifierAction::Message(RevealTag::AuxSelect(r), vec![t])
            }
            Phase::AwaitLshAssert => {
                let kind = CheckKind::LastStepHashMismatch;
                if !self.asserts_tried.contains(&kind) {
                    self.asserts_tried.push(kind);
                    self.ensure_local(session);
                    let w = self.assert_witness(session, kind);
                    return VerifierAction::Assert(kind, w);
                }
                VerifierAction::Stall
            }
            Phase::NegSelect(r) => {
                let t = self.rng.gen_range(0..n) as u8;
                VerifierAction::Message(RevealTag::NegSelect(r), vec![t])
            }
            Phase::AwaitOpAssert => {
                let kind = CheckKind::OpCodeMismatch;
                if !self.asserts_tried.contains(&kind) {
                    self.asserts_tried.push(kind);
                    self.ensure_local(session);
                    let w = self.assert_witness(session, kind);
                    return VerifierAction::Assert(kind, w);
                }
                VerifierAction::Stall
            }
            _ => VerifierAction::Stall,
        }
    }
}

/// The verifier's challenge choice for the revealed conflicting step,
/// ordered by on-chain interaction count.
pub fn select_challenge(
    binding: &Binding,
    local: &ExecutionArtifacts,
    session: &DisputeSession,
    j: i64,
    entry: &FullTraceEntry,
) -> Option<ChallengeKind> {
    // 1. the committed hash link itself is broken
    let prev = session.revealed_hashes.get(&(j - 1));
    let claimed = session.revealed_hashes.get(&j);
    if let (Some(prev), Some(claimed)) = (prev, claimed) {
        if !acceptable_successors(binding, prev, entry).contains(claimed) {
            return Some(ChallengeKind::TraceHash);
        }
    }
    // 2. the revealed step does not execute to its own outputs
    let expected = expected_step(&binding.program, entry);
    if expected.read1_address != entry.read1_address
        || expected.read2_address != entry.read2_address
        || expected.outputs != entry.outputs()
    {
        return Some(ChallengeKind::Execution);
    }
    // 3. the step starts from the wrong program counter
    if entry.read_pc_address != local.trace_at(j - 1).write_pc {
        return Some(ChallengeKind::ProgramCounter);
    }
    // 4. an input-region read contradicts the committed input
    for which in [WhichRead::Read1, WhichRead::Read2] {
        let addr = entry.read_address(which);
        let region = binding.program.input_region;
        if region.contains(addr) {
            let word = local.input_words.get((addr - region.base) as usize).copied().unwrap_or(0);
            if entry.read_value(which) != word {
                return Some(ChallengeKind::ProgramInput(which));
            }
        }
    }
    // 5. a read value or its lastStep bookkeeping is wrong
    for which in [WhichRead::Read1, WhichRead::Read2] {
        let addr = entry.read_address(which);
        let value = entry.read_value(which);
        let claimed_last = entry.read_last_step(which);
        let true_last = local.last_writer(addr, j);
        match claimed_last {
            LastStep::Initial => {
                if value != 0 {
                    return Some(ChallengeKind::ReadMeta(which));
                }
                if addr != 0 && true_last != LastStep::Initial {
                    return Some(ChallengeKind::ReadValue { which, scenario: 1 });
                }
            }
            LastStep::Step(k) => {
                if k < -(binding.loading_len()) || k >= j {
                    return Some(ChallengeKind::ReadMeta(which));
                }
                let writes_back = local.trace_at(k).write_address == addr
                    && local.trace_at(k).write_value == value;
                if !writes_back {
                    return Some(ChallengeKind::ReadValue { which, scenario: 2 });
                }
                if let LastStep::Step(true_k) = true_last {
                    if true_k > k && addr != 0 {
                        return Some(ChallengeKind::ReadValue { which, scenario: 3 });
                    }
                }
            }
        }
    }
    // 6. the fetched opcode contradicts the loaded program
    if let Some(load_idx) = local.loading_writer(entry.read_pc_address) {
        if local.trace_at(load_idx).write_value != entry.read_pc_opcode {
            return Some(ChallengeKind::OpCode);
        }
    }
    None
}

/// Everything a finished dispute reports.
#[derive(Clone, Debug)]
pub struct DisputeReport {
    pub outcome: Outcome,
    pub tx_count: usize,
    pub challenge_path: Vec<String>,
    pub picks: Vec<u8>,
    pub conflict_index: Option<i64>,
    pub identifier_bits: String,
}

/// Drive a session to settlement.
pub fn run_dispute(
    session: &mut DisputeSession,
    prover: &mut ProverDriver,
    verifier: &mut VerifierDriver,
) -> DisputeReport {
    let mut fuel = 10_000u32;
    while session.outcome.is_none() {
        fuel -= 1;
        assert!(fuel > 0, "dispute failed to settle");
        match session.phase.actor() {
            Party::Prover => match prover.act(session) {
                Some((tag, bytes)) => {
                    session.publish(tag, bytes, &mut prover.keys).expect("prover message accepted")
                }
                None => session.timeout_current(),
            },
            Party::Verifier => match verifier.act(session) {
                VerifierAction::Message(tag, bytes) => session
                    .publish(tag, bytes, &mut verifier.keys)
                    .expect("verifier message accepted"),
                VerifierAction::Assert(kind, witness) => {
                    let _ = session.try_assert(kind, witness);
                }
                VerifierAction::EarlyTimeout => {
                    let _ = session.try_timeout_now();
                }
                VerifierAction::Decline | VerifierAction::Stall => session.timeout_current(),
            },
        }
    }
    let picks = session.main.picks().to_vec();
    DisputeReport {
        outcome: session.outcome.expect("settled"),
        tx_count: session.tx_count,
        challenge_path: session.challenge_path.clone(),
        identifier_bits: crate::search::identifier_bits(&session.binding.cfg, &picks),
        conflict_index: session.conflict_index(),
        picks,
    }
}
