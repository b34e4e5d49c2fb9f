//! The on-chain assertion checks terminating each challenge path.
//!
//! Every check evaluates purely over (a) parameters bound at setup — the
//! search shape, the agreed program, the hash function and the one-time key
//! registry — and (b) witness data: (tag, message, signature) triples copied
//! from messages already on chain. Signatures are verified against the
//! registry before anything is trusted, and hash indices are recomputed from
//! the committed interval identifiers, so neither party can substitute data
//! the other never signed or pass off one index's hash as another's.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::hashchain::{step_hash, ChainHasher, StepHash};
use crate::isa::{self, Instruction, StepOutcome, Word};
use crate::ledger::{ChainCheck, SpendContext};
use crate::machine::{load_program, Program};
use crate::ots::{ot_verify, OneTimeSignature};
use crate::search::{
    reconstruct_index, resolve_main_hash, resolve_neg_hash, resolve_reverse_hash, MainHashSource,
    NegHashSource, NegSearch, ReverseHashSource, ReverseSearch, SearchConfig,
};
use crate::trace::{FullTraceEntry, TraceEntry, WhichRead};

use super::keys::{KeyRegistry, RevealTag};
use super::wire::{BranchChoice, KickoffClaim, PcDataMsg, ScenarioMsg};

/// Parameters common to every check, fixed during the setup ceremony.
#[derive(Debug)]
pub struct Binding {
    pub cfg: SearchConfig,
    pub neg_cfg: SearchConfig,
    pub program: Program,
    pub hasher: Arc<dyn ChainHasher>,
    pub keys: KeyRegistry,
}

impl Binding {
    pub fn input_capacity(&self) -> usize {
        self.program.input_region.len as usize
    }

    pub fn loading_len(&self) -> i64 {
        self.program.loading_len() as i64
    }

    /// Rebuild the loading entries for the committed input words.
    pub fn loading_entries(&self, input_words: &[Word]) -> Option<Vec<FullTraceEntry>> {
        let (_, entries) = load_program(&self.program, input_words).ok()?;
        Some(entries)
    }

    /// The negative-region chain value at `index` for the committed input:
    /// ZERO at and below the base, the loading fold above it.
    pub fn loading_hash(&self, input_words: &[Word], index: i64) -> Option<StepHash> {
        let m = self.loading_len();
        if index < -m {
            return Some(StepHash::ZERO);
        }
        if index > -1 {
            return None;
        }
        let entries = self.loading_entries(input_words)?;
        let mut h = StepHash::ZERO;
        for (off, entry) in entries.iter().enumerate() {
            h = step_hash(self.hasher.as_ref(), &h, &entry.outputs());
            if -m + off as i64 == index {
                return Some(h);
            }
        }
        None
    }

    /// The agreed initial CPU state, stepHash_{-1}.
    pub fn initial_hash(&self, input_words: &[Word]) -> Option<StepHash> {
        if self.loading_len() == 0 {
            return Some(StepHash::ZERO);
        }
        self.loading_hash(input_words, -1)
    }
}

/// Witness messages whose signatures verified against the registry.
pub struct RevealedItems {
    items: BTreeMap<RevealTag, Vec<u8>>,
}

impl RevealedItems {
    /// Parse and verify `(tag, msg, sig)` triples.
    pub fn from_witness(binding: &Binding, witness: &[Vec<u8>]) -> Result<Self, String> {
        if witness.len() % 3 != 0 {
            return Err("witness is not a sequence of (tag, msg, sig) triples".into());
        }
        let mut items = BTreeMap::new();
        for triple in witness.chunks(3) {
            let tag = RevealTag::decode(&triple[0]).ok_or("unknown reveal tag")?;
            let key = binding.keys.get(&tag).ok_or("tag outside this session")?;
            if triple[1].len() != key.params.message_len {
                return Err(format!("{tag:?}: message length mismatch"));
            }
            let sig = OneTimeSignature::from_bytes(&key.params, &triple[2])
                .ok_or_else(|| format!("{tag:?}: malformed signature"))?;
            if !ot_verify(key, &triple[1], &sig) {
                return Err(format!("{tag:?}: signature does not verify"));
            }
            items.insert(tag, triple[1].clone());
        }
        Ok(RevealedItems { items })
    }

    pub fn get(&self, tag: RevealTag) -> Result<&[u8], String> {
        self.items.get(&tag).map(|v| v.as_slice()).ok_or_else(|| format!("missing item {tag:?}"))
    }

    pub fn kickoff(&self, binding: &Binding) -> Result<KickoffClaim, String> {
        KickoffClaim::decode(self.get(RevealTag::Kickoff)?, binding.input_capacity())
            .ok_or_else(|| "malformed kickoff".into())
    }

    pub fn full_trace(&self) -> Result<FullTraceEntry, String> {
        FullTraceEntry::from_bytes(self.get(RevealTag::FullTrace)?)
            .ok_or_else(|| "malformed full trace entry".into())
    }

    /// The main-search interval identifiers, one per round.
    pub fn main_picks(&self, binding: &Binding) -> Result<Vec<u8>, String> {
        self.picks(binding, RevealTag::MainSelect, binding.cfg.rounds(), binding.cfg.n())
    }

    fn picks(
        &self,
        _binding: &Binding,
        make: fn(u32) -> RevealTag,
        rounds: u32,
        n: u32,
    ) -> Result<Vec<u8>, String> {
        let mut picks = Vec::with_capacity(rounds as usize);
        for r in 1..=rounds {
            let raw = self.get(make(r))?;
            let t = raw[0];
            if t as u32 >= n {
                return Err(format!("select {r} out of range"));
            }
            picks.push(t);
        }
        Ok(picks)
    }

    /// The prover's chain value at main-search `index`, resolved through the
    /// committed picks.
    pub fn main_hash(
        &self,
        binding: &Binding,
        picks: &[u8],
        claim: &KickoffClaim,
        index: i64,
    ) -> Result<StepHash, String> {
        match resolve_main_hash(&binding.cfg, picks, index)
            .ok_or_else(|| format!("index {index} not on the revealed path"))?
        {
            MainHashSource::AgreedBase => binding
                .initial_hash(&claim.input_words)
                .ok_or_else(|| "agreed initial hash underivable".into()),
            MainHashSource::KickoffFinal => claim
                .padded_final(binding.cfg.m() as i64)
                .ok_or_else(|| "malformed kickoff final".into()),
            MainHashSource::Reveal { round, slot } => {
                let raw = self.get(RevealTag::MainReveal(round))?;
                let at = (slot as usize - 1) * 32;
                StepHash::from_bytes(&raw[at..at + 32]).ok_or_else(|| "bad hash".into())
            }
        }
    }

    pub fn scenario(&self, binding: &Binding) -> Result<ScenarioMsg, String> {
        ScenarioMsg::decode(self.get(RevealTag::Scenario)?, binding.cfg.n())
            .ok_or_else(|| "malformed scenario reveal".into())
    }

    pub fn branch(&self) -> Result<BranchChoice, String> {
        BranchChoice::decode(self.get(RevealTag::BranchReadValue)?)
            .ok_or_else(|| "malformed branch choice".into())
    }
}

/// What executing the revealed entry would do, per the agreed ISA and the
/// read-only regions.
pub struct ExpectedStep {
    pub read1_address: Word,
    pub read2_address: Word,
    pub outputs: TraceEntry,
    /// The sentinel that follows if this step terminates the run.
    pub sentinel_after: Option<StepHash>,
}

pub fn expected_step(program: &Program, entry: &FullTraceEntry) -> ExpectedStep {
    let instr: Instruction = isa::decode(entry.read_pc_opcode);
    let read1_address = instr.read1_address().unwrap_or(0);
    let read2_address = instr.read2_address(entry.read1_value).unwrap_or(0);
    let pc = entry.read_pc_address;
    let effect = instr.apply(entry.read1_value, entry.read2_value, pc);
    let mut outputs = TraceEntry {
        write_address: effect.write_address,
        write_value: effect.write_value,
        write_pc: effect.next_pc,
    };
    let sentinel_after = match effect.outcome {
        StepOutcome::Halt => Some(StepHash::ONE),
        StepOutcome::Trap => Some(StepHash::EXCEPTION),
        StepOutcome::Continue => {
            let read_only = program.program_region.contains(effect.write_address)
                || program.input_region.contains(effect.write_address);
            if (effect.write_address, effect.write_value) != (0, 0) && read_only {
                // mirrors the machine: a trapping step records no write
                outputs = TraceEntry { write_address: 0, write_value: 0, write_pc: pc };
                Some(StepHash::EXCEPTION)
            } else {
                None
            }
        }
    };
    ExpectedStep { read1_address, read2_address, outputs, sentinel_after }
}

/// The chain values that may legitimately follow `prev` given the revealed
/// entry at that index: sentinels propagate, a terminal-shaped entry may
/// start its sentinel run, anything else must be the hash link.
pub(crate) fn acceptable_successors(
    binding: &Binding,
    prev: &StepHash,
    entry: &FullTraceEntry,
) -> Vec<StepHash> {
    if *prev == StepHash::ONE {
        return vec![StepHash::ONE];
    }
    if *prev == StepHash::EXCEPTION {
        return vec![StepHash::EXCEPTION];
    }
    let mut ok = vec![step_hash(binding.hasher.as_ref(), prev, &entry.outputs())];
    let expected = expected_step(&binding.program, entry);
    if let Some(sentinel) = expected.sentinel_after {
        if expected.outputs == entry.outputs() {
            ok.push(sentinel);
        }
    }
    ok
}

/// Successor rule over an output-only trace (the auxiliary reveals): the
/// terminal shape cannot be decoded from outputs alone, so a zero-write
/// stay-put entry admits either sentinel. Fabricating such an entry only
/// moves the conflict to a challenge that sees the full record.
pub(crate) fn acceptable_successors_outputs(
    binding: &Binding,
    prev: &StepHash,
    trace: &TraceEntry,
) -> Vec<StepHash> {
    if *prev == StepHash::ONE {
        return vec![StepHash::ONE];
    }
    if *prev == StepHash::EXCEPTION {
        return vec![StepHash::EXCEPTION];
    }
    let mut ok = vec![step_hash(binding.hasher.as_ref(), prev, trace)];
    if trace.write_address == 0 && trace.write_value == 0 {
        ok.push(StepHash::ONE);
        ok.push(StepHash::EXCEPTION);
    }
    ok
}

/// The named checks, one per challenge terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// stepHash_j is not a legitimate successor of stepHash_{j-1}.
    TraceHashMismatch,
    /// Re-executing the revealed entry contradicts its operands or outputs.
    ExecutionMismatch,
    /// writePC_{j-1} (verifier-provided, anchored) differs from readPC_j.
    ProgramCounterMismatch,
    /// An input-region read differs from the committed input word.
    ProgramInputMismatch { which: WhichRead },
    /// lastStep out of bounds, or INITIAL with a nonzero value.
    ReadMeta { which: WhichRead },
    /// The three read-value scenarios over the prover's revealed step k.
    ReadValueScenario { which: WhichRead, scenario: u8 },
    /// The prover's scenario reveal is not internally hash-linked.
    ReadRevealLink,
    /// The reverse search pinned an illegitimate hash transition.
    LastStepHashMismatch,
    /// The loading write for readPC.address_j holds a different opcode.
    OpCodeMismatch,
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        use WhichRead::{Read1, Read2};
        match self {
            CheckKind::TraceHashMismatch => "trace_hash_mismatch",
            CheckKind::ExecutionMismatch => "execution_mismatch",
            CheckKind::ProgramCounterMismatch => "program_counter_mismatch",
            CheckKind::ProgramInputMismatch { which: Read1 } => "program_input_mismatch_read1",
            CheckKind::ProgramInputMismatch { which: Read2 } => "program_input_mismatch_read2",
            CheckKind::ReadMeta { which: Read1 } => "read_meta_read1",
            CheckKind::ReadMeta { which: Read2 } => "read_meta_read2",
            CheckKind::ReadValueScenario { which: Read1, scenario: 1 } => "read_value_scenario1_read1",
            CheckKind::ReadValueScenario { which: Read1, scenario: 2 } => "read_value_scenario2_read1",
            CheckKind::ReadValueScenario { which: Read1, scenario: _ } => "read_value_scenario3_read1",
            CheckKind::ReadValueScenario { which: Read2, scenario: 1 } => "read_value_scenario1_read2",
            CheckKind::ReadValueScenario { which: Read2, scenario: 2 } => "read_value_scenario2_read2",
            CheckKind::ReadValueScenario { which: Read2, scenario: _ } => "read_value_scenario3_read2",
            CheckKind::ReadRevealLink => "read_reveal_link",
            CheckKind::LastStepHashMismatch => "last_step_hash_mismatch",
            CheckKind::OpCodeMismatch => "opcode_mismatch",
        }
    }

    /// Every kind a session registers.
    pub fn all() -> Vec<CheckKind> {
        let mut kinds = vec![
            CheckKind::TraceHashMismatch,
            CheckKind::ExecutionMismatch,
            CheckKind::ProgramCounterMismatch,
            CheckKind::ReadRevealLink,
            CheckKind::LastStepHashMismatch,
            CheckKind::OpCodeMismatch,
        ];
        for which in [WhichRead::Read1, WhichRead::Read2] {
            kinds.push(CheckKind::ProgramInputMismatch { which });
            kinds.push(CheckKind::ReadMeta { which });
            for scenario in 1..=3 {
                kinds.push(CheckKind::ReadValueScenario { which, scenario });
            }
        }
        kinds
    }
}

/// A check kind bound to its session parameters.
#[derive(Debug, Clone)]
pub struct DisputeCheck {
    pub kind: CheckKind,
    pub binding: Arc<Binding>,
}

impl DisputeCheck {
    fn eval_inner(&self, witness: &[Vec<u8>]) -> Result<bool, String> {
        let binding = self.binding.as_ref();
        let items = RevealedItems::from_witness(binding, witness)?;
        match self.kind {
            CheckKind::TraceHashMismatch => eval_trace_hash(binding, &items),
            CheckKind::ExecutionMismatch => eval_execution(binding, &items),
            CheckKind::ProgramCounterMismatch => eval_pc(binding, &items),
            CheckKind::ProgramInputMismatch { which } => eval_input(binding, &items, which),
            CheckKind::ReadMeta { which } => eval_read_meta(binding, &items, which),
            CheckKind::ReadValueScenario { which, scenario } => {
                eval_read_value(binding, &items, which, scenario)
            }
            CheckKind::ReadRevealLink => eval_read_reveal_link(binding, &items),
            CheckKind::LastStepHashMismatch => eval_last_step_hash(binding, &items),
            CheckKind::OpCodeMismatch => eval_opcode(binding, &items),
        }
    }
}

impl ChainCheck for DisputeCheck {
    fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn descriptor(&self) -> Vec<u8> {
        let mut out = self.kind.name().as_bytes().to_vec();
        out.extend_from_slice(&binding_digest(&self.binding));
        out
    }

    fn eval(&self, witness: &[Vec<u8>], _ctx: &SpendContext<'_>) -> Result<bool, String> {
        self.eval_inner(witness)
    }
}

fn binding_digest(binding: &Binding) -> [u8; 8] {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(binding.cfg.n().to_le_bytes());
    h.update(binding.cfg.rounds().to_le_bytes());
    h.update(binding.neg_cfg.rounds().to_le_bytes());
    h.update(binding.program.entry_pc.to_le_bytes());
    h.update((binding.program.instructions.len() as u64).to_le_bytes());
    let out = h.finalize();
    out[..8].try_into().unwrap()
}

/// Common preamble: kickoff claim, picks and conflict index j.
fn conflict_context(
    binding: &Binding,
    items: &RevealedItems,
) -> Result<(KickoffClaim, Vec<u8>, i64), String> {
    let claim = items.kickoff(binding)?;
    let picks = items.main_picks(binding)?;
    let j = reconstruct_index(&binding.cfg, &picks);
    Ok((claim, picks, j))
}

fn eval_trace_hash(binding: &Binding, items: &RevealedItems) -> Result<bool, String> {
    let (claim, picks, j) = conflict_context(binding, items)?;
    let entry = items.full_trace()?;
    let prev = items.main_hash(binding, &picks, &claim, j - 1)?;
    let claimed = items.main_hash(binding, &picks, &claim, j)?;
    Ok(!acceptable_successors(binding, &prev, &entry).contains(&claimed))
}

fn eval_execution(binding: &Binding, items: &RevealedItems) -> Result<bool, String> {
    let entry = items.full_trace()?;
    let expected = expected_step(&binding.program, &entry);
    Ok(expected.read1_address != entry.read1_address
        || expected.read2_address != entry.read2_address
        || expected.outputs != entry.outputs())
}

fn eval_pc(binding: &Binding, items: &RevealedItems) -> Result<bool, String> {
    let (claim, picks, j) = conflict_context(binding, items)?;
    let entry = items.full_trace()?;
    let data = PcDataMsg::decode(items.get(RevealTag::PcData)?)
        .ok_or("malformed pc data")?;
    let anchor = items.main_hash(binding, &picks, &claim, j - 1)?;
    if anchor == StepHash::ONE || anchor == StepHash::EXCEPTION {
        return Ok(false); // past termination there is no pc to dispute
    }
    let linked = step_hash(binding.hasher.as_ref(), &data.hash_two_before, &data.trace_before);
    Ok(linked == anchor && data.trace_before.write_pc != entry.read_pc_address)
}

fn eval_input(binding: &Binding, items: &RevealedItems, which: WhichRead) -> Result<bool, String> {
    let claim = items.kickoff(binding)?;
    let entry = items.full_trace()?;
    let addr = entry.read_address(which);
    let region = binding.program.input_region;
    if !region.contains(addr) {
        return Ok(false);
    }
    let word = claim.input_words[(addr - region.base) as usize];
    Ok(entry.read_value(which) != word)
}

fn eval_read_meta(binding: &Binding, items: &RevealedItems, which: WhichRead) -> Result<bool, String> {
    let (_, _, j) = conflict_context(binding, items)?;
    let entry = items.full_trace()?;
    match entry.read_last_step(which).step() {
        None => Ok(entry.read_value(which) != 0),
        Some(k) => Ok(k < -binding.loading_len() || k >= j),
    }
}

/// The step the scenario reveal is about: named by the verifier for
/// scenarios 1 and 3, implied by the revealed lastStep for scenario 2.
fn scenario_k(
    entry: &FullTraceEntry,
    branch: &BranchChoice,
    which: WhichRead,
    scenario: u8,
) -> Option<i64> {
    match scenario {
        2 => entry.read_last_step(which).step(),
        1 | 3 => Some(branch.k),
        _ => None,
    }
}

fn eval_read_value(
    binding: &Binding,
    items: &RevealedItems,
    which: WhichRead,
    scenario: u8,
) -> Result<bool, String> {
    let (_, _, j) = conflict_context(binding, items)?;
    let entry = items.full_trace()?;
    let branch = items.branch()?;
    if branch.which != which || branch.scenario != scenario {
        return Ok(false);
    }
    let sc = items.scenario(binding)?;
    let k = match scenario_k(&entry, &branch, which, scenario) {
        Some(k) => k,
        None => return Ok(false),
    };
    if k < -binding.loading_len() || k >= j {
        return Ok(false);
    }
    let addr = entry.read_address(which);
    let value = entry.read_value(which);
    let last = entry.read_last_step(which);
    Ok(match scenario {
        // INITIAL claimed, yet step k wrote this address
        1 => last.step().is_none() && addr != 0 && sc.trace_k.write_address == addr,
        // the named last step did not write what was read
        2 => {
            last.step() == Some(k)
                && (sc.trace_k.write_address != addr || sc.trace_k.write_value != value)
        }
        // a later write than the claimed last step exists
        3 => match last.step() {
            Some(claimed) => {
                k > claimed && addr != 0 && sc.trace_k.write_address == addr
            }
            None => false,
        },
        _ => false,
    })
}

fn eval_read_reveal_link(binding: &Binding, items: &RevealedItems) -> Result<bool, String> {
    let sc = items.scenario(binding)?;
    Ok(!acceptable_successors_outputs(binding, &sc.hash_before_k, &sc.trace_k)
        .contains(&sc.hash_k))
}

fn eval_last_step_hash(binding: &Binding, items: &RevealedItems) -> Result<bool, String> {
    let (claim, picks, j) = conflict_context(binding, items)?;
    let entry = items.full_trace()?;
    let branch = items.branch()?;
    let sc = items.scenario(binding)?;
    let k = match scenario_k(&entry, &branch, branch.which, branch.scenario) {
        Some(k) => k,
        None => return Ok(false),
    };
    if k >= j - 1 {
        return Ok(false); // the reverse search needs room between k and j-1
    }
    let aux_picks = items.picks(binding, RevealTag::AuxSelect, binding.cfg.rounds(), binding.cfg.n())?;
    let mut search = match ReverseSearch::new(binding.cfg, k, j - 1) {
        Some(s) => s,
        None => return Ok(false),
    };
    let mut round_pairs: Vec<Vec<super::wire::HashTracePair>> = vec![sc.round1_pairs.clone()];
    for (r, t) in aux_picks.iter().enumerate() {
        if r + 1 > 1 {
            let raw = items.get(RevealTag::AuxReveal(r as u32 + 1))?;
            round_pairs.push(
                super::wire::decode_pairs(raw).ok_or("malformed aux pairs")?,
            );
        }
        search.apply_pick(*t);
    }
    let (q_prev, q) = match search.pinned() {
        Some(p) => p,
        None => return Ok(false),
    };
    let value_at = |index: i64, need_trace: bool| -> Option<(StepHash, Option<TraceEntry>)> {
        match resolve_reverse_hash(&binding.cfg, k, j - 1, &aux_picks, index)? {
            ReverseHashSource::AnchorLow => Some((sc.hash_k, None)),
            ReverseHashSource::AnchorHigh => {
                let h = items.main_hash(binding, &picks, &claim, j - 1).ok()?;
                if need_trace {
                    None
                } else {
                    Some((h, None))
                }
            }
            ReverseHashSource::Pair { round, slot } => {
                let pair = round_pairs.get(round as usize - 1)?.get(slot as usize - 1)?;
                Some((pair.0, Some(pair.1)))
            }
        }
    };
    let (prev_hash, _) = match value_at(q_prev, false) {
        Some(v) => v,
        None => return Ok(false),
    };
    let (q_hash, q_trace) = match value_at(q, true) {
        Some(v) => v,
        None => return Ok(false),
    };
    let q_trace = match q_trace {
        Some(t) => t,
        None => return Ok(false),
    };
    Ok(!acceptable_successors_outputs(binding, &prev_hash, &q_trace).contains(&q_hash))
}

fn eval_opcode(binding: &Binding, items: &RevealedItems) -> Result<bool, String> {
    let claim = items.kickoff(binding)?;
    let entry = items.full_trace()?;
    let neg_picks =
        items.picks(binding, RevealTag::NegSelect, binding.neg_cfg.rounds(), binding.neg_cfg.n())?;
    let mut search = NegSearch::new(binding.neg_cfg);
    for t in &neg_picks {
        search.apply_pick(*t);
    }
    if !search.is_pinned() {
        return Ok(false);
    }
    let target_index = search.target_index();
    let target = FullTraceEntry::from_bytes(items.get(RevealTag::NegTarget)?)
        .ok_or("malformed target entry")?;
    let hash_value = |index: i64| -> Option<StepHash> {
        match resolve_neg_hash(&binding.neg_cfg, &neg_picks, index)? {
            NegHashSource::BaseZero => Some(StepHash::ZERO),
            NegHashSource::AgreedInitial => binding.initial_hash(&claim.input_words),
            NegHashSource::Reveal { round, slot } => {
                let raw = items.get(RevealTag::NegReveal(round)).ok()?;
                let at = (slot as usize - 1) * 44;
                super::wire::decode_pair(&raw[at..at + 44]).map(|p| p.0)
            }
        }
    };
    let prev = match hash_value(target_index - 1) {
        Some(h) => h,
        None => return Ok(false),
    };
    let at_target = match hash_value(target_index) {
        Some(h) => h,
        None => return Ok(false),
    };
    // the revealed entry must be the committed loading write for the pinned
    // index, and that write must contradict the claimed opcode
    let linked =
        step_hash(binding.hasher.as_ref(), &prev, &target.outputs()) == at_target;
    Ok(linked
        && target.write_address == entry.read_pc_address
        && target.write_value != entry.read_pc_opcode)
}

/// Spec-level `eval_assertion`: run a registered check by name.
pub fn eval_assertion_by_name(
    name: &str,
    binding: &Arc<Binding>,
    witness: &[Vec<u8>],
) -> Result<bool, UnknownCheck> {
    for kind in CheckKind::all() {
        if kind.name() == name {
            let check = DisputeCheck { kind, binding: binding.clone() };
            return Ok(check.eval_inner(witness).unwrap_or(false));
        }
    }
    Err(UnknownCheck(name.to_string()))
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown check `{0}`")]
pub struct UnknownCheck(pub String);
