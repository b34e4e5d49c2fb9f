//! The setup ceremony: the complete pre-signed transaction DAG.
//!
//! Every path the dispute can take exists before kickoff: the claim, the
//! challenge, l search rounds, the full-trace reveal, one fan-out branch per
//! challenge kind, the auxiliary searches, the terminal assertions (which
//! double as the winner's sweep) and a timeout branch at every hop. Message
//! templates chain OT-commitments so each response duplicates the message it
//! answers and signs over the concatenation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ledger::{
    presign, Amount, Chain, CommitSlot, LinkMode, Outpoint, Party, ScriptPredicate, SignSpan,
    TxIn, TxOut, TxTemplate,
};

use super::checks::{Binding, CheckKind, DisputeCheck};
use super::keys::{message_len, RevealTag};
use crate::trace::WhichRead;

#[derive(Clone, Debug)]
pub struct DisputeGraph {
    pub funding: Outpoint,
    pub kickoff: TxTemplate,
    pub challenge: TxTemplate,
    pub main_reveal: Vec<TxTemplate>,
    pub main_select: Vec<TxTemplate>,
    pub full_trace: TxTemplate,
    pub branch_read_value: TxTemplate,
    pub branch_opcode: TxTemplate,
    pub scenario_reveal: TxTemplate,
    pub aux_select: Vec<TxTemplate>,
    pub aux_reveal: Vec<TxTemplate>,
    pub neg_reveal: Vec<TxTemplate>,
    pub neg_select: Vec<TxTemplate>,
    pub neg_target: TxTemplate,
    /// Terminal assertion templates by check name.
    pub asserts: BTreeMap<&'static str, TxTemplate>,
    /// Timeout templates keyed by the label of the transaction whose output
    /// they spend.
    pub timeouts: BTreeMap<String, TxTemplate>,
}

impl DisputeGraph {
    pub fn timeout_for(&self, parent_label: &str) -> Option<&TxTemplate> {
        self.timeouts.get(parent_label)
    }

    pub fn assert_for(&self, kind: CheckKind) -> &TxTemplate {
        self.asserts.get(kind.name()).expect("all checks registered")
    }
}

struct Builder<'a> {
    binding: &'a Arc<Binding>,
    amount: Amount,
    deadline: u64,
    timeouts: BTreeMap<String, TxTemplate>,
}

impl<'a> Builder<'a> {
    fn message_leaf(&self, prev: Option<RevealTag>, own: RevealTag) -> ScriptPredicate {
        let cfg = &self.binding.cfg;
        let cap = self.binding.input_capacity();
        let own_slot = |span: SignSpan| CommitSlot {
            key: self.binding.keys[&own].clone(),
            msg_len: message_len(own, cfg, cap),
            link: LinkMode::Fresh,
            span,
        };
        let slots = match prev {
            None => vec![own_slot(SignSpan::Own)],
            Some(p) => vec![
                CommitSlot {
                    key: self.binding.keys[&p].clone(),
                    msg_len: message_len(p, cfg, cap),
                    // the parent's own message sits at 0 when it was fresh,
                    // at 2 when it embedded its predecessor
                    link: LinkMode::DuplicateParent {
                        parent_elem: if p == RevealTag::Kickoff { 0 } else { 2 },
                    },
                    span: SignSpan::Own,
                },
                own_slot(SignSpan::PrevPlusOwn { prev_elem: 0 }),
            ],
        };
        ScriptPredicate::ot_commit(slots)
    }

    fn assertion_leaf(&self, kind: CheckKind) -> ScriptPredicate {
        ScriptPredicate::assertion(Arc::new(DisputeCheck { kind, binding: self.binding.clone() }))
    }

    fn winner_output(&self, winner: Party) -> TxOut {
        TxOut { amount: self.amount, leaves: vec![ScriptPredicate::presign_only([winner])] }
    }

    /// A message transaction: spends `parent_out` through `leaf`, creating
    /// the next hop's fan-out plus a timeout leaf paying `waiting`.
    fn message_tx(
        &mut self,
        label: &str,
        parent_out: Outpoint,
        leaf: ScriptPredicate,
        next_leaves: Vec<ScriptPredicate>,
        waiting: Party,
    ) -> TxTemplate {
        let mut leaves = next_leaves;
        leaves.push(ScriptPredicate::timelock(self.deadline, waiting));
        let tx = presigned(TxTemplate::new(
            label,
            vec![TxIn { outpoint: parent_out, predicate: leaf }],
            vec![TxOut { amount: self.amount, leaves }],
        ));
        let timeout = presigned(TxTemplate::new(
            format!("timeout/{label}"),
            vec![TxIn {
                outpoint: tx.outpoint(0),
                predicate: ScriptPredicate::timelock(self.deadline, waiting),
            }],
            vec![self.winner_output(waiting)],
        ));
        self.timeouts.insert(label.to_string(), timeout);
        tx
    }

    fn assert_tx(&self, label: &str, parent_out: Outpoint, kind: CheckKind) -> TxTemplate {
        presigned(TxTemplate::new(
            label,
            vec![TxIn { outpoint: parent_out, predicate: self.assertion_leaf(kind) }],
            vec![self.winner_output(Party::Verifier)],
        ))
    }
}

fn presigned(t: TxTemplate) -> TxTemplate {
    presign(presign(t, Party::Prover), Party::Verifier)
}

/// Build the whole DAG and fund it: `2 * stake` flows from the funding
/// output through every hop to whichever terminal wins.
pub fn build_graph(
    chain: &mut Chain,
    binding: &Arc<Binding>,
    stake: Amount,
    deadline: u64,
) -> DisputeGraph {
    let l = binding.cfg.rounds();
    let l_neg = binding.neg_cfg.rounds();
    let amount = 2 * stake;
    let mut b = Builder { binding, amount, deadline, timeouts: BTreeMap::new() };

    let funding = chain.genesis_fund(
        "dispute-stakes",
        amount,
        vec![b.message_leaf(None, RevealTag::Kickoff)],
    );

    // kickoff -> challenge -> l rounds of reveal/select -> full trace
    let kickoff = b.message_tx(
        "kickoff",
        funding,
        b.message_leaf(None, RevealTag::Kickoff),
        vec![b.message_leaf(Some(RevealTag::Kickoff), RevealTag::Challenge)],
        Party::Prover,
    );
    let challenge = b.message_tx(
        "challenge",
        kickoff.outpoint(0),
        b.message_leaf(Some(RevealTag::Kickoff), RevealTag::Challenge),
        vec![b.message_leaf(Some(RevealTag::Challenge), RevealTag::MainReveal(1))],
        Party::Verifier,
    );

    let mut main_reveal = Vec::new();
    let mut main_select = Vec::new();
    let mut parent = challenge.outpoint(0);
    for r in 1..=l {
        let prev_tag =
            if r == 1 { RevealTag::Challenge } else { RevealTag::MainSelect(r - 1) };
        let reveal = b.message_tx(
            &format!("reveal{r}"),
            parent,
            b.message_leaf(Some(prev_tag), RevealTag::MainReveal(r)),
            vec![b.message_leaf(Some(RevealTag::MainReveal(r)), RevealTag::MainSelect(r))],
            Party::Prover, // the verifier must select or forfeit
        );
        let next_leaf = if r < l {
            b.message_leaf(Some(RevealTag::MainSelect(r)), RevealTag::MainReveal(r + 1))
        } else {
            b.message_leaf(Some(RevealTag::MainSelect(l)), RevealTag::FullTrace)
        };
        let select = b.message_tx(
            &format!("select{r}"),
            reveal.outpoint(0),
            b.message_leaf(Some(RevealTag::MainReveal(r)), RevealTag::MainSelect(r)),
            vec![next_leaf],
            Party::Verifier, // the prover must keep revealing or forfeit
        );
        parent = select.outpoint(0);
        main_reveal.push(reveal);
        main_select.push(select);
    }

    // the full-trace reveal fans out into every challenge kind
    let direct_kinds = [
        CheckKind::TraceHashMismatch,
        CheckKind::ExecutionMismatch,
        CheckKind::ProgramCounterMismatch,
        CheckKind::ProgramInputMismatch { which: WhichRead::Read1 },
        CheckKind::ProgramInputMismatch { which: WhichRead::Read2 },
        CheckKind::ReadMeta { which: WhichRead::Read1 },
        CheckKind::ReadMeta { which: WhichRead::Read2 },
    ];
    let mut fanout: Vec<ScriptPredicate> =
        direct_kinds.iter().map(|k| b.assertion_leaf(*k)).collect();
    fanout.push(b.message_leaf(Some(RevealTag::FullTrace), RevealTag::BranchReadValue));
    fanout.push(b.message_leaf(Some(RevealTag::FullTrace), RevealTag::BranchOpcode));
    let full_trace = b.message_tx(
        "full_trace",
        parent,
        b.message_leaf(Some(RevealTag::MainSelect(l)), RevealTag::FullTrace),
        fanout,
        Party::Prover, // the verifier must pick a challenge or forfeit
    );

    let mut asserts: BTreeMap<&'static str, TxTemplate> = BTreeMap::new();
    for kind in direct_kinds {
        asserts.insert(
            kind.name(),
            b.assert_tx(&format!("assert/{}", kind.name()), full_trace.outpoint(0), kind),
        );
    }

    // read-value path: branch -> scenario reveal -> scenario asserts or the
    // reverse search escalation
    let branch_read_value = b.message_tx(
        "branch_read_value",
        full_trace.outpoint(0),
        b.message_leaf(Some(RevealTag::FullTrace), RevealTag::BranchReadValue),
        vec![b.message_leaf(Some(RevealTag::BranchReadValue), RevealTag::Scenario)],
        Party::Verifier,
    );
    let mut scenario_kinds: Vec<CheckKind> = Vec::new();
    for which in [WhichRead::Read1, WhichRead::Read2] {
        for scenario in 1..=3u8 {
            scenario_kinds.push(CheckKind::ReadValueScenario { which, scenario });
        }
    }
    scenario_kinds.push(CheckKind::ReadRevealLink);
    let mut scenario_fanout: Vec<ScriptPredicate> =
        scenario_kinds.iter().map(|k| b.assertion_leaf(*k)).collect();
    scenario_fanout.push(b.message_leaf(Some(RevealTag::Scenario), RevealTag::AuxSelect(1)));
    let scenario_reveal = b.message_tx(
        "scenario",
        branch_read_value.outpoint(0),
        b.message_leaf(Some(RevealTag::BranchReadValue), RevealTag::Scenario),
        scenario_fanout,
        Party::Prover,
    );
    for kind in scenario_kinds {
        asserts.insert(
            kind.name(),
            b.assert_tx(&format!("assert/{}", kind.name()), scenario_reveal.outpoint(0), kind),
        );
    }

    // reverse search: exactly l rounds; round 1's reveal rides in the
    // scenario message, so the escalation starts with the verifier's select
    let mut aux_select = Vec::new();
    let mut aux_reveal = Vec::new();
    let mut aux_parent = scenario_reveal.outpoint(0);
    let mut aux_parent_leaf = b.message_leaf(Some(RevealTag::Scenario), RevealTag::AuxSelect(1));
    for r in 1..=l {
        let next_leaves = if r < l {
            vec![b.message_leaf(Some(RevealTag::AuxSelect(r)), RevealTag::AuxReveal(r + 1))]
        } else {
            vec![b.assertion_leaf(CheckKind::LastStepHashMismatch)]
        };
        let select = b.message_tx(
            &format!("aux_select{r}"),
            aux_parent,
            aux_parent_leaf.clone(),
            next_leaves,
            if r < l { Party::Verifier } else { Party::Prover },
        );
        if r == l {
            asserts.insert(
                CheckKind::LastStepHashMismatch.name(),
                b.assert_tx(
                    "assert/last_step_hash_mismatch",
                    select.outpoint(0),
                    CheckKind::LastStepHashMismatch,
                ),
            );
            aux_select.push(select);
            break;
        }
        let reveal = b.message_tx(
            &format!("aux_reveal{}", r + 1),
            select.outpoint(0),
            b.message_leaf(Some(RevealTag::AuxSelect(r)), RevealTag::AuxReveal(r + 1)),
            vec![b.message_leaf(Some(RevealTag::AuxReveal(r + 1)), RevealTag::AuxSelect(r + 1))],
            Party::Prover, // the verifier must select or forfeit
        );
        aux_parent = reveal.outpoint(0);
        aux_parent_leaf =
            b.message_leaf(Some(RevealTag::AuxReveal(r + 1)), RevealTag::AuxSelect(r + 1));
        aux_select.push(select);
        aux_reveal.push(reveal);
    }

    // opcode path: its own search over the loading region, then the target
    // entry reveal and the terminal assertion
    let branch_opcode = b.message_tx(
        "branch_opcode",
        full_trace.outpoint(0),
        b.message_leaf(Some(RevealTag::FullTrace), RevealTag::BranchOpcode),
        vec![b.message_leaf(Some(RevealTag::BranchOpcode), RevealTag::NegReveal(1))],
        Party::Verifier,
    );
    let mut neg_reveal = Vec::new();
    let mut neg_select = Vec::new();
    let mut neg_parent = branch_opcode.outpoint(0);
    for r in 1..=l_neg {
        let prev_tag =
            if r == 1 { RevealTag::BranchOpcode } else { RevealTag::NegSelect(r - 1) };
        let reveal = b.message_tx(
            &format!("neg_reveal{r}"),
            neg_parent,
            b.message_leaf(Some(prev_tag), RevealTag::NegReveal(r)),
            vec![b.message_leaf(Some(RevealTag::NegReveal(r)), RevealTag::NegSelect(r))],
            Party::Prover, // the verifier must select or forfeit
        );
        let next_leaf = if r < l_neg {
            b.message_leaf(Some(RevealTag::NegSelect(r)), RevealTag::NegReveal(r + 1))
        } else {
            b.message_leaf(Some(RevealTag::NegSelect(l_neg)), RevealTag::NegTarget)
        };
        let select = b.message_tx(
            &format!("neg_select{r}"),
            reveal.outpoint(0),
            b.message_leaf(Some(RevealTag::NegReveal(r)), RevealTag::NegSelect(r)),
            vec![next_leaf],
            Party::Verifier, // the prover must keep revealing or forfeit
        );
        neg_parent = select.outpoint(0);
        neg_reveal.push(reveal);
        neg_select.push(select);
    }
    let neg_target = b.message_tx(
        "neg_target",
        neg_parent,
        b.message_leaf(Some(RevealTag::NegSelect(l_neg)), RevealTag::NegTarget),
        vec![b.assertion_leaf(CheckKind::OpCodeMismatch)],
        Party::Prover, // the verifier must assert or forfeit
    );
    asserts.insert(
        CheckKind::OpCodeMismatch.name(),
        b.assert_tx("assert/opcode_mismatch", neg_target.outpoint(0), CheckKind::OpCodeMismatch),
    );

    DisputeGraph {
        funding,
        kickoff,
        challenge,
        main_reveal,
        main_select,
        full_trace,
        branch_read_value,
        branch_opcode,
        scenario_reveal,
        aux_select,
        aux_reveal,
        neg_reveal,
        neg_select,
        neg_target,
        asserts,
        timeouts: b.timeouts,
    }
}
