//! Deterministic simulated UTXO ledger with block-height time.
//!
//! Transactions are built from templates whose ids commit to the label,
//! inputs and outputs but never to witnesses or endorsements, so the whole
//! graph's ids are fixed during the setup ceremony. Outputs carry a list of
//! predicate leaves (emulating one Taproot leaf per spending path); an input
//! names the leaf it satisfies. Presigning is simulated as endorsements — a
//! slot for real signatures, not the logic under test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ots::{ot_verify, OneTimeSignature, OtsPublicKey};

pub type Amount = u64;
pub type TxId = [u8; 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Prover,
    Verifier,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Prover => Party::Verifier,
            Party::Verifier => Party::Prover,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Party::Prover => "prover",
            Party::Verifier => "verifier",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outpoint {
    pub txid: TxId,
    pub vout: u32,
}

impl fmt::Debug for Outpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", hex::encode(&self.txid[..6]), self.vout)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("template is missing a presign from {0:?}")]
    MissingPresign(Party),
    #[error("input {input}: predicate failed: {reason}")]
    PredicateFailed { input: usize, reason: String },
    #[error("input {input}: outpoint already spent")]
    DoubleSpend { input: usize },
    #[error("input {input}: unknown outpoint")]
    UnknownOutpoint { input: usize },
    #[error("input {input}: predicate is not a leaf of the spent output")]
    LeafMismatch { input: usize },
    #[error("inputs carry {inputs} but outputs claim {outputs}")]
    Imbalanced { inputs: Amount, outputs: Amount },
}

/// How an OT-committed witness element relates to the parent transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinkMode {
    /// A fresh message.
    Fresh,
    /// Must byte-equal element `parent_elem` of the parent's witness: the
    /// responder duplicates the challenger's message.
    DuplicateParent { parent_elem: usize },
}

/// Over which bytes the one-time signature is taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignSpan {
    /// The element itself.
    Own,
    /// The concatenation of witness element `prev_elem` and the element
    /// itself (a response signs challenge || response).
    PrevPlusOwn { prev_elem: usize },
}

/// One (message, signature) pair the witness must carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitSlot {
    pub key: OtsPublicKey,
    pub msg_len: usize,
    pub link: LinkMode,
    pub span: SignSpan,
}

/// A named on-chain check bound at setup; the dispute module implements the
/// actual checks.
pub trait ChainCheck: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    /// Deterministic parameter encoding, part of the template id.
    fn descriptor(&self) -> Vec<u8>;
    fn eval(&self, witness: &[Vec<u8>], ctx: &SpendContext<'_>) -> Result<bool, String>;
}

/// Spending condition of one leaf.
#[derive(Clone, Debug)]
pub enum Guard {
    /// Only the joint presign gates the spend.
    None,
    /// The witness carries OT-committed messages: [msg, sig] per slot.
    OtCommit { slots: Vec<CommitSlot> },
    /// Spendable once `delta` blocks passed since the outpoint was created.
    Timelock { delta: u64, beneficiary: Party },
    /// A named dispute check over witness-revealed data.
    Assertion { check: Arc<dyn ChainCheck> },
}

/// A spending-path leaf: which parties must have presigned, plus the guard.
#[derive(Clone, Debug)]
pub struct ScriptPredicate {
    pub presign: BTreeSet<Party>,
    pub guard: Guard,
}

impl ScriptPredicate {
    pub fn both_parties() -> BTreeSet<Party> {
        [Party::Prover, Party::Verifier].into_iter().collect()
    }

    pub fn presign_only(parties: impl IntoIterator<Item = Party>) -> Self {
        ScriptPredicate { presign: parties.into_iter().collect(), guard: Guard::None }
    }

    pub fn ot_commit(slots: Vec<CommitSlot>) -> Self {
        ScriptPredicate { presign: Self::both_parties(), guard: Guard::OtCommit { slots } }
    }

    pub fn timelock(delta: u64, beneficiary: Party) -> Self {
        ScriptPredicate {
            presign: Self::both_parties(),
            guard: Guard::Timelock { delta, beneficiary },
        }
    }

    pub fn assertion(check: Arc<dyn ChainCheck>) -> Self {
        ScriptPredicate { presign: Self::both_parties(), guard: Guard::Assertion { check } }
    }

    /// Deterministic encoding used for template ids and leaf matching.
    pub fn descriptor(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for p in &self.presign {
            out.push(*p as u8 + 1);
        }
        out.push(0xfe);
        match &self.guard {
            Guard::None => out.push(0),
            Guard::OtCommit { slots } => {
                out.push(1);
                for s in slots {
                    out.extend_from_slice(&s.key.to_bytes());
                    out.extend_from_slice(&(s.msg_len as u32).to_le_bytes());
                    match &s.link {
                        LinkMode::Fresh => out.push(0),
                        LinkMode::DuplicateParent { parent_elem } => {
                            out.push(1);
                            out.extend_from_slice(&(*parent_elem as u32).to_le_bytes());
                        }
                    }
                    match &s.span {
                        SignSpan::Own => out.push(0),
                        SignSpan::PrevPlusOwn { prev_elem } => {
                            out.push(1);
                            out.extend_from_slice(&(*prev_elem as u32).to_le_bytes());
                        }
                    }
                }
            }
            Guard::Timelock { delta, beneficiary } => {
                out.push(2);
                out.extend_from_slice(&delta.to_le_bytes());
                out.push(*beneficiary as u8);
            }
            Guard::Assertion { check } => {
                out.push(3);
                out.extend_from_slice(check.name().as_bytes());
                out.extend_from_slice(&check.descriptor());
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct TxOut {
    pub amount: Amount,
    pub leaves: Vec<ScriptPredicate>,
}

#[derive(Clone, Debug)]
pub struct TxIn {
    pub outpoint: Outpoint,
    /// The leaf of the spent output this input satisfies.
    pub predicate: ScriptPredicate,
}

#[derive(Clone, Debug)]
pub struct TxTemplate {
    pub label: String,
    pub inputs: Vec<TxIn>,
    pub outputs: Vec<TxOut>,
    pub presigned_by: BTreeSet<Party>,
}

impl TxTemplate {
    pub fn new(label: impl Into<String>, inputs: Vec<TxIn>, outputs: Vec<TxOut>) -> Self {
        TxTemplate { label: label.into(), inputs, outputs, presigned_by: BTreeSet::new() }
    }

    /// The fixed transaction id: label, inputs and outputs — witnesses and
    /// endorsements excluded, so ids never move after setup.
    pub fn template_id(&self) -> TxId {
        let mut hasher = Sha256::new();
        hasher.update((self.label.len() as u32).to_le_bytes());
        hasher.update(self.label.as_bytes());
        for input in &self.inputs {
            hasher.update(input.outpoint.txid);
            hasher.update(input.outpoint.vout.to_le_bytes());
            let d = input.predicate.descriptor();
            hasher.update((d.len() as u32).to_le_bytes());
            hasher.update(&d);
        }
        for output in &self.outputs {
            hasher.update(output.amount.to_le_bytes());
            for leaf in &output.leaves {
                let d = leaf.descriptor();
                hasher.update((d.len() as u32).to_le_bytes());
                hasher.update(&d);
            }
        }
        hasher.finalize().into()
    }

    pub fn outpoint(&self, vout: u32) -> Outpoint {
        Outpoint { txid: self.template_id(), vout }
    }
}

/// Add a party's endorsement; idempotent, id unchanged.
pub fn presign(mut template: TxTemplate, party: Party) -> TxTemplate {
    template.presigned_by.insert(party);
    template
}

/// A template plus per-input witness stacks.
#[derive(Clone, Debug)]
pub struct Transaction {
    pub template: TxTemplate,
    pub witnesses: Vec<Vec<Vec<u8>>>,
}

impl Transaction {
    pub fn new(template: TxTemplate, witnesses: Vec<Vec<Vec<u8>>>) -> Self {
        Transaction { template, witnesses }
    }
}

/// Context a predicate may consult: pure data, no chain access.
pub struct SpendContext<'a> {
    pub height: u64,
    pub outpoint_created_height: u64,
    /// First-input witness of the transaction that created the outpoint.
    pub parent_witness: &'a [Vec<u8>],
}

#[derive(Clone, Debug)]
struct UtxoEntry {
    amount: Amount,
    leaves: Vec<ScriptPredicate>,
    created_height: u64,
    parent_witness: Vec<Vec<u8>>,
}

/// One accepted transaction, as recorded in the log.
#[derive(Clone, Debug)]
pub struct LogEntry {
    pub txid: TxId,
    pub label: String,
    pub height: u64,
    pub spent: Vec<Outpoint>,
    pub created: Vec<Outpoint>,
    pub witnesses: Vec<Vec<Vec<u8>>>,
}

/// The simulated chain: a value; `broadcast` and `tick` return new values.
#[derive(Clone, Debug, Default)]
pub struct Chain {
    pub height: u64,
    utxos: BTreeMap<Outpoint, UtxoEntry>,
    spent: BTreeSet<Outpoint>,
    pub log: Vec<LogEntry>,
}

impl Chain {
    pub fn new() -> Self {
        Chain::default()
    }

    /// Install a funding output out of thin air (the deposits that precede
    /// the protocol proper).
    pub fn genesis_fund(
        &mut self,
        label: &str,
        amount: Amount,
        leaves: Vec<ScriptPredicate>,
    ) -> Outpoint {
        let mut hasher = Sha256::new();
        hasher.update(b"genesis:");
        hasher.update(label.as_bytes());
        let txid: TxId = hasher.finalize().into();
        let outpoint = Outpoint { txid, vout: 0 };
        self.utxos.insert(
            outpoint,
            UtxoEntry { amount, leaves, created_height: self.height, parent_witness: Vec::new() },
        );
        outpoint
    }

    pub fn is_unspent(&self, outpoint: &Outpoint) -> bool {
        self.utxos.contains_key(outpoint)
    }

    pub fn was_spent(&self, outpoint: &Outpoint) -> bool {
        self.spent.contains(outpoint)
    }

    pub fn total_unspent(&self) -> Amount {
        self.utxos.values().map(|u| u.amount).sum()
    }

    pub fn find_log(&self, txid: &TxId) -> Option<&LogEntry> {
        self.log.iter().find(|e| e.txid == *txid)
    }

    /// Advance block height; nothing else changes.
    pub fn tick(&self, blocks: u64) -> Chain {
        let mut next = self.clone();
        next.height += blocks;
        next
    }

    /// Validate and apply a transaction; an invalid transaction leaves the
    /// chain untouched and reports the failing rule.
    pub fn broadcast(&self, tx: &Transaction) -> Result<Chain, LedgerError> {
        let required: BTreeSet<Party> = tx
            .template
            .inputs
            .iter()
            .flat_map(|i| i.predicate.presign.iter().copied())
            .collect();
        for party in required {
            if !tx.template.presigned_by.contains(&party) {
                return Err(LedgerError::MissingPresign(party));
            }
        }

        let mut in_total: Amount = 0;
        for (idx, input) in tx.template.inputs.iter().enumerate() {
            let entry = match self.utxos.get(&input.outpoint) {
                Some(e) => e,
                None if self.spent.contains(&input.outpoint) => {
                    return Err(LedgerError::DoubleSpend { input: idx });
                }
                None => return Err(LedgerError::UnknownOutpoint { input: idx }),
            };
            let wanted = input.predicate.descriptor();
            if !entry.leaves.iter().any(|leaf| leaf.descriptor() == wanted) {
                return Err(LedgerError::LeafMismatch { input: idx });
            }
            let ctx = SpendContext {
                height: self.height,
                outpoint_created_height: entry.created_height,
                parent_witness: &entry.parent_witness,
            };
            let witness = tx.witnesses.get(idx).map(|w| w.as_slice()).unwrap_or(&[]);
            eval_guard(&input.predicate.guard, witness, &ctx)
                .map_err(|reason| LedgerError::PredicateFailed { input: idx, reason })?;
            in_total += entry.amount;
        }

        let out_total: Amount = tx.template.outputs.iter().map(|o| o.amount).sum();
        if in_total != out_total {
            return Err(LedgerError::Imbalanced { inputs: in_total, outputs: out_total });
        }

        let mut next = self.clone();
        let txid = tx.template.template_id();
        let mut created = Vec::new();
        for input in &tx.template.inputs {
            next.utxos.remove(&input.outpoint);
            next.spent.insert(input.outpoint);
        }
        let first_witness = tx.witnesses.first().cloned().unwrap_or_default();
        for (vout, output) in tx.template.outputs.iter().enumerate() {
            let outpoint = Outpoint { txid, vout: vout as u32 };
            next.utxos.insert(
                outpoint,
                UtxoEntry {
                    amount: output.amount,
                    leaves: output.leaves.clone(),
                    created_height: next.height,
                    parent_witness: first_witness.clone(),
                },
            );
            created.push(outpoint);
        }
        next.log.push(LogEntry {
            txid,
            label: tx.template.label.clone(),
            height: next.height,
            spent: tx.template.inputs.iter().map(|i| i.outpoint).collect(),
            created,
            witnesses: tx.witnesses.clone(),
        });
        Ok(next)
    }

    /// Line-delimited structured-text export of the accepted-transaction log.
    pub fn export_log(&self) -> String {
        let mut out = String::new();
        for entry in &self.log {
            let witness_digests: Vec<String> = entry
                .witnesses
                .iter()
                .map(|stack| {
                    let mut h = Sha256::new();
                    for elem in stack {
                        h.update((elem.len() as u32).to_le_bytes());
                        h.update(elem);
                    }
                    hex::encode(&h.finalize()[..8])
                })
                .collect();
            let record = serde_json::json!({
                "template_id": hex::encode(entry.txid),
                "label": entry.label,
                "height": entry.height,
                "spent": entry.spent.iter().map(|o| format!("{o:?}")).collect::<Vec<_>>(),
                "created": entry.created.iter().map(|o| format!("{o:?}")).collect::<Vec<_>>(),
                "witness_digests": witness_digests,
            });
            out.push_str(&record.to_string());
            out.push('\n');
        }
        out
    }
}

/// Evaluate one leaf guard. `Ok(())` authorizes the spend.
fn eval_guard(guard: &Guard, witness: &[Vec<u8>], ctx: &SpendContext<'_>) -> Result<(), String> {
    match guard {
        Guard::None => Ok(()),
        Guard::Timelock { delta, .. } => {
            let unlocked = ctx.outpoint_created_height + delta;
            if ctx.height >= unlocked {
                Ok(())
            } else {
                Err(format!("timelock: height {} < {}", ctx.height, unlocked))
            }
        }
        Guard::OtCommit { slots } => {
            if witness.len() != slots.len() * 2 {
                return Err(format!(
                    "otcommit: expected {} witness elements, got {}",
                    slots.len() * 2,
                    witness.len()
                ));
            }
            for (i, slot) in slots.iter().enumerate() {
                let msg = &witness[i * 2];
                let sig_raw = &witness[i * 2 + 1];
                if msg.len() != slot.msg_len {
                    return Err(format!(
                        "otcommit slot {i}: message length {} != {}",
                        msg.len(),
                        slot.msg_len
                    ));
                }
                if let LinkMode::DuplicateParent { parent_elem } = &slot.link {
                    let parent = ctx
                        .parent_witness
                        .get(*parent_elem)
                        .ok_or_else(|| format!("otcommit slot {i}: no parent element"))?;
                    if parent != msg {
                        return Err(format!("otcommit slot {i}: duplicate differs from parent"));
                    }
                }
                let signed: Vec<u8> = match &slot.span {
                    SignSpan::Own => msg.clone(),
                    SignSpan::PrevPlusOwn { prev_elem } => {
                        let prev = witness
                            .get(*prev_elem)
                            .ok_or_else(|| format!("otcommit slot {i}: no prev element"))?;
                        let mut buf = prev.clone();
                        buf.extend_from_slice(msg);
                        buf
                    }
                };
                let sig = OneTimeSignature::from_bytes(&slot.key.params, sig_raw)
                    .ok_or_else(|| format!("otcommit slot {i}: malformed signature"))?;
                if !ot_verify(&slot.key, &signed, &sig) {
                    return Err(format!("otcommit slot {i}: signature invalid"));
                }
            }
            Ok(())
        }
        Guard::Assertion { check } => match check.eval(witness, ctx) {
            Ok(true) => Ok(()),
            Ok(false) => Err(format!("assertion {} does not hold", check.name())),
            Err(e) => Err(format!("assertion {}: {e}", check.name())),
        },
    }
}

/// Evaluate a named check directly (the spec-level `eval_assertion`
/// operation); `UnknownCheck` is reported through the registry the dispute
/// module provides.
pub fn eval_assertion(
    check: &dyn ChainCheck,
    witness: &[Vec<u8>],
    ctx: &SpendContext<'_>,
) -> Result<bool, String> {
    check.eval(witness, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ots::{keygen, Scheme};

    fn w4_key(seed: u8, len: usize) -> crate::ots::OneTimeKeyPair {
        keygen([seed; 32], len, Scheme::Winternitz { w: 4 }).unwrap()
    }

    fn both() -> BTreeSet<Party> {
        ScriptPredicate::both_parties()
    }

    #[test]
    fn presign_is_idempotent_and_required() {
        let mut chain = Chain::new();
        let fund = chain.genesis_fund("f", 100, vec![ScriptPredicate::presign_only(both())]);
        let template = TxTemplate::new(
            "spend",
            vec![TxIn { outpoint: fund, predicate: ScriptPredicate::presign_only(both()) }],
            vec![TxOut { amount: 100, leaves: vec![ScriptPredicate::presign_only([Party::Prover])] }],
        );
        let tx = Transaction::new(presign(template.clone(), Party::Prover), vec![vec![]]);
        assert_eq!(
            chain.broadcast(&tx).unwrap_err(),
            LedgerError::MissingPresign(Party::Verifier)
        );
        let id_before = template.template_id();
        let signed = presign(presign(presign(template, Party::Prover), Party::Prover), Party::Verifier);
        assert_eq!(signed.template_id(), id_before);
        chain.broadcast(&Transaction::new(signed, vec![vec![]])).unwrap();
    }

    #[test]
    fn double_spend_detected() {
        let mut chain = Chain::new();
        let fund = chain.genesis_fund("f", 7, vec![ScriptPredicate::presign_only(both())]);
        let template = presign(
            presign(
                TxTemplate::new(
                    "spend",
                    vec![TxIn { outpoint: fund, predicate: ScriptPredicate::presign_only(both()) }],
                    vec![TxOut { amount: 7, leaves: vec![ScriptPredicate::presign_only([Party::Prover])] }],
                ),
                Party::Prover,
            ),
            Party::Verifier,
        );
        let tx = Transaction::new(template, vec![vec![]]);
        let chain = chain.broadcast(&tx).unwrap();
        assert_eq!(chain.broadcast(&tx).unwrap_err(), LedgerError::DoubleSpend { input: 0 });
    }

    #[test]
    fn unknown_outpoint_detected() {
        let chain = Chain::new();
        let ghost = Outpoint { txid: [9; 32], vout: 0 };
        let template = presign(
            presign(
                TxTemplate::new(
                    "spend",
                    vec![TxIn { outpoint: ghost, predicate: ScriptPredicate::presign_only(both()) }],
                    vec![TxOut { amount: 1, leaves: vec![ScriptPredicate::presign_only([Party::Prover])] }],
                ),
                Party::Prover,
            ),
            Party::Verifier,
        );
        assert_eq!(
            chain.broadcast(&Transaction::new(template, vec![vec![]])).unwrap_err(),
            LedgerError::UnknownOutpoint { input: 0 }
        );
    }

    #[test]
    fn timelock_boundary_is_inclusive() {
        let mut chain = Chain::new();
        let fund = chain.genesis_fund("f", 5, vec![ScriptPredicate::timelock(10, Party::Prover)]);
        let template = presign(
            presign(
                TxTemplate::new(
                    "timeout",
                    vec![TxIn { outpoint: fund, predicate: ScriptPredicate::timelock(10, Party::Prover) }],
                    vec![TxOut { amount: 5, leaves: vec![ScriptPredicate::presign_only([Party::Prover])] }],
                ),
                Party::Prover,
            ),
            Party::Verifier,
        );
        let tx = Transaction::new(template, vec![vec![]]);
        let early = chain.tick(5);
        assert!(matches!(
            early.broadcast(&tx).unwrap_err(),
            LedgerError::PredicateFailed { input: 0, .. }
        ));
        let at_boundary = chain.tick(10);
        at_boundary.broadcast(&tx).unwrap();
        // tick alone changes nothing else
        assert_eq!(chain.tick(0).total_unspent(), chain.total_unspent());
    }

    #[test]
    fn ot_commit_witness_accepted_and_forgeries_rejected() {
        let mut key = w4_key(1, 4);
        let slot = CommitSlot {
            key: key.public().clone(),
            msg_len: 4,
            link: LinkMode::Fresh,
            span: SignSpan::Own,
        };
        let mut chain = Chain::new();
        let fund = chain.genesis_fund("f", 9, vec![ScriptPredicate::ot_commit(vec![slot.clone()])]);
        let template = presign(
            presign(
                TxTemplate::new(
                    "commit",
                    vec![TxIn { outpoint: fund, predicate: ScriptPredicate::ot_commit(vec![slot]) }],
                    vec![TxOut { amount: 9, leaves: vec![ScriptPredicate::presign_only([Party::Prover])] }],
                ),
                Party::Prover,
            ),
            Party::Verifier,
        );
        let msg = b"data".to_vec();
        let sig = key.sign(&msg).unwrap();
        let good = Transaction::new(template.clone(), vec![vec![msg.clone(), sig.to_bytes()]]);
        chain.broadcast(&good).unwrap();

        let mut tampered = sig.to_bytes();
        tampered[0] ^= 1;
        let bad = Transaction::new(template, vec![vec![msg, tampered]]);
        assert!(matches!(
            chain.broadcast(&bad).unwrap_err(),
            LedgerError::PredicateFailed { input: 0, .. }
        ));
    }

    #[test]
    fn conservation_and_balance() {
        let mut chain = Chain::new();
        let fund = chain.genesis_fund("f", 10, vec![ScriptPredicate::presign_only(both())]);
        let leaky = presign(
            presign(
                TxTemplate::new(
                    "leak",
                    vec![TxIn { outpoint: fund, predicate: ScriptPredicate::presign_only(both()) }],
                    vec![TxOut { amount: 11, leaves: vec![ScriptPredicate::presign_only([Party::Prover])] }],
                ),
                Party::Prover,
            ),
            Party::Verifier,
        );
        assert_eq!(
            chain.broadcast(&Transaction::new(leaky, vec![vec![]])).unwrap_err(),
            LedgerError::Imbalanced { inputs: 10, outputs: 11 }
        );
        assert_eq!(chain.total_unspent(), 10);
    }

    #[test]
    fn replaying_the_log_reproduces_the_utxo_set() {
        // determinism: same sequence, same ids, same export
        let build = || {
            let mut chain = Chain::new();
            let fund = chain.genesis_fund("f", 4, vec![ScriptPredicate::presign_only(both())]);
            let t = presign(
                presign(
                    TxTemplate::new(
                        "hop",
                        vec![TxIn { outpoint: fund, predicate: ScriptPredicate::presign_only(both()) }],
                        vec![TxOut { amount: 4, leaves: vec![ScriptPredicate::presign_only(both())] }],
                    ),
                    Party::Prover,
                ),
                Party::Verifier,
            );
            chain.broadcast(&Transaction::new(t, vec![vec![]])).unwrap()
        };
        let a = build();
        let b = build();
        assert_eq!(a.export_log(), b.export_log());
        assert_eq!(a.total_unspent(), b.total_unspent());
    }

    #[test]
    fn witness_does_not_change_template_id() {
        let mut key = w4_key(2, 2);
        let slot = CommitSlot {
            key: key.public().clone(),
            msg_len: 2,
            link: LinkMode::Fresh,
            span: SignSpan::Own,
        };
        let template = TxTemplate::new(
            "t",
            vec![TxIn {
                outpoint: Outpoint { txid: [0; 32], vout: 0 },
                predicate: ScriptPredicate::ot_commit(vec![slot]),
            }],
            vec![],
        );
        let id = template.template_id();
        let sig = key.sign(b"ab").unwrap();
        let tx = Transaction::new(template, vec![vec![b"ab".to_vec(), sig.to_bytes()]]);
        assert_eq!(tx.template.template_id(), id);
    }
}
