//! The message-linking scheme: a start output, a challenge template T_c and
//! a response template T_r, pre-signed together during a setup ceremony.
//!
//! The challenger spends the start output by adding (x, sig_c(x)) to T_c's
//! witness; the responder must duplicate that pair and add (y, sig_r(x||y)).
//! T_c's output also carries a timelock branch paying the challenger, so the
//! responder either answers before the deadline or forfeits. Chains extend
//! by replaying the scheme after T_r; pre-signing several siblings over one
//! outpoint builds a decision tree where broadcasting one branch discards
//! the rest.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ledger::{
    presign, Chain, CommitSlot, LedgerError, LinkMode, Outpoint, Party, ScriptPredicate,
    SignSpan, Transaction, TxIn, TxOut, TxTemplate,
};
use crate::ots::{keygen, OneTimeKeyPair, OtsError, OtsPublicKey, Scheme};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Ots(#[from] OtsError),
    #[error("challenge not yet on chain")]
    NotYetChallenged,
    #[error("response not yet on chain")]
    NotYetResponded,
    #[error("deadline passed; the timeout branch was spent")]
    Expired,
}

/// One challenge/response hop of the chain.
#[derive(Clone, Debug)]
pub struct LinkStep {
    pub challenger: Party,
    pub challenger_key: OtsPublicKey,
    pub responder_key: OtsPublicKey,
    pub t_c: TxTemplate,
    pub t_r: TxTemplate,
    pub timeout_branch: TxTemplate,
    pub deadline_blocks: u64,
    pub x_len: usize,
    pub y_len: usize,
}

/// A fan-out level: siblings share the parent outpoint, so broadcasting one
/// challenge invalidates the others. Sibling 0 carries the continuation.
#[derive(Clone, Debug)]
pub struct LinkGroup {
    pub siblings: Vec<LinkStep>,
}

#[derive(Clone, Debug)]
pub struct LinkChainSpec {
    pub start: Outpoint,
    pub groups: Vec<LinkGroup>,
}

/// The secret halves generated during setup, indexed like the spec.
#[derive(Debug)]
pub struct LinkKeys {
    pub groups: Vec<Vec<SiblingKeys>>,
}

#[derive(Debug)]
pub struct SiblingKeys {
    pub challenger: OneTimeKeyPair,
    pub responder: OneTimeKeyPair,
}

fn derive_seed(seed: &[u8; 32], group: usize, sibling: usize, role: u8) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed);
    h.update((group as u32).to_le_bytes());
    h.update((sibling as u32).to_le_bytes());
    h.update([role]);
    h.finalize().into()
}

fn presigned(t: TxTemplate) -> TxTemplate {
    presign(presign(t, Party::Prover), Party::Verifier)
}

/// The leaf T_c satisfies: a fresh challenger commitment.
fn challenge_leaf(key: &OtsPublicKey, x_len: usize) -> ScriptPredicate {
    ScriptPredicate::ot_commit(vec![CommitSlot {
        key: key.clone(),
        msg_len: x_len,
        link: LinkMode::Fresh,
        span: SignSpan::Own,
    }])
}

/// The leaf T_r satisfies: the duplicated challenge plus the response signed
/// over the concatenation x || y.
fn response_leaf(step_keys: (&OtsPublicKey, &OtsPublicKey), x_len: usize, y_len: usize) -> ScriptPredicate {
    ScriptPredicate::ot_commit(vec![
        CommitSlot {
            key: step_keys.0.clone(),
            msg_len: x_len,
            link: LinkMode::DuplicateParent { parent_elem: 0 },
            span: SignSpan::Own,
        },
        CommitSlot {
            key: step_keys.1.clone(),
            msg_len: y_len,
            link: LinkMode::Fresh,
            span: SignSpan::PrevPlusOwn { prev_elem: 0 },
        },
    ])
}

/// Build and pre-sign the whole chain: the start output, then for each step
/// `branching` sibling (T_c, T_r, timeout) triples. All template ids are
/// fixed here; only witnesses are ever added later.
pub fn setup_link(
    chain: &mut Chain,
    seed: [u8; 32],
    first_challenger: Party,
    message_lens: &[(usize, usize)],
    deadline_blocks: u64,
    branching: usize,
    amount: u64,
) -> Result<(LinkChainSpec, LinkKeys), LinkError> {
    assert!(branching >= 1, "branching must be at least 1");
    let scheme = Scheme::Winternitz { w: 4 };

    let mut key_groups: Vec<Vec<SiblingKeys>> = Vec::new();
    for (g, (x_len, y_len)) in message_lens.iter().enumerate() {
        let mut siblings = Vec::new();
        for s in 0..branching {
            siblings.push(SiblingKeys {
                challenger: keygen(derive_seed(&seed, g, s, 0), *x_len, scheme)?,
                responder: keygen(derive_seed(&seed, g, s, 1), *x_len + *y_len, scheme)?,
            });
        }
        key_groups.push(siblings);
    }

    // fan-out leaves a parent output must carry for group g
    let group_leaves = |g: usize| -> Vec<ScriptPredicate> {
        let (x_len, _) = message_lens[g];
        key_groups[g]
            .iter()
            .map(|ks| challenge_leaf(ks.challenger.public(), x_len))
            .collect()
    };

    let start_leaves = if message_lens.is_empty() {
        vec![ScriptPredicate::presign_only(ScriptPredicate::both_parties())]
    } else {
        group_leaves(0)
    };
    let start = chain.genesis_fund("link-start", amount, start_leaves);

    let mut groups = Vec::new();
    let mut parent = start;
    for (g, (x_len, y_len)) in message_lens.iter().enumerate() {
        let challenger = if g % 2 == 0 { first_challenger } else { first_challenger.other() };
        let next_leaves = if g + 1 < message_lens.len() {
            group_leaves(g + 1)
        } else {
            vec![ScriptPredicate::presign_only(ScriptPredicate::both_parties())]
        };

        let mut siblings = Vec::new();
        for (s, ks) in key_groups[g].iter().enumerate() {
            let c_pub = ks.challenger.public().clone();
            let r_pub = ks.responder.public().clone();
            let t_c = presigned(TxTemplate::new(
                format!("link{g}.{s}.challenge"),
                vec![TxIn { outpoint: parent, predicate: challenge_leaf(&c_pub, *x_len) }],
                vec![TxOut {
                    amount,
                    leaves: vec![
                        response_leaf((&c_pub, &r_pub), *x_len, *y_len),
                        ScriptPredicate::timelock(deadline_blocks, challenger),
                    ],
                }],
            ));
            let t_r = presigned(TxTemplate::new(
                format!("link{g}.{s}.response"),
                vec![TxIn {
                    outpoint: t_c.outpoint(0),
                    predicate: response_leaf((&c_pub, &r_pub), *x_len, *y_len),
                }],
                vec![TxOut { amount, leaves: next_leaves.clone() }],
            ));
            let timeout_branch = presigned(TxTemplate::new(
                format!("link{g}.{s}.timeout"),
                vec![TxIn {
                    outpoint: t_c.outpoint(0),
                    predicate: ScriptPredicate::timelock(deadline_blocks, challenger),
                }],
                vec![TxOut {
                    amount,
                    leaves: vec![ScriptPredicate::presign_only([challenger])],
                }],
            ));
            siblings.push(LinkStep {
                challenger,
                challenger_key: c_pub,
                responder_key: r_pub,
                t_c,
                t_r,
                timeout_branch,
                deadline_blocks,
                x_len: *x_len,
                y_len: *y_len,
            });
        }
        parent = siblings[0].t_r.outpoint(0);
        groups.push(LinkGroup { siblings });
    }

    Ok((LinkChainSpec { start, groups }, LinkKeys { groups: key_groups }))
}

/// C publishes T_c carrying (x, sig_c(x)).
pub fn publish_challenge(
    chain: &Chain,
    step: &LinkStep,
    x: &[u8],
    challenger_key: &mut OneTimeKeyPair,
) -> Result<Chain, LinkError> {
    let sig = challenger_key.sign(x)?;
    let tx = Transaction::new(step.t_c.clone(), vec![vec![x.to_vec(), sig.to_bytes()]]);
    Ok(chain.broadcast(&tx)?)
}

/// R publishes T_r: duplicates the on-chain (x, sig_c(x)) and adds
/// (y, sig_r(x || y)). The x is read from the chain, never re-signed by C.
pub fn publish_response(
    chain: &Chain,
    step: &LinkStep,
    y: &[u8],
    responder_key: &mut OneTimeKeyPair,
) -> Result<Chain, LinkError> {
    let c_entry = chain
        .find_log(&step.t_c.template_id())
        .ok_or(LinkError::NotYetChallenged)?;
    let x = c_entry.witnesses[0][0].clone();
    let x_sig = c_entry.witnesses[0][1].clone();
    if chain.find_log(&step.timeout_branch.template_id()).is_some() {
        return Err(LinkError::Expired);
    }
    let mut signed = x.clone();
    signed.extend_from_slice(y);
    let sig = responder_key.sign(&signed)?;
    let tx = Transaction::new(
        step.t_r.clone(),
        vec![vec![x, x_sig, y.to_vec(), sig.to_bytes()]],
    );
    Ok(chain.broadcast(&tx)?)
}

/// The canonical binding of challenge to response: the (x, y) pair from the
/// accepted T_r witness.
pub fn extract_linked(chain: &Chain, step: &LinkStep) -> Result<(Vec<u8>, Vec<u8>), LinkError> {
    let entry = chain
        .find_log(&step.t_r.template_id())
        .ok_or(LinkError::NotYetResponded)?;
    Ok((entry.witnesses[0][0].clone(), entry.witnesses[0][2].clone()))
}

/// The challenger claims the stake after the deadline.
pub fn claim_timeout(chain: &Chain, step: &LinkStep) -> Result<Chain, LinkError> {
    let tx = Transaction::new(step.timeout_branch.clone(), vec![vec![]]);
    Ok(chain.broadcast(&tx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::LedgerError;

    fn one_step() -> (Chain, LinkChainSpec, LinkKeys) {
        let mut chain = Chain::new();
        let (spec, keys) =
            setup_link(&mut chain, [1; 32], Party::Verifier, &[(4, 8)], 144, 1, 100).unwrap();
        (chain, spec, keys)
    }

    #[test]
    fn honest_exchange_binds_x_and_y() {
        let (chain, spec, mut keys) = one_step();
        let step = &spec.groups[0].siblings[0];
        let chain =
            publish_challenge(&chain, step, b"ping", &mut keys.groups[0][0].challenger).unwrap();
        assert!(matches!(extract_linked(&chain, step), Err(LinkError::NotYetResponded)));
        let chain =
            publish_response(&chain, step, b"pongpong", &mut keys.groups[0][0].responder).unwrap();
        let (x, y) = extract_linked(&chain, step).unwrap();
        assert_eq!(x, b"ping");
        assert_eq!(y, b"pongpong");
        // x recovered here equals the one in T_c's witness
        let c_entry = chain.find_log(&step.t_c.template_id()).unwrap();
        assert_eq!(c_entry.witnesses[0][0], x);
    }

    #[test]
    fn forged_challenge_signature_rejected() {
        let (chain, spec, _) = one_step();
        let step = &spec.groups[0].siblings[0];
        let mut rogue = keygen([99; 32], 4, Scheme::Winternitz { w: 4 }).unwrap();
        let err = publish_challenge(&chain, step, b"ping", &mut rogue).unwrap_err();
        assert!(matches!(err, LinkError::Ledger(LedgerError::PredicateFailed { .. })));
    }

    #[test]
    fn tampered_duplicate_rejected() {
        let (chain, spec, mut keys) = one_step();
        let step = &spec.groups[0].siblings[0];
        let chain =
            publish_challenge(&chain, step, b"ping", &mut keys.groups[0][0].challenger).unwrap();
        // build a response whose embedded x differs from the on-chain one
        let c_entry = chain.find_log(&step.t_c.template_id()).unwrap();
        let x_sig = c_entry.witnesses[0][1].clone();
        let forged_x = b"pinG".to_vec();
        let mut signed = forged_x.clone();
        signed.extend_from_slice(b"pongpong");
        let r_sig = keys.groups[0][0].responder.sign(&signed).unwrap();
        let tx = Transaction::new(
            step.t_r.clone(),
            vec![vec![forged_x, x_sig, b"pongpong".to_vec(), r_sig.to_bytes()]],
        );
        assert!(matches!(
            chain.broadcast(&tx).unwrap_err(),
            LedgerError::PredicateFailed { input: 0, .. }
        ));
    }

    #[test]
    fn timeout_and_response_are_mutually_exclusive() {
        let (chain, spec, mut keys) = one_step();
        let step = &spec.groups[0].siblings[0];
        let chain =
            publish_challenge(&chain, step, b"ping", &mut keys.groups[0][0].challenger).unwrap();
        // too early
        assert!(claim_timeout(&chain, step).is_err());
        let late = chain.tick(step.deadline_blocks);
        let after_timeout = claim_timeout(&late, step).unwrap();
        // the response now fails: its outpoint is gone
        let err =
            publish_response(&after_timeout, step, b"pongpong", &mut keys.groups[0][0].responder)
                .unwrap_err();
        assert!(matches!(err, LinkError::Expired));
        // and in the other order, a response blocks the timeout
        let answered =
            publish_response(&late, step, b"pongpong", &mut keys.groups[0][0].responder).unwrap();
        assert!(matches!(
            claim_timeout(&answered, step).unwrap_err(),
            LinkError::Ledger(LedgerError::DoubleSpend { .. })
        ));
    }

    #[test]
    fn sibling_branches_are_exclusive() {
        let mut chain = Chain::new();
        let (spec, mut keys) =
            setup_link(&mut chain, [2; 32], Party::Verifier, &[(2, 2)], 144, 3, 50).unwrap();
        assert_eq!(spec.groups[0].siblings.len(), 3);
        let chain = publish_challenge(
            &chain,
            &spec.groups[0].siblings[1],
            b"hi",
            &mut keys.groups[0][1].challenger,
        )
        .unwrap();
        let err = publish_challenge(
            &chain,
            &spec.groups[0].siblings[2],
            b"yo",
            &mut keys.groups[0][2].challenger,
        )
        .unwrap_err();
        assert!(matches!(err, LinkError::Ledger(LedgerError::DoubleSpend { .. })));
    }

    #[test]
    fn zero_steps_is_just_the_start() {
        let mut chain = Chain::new();
        let (spec, keys) =
            setup_link(&mut chain, [3; 32], Party::Prover, &[], 144, 1, 10).unwrap();
        assert!(spec.groups.is_empty());
        assert!(keys.groups.is_empty());
        assert!(chain.is_unspent(&spec.start));
    }

    #[test]
    fn two_steps_alternate_roles_and_chain_together() {
        let mut chain = Chain::new();
        let (spec, mut keys) =
            setup_link(&mut chain, [4; 32], Party::Verifier, &[(1, 1), (2, 2)], 144, 1, 10)
                .unwrap();
        assert_eq!(spec.groups[0].siblings[0].challenger, Party::Verifier);
        assert_eq!(spec.groups[1].siblings[0].challenger, Party::Prover);
        let s0 = &spec.groups[0].siblings[0];
        let s1 = &spec.groups[1].siblings[0];
        let chain = publish_challenge(&chain, s0, b"a", &mut keys.groups[0][0].challenger).unwrap();
        // the second step cannot start before the first response lands
        // (probe with a clone: a failed broadcast must not burn the real key)
        let mut probe = keys.groups[1][0].challenger.clone();
        assert!(publish_challenge(&chain, s1, b"xy", &mut probe).is_err());
        let chain = publish_response(&chain, s0, b"b", &mut keys.groups[0][0].responder).unwrap();
        let chain = publish_challenge(&chain, s1, b"xy", &mut keys.groups[1][0].challenger).unwrap();
        let chain = publish_response(&chain, s1, b"zw", &mut keys.groups[1][0].responder).unwrap();
        let (x, y) = extract_linked(&chain, s1).unwrap();
        assert_eq!((x.as_slice(), y.as_slice()), (b"xy".as_slice(), b"zw".as_slice()));
    }
}
