//! One-time signatures used to commit state data inside transaction
//! witnesses: Winternitz (the default) and Lamport behind one interface.
//!
//! The chain hash is SHA-256 truncated to 20 bytes, the usual hash-lock
//! sizing. Keys are deterministic from a seed and strictly single-use: a
//! second `sign` on the same key is refused rather than exploited.

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Chunk length of every chain element.
pub const CHUNK_LEN: usize = 20;

type Chunk = [u8; CHUNK_LEN];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OtsError {
    #[error("bad parameters: {0}")]
    BadParams(&'static str),
    #[error("one-time key already used")]
    KeyReuse,
    #[error("message length {got} does not match key parameter {want}")]
    LengthMismatch { got: usize, want: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Lamport,
    Winternitz { w: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OtsParams {
    pub message_len: usize,
    pub scheme: Scheme,
}

impl OtsParams {
    pub fn new(message_len: usize, scheme: Scheme) -> Result<Self, OtsError> {
        if message_len == 0 {
            return Err(OtsError::BadParams("message length must be at least 1"));
        }
        if let Scheme::Winternitz { w } = scheme {
            if !matches!(w, 1 | 2 | 4 | 8) {
                return Err(OtsError::BadParams("w must be one of 1, 2, 4, 8"));
            }
        }
        Ok(OtsParams { message_len, scheme })
    }

    /// Message digits per signature (excluding any checksum).
    pub fn message_chains(&self) -> usize {
        match self.scheme {
            Scheme::Lamport => self.message_len * 8 * 2,
            Scheme::Winternitz { w } => self.message_len * 8 / w as usize,
        }
    }

    /// Winternitz checksum chains: enough base-2^w digits for the maximum
    /// checksum value n0 * (2^w - 1).
    pub fn checksum_chains(&self) -> usize {
        match self.scheme {
            Scheme::Lamport => 0,
            Scheme::Winternitz { w } => {
                let d = (1u64 << w) - 1;
                let max = self.message_chains() as u64 * d;
                let mut digits = 1usize;
                let mut cap = d; // largest value this many digits covers
                while cap < max {
                    digits += 1;
                    cap = cap * (d + 1) + d;
                }
                digits
            }
        }
    }

    pub fn total_chains(&self) -> usize {
        self.message_chains() + self.checksum_chains()
    }

    /// Chain depth: hash iterations between secret and public.
    fn depth(&self) -> u32 {
        match self.scheme {
            Scheme::Lamport => 1,
            Scheme::Winternitz { w } => (1u32 << w) - 1,
        }
    }

    /// Chunks in a signature.
    pub fn signature_chains(&self) -> usize {
        match self.scheme {
            Scheme::Lamport => self.message_len * 8,
            Scheme::Winternitz { .. } => self.total_chains(),
        }
    }
}

fn ots_hash(data: &[u8]) -> Chunk {
    let digest = Sha256::digest(data);
    let mut out = [0u8; CHUNK_LEN];
    out.copy_from_slice(&digest[..CHUNK_LEN]);
    out
}

fn iterate(mut chunk: Chunk, times: u32) -> Chunk {
    for _ in 0..times {
        chunk = ots_hash(&chunk);
    }
    chunk
}

/// Message digits in signing order: per-byte high-to-low w-bit groups,
/// followed by the checksum digits (most significant first).
fn winternitz_digits(params: &OtsParams, msg: &[u8]) -> Vec<u32> {
    let w = match params.scheme {
        Scheme::Winternitz { w } => w as u32,
        Scheme::Lamport => unreachable!(),
    };
    let per_byte = 8 / w;
    let mask = (1u32 << w) - 1;
    let mut digits = Vec::with_capacity(params.total_chains());
    for byte in msg {
        for i in (0..per_byte).rev() {
            digits.push(((*byte as u32) >> (i * w)) & mask);
        }
    }
    let d = (1u64 << w) - 1;
    let mut checksum: u64 = digits.iter().map(|&x| d - x as u64).sum();
    let mut cs = vec![0u32; params.checksum_chains()];
    for slot in cs.iter_mut().rev() {
        *slot = (checksum % (d + 1)) as u32;
        checksum /= d + 1;
    }
    digits.extend(cs);
    digits
}

/// Lamport selections: chain index 2*i + bit for message bit i.
fn lamport_indices(msg: &[u8]) -> Vec<usize> {
    let mut out = Vec::with_capacity(msg.len() * 8);
    for (byte_idx, byte) in msg.iter().enumerate() {
        for bit in 0..8 {
            let b = (byte >> (7 - bit)) & 1;
            out.push((byte_idx * 8 + bit) * 2 + b as usize);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OtsPublicKey {
    pub params: OtsParams,
    pub chunks: Vec<Chunk>,
}

impl OtsPublicKey {
    /// Length-prefixed chunk list preceded by a small parameter header.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.chunks.len() * (4 + CHUNK_LEN));
        let (tag, w) = match self.params.scheme {
            Scheme::Lamport => (0u8, 0u8),
            Scheme::Winternitz { w } => (1u8, w),
        };
        out.push(tag);
        out.push(w);
        out.extend_from_slice(&(self.params.message_len as u32).to_le_bytes());
        out.extend_from_slice(&(self.chunks.len() as u32).to_le_bytes());
        for c in &self.chunks {
            out.extend_from_slice(&(CHUNK_LEN as u32).to_le_bytes());
            out.extend_from_slice(c);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct OneTimeKeyPair {
    pub params: OtsParams,
    secrets: Vec<Chunk>,
    public: OtsPublicKey,
    used: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneTimeSignature {
    pub chunks: Vec<Chunk>,
    pub message_len: usize,
}

impl OneTimeSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        self.chunks.iter().flat_map(|c| c.iter().copied()).collect()
    }

    /// Parse a flat chunk buffer for a key with the given parameters.
    pub fn from_bytes(params: &OtsParams, raw: &[u8]) -> Option<Self> {
        let count = params.signature_chains();
        if raw.len() != count * CHUNK_LEN {
            return None;
        }
        let chunks = raw.chunks(CHUNK_LEN).map(|c| c.try_into().unwrap()).collect();
        Some(OneTimeSignature { chunks, message_len: params.message_len })
    }
}

/// Deterministic key generation from a 32-byte seed.
pub fn keygen(
    seed: [u8; 32],
    message_len: usize,
    scheme: Scheme,
) -> Result<OneTimeKeyPair, OtsError> {
    let params = OtsParams::new(message_len, scheme)?;
    let total = params.total_chains();
    let depth = params.depth();
    let mut secrets = Vec::with_capacity(total);
    let mut public = Vec::with_capacity(total);
    for i in 0..total {
        let mut material = Vec::with_capacity(36);
        material.extend_from_slice(&seed);
        material.extend_from_slice(&(i as u32).to_le_bytes());
        let secret = ots_hash(&material);
        secrets.push(secret);
        public.push(iterate(secret, depth));
    }
    Ok(OneTimeKeyPair {
        params,
        secrets,
        public: OtsPublicKey { params, chunks: public },
        used: false,
    })
}

impl OneTimeKeyPair {
    pub fn public(&self) -> &OtsPublicKey {
        &self.public
    }

    pub fn is_used(&self) -> bool {
        self.used
    }

    /// Sign `message`, consuming the key's one shot.
    pub fn sign(&mut self, message: &[u8]) -> Result<OneTimeSignature, OtsError> {
        if self.used {
            return Err(OtsError::KeyReuse);
        }
        if message.len() != self.params.message_len {
            return Err(OtsError::LengthMismatch {
                got: message.len(),
                want: self.params.message_len,
            });
        }
        let chunks = match self.params.scheme {
            Scheme::Winternitz { .. } => winternitz_digits(&self.params, message)
                .into_iter()
                .zip(&self.secrets)
                .map(|(digit, secret)| iterate(*secret, digit))
                .collect(),
            Scheme::Lamport => lamport_indices(message)
                .into_iter()
                .map(|idx| self.secrets[idx])
                .collect(),
        };
        self.used = true;
        Ok(OneTimeSignature { chunks, message_len: message.len() })
    }
}

/// Pure verification predicate; malformed input is simply `false`.
pub fn ot_verify(public: &OtsPublicKey, message: &[u8], sig: &OneTimeSignature) -> bool {
    if message.len() != public.params.message_len || sig.message_len != message.len() {
        return false;
    }
    match public.params.scheme {
        Scheme::Winternitz { .. } => {
            let digits = winternitz_digits(&public.params, message);
            if sig.chunks.len() != digits.len() || public.chunks.len() != digits.len() {
                return false;
            }
            let depth = public.params.depth();
            digits
                .iter()
                .zip(&sig.chunks)
                .zip(&public.chunks)
                .all(|((digit, chunk), pk)| iterate(*chunk, depth - digit) == *pk)
        }
        Scheme::Lamport => {
            let indices = lamport_indices(message);
            if sig.chunks.len() != indices.len()
                || public.chunks.len() != public.params.total_chains()
            {
                return false;
            }
            indices
                .iter()
                .zip(&sig.chunks)
                .all(|(idx, chunk)| ots_hash(chunk) == public.chunks[*idx])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W4: Scheme = Scheme::Winternitz { w: 4 };

    #[test]
    fn same_seed_same_keys() {
        let a = keygen([7; 32], 4, W4).unwrap();
        let b = keygen([7; 32], 4, W4).unwrap();
        assert_eq!(a.public(), b.public());
        let c = keygen([8; 32], 4, W4).unwrap();
        assert_ne!(a.public(), c.public());
    }

    #[test]
    fn lamport_one_byte_has_16_pairs() {
        let k = keygen([1; 32], 1, Scheme::Lamport).unwrap();
        assert_eq!(k.public().chunks.len(), 16);
    }

    #[test]
    fn winternitz_w4_four_bytes_chain_counts() {
        // 8 message digits; max checksum 8*15 = 120 needs 2 hex digits
        let p = OtsParams::new(4, W4).unwrap();
        assert_eq!(p.message_chains(), 8);
        assert_eq!(p.checksum_chains(), 2);
        assert_eq!(p.total_chains(), 10);
    }

    #[test]
    fn bad_params_rejected() {
        assert!(matches!(keygen([0; 32], 0, W4), Err(OtsError::BadParams(_))));
        assert!(matches!(
            keygen([0; 32], 4, Scheme::Winternitz { w: 3 }),
            Err(OtsError::BadParams(_))
        ));
    }

    #[test]
    fn sign_verify_round_trip() {
        for scheme in [W4, Scheme::Lamport, Scheme::Winternitz { w: 2 }] {
            let mut k = keygen([3; 32], 6, scheme).unwrap();
            let msg = b"abcdef";
            let sig = k.sign(msg).unwrap();
            assert!(ot_verify(k.public(), msg, &sig), "{scheme:?}");
        }
    }

    #[test]
    fn second_sign_is_refused() {
        let mut k = keygen([3; 32], 2, W4).unwrap();
        k.sign(b"ab").unwrap();
        assert_eq!(k.sign(b"ab").unwrap_err(), OtsError::KeyReuse);
    }

    #[test]
    fn length_mismatch_refused() {
        let mut k = keygen([3; 32], 2, W4).unwrap();
        assert_eq!(k.sign(b"abc").unwrap_err(), OtsError::LengthMismatch { got: 3, want: 2 });
    }

    #[test]
    fn signature_binds_the_concatenation() {
        let mut k = keygen([5; 32], 4, W4).unwrap();
        let sig = k.sign(b"xxyy").unwrap();
        assert!(ot_verify(k.public(), b"xxyy", &sig));
        assert!(!ot_verify(k.public(), b"yyxx", &sig));
        let mut shorter = keygen([5; 32], 2, W4).unwrap();
        let sig2 = shorter.sign(b"xx").unwrap();
        assert!(!ot_verify(shorter.public(), b"xy", &sig2));
    }

    #[test]
    fn flipped_message_bit_fails() {
        let mut k = keygen([9; 32], 3, W4).unwrap();
        let msg = [0x5a, 0x01, 0xfe];
        let sig = k.sign(&msg).unwrap();
        for bit in 0..24 {
            let mut bad = msg;
            bad[bit / 8] ^= 1 << (bit % 8);
            assert!(!ot_verify(k.public(), &bad, &sig), "bit {bit}");
        }
    }

    #[test]
    fn reordered_chunks_fail() {
        // exhaustive single swaps on a 2-byte-message key
        let mut k = keygen([4; 32], 2, W4).unwrap();
        let msg = [0x12, 0x34];
        let sig = k.sign(&msg).unwrap();
        let n = sig.chunks.len();
        for i in 0..n {
            for j in i + 1..n {
                if sig.chunks[i] == sig.chunks[j] {
                    continue;
                }
                let mut swapped = sig.clone();
                swapped.chunks.swap(i, j);
                assert!(!ot_verify(k.public(), &msg, &swapped), "swap {i} {j}");
            }
        }
    }

    #[test]
    fn signature_bytes_round_trip() {
        for scheme in [W4, Scheme::Lamport] {
            let mut k = keygen([6; 32], 5, scheme).unwrap();
            let sig = k.sign(b"hello").unwrap();
            let parsed = OneTimeSignature::from_bytes(&k.params, &sig.to_bytes()).unwrap();
            assert_eq!(parsed, sig);
        }
    }

    proptest! {
        #[test]
        fn prop_round_trip_and_flip(msg in proptest::collection::vec(any::<u8>(), 1..24),
                                    flip in any::<u16>()) {
            for scheme in [W4, Scheme::Lamport] {
                let mut k = keygen([2; 32], msg.len(), scheme).unwrap();
                let sig = k.sign(&msg).unwrap();
                prop_assert!(ot_verify(k.public(), &msg, &sig));
                let bit = (flip as usize) % (msg.len() * 8);
                let mut bad = msg.clone();
                bad[bit / 8] ^= 1 << (bit % 8);
                prop_assert!(!ot_verify(k.public(), &bad, &sig));
            }
        }
    }
}
