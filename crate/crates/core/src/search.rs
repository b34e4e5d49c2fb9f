//! n-ary search geometry shared by the dispute drivers and the on-chain
//! assertion checks.
//!
//! The first-stage search runs over a space of exactly n^l hashes between an
//! agreed-correct left anchor and the claimed final hash: each round the
//! prover reveals the n-1 equally spaced interior hashes of the current
//! interval and the verifier picks one of the n sub-intervals. The
//! concatenated interval identifiers, most significant round first, are the
//! binary index of the first conflicting step.
//!
//! Auxiliary searches reuse the same shape: the reverse search (incorrect ->
//! correct transition) runs on an arbitrary-width interval with ceiling
//! splits, and the opcode search runs on the negative (loading) positions
//! through an exact power-of-n space shifted below zero.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("n must be a power of two in 2..=256, got {0}")]
    BadArity(u32),
    #[error("rounds must be in 1..=16, got {0}")]
    BadRounds(u32),
    #[error("search space n^l = {0} is too large")]
    SpaceTooLarge(u128),
}

/// Arity and round count; the derived search space is m = n^l.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    n: u32,
    l: u32,
}

impl SearchConfig {
    pub fn new(n: u32, l: u32) -> Result<Self, SearchError> {
        if !n.is_power_of_two() || !(2..=256).contains(&n) {
            return Err(SearchError::BadArity(n));
        }
        if !(1..=16).contains(&l) {
            return Err(SearchError::BadRounds(l));
        }
        let space = (n as u128).pow(l);
        if space > 1 << 32 {
            return Err(SearchError::SpaceTooLarge(space));
        }
        Ok(SearchConfig { n, l })
    }

    /// Smallest config with this arity whose space covers `need` positions.
    pub fn covering(n: u32, need: u64) -> Result<Self, SearchError> {
        let mut l = 1;
        while Self::new(n, l)?.m() < need {
            l += 1;
        }
        Self::new(n, l)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rounds(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> u64 {
        (self.n as u64).pow(self.l)
    }

    pub fn bits_per_round(&self) -> u32 {
        self.n.trailing_zeros()
    }
}

/// Rebuild the step index from the per-round interval identifiers,
/// most significant round first.
pub fn reconstruct_index(cfg: &SearchConfig, picks: &[u8]) -> i64 {
    debug_assert_eq!(picks.len(), cfg.l as usize);
    picks
        .iter()
        .enumerate()
        .map(|(r, t)| *t as i64 * (cfg.n as i64).pow(cfg.l - 1 - r as u32))
        .sum()
}

/// Render picks as the concatenated identifier bit string, e.g. "011001".
pub fn identifier_bits(cfg: &SearchConfig, picks: &[u8]) -> String {
    let width = cfg.bits_per_round() as usize;
    picks.iter().map(|t| format!("{:0width$b}", t)).collect()
}

/// First t such that boundary t is correct and boundary t+1 is incorrect;
/// `flags[0]` and `flags[n]` are the anchors.
pub fn lowest_correct_incorrect(flags: &[bool]) -> Option<usize> {
    flags.windows(2).position(|w| w[0] && !w[1])
}

/// First t such that boundary t is incorrect and boundary t+1 is correct.
pub fn lowest_incorrect_correct(flags: &[bool]) -> Option<usize> {
    flags.windows(2).position(|w| !w[0] && w[1])
}

/// The exact-power first-stage search over hash indices (-1, m-1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainSearch {
    cfg: SearchConfig,
    lo: i64,
    hi: i64,
    picks: Vec<u8>,
}

impl MainSearch {
    pub fn new(cfg: SearchConfig) -> Self {
        MainSearch { cfg, lo: -1, hi: cfg.m() as i64 - 1, picks: Vec::new() }
    }

    pub fn cfg(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn rounds_done(&self) -> u32 {
        self.picks.len() as u32
    }

    pub fn is_pinned(&self) -> bool {
        self.rounds_done() == self.cfg.l
    }

    pub fn picks(&self) -> &[u8] {
        &self.picks
    }

    fn span(&self) -> i64 {
        self.hi - self.lo
    }

    /// Indices of the n-1 hashes the prover reveals this round.
    pub fn reveal_indices(&self) -> Vec<i64> {
        debug_assert!(!self.is_pinned());
        let step = self.span() / self.cfg.n as i64;
        (1..self.cfg.n as i64).map(|t| self.lo + t * step).collect()
    }

    /// Narrow to sub-interval `t` (0-based, identifier of the chosen
    /// interval).
    pub fn apply_pick(&mut self, t: u8) {
        debug_assert!(!self.is_pinned());
        debug_assert!((t as u32) < self.cfg.n);
        let step = self.span() / self.cfg.n as i64;
        let lo = self.lo + t as i64 * step;
        self.lo = lo;
        self.hi = lo + step;
        self.picks.push(t);
    }

    /// The first conflicting step, once all rounds have run.
    pub fn conflict_index(&self) -> i64 {
        debug_assert!(self.is_pinned());
        self.hi
    }
}

/// Where a main-search hash index lives on chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MainHashSource {
    /// Index -1: the agreed initial state.
    AgreedBase,
    /// Index m-1: derived from the kickoff claim.
    KickoffFinal,
    /// Revealed during a search round (1-based round, 1-based slot).
    Reveal { round: u32, slot: u32 },
}

/// Locate `index` among the hashes revealed along the picked path.
pub fn resolve_main_hash(cfg: &SearchConfig, picks: &[u8], index: i64) -> Option<MainHashSource> {
    if index == -1 {
        return Some(MainHashSource::AgreedBase);
    }
    if index == cfg.m() as i64 - 1 {
        return Some(MainHashSource::KickoffFinal);
    }
    let mut search = MainSearch::new(*cfg);
    for (r, t) in picks.iter().enumerate() {
        if search.is_pinned() {
            return None;
        }
        if let Some(slot) = search.reveal_indices().iter().position(|i| *i == index) {
            return Some(MainHashSource::Reveal { round: r as u32 + 1, slot: slot as u32 + 1 });
        }
        search.apply_pick(*t);
    }
    None
}

/// The reverse search of the last-step-hash challenge: arbitrary-width
/// interval, ceiling splits, always runs the full l rounds (degenerate
/// rounds repeat the pinned interval so the pre-signed graph stays linear).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReverseSearch {
    cfg: SearchConfig,
    lo: i64,
    hi: i64,
    picks: Vec<u8>,
}

impl ReverseSearch {
    /// `lo` is the incorrect anchor (step k), `hi` the correct anchor
    /// (step j-1). Requires 1 <= hi - lo <= n^l.
    pub fn new(cfg: SearchConfig, lo: i64, hi: i64) -> Option<Self> {
        if hi <= lo || (hi - lo) as u64 > cfg.m() {
            return None;
        }
        Some(ReverseSearch { cfg, lo, hi, picks: Vec::new() })
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn rounds_done(&self) -> u32 {
        self.picks.len() as u32
    }

    pub fn is_complete(&self) -> bool {
        self.rounds_done() == self.cfg.rounds()
    }

    pub fn picks(&self) -> &[u8] {
        &self.picks
    }

    /// Boundary indices for the current round: lo + ceil(t * span / n),
    /// exactly n-1 values, possibly repeating near small spans.
    pub fn reveal_indices(&self) -> Vec<i64> {
        let span = self.hi - self.lo;
        let n = self.cfg.n() as i64;
        (1..n).map(|t| self.lo + (t * span + n - 1) / n).collect()
    }

    /// Boundary t (0..=n) including both anchors.
    fn boundary(&self, t: i64) -> i64 {
        let n = self.cfg.n() as i64;
        if t == 0 {
            self.lo
        } else if t == n {
            self.hi
        } else {
            let span = self.hi - self.lo;
            self.lo + (t * span + n - 1) / n
        }
    }

    pub fn apply_pick(&mut self, t: u8) {
        debug_assert!(!self.is_complete());
        let lo = self.boundary(t as i64);
        let hi = self.boundary(t as i64 + 1);
        // empty sub-intervals (clamped duplicates) keep the current interval
        if hi > lo {
            self.lo = lo;
            self.hi = hi;
        }
        self.picks.push(t);
    }

    /// The pinned transition (q-1, q); meaningful when the span reached 1.
    pub fn pinned(&self) -> Option<(i64, i64)> {
        (self.hi - self.lo == 1).then_some((self.lo, self.hi))
    }
}

/// Where a reverse-search index lives on chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReverseHashSource {
    /// The low anchor k (part of the scenario reveal).
    AnchorLow,
    /// The high anchor j-1 (resolved through the main search).
    AnchorHigh,
    /// A revealed (hash, trace) pair: round 1 rides in the scenario reveal,
    /// rounds 2..=l in their own messages.
    Pair { round: u32, slot: u32 },
}

/// Locate `index` among the pairs revealed along the picked reverse path.
pub fn resolve_reverse_hash(
    cfg: &SearchConfig,
    lo: i64,
    hi: i64,
    picks: &[u8],
    index: i64,
) -> Option<ReverseHashSource> {
    if index == lo {
        return Some(ReverseHashSource::AnchorLow);
    }
    if index == hi {
        return Some(ReverseHashSource::AnchorHigh);
    }
    let mut search = ReverseSearch::new(*cfg, lo, hi)?;
    for (r, t) in picks.iter().enumerate() {
        if let Some(slot) = search.reveal_indices().iter().position(|i| *i == index) {
            return Some(ReverseHashSource::Pair { round: r as u32 + 1, slot: slot as u32 + 1 });
        }
        if search.is_complete() {
            return None;
        }
        search.apply_pick(*t);
    }
    None
}

/// The opcode challenge's search over loading positions: an exact n-ary
/// space of size M = n^rounds shifted so position p maps to step index
/// p - M (covering -M..-1, anchors at -M-1 and -1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegSearch {
    inner: MainSearch,
    space: i64,
}

impl NegSearch {
    pub fn new(cfg: SearchConfig) -> Self {
        NegSearch { space: cfg.m() as i64, inner: MainSearch::new(cfg) }
    }

    pub fn cfg(&self) -> &SearchConfig {
        self.inner.cfg()
    }

    pub fn to_index(&self, pos: i64) -> i64 {
        pos - self.space
    }

    pub fn to_pos(&self, index: i64) -> i64 {
        index + self.space
    }

    pub fn rounds_done(&self) -> u32 {
        self.inner.rounds_done()
    }

    /// Current interval bounds in position space.
    pub fn pos_bounds(&self) -> (i64, i64) {
        self.inner.bounds()
    }

    pub fn is_pinned(&self) -> bool {
        self.inner.is_pinned()
    }

    pub fn picks(&self) -> &[u8] {
        self.inner.picks()
    }

    /// Step indices (negative) the prover reveals this round.
    pub fn reveal_indices(&self) -> Vec<i64> {
        self.inner.reveal_indices().into_iter().map(|p| self.to_index(p)).collect()
    }

    pub fn apply_pick(&mut self, t: u8) {
        self.inner.apply_pick(t);
    }

    /// The pinned loading step index.
    pub fn target_index(&self) -> i64 {
        self.to_index(self.inner.conflict_index())
    }
}

/// Where a negative-search index lives on chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NegHashSource {
    /// At or below the space base: the ZERO chain extension.
    BaseZero,
    /// Index -1: the agreed initial CPU state.
    AgreedInitial,
    Reveal { round: u32, slot: u32 },
}

pub fn resolve_neg_hash(cfg: &SearchConfig, picks: &[u8], index: i64) -> Option<NegHashSource> {
    let space = cfg.m() as i64;
    let pos = index + space;
    if pos <= -1 {
        return Some(NegHashSource::BaseZero);
    }
    match resolve_main_hash(cfg, picks, pos)? {
        MainHashSource::AgreedBase => Some(NegHashSource::BaseZero),
        MainHashSource::KickoffFinal => Some(NegHashSource::AgreedInitial),
        MainHashSource::Reveal { round, slot } => Some(NegHashSource::Reveal { round, slot }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg64() -> SearchConfig {
        SearchConfig::new(4, 3).unwrap()
    }

    /// Drive a main search against a divergence predicate: `incorrect(i)`
    /// says whether hash i disagrees. Mirrors the honest verifier.
    fn run_search(cfg: SearchConfig, incorrect: impl Fn(i64) -> bool) -> MainSearch {
        let mut s = MainSearch::new(cfg);
        while !s.is_pinned() {
            let (lo, hi) = s.bounds();
            let mut flags = vec![!incorrect(lo)];
            flags.extend(s.reveal_indices().iter().map(|i| !incorrect(*i)));
            flags.push(!incorrect(hi));
            let t = lowest_correct_incorrect(&flags).expect("divergence exists");
            s.apply_pick(t as u8);
        }
        s
    }

    #[test]
    fn first_round_reveals_15_31_47() {
        let s = MainSearch::new(cfg64());
        assert_eq!(s.reveal_indices(), vec![15, 31, 47]);
    }

    #[test]
    fn second_round_inside_16_31_reveals_19_23_27() {
        let mut s = MainSearch::new(cfg64());
        s.apply_pick(1); // interval (15, 31]
        assert_eq!(s.reveal_indices(), vec![19, 23, 27]);
    }

    #[test]
    fn fault_at_25_produces_011001() {
        let s = run_search(cfg64(), |i| i >= 25);
        assert_eq!(s.picks(), &[1, 2, 1]);
        assert_eq!(identifier_bits(s.cfg(), s.picks()), "011001");
        assert_eq!(reconstruct_index(s.cfg(), s.picks()), 25);
        assert_eq!(s.conflict_index(), 25);
    }

    #[test]
    fn all_zero_identifiers_mean_index_zero() {
        assert_eq!(reconstruct_index(&cfg64(), &[0, 0, 0]), 0);
        let s = run_search(cfg64(), |i| i >= 0);
        assert_eq!(s.conflict_index(), 0);
    }

    #[test]
    fn random_fault_positions_match_linear_scan() {
        // brute-force oracle: the divergence index is the first incorrect
        // hash; the search must reconstruct exactly it
        let cfg = SearchConfig::new(4, 6).unwrap(); // m = 4096
        let m = cfg.m() as i64;
        let mut state = 0x2545f4914f6cdd1du64;
        for _ in 0..1000 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let fault = (state % m as u64) as i64;
            let s = run_search(cfg, |i| i >= fault);
            assert_eq!(s.conflict_index(), fault);
            assert_eq!(reconstruct_index(&cfg, s.picks()), fault);
        }
    }

    #[test]
    fn search_survives_sentinel_reconvergence() {
        // correctness pattern C..C I..I C..C (chains re-agree in the
        // sentinel tail); the scan must still pin the first divergence
        let s = run_search(cfg64(), |i| (25..=40).contains(&i));
        assert_eq!(s.conflict_index(), 25);
    }

    #[test]
    fn every_round_reveals_exactly_n_minus_1() {
        for (n, l) in [(2u32, 6u32), (4, 3), (16, 2)] {
            let cfg = SearchConfig::new(n, l).unwrap();
            let mut s = MainSearch::new(cfg);
            while !s.is_pinned() {
                assert_eq!(s.reveal_indices().len(), n as usize - 1);
                s.apply_pick(0);
            }
            assert_eq!(s.rounds_done(), l);
        }
    }

    #[test]
    fn resolve_main_hash_finds_j_and_j_minus_1() {
        let cfg = cfg64();
        for fault in [0i64, 1, 25, 37, 62, 63] {
            let s = run_search(cfg, |i| i >= fault);
            let j = s.conflict_index();
            for target in [j - 1, j] {
                let src = resolve_main_hash(&cfg, s.picks(), target).unwrap();
                match src {
                    MainHashSource::AgreedBase => assert_eq!(target, -1),
                    MainHashSource::KickoffFinal => assert_eq!(target, 63),
                    MainHashSource::Reveal { round, slot } => {
                        // replay: that round's slot really is the target
                        let mut replay = MainSearch::new(cfg);
                        for t in &s.picks()[..round as usize - 1] {
                            replay.apply_pick(*t);
                        }
                        assert_eq!(replay.reveal_indices()[slot as usize - 1], target);
                    }
                }
            }
        }
    }

    #[test]
    fn reverse_search_pins_the_transition() {
        let cfg = cfg64();
        // prover fabricated hash k=5; true transition at q = 6; j-1 = 40
        for (k, hi) in [(5i64, 40i64), (0, 63), (10, 12), (38, 39)] {
            let mut s = ReverseSearch::new(cfg, k, hi).unwrap();
            let incorrect = |i: i64| i == k; // only the fabricated hash is wrong
            while !s.is_complete() {
                let (lo, hi) = s.bounds();
                let mut flags = vec![!incorrect(lo)];
                flags.extend(s.reveal_indices().iter().map(|i| !incorrect(*i)));
                flags.push(!incorrect(hi));
                let t = lowest_incorrect_correct(&flags).expect("transition exists");
                s.apply_pick(t as u8);
            }
            assert_eq!(s.pinned(), Some((k, k + 1)), "k={k} hi={hi}");
        }
    }

    #[test]
    fn reverse_reveal_indices_are_nonempty_and_in_range() {
        let cfg = cfg64();
        let s = ReverseSearch::new(cfg, 3, 4).unwrap();
        // span 1: boundaries all clamp to the high end
        assert_eq!(s.reveal_indices(), vec![4, 4, 4]);
    }

    #[test]
    fn neg_search_targets_loading_index() {
        let cfg = SearchConfig::new(4, 2).unwrap(); // space 16 -> indices -16..-1
        let mut s = NegSearch::new(cfg);
        assert_eq!(s.to_index(15), -1);
        assert_eq!(s.to_index(-1), -17);
        let target = -7i64;
        while !s.is_pinned() {
            let (lo, hi) = s.inner.bounds();
            let step = (hi - lo) / cfg.n() as i64;
            let pos = s.to_pos(target);
            let t = ((pos - lo - 1) / step) as u8;
            s.apply_pick(t);
        }
        assert_eq!(s.target_index(), target);
    }

    #[test]
    fn covering_picks_minimal_rounds() {
        assert_eq!(SearchConfig::covering(4, 64).unwrap().rounds(), 3);
        assert_eq!(SearchConfig::covering(4, 65).unwrap().rounds(), 4);
        assert_eq!(SearchConfig::covering(2, 4096).unwrap().rounds(), 12);
        assert_eq!(SearchConfig::covering(16, 4096).unwrap().rounds(), 3);
    }
}
