//! Average-common-length similarity: `D(X|Y) = (L(X|Y) - L(Y)) / L_max`,
//! filtering by `D > T` and sorting by `D`.
//!
//! A classifier is parameterised by a [`MatchBase`]: an explicit
//! [`FeatureSet`], the full [`SuffixIndex`](crate::SuffixIndex), or a
//! compacted tree. All three answer the same per-position question: the
//! longest backward context ending at `i` that the base recognises.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sequence::{Alphabet, Code, UNKNOWN};

/// Identifies the training data a base was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseOrigin {
    pub n_prime: u64,
    pub l_max: usize,
}

pub trait MatchBase: Sync {
    /// Longest context the base can recognise; Eq. (1)'s normaliser.
    fn l_max(&self) -> usize;

    /// Longest `j <= min(cap, i, L_max)` such that the backward context of length
    /// `j` ending at 1-based position `i` is recognised; 0 if none.
    fn match_len(&self, seq: &[Code], i: usize, cap: usize) -> usize;

    /// True when recognised lengths at a position always form `1..=J`, so a
    /// tighter cap is just `min(J, cap)`.
    fn prefix_closed(&self) -> bool {
        false
    }

    fn origin(&self) -> Option<BaseOrigin> {
        None
    }
}

impl<B: MatchBase + ?Sized> MatchBase for &B {
    fn l_max(&self) -> usize {
        (**self).l_max()
    }
    fn match_len(&self, seq: &[Code], i: usize, cap: usize) -> usize {
        (**self).match_len(seq, i, cap)
    }
    fn prefix_closed(&self) -> bool {
        (**self).prefix_closed()
    }
    fn origin(&self) -> Option<BaseOrigin> {
        (**self).origin()
    }
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: Vec<(Code, u32)>,
    terminal: bool,
}

/// An explicit set of feature strings, written in context order (the first
/// symbol is the one at the matching position, the next one to its left).
#[derive(Clone, Debug)]
pub struct FeatureSet {
    features: Vec<Vec<Code>>,
    nodes: Vec<TrieNode>,
    l_max: usize,
}

impl FeatureSet {
    pub fn new(features: Vec<Vec<Code>>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        Self::build(features)
    }

    pub fn from_strs(alphabet: &Alphabet, features: &[&str]) -> Result<Self> {
        let features =
            features.iter().map(|f| alphabet.encode(f.as_bytes())).collect::<Result<Vec<_>>>()?;
        FeatureSet::new(features)
    }

    fn build(mut features: Vec<Vec<Code>>) -> Result<Self> {
        if features.iter().any(|f| f.is_empty() || f.contains(&UNKNOWN)) {
            return Err(Error::InvalidFeature);
        }
        features.sort();
        features.dedup();
        let mut nodes = alloc::vec![TrieNode::default()];
        for f in &features {
            let mut at = 0usize;
            for &c in f {
                at = match nodes[at].children.binary_search_by_key(&c, |&(k, _)| k) {
                    Ok(k) => nodes[at].children[k].1 as usize,
                    Err(k) => {
                        let id = nodes.len();
                        nodes[at].children.insert(k, (c, id as u32));
                        nodes.push(TrieNode::default());
                        id
                    }
                };
            }
            nodes[at].terminal = true;
        }
        let l_max = features.iter().map(Vec::len).max().unwrap_or(0);
        Ok(FeatureSet { features, nodes, l_max })
    }

    /// The members for which `keep` holds. May be empty (a compaction can
    /// prune every feature), in which case nothing ever matches; `l_max`
    /// is preserved so scores stay comparable.
    pub fn restricted(&self, mut keep: impl FnMut(&[Code]) -> bool) -> FeatureSet {
        let kept = self.features.iter().filter(|f| keep(f)).cloned().collect();
        let mut set = Self::build(kept).expect("subset of a valid set");
        set.l_max = self.l_max;
        set
    }

    pub fn features(&self) -> &[Vec<Code>] {
        &self.features
    }

    /// `f(Y)`, the number of distinct features.
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, w: &[Code]) -> bool {
        self.features.binary_search_by(|f| f.as_slice().cmp(w)).is_ok()
    }

    /// Pairs `(shorter, longer)` of feature indices where the shorter is a
    /// prefix of the longer. Reported only; longest match resolves them.
    pub fn prefix_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.features.iter().enumerate() {
            for (j, b) in self.features.iter().enumerate().skip(i + 1) {
                // sorted order puts a prefix immediately before its extensions
                if b.starts_with(a) {
                    out.push((i, j));
                } else {
                    break;
                }
            }
        }
        out
    }

    pub fn is_prefix_free(&self) -> bool {
        self.prefix_violations().is_empty()
    }

    /// Whether the features are exactly the leaves of a full tree over an
    /// alphabet of `alphabet_size` symbols: every internal node branches on
    /// every symbol and only leaves are features.
    pub fn is_full_tree(&self, alphabet_size: usize) -> bool {
        self.nodes.iter().enumerate().all(|(id, n)| {
            if n.children.is_empty() {
                id != 0 && n.terminal
            } else {
                !n.terminal && n.children.len() == alphabet_size
            }
        })
    }
}

impl MatchBase for FeatureSet {
    fn l_max(&self) -> usize {
        self.l_max
    }

    fn match_len(&self, seq: &[Code], i: usize, cap: usize) -> usize {
        let cap = cap.min(i);
        let mut at = 0usize;
        let mut best = 0;
        for j in 0..cap {
            let c = seq[i - 1 - j];
            match self.nodes[at].children.binary_search_by_key(&c, |&(k, _)| k) {
                Ok(k) => at = self.nodes[at].children[k].1 as usize,
                Err(_) => break,
            }
            if self.nodes[at].terminal {
                best = j + 1;
            }
        }
        best
    }
}

/// Per-position longest-match lengths `ℓ_i` of a sequence against a base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchProfile {
    pub lengths: Vec<u32>,
    pub matched: usize,
    pub sum: u64,
}

impl MatchProfile {
    pub fn from_lengths(lengths: Vec<u32>) -> Self {
        let matched = lengths.iter().filter(|&&l| l > 0).count();
        let sum = lengths.iter().map(|&l| u64::from(l)).sum();
        MatchProfile { lengths, matched, sum }
    }

    /// The matched contexts in position order.
    pub fn matched_contexts(&self, seq: &[Code]) -> Vec<Vec<Code>> {
        self.lengths
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(p, &l)| seq[p + 1 - l as usize..=p].iter().rev().copied().collect())
            .collect()
    }

    pub fn average(&self, mode: AvgMode) -> Option<Rational> {
        average(self.sum, self.matched as u64, self.lengths.len() as u64, mode)
    }
}

pub(crate) fn average(sum: u64, matched: u64, len: u64, mode: AvgMode) -> Option<Rational> {
    let den = match mode {
        AvgMode::Matched => matched,
        AvgMode::All => len,
    };
    (den > 0).then(|| Rational::new(i128::from(sum), i128::from(den)))
}

pub fn match_profile<B: MatchBase + ?Sized>(base: &B, seq: &[Code]) -> MatchProfile {
    let l_max = base.l_max();
    let lengths = (1..=seq.len()).map(|i| base.match_len(seq, i, l_max) as u32).collect();
    MatchProfile::from_lengths(lengths)
}

/// How `L(·)` averages match lengths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AvgMode {
    /// Over matched positions only.
    #[default]
    Matched,
    /// Over all positions, unmatched ones counting as zero.
    All,
}

/// The training-side statistic `L(Y)` of a base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingStats {
    pub l_y: Rational,
    pub l_max: usize,
    pub mode: AvgMode,
    pub match_sum: u64,
    pub matched: u64,
    pub len: u64,
}

impl TrainingStats {
    pub fn compute<B: MatchBase + ?Sized>(base: &B, y: &[Code], mode: AvgMode) -> Result<Self> {
        let p = match_profile(base, y);
        Self::from_counts(p.sum, p.matched as u64, y.len() as u64, base.l_max(), mode)
    }

    pub fn from_counts(match_sum: u64, matched: u64, len: u64, l_max: usize, mode: AvgMode) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidParams("L_max must be at least 1"));
        }
        if matched == 0 {
            return Err(Error::UndefinedAverage);
        }
        let l_y = average(match_sum, matched, len, mode).ok_or(Error::UndefinedAverage)?;
        Ok(TrainingStats { l_y, l_max, mode, match_sum, matched, len })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Acceptable,
    NotAcceptable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFlag {
    /// No position matched, so `L(X|Y)` is undefined; rejected outright.
    NoMatches,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityReport {
    pub l_y: Rational,
    pub l_x_given_y: Option<Rational>,
    pub l_max: usize,
    pub d: Option<Rational>,
    pub t: Rational,
    pub decision: Decision,
    pub matched_positions: usize,
    pub length: usize,
    pub match_sum: u64,
    pub flag: Option<ReportFlag>,
}

impl SimilarityReport {
    pub fn from_profile(stats: &TrainingStats, profile: &MatchProfile, t: Rational) -> Self {
        let (l_x, d) = if profile.matched == 0 {
            (None, None)
        } else {
            let l_x = profile.average(stats.mode).expect("matched > 0");
            let d = (l_x - stats.l_y) / Rational::from_integer(stats.l_max as i128);
            (Some(l_x), Some(d))
        };
        let decision = match d {
            Some(d) if d > t => Decision::Acceptable,
            _ => Decision::NotAcceptable,
        };
        SimilarityReport {
            l_y: stats.l_y,
            l_x_given_y: l_x,
            l_max: stats.l_max,
            d,
            t,
            decision,
            matched_positions: profile.matched,
            length: profile.lengths.len(),
            match_sum: profile.sum,
            flag: (profile.matched == 0).then_some(ReportFlag::NoMatches),
        }
    }

    pub fn acceptable(&self) -> bool {
        self.decision == Decision::Acceptable
    }
}

pub fn similarity<B: MatchBase + ?Sized>(
    base: &B,
    stats: &TrainingStats,
    x: &[Code],
    t: Rational,
) -> SimilarityReport {
    SimilarityReport::from_profile(stats, &match_profile(base, x), t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranked {
    /// Position of the test in the input list.
    pub input_index: usize,
    pub report: SimilarityReport,
}

/// Descending by `D`, stable; tests without a score sink to the bottom.
pub fn sort_tests<B, S>(base: &B, stats: &TrainingStats, tests: &[S], t: Rational) -> Vec<Ranked>
where
    B: MatchBase + ?Sized,
    S: AsRef<[Code]>,
{
    let mut ranked: Vec<Ranked> = tests
        .iter()
        .enumerate()
        .map(|(input_index, x)| Ranked { input_index, report: similarity(base, stats, x.as_ref(), t) })
        .collect();
    ranked.sort_by(|a, b| match (a.report.d, b.report.d) {
        (Some(x), Some(y)) => y.cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Sequence;

    fn setup() -> (Alphabet, FeatureSet, Sequence, Sequence) {
        let a = Alphabet::new(b"ABCDE").unwrap();
        let f = FeatureSet::from_strs(&a, &["A", "BA", "C", "CD"]).unwrap();
        let y = Sequence::from_symbols(&a, b"ABACDCBEDEDE").unwrap();
        let x = Sequence::from_symbols(&a, b"AABDADAD").unwrap();
        (a, f, y, x)
    }

    // Independent sliding scan: at each position try every feature directly.
    fn naive_profile(features: &[&str], a: &Alphabet, s: &[Code]) -> Vec<u32> {
        (1..=s.len())
            .map(|i| {
                features
                    .iter()
                    .map(|f| a.encode(f.as_bytes()).unwrap())
                    .filter(|f| f.len() <= i && (0..f.len()).all(|k| s[i - 1 - k] == f[k]))
                    .map(|f| f.len() as u32)
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    #[test]
    fn golden_profiles() {
        let (a, f, y, x) = setup();
        let px = match_profile(&f, &x);
        assert_eq!(px.lengths, [1, 1, 2, 0, 1, 0, 1, 0]);
        assert_eq!(px.lengths, naive_profile(&["A", "BA", "C", "CD"], &a, &x));
        let names: Vec<_> = px.matched_contexts(&x).iter().map(|c| a.decode(c)).collect();
        assert_eq!(names, [b"A".to_vec(), b"A".to_vec(), b"BA".to_vec(), b"A".to_vec(), b"A".to_vec()]);
        let py = match_profile(&f, &y);
        assert_eq!(py.lengths, naive_profile(&["A", "BA", "C", "CD"], &a, &y));
        assert_eq!(py.lengths, [1, 2, 1, 1, 0, 2, 0, 0, 0, 0, 0, 0]);
        assert_eq!((py.matched, py.sum), (5, 7));
    }

    #[test]
    fn golden_similarity() {
        let (_, f, y, x) = setup();
        let stats = TrainingStats::compute(&f, &y, AvgMode::Matched).unwrap();
        assert_eq!(stats.l_y, Rational::new(7, 5));
        assert_eq!(stats.l_max, 2);
        let r = similarity(&f, &stats, &x, Rational::from_integer(0));
        assert_eq!(r.l_x_given_y, Some(Rational::new(6, 5)));
        assert_eq!(r.d, Some(Rational::new(-1, 10)));
        assert_eq!(r.decision, Decision::NotAcceptable);
        let self_r = similarity(&f, &stats, &y, Rational::new(-1, 100));
        assert_eq!(self_r.d, Some(Rational::from_integer(0)));
        assert!(self_r.acceptable());
    }

    #[test]
    fn featureless_test_is_rejected() {
        let (a, f, y, _) = setup();
        let stats = TrainingStats::compute(&f, &y, AvgMode::Matched).unwrap();
        let x = Sequence::from_symbols(&a, b"DDEE").unwrap();
        let r = similarity(&f, &stats, &x, Rational::from_integer(-100));
        assert_eq!(r.flag, Some(ReportFlag::NoMatches));
        assert_eq!(r.decision, Decision::NotAcceptable);
        assert_eq!(TrainingStats::compute(&f, &x, AvgMode::Matched), Err(Error::UndefinedAverage));
    }

    #[test]
    fn all_positions_mode() {
        let (_, f, y, x) = setup();
        let stats = TrainingStats::compute(&f, &y, AvgMode::All).unwrap();
        assert_eq!(stats.l_y, Rational::new(7, 12));
        let r = similarity(&f, &stats, &x, Rational::from_integer(0));
        assert_eq!(r.l_x_given_y, Some(Rational::new(6, 8)));
        assert_eq!(r.d, Some((Rational::new(3, 4) - Rational::new(7, 12)) / 2));
    }

    #[test]
    fn trivial_averages() {
        let a = Alphabet::new(b"ABC").unwrap();
        let y = Sequence::from_symbols(&a, b"ABCCBAAB").unwrap();
        let singles = FeatureSet::from_strs(&a, &["A", "B", "C"]).unwrap();
        let s = TrainingStats::compute(&singles, &y, AvgMode::Matched).unwrap();
        assert_eq!(s.l_y, Rational::from_integer(1));
        let once = FeatureSet::from_strs(&a, &["CCB"]).unwrap();
        let s = TrainingStats::compute(&once, &y, AvgMode::Matched).unwrap();
        assert_eq!(s.l_y, Rational::from_integer(3));
    }

    #[test]
    fn sorting_is_descending_and_stable() {
        let (a, f, y, x) = setup();
        let stats = TrainingStats::compute(&f, &y, AvgMode::Matched).unwrap();
        let none = Sequence::from_symbols(&a, b"EEEE").unwrap();
        let tests = [x.clone(), none.clone(), y.clone(), x.clone()];
        let ranked = sort_tests(&f, &stats, &tests, Rational::from_integer(0));
        let order: Vec<_> = ranked.iter().map(|r| r.input_index).collect();
        assert_eq!(order, [2, 0, 3, 1]);
        let single = sort_tests(&f, &stats, &[x], Rational::from_integer(0));
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn feature_set_diagnostics() {
        let (a, f, _, _) = setup();
        // C is a prefix of CD
        assert_eq!(f.prefix_violations().len(), 1);
        assert!(!f.is_prefix_free());
        assert!(!f.is_full_tree(a.len()));
        let ab = Alphabet::new(b"AB").unwrap();
        let full = FeatureSet::from_strs(&ab, &["A", "BA", "BB"]).unwrap();
        assert!(full.is_full_tree(2));
        assert!(full.is_prefix_free());
        assert!(FeatureSet::new(Vec::new()).is_err());
        assert!(FeatureSet::new(alloc::vec![Vec::new()]).is_err());
        let r = f.restricted(|w| w.len() == 2);
        assert_eq!(r.len(), 2);
        assert_eq!(r.l_max(), 2);
        assert!(f.restricted(|_| false).is_empty());
    }

    #[test]
    fn threshold_is_strict() {
        let (_, f, y, x) = setup();
        let stats = TrainingStats::compute(&f, &y, AvgMode::Matched).unwrap();
        let at = similarity(&f, &stats, &x, Rational::new(-1, 10));
        assert_eq!(at.decision, Decision::NotAcceptable);
        let below = similarity(&f, &stats, &x, Rational::new(-11, 100));
        assert_eq!(below.decision, Decision::Acceptable);
    }
}
