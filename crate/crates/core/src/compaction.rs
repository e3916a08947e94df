//! Universal compaction: keep exactly the backward contexts whose empirical
//! probability in `Y` is at least `τ = ε / (N·f)`.
//!
//! The retained set is prefix-closed, so it is a trie whose leaves are the
//! maximal retained contexts. Leaves are prefix-free, each accounts for at
//! least `τ·N'` distinct positions of `Y`, hence there are at most `N·f/ε`
//! of them whatever the length of `Y`. Only counts are read; no feature set
//! is ever an input.

use alloc::vec::Vec;

use crate::classifier::{BaseOrigin, MatchBase};
use crate::error::{Error, Result};
use crate::evaluation;
use crate::index::{Interval, SuffixIndex};
use crate::rational::{ceil_nonneg, is_positive, Rational};
use crate::sequence::{Alphabet, Code};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompactionParams {
    epsilon: Rational,
    n: u64,
    f: u64,
}

impl CompactionParams {
    /// `epsilon > 0`, test length `n >= 1` and feature budget `f >= 1`.
    /// `epsilon > 1` is accepted; it makes the threshold exceed `1/(N·f)`
    /// and may empty the tree.
    pub fn new(epsilon: Rational, n: u64, f: u64) -> Result<Self> {
        if !is_positive(&epsilon) {
            return Err(Error::InvalidParams("epsilon must be positive"));
        }
        if n == 0 || f == 0 {
            return Err(Error::InvalidParams("N and f must be at least 1"));
        }
        Ok(CompactionParams { epsilon, n, f })
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    /// `τ = ε / (N·f)`, exact.
    pub fn threshold(&self) -> Rational {
        self.epsilon / Rational::from_integer(i128::from(self.n) * i128::from(self.f))
    }

    /// Smallest count `c` with `c / n_prime >= τ`; ties are retained.
    pub fn min_count(&self, n_prime: u64) -> u64 {
        let c = ceil_nonneg(&(self.threshold() * Rational::from_integer(i128::from(n_prime))));
        c.clamp(1, i128::from(u64::MAX)) as u64
    }

    /// `⌈N·f/ε⌉`.
    pub fn leaf_bound(&self) -> u64 {
        let b = ceil_nonneg(&(Rational::from_integer(i128::from(self.n) * i128::from(self.f)) / self.epsilon));
        b.min(i128::from(u64::MAX)) as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompactionWarning {
    /// `τ > 1`: no context can qualify.
    ThresholdAboveOne,
    /// No context reaches the threshold.
    EmptyTree,
}

/// A retained context with its occurrence count in `Y`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Leaf {
    pub context: Vec<Code>,
    pub count: u64,
}

/// The compacted data base as a view over the full index: a context is
/// retained iff its count reaches `min_count`.
#[derive(Clone, Copy, Debug)]
pub struct CompactedTree<'a> {
    index: &'a SuffixIndex,
    params: CompactionParams,
    min_count: u64,
}

pub fn compact(index: &SuffixIndex, params: CompactionParams) -> CompactedTree<'_> {
    CompactedTree { index, params, min_count: params.min_count(index.n_prime()) }
}

impl<'a> CompactedTree<'a> {
    pub fn index(&self) -> &'a SuffixIndex {
        self.index
    }

    pub fn params(&self) -> CompactionParams {
        self.params
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn warning(&self) -> Option<CompactionWarning> {
        if self.params.threshold() > Rational::from_integer(1) {
            Some(CompactionWarning::ThresholdAboveOne)
        } else if self.is_empty() {
            Some(CompactionWarning::EmptyTree)
        } else {
            None
        }
    }

    pub fn is_empty(&self) -> bool {
        let root = self.index.root();
        (0..self.index.alphabet().len() as Code)
            .all(|c| self.index.extend(root, c).is_none_or(|iv| iv.count() < self.min_count))
    }

    /// Whether `w` is a retained context.
    pub fn contains(&self, w: &[Code]) -> bool {
        !w.is_empty() && w.len() <= self.index.l_max() && self.index.count_unchecked(w) >= self.min_count
    }

    pub fn longest_match(&self, x: &[Code], i: usize) -> Result<usize> {
        self.index.longest_match(x, i, self.index.l_max(), self.min_count)
    }

    /// Walks the retained trie, calling `leaf` with each maximal retained
    /// context (in lexicographic order) and its count. Returns the number of
    /// retained contexts, internal nodes included.
    pub fn walk(&self, mut leaf: impl FnMut(&[Code], u64)) -> u64 {
        let idx = self.index;
        let l_max = idx.l_max();
        let a = idx.alphabet().len() as Code;
        let mut retained = 0u64;
        let mut stack: Vec<Interval> = Vec::new();
        let push_children = |stack: &mut Vec<Interval>, iv: Interval| -> bool {
            let before = stack.len();
            for c in (0..a).rev() {
                if let Some(child) = idx.extend(iv, c) {
                    if child.count() >= self.min_count {
                        stack.push(child);
                    }
                }
            }
            stack.len() > before
        };
        push_children(&mut stack, idx.root());
        while let Some(iv) = stack.pop() {
            // All suffixes in the interval agree up to `depth`; skip the unary run.
            let d = iv.depth as usize;
            let (first, last) = (idx.suffix_start(iv.lo), idx.suffix_start(iv.hi - 1));
            let run = if iv.hi - iv.lo == 1 {
                (idx.text().len() - first as usize - d).min(l_max - d)
            } else {
                idx.lcp(first + d as u32, last + d as u32, l_max - d)
            };
            let depth = d + run;
            retained += run as u64 + 1;
            let node = Interval { depth: depth as u32, ..iv };
            if depth == l_max || !push_children(&mut stack, node) {
                let start = first as usize;
                leaf(&idx.text()[start..start + depth], iv.count());
            }
        }
        retained
    }

    pub fn leaf_count(&self) -> u64 {
        let mut n = 0;
        self.walk(|_, _| n += 1);
        n
    }

    /// Number of retained contexts (leaves and internal nodes).
    pub fn retained_count(&self) -> u64 {
        self.walk(|_, _| {})
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        self.walk(|w, count| out.push(Leaf { context: w.to_vec(), count }));
        out
    }

    /// Materialises the tree independently of the index.
    pub fn to_standalone(&self) -> StandaloneTree {
        StandaloneTree::from_leaves(
            self.index.alphabet().clone(),
            self.index.n_prime(),
            self.index.l_max(),
            self.params,
            self.leaves(),
        )
        .expect("leaves of a compaction are valid")
    }
}

impl MatchBase for CompactedTree<'_> {
    fn l_max(&self) -> usize {
        self.index.l_max()
    }

    fn match_len(&self, seq: &[Code], i: usize, cap: usize) -> usize {
        self.index.match_len_with(seq, i, cap.min(self.index.l_max()), self.min_count)
    }

    fn prefix_closed(&self) -> bool {
        true
    }

    fn origin(&self) -> Option<BaseOrigin> {
        Some(BaseOrigin { n_prime: self.index.n_prime(), l_max: self.index.l_max() })
    }
}

/// Mean number of positions per `N`-window whose full-index match exists but
/// whose compacted match differs; compared against `ε`.
pub fn pruned_mass_bound(index: &SuffixIndex, params: CompactionParams) -> Result<Rational> {
    let y = index.training_sequence();
    let n = usize::try_from(params.n()).map_err(|_| Error::InvalidParams("N too large"))?;
    evaluation::pruned_mass(index, &compact(index, params), &y, n)
}

/// The compacted tree as a self-contained trie of its leaves, with no
/// reference to `Y`. Answers retained/longest-match queries exactly like the
/// [`CompactedTree`] it came from.
#[derive(Clone, Debug)]
pub struct StandaloneTree {
    alphabet: Alphabet,
    n_prime: u64,
    l_max: usize,
    params: CompactionParams,
    min_count: u64,
    leaves: Vec<Leaf>,
    children: Vec<Vec<(Code, u32)>>,
}

impl StandaloneTree {
    /// Leaves must be nonempty, sorted, prefix-free, at most `l_max` long,
    /// and carry counts of at least the threshold count whose sum is at most `N'`.
    pub fn from_leaves(
        alphabet: Alphabet,
        n_prime: u64,
        l_max: usize,
        params: CompactionParams,
        leaves: Vec<Leaf>,
    ) -> Result<Self> {
        let min_count = params.min_count(n_prime);
        let a = alphabet.len();
        let mut mass = 0u64;
        for leaf in &leaves {
            if leaf.context.is_empty() || leaf.context.len() > l_max {
                return Err(Error::InvalidTree("leaf length outside [1, L_max]"));
            }
            if leaf.context.iter().any(|&c| usize::from(c) >= a) {
                return Err(Error::InvalidTree("leaf symbol outside the alphabet"));
            }
            if leaf.count < min_count {
                return Err(Error::InvalidTree("leaf count below the threshold count"));
            }
            mass = mass.saturating_add(leaf.count);
        }
        if mass > n_prime {
            return Err(Error::InvalidTree("leaf counts exceed N'"));
        }
        for pair in leaves.windows(2) {
            if pair[0].context >= pair[1].context {
                return Err(Error::InvalidTree("leaves not strictly sorted"));
            }
            if pair[1].context.starts_with(&pair[0].context) {
                return Err(Error::InvalidTree("leaves are not prefix-free"));
            }
        }
        let mut children: Vec<Vec<(Code, u32)>> = alloc::vec![Vec::new()];
        for leaf in &leaves {
            let mut at = 0usize;
            for &c in &leaf.context {
                at = match children[at].binary_search_by_key(&c, |&(k, _)| k) {
                    Ok(k) => children[at][k].1 as usize,
                    Err(k) => {
                        let id = children.len();
                        children[at].insert(k, (c, id as u32));
                        children.push(Vec::new());
                        id
                    }
                };
            }
        }
        Ok(StandaloneTree { alphabet, n_prime, l_max, params, min_count, leaves, children })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_prime(&self) -> u64 {
        self.n_prime
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn params(&self) -> CompactionParams {
        self.params
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaves.len() as u64
    }

    /// Trie nodes below the root, i.e. retained contexts.
    pub fn retained_count(&self) -> u64 {
        self.children.len() as u64 - 1
    }

    fn walk_len(&self, symbols: impl Iterator<Item = Code>, cap: usize) -> usize {
        let mut at = 0usize;
        let mut depth = 0;
        for c in symbols.take(cap) {
            match self.children[at].binary_search_by_key(&c, |&(k, _)| k) {
                Ok(k) => {
                    at = self.children[at][k].1 as usize;
                    depth += 1;
                }
                Err(_) => break,
            }
        }
        depth
    }

    pub fn contains(&self, w: &[Code]) -> bool {
        !w.is_empty() && self.walk_len(w.iter().copied(), w.len()) == w.len()
    }
}

impl MatchBase for StandaloneTree {
    fn l_max(&self) -> usize {
        self.l_max
    }

    fn match_len(&self, seq: &[Code], i: usize, cap: usize) -> usize {
        self.walk_len(seq[..i].iter().rev().copied(), cap.min(i))
    }

    fn prefix_closed(&self) -> bool {
        true
    }

    fn origin(&self) -> Option<BaseOrigin> {
        Some(BaseOrigin { n_prime: self.n_prime, l_max: self.l_max })
    }
}
