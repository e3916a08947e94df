//! Sliding-window evaluation: every length-`N` window of `Y` is scored as a
//! standalone test sequence by a reference and a candidate classifier. `q` is
//! the fraction the reference accepts; `p_delta` the fraction of those the
//! candidate rejects. Compaction is expected to keep `p_delta <= ε/q`.
//!
//! Windows are scored from one per-position profile of `Y` plus a short
//! head correction: a window starting at `s` sees position `s+k-1` with a
//! context cap of `min(k, L_max)`, which equals the global cap once
//! `k >= L_max`.

use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{AvgMode, FeatureSet, MatchBase, TrainingStats};
use crate::compaction::{compact, CompactionParams};
use crate::error::{Error, Result};
use crate::index::SuffixIndex;
use crate::rational::Rational;
use crate::sequence::{Alphabet, Code, Sequence};

#[cfg(feature = "rayon")]
fn map_range<T: Send>(range: Range<usize>, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "rayon"))]
fn map_range<T>(range: Range<usize>, f: impl Fn(usize) -> T) -> Vec<T> {
    range.map(f).collect()
}

/// Global per-position match lengths of `Y` against one base, with prefix
/// sums for O(1) window tails.
pub struct Profiler<'a, B: ?Sized> {
    base: &'a B,
    y: &'a [Code],
    l_max: usize,
    global: Vec<u32>,
    prefix_sum: Vec<u64>,
    prefix_matched: Vec<u64>,
}

impl<'a, B: MatchBase + ?Sized> Profiler<'a, B> {
    pub fn new(base: &'a B, y: &'a [Code]) -> Self {
        let l_max = base.l_max();
        let global = map_range(0..y.len(), |p| base.match_len(y, p + 1, l_max) as u32);
        let mut prefix_sum = Vec::with_capacity(y.len() + 1);
        let mut prefix_matched = Vec::with_capacity(y.len() + 1);
        let (mut s, mut m) = (0u64, 0u64);
        prefix_sum.push(0);
        prefix_matched.push(0);
        for &l in &global {
            s += u64::from(l);
            m += u64::from(l > 0);
            prefix_sum.push(s);
            prefix_matched.push(m);
        }
        Profiler { base, y, l_max, global, prefix_sum, prefix_matched }
    }

    pub fn global(&self) -> &[u32] {
        &self.global
    }

    pub fn training_stats(&self, mode: AvgMode) -> Result<TrainingStats> {
        let n = self.y.len();
        TrainingStats::from_counts(self.prefix_sum[n], self.prefix_matched[n], n as u64, self.l_max, mode)
    }

    /// Match length at local position `k` (1-based) of the window starting at `s`.
    pub fn local(&self, s: usize, k: usize) -> u32 {
        let i = s + k - 1;
        if k >= self.l_max {
            self.global[i - 1]
        } else if self.base.prefix_closed() {
            self.global[i - 1].min(k as u32)
        } else {
            // cap k keeps the context inside the window
            self.base.match_len(self.y, i, k) as u32
        }
    }

    /// `(Σ ℓ, #matched)` over the window of length `n` starting at `s`.
    pub fn window(&self, s: usize, n: usize) -> (u64, u64) {
        let head = n.min(self.l_max.saturating_sub(1));
        let (mut sum, mut matched) = (0u64, 0u64);
        for k in 1..=head {
            let l = self.local(s, k);
            sum += u64::from(l);
            matched += u64::from(l > 0);
        }
        // tail covers 1-based positions s+head ..= s+n-1
        let (from, to) = (s + head - 1, s + n - 1);
        sum += self.prefix_sum[to] - self.prefix_sum[from];
        matched += self.prefix_matched[to] - self.prefix_matched[from];
        (sum, matched)
    }

    pub fn window_sums(&self, n: usize) -> Vec<(u64, u64)> {
        map_range(0..self.y.len() - n, |s| self.window(s + 1, n))
    }
}

/// `D > T` decided by cross-multiplication.
#[derive(Clone, Copy, Debug)]
struct Decider {
    stats: Option<TrainingStats>,
    t: Rational,
}

impl Decider {
    fn den(&self, matched: u64, n: usize) -> u64 {
        match self.stats.map_or(AvgMode::Matched, |s| s.mode) {
            AvgMode::Matched => matched,
            AvgMode::All => n as u64,
        }
    }

    fn accepts(&self, (sum, matched): (u64, u64), n: usize) -> bool {
        let Some(stats) = self.stats else { return false };
        if matched == 0 {
            return false;
        }
        let den = i128::from(self.den(matched, n));
        let (a, b) = (*stats.l_y.numer(), *stats.l_y.denom());
        let (tn, td) = (*self.t.numer(), *self.t.denom());
        // (sum/den - a/b) / L > tn/td
        (i128::from(sum) * b - a * den) * td > tn * stats.l_max as i128 * den * b
    }

    fn d(&self, (sum, matched): (u64, u64), n: usize) -> Option<Rational> {
        let stats = self.stats?;
        if matched == 0 {
            return None;
        }
        let l_x = Rational::new(i128::from(sum), i128::from(self.den(matched, n)));
        Some((l_x - stats.l_y) / Rational::from_integer(stats.l_max as i128))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalParams {
    pub compaction: CompactionParams,
    pub threshold: Rational,
    pub avg_mode: AvgMode,
}

impl EvalParams {
    pub fn window(&self) -> usize {
        usize::try_from(self.compaction.n()).unwrap_or(usize::MAX)
    }
}

/// A window accepted by the reference and rejected by the candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flip {
    pub start: usize,
    pub d_ref: Rational,
    pub d_cand: Option<Rational>,
    /// Window positions whose candidate match length differs from the reference.
    pub differing_positions: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub windows: u64,
    pub accepted_ref: u64,
    pub q: Rational,
    pub rejected_by_cand: u64,
    pub p_delta: Rational,
    /// `ε / q`; `None` when `q = 0`.
    pub bound: Option<Rational>,
    pub pass: bool,
    /// `q = 0`: the bound is vacuous and `pass` holds trivially.
    pub vacuous: bool,
    /// The candidate matches nothing in `Y`, so it rejects every window.
    pub cand_undefined: bool,
    pub epsilon: Rational,
    pub flips: Vec<Flip>,
}

fn check_window(n: usize, len: usize) -> Result<()> {
    if n == 0 || n >= len {
        return Err(Error::WindowOutOfRange { window: n, len });
    }
    Ok(())
}

fn check_bases<R: MatchBase + ?Sized, C: MatchBase + ?Sized>(reference: &R, cand: &C) -> Result<()> {
    if reference.l_max() != cand.l_max() {
        return Err(Error::MismatchedBases);
    }
    match (reference.origin(), cand.origin()) {
        (Some(a), Some(b)) if a != b => Err(Error::MismatchedBases),
        _ => Ok(()),
    }
}

/// Slides all `N' - N` windows and compares reference and candidate decisions.
/// Each base uses its own `L(Y)`.
pub fn window_eval<R, C>(reference: &R, cand: &C, y: &[Code], params: &EvalParams) -> Result<EvalReport>
where
    R: MatchBase + ?Sized,
    C: MatchBase + ?Sized,
{
    check_bases(reference, cand)?;
    check_window(params.window(), y.len())?;
    let rp = Profiler::new(reference, y);
    let cp = Profiler::new(cand, y);
    Ok(eval_profiles(&rp, &cp, params))
}

pub(crate) fn eval_profiles<R, C>(rp: &Profiler<'_, R>, cp: &Profiler<'_, C>, params: &EvalParams) -> EvalReport
where
    R: MatchBase + ?Sized,
    C: MatchBase + ?Sized,
{
    let n = params.window();
    let rdec = Decider { stats: rp.training_stats(params.avg_mode).ok(), t: params.threshold };
    let cdec = Decider { stats: cp.training_stats(params.avg_mode).ok(), t: params.threshold };
    let rsums = rp.window_sums(n);
    let csums = cp.window_sums(n);
    let windows = rsums.len() as u64;
    let mut accepted = 0u64;
    let mut flips = Vec::new();
    for (s0, (&r, &c)) in rsums.iter().zip(&csums).enumerate() {
        if !rdec.accepts(r, n) {
            continue;
        }
        accepted += 1;
        if !cdec.accepts(c, n) {
            let start = s0 + 1;
            let differing = (1..=n).filter(|&k| rp.local(start, k) != cp.local(start, k)).count();
            flips.push(Flip {
                start,
                d_ref: rdec.d(r, n).expect("accepted window has a score"),
                d_cand: cdec.d(c, n),
                differing_positions: differing as u32,
            });
        }
    }
    let epsilon = params.compaction.epsilon();
    let q = Rational::new(i128::from(accepted), i128::from(windows));
    let rejected = flips.len() as u64;
    let (p_delta, bound, pass, vacuous) = if accepted == 0 {
        (Rational::from_integer(0), None, true, true)
    } else {
        let p = Rational::new(i128::from(rejected), i128::from(accepted));
        let b = epsilon / q;
        (p, Some(b), p <= b, false)
    };
    EvalReport {
        windows,
        accepted_ref: accepted,
        q,
        rejected_by_cand: rejected,
        p_delta,
        bound,
        pass,
        vacuous,
        cand_undefined: cdec.stats.is_none(),
        epsilon,
        flips,
    }
}

/// Fraction of the windows in `accept_set` (1-based starts) that `base` rejects.
pub fn error_rate<B: MatchBase + ?Sized>(
    base: &B,
    stats: &TrainingStats,
    y: &[Code],
    params: &EvalParams,
    accept_set: &[usize],
) -> Result<Rational> {
    let n = params.window();
    check_window(n, y.len())?;
    if accept_set.is_empty() {
        return Err(Error::EmptyAcceptSet);
    }
    if let Some(&bad) = accept_set.iter().find(|&&s| s == 0 || s > y.len() - n) {
        return Err(Error::BadWindowStart(bad));
    }
    let p = Profiler::new(base, y);
    let dec = Decider { stats: Some(*stats), t: params.threshold };
    let rejected = accept_set.iter().filter(|&&s| !dec.accepts(p.window(s, n), n)).count();
    Ok(Rational::new(rejected as i128, accept_set.len() as i128))
}

/// Mean, over all `N`-windows, of the window positions whose reference match
/// exists and whose candidate match differs from it.
pub fn pruned_mass<R, C>(reference: &R, cand: &C, y: &[Code], n: usize) -> Result<Rational>
where
    R: MatchBase + ?Sized,
    C: MatchBase + ?Sized,
{
    check_bases(reference, cand)?;
    check_window(n, y.len())?;
    let rp = Profiler::new(reference, y);
    let cp = Profiler::new(cand, y);
    Ok(pruned_mass_profiles(&rp, &cp, n))
}

pub(crate) fn pruned_mass_profiles<R, C>(rp: &Profiler<'_, R>, cp: &Profiler<'_, C>, n: usize) -> Rational
where
    R: MatchBase + ?Sized,
    C: MatchBase + ?Sized,
{
    let differs = |r: u32, c: u32| r > 0 && r != c;
    let mut prefix = Vec::with_capacity(rp.global.len() + 1);
    prefix.push(0u64);
    let mut acc = 0u64;
    for (&r, &c) in rp.global.iter().zip(&cp.global) {
        acc += u64::from(differs(r, c));
        prefix.push(acc);
    }
    let head = n.min(rp.l_max.saturating_sub(1));
    let windows = rp.y.len() - n;
    let per_window = map_range(0..windows, |s0| {
        let s = s0 + 1;
        let h = (1..=head).filter(|&k| differs(rp.local(s, k), cp.local(s, k))).count() as u64;
        h + prefix[s + n - 1] - prefix[s + head - 1]
    });
    let total: u64 = per_window.iter().sum();
    Rational::new(i128::from(total), windows as i128)
}

/// Where planted features come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureSource {
    /// Features in context order.
    Explicit(Vec<Vec<Code>>),
    /// Distinct, prefix-free random features with uniform lengths.
    Random { count: usize, min_len: usize, max_len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Background {
    /// I.i.d. uniform symbols.
    Uniform,
    /// Uniform symbols, but at each step with probability `copy_num/copy_den`
    /// a block of `block_len` symbols is copied from a random earlier offset.
    Mixing { block_len: usize, copy_num: u32, copy_den: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthSpec {
    pub alphabet_size: usize,
    pub length: usize,
    pub features: FeatureSource,
    /// Relative planting weights per feature; uniform when `None`.
    pub weights: Option<Vec<u32>>,
    /// Fraction of `Y` covered by planted copies, in `[0, 1]`.
    pub density: Rational,
    pub background: Background,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Synthetic {
    pub alphabet: Alphabet,
    pub sequence: Sequence,
    pub features: FeatureSet,
    /// Planted copies per feature, in spec order.
    pub planted: Vec<(Vec<Code>, u64)>,
}

fn random_features(rng: &mut ChaCha8Rng, a: usize, count: usize, min_len: usize, max_len: usize) -> Result<Vec<Vec<Code>>> {
    if count == 0 || min_len == 0 || max_len < min_len {
        return Err(Error::InvalidSynthSpec("random features need count >= 1 and 1 <= min_len <= max_len"));
    }
    let mut out: Vec<Vec<Code>> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * count {
            return Err(Error::InvalidSynthSpec("cannot draw enough distinct prefix-free features"));
        }
        let len = rng.random_range(min_len..=max_len);
        let f: Vec<Code> = (0..len).map(|_| rng.random_range(0..a) as Code).collect();
        if out.iter().all(|g| !g.starts_with(&f) && !f.starts_with(g)) {
            out.push(f);
        }
    }
    Ok(out)
}

fn fill_background(rng: &mut ChaCha8Rng, out: &mut Vec<Code>, mut len: usize, a: usize, bg: Background) {
    while len > 0 {
        if let Background::Mixing { block_len, copy_num, copy_den } = bg {
            if block_len > 0 && out.len() >= block_len && rng.random_ratio(copy_num, copy_den) {
                let src = rng.random_range(0..=out.len() - block_len);
                let take = block_len.min(len);
                for k in 0..take {
                    out.push(out[src + k]);
                }
                len -= take;
                continue;
            }
        }
        out.push(rng.random_range(0..a) as Code);
        len -= 1;
    }
}

/// Deterministic synthetic training sequence with planted features.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<Synthetic> {
    let a = spec.alphabet_size;
    let alphabet = Alphabet::synthetic(a)?;
    if spec.length == 0 {
        return Err(Error::InvalidSynthSpec("length must be positive"));
    }
    if spec.density < Rational::from_integer(0) || spec.density > Rational::from_integer(1) {
        return Err(Error::InvalidSynthSpec("density must be in [0, 1]"));
    }
    if let Background::Mixing { copy_num, copy_den, .. } = spec.background {
        if copy_den == 0 || copy_num > copy_den {
            return Err(Error::InvalidSynthSpec("copy probability must be in [0, 1]"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let features = match &spec.features {
        FeatureSource::Explicit(f) => f.clone(),
        FeatureSource::Random { count, min_len, max_len } => {
            random_features(&mut rng, a, *count, *min_len, *max_len)?
        }
    };
    if features.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    if features.iter().any(|f| f.is_empty() || f.iter().any(|&c| usize::from(c) >= a)) {
        return Err(Error::InvalidFeature);
    }
    if features.iter().any(|f| f.len() > spec.length) {
        return Err(Error::InvalidSynthSpec("feature longer than the sequence"));
    }
    let weights = match &spec.weights {
        Some(w) if w.len() != features.len() => {
            return Err(Error::InvalidSynthSpec("one weight per feature required"))
        }
        Some(w) => w.clone(),
        None => alloc::vec![1; features.len()],
    };
    let total_w: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    if total_w == 0 {
        return Err(Error::InvalidSynthSpec("weights sum to zero"));
    }
    let weighted_len: u128 = weights.iter().zip(&features).map(|(&w, f)| u128::from(w) * f.len() as u128).sum();

    // copies = floor(density · N' / mean planted length)
    let (dn, dd) = (*spec.density.numer() as u128, *spec.density.denom() as u128);
    let copies = (dn * spec.length as u128 * total_w / (dd * weighted_len)) as u64;
    let mut per: Vec<u64> = weights.iter().map(|&w| (u128::from(copies) * u128::from(w) / total_w) as u64).collect();
    let mut rest = copies - per.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by_key(|&k| core::cmp::Reverse((u128::from(copies) * u128::from(weights[k])) % total_w));
    for &k in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        per[k] += 1;
        rest -= 1;
    }
    let planted_len = |per: &[u64]| -> u64 { per.iter().zip(&features).map(|(&c, f)| c * f.len() as u64).sum() };
    while planted_len(&per) > spec.length as u64 {
        let k = (0..per.len()).max_by_key(|&k| per[k]).expect("nonempty");
        per[k] -= 1;
    }

    let mut items: Vec<usize> = per.iter().enumerate().flat_map(|(k, &c)| core::iter::repeat_n(k, c as usize)).collect();
    items.shuffle(&mut rng);
    let background = spec.length - planted_len(&per) as usize;
    let mut cuts: Vec<usize> = (0..items.len()).map(|_| rng.random_range(0..=background)).collect();
    cuts.sort_unstable();

    let mut out: Vec<Code> = Vec::with_capacity(spec.length);
    let mut prev = 0;
    for (&k, &cut) in items.iter().zip(&cuts) {
        fill_background(&mut rng, &mut out, cut - prev, a, spec.background);
        prev = cut;
        // written reversed so the backward context at its last symbol reads the feature
        out.extend(features[k].iter().rev());
    }
    fill_background(&mut rng, &mut out, background - prev, a, spec.background);
    debug_assert_eq!(out.len(), spec.length);

    let planted = features.iter().cloned().zip(per.iter().copied()).collect();
    Ok(Synthetic {
        alphabet,
        sequence: Sequence::new(out, None)?,
        features: FeatureSet::new(features)?,
        planted,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepGrid {
    pub epsilons: Vec<Rational>,
    pub fs: Vec<u64>,
    pub ns: Vec<u64>,
    pub thresholds: Vec<Rational>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.epsilons.len() * self.fs.len() * self.ns.len() * self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub epsilon: Rational,
    pub f: u64,
    pub n: u64,
    pub t: Rational,
    pub leaf_count: u64,
    pub leaf_bound: u64,
    pub min_count: u64,
    pub pruned_mass: Option<Rational>,
    pub result: Result<EvalReport>,
}

/// One evaluation per grid point. In index mode the reference is the full
/// index and the candidate its compaction; with `features`, the reference is
/// the feature classifier and the candidate keeps only the features that
/// survive compaction. Cell failures are recorded, never fatal.
pub fn sweep(
    index: &SuffixIndex,
    features: Option<&FeatureSet>,
    grid: &SweepGrid,
    avg_mode: AvgMode,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("sweep grid is empty"));
    }
    let y = index.training_sequence();
    let reference: &dyn MatchBase = match features {
        Some(f) => f,
        None => index,
    };
    let rp = Profiler::new(reference, &y);
    let mut rows = Vec::with_capacity(grid.len());
    for &epsilon in &grid.epsilons {
        for &f in &grid.fs {
            for &n in &grid.ns {
                let cell = CompactionParams::new(epsilon, n, f);
                let window = usize::try_from(n).unwrap_or(usize::MAX);
                let (leaf_count, leaf_bound, min_count, cand_rows) = match cell {
                    Err(e) => (0, 0, 0, Err(e)),
                    Ok(params) => {
                        let tree = compact(index, params);
                        let restricted = features.map(|fs| fs.restricted(|w| tree.contains(w)));
                        let cand: &dyn MatchBase = match &restricted {
                            Some(r) => r,
                            None => &tree,
                        };
                        let evals = check_bases(reference, cand).and_then(|_| check_window(window, y.len())).map(|_| {
                            let cp = Profiler::new(cand, &y);
                            let mass = pruned_mass_profiles(&rp, &cp, window);
                            let reports: Vec<_> = grid
                                .thresholds
                                .iter()
                                .map(|&t| eval_profiles(&rp, &cp, &EvalParams { compaction: params, threshold: t, avg_mode }))
                                .collect();
                            (mass, reports)
                        });
                        (tree.leaf_count(), params.leaf_bound(), tree.min_count(), evals)
                    }
                };
                for (k, &t) in grid.thresholds.iter().enumerate() {
                    let (pruned_mass, result) = match &cand_rows {
                        Ok((mass, reports)) => (Some(*mass), Ok(reports[k].clone())),
                        Err(e) => (None, Err(e.clone())),
                    };
                    rows.push(SweepRow { epsilon, f, n, t, leaf_count, leaf_bound, min_count, pruned_mass, result });
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::similarity;
    use crate::sequence::windows;

    fn toy() -> (Alphabet, FeatureSet, Sequence) {
        let a = Alphabet::new(b"ABCDE").unwrap();
        let f = FeatureSet::from_strs(&a, &["A", "BA", "C", "CD"]).unwrap();
        let y = Sequence::from_symbols(&a, b"ABACDCBEDEDE").unwrap();
        (a, f, y)
    }

    fn params(n: u64, t: Rational) -> EvalParams {
        EvalParams {
            compaction: CompactionParams::new(Rational::new(1, 20), n, 4).unwrap(),
            threshold: t,
            avg_mode: AvgMode::Matched,
        }
    }

    // Exhaustive oracle: score each window as its own sequence.
    fn naive_accepts<B: MatchBase>(base: &B, stats: &TrainingStats, y: &[Code], n: usize, t: Rational) -> Vec<bool> {
        windows(y, n).unwrap().map(|(_, w)| similarity(base, stats, w, t).acceptable()).collect()
    }

    #[test]
    fn window_sums_match_standalone_scoring() {
        let (_, f, y) = toy();
        let p = Profiler::new(&f, &y);
        for n in 1..12 {
            for (s, w) in windows(&y, n).unwrap() {
                let prof = crate::classifier::match_profile(&f, w);
                assert_eq!(p.window(s, n), (prof.sum, prof.matched as u64), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn toy_error_rate() {
        let (_, f, y) = toy();
        let stats = TrainingStats::compute(&f, &y, AvgMode::Matched).unwrap();
        let t = Rational::from_integer(-1);
        let accepts = naive_accepts(&f, &stats, &y, 4, t);
        // windows: ABAC BACD ACDC CDCB DCBE CBED BEDE EDED
        assert_eq!(accepts, [true, true, true, true, true, true, false, false]);
        let all: Vec<usize> = (1..=8).collect();
        let rate = error_rate(&f, &stats, &y, &params(4, t), &all).unwrap();
        assert_eq!(rate, Rational::new(2, 8));
        let own: Vec<usize> = (1..=8).filter(|&s| accepts[s - 1]).collect();
        assert_eq!(error_rate(&f, &stats, &y, &params(4, t), &own).unwrap(), Rational::from_integer(0));
        assert_eq!(error_rate(&f, &stats, &y, &params(4, t), &[]), Err(Error::EmptyAcceptSet));
        assert_eq!(error_rate(&f, &stats, &y, &params(4, t), &[9]), Err(Error::BadWindowStart(9)));
    }

    #[test]
    fn self_comparison_never_flips() {
        let (_, f, y) = toy();
        for t in [-1i128, 0] {
            let r = window_eval(&f, &f, &y, &params(4, Rational::from_integer(t))).unwrap();
            assert_eq!(r.windows, 8);
            assert_eq!(r.rejected_by_cand, 0);
            assert!(r.pass);
        }
        let r = window_eval(&f, &f, &y, &params(4, Rational::from_integer(5))).unwrap();
        assert!(r.vacuous && r.pass && r.bound.is_none());
    }

    #[test]
    fn dropped_feature_flips_windows() {
        let (_, f, y) = toy();
        let without_ba = f.restricted(|w| w.len() != 2 || w[0] != 1);
        let r = window_eval(&f, &without_ba, &y, &params(4, Rational::from_integer(-1))).unwrap();
        assert_eq!(r.accepted_ref, 6);
        let stats_ref = TrainingStats::compute(&f, &y, AvgMode::Matched).unwrap();
        let stats_c = TrainingStats::compute(&without_ba, &y, AvgMode::Matched).unwrap();
        let ra = naive_accepts(&f, &stats_ref, &y, 4, Rational::from_integer(-1));
        let ca = naive_accepts(&without_ba, &stats_c, &y, 4, Rational::from_integer(-1));
        let expect = ra.iter().zip(&ca).filter(|(r, c)| **r && !**c).count() as u64;
        assert_eq!(r.rejected_by_cand, expect);
        for flip in &r.flips {
            assert!(flip.differing_positions > 0);
        }
    }

    #[test]
    fn window_errors() {
        let (_, f, y) = toy();
        assert!(matches!(
            window_eval(&f, &f, &y, &params(12, Rational::from_integer(0))),
            Err(Error::WindowOutOfRange { .. })
        ));
        let a = Alphabet::new(b"ABCDE").unwrap();
        let longer = FeatureSet::from_strs(&a, &["ABC"]).unwrap();
        assert_eq!(
            window_eval(&f, &longer, &y, &params(4, Rational::from_integer(0))).unwrap_err(),
            Error::MismatchedBases
        );
    }

    #[test]
    fn planted_copies() {
        let spec = SynthSpec {
            alphabet_size: 4,
            length: 30,
            features: FeatureSource::Explicit(alloc::vec![alloc::vec![0, 1, 2]]),
            weights: None,
            density: Rational::new(1, 2),
            background: Background::Uniform,
            seed: 7,
        };
        let s = gen_synthetic(&spec).unwrap();
        assert_eq!(s.planted, [(alloc::vec![0, 1, 2], 5)]);
        assert_eq!(s.sequence.len(), 30);
        let idx = SuffixIndex::build(&s.sequence, &s.alphabet, 3).unwrap();
        assert!(idx.count(&[0, 1, 2]).unwrap() >= 5);
        let again = gen_synthetic(&spec).unwrap();
        assert_eq!(again.sequence, s.sequence);
    }

    #[test]
    fn synth_spec_errors() {
        let mut spec = SynthSpec {
            alphabet_size: 4,
            length: 30,
            features: FeatureSource::Explicit(alloc::vec![alloc::vec![0, 1, 2]]),
            weights: None,
            density: Rational::new(3, 2),
            background: Background::Uniform,
            seed: 7,
        };
        assert!(gen_synthetic(&spec).is_err());
        spec.density = Rational::new(1, 2);
        spec.features = FeatureSource::Explicit(alloc::vec![alloc::vec![0; 31]]);
        assert!(gen_synthetic(&spec).is_err());
        spec.features = FeatureSource::Explicit(alloc::vec![alloc::vec![9]]);
        assert!(gen_synthetic(&spec).is_err());
        spec.features = FeatureSource::Random { count: 3, min_len: 2, max_len: 4 };
        spec.weights = Some(alloc::vec![1, 2]);
        assert!(gen_synthetic(&spec).is_err());
    }

    #[test]
    fn zero_density_is_pure_background() {
        let spec = SynthSpec {
            alphabet_size: 2,
            length: 100,
            features: FeatureSource::Random { count: 2, min_len: 3, max_len: 5 },
            weights: None,
            density: Rational::from_integer(0),
            background: Background::Mixing { block_len: 8, copy_num: 1, copy_den: 10 },
            seed: 1,
        };
        let s = gen_synthetic(&spec).unwrap();
        assert!(s.planted.iter().all(|(_, c)| *c == 0));
        assert_eq!(s.sequence.len(), 100);
        assert!(s.features.is_prefix_free());
    }
}
