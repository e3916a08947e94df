//! Occurrence-count index over the backward contexts of a training sequence.
//!
//! A backward context of `Y` ending at position `i` is a forward substring of
//! the reversed sequence, so the index is a suffix array over `reverse(Y)`.
//! The suffixes sharing a context `w` form one contiguous suffix-array
//! interval; its width is `count(w)`. Extending `w` by one symbol narrows the
//! interval with two binary searches.

use alloc::vec::Vec;

use crate::classifier::{BaseOrigin, MatchBase};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sais::suffix_array;
use crate::sequence::{Alphabet, Code, Sequence};

/// Half-open suffix-array range of the suffixes sharing a `depth`-long prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: u32,
    pub hi: u32,
    pub depth: u32,
}

impl Interval {
    pub fn count(&self) -> u64 {
        u64::from(self.hi - self.lo)
    }
}

/// `count / N'` kept as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmpiricalProb {
    pub count: u64,
    pub total: u64,
}

impl EmpiricalProb {
    pub fn value(&self) -> Rational {
        Rational::new(i128::from(self.count), i128::from(self.total))
    }

    /// `count / total >= threshold`, compared without rounding.
    pub fn at_least(&self, threshold: &Rational) -> bool {
        i128::from(self.count) * threshold.denom() >= threshold.numer() * i128::from(self.total)
    }
}

pub struct SuffixIndex {
    alphabet: Alphabet,
    /// Training sequence, reversed.
    text: Vec<Code>,
    sa: Vec<u32>,
    /// `first[c]..first[c + 1]` is the interval of the one-symbol context `c`.
    first: Vec<u32>,
    l_max: usize,
}

impl core::fmt::Debug for SuffixIndex {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SuffixIndex")
            .field("alphabet", &self.alphabet)
            .field("n_prime", &self.text.len())
            .field("l_max", &self.l_max)
            .finish()
    }
}

impl SuffixIndex {
    pub const STRUCTURE_KIND: &'static str = "reversed-suffix-array";

    /// Indexes every backward context of `y` of length up to `l_max`.
    /// `y` must be strictly encoded over `alphabet`.
    pub fn build(y: &Sequence, alphabet: &Alphabet, l_max: usize) -> Result<Self> {
        let n = y.len();
        if l_max == 0 || l_max >= n {
            return Err(Error::LmaxOutOfRange { l_max, len: n });
        }
        if n >= u32::MAX as usize {
            return Err(Error::SequenceTooLong(n));
        }
        let a = alphabet.len();
        if let Some(offset) = y.iter().position(|&c| usize::from(c) >= a) {
            return Err(Error::UnknownSymbol { symbol: '?', offset });
        }
        let text: Vec<Code> = y.iter().rev().copied().collect();
        let sa = suffix_array(&text, a);
        Ok(Self::assemble(alphabet.clone(), text, sa, l_max))
    }

    /// Reassembles an index from persisted parts, checking the cheap invariants.
    pub fn from_parts(alphabet: Alphabet, text: Vec<Code>, sa: Vec<u32>, l_max: usize) -> Result<Self> {
        let n = text.len();
        if n < 2 || sa.len() != n {
            return Err(Error::CorruptIndex("text and suffix array lengths disagree"));
        }
        if l_max == 0 || l_max >= n {
            return Err(Error::LmaxOutOfRange { l_max, len: n });
        }
        if text.iter().any(|&c| usize::from(c) >= alphabet.len()) {
            return Err(Error::CorruptIndex("text code outside the alphabet"));
        }
        let mut seen = alloc::vec![false; n];
        for &p in &sa {
            let p = p as usize;
            if p >= n || core::mem::replace(&mut seen[p], true) {
                return Err(Error::CorruptIndex("suffix array is not a permutation"));
            }
        }
        let ordered = sa.windows(2).all(|w| text[w[0] as usize] <= text[w[1] as usize]);
        if !ordered {
            return Err(Error::CorruptIndex("suffix array is not sorted by first symbol"));
        }
        Ok(Self::assemble(alphabet, text, sa, l_max))
    }

    fn assemble(alphabet: Alphabet, text: Vec<Code>, sa: Vec<u32>, l_max: usize) -> Self {
        let a = alphabet.len();
        let mut first = alloc::vec![0u32; a + 1];
        for &c in &text {
            first[usize::from(c) + 1] += 1;
        }
        for c in 0..a {
            first[c + 1] += first[c];
        }
        SuffixIndex { alphabet, text, sa, first, l_max }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Length `N'` of the training sequence.
    pub fn n_prime(&self) -> u64 {
        self.text.len() as u64
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// The reversed training sequence and its suffix array, for persistence.
    pub fn parts(&self) -> (&[Code], &[u32]) {
        (&self.text, &self.sa)
    }

    /// Recovers `Y` from the index.
    pub fn training_sequence(&self) -> Sequence {
        Sequence::new(self.text.iter().rev().copied().collect(), None).expect("nonempty")
    }

    pub fn root(&self) -> Interval {
        Interval { lo: 0, hi: self.text.len() as u32, depth: 0 }
    }

    #[inline]
    fn key(&self, sa_pos: u32, depth: u32) -> i16 {
        let p = self.sa[sa_pos as usize] as usize + depth as usize;
        match self.text.get(p) {
            Some(&c) => i16::from(c),
            None => -1,
        }
    }

    /// The interval of `w·c` given the interval of `w`; `None` when empty.
    #[inline]
    pub fn extend(&self, iv: Interval, c: Code) -> Option<Interval> {
        if usize::from(c) >= self.alphabet.len() {
            return None;
        }
        let (lo, hi) = if iv.depth == 0 {
            (self.first[usize::from(c)], self.first[usize::from(c) + 1])
        } else {
            let c = i16::from(c);
            let lo = self.partition(iv.lo, iv.hi, |k| k < c, iv.depth);
            let hi = self.partition(lo, iv.hi, |k| k <= c, iv.depth);
            (lo, hi)
        };
        (lo < hi).then_some(Interval { lo, hi, depth: iv.depth + 1 })
    }

    #[inline]
    fn partition(&self, mut lo: u32, mut hi: u32, below: impl Fn(i16) -> bool, depth: u32) -> u32 {
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if below(self.key(mid, depth)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn interval_of(&self, w: &[Code]) -> Option<Interval> {
        w.iter().try_fold(self.root(), |iv, &c| self.extend(iv, c))
    }

    fn check_query(&self, w: &[Code]) -> Result<()> {
        if w.is_empty() {
            return Err(Error::EmptyPattern);
        }
        if w.len() > self.l_max {
            return Err(Error::DepthExceeded { len: w.len(), l_max: self.l_max });
        }
        Ok(())
    }

    /// Number of positions `i` in `Y` whose backward context of length `|w|` is `w`.
    pub fn count(&self, w: &[Code]) -> Result<u64> {
        self.check_query(w)?;
        Ok(self.count_unchecked(w))
    }

    /// Count without the depth cap (used by compaction and persistence checks).
    pub fn count_unchecked(&self, w: &[Code]) -> u64 {
        self.interval_of(w).map_or(0, |iv| iv.count())
    }

    pub fn empirical_prob(&self, w: &[Code]) -> Result<EmpiricalProb> {
        Ok(EmpiricalProb { count: self.count(w)?, total: self.n_prime() })
    }

    /// Largest `j <= min(i, cap, L_max)` with `count(context_at(x, i, j)) >= min_count`,
    /// or 0. `i` is 1-based.
    pub fn longest_match(&self, x: &[Code], i: usize, cap: usize, min_count: u64) -> Result<usize> {
        if i == 0 || i > x.len() {
            return Err(Error::ContextOutOfRange { position: i, length: 1, len: x.len() });
        }
        if min_count == 0 {
            return Err(Error::InvalidParams("min_count must be at least 1"));
        }
        Ok(self.match_len_with(x, i, cap.min(self.l_max), min_count))
    }

    #[inline]
    pub(crate) fn match_len_with(&self, x: &[Code], i: usize, cap: usize, min_count: u64) -> usize {
        let cap = cap.min(i);
        let mut iv = self.root();
        let mut j = 0;
        while j < cap {
            match self.extend(iv, x[i - 1 - j]) {
                Some(next) if next.count() >= min_count => {
                    iv = next;
                    j += 1;
                }
                _ => break,
            }
        }
        j
    }

    /// Length of the common prefix of two reversed-text suffixes, capped.
    pub(crate) fn lcp(&self, a: u32, b: u32, cap: usize) -> usize {
        let (a, b) = (a as usize, b as usize);
        let (ta, tb) = (&self.text[a..], &self.text[b..]);
        ta.iter().zip(tb).take(cap).take_while(|(x, y)| x == y).count()
    }

    pub(crate) fn suffix_start(&self, sa_pos: u32) -> u32 {
        self.sa[sa_pos as usize]
    }

    pub(crate) fn text(&self) -> &[Code] {
        &self.text
    }
}

impl MatchBase for SuffixIndex {
    fn l_max(&self) -> usize {
        self.l_max
    }

    fn match_len(&self, seq: &[Code], i: usize, cap: usize) -> usize {
        self.match_len_with(seq, i, cap.min(self.l_max), 1)
    }

    fn prefix_closed(&self) -> bool {
        true
    }

    fn origin(&self) -> Option<BaseOrigin> {
        Some(BaseOrigin { n_prime: self.n_prime(), l_max: self.l_max })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{load_sequence, Format};

    fn toy_index(l_max: usize) -> (SuffixIndex, Alphabet) {
        let (y, a) = load_sequence(b"ABACDCBEDEDE", Format::Plain, None).unwrap();
        (SuffixIndex::build(&y, &a, l_max).unwrap(), a)
    }

    fn enc(a: &Alphabet, s: &str) -> Vec<Code> {
        a.encode(s.as_bytes()).unwrap()
    }

    // Naive backward scan, written before the index: positions 1..=N' whose
    // context of length |w| equals w.
    fn naive_count(y: &[Code], w: &[Code]) -> u64 {
        (w.len()..=y.len())
            .filter(|&i| (0..w.len()).all(|k| y[i - 1 - k] == w[k]))
            .count() as u64
    }

    #[test]
    fn toy_counts() {
        let (idx, a) = toy_index(3);
        let y = idx.training_sequence();
        for w in ["A", "BA", "E", "DC", "ED", "DE", "C", "D", "B", "CD", "EDE"] {
            let w = enc(&a, w);
            assert_eq!(idx.count(&w).unwrap(), naive_count(&y, &w));
        }
        // A occurs at positions 1 and 3 only
        assert_eq!(idx.count(&enc(&a, "A")).unwrap(), 2);
        assert_eq!(idx.count(&enc(&a, "BA")).unwrap(), 1);
        assert_eq!(idx.count(&enc(&a, "E")).unwrap(), 3);
        // (y_i, y_{i-1}) = (D, C) at i = 5 only.
        assert_eq!(idx.count(&enc(&a, "DC")).unwrap(), 1);
        assert_eq!(idx.count(&enc(&a, "ED")).unwrap(), 2);
        assert_eq!(idx.count(&enc(&a, "DE")).unwrap(), 2);
    }

    #[test]
    fn empirical_probabilities() {
        let (idx, a) = toy_index(3);
        let p = idx.empirical_prob(&enc(&a, "A")).unwrap();
        assert_eq!(p.value(), Rational::new(2, 12));
        assert_eq!(idx.empirical_prob(&enc(&a, "BA")).unwrap().value(), Rational::new(1, 12));
        let absent = idx.empirical_prob(&enc(&a, "AA")).unwrap();
        assert_eq!((absent.count, absent.total), (0, 12));
        assert!(p.at_least(&Rational::new(1, 6)));
        assert!(!p.at_least(&Rational::new(1, 5)));
    }

    #[test]
    fn query_errors() {
        let (idx, a) = toy_index(3);
        assert_eq!(idx.count(&[]).unwrap_err(), Error::EmptyPattern);
        assert_eq!(
            idx.count(&enc(&a, "ABAC")).unwrap_err(),
            Error::DepthExceeded { len: 4, l_max: 3 }
        );
        assert_eq!(idx.count(&[crate::sequence::UNKNOWN]).unwrap(), 0);
        let y = idx.training_sequence();
        assert!(SuffixIndex::build(&y, &a, 0).is_err());
        assert!(SuffixIndex::build(&y, &a, 12).is_err());
    }

    #[test]
    fn single_symbol_counts_sum_to_length() {
        let (idx, _) = toy_index(3);
        let total: u64 = (0..5).map(|c| idx.count(&[c]).unwrap()).sum();
        assert_eq!(total, 12);
    }

    #[test]
    fn toy_longest_matches() {
        let (idx, a) = toy_index(3);
        let x = enc(&a, "AABDADAD");
        assert_eq!(idx.longest_match(&x, 3, 3, 1).unwrap(), 2);
        assert!(idx.longest_match(&x, 4, 3, 1).unwrap() >= 1);
        let (x2, _) = a.encode_lenient(b"AAXA");
        assert_eq!(idx.longest_match(&x2, 3, 3, 1).unwrap(), 0);
        assert!(idx.longest_match(&x, 0, 3, 1).is_err());
        assert!(idx.longest_match(&x, 9, 3, 1).is_err());
    }

    #[test]
    fn rebuild_from_parts() {
        let (idx, a) = toy_index(3);
        let (text, sa) = idx.parts();
        let back = SuffixIndex::from_parts(a.clone(), text.to_vec(), sa.to_vec(), 3).unwrap();
        assert_eq!(back.count(&enc(&a, "ED")).unwrap(), 2);
        let mut broken = sa.to_vec();
        broken.swap(0, 11);
        assert!(SuffixIndex::from_parts(a.clone(), text.to_vec(), broken, 3).is_err());
        let mut dup = sa.to_vec();
        dup[0] = dup[1];
        assert!(SuffixIndex::from_parts(a, text.to_vec(), dup, 3).is_err());
    }
}
