//! Suffix array construction by induced sorting (SA-IS), `u32` indices.
//!
//! Layout follows the AtCoder Library formulation: `sa` holds `pos + 1` while
//! inducing so that `0` can mark empty slots.

use alloc::vec;
use alloc::vec::Vec;

const NAIVE_THRESHOLD: usize = 16;

/// Suffix array of `text` over symbols `< upper`. Panics if `text.len()`
/// does not fit in `u32` (minus one), or a symbol is `>= upper`.
pub fn suffix_array(text: &[u8], upper: usize) -> Vec<u32> {
    assert!(text.len() < u32::MAX as usize, "text too long for u32 suffix array");
    sa_is(text, upper)
}

fn sa_naive<T: Copy + Ord>(s: &[T]) -> Vec<u32> {
    let mut sa: Vec<u32> = (0..s.len() as u32).collect();
    sa.sort_by(|&a, &b| s[a as usize..].cmp(&s[b as usize..]));
    sa
}

fn sa_is<T: Copy + Ord + Into<u32>>(s: &[T], upper: usize) -> Vec<u32> {
    let n = s.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        2 => return if s[0] < s[1] { vec![0, 1] } else { vec![1, 0] },
        _ if n < NAIVE_THRESHOLD => return sa_naive(s),
        _ => {}
    }
    let sym = |i: usize| s[i].into() as usize;

    // ls[i]: suffix i is S-type.
    let mut ls = vec![false; n];
    for i in (0..n - 1).rev() {
        ls[i] = if s[i] == s[i + 1] { ls[i + 1] } else { s[i] < s[i + 1] };
    }
    let mut sum_l = vec![0u32; upper + 1];
    let mut sum_s = vec![0u32; upper + 1];
    for i in 0..n {
        if ls[i] {
            sum_l[sym(i) + 1] += 1;
        } else {
            sum_s[sym(i)] += 1;
        }
    }
    for i in 0..=upper {
        sum_s[i] += sum_l[i];
        if i < upper {
            sum_l[i + 1] += sum_s[i];
        }
    }

    let induce = |sa: &mut [u32], lms: &[u32]| {
        sa.iter_mut().for_each(|e| *e = 0);
        let mut buf = sum_s.clone();
        for &d in lms {
            let d = d as usize;
            if d == n {
                continue;
            }
            let c = sym(d);
            sa[buf[c] as usize] = d as u32 + 1;
            buf[c] += 1;
        }
        buf.copy_from_slice(&sum_l);
        let c = sym(n - 1);
        sa[buf[c] as usize] = n as u32;
        buf[c] += 1;
        for i in 0..n {
            let v = sa[i] as usize;
            if v >= 2 && !ls[v - 2] {
                let c = sym(v - 2);
                sa[buf[c] as usize] = v as u32 - 1;
                buf[c] += 1;
            }
        }
        buf.copy_from_slice(&sum_l);
        for i in (0..n).rev() {
            let v = sa[i] as usize;
            if v >= 2 && ls[v - 2] {
                let c = sym(v - 2) + 1;
                buf[c] -= 1;
                sa[buf[c] as usize] = v as u32 - 1;
            }
        }
    };

    // lms_map[i] = rank (1-based) of LMS position i among LMS positions, else 0.
    let mut lms_map = vec![0u32; n + 1];
    let mut lms: Vec<u32> = Vec::new();
    for i in 1..n {
        if !ls[i - 1] && ls[i] {
            lms.push(i as u32);
            lms_map[i] = lms.len() as u32;
        }
    }
    let m = lms.len();
    let mut sa = vec![0u32; n];
    induce(&mut sa, &lms);

    if m != 0 {
        let mut sorted_lms: Vec<u32> = Vec::with_capacity(m);
        for &v in &sa {
            let p = v as usize - 1;
            if lms_map[p] != 0 {
                sorted_lms.push(p as u32);
            }
        }
        let lms_end = |p: usize| {
            let rank = lms_map[p] as usize;
            if rank < m {
                lms[rank] as usize
            } else {
                n
            }
        };
        let mut rec_s = vec![0u32; m];
        let mut rec_upper = 0u32;
        rec_s[lms_map[sorted_lms[0] as usize] as usize - 1] = 0;
        for i in 1..m {
            let mut l = sorted_lms[i - 1] as usize;
            let mut r = sorted_lms[i] as usize;
            let end_l = lms_end(l);
            let end_r = lms_end(r);
            let same = if end_l - l != end_r - r {
                false
            } else {
                while l < end_l && s[l] == s[r] {
                    l += 1;
                    r += 1;
                }
                l != n && r != n && s[l] == s[r]
            };
            if !same {
                rec_upper += 1;
            }
            rec_s[lms_map[sorted_lms[i] as usize] as usize - 1] = rec_upper;
        }
        drop(lms_map);
        let rec_sa = sa_is(&rec_s, rec_upper as usize);
        drop(rec_s);
        for (slot, &r) in sorted_lms.iter_mut().zip(rec_sa.iter()) {
            *slot = lms[r as usize];
        }
        drop(rec_sa);
        induce(&mut sa, &sorted_lms);
    }
    sa.iter_mut().for_each(|e| *e -= 1);
    sa
}
