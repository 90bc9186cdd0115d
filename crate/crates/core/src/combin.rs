//! k-subset enumeration in lexicographic order, with ranking.
//!
//! Every enumeration in this crate (candidate complexes, violated-set
//! search, estimator pairs) walks subsets in the same ascending
//! lexicographic order, so the rank of a subset doubles as its index in any
//! dense table built by that walk.

/// Binomial coefficient, `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Binomial coefficient as `f64`, used where only magnitude matters.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Advances `c` (a strictly increasing k-subset of `0..n`) to its
/// lexicographic successor. Returns `false` when `c` was the last subset.
pub fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for l in i + 1..k {
                c[l] = c[l - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Iterator over all k-subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    cur: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            cur: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.cur.clone());
        }
        if next_combination(&mut self.cur, self.n) {
            Some(self.cur.clone())
        } else {
            self.done = true;
            None
        }
    }
}

/// Lexicographic rank of a sorted k-subset of `0..n`.
pub fn rank(subset: &[usize], n: usize) -> u64 {
    let k = subset.len();
    let mut r = 0u64;
    let mut lo = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for v in lo..c {
            r += binomial((n - v - 1) as u64, (k - i - 1) as u64).unwrap_or(u64::MAX);
        }
        lo = c + 1;
    }
    r
}

/// Inverse of [`rank`].
pub fn unrank(mut r: u64, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut v = 0usize;
    for i in 0..k {
        loop {
            let block = binomial((n - v - 1) as u64, (k - i - 1) as u64).unwrap_or(u64::MAX);
            if r < block {
                break;
            }
            r -= block;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    out
}

/// Columns `0..n` with `excluded` (sorted) removed, in ascending order.
pub fn complement(excluded: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n.saturating_sub(excluded.len()));
    let mut it = excluded.iter().peekable();
    for c in 0..n {
        if it.peek() == Some(&&c) {
            it.next();
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(24, 1), Some(24));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(67, 33), Some(14226520737620288370));
        assert_eq!(binomial(100, 50), None);
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all: Vec<_> = Combinations::new(5, 3).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[1], vec![0, 1, 3]);
        assert_eq!(all[9], vec![2, 3, 4]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Combinations::new(3, 4).count(), 0);
        assert_eq!(Combinations::new(3, 0).count(), 1);
    }

    #[test]
    fn complement_skips_excluded() {
        assert_eq!(complement(&[1, 3], 5), vec![0, 2, 4]);
        assert_eq!(complement(&[], 2), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn rank_matches_enumeration_index(n in 1usize..10, k in 0usize..5) {
            prop_assume!(k <= n);
            for (idx, s) in Combinations::new(n, k).enumerate() {
                prop_assert_eq!(rank(&s, n), idx as u64);
                prop_assert_eq!(unrank(idx as u64, n, k), s);
            }
        }
    }
}
