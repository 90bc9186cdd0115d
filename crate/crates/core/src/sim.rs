//! Group testing under the general inhibitor complex model: outcome
//! generation with adversarial masking and bounded errors, and a per-complex
//! threshold decoder.
//!
//! A pool is ideally positive when it contains some defective complex in
//! full. A positive pool that also contains an inhibitor complex in full may
//! be masked to negative. On top of that, a bounded number of outcomes are
//! flipped.
//!
//! The decoder counts negative outcomes among the pools containing a
//! candidate `B` and declares it defective when the count is at most
//! `y + floor((x - 1) / 2)`. On a matrix that is `(D, r; z]`-disjunct and
//! `(D, r; y]`-inclusive with `z - y >= x` this recovers the defective set
//! exactly: a defective `B` sees at most `y` masked plus the flipped pools,
//! a non-defective one at least `z` minus the flipped pools.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combin::{binomial, next_combination, unrank};
use crate::error::{Error, Result};
use crate::format::Metadata;
use crate::matrix::PoolingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Masking {
    /// Every maskable pool is masked.
    #[default]
    All,
    /// Each maskable pool is masked independently with probability 1/2.
    Subset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub matrix: PoolingMatrix,
    pub meta: Metadata,
    /// Sorted 0-based column sets of size `r`.
    pub defectives: Vec<Vec<usize>>,
    pub inhibitors: Vec<Vec<usize>>,
    /// Number of outcomes flipped after masking.
    pub errors: usize,
    pub seed: u64,
}

fn normalise(c: &[usize], r: usize, n: usize, what: &str) -> Result<Vec<usize>> {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != r || c.len() != r {
        return Err(Error::input(format!(
            "{what} complex {c:?} must have exactly {r} distinct columns"
        )));
    }
    if let Some(&j) = v.iter().find(|&&j| j >= n) {
        return Err(Error::input(format!(
            "{what} column {} out of range",
            j + 1
        )));
    }
    Ok(v)
}

impl Scenario {
    pub fn new(
        matrix: PoolingMatrix,
        meta: Metadata,
        defectives: &[Vec<usize>],
        inhibitors: &[Vec<usize>],
        errors: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = matrix.cols();
        let r = meta.r;
        let mut defs = defectives
            .iter()
            .map(|c| normalise(c, r, n, "defective"))
            .collect::<Result<Vec<_>>>()?;
        let mut inhs = inhibitors
            .iter()
            .map(|c| normalise(c, r, n, "inhibitor"))
            .collect::<Result<Vec<_>>>()?;
        defs.sort();
        defs.dedup();
        inhs.sort();
        inhs.dedup();
        if defs.len() > meta.d {
            return Err(Error::input(format!(
                "{} defective complexes exceed d = {}",
                defs.len(),
                meta.d
            )));
        }
        if inhs.len() > meta.h {
            return Err(Error::input(format!(
                "{} inhibitor complexes exceed h = {}",
                inhs.len(),
                meta.h
            )));
        }
        if defs.iter().any(|c| inhs.contains(c)) {
            return Err(Error::input(
                "a complex cannot be both defective and inhibitor",
            ));
        }
        if errors > meta.error_budget() {
            return Err(Error::input(format!(
                "{errors} errors exceed the budget {}",
                meta.error_budget()
            )));
        }
        if errors > matrix.rows() {
            return Err(Error::input("more errors than pools"));
        }
        Ok(Scenario {
            matrix,
            meta,
            defectives: defs,
            inhibitors: inhs,
            errors,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeVector {
    /// Observed outcomes, `true` = positive.
    pub outcomes: Vec<bool>,
    /// Before masking and errors.
    pub ideal: Vec<bool>,
    /// After masking, before errors.
    pub masked: Vec<bool>,
    /// Flipped pool indices, ascending.
    pub flipped: Vec<usize>,
}

fn contains_complex(m: &PoolingMatrix, row: usize, c: &[usize]) -> bool {
    c.iter().all(|&j| m.get(row, j))
}

/// Ideal outcomes after masking. `mask(i)` decides whether maskable pool
/// `i` is actually masked.
fn masked_outcomes(sc: &Scenario, mut mask: impl FnMut(usize) -> bool) -> (Vec<bool>, Vec<bool>) {
    let t = sc.matrix.rows();
    let ideal: Vec<bool> = (0..t)
        .map(|i| {
            sc.defectives
                .iter()
                .any(|c| contains_complex(&sc.matrix, i, c))
        })
        .collect();
    let masked = (0..t)
        .map(|i| {
            let maskable = ideal[i]
                && sc
                    .inhibitors
                    .iter()
                    .any(|c| contains_complex(&sc.matrix, i, c));
            ideal[i] && !(maskable && mask(i))
        })
        .collect();
    (ideal, masked)
}

/// Outcomes with errors at seeded positions.
pub fn generate_outcomes(sc: &Scenario, masking: Masking) -> OutcomeVector {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let (ideal, masked) = match masking {
        Masking::All => masked_outcomes(sc, |_| true),
        Masking::Subset => masked_outcomes(sc, |_| rng.gen_bool(0.5)),
    };
    let mut flipped = sample(&mut rng, sc.matrix.rows(), sc.errors).into_vec();
    flipped.sort_unstable();
    finish(ideal, masked, flipped)
}

/// Outcomes with errors at the given pool indices. The scenario's error
/// count is ignored; the flip list must respect the error budget.
pub fn generate_outcomes_with_flips(
    sc: &Scenario,
    masking: Masking,
    flips: &[usize],
) -> Result<OutcomeVector> {
    let mut flipped = flips.to_vec();
    flipped.sort_unstable();
    flipped.dedup();
    if flipped.len() > sc.meta.error_budget() {
        return Err(Error::input("flip list exceeds the error budget"));
    }
    if flipped.last().is_some_and(|&i| i >= sc.matrix.rows()) {
        return Err(Error::input("flip position out of range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let (ideal, masked) = match masking {
        Masking::All => masked_outcomes(sc, |_| true),
        Masking::Subset => masked_outcomes(sc, |_| rng.gen_bool(0.5)),
    };
    Ok(finish(ideal, masked, flipped))
}

fn finish(ideal: Vec<bool>, masked: Vec<bool>, flipped: Vec<usize>) -> OutcomeVector {
    let mut outcomes = masked.clone();
    for &i in &flipped {
        outcomes[i] = !outcomes[i];
    }
    OutcomeVector {
        outcomes,
        ideal,
        masked,
        flipped,
    }
}

/// Packs outcomes into row bitset words, `1` = negative.
pub fn negative_bits(outcomes: &[bool]) -> Vec<u64> {
    let mut bits = vec![0u64; outcomes.len().div_ceil(64)];
    for (i, &pos) in outcomes.iter().enumerate() {
        if !pos {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

/// `y + floor((x - 1) / 2)`
pub fn decode_threshold(meta: &Metadata) -> usize {
    meta.y + meta.error_budget()
}

fn check_meta(meta: &Metadata) -> Result<()> {
    if meta.z < meta.y + meta.x {
        return Err(Error::input(format!(
            "decoding needs z - y >= x (z = {}, y = {}, x = {})",
            meta.z, meta.y, meta.x
        )));
    }
    Ok(())
}

/// Decides whether `b` is defective: the number of negative outcomes among
/// pools containing all of `b` is at most the threshold.
pub fn decode_complex(
    m: &PoolingMatrix,
    meta: &Metadata,
    outcomes: &[bool],
    b: &[usize],
) -> Result<bool> {
    check_meta(meta)?;
    if outcomes.len() != m.rows() {
        return Err(Error::input(format!(
            "{} outcomes for {} pools",
            outcomes.len(),
            m.rows()
        )));
    }
    if b.len() != meta.r || b.iter().any(|&j| j >= m.cols()) {
        return Err(Error::input(format!(
            "candidate must be {} valid columns",
            meta.r
        )));
    }
    let neg = negative_bits(outcomes);
    let mut scratch = Vec::new();
    Ok(negatives_within(m, &neg, b, &mut scratch) <= decode_threshold(meta))
}

#[inline]
fn negatives_within(m: &PoolingMatrix, neg: &[u64], b: &[usize], scratch: &mut Vec<u64>) -> usize {
    m.intersect_into(b, scratch);
    scratch
        .iter()
        .zip(neg)
        .map(|(s, n)| (s & n).count_ones() as usize)
        .sum()
}

/// Every `r`-set declared defective, in lexicographic order.
pub fn decode_all(
    m: &PoolingMatrix,
    meta: &Metadata,
    outcomes: &[bool],
    threads: usize,
) -> Result<Vec<Vec<usize>>> {
    check_meta(meta)?;
    if outcomes.len() != m.rows() {
        return Err(Error::input(format!(
            "{} outcomes for {} pools",
            outcomes.len(),
            m.rows()
        )));
    }
    let (n, r) = (m.cols(), meta.r);
    if r == 0 || r > n {
        return Err(Error::input("complex size must lie in 1..=n"));
    }
    let total =
        binomial(n as u64, r as u64).ok_or_else(|| Error::input("too many candidate complexes"))?;
    let neg = negative_bits(outcomes);
    let tau = decode_threshold(meta);
    let scan = |lo: u64, hi: u64| {
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        let mut b = unrank(lo, n, r);
        for _ in lo..hi {
            if negatives_within(m, &neg, &b, &mut scratch) <= tau {
                out.push(b.clone());
            }
            next_combination(&mut b, n);
        }
        out
    };
    if threads <= 1 || total < 1024 {
        return Ok(scan(0, total));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    let blocks = (threads as u64 * 8).min(total);
    let parts: Vec<Vec<Vec<usize>>> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|k| scan(total * k / blocks, total * (k + 1) / blocks))
            .collect()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Verdict counts against the planted truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoverySummary {
    pub recovered: bool,
    pub false_pos: usize,
    pub false_neg: usize,
}

pub fn compare_with_truth(declared: &[Vec<usize>], truth: &[Vec<usize>]) -> RecoverySummary {
    let false_pos = declared.iter().filter(|c| !truth.contains(c)).count();
    let false_neg = truth.iter().filter(|c| !declared.contains(c)).count();
    RecoverySummary {
        recovered: false_pos == 0 && false_neg == 0,
        false_pos,
        false_neg,
    }
}
