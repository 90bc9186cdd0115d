//! Deterministic construction by the method of conditional expectations
//! with a pessimistic estimator.
//!
//! The matrix is fixed entry by entry in row-major order. The estimator is
//! the union bound
//!
//! ```text
//! P = sum over disjoint (A, B), |A| = D, |B| = r, of
//!     Pr[Z(A, B) <= z - 1] + Pr[Y(A, B) >= y + 1]
//! ```
//!
//! over the random completion of the undetermined entries. Each entry is
//! set to 0 when that does not raise `P`, otherwise to 1; by total
//! probability one of the two choices never does. When the estimator starts
//! below the violated-set budget, the finished matrix therefore has fewer
//! violated sets than the budget and the alteration step succeeds.
//!
//! Row indexing: `i` below counts fully determined rows, so the row being
//! filled is row `i` (0-based) and `t - i - 1` random rows follow it. The
//! tail tables are indexed by the number of rows *before* the remaining
//! random block, so the remaining-rows tails are read at column `i + 1`.

use rayon::prelude::*;

use crate::alter::{alter, ConstructionOutcome};
use crate::combin::{binomial, complement, next_combination, rank, Combinations};
use crate::error::{Error, Result};
use crate::matrix::PoolingMatrix;
use crate::plan::ConstructionPlan;
use crate::tail::TailTable;

/// Fixed summation block; the reduction order depends only on this, never
/// on the worker count.
const SUM_CHUNK: usize = 2048;

/// Hard cap on the number of `(A, B)` pairs tracked.
pub const MAX_PAIRS: u64 = 50_000_000;

/// Relative tolerance of the internal consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Free,
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        if b {
            Cell::One
        } else {
            Cell::Zero
        }
    }
}

/// `(omega, psi)` for one row: the probabilities that the row contributes
/// to `Z(A, B)` and to `Y(A, B)`.
///
/// Every column in `B` must be 1 and, for `omega`, every column in `A` must
/// be 0; for `psi` at least one column in `A` must be 1. Fixed cells count
/// as certain, free cells as Bernoulli(p). To condition on a hypothesised
/// value, write it into `row` first.
#[inline]
pub fn row_membership_probs(row: &[Cell], a: &[u32], b: &[u32], p: f64) -> (f64, f64) {
    let mut all_b = 1.0;
    for &j in b {
        match row[j as usize] {
            Cell::One => {}
            Cell::Zero => return (0.0, 0.0),
            Cell::Free => all_b *= p,
        }
    }
    let mut none_a = 1.0;
    for &j in a {
        match row[j as usize] {
            Cell::Zero => {}
            Cell::One => {
                none_a = 0.0;
                break;
            }
            Cell::Free => none_a *= 1.0 - p,
        }
    }
    (all_b * none_a, all_b * (1.0 - none_a))
}

/// Per-pair estimator term with `i` determined rows, counters `(zab, yab)`
/// over those rows, and `(omega, psi)` for row `i`. The inclusive side uses
/// the upper-tail table rather than `1 - s2`, so every summand is a
/// non-negative probability.
#[inline]
pub fn estimate_pab0(
    tab: &TailTable,
    zab: usize,
    yab: usize,
    i: usize,
    omega: f64,
    psi: f64,
) -> f64 {
    let k = i + 1;
    omega * tab.s1(zab + 2, k)
        + (1.0 - omega) * tab.s1(zab + 1, k)
        + psi * tab.u2(yab + 1, k)
        + (1.0 - psi) * tab.u2(yab, k)
}

/// Per-pair term once every row is determined: the 0/1 violation
/// indicators.
#[inline]
fn settled_term(tab: &TailTable, zab: usize, yab: usize) -> f64 {
    let t = tab.t();
    tab.s1(zab + 1, t) + tab.u2(yab, t)
}

/// Every disjoint `(B, A)` with `|B| = r`, `|A| = D`, flattened in the
/// enumeration order: `B` lexicographic outer, `A` lexicographic inner
/// over the columns outside `B`. A pair's position equals
/// `rank(B) * C(m - r, D) + rank(A within the complement of B)`.
#[derive(Debug, Clone)]
pub struct PairTable {
    m: usize,
    r: usize,
    dd: usize,
    cols: Vec<u32>,
}

impl PairTable {
    pub fn new(m: usize, r: usize, dd: usize) -> Result<Self> {
        if r == 0 || dd == 0 || dd + r > m {
            return Err(Error::input(format!(
                "need D, r >= 1 and D + r <= m (D = {dd}, r = {r}, m = {m})"
            )));
        }
        let count = Self::count(m, r, dd)
            .filter(|&c| c <= MAX_PAIRS)
            .ok_or_else(|| Error::input(format!("more than {MAX_PAIRS} (A, B) pairs")))?;
        let mut cols = Vec::with_capacity(count as usize * (r + dd));
        for b in Combinations::new(m, r) {
            let pool = complement(&b, m);
            let mut idx: Vec<usize> = (0..dd).collect();
            loop {
                cols.extend(b.iter().map(|&c| c as u32));
                cols.extend(idx.iter().map(|&k| pool[k] as u32));
                if !next_combination(&mut idx, pool.len()) {
                    break;
                }
            }
        }
        Ok(PairTable { m, r, dd, cols })
    }

    /// `C(m, r) * C(m - r, D)`
    pub fn count(m: usize, r: usize, dd: usize) -> Option<u64> {
        binomial(m as u64, r as u64)?.checked_mul(binomial((m - r) as u64, dd as u64)?)
    }

    pub fn len(&self) -> usize {
        self.cols.len() / (self.r + self.dd)
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// `(B, A)` of pair `k`.
    #[inline]
    pub fn pair(&self, k: usize) -> (&[u32], &[u32]) {
        let w = self.r + self.dd;
        let s = &self.cols[k * w..(k + 1) * w];
        s.split_at(self.r)
    }

    /// Position of `(B, A)`; both sorted, disjoint.
    pub fn index_of(&self, b: &[usize], a: &[usize]) -> usize {
        let pool = complement(b, self.m);
        let a_pos: Vec<usize> = a
            .iter()
            .map(|c| pool.binary_search(c).expect("A must avoid B"))
            .collect();
        let per_b = binomial((self.m - self.r) as u64, self.dd as u64).unwrap_or(0);
        (rank(b, self.m) * per_b + rank(&a_pos, self.m - self.r)) as usize
    }
}

/// Running estimator value, per-pair counters over the determined rows,
/// and the position of the next undetermined entry.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub p_prev: f64,
    pub z_counts: Vec<u32>,
    pub y_counts: Vec<u32>,
    pub row: usize,
    pub col: usize,
}

impl EstimatorState {
    pub fn new(pairs: &PairTable, initial: f64) -> Self {
        EstimatorState {
            p_prev: initial,
            z_counts: vec![0; pairs.len()],
            y_counts: vec![0; pairs.len()],
            row: 0,
            col: 0,
        }
    }
}

/// One greedy decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub row: usize,
    pub col: usize,
    /// Estimator before the step.
    pub p_prev: f64,
    pub p0: f64,
    /// `P(1)` from the total-probability identity.
    pub p1: f64,
    /// `P(1)` recomputed from scratch; present when 1 was chosen or direct
    /// checking is on.
    pub p1_direct: Option<f64>,
    pub value: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sums `term(k)` over all pairs in fixed chunks; each chunk is Kahan
/// summed, then chunk totals are Kahan summed in order.
fn chunked_sum<F>(len: usize, pool: Option<&rayon::ThreadPool>, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunk_total = |c: usize| {
        let mut acc = Kahan::default();
        for k in c * SUM_CHUNK..((c + 1) * SUM_CHUNK).min(len) {
            acc.add(term(k));
        }
        acc.sum
    };
    let chunks = len.div_ceil(SUM_CHUNK);
    let partial: Vec<f64> = match pool {
        Some(pool) if chunks > 1 => {
            pool.install(|| (0..chunks).into_par_iter().map(chunk_total).collect())
        }
        _ => (0..chunks).map(chunk_total).collect(),
    };
    let mut acc = Kahan::default();
    for v in partial {
        acc.add(v);
    }
    acc.sum
}

/// Sum of per-pair estimator terms for the current row contents.
fn row_estimate(
    state: &EstimatorState,
    tab: &TailTable,
    pairs: &PairTable,
    row_cells: &[Cell],
    p: f64,
    pool: Option<&rayon::ThreadPool>,
) -> f64 {
    let i = state.row;
    chunked_sum(pairs.len(), pool, |k| {
        let (b, a) = pairs.pair(k);
        let (omega, psi) = row_membership_probs(row_cells, a, b, p);
        estimate_pab0(
            tab,
            state.z_counts[k] as usize,
            state.y_counts[k] as usize,
            i,
            omega,
            psi,
        )
    })
}

/// Fixes the next entry `(state.row, state.col)`: 0 when `P(0) <= P_prev`,
/// else 1. Fails when `(1-p) P(0) + p P(1)` departs from `P_prev`. `row_cells` holds the current row and is updated in place.
pub fn greedy_fix_entry(
    state: &mut EstimatorState,
    tab: &TailTable,
    plan: &ConstructionPlan,
    pairs: &PairTable,
    row_cells: &mut [Cell],
    check_direct: bool,
    pool: Option<&rayon::ThreadPool>,
) -> Result<StepRecord> {
    let j = state.col;
    let p = plan.p;
    row_cells[j] = Cell::Zero;
    let p0 = row_estimate(state, tab, pairs, row_cells, p, pool);
    let p1 = (state.p_prev - (1.0 - p) * p0) / p;
    let value = p0 > state.p_prev;
    // the identity divides by p, so a value carried forward from it would
    // amplify rounding; a chosen 1 is always recomputed
    let p1_direct = if value || check_direct {
        row_cells[j] = Cell::One;
        let direct = row_estimate(state, tab, pairs, row_cells, p, pool);
        let mixed = (1.0 - p) * p0 + p * direct;
        if (mixed - state.p_prev).abs() > CONSISTENCY_TOL * state.p_prev.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "(1-p) P(0) + p P(1) = {mixed} but P_prev = {} at ({}, {j})",
                state.p_prev, state.row
            )));
        }
        Some(direct)
    } else {
        None
    };
    row_cells[j] = Cell::from(value);
    let record = StepRecord {
        row: state.row,
        col: j,
        p_prev: state.p_prev,
        p0,
        p1,
        p1_direct,
        value,
    };
    state.p_prev = match (value, p1_direct) {
        (true, Some(direct)) => direct,
        _ => p0,
    };
    state.col += 1;
    Ok(record)
}

/// Folds a completed row into the counters and advances to the next row.
pub fn update_counters(state: &mut EstimatorState, row: &[bool], pairs: &PairTable) {
    for k in 0..pairs.len() {
        let (b, a) = pairs.pair(k);
        if b.iter().all(|&j| row[j as usize]) {
            if a.iter().any(|&j| row[j as usize]) {
                state.y_counts[k] += 1;
            } else {
                state.z_counts[k] += 1;
            }
        }
    }
    state.row += 1;
    state.col = 0;
}

/// A matrix whose entries may be undetermined, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
}

impl PartialMatrix {
    pub fn free(rows: usize, cols: usize) -> Self {
        PartialMatrix {
            rows,
            cols,
            cells: vec![Cell::Free; rows * cols],
        }
    }

    /// The first `determined` entries (row-major) of `m`, the rest free.
    pub fn prefix_of(m: &PoolingMatrix, determined: usize) -> Self {
        let mut pm = Self::free(m.rows(), m.cols());
        for k in 0..determined.min(pm.cells.len()) {
            pm.cells[k] = Cell::from(m.get(k / m.cols(), k % m.cols()));
        }
        pm
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Cell) {
        self.cells[i * self.cols + j] = c;
    }

    pub fn undetermined(&self) -> usize {
        self.cells.iter().filter(|&&c| c == Cell::Free).count()
    }

    /// Number of determined entries if they form a row-major prefix.
    fn determined_prefix(&self) -> Option<usize> {
        let first_free = self
            .cells
            .iter()
            .position(|&c| c == Cell::Free)
            .unwrap_or(self.cells.len());
        self.cells[first_free..]
            .iter()
            .all(|&c| c == Cell::Free)
            .then_some(first_free)
    }
}

/// Table-based estimator of a partial matrix whose determined entries form a
/// row-major prefix (the only shape the greedy walk produces).
pub fn table_estimate(
    partial: &PartialMatrix,
    plan: &ConstructionPlan,
    tab: &TailTable,
) -> Result<f64> {
    let prefix = partial
        .determined_prefix()
        .ok_or_else(|| Error::input("determined entries must form a row-major prefix"))?;
    let pairs = PairTable::new(partial.cols(), plan.r, plan.big_d)?;
    let cols = partial.cols();
    let i = prefix / cols;
    let mut acc = Kahan::default();
    for k in 0..pairs.len() {
        let (b, a) = pairs.pair(k);
        let mut zab = 0usize;
        let mut yab = 0usize;
        for row in 0..i {
            let on = |j: &u32| partial.get(row, *j as usize) == Cell::One;
            if b.iter().all(on) {
                if a.iter().any(on) {
                    yab += 1;
                } else {
                    zab += 1;
                }
            }
        }
        let term = if i == partial.rows() {
            settled_term(tab, zab, yab)
        } else {
            let row_cells = &partial.cells[i * cols..(i + 1) * cols];
            let (omega, psi) = row_membership_probs(row_cells, a, b, plan.p);
            estimate_pab0(tab, zab, yab, i, omega, psi)
        };
        acc.add(term);
    }
    Ok(acc.sum)
}

/// Reference estimator by brute force: for every pair, enumerates all
/// completions of the undetermined entries in the pair's columns and sums
/// `Pr[Z <= z - 1] + Pr[Y >= y + 1]` directly. Refuses more than 20
/// undetermined entries.
pub fn exact_estimator_oracle(partial: &PartialMatrix, plan: &ConstructionPlan) -> Result<f64> {
    let free = partial.undetermined();
    if free > 20 {
        return Err(Error::OracleTooLarge(free));
    }
    let (m, r, dd) = (partial.cols(), plan.r, plan.big_d);
    if dd + r > m {
        return Err(Error::input("D + r exceeds the column count"));
    }
    let p = plan.p;
    let mut total = 0.0;
    for b in Combinations::new(m, r) {
        for a in Combinations::new(m, dd) {
            if a.iter().any(|j| b.contains(j)) {
                continue;
            }
            let cols: Vec<usize> = b.iter().chain(&a).copied().collect();
            let free_cells: Vec<(usize, usize)> = (0..partial.rows())
                .flat_map(|i| cols.iter().map(move |&j| (i, j)))
                .filter(|&(i, j)| partial.get(i, j) == Cell::Free)
                .collect();
            let u = free_cells.len();
            for mask in 0u32..(1u32 << u) {
                let mut weight = 1.0;
                let value = |i: usize, j: usize| -> bool {
                    match partial.get(i, j) {
                        Cell::One => true,
                        Cell::Zero => false,
                        Cell::Free => {
                            let pos = free_cells.iter().position(|&c| c == (i, j)).unwrap();
                            mask >> pos & 1 == 1
                        }
                    }
                };
                for pos in 0..u {
                    weight *= if mask >> pos & 1 == 1 { p } else { 1.0 - p };
                }
                let mut zc = 0usize;
                let mut yc = 0usize;
                for i in 0..partial.rows() {
                    if b.iter().all(|&j| value(i, j)) {
                        if a.iter().any(|&j| value(i, j)) {
                            yc += 1;
                        } else {
                            zc += 1;
                        }
                    }
                }
                if zc < plan.z {
                    total += weight;
                }
                if yc > plan.y {
                    total += weight;
                }
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DerandOptions {
    /// Run even when the initial estimator is not below the budget; the
    /// alteration step then decides success after the fact.
    pub allow_over_budget: bool,
    /// Recompute `P(1)` directly at every step and check the
    /// total-probability identity.
    pub check_direct: bool,
    /// Compare the running estimator with [`exact_estimator_oracle`] once at
    /// most 20 entries remain undetermined.
    pub check_exact: bool,
    pub record_trace: bool,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct DerandRun {
    pub outcome: ConstructionOutcome,
    pub initial_estimate: f64,
    pub final_estimate: f64,
    /// Number of `(A, B)` pairs tracked.
    pub pairs: usize,
    /// Violated r-sets of the pre-deletion matrix.
    pub violated_before: usize,
    pub exact_checks: usize,
    pub trace: Vec<StepRecord>,
}

/// `C(m, r) C(m - r, D) (s1(1, 0) + 1 - s2(0, 0))`, the estimator of the
/// fully random matrix.
pub fn initial_estimate(plan: &ConstructionPlan, tab: &TailTable) -> Result<f64> {
    let m = plan.m as usize;
    let count = PairTable::count(m, plan.r, plan.big_d)
        .ok_or_else(|| Error::input("pair count overflows"))?;
    Ok(count as f64 * (tab.s1(1, 0) + tab.u2(0, 0)))
}

pub fn derandomized_construct(plan: &ConstructionPlan, opts: &DerandOptions) -> Result<DerandRun> {
    let m = usize::try_from(plan.m).map_err(|_| Error::input("m does not fit in memory"))?;
    let t = plan.t;
    let pairs = PairTable::new(m, plan.r, plan.big_d)?;
    let tab = TailTable::build(t, plan.z, plan.y, plan.q1, plan.q2)?;
    let initial = initial_estimate(plan, &tab)?;
    if initial >= plan.budget && !opts.allow_over_budget {
        return Err(Error::InitialEstimator {
            value: initial,
            budget: plan.budget,
        });
    }
    let pool = if opts.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .map_err(|e| Error::input(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut state = EstimatorState::new(&pairs, initial);
    let mut matrix = PoolingMatrix::zeros(t, m)?;
    let mut trace = Vec::new();
    let mut exact_checks = 0usize;
    let total_entries = t * m;
    for i in 0..t {
        let mut row_cells = vec![Cell::Free; m];
        for j in 0..m {
            let rec = greedy_fix_entry(
                &mut state,
                &tab,
                plan,
                &pairs,
                &mut row_cells,
                opts.check_direct,
                pool.as_ref(),
            )?;
            matrix.set(i, j, rec.value);
            if opts.record_trace {
                trace.push(rec);
            }
            let determined = i * m + j + 1;
            if opts.check_exact && total_entries - determined <= 20 {
                let partial = PartialMatrix::prefix_of(&matrix, determined);
                let exact = exact_estimator_oracle(&partial, plan)?;
                if (exact - state.p_prev).abs() > CONSISTENCY_TOL * exact.abs().max(1.0) {
                    return Err(Error::Consistency(format!(
                        "estimator {} differs from exact value {exact} at ({i}, {j})",
                        state.p_prev
                    )));
                }
                exact_checks += 1;
            }
        }
        let row: Vec<bool> = row_cells.iter().map(|&c| c == Cell::One).collect();
        update_counters(&mut state, &row, &pairs);
    }

    let final_estimate = state.p_prev;
    let outcome = alter(matrix, plan, opts.threads.max(1))?;
    let violated_before = match &outcome {
        ConstructionOutcome::Success(c) => c.violated.len(),
        ConstructionOutcome::Fail(f) => f.violated,
    };
    // violated r-sets never outnumber violated (A, B) pairs, which the
    // settled estimator counts exactly
    if violated_before as f64 > final_estimate + CONSISTENCY_TOL * final_estimate.max(1.0) {
        return Err(Error::Consistency(format!(
            "{violated_before} violated sets exceed the final estimator {final_estimate}"
        )));
    }
    if !opts.allow_over_budget && outcome.is_fail() {
        return Err(Error::Consistency(
            "estimator stayed below budget but alteration failed".into(),
        ));
    }
    Ok(DerandRun {
        outcome,
        initial_estimate: initial,
        final_estimate,
        pairs: pairs.len(),
        violated_before,
        exact_checks,
        trace,
    })
}
