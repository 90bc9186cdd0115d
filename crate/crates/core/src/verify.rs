//! Exhaustive property checks: disjunctness, inclusiveness, violated sets,
//! and the column-deletion alteration step.
//!
//! All searches walk `B` (the r-set) in ascending lexicographic order in the
//! outer loop and `A` (drawn from the columns outside `B`) in ascending
//! lexicographic order in the inner loop. The first hit is therefore the
//! lexicographically smallest `(B, A)`.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::combin::{binomial, complement, next_combination, unrank};
use crate::error::{Error, Result};
use crate::matrix::PoolingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// `Z(A, B) <= z - 1`
    DisjunctDeficit,
    /// `Y(A, B) >= y + 1`
    InclusiveExcess,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::DisjunctDeficit => f.write_str("disjunct-deficit"),
            ViolationKind::InclusiveExcess => f.write_str("inclusive-excess"),
        }
    }
}

/// A pair `(A, B)` breaking one of the thresholds. Column indices are
/// 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ViolationWitness {
    pub b: Vec<usize>,
    pub a: Vec<usize>,
    pub kind: ViolationKind,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violated(ViolationWitness),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&ViolationWitness> {
        match self {
            Verdict::Pass => None,
            Verdict::Violated(w) => Some(w),
        }
    }
}

/// Walks every `A` of size `a_size` outside `b`, calling `visit` with the
/// `(Z, Y)` counts until it returns `Some`.
fn scan_a<T>(
    m: &PoolingMatrix,
    b: &[usize],
    a_size: usize,
    inter: &mut Vec<u64>,
    mut visit: impl FnMut(&[usize], usize, usize) -> Option<T>,
) -> Option<T> {
    let n = m.cols();
    m.intersect_into(b, inter);
    let pool = complement(b, n);
    if a_size > pool.len() {
        return None;
    }
    let mut idx: Vec<usize> = (0..a_size).collect();
    let mut a = vec![0usize; a_size];
    let words = m.words();
    loop {
        for (slot, &k) in a.iter_mut().zip(&idx) {
            *slot = pool[k];
        }
        let mut z = 0usize;
        let mut y = 0usize;
        for (w, &iw) in inter.iter().enumerate().take(words) {
            let mut union = 0u64;
            for &j in &a {
                union |= m.support_bits(j)[w];
            }
            z += (iw & !union).count_ones() as usize;
            y += (iw & union).count_ones() as usize;
        }
        if let Some(hit) = visit(&a, z, y) {
            return Some(hit);
        }
        if !next_combination(&mut idx, pool.len()) {
            return None;
        }
    }
}

fn first_b_hit<T>(
    m: &PoolingMatrix,
    r: usize,
    mut per_b: impl FnMut(&[usize], &mut Vec<u64>) -> Option<T>,
) -> Option<T> {
    let mut b: Vec<usize> = (0..r).collect();
    let mut inter = Vec::new();
    loop {
        if let Some(hit) = per_b(&b, &mut inter) {
            return Some(hit);
        }
        if !next_combination(&mut b, m.cols()) {
            return None;
        }
    }
}

/// Checks `(d, r; z]`-disjunctness: `Z(A, B) >= z` for every disjoint
/// `|A| = d`, `|B| = r`.
pub fn verify_disjunct(m: &PoolingMatrix, d: usize, r: usize, z: usize) -> Result<Verdict> {
    if d == 0 || r == 0 || z == 0 {
        return Err(Error::input("disjunct check needs d, r, z >= 1"));
    }
    if d + r > m.cols() {
        return Err(Error::input(format!(
            "d + r = {} exceeds the {} columns",
            d + r,
            m.cols()
        )));
    }
    let hit = first_b_hit(m, r, |b, inter| {
        scan_a(m, b, d, inter, |a, zc, _| {
            (zc < z).then(|| ViolationWitness {
                b: b.to_vec(),
                a: a.to_vec(),
                kind: ViolationKind::DisjunctDeficit,
                value: zc,
            })
        })
    });
    Ok(hit.map_or(Verdict::Pass, Verdict::Violated))
}

/// Checks `(h, r; y]`-inclusiveness: `Y(A, B) <= y` for every disjoint
/// `|A| = h`, `|B| = r`. `h = 0` passes vacuously.
pub fn verify_inclusive(m: &PoolingMatrix, h: usize, r: usize, y: usize) -> Result<Verdict> {
    if r == 0 {
        return Err(Error::input("inclusive check needs r >= 1"));
    }
    if h == 0 {
        return Ok(Verdict::Pass);
    }
    if h + r > m.cols() {
        return Err(Error::input(format!(
            "h + r = {} exceeds the {} columns",
            h + r,
            m.cols()
        )));
    }
    let hit = first_b_hit(m, r, |b, inter| {
        scan_a(m, b, h, inter, |a, _, yc| {
            (yc > y).then(|| ViolationWitness {
                b: b.to_vec(),
                a: a.to_vec(),
                kind: ViolationKind::InclusiveExcess,
                value: yc,
            })
        })
    });
    Ok(hit.map_or(Verdict::Pass, Verdict::Violated))
}

fn violation_for_b(
    m: &PoolingMatrix,
    b: &[usize],
    dd: usize,
    z: usize,
    y: usize,
    inter: &mut Vec<u64>,
) -> Option<ViolationWitness> {
    scan_a(m, b, dd, inter, |a, zc, yc| {
        if zc < z {
            Some(ViolationWitness {
                b: b.to_vec(),
                a: a.to_vec(),
                kind: ViolationKind::DisjunctDeficit,
                value: zc,
            })
        } else if yc > y {
            Some(ViolationWitness {
                b: b.to_vec(),
                a: a.to_vec(),
                kind: ViolationKind::InclusiveExcess,
                value: yc,
            })
        } else {
            None
        }
    })
}

/// Every `(D, D, r; z, y]`-violated r-set, once each, with its
/// lexicographically first witness, in lexicographic order of `B`.
pub fn find_violated_sets(
    m: &PoolingMatrix,
    dd: usize,
    r: usize,
    z: usize,
    y: usize,
) -> Result<Vec<ViolationWitness>> {
    find_violated_sets_par(m, dd, r, z, y, 1)
}

/// [`find_violated_sets`] with the `B`-space split across `threads`
/// workers. The output order does not depend on `threads`.
pub fn find_violated_sets_par(
    m: &PoolingMatrix,
    dd: usize,
    r: usize,
    z: usize,
    y: usize,
    threads: usize,
) -> Result<Vec<ViolationWitness>> {
    if dd == 0 || r == 0 {
        return Err(Error::input("violated-set search needs D, r >= 1"));
    }
    if dd + r > m.cols() {
        return Err(Error::input(format!(
            "D + r = {} exceeds the {} columns",
            dd + r,
            m.cols()
        )));
    }
    let n = m.cols();
    if threads <= 1 {
        let mut out = Vec::new();
        let mut b: Vec<usize> = (0..r).collect();
        let mut inter = Vec::new();
        loop {
            if let Some(w) = violation_for_b(m, &b, dd, z, y, &mut inter) {
                out.push(w);
            }
            if !next_combination(&mut b, n) {
                break;
            }
        }
        return Ok(out);
    }
    let total =
        binomial(n as u64, r as u64).ok_or_else(|| Error::input("too many candidate r-sets"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    let found: Vec<ViolationWitness> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map_init(Vec::new, |inter, rank| {
                let b = unrank(rank, n, r);
                violation_for_b(m, &b, dd, z, y, inter)
            })
            .flatten()
            .collect()
    });
    Ok(found)
}

/// Columns selected for deletion: the smallest index of each violated set.
pub fn deletion_set(witnesses: &[ViolationWitness]) -> BTreeSet<usize> {
    witnesses
        .iter()
        .filter_map(|w| w.b.iter().copied().min())
        .collect()
}

/// Removes one column (the smallest index) from every violated set.
/// Surviving columns keep their relative order.
pub fn delete_violated_columns(
    m: &PoolingMatrix,
    witnesses: &[ViolationWitness],
) -> Result<PoolingMatrix> {
    let doomed = deletion_set(witnesses);
    if doomed.iter().any(|&j| j >= m.cols()) {
        return Err(Error::input("witness column out of range"));
    }
    let keep: Vec<usize> = (0..m.cols()).filter(|j| !doomed.contains(j)).collect();
    m.select_columns(&keep)
}
