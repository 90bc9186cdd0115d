//! Binomial lower-tail lookup tables for the pessimistic estimator.
//!
//! `s1(z0, i) = Pr[Bin(t - i, q1) <= z - z0]` for `z0` in `1..=z`, and
//! `s2(y0, i) = Pr[Bin(t - i, q2) <= y - y0]` for `y0` in `0..=y`; both are
//! 0 past the upper end of their first index. The complement
//! `u2(y0, i) = 1 - s2(y0, i)` is tabulated separately, summed from the
//! upper end, so it keeps full relative precision when it is tiny.
//!
//! Each tail is accumulated term by term in a fixed order with compensated
//! summation. Terms come from the ratio recurrence
//! `pmf(l+1) / pmf(l) = (N - l) q / ((l + 1)(1 - q))` on a value scaled by
//! `pmf(0) = exp(N ln(1 - q))`; the scale is kept in the log domain and
//! renormalised by exact powers of two so neither end under- or overflows.

use crate::error::{Error, Result};

const RESCALE_AT: f64 = 1e180;
const RESCALE_EXP: i32 = 598; // 2^598 ~ 1e180, exact scaling

#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `Pr[Bin(trials, q) <= k]` for `k = 0..=k_max`, in order.
pub(crate) fn binomial_cdf_prefix(trials: usize, q: f64, k_max: usize) -> Vec<f64> {
    let k_max = k_max.min(trials);
    let mut out = Vec::with_capacity(k_max + 1);
    let odds = q / (1.0 - q);
    let mut log_scale = trials as f64 * (-q).ln_1p();
    let mut v = 1.0f64;
    let mut acc = Kahan::default();
    for l in 0..=k_max {
        if l > 0 {
            v *= (trials - l + 1) as f64 / l as f64 * odds;
        }
        if v > RESCALE_AT {
            let f = 2f64.powi(-RESCALE_EXP);
            v *= f;
            acc.sum *= f;
            acc.comp *= f;
            log_scale += RESCALE_EXP as f64 * std::f64::consts::LN_2;
        }
        acc.add(v);
        let cdf = if acc.sum > 0.0 {
            (acc.sum.ln() + log_scale).exp()
        } else {
            0.0
        };
        out.push(cdf.min(1.0));
    }
    out
}

#[derive(Debug, Clone)]
pub struct TailTable {
    t: usize,
    z: usize,
    y: usize,
    pub q1: f64,
    pub q2: f64,
    // s1[i * z + (z0 - 1)], i in 0..=t
    s1: Vec<f64>,
    // s2[i * (y + 1) + y0], i in 0..=t
    s2: Vec<f64>,
    // u2, same layout as s2
    u2: Vec<f64>,
}

impl TailTable {
    pub fn build(t: usize, z: usize, y: usize, q1: f64, q2: f64) -> Result<Self> {
        for (name, q) in [("q1", q1), ("q2", q2)] {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::input(format!("{name} = {q} must lie in (0, 1)")));
            }
        }
        if z == 0 {
            return Err(Error::input("z must be at least 1"));
        }
        let mut s1 = Vec::with_capacity((t + 1) * z);
        let mut s2 = Vec::with_capacity((t + 1) * (y + 1));
        let mut u2 = Vec::with_capacity((t + 1) * (y + 1));
        for i in 0..=t {
            let trials = t - i;
            let c1 = binomial_cdf_prefix(trials, q1, z - 1);
            for z0 in 1..=z {
                let k = z - z0;
                s1.push(if k >= c1.len() { 1.0 } else { c1[k] });
            }
            let c2 = binomial_cdf_prefix(trials, q2, y);
            for y0 in 0..=y {
                let k = y - y0;
                s2.push(if k >= c2.len() { 1.0 } else { c2[k] });
            }
            // Pr[Bin(N, q2) >= k] = Pr[Bin(N, 1 - q2) <= N - k], k = y - y0 + 1
            let mirrored = if trials == 0 {
                Vec::new()
            } else {
                binomial_cdf_prefix(trials, 1.0 - q2, trials - 1)
            };
            for y0 in 0..=y {
                let k = y - y0 + 1;
                u2.push(if k > trials {
                    0.0
                } else {
                    mirrored[trials - k]
                });
            }
        }
        Ok(TailTable {
            t,
            z,
            y,
            q1,
            q2,
            s1,
            s2,
            u2,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn y(&self) -> usize {
        self.y
    }

    /// `Pr[Bin(t - i, q1) <= z - z0]`; 0 for `z0 > z`. Requires `z0 >= 1`.
    #[inline]
    pub fn s1(&self, z0: usize, i: usize) -> f64 {
        debug_assert!(z0 >= 1 && i <= self.t);
        if z0 > self.z {
            0.0
        } else {
            self.s1[i * self.z + z0 - 1]
        }
    }

    /// `Pr[Bin(t - i, q2) <= y - y0]`; 0 for `y0 > y`.
    #[inline]
    pub fn s2(&self, y0: usize, i: usize) -> f64 {
        debug_assert!(i <= self.t);
        if y0 > self.y {
            0.0
        } else {
            self.s2[i * (self.y + 1) + y0]
        }
    }

    /// `Pr[Bin(t - i, q2) > y - y0]`; 1 for `y0 > y`.
    #[inline]
    pub fn u2(&self, y0: usize, i: usize) -> f64 {
        debug_assert!(i <= self.t);
        if y0 > self.y {
            1.0
        } else {
            self.u2[i * (self.y + 1) + y0]
        }
    }
}
