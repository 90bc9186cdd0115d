//! Construction parameters: the sampling probability `p`, the thresholds
//! `z` and `y`, the column budget `n`, and the slack `m - n` allowed for the
//! deletion step.
//!
//! Theorem mode derives everything from `(eps, delta, sigma)` and the design
//! sizes. Its `n` grows like `exp(K t / (D + r - 1))` and is tiny at desk-scale
//! `t`, so explicit mode lets the caller supply `(p, z, y, n, m)` directly.

use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::format::Metadata;

pub const DEFAULT_EPS: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 0.25;
pub const DEFAULT_SIGMA: f64 = 1.0;

/// Largest column budget the planner will report; beyond 2^53 the floor
/// of the budget formula is no longer an exact `f64` integer.
const MAX_EXACT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub d: usize,
    pub h: usize,
    pub r: usize,
    pub t: usize,
    pub x: usize,
    pub eps: f64,
    pub delta: f64,
    pub sigma: f64,
    /// Exponent of the high-probability variant (`failure < 1 / t^s`).
    pub s: Option<f64>,
}

impl DesignSpec {
    /// Spec with the default constants `eps = 0.5`, `delta = 0.25`,
    /// `sigma = 1`.
    pub fn new(d: usize, h: usize, r: usize, t: usize, x: usize) -> Self {
        DesignSpec {
            d,
            h,
            r,
            t,
            x,
            eps: DEFAULT_EPS,
            delta: DEFAULT_DELTA,
            sigma: DEFAULT_SIGMA,
            s: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.r == 0 || self.t == 0 || self.x == 0 {
            return Err(Error::input("d, r, t and x must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::input(format!(
                "eps = {} must lie in (0, 1)",
                self.eps
            )));
        }
        let delta_max = 2f64.powf(self.eps) - 1.0;
        if !(self.delta > 0.0 && self.delta < delta_max) {
            return Err(Error::input(format!(
                "delta = {} must lie in (0, 2^eps - 1) = (0, {delta_max})",
                self.delta
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::input(format!(
                "sigma = {} must be positive",
                self.sigma
            )));
        }
        if let Some(s) = self.s {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::input(format!("s = {s} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanMode {
    Theorem,
    TheoremHp,
    Explicit,
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanMode::Theorem => "theorem",
            PlanMode::TheoremHp => "theorem-hp",
            PlanMode::Explicit => "explicit",
        })
    }
}

/// Tuning constants of a theorem-mode plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub eps: f64,
    pub delta: f64,
    pub sigma: f64,
    pub s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionPlan {
    pub mode: PlanMode,
    pub d: usize,
    pub h: usize,
    /// `max(d, h)`
    pub big_d: usize,
    pub r: usize,
    pub t: usize,
    pub x: usize,
    pub p: f64,
    /// `p^r (1-p)^D`, the per-row probability of contributing to `Z`.
    pub q1: f64,
    /// `p^r (1 - (1-p)^D)`, the per-row probability of contributing to `Y`.
    pub q2: f64,
    pub z: usize,
    pub y: usize,
    /// Guaranteed column count is at least `n + 1`.
    pub n: u64,
    /// Pre-deletion column count.
    pub m: u64,
    /// Violated-set budget: `sigma * n` in theorem modes, `m - n` in
    /// explicit mode. Construction fails when the count reaches it.
    pub budget: f64,
    pub c0: Option<f64>,
    pub c: Option<f64>,
    pub constants: Option<Constants>,
}

/// Explicit-mode inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitParams {
    pub d: usize,
    pub h: usize,
    pub r: usize,
    pub t: usize,
    pub m: u64,
    pub n: u64,
    pub z: usize,
    pub y: usize,
    pub x: usize,
    pub p: f64,
}

fn q_values(p: f64, r: usize, big_d: usize) -> (f64, f64) {
    let pr = p.powi(r as i32);
    let all_zero = (1.0 - p).powi(big_d as i32);
    // 1 - (1-p)^D without cancellation
    let some_one = -((big_d as f64) * (-p).ln_1p()).exp_m1();
    (pr * all_zero, pr * some_one)
}

/// `c0 = ((1 - eps) ln 2 / 2)^r (2^eps - 1 - delta)`.
pub fn c0_constant(eps: f64, delta: f64, r: usize) -> f64 {
    ((1.0 - eps) * LN_2 / 2.0).powi(r as i32) * (2f64.powf(eps) - 1.0 - delta)
}

/// `c = delta^2 (1-eps)^r (ln 2)^(r-1) (1 - 2^(eps-1)) / (2^r (2+delta) r)`.
pub fn rate_constant(eps: f64, delta: f64, r: usize) -> f64 {
    let ri = r as i32;
    delta * delta * (1.0 - eps).powi(ri) * LN_2.powi(ri - 1) * (1.0 - 2f64.powf(eps - 1.0))
        / (2f64.powi(ri) * (2.0 + delta) * r as f64)
}

/// `p = 1 - 2^(-(1-eps)/D)`.
pub fn sampling_probability(eps: f64, big_d: usize) -> f64 {
    -(-(1.0 - eps) * LN_2 / big_d as f64).exp_m1()
}

/// Chernoff exponent rate `K = delta^2 q2 / (2 + delta)`.
fn exponent_rate(delta: f64, q2: f64) -> f64 {
    delta * delta * q2 / (2.0 + delta)
}

/// Natural log of the left side of the union-bound condition divided by its
/// right side (`1`, or `1 / t^s` in the high-probability variant). The
/// condition holds iff the value is `<= 0`.
#[allow(clippy::too_many_arguments)]
pub fn log_condition_margin(
    n: f64,
    t: usize,
    big_d: usize,
    r: usize,
    delta: f64,
    sigma: f64,
    q2: f64,
    s: Option<f64>,
) -> f64 {
    let k = (big_d + r) as f64;
    LN_2 + k * sigma.ln_1p() + (k - 1.0) * n.ln() - sigma.ln() - exponent_rate(delta, q2) * t as f64
        + s.map_or(0.0, |s| s * (t as f64).ln())
}

/// Derives every plan quantity from a [`DesignSpec`].
pub fn plan_parameters(spec: &DesignSpec) -> Result<ConstructionPlan> {
    spec.validate()?;
    let big_d = spec.d.max(spec.h);
    let r = spec.r;
    let t = spec.t;
    let p = sampling_probability(spec.eps, big_d);
    let (q1, q2) = q_values(p, r, big_d);
    let tf = t as f64;
    let z = ((1.0 - spec.delta) * q1 * tf).floor() as usize + 1;
    let y = (((1.0 + spec.delta) * q2 * tf).ceil() as usize).saturating_sub(1);
    let c0 = c0_constant(spec.eps, spec.delta, r);
    let x_bound = c0 / (big_d as f64).powi(r as i32) * tf;
    if spec.x as f64 > x_bound {
        return Err(Error::XOutOfRange {
            x: spec.x as u64,
            max_x: x_bound.floor() as u64,
        });
    }
    debug_assert!(z >= y + spec.x);

    let k = (big_d + r - 1) as f64;
    let ln_target = (exponent_rate(spec.delta, q2) * tf + spec.sigma.ln()
        - LN_2
        - (big_d + r) as f64 * spec.sigma.ln_1p()
        - spec.s.map_or(0.0, |s| s * tf.ln()))
        / k;
    if ln_target > MAX_EXACT.ln() - 1.0 {
        return Err(Error::ScaleTooLarge {
            ln_value: ln_target,
        });
    }
    let holds =
        |n: f64| log_condition_margin(n, t, big_d, r, spec.delta, spec.sigma, q2, spec.s) <= 0.0;
    let mut n = ln_target.exp().floor();
    while n >= 1.0 && !holds(n) {
        n -= 1.0;
    }
    while holds(n + 1.0) {
        n += 1.0;
    }
    if n < 1.0 {
        return Err(Error::InfeasibleScale {
            value: ln_target.exp(),
        });
    }
    let m = ((1.0 + spec.sigma) * n).ceil();
    if m > MAX_EXACT {
        return Err(Error::ScaleTooLarge { ln_value: m.ln() });
    }
    Ok(ConstructionPlan {
        mode: if spec.s.is_some() {
            PlanMode::TheoremHp
        } else {
            PlanMode::Theorem
        },
        d: spec.d,
        h: spec.h,
        big_d,
        r,
        t,
        x: spec.x,
        p,
        q1,
        q2,
        z,
        y,
        n: n as u64,
        m: m as u64,
        budget: spec.sigma * n,
        c0: Some(c0),
        c: Some(rate_constant(spec.eps, spec.delta, r)),
        constants: Some(Constants {
            eps: spec.eps,
            delta: spec.delta,
            sigma: spec.sigma,
            s: spec.s,
        }),
    })
}

/// Plan with caller-chosen `(p, z, y, n, m)`; the violated-set budget is the
/// slack `m - n`.
pub fn make_explicit_plan(e: &ExplicitParams) -> Result<ConstructionPlan> {
    if e.d == 0 || e.r == 0 || e.t == 0 || e.x == 0 {
        return Err(Error::input("d, r, t and x must be positive"));
    }
    if e.z == 0 {
        return Err(Error::input("z must be at least 1"));
    }
    if e.z < e.y + e.x {
        return Err(Error::input(format!(
            "z - y = {} is below x = {}",
            e.z as i64 - e.y as i64,
            e.x
        )));
    }
    if e.n == 0 || e.m <= e.n {
        return Err(Error::input(format!(
            "need m > n >= 1, got m = {}, n = {}",
            e.m, e.n
        )));
    }
    if !(e.p > 0.0 && e.p < 1.0) {
        return Err(Error::input(format!("p = {} must lie in (0, 1)", e.p)));
    }
    let big_d = e.d.max(e.h);
    let (q1, q2) = q_values(e.p, e.r, big_d);
    Ok(ConstructionPlan {
        mode: PlanMode::Explicit,
        d: e.d,
        h: e.h,
        big_d,
        r: e.r,
        t: e.t,
        x: e.x,
        p: e.p,
        q1,
        q2,
        z: e.z,
        y: e.y,
        n: e.n,
        m: e.m,
        budget: (e.m - e.n) as f64,
        c0: None,
        c: None,
        constants: None,
    })
}

/// The finite-`t` rate lower bound from the union-bound argument:
/// `(log2 sigma - 1 - (D+r) log2(1+sigma)) / ((D+r-1) t) + K / ((D+r-1) ln 2)`
/// with `K = delta^2 q2 / (2 + delta)`. Reporting only.
pub fn rate_lower_bound(plan: &ConstructionPlan) -> Result<f64> {
    let c = match (plan.mode, plan.constants) {
        (PlanMode::Explicit, _) | (_, None) => {
            return Err(Error::NotApplicable(
                "rate lower bound needs a theorem-mode plan".into(),
            ))
        }
        (_, Some(c)) => c,
    };
    Ok(lower_bound(
        plan.big_d, plan.r, plan.t, c.delta, c.sigma, plan.q2,
    ))
}

/// The same bound from the design sizes and constants alone, defined even
/// when no theorem-mode plan is feasible at `t`.
pub fn rate_lower_bound_for(
    big_d: usize,
    r: usize,
    t: usize,
    eps: f64,
    delta: f64,
    sigma: f64,
) -> f64 {
    let p = sampling_probability(eps, big_d);
    let (_, q2) = q_values(p, r, big_d);
    lower_bound(big_d, r, t, delta, sigma, q2)
}

fn lower_bound(big_d: usize, r: usize, t: usize, delta: f64, sigma: f64, q2: f64) -> f64 {
    let k = (big_d + r) as f64;
    let first = (sigma.log2() - 1.0 - k * (1.0 + sigma).log2()) / ((k - 1.0) * t as f64);
    first + exponent_rate(delta, q2) / ((k - 1.0) * LN_2)
}

impl ConstructionPlan {
    pub fn metadata(&self) -> Metadata {
        Metadata {
            d: self.d,
            h: self.h,
            r: self.r,
            x: self.x,
            z: self.z,
            y: self.y,
        }
    }

    /// Flat `key=value` pairs in a fixed order.
    pub fn to_kv(&self) -> Vec<(&'static str, String)> {
        let mut kv = vec![
            ("mode", self.mode.to_string()),
            ("t", self.t.to_string()),
            ("d", self.d.to_string()),
            ("h", self.h.to_string()),
            ("D", self.big_d.to_string()),
            ("r", self.r.to_string()),
            ("x", self.x.to_string()),
            ("p", self.p.to_string()),
            ("q1", self.q1.to_string()),
            ("q2", self.q2.to_string()),
            ("z", self.z.to_string()),
            ("y", self.y.to_string()),
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("budget", self.budget.to_string()),
        ];
        if let Some(c) = self.constants {
            kv.push(("eps", c.eps.to_string()));
            kv.push(("delta", c.delta.to_string()));
            kv.push(("sigma", c.sigma.to_string()));
            if let Some(s) = c.s {
                kv.push(("s", s.to_string()));
            }
        }
        if let Some(c0) = self.c0 {
            kv.push(("c0", c0.to_string()));
        }
        if let Some(c) = self.c {
            kv.push(("c", c.to_string()));
        }
        kv
    }
}

impl fmt::Display for ConstructionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kv = self.to_kv();
        for (i, (k, v)) in kv.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
