//! Acceptance suite. Runs every criterion in sequence (timings included),
//! prints one PASS/FAIL line per criterion, and exits non-zero if any fail.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

use incdisjunct::alter::ConstructionOutcome;
use incdisjunct::cli::{bench_csv, parse_bench_csv, BenchConfig, BenchOp};
use incdisjunct::combin::Combinations;
use incdisjunct::derand::{
    derandomized_construct, exact_estimator_oracle, table_estimate, DerandOptions, PartialMatrix,
};
use incdisjunct::format::Metadata;
use incdisjunct::matrix::PoolingMatrix;
use incdisjunct::montecarlo::{monte_carlo_construct, RandomSource};
use incdisjunct::plan::{
    c0_constant, make_explicit_plan, plan_parameters, ConstructionPlan, DesignSpec, ExplicitParams,
};
use incdisjunct::sim::{decode_all, generate_outcomes_with_flips, Masking, Scenario};
use incdisjunct::tail::TailTable;
use incdisjunct::verify::{find_violated_sets, verify_disjunct, verify_inclusive, ViolationKind};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!(
            "{what} took {:.1}s, limit {limit_s}s",
            elapsed.as_secs_f64()
        )
    })
}

// ---------------------------------------------------------------- 1

/// Violated r-sets straight from the definitions, over column bitmasks.
/// Returns `(B, first A, deficit?)` with `A` the lexicographically smallest
/// violating set.
fn oracle_violations(
    rows: &[Vec<bool>],
    n: usize,
    dd: usize,
    r: usize,
    z: usize,
    y: usize,
) -> Vec<(Vec<usize>, Vec<usize>, bool)> {
    let cols_of = |mask: u32| (0..n).filter(|j| mask >> j & 1 == 1).collect::<Vec<_>>();
    let mut out = Vec::new();
    for bmask in 0u32..(1 << n) {
        if bmask.count_ones() as usize != r {
            continue;
        }
        let b = cols_of(bmask);
        let mut hits: Vec<(Vec<usize>, bool)> = Vec::new();
        for amask in 0u32..(1 << n) {
            if amask.count_ones() as usize != dd || amask & bmask != 0 {
                continue;
            }
            let a = cols_of(amask);
            let mut zc = 0;
            let mut yc = 0;
            for row in rows {
                if b.iter().all(|&j| row[j]) {
                    if a.iter().any(|&j| row[j]) {
                        yc += 1;
                    } else {
                        zc += 1;
                    }
                }
            }
            if zc < z || yc > y {
                hits.push((a, zc < z));
            }
        }
        if let Some(first) = hits.into_iter().min() {
            out.push((b, first.0, first.1));
        }
    }
    out.sort();
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut compared = 0;
    let mut violated_total = 0;
    for k in 0..200 {
        let t = rng.gen_range(1..=12);
        let n = rng.gen_range(4..=8);
        let density = rng.gen_range(0.2..0.8);
        let rows: Vec<Vec<bool>> = (0..t)
            .map(|_| (0..n).map(|_| rng.gen_bool(density)).collect())
            .collect();
        let m = PoolingMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        for dd in 1..=2 {
            for r in 1..=2 {
                let z = rng.gen_range(1..=t.max(2));
                let y = rng.gen_range(0..=t);
                let got: Vec<(Vec<usize>, Vec<usize>, bool)> = find_violated_sets(&m, dd, r, z, y)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|w| (w.b, w.a, w.kind == ViolationKind::DisjunctDeficit))
                    .collect();
                let want = oracle_violations(&rows, n, dd, r, z, y);
                ensure(got == want, || {
                    format!("matrix {k}, D={dd} r={r} z={z} y={y}: {got:?} vs {want:?}")
                })?;
                compared += 1;
                violated_total += want.len();
            }
        }
    }
    within(start.elapsed(), 10.0, "sweep")?;
    Ok(format!(
        "{compared} (matrix, D, r) cases, {violated_total} violated sets, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

/// `ln` of `2 (1+sigma)^(D+r) n^(D+r-1) / sigma * exp(-K t)` over its target
/// (`1`, or `t^-s`); the display holds iff this is `<= 0`.
fn display_margin(spec: &DesignSpec, n: f64) -> f64 {
    let dd = spec.d.max(spec.h) as f64;
    let r = spec.r as f64;
    let p = 1.0 - 2f64.powf(-(1.0 - spec.eps) / dd);
    let q2 = p.powf(r) * (1.0 - (1.0 - p).powf(dd));
    let k = spec.delta * spec.delta * q2 / (2.0 + spec.delta);
    let t = spec.t as f64;
    let lhs = 2f64.ln() + (dd + r) * (1.0 + spec.sigma).ln() + (dd + r - 1.0) * n.ln()
        - spec.sigma.ln()
        - k * t;
    lhs + spec.s.map_or(0.0, |s| s * t.ln())
}

fn criterion_2() -> Outcome {
    let plan = plan_parameters(&DesignSpec::new(1, 1, 1, 1000, 1)).map_err(|e| e.to_string())?;
    let p_ref = 1.0 - 2f64.powf(-0.5);
    ensure((plan.p - p_ref).abs() < 1e-12, || format!("p = {}", plan.p))?;
    ensure(plan.z == 156 && plan.y == 107, || {
        format!("z = {}, y = {}", plan.z, plan.y)
    })?;
    let c0_ref = ((1.0 - 0.5) * 2f64.ln() / 2.0) * (2f64.sqrt() - 1.0 - 0.25);
    let c0 = plan.c0.ok_or("no c0")?;
    ensure((c0 - c0_ref).abs() < 1e-12, || format!("c0 = {c0}"))?;
    ensure(
        (c0_constant(0.5, 0.25, 1) - 0.028_456_041_942_153_89).abs() < 1e-15,
        || "c0 differs from the high-precision value".into(),
    )?;
    ensure(plan.n == 1, || format!("n = {}", plan.n))?;

    let mut checked = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut attempts = 0;
    while checked < 20 {
        attempts += 1;
        ensure(attempts < 500, || "could not draw 20 feasible specs".into())?;
        let d = rng.gen_range(1..=2);
        let h = rng.gen_range(1..=2);
        let r = rng.gen_range(1..=2);
        let eps = rng.gen_range(0.2..0.8);
        let delta = rng.gen_range(0.05..0.9) * (2f64.powf(eps) - 1.0);
        let sigma = rng.gen_range(0.25..3.0);
        let s = rng.gen_bool(0.3).then(|| rng.gen_range(0.1..2.0));
        let t = rng.gen_range(2_000..200_000);
        let spec = DesignSpec {
            d,
            h,
            r,
            t,
            x: 1,
            eps,
            delta,
            sigma,
            s,
        };
        let Ok(plan) = plan_parameters(&spec) else {
            continue;
        };
        let n = plan.n as f64;
        ensure(display_margin(&spec, n) <= 0.0, || {
            format!("{spec:?}: fails at n = {n}")
        })?;
        ensure(display_margin(&spec, n + 1.0) > 0.0, || {
            format!("{spec:?}: still holds at n + 1 = {}", n + 1.0)
        })?;
        checked += 1;
    }
    Ok(format!(
        "worked example p={:.13} z=156 y=107 c0={c0:.15} n=1; display tight on {checked} specs",
        plan.p
    ))
}

// ---------------------------------------------------------------- 3

fn direct_cdf(trials: usize, q: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut coeff = BigUint::one();
    let mut total = 0.0;
    for l in 0..=k_max.min(trials) {
        if l > 0 {
            coeff = coeff * BigUint::from(trials - l + 1) / BigUint::from(l);
        }
        let c = coeff.to_f64().unwrap();
        total += c * q.powi(l as i32) * (1.0 - q).powi((trials - l) as i32);
        out.push(total);
    }
    out
}

/// `Pr[Bin(trials, q) >= k]` for `k = 0..=k_max`, each summed from the top.
fn direct_upper(trials: usize, q: f64, k_max: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(trials + 1);
    let mut coeff = BigUint::one();
    for l in 0..=trials {
        if l > 0 {
            coeff = coeff * BigUint::from(trials - l + 1) / BigUint::from(l);
        }
        pmf.push(coeff.to_f64().unwrap() * q.powi(l as i32) * (1.0 - q).powi((trials - l) as i32));
    }
    (0..=k_max)
        .map(|k| pmf.iter().skip(k).rev().sum::<f64>())
        .collect()
}

fn criterion_3() -> Outcome {
    let grids: [(usize, usize, usize, f64, f64); 6] = [
        (50, 12, 7, 0.2071067811865475, 0.0857864376269050),
        (200, 60, 40, 0.3, 0.15),
        (300, 48, 33, 0.21, 0.09),
        (500, 200, 200, 0.2071067811865475, 0.0857864376269050),
        (500, 150, 120, 0.05, 0.02),
        (400, 200, 180, 0.45, 0.4),
    ];
    let mut entries = 0usize;
    let mut worst = 0f64;
    for (t, z, y, q1, q2) in grids {
        let tab = TailTable::build(t, z, y, q1, q2).map_err(|e| e.to_string())?;
        for i in 0..=t {
            let c1 = direct_cdf(t - i, q1, z);
            let c2 = direct_cdf(t - i, q2, y);
            let look = |c: &[f64], k: usize| {
                if k < c.len() {
                    c[k]
                } else {
                    *c.last().unwrap()
                }
            };
            for z0 in 1..=z {
                let want = look(&c1, z - z0).min(1.0);
                let got = tab.s1(z0, i);
                let rel = (got - want).abs() / want.max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                ensure(rel <= 1e-12, || {
                    format!("s1({z0},{i}) t={t}: {got} vs {want}")
                })?;
                entries += 1;
            }
            let upper = direct_upper(t - i, q2, y + 1);
            for y0 in 0..=y {
                let want = look(&c2, y - y0).min(1.0);
                let got = tab.s2(y0, i);
                let rel = (got - want).abs() / want.max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                ensure(rel <= 1e-12, || {
                    format!("s2({y0},{i}) t={t}: {got} vs {want}")
                })?;
                let want = upper[y - y0 + 1];
                let got = tab.u2(y0, i);
                let rel = (got - want).abs() / want.max(f64::MIN_POSITIVE);
                ensure(rel <= 1e-12, || {
                    format!("u2({y0},{i}) t={t}: {got} vs {want}")
                })?;
                entries += 2;
            }
        }
    }
    Ok(format!(
        "{entries} entries, worst relative error {worst:.2e}"
    ))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0f64;
    let mut cases = 0;
    while cases < 50 {
        let dd = rng.gen_range(1..=2);
        let r = rng.gen_range(1..=2);
        let m = rng.gen_range(dd + r..=5);
        let t = rng.gen_range(2..=6);
        let z = rng.gen_range(1..=t);
        let y = rng.gen_range(0..t);
        let p = rng.gen_range(0.1..0.9);
        let plan = make_explicit_plan(&ExplicitParams {
            d: dd,
            h: rng.gen_range(1..=dd),
            r,
            t,
            m: m as u64,
            n: 1,
            z: z.max(y + 1),
            y,
            x: 1,
            p,
        })
        .map_err(|e| e.to_string())?;
        let full = PoolingMatrix::from_fn(t, m, |_, _| rng.gen_bool(0.5)).unwrap();
        let total = t * m;
        let determined = rng.gen_range(total.saturating_sub(20)..=total);
        let partial = PartialMatrix::prefix_of(&full, determined);
        let tab =
            TailTable::build(t, plan.z, plan.y, plan.q1, plan.q2).map_err(|e| e.to_string())?;
        let table = table_estimate(&partial, &plan, &tab).map_err(|e| e.to_string())?;
        let exact = exact_estimator_oracle(&partial, &plan).map_err(|e| e.to_string())?;
        worst = worst.max((table - exact).abs());
        ensure((table - exact).abs() <= 1e-9, || {
            format!("case {cases}: table {table} vs exact {exact} ({plan})")
        })?;
        cases += 1;
    }
    // the greedy walk itself, checked against brute force at every step
    // once 20 or fewer entries remain
    let plan = make_explicit_plan(&ExplicitParams {
        d: 1,
        h: 1,
        r: 1,
        t: 8,
        m: 4,
        n: 1,
        z: 3,
        y: 1,
        x: 2,
        p: 0.3,
    })
    .map_err(|e| e.to_string())?;
    let run = derandomized_construct(
        &plan,
        &DerandOptions {
            allow_over_budget: true,
            check_exact: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(run.exact_checks == 21, || {
        format!("{} exact checks", run.exact_checks)
    })?;
    Ok(format!(
        "{cases} partial matrices, max |table - exact| = {worst:.2e}; greedy walk matched at {} steps",
        run.exact_checks
    ))
}

// ---------------------------------------------------------------- 5

fn explicit(r: usize, t: usize, m: u64, n: u64, z: usize, y: usize, p: f64) -> ConstructionPlan {
    make_explicit_plan(&ExplicitParams {
        d: 1,
        h: 1,
        r,
        t,
        m,
        n,
        z,
        y,
        x: z - y,
        p,
    })
    .expect("valid explicit plan")
}

/// The explicit plans of criteria 5 and 7, with whether the initial
/// estimator is below the budget.
fn derand_plans() -> Vec<(&'static str, ConstructionPlan, bool)> {
    vec![
        (
            "D=1 r=1 t=300 m=24 p=0.18 z=26 y=21",
            explicit(1, 300, 24, 16, 26, 21, 0.18),
            true,
        ),
        (
            "D=1 r=1 t=300 m=24 p=0.3 z=48 y=33",
            explicit(1, 300, 24, 16, 48, 33, 0.3),
            false,
        ),
        (
            "D=1 r=2 t=400 m=14 p=0.35 z=20 y=17",
            explicit(2, 400, 14, 7, 20, 17, 0.35),
            false,
        ),
    ]
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for (name, plan, within_budget) in derand_plans() {
        let start = Instant::now();
        let run = derandomized_construct(
            &plan,
            &DerandOptions {
                allow_over_budget: !within_budget,
                check_direct: true,
                record_trace: true,
                ..Default::default()
            },
        )
        .map_err(|e| format!("{name}: {e}"))?;
        ensure(
            (run.initial_estimate < plan.budget) == within_budget,
            || {
                format!(
                    "{name}: initial estimator {} vs budget {}",
                    run.initial_estimate, plan.budget
                )
            },
        )?;
        ensure(run.trace.len() == plan.t * plan.m as usize, || {
            format!("{name}: short trace")
        })?;
        for w in run.trace.windows(2) {
            let (a, b) = (w[0].p_prev, w[1].p_prev);
            ensure(b <= a + 1e-9 * a.abs().max(f64::MIN_POSITIVE), || {
                format!(
                    "{name}: P_prev rose from {a} to {b} at ({}, {})",
                    w[1].row, w[1].col
                )
            })?;
        }
        for s in &run.trace {
            let p1 = s.p1_direct.ok_or("direct P(1) missing")?;
            let mixed = (1.0 - plan.p) * s.p0 + plan.p * p1;
            ensure((mixed - s.p_prev).abs() <= 1e-9 * s.p_prev.max(1.0), || {
                format!(
                    "{name}: identity off by {} at ({}, {})",
                    mixed - s.p_prev,
                    s.row,
                    s.col
                )
            })?;
        }
        let c = run
            .outcome
            .success()
            .ok_or_else(|| format!("{name}: construction FAIL"))?;
        ensure((c.violated.len() as f64) < plan.budget, || {
            format!("{name}: {} violated sets", c.violated.len())
        })?;
        ensure(
            verify_disjunct(&c.matrix, plan.big_d, plan.r, plan.z)
                .unwrap()
                .is_pass()
                && verify_inclusive(&c.matrix, plan.big_d, plan.r, plan.y)
                    .unwrap()
                    .is_pass(),
            || format!("{name}: altered matrix fails verification"),
        )?;
        within(start.elapsed(), 60.0, name)?;
        notes.push(format!(
            "[{name}: P {:.3} -> {:.3}, violated {}, n {}, {:.1}s{}]",
            run.initial_estimate,
            run.final_estimate,
            c.violated.len(),
            c.matrix.cols(),
            start.elapsed().as_secs_f64(),
            if within_budget {
                ""
            } else {
                ", over-budget start"
            }
        ));
    }
    Ok(notes.join(" "))
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.inc"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_incdisjunct"))
            .args([
                "construct",
                "--algo",
                "derand",
                "--t",
                "300",
                "--d",
                "1",
                "--h",
                "1",
                "--r",
                "1",
                "--m",
                "24",
                "--n",
                "16",
                "--z",
                "26",
                "--y",
                "21",
                "--x",
                "5",
                "--p",
                "0.18",
                "--out",
            ])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(files[0] == files[1], || "outputs differ".into())?;
    Ok(format!("two runs, {} identical bytes", files[0].len()))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for (name, plan, _) in derand_plans() {
        let mut successes = 0;
        for seed in 0..50 {
            let outcome = monte_carlo_construct(&plan, &mut RandomSource::new(seed), 1)
                .map_err(|e| e.to_string())?;
            if let ConstructionOutcome::Success(c) = outcome {
                successes += 1;
                let ok = c.matrix.cols() >= plan.big_d + plan.r
                    && verify_disjunct(&c.matrix, plan.big_d, plan.r, plan.z)
                        .unwrap()
                        .is_pass()
                    && verify_inclusive(&c.matrix, plan.big_d, plan.r, plan.y)
                        .unwrap()
                        .is_pass();
                ensure(ok, || {
                    format!("{name}, seed {seed}: output fails verification")
                })?;
            }
        }
        notes.push(format!("[{name}: {successes}/50 non-FAIL, all verified]"));
    }

    let spec = DesignSpec {
        s: Some(1.0),
        ..DesignSpec::new(1, 1, 1, 5000, 1)
    };
    let plan = plan_parameters(&spec).map_err(|e| e.to_string())?;
    ensure(plan.n >= 2, || {
        format!("high-probability plan has n = {}", plan.n)
    })?;
    let trials = 200u64;
    let mut fails = 0u64;
    for seed in 0..trials {
        let outcome = monte_carlo_construct(&plan, &mut RandomSource::new(1000 + seed), 1)
            .map_err(|e| e.to_string())?;
        match outcome {
            ConstructionOutcome::Fail(_) => fails += 1,
            ConstructionOutcome::Success(c) => {
                ensure(
                    find_violated_sets(&c.matrix, 1, 1, plan.z, plan.y)
                        .unwrap()
                        .is_empty(),
                    || format!("seed {seed}: unverified output"),
                )?;
            }
        }
    }
    let bound = (plan.t as f64).powf(-1.0);
    let dist = Binomial::new(bound, trials).map_err(|e| e.to_string())?;
    // Pr[X >= fails] under the bound
    let p_value = if fails == 0 { 1.0 } else { dist.sf(fails - 1) };
    ensure(p_value >= 0.01, || {
        format!("{fails}/{trials} failures, p-value {p_value:.2e} against 1/t^s = {bound}")
    })?;
    notes.push(format!(
        "[high-probability t={} s=1 n={} m={}: {fails}/{trials} FAIL, p-value {p_value:.3}]",
        plan.t, plan.n, plan.m
    ));
    Ok(notes.join(" "))
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let start = Instant::now();
    // D = 2, r = 1, x = 3 at t = 300 with 12 columns
    let plan = make_explicit_plan(&ExplicitParams {
        d: 2,
        h: 2,
        r: 1,
        t: 300,
        m: 12,
        n: 1,
        z: 13,
        y: 10,
        x: 3,
        p: 0.09,
    })
    .map_err(|e| e.to_string())?;
    let run = derandomized_construct(
        &plan,
        &DerandOptions {
            allow_over_budget: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let matrix = run
        .outcome
        .success()
        .ok_or("construction FAIL")?
        .matrix
        .clone();
    let meta = Metadata {
        d: 2,
        h: 2,
        r: 1,
        x: 3,
        z: 13,
        y: 10,
    };
    ensure(
        find_violated_sets(&matrix, 2, 1, 13, 10)
            .unwrap()
            .is_empty(),
        || "matrix not verified".into(),
    )?;
    let n = matrix.cols();
    ensure(n <= 12 && matrix.rows() <= 300, || format!("{n} columns"))?;

    let subsets = |k_max: usize, pool: &[usize]| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for k in 1..=k_max {
            for idx in Combinations::new(pool.len(), k) {
                out.push(idx.iter().map(|&i| pool[i]).collect());
            }
        }
        out
    };
    let all: Vec<usize> = (0..n).collect();
    let mut scenarios = 0usize;
    let mut wrong = 0usize;
    let (mut false_pos, mut false_neg) = (0usize, 0usize);
    for defs in subsets(meta.d, &all) {
        let rest: Vec<usize> = all.iter().copied().filter(|j| !defs.contains(j)).collect();
        let defs: Vec<Vec<usize>> = defs.iter().map(|&j| vec![j]).collect();
        for inhs in subsets(meta.h, &rest) {
            let inhs: Vec<Vec<usize>> = inhs.iter().map(|&j| vec![j]).collect();
            let sc = Scenario::new(matrix.clone(), meta, &defs, &inhs, 0, 0)
                .map_err(|e| e.to_string())?;
            for flip in std::iter::once(None).chain((0..matrix.rows()).map(Some)) {
                let flips: Vec<usize> = flip.into_iter().collect();
                let out = generate_outcomes_with_flips(&sc, Masking::All, &flips)
                    .map_err(|e| e.to_string())?;
                let declared =
                    decode_all(&matrix, &meta, &out.outcomes, 1).map_err(|e| e.to_string())?;
                let truth: BTreeSet<&Vec<usize>> = sc.defectives.iter().collect();
                let got: BTreeSet<&Vec<usize>> = declared.iter().collect();
                false_pos += got.difference(&truth).count();
                false_neg += truth.difference(&got).count();
                wrong += usize::from(got != truth);
                scenarios += 1;
            }
        }
    }
    ensure(wrong == 0, || {
        format!(
            "{wrong}/{scenarios} wrong, {false_pos} false positives, {false_neg} false negatives"
        )
    })?;
    within(start.elapsed(), 120.0, "sweep")?;
    Ok(format!(
        "t={} n={n} d=h=2 r=1 z=13 y=10 x=3: {scenarios} scenarios exact, 0 false pos, 0 false neg, {:.1}s",
        matrix.rows(),
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let cfg = BenchConfig {
        t: 200,
        d: 1,
        h: 1,
        r: 1,
        z: 14,
        y: 13,
        p: 0.16,
        op: BenchOp::Derand,
        reps: 3,
        seed: 0,
        threads: 1,
    };
    let (small, large) = (64u64, 128u64);
    let csv = bench_csv(&cfg, &[small, large]).map_err(|e| e.to_string())?;
    let rows = parse_bench_csv(&csv).map_err(|e| e.to_string())?;
    let median = |m: u64| {
        let mut v: Vec<f64> = rows
            .iter()
            .filter(|r| r.m == m)
            .map(|r| r.seconds)
            .collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (a, b) = (median(small), median(large));
    let factor = b / a;
    ensure((4.0..=16.0).contains(&factor), || {
        format!("m {small} -> {large}: {a:.3}s -> {b:.3}s, factor {factor:.2}")
    })?;
    Ok(format!(
        "t=200 m {small} -> {large}: median {a:.3}s -> {b:.3}s, factor {factor:.2} (3 reps each)"
    ))
}

fn main() {
    // the suite is a plain binary: silence the arguments cargo passes to
    // test harnesses, but honour a criterion filter like `acceptance 3`
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: [Criterion; 9] = [
        ("definition-oracle equivalence", criterion_1),
        ("parameter formulas", criterion_2),
        ("tail tables", criterion_3),
        ("estimator exactness", criterion_4),
        ("derandomization invariants", criterion_5),
        ("determinism", criterion_6),
        ("monte carlo", criterion_7),
        ("end-to-end group testing", criterion_8),
        ("complexity scaling", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.contains(&(k + 1)) {
            continue;
        }
        match f() {
            Ok(detail) => println!("criterion {} ({name}): PASS {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
