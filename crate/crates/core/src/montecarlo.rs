//! Monte Carlo construction: sample a `t x m` Bernoulli(p) matrix, then
//! apply the alteration step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alter::{alter, ConstructionOutcome};
use crate::error::{Error, Result};
use crate::matrix::PoolingMatrix;
use crate::plan::ConstructionPlan;

/// Seeded ChaCha8 stream. The same seed yields the same bits on every
/// platform.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// Draws each entry independently with `Pr[1] = p`, in row-major order.
pub fn sample_bernoulli_matrix(
    rows: usize,
    cols: usize,
    p: f64,
    rng: &mut RandomSource,
) -> Result<PoolingMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("p = {p} is not a probability")));
    }
    let mut m = PoolingMatrix::zeros(rows, cols)?;
    for i in 0..rows {
        for j in 0..cols {
            if rng.bernoulli(p) {
                m.set(i, j, true);
            }
        }
    }
    Ok(m)
}

pub fn sample_matrix(plan: &ConstructionPlan, rng: &mut RandomSource) -> Result<PoolingMatrix> {
    let cols = usize::try_from(plan.m).map_err(|_| Error::input("m does not fit in memory"))?;
    sample_bernoulli_matrix(plan.t, cols, plan.p, rng)
}

/// One attempt; `Fail` when the violated count reaches the plan's budget.
/// Callers decide whether to retry with another seed.
pub fn monte_carlo_construct(
    plan: &ConstructionPlan,
    rng: &mut RandomSource,
    threads: usize,
) -> Result<ConstructionOutcome> {
    if (plan.big_d + plan.r) as u64 > plan.m {
        return Err(Error::input(format!(
            "D + r = {} exceeds m = {}",
            plan.big_d + plan.r,
            plan.m
        )));
    }
    let matrix = sample_matrix(plan, rng)?;
    alter(matrix, plan, threads)
}
