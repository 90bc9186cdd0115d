//! The alteration step shared by both constructions: count violated sets,
//! fail if the count reaches the budget, otherwise delete one column from
//! each and re-verify.

use crate::error::{Error, Result};
use crate::matrix::PoolingMatrix;
use crate::plan::ConstructionPlan;
use crate::verify::{
    delete_violated_columns, deletion_set, find_violated_sets_par, verify_disjunct,
    verify_inclusive, ViolationWitness,
};

/// Number of witnesses kept in a [`FailReport`].
pub const FAIL_WITNESSES: usize = 10;

#[derive(Debug, Clone)]
pub struct Construction {
    /// The altered matrix.
    pub matrix: PoolingMatrix,
    pub pre_deletion: PoolingMatrix,
    pub violated: Vec<ViolationWitness>,
    /// Deleted column indices of `pre_deletion`, ascending.
    pub deleted: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FailReport {
    pub violated: usize,
    pub budget: f64,
    pub witnesses: Vec<ViolationWitness>,
    pub pre_deletion: PoolingMatrix,
}

#[derive(Debug, Clone)]
pub enum ConstructionOutcome {
    Success(Construction),
    Fail(FailReport),
}

impl ConstructionOutcome {
    pub fn success(&self) -> Option<&Construction> {
        match self {
            ConstructionOutcome::Success(c) => Some(c),
            ConstructionOutcome::Fail(_) => None,
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, ConstructionOutcome::Fail(_))
    }
}

pub fn alter(
    matrix: PoolingMatrix,
    plan: &ConstructionPlan,
    threads: usize,
) -> Result<ConstructionOutcome> {
    let violated = find_violated_sets_par(&matrix, plan.big_d, plan.r, plan.z, plan.y, threads)?;
    if violated.len() as f64 >= plan.budget {
        return Ok(ConstructionOutcome::Fail(FailReport {
            violated: violated.len(),
            budget: plan.budget,
            witnesses: violated.iter().take(FAIL_WITNESSES).cloned().collect(),
            pre_deletion: matrix,
        }));
    }
    let altered = delete_violated_columns(&matrix, &violated)?;
    if altered.cols() >= plan.big_d + plan.r {
        let dis = verify_disjunct(&altered, plan.big_d, plan.r, plan.z)?;
        let inc = verify_inclusive(&altered, plan.big_d, plan.r, plan.y)?;
        if !dis.is_pass() || !inc.is_pass() {
            return Err(Error::Consistency(
                "altered matrix still has a violated set".into(),
            ));
        }
    }
    let deleted = deletion_set(&violated).into_iter().collect();
    Ok(ConstructionOutcome::Success(Construction {
        matrix: altered,
        pre_deletion: matrix,
        violated,
        deleted,
    }))
}
