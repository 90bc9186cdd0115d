//! Inclusive disjunct pooling designs for group testing with inhibitor
//! complexes: parameter planning, Monte Carlo and deterministic
//! constructions, exhaustive verification, and a decoding simulator.

pub mod alter;
pub mod cli;
pub mod combin;
pub mod derand;
pub mod error;
pub mod format;
pub mod matrix;
pub mod montecarlo;
pub mod plan;
pub mod sim;
pub mod tail;
pub mod verify;

pub use alter::{Construction, ConstructionOutcome, FailReport};
pub use derand::{derandomized_construct, DerandOptions, DerandRun};
pub use error::{Error, Result};
pub use format::{parse_incmat, write_incmat, IncMat, Metadata};
pub use matrix::PoolingMatrix;
pub use montecarlo::{monte_carlo_construct, RandomSource};
pub use plan::{make_explicit_plan, plan_parameters, ConstructionPlan, DesignSpec, ExplicitParams};
pub use verify::{find_violated_sets, verify_disjunct, verify_inclusive, Verdict};
