//! Multilevel Picard approximations of McKean–Vlasov SDEs
//! `dX = E[μ(y, X)]|_{y = X} dt + dW` over a deterministic noise tree.

mod estimator;
mod noise;
mod problem;
mod theta;

pub(crate) use estimator::check_tree;
pub use estimator::{
    mlp_estimate, mlp_estimate_batch, monte_carlo_payoff, monte_carlo_payoff_batch, payoff_samples_batch, MlpEvaluator,
};
pub(crate) use noise::checked_pow;
pub use noise::{floor_to_grid, grid_floor_index, NoiseTree, PathCache};
pub use problem::{clip_coordinate_net, coordinate_net, linear_drift_net, ClosedForm, PerturbedPair, TestProblem};
pub use theta::ThetaIndex;

use crate::{Error, Result};

/// `(n, m, K, t)`: levels, branching base, Monte-Carlo count, evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub t: f64,
}

impl MlpParams {
    pub fn new(n: usize, m: usize, k: usize, t: f64) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!("need m >= 1 and K >= 1, got m={m}, K={k}")));
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
        }
        Ok(Self { n, m, k, t })
    }

    /// Checks `t <= T`.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        if self.t > horizon {
            return Err(Error::TimeOutOfRange { t: self.t, horizon });
        }
        Ok(())
    }

    /// A noise tree fine enough for these parameters.
    pub fn tree(&self, seed: u64, problem: &TestProblem) -> Result<NoiseTree> {
        NoiseTree::new(seed, problem.horizon(), problem.dim(), self.m, self.n)
    }
}
