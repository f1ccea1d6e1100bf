//! From a target accuracy to a concrete network `Ψ_{d,ϵ}`: select the
//! certified parameters, synthesize, measure the `L²([0,1]^d)` error, retry
//! over noise seeds until the error is below `ϵ`.
//!
//! The certified choice `n = m = N_{d,ϵ}`, `K = N^N` is far too large to build
//! for every shipped configuration (`N ≥ 10` gives over `10^40` parameters).
//! Its exact size is still computed from the dimension recursion and compared
//! with the bound. When it exceeds the synthesis budget the pipeline walks a
//! ladder of small `(n = m, K)` configurations in order of size and returns
//! the first one whose measured error is below `ϵ`.

use num_bigint::BigUint;

use super::params::{ln_param_bound, select_epsilon, select_n};
use crate::mlp::{NoiseTree, TestProblem};
use crate::numeric::halton_points;
use crate::oracle::{particle_mean_payoff, ParticleConfig};
use crate::synthesis::{symbolic, synthesize_mc_network, SynthesisReport};
use crate::{Error, Result};

/// Source of `E[f(X^x(T))]` for the error integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    ClosedForm,
    /// One particle simulation per quadrature point.
    Particles(ParticleConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub delta: f64,
    pub l2_points: usize,
    /// Seeds tried per configuration.
    pub retry_budget: usize,
    pub base_seed: u64,
    /// Largest parameter count that is actually built.
    pub synthesis_budget: u64,
    pub ladder_max_level: usize,
    pub ladder_max_k: usize,
    pub reference: Reference,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            l2_points: 1024,
            retry_budget: 4,
            base_seed: 0,
            synthesis_budget: 20_000_000,
            ladder_max_level: 3,
            ladder_max_k: 64,
            reference: Reference::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineMode {
    /// Built with the certified `(N, N, N^N)`.
    Certified,
    /// Certified network over budget; built from the size ladder.
    Ladder,
}

impl PipelineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineMode::Certified => "certified",
            PipelineMode::Ladder => "ladder",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub eps_perturbation: f64,
    pub certified_n: u64,
    pub certified_ln_param_count: f64,
    pub ln_param_bound: f64,
    pub mode: PipelineMode,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub attempts: usize,
    pub l2_error: f64,
    pub report: SynthesisReport,
}

impl PipelineResult {
    pub fn ln_param_count(&self) -> f64 {
        (self.report.param_count as f64).ln()
    }
}

/// `(∫_{[0,1]^d} |R(Ψ)(x) − E[f(X^x(T))]|² dx)^{1/2}` on a Halton point set.
pub fn l2_error(net: &crate::NeuralNetwork, points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (x, r) in points.iter().zip(reference) {
        let v = net.realize(x)?[0];
        acc += (v - r) * (v - r);
    }
    Ok((acc / points.len() as f64).sqrt())
}

fn reference_values(problem: &TestProblem, points: &[Vec<f64>], reference: Reference) -> Result<Vec<f64>> {
    match reference {
        Reference::ClosedForm => points
            .iter()
            .map(|x| {
                problem.exact(x).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "{} has no closed form; configure a particle reference",
                        problem.id()
                    ))
                })
            })
            .collect(),
        Reference::Particles(cfg) => points.iter().map(|x| particle_mean_payoff(problem, &cfg, x)).collect(),
    }
}

/// Exact dims of `Ψ_{K,n}` with `m = n`.
fn predicted_dims(problem: &TestProblem, n: usize, m: usize, k: &BigUint) -> symbolic::BigDims {
    symbolic::mc_dims(problem.dim(), problem.mu_net().dims().as_slice(), problem.f_net().dims().as_slice(), m, n, k)
}

/// `(n = m, K)` configurations of the ladder, smallest parameter count first.
pub fn ladder(problem: &TestProblem, max_level: usize, max_k: usize) -> Vec<(usize, usize, u64)> {
    let mut rungs = Vec::new();
    for n in 1..=max_level {
        let mut k = 1;
        while k <= max_k {
            let dims = predicted_dims(problem, n, n, &BigUint::from(k));
            let p: u64 = symbolic::param_count(&dims).try_into().unwrap_or(u64::MAX);
            rungs.push((n, k, p));
            k *= 2;
        }
    }
    rungs.sort_by_key(|&(n, k, p)| (p, n, k));
    rungs
}

/// Runs the accuracy-to-network pipeline for `problem` at accuracy `epsilon`.
pub fn theorem_pipeline(problem: &TestProblem, epsilon: f64, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let (d, c, r, t) = (problem.dim(), problem.c(), problem.r(), problem.horizon());
    let eps_perturbation = select_epsilon(d, epsilon, c, r, t);
    let certified_n = select_n(d, epsilon, c, r, t)?;
    let big_n = BigUint::from(certified_n);
    let certified_k = big_n.pow(certified_n as u32);
    let certified_dims = predicted_dims(problem, certified_n as usize, certified_n as usize, &certified_k);
    let certified_count = symbolic::param_count(&certified_dims);
    let certified_ln_param_count = symbolic::ln(&certified_count);
    let ln_bound = ln_param_bound(d, epsilon, cfg.delta, c, r, t)?;

    let points = halton_points(d, cfg.l2_points);
    let reference = reference_values(problem, &points, cfg.reference)?;

    let certified_fits = certified_count <= BigUint::from(cfg.synthesis_budget);
    let (mode, rungs): (PipelineMode, Vec<(usize, usize)>) = if certified_fits {
        let k: u64 = (&certified_k).try_into().expect("fits within the synthesis budget");
        (PipelineMode::Certified, vec![(certified_n as usize, k as usize)])
    } else {
        let rungs = ladder(problem, cfg.ladder_max_level, cfg.ladder_max_k)
            .into_iter()
            .filter(|&(_, _, p)| p <= cfg.synthesis_budget)
            .map(|(n, k, _)| (n, k))
            .collect();
        (PipelineMode::Ladder, rungs)
    };

    let mut attempts = 0;
    let mut best = f64::INFINITY;
    for (n, k) in rungs {
        for a in 0..cfg.retry_budget {
            attempts += 1;
            let seed = cfg.base_seed.wrapping_add(a as u64);
            let tree = NoiseTree::new(seed, t, d, n, n)?;
            let report = synthesize_mc_network(problem, &tree, k, n, n)?;
            let err = l2_error(&report.network, &points, &reference)?;
            best = best.min(err);
            if err < epsilon {
                return Ok(PipelineResult {
                    d,
                    epsilon,
                    delta: cfg.delta,
                    eps_perturbation,
                    certified_n,
                    certified_ln_param_count,
                    ln_param_bound: ln_bound,
                    mode,
                    n,
                    m: n,
                    k,
                    seed,
                    attempts,
                    l2_error: err,
                    report,
                });
            }
        }
    }
    Err(Error::RetryBudgetExhausted { attempts, best_error: best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_sorted_and_complete() {
        let p = TestProblem::linear_default(2, 0.1).unwrap();
        let rungs = ladder(&p, 3, 64);
        assert_eq!(rungs.len(), 3 * 7);
        assert!(rungs.windows(2).all(|w| w[0].2 <= w[1].2));
        assert_eq!((rungs[0].0, rungs[0].1), (1, 1));
    }

    #[test]
    fn linear_d1_reaches_half() {
        let p = TestProblem::linear_default(1, 0.1).unwrap();
        let cfg = PipelineConfig { l2_points: 256, ..Default::default() };
        let res = theorem_pipeline(&p, 0.5, &cfg).unwrap();
        assert!(res.l2_error < 0.5);
        assert_eq!(res.mode, PipelineMode::Ladder);
        assert_eq!(res.certified_n, 10);
        assert!(res.ln_param_count() <= res.ln_param_bound);
        assert!(res.certified_ln_param_count <= res.ln_param_bound);
    }

    #[test]
    fn constant_problem_is_exact() {
        let p = TestProblem::constant(2, 0.3, 0.1).unwrap();
        let cfg = PipelineConfig { l2_points: 64, ..Default::default() };
        let res = theorem_pipeline(&p, 0.01, &cfg).unwrap();
        assert_eq!(res.l2_error, 0.0);
        assert_eq!(res.attempts, 1);
    }

    #[test]
    fn empty_budget_exhausts() {
        let p = TestProblem::linear_default(1, 0.1).unwrap();
        let cfg = PipelineConfig { l2_points: 32, synthesis_budget: 0, ..Default::default() };
        assert!(matches!(theorem_pipeline(&p, 0.5, &cfg), Err(Error::RetryBudgetExhausted { attempts: 0, .. })));
    }

    #[test]
    fn certified_size_is_never_small() {
        // Even at ϵ close to 1 and tiny T the certified level count is at least 6.
        assert!(select_n(1, 0.99, 1.0, 1, 1e-6).unwrap() >= 6);
    }
}
