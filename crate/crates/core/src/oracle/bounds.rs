//! Empirical checks of the moment, perturbation and MLP error bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::particles::{simulate_particles, ParticleConfig};
use crate::mlp::{mlp_estimate, NoiseTree, PerturbedPair, TestProblem, ThetaIndex};
use crate::numeric::{lq_norm_with_se, norm2, Z_99};
use crate::{Error, Result};

/// One bound evaluated against a Monte-Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckResult {
    pub name: String,
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    /// `empirical <= bound`.
    pub satisfied: bool,
    pub samples: usize,
}

impl BoundCheckResult {
    pub fn new(name: impl Into<String>, empirical: f64, std_error: f64, bound: f64, samples: usize) -> Self {
        Self { name: name.into(), empirical, std_error, bound, satisfied: empirical <= bound, samples }
    }

    /// One-sided 99% check: `empirical + z_{0.99} · se <= bound`.
    pub fn satisfied_at_99(&self) -> bool {
        self.empirical + Z_99 * self.std_error <= self.bound
    }
}

/// `√(t (d + 2pr))`.
pub fn brownian_moment_bound(d: usize, p: u32, r: u32, t: f64) -> f64 {
    (t * (d as f64 + 2.0 * (p * r) as f64)).sqrt()
}

/// `(E‖W(t)‖^{pr})^{1/pr}` over `samples` independent paths of the noise
/// tree, against `√(t (d + 2pr))`.
pub fn check_brownian_moment(d: usize, p: u32, r: u32, t: f64, samples: usize, seed: u64) -> Result<BoundCheckResult> {
    let tree = NoiseTree::new(seed, t, d, 1, 0)?;
    let norms: Vec<f64> = (1..=samples as u64)
        .map(|i| tree.brownian_at(&ThetaIndex::sample(i), t).map(|w| norm2(&w)))
        .collect::<Result<_>>()?;
    let (est, se) = lq_norm_with_se(&norms, (p * r) as f64);
    Ok(BoundCheckResult::new(
        format!("brownian_lpr_d{d}_p{p}_r{r}"),
        est,
        se,
        brownian_moment_bound(d, p, r, t),
        samples,
    ))
}

/// `(‖x‖ + T‖μ(0,0)‖ + √(T(d+2pr))) e^{cT}`.
pub fn moment_bound(problem: &TestProblem, x: &[f64], p: u32) -> f64 {
    let t = problem.horizon();
    (norm2(x) + t * norm2(&problem.mu_at_origin()) + brownian_moment_bound(problem.dim(), p, problem.r(), t))
        * (problem.c() * t).exp()
}

/// `‖X(T)‖_{L^{pr}}` of the particle system against [`moment_bound`].
pub fn check_moment_bound(problem: &TestProblem, cfg: &ParticleConfig, x: &[f64], p: u32) -> Result<BoundCheckResult> {
    let cloud = simulate_particles(problem, cfg, x)?;
    let norms: Vec<f64> = cloud.iter().map(norm2).collect();
    let (est, se) = lq_norm_with_se(&norms, (p * problem.r()) as f64);
    Ok(BoundCheckResult::new(format!("moment_p{p}"), est, se, moment_bound(problem, x, p), cloud.len()))
}

/// Right-hand sides of the state and payoff perturbation bounds.
pub fn perturbation_bounds(pair: &PerturbedPair, x: &[f64], p: u32) -> (f64, f64) {
    let base = &pair.base;
    let t = base.horizon();
    let (c, r) = (base.c(), base.r() as i32);
    let bm = brownian_moment_bound(base.dim(), p, base.r(), t);
    let mu0 = norm2(&base.mu_at_origin());
    let mue = norm2(&pair.perturbed.mu_at_origin());
    let be = pair.b * pair.eps;
    let state = t * be * (1.0 + norm2(x) + t * mu0 + bm).powi(r) * ((r as f64 + 1.0) * c * t).exp();
    let payoff = be * (1.0 + norm2(x) + t * mu0.max(mue) + bm).powi(r) * ((r as f64 + 2.0) * c * t).exp();
    (state, payoff)
}

/// Coupled particle runs of the base and perturbed problems: `‖X^ε − X^0‖_{L^p}`
/// and `‖f_ε(X^ε) − f_0(X^0)‖_{L^p}` against their bounds.
pub fn check_perturbation_bounds(
    pair: &PerturbedPair,
    cfg: &ParticleConfig,
    x: &[f64],
    p: u32,
) -> Result<(BoundCheckResult, BoundCheckResult)> {
    let c0 = simulate_particles(&pair.base, cfg, x)?;
    let ce = simulate_particles(&pair.perturbed, cfg, x)?;
    let diffs: Vec<f64> = c0
        .iter()
        .zip(ce.iter())
        .map(|(a, b)| norm2(&a.iter().zip(b).map(|(u, v)| u - v).collect::<Vec<_>>()))
        .collect();
    let f0 = c0.payoffs(&pair.base)?;
    let fe = ce.payoffs(&pair.perturbed)?;
    let fdiffs: Vec<f64> = f0.iter().zip(&fe).map(|(a, b)| a - b).collect();
    let (state_bound, payoff_bound) = perturbation_bounds(pair, x, p);
    let (s_est, s_se) = lq_norm_with_se(&diffs, p as f64);
    let (f_est, f_se) = lq_norm_with_se(&fdiffs, p as f64);
    Ok((
        BoundCheckResult::new(
            format!("perturbation_state_eps{}_p{p}", pair.eps),
            s_est,
            s_se,
            state_bound,
            diffs.len(),
        ),
        BoundCheckResult::new(
            format!("perturbation_payoff_eps{}_p{p}", pair.eps),
            f_est,
            f_se,
            payoff_bound,
            fdiffs.len(),
        ),
    ))
}

/// `c e^{m/2} / m^{n/2} · [‖x‖ + c d^c] · e^{3cTn}`.
pub fn mlp_error_bound(problem: &TestProblem, n: usize, m: usize, x: &[f64]) -> f64 {
    let c = problem.c();
    let d = problem.dim() as f64;
    let (n, m) = (n as f64, m as f64);
    c * (m / 2.0).exp() / m.powf(n / 2.0) * (norm2(x) + c * d.powf(c)) * (3.0 * c * problem.horizon() * n).exp()
}

/// Checks on random points that `μ(x, y)` does not depend on `x`.
fn drift_ignores_own_state(problem: &TestProblem) -> Result<bool> {
    let d = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..16 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x2: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        if problem.mu(&x, &y)? != problem.mu(&x2, &y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// RMS over `seeds` noise trees of `f(X_n^{(1),x}(T)) − f(X^{(1),x}(T))`, where
/// the exact solution driven by the same Brownian motion `W^{(1)}` is
/// `X(T) = E[X(T)] + W^{(1)}(T)`.
///
/// That identity holds exactly when the drift depends only on the independent
/// copy (`μ(x, y) = g(y)`); `E[X(T)]` comes from the particle system. Other
/// drifts are rejected.
pub fn check_mlp_error(
    problem: &TestProblem,
    cfg: &ParticleConfig,
    n: usize,
    m: usize,
    x: &[f64],
    seeds: u64,
) -> Result<BoundCheckResult> {
    if !drift_ignores_own_state(problem)? {
        return Err(Error::InvalidArgument(format!(
            "{}: pathwise MLP reference needs a drift independent of the own state",
            problem.id()
        )));
    }
    let t = problem.horizon();
    let mean = simulate_particles(problem, cfg, x)?.mean();
    let theta = ThetaIndex::sample(1);
    let mut errs = Vec::with_capacity(seeds as usize);
    for s in 0..seeds {
        let tree = NoiseTree::new(s, t, problem.dim(), m, n)?;
        let est = mlp_estimate(problem, &tree, &theta, n, m, t, x)?;
        let w = tree.brownian_at(&theta, t)?;
        let exact: Vec<f64> = mean.iter().zip(&w).map(|(a, b)| a + b).collect();
        errs.push(problem.f(&est)? - problem.f(&exact)?);
    }
    let (est, se) = lq_norm_with_se(&errs, 2.0);
    Ok(BoundCheckResult::new(format!("mlp_error_n{n}_m{m}"), est, se, mlp_error_bound(problem, n, m, x), errs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlp_error_bound_hand_value() {
        let p = TestProblem::linear_default(1, 1.0).unwrap();
        let v = mlp_error_bound(&p, 2, 2, &[0.0]);
        assert!((v - 7f64.exp() / 2.0).abs() < 1e-9);
        assert!((v - 548.3).abs() < 0.1);
    }

    #[test]
    fn mlp_error_bound_eventually_decreases() {
        let p = TestProblem::linear_default(1, 0.1).unwrap();
        let vals: Vec<f64> = (5..40).map(|n| mlp_error_bound(&p, n, n, &[0.0])).collect();
        assert!(vals.windows(2).skip(10).all(|w| w[1] < w[0]));
    }

    #[test]
    fn moment_bound_hand_value() {
        // μ ≡ 0, x = 0, p = 2, r = 1, d = 1, T = 1: √5 · e.
        let p = TestProblem::driftless(1, 1.0).unwrap();
        assert!((moment_bound(&p, &[0.0], 2) - 5f64.sqrt() * 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn driftless_moment_is_satisfied() {
        let p = TestProblem::driftless(1, 1.0).unwrap();
        let cfg = ParticleConfig::new(2000, 20, 4, 3).unwrap();
        let r = check_moment_bound(&p, &cfg, &[0.0], 2).unwrap();
        assert!(r.satisfied_at_99());
        // E[W(1)^2]^{1/2} = 1.
        assert!((r.empirical - 1.0).abs() < 4.0 * r.std_error.max(0.01));
    }

    #[test]
    fn zero_perturbation_gives_zero_difference() {
        let pair = PerturbedPair::linear(2, 0.0, -0.5, 1.0, 0.0).unwrap();
        let cfg = ParticleConfig::new(200, 20, 8, 1).unwrap();
        let (s, f) = check_perturbation_bounds(&pair, &cfg, &[0.5, -0.5], 2).unwrap();
        assert_eq!(s.empirical, 0.0);
        assert_eq!(f.empirical, 0.0);
        assert!(s.bound >= 0.0 && f.bound >= 0.0);
    }

    #[test]
    fn brownian_moment_small_sample() {
        let r = check_brownian_moment(3, 2, 1, 0.5, 5000, 7).unwrap();
        assert!(r.satisfied_at_99());
        // (E‖W‖^2)^{1/2} = √(t d).
        assert!((r.empirical - (1.5f64).sqrt()).abs() < 5.0 * r.std_error);
    }

    #[test]
    fn mlp_reference_rejects_state_dependent_drift() {
        let p = TestProblem::clip_mean_reversion(1, 1.0).unwrap();
        let cfg = ParticleConfig::new(10, 2, 2, 0).unwrap();
        assert!(check_mlp_error(&p, &cfg, 2, 2, &[0.0], 2).is_err());
    }
}
