//! The MLP recursion
//!
//! ```text
//! X_0^θ(t) = 0,
//! X_n^θ(t) = x + W^θ(⌊t⌋_{m^n}) + t μ(0,0)
//!          + Σ_{ℓ=1}^{n-1} Σ_{k=1}^{m^{n-ℓ}} t / m^{n-ℓ} · [ μ(X_ℓ^θ(s), X_ℓ^{c}(s)) − μ(X_{ℓ-1}^θ(s), X_{ℓ-1}^{c}(s)) ],
//! ```
//!
//! with `c = (θ, n, k, ℓ)` and `s = 𝔱^c t`, evaluated for a batch of starting
//! points at once so the noise is generated only once per node.

use super::noise::{checked_pow, PathCache};
use super::{NoiseTree, TestProblem, ThetaIndex};
use crate::network::Scratch;
use crate::{Error, Result};

pub(crate) fn check_tree(problem: &TestProblem, tree: &NoiseTree, n: usize, m: usize) -> Result<()> {
    if tree.dim() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: tree.dim() });
    }
    if tree.horizon() != problem.horizon() {
        return Err(Error::InvalidArgument(format!(
            "noise tree horizon {} differs from problem horizon {}",
            tree.horizon(),
            problem.horizon()
        )));
    }
    if m != tree.base() {
        return Err(Error::InvalidArgument(format!(
            "branching base {m} differs from the noise tree's grid base {}",
            tree.base()
        )));
    }
    if n > tree.grid_levels() {
        return Err(Error::LevelOverflow { level: n, grid_levels: tree.grid_levels() });
    }
    Ok(())
}

/// Recursive evaluator over one noise tree. Holds the Brownian path cache and
/// network scratch buffers.
pub struct MlpEvaluator<'a> {
    problem: &'a TestProblem,
    tree: &'a NoiseTree,
    m: usize,
    mu00: Vec<f64>,
    cache: PathCache,
    scratch: Scratch,
    pair_buf: Vec<f64>,
    mu_buf: Vec<f64>,
}

impl<'a> MlpEvaluator<'a> {
    pub fn new(problem: &'a TestProblem, tree: &'a NoiseTree, m: usize) -> Result<Self> {
        check_tree(problem, tree, 0, m)?;
        Ok(Self {
            problem,
            tree,
            m,
            mu00: problem.mu_at_origin(),
            cache: PathCache::new(),
            scratch: Scratch::default(),
            pair_buf: Vec::new(),
            mu_buf: Vec::new(),
        })
    }

    /// Drops cached Brownian paths.
    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }

    /// `X_n^θ(t)` for every starting point in `xs` (`P × d`, row-major).
    pub fn level(&mut self, theta: &ThetaIndex, n: usize, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let d = self.problem.dim();
        if !xs.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch { expected: d, got: xs.len() % d });
        }
        if n > self.tree.grid_levels() {
            return Err(Error::LevelOverflow { level: n, grid_levels: self.tree.grid_levels() });
        }
        if n == 0 {
            return Ok(vec![0.0; xs.len()]);
        }
        let mut out = xs.to_vec();
        let w = self.tree.brownian_floor(&mut self.cache, theta, t, n)?;
        for row in out.chunks_exact_mut(d) {
            for ((o, wi), mi) in row.iter_mut().zip(w).zip(&self.mu00) {
                *o += wi + t * mi;
            }
        }
        for l in 1..n {
            let reps = checked_pow(self.m, n - l).unwrap() as usize;
            let weight = t / reps as f64;
            for k in 1..=reps {
                let child = theta.child(n, k, l);
                let s = self.tree.uniform_time(&child) * t;
                let own_hi = self.level(theta, l, s, xs)?;
                let other_hi = self.level(&child, l, s, xs)?;
                let hi = self.mu_pairs(&own_hi, &other_hi)?;
                let own_lo = self.level(theta, l - 1, s, xs)?;
                let other_lo = self.level(&child, l - 1, s, xs)?;
                let lo = self.mu_pairs(&own_lo, &other_lo)?;
                for ((o, h), g) in out.iter_mut().zip(&hi).zip(&lo) {
                    *o += weight * (h - g);
                }
            }
        }
        Ok(out)
    }

    /// `μ(a_p, b_p)` for each row `p`.
    fn mu_pairs(&mut self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let d = self.problem.dim();
        self.pair_buf.clear();
        for (ra, rb) in a.chunks_exact(d).zip(b.chunks_exact(d)) {
            self.pair_buf.extend_from_slice(ra);
            self.pair_buf.extend_from_slice(rb);
        }
        self.problem.mu_net().realize_flat(&self.pair_buf, &mut self.scratch, &mut self.mu_buf)?;
        Ok(self.mu_buf.clone())
    }
}

fn flatten(xs: &[Vec<f64>], d: usize) -> Result<Vec<f64>> {
    let mut flat = Vec::with_capacity(xs.len() * d);
    for x in xs {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        flat.extend_from_slice(x);
    }
    Ok(flat)
}

/// `X_n^{θ,x}(t)` for one fixed noise realization.
pub fn mlp_estimate(
    problem: &TestProblem,
    tree: &NoiseTree,
    theta: &ThetaIndex,
    n: usize,
    m: usize,
    t: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    Ok(mlp_estimate_batch(problem, tree, theta, n, m, t, &[x.to_vec()])?.pop().unwrap())
}

/// [`mlp_estimate`] for several starting points sharing the noise.
pub fn mlp_estimate_batch(
    problem: &TestProblem,
    tree: &NoiseTree,
    theta: &ThetaIndex,
    n: usize,
    m: usize,
    t: f64,
    xs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    check_tree(problem, tree, n, m)?;
    if !(0.0..=problem.horizon()).contains(&t) {
        return Err(Error::TimeOutOfRange { t, horizon: problem.horizon() });
    }
    let d = problem.dim();
    let flat = flatten(xs, d)?;
    let mut ev = MlpEvaluator::new(problem, tree, m)?;
    let out = ev.level(theta, n, t, &flat)?;
    Ok(out.chunks_exact(d).map(<[f64]>::to_vec).collect())
}

/// `(1/K) Σ_{i=1}^K f(X_n^{(i),x}(T))`.
pub fn monte_carlo_payoff(
    problem: &TestProblem,
    tree: &NoiseTree,
    k: usize,
    n: usize,
    m: usize,
    x: &[f64],
) -> Result<f64> {
    Ok(monte_carlo_payoff_batch(problem, tree, k, n, m, &[x.to_vec()])?[0])
}

/// [`monte_carlo_payoff`] for several starting points sharing the noise.
pub fn monte_carlo_payoff_batch(
    problem: &TestProblem,
    tree: &NoiseTree,
    k: usize,
    n: usize,
    m: usize,
    xs: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let samples = payoff_samples_batch(problem, tree, k, n, m, xs)?;
    let mut acc = vec![0.0; xs.len()];
    for row in &samples {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Ok(acc.into_iter().map(|a| a / k as f64).collect())
}

/// `f(X_n^{(i),x}(T))` for `i = 1..=K` (outer) and each `x` (inner).
pub fn payoff_samples_batch(
    problem: &TestProblem,
    tree: &NoiseTree,
    k: usize,
    n: usize,
    m: usize,
    xs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    check_tree(problem, tree, n, m)?;
    let d = problem.dim();
    let flat = flatten(xs, d)?;
    let mut ev = MlpEvaluator::new(problem, tree, m)?;
    let mut scratch = Scratch::default();
    let mut fx = Vec::new();
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        let states = ev.level(&ThetaIndex::sample(i as u64), n, problem.horizon(), &flat)?;
        ev.clear_cache();
        problem.f_net().realize_flat(&states, &mut scratch, &mut fx)?;
        out.push(fx.clone());
    }
    Ok(out)
}
