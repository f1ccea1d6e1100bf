//! Networks whose realization is the MLP estimator `x ↦ X_n^{θ,x}(t)` or the
//! Monte-Carlo payoff `x ↦ (1/K) Σ_i f(X_n^{(i),x}(T))` for the fixed noise
//! realization of a [`NoiseTree`].
//!
//! Level `n ≥ 1` is the `⊞`-sum of
//! - an identity network with `n(L_μ − 1) + 3` entries, shifted by
//!   `W^θ(⌊t⌋) + t μ(0,0)`;
//! - for each `ℓ ∈ 1..n` and `k ∈ 1..=m^{n−ℓ}`, the networks
//!   `Φ_μ ∘ Id_{2d} ∘ (Φ_ℓ^θ(s) ⊡ Φ_ℓ^c(s))` and
//!   `Φ_μ ∘ Id_{2d} ∘ (Φ_{ℓ−1}^θ(s) ⊡ Φ_{ℓ−1}^c(s))`, with identity padding
//!   chosen so every summand has the same depth, and weights `±t/m^{n−ℓ}`.
//!
//! Every node is built independently (no sharing of identical sub-networks),
//! so the reported widths are those of the duplicated construction.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::calculus::{affine_wrap, compose, extend_depth, identity_network, merge, scaled_sum, zero_network};
use crate::mlp::{check_tree, checked_pow, NoiseTree, PathCache, TestProblem, ThetaIndex};
use crate::network::NeuralNetwork;
use crate::{Error, Result};

/// A synthesized network with its measured and predicted sizes.
#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub network: NeuralNetwork,
    pub depth: usize,
    pub width_supnorm: usize,
    pub param_count: u64,
    pub predicted_depth: usize,
    pub predicted_width_bound: u64,
}

impl SynthesisReport {
    fn new(network: NeuralNetwork, predicted_depth: usize, predicted_width_bound: u64) -> Self {
        let dims = network.dims();
        Self {
            depth: dims.len(),
            width_supnorm: dims.supnorm(),
            param_count: dims.param_count(),
            network,
            predicted_depth,
            predicted_width_bound,
        }
    }

    pub fn depth_ok(&self) -> bool {
        self.depth == self.predicted_depth
    }

    pub fn width_ok(&self) -> bool {
        self.width_supnorm as u64 <= self.predicted_width_bound
    }
}

/// Depth `n(L_μ − 1) + 3` of `Φ_n`, `L_μ = dim D(Φ_μ)`.
pub fn mlp_depth(mu_depth: usize, n: usize) -> usize {
    n * (mu_depth - 1) + 3
}

/// Depth `L_f + n(L_μ − 1) + 2` of `Ψ_{K,n}`.
pub fn mc_depth(f_depth: usize, mu_depth: usize, n: usize) -> usize {
    f_depth + n * (mu_depth - 1) + 2
}

/// Smallest integer `c` with `2c ≥ max{4d, ⦀D(Φ_μ)⦀}`.
pub fn mlp_width_constant(problem: &TestProblem) -> u64 {
    let top = (4 * problem.dim()).max(problem.mu_net().dims().supnorm()) as u64;
    top.div_ceil(2)
}

/// `c = max{4d, ⦀D(Φ_μ)⦀, ⦀D(Φ_f)⦀}`.
pub fn mc_width_constant(problem: &TestProblem) -> u64 {
    (4 * problem.dim()).max(problem.mu_net().dims().supnorm()).max(problem.f_net().dims().supnorm()) as u64
}

fn width_bound(c: u64, m: usize, n: usize) -> u64 {
    let base = 5u64.saturating_mul(m as u64);
    (0..n).fold(c, |acc, _| acc.saturating_mul(base))
}

/// Identity padding before `Φ_μ` in a correction term of level `n`, as the
/// number of entries `p` of `𝔫^{2d}_p`: `(n − ℓ)(L_μ − 1) − L_μ + 2` for the
/// level-`ℓ` pair, `(n + 1 − ℓ)(L_μ − 1) − L_μ + 2` for the level-`ℓ−1` pair.
/// `p = 1` means no padding.
fn padding(levels_above: usize, mu_depth: usize) -> usize {
    levels_above * (mu_depth - 1) + 2 - mu_depth
}

struct Builder<'a> {
    problem: &'a TestProblem,
    tree: &'a NoiseTree,
    m: usize,
    mu_depth: usize,
    mu00: Vec<f64>,
    cache: PathCache,
}

impl Builder<'_> {
    fn build(&mut self, theta: &ThetaIndex, n: usize, t: f64) -> Result<NeuralNetwork> {
        let d = self.problem.dim();
        if n == 0 {
            return zero_network(d, d);
        }
        let depth = mlp_depth(self.mu_depth, n);
        let w = self.tree.brownian_floor(&mut self.cache, theta, t, n)?;
        let shift: Vec<f64> = w.iter().zip(&self.mu00).map(|(wi, mi)| wi + t * mi).collect();
        let base = affine_wrap(&identity_network(d, depth - 2)?, 1.0, &vec![0.0; d], &shift)?;

        let mut terms = vec![base];
        let mut coeffs = vec![1.0];
        for l in 1..n {
            let reps = checked_pow(self.m, n - l).unwrap() as usize;
            let weight = t / reps as f64;
            for k in 1..=reps {
                let child = theta.child(n, k, l);
                let s = self.tree.uniform_time(&child) * t;
                let hi = self.correction(theta, &child, l, s, padding(n - l, self.mu_depth))?;
                terms.push(hi);
                coeffs.push(weight);
                let lo = self.correction(theta, &child, l - 1, s, padding(n + 1 - l, self.mu_depth))?;
                terms.push(lo);
                coeffs.push(-weight);
            }
        }
        let refs: Vec<&NeuralNetwork> = terms.iter().collect();
        scaled_sum(&refs, &coeffs)
    }

    /// `Φ_μ ∘ Id ∘ (Φ_level^θ(s) ⊡ Φ_level^child(s))` with `pad` identity entries.
    fn correction(
        &mut self,
        theta: &ThetaIndex,
        child: &ThetaIndex,
        level: usize,
        s: f64,
        pad: usize,
    ) -> Result<NeuralNetwork> {
        let own = self.build(theta, level, s)?;
        let other = self.build(child, level, s)?;
        let pair = extend_depth(&merge(&[&own, &other])?, pad - 1);
        compose(self.problem.mu_net(), &pair)
    }
}

/// `Φ^θ_{n,t}` with `R(Φ^θ_{n,t})(x) = X_n^{θ,x}(t)` for the tree's realization.
pub fn synthesize_mlp_network(
    problem: &TestProblem,
    tree: &NoiseTree,
    theta: &ThetaIndex,
    n: usize,
    m: usize,
    t: f64,
) -> Result<SynthesisReport> {
    check_tree(problem, tree, n, m)?;
    if !(0.0..=problem.horizon()).contains(&t) {
        return Err(Error::TimeOutOfRange { t, horizon: problem.horizon() });
    }
    let mut b = builder(problem, tree, m);
    let net = b.build(theta, n, t)?;
    let mu_depth = problem.mu_net().depth();
    Ok(SynthesisReport::new(net, mlp_depth(mu_depth, n), width_bound(mlp_width_constant(problem), m, n)))
}

fn builder<'a>(problem: &'a TestProblem, tree: &'a NoiseTree, m: usize) -> Builder<'a> {
    Builder {
        problem,
        tree,
        m,
        mu_depth: problem.mu_net().depth(),
        mu00: problem.mu_at_origin(),
        cache: PathCache::new(),
    }
}

/// `Ψ_{K,n}` with `R(Ψ_{K,n})(x) = (1/K) Σ_{i=1}^K f(X_n^{(i),x}(T))`.
pub fn synthesize_mc_network(
    problem: &TestProblem,
    tree: &NoiseTree,
    k: usize,
    n: usize,
    m: usize,
) -> Result<SynthesisReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    check_tree(problem, tree, n, m)?;
    let mut b = builder(problem, tree, m);
    let mut parts = Vec::with_capacity(k);
    for i in 1..=k {
        let phi = b.build(&ThetaIndex::sample(i as u64), n, problem.horizon())?;
        b.cache.clear();
        parts.push(compose(problem.f_net(), &phi)?);
    }
    let refs: Vec<&NeuralNetwork> = parts.iter().collect();
    let net = scaled_sum(&refs, &vec![1.0 / k as f64; k])?;
    let predicted_depth = mc_depth(problem.f_net().depth(), problem.mu_net().depth(), n);
    let bound = width_bound(mc_width_constant(problem), m, n).saturating_mul(k as u64);
    Ok(SynthesisReport::new(net, predicted_depth, bound))
}

/// Dimension vectors with arbitrary-precision entries, for networks far too
/// large to materialize. The operations mirror the constructions exactly.
pub mod symbolic {
    use super::*;

    pub type BigDims = Vec<BigUint>;

    fn big(v: usize) -> BigUint {
        BigUint::from(v)
    }

    pub fn from_usize(v: &[usize]) -> BigDims {
        v.iter().map(|&k| big(k)).collect()
    }

    /// `α ⊙ β`.
    pub fn compose(alpha: &BigDims, beta: &BigDims) -> BigDims {
        let mut v: BigDims = beta[..beta.len() - 1].to_vec();
        v.push(&beta[beta.len() - 1] + &alpha[0]);
        v.extend_from_slice(&alpha[1..]);
        v
    }

    /// `α ⊡ α`.
    pub fn merge_self(alpha: &BigDims) -> BigDims {
        let mut v: BigDims = alpha.iter().map(|k| k * 2u32).collect();
        v[0] = alpha[0].clone();
        v
    }

    /// Adds `reps` copies of `beta` to `acc` under `⊞`.
    pub fn sum_into(acc: &mut BigDims, beta: &BigDims, reps: &BigUint) {
        let last = acc.len() - 1;
        for (a, b) in acc[1..last].iter_mut().zip(&beta[1..last]) {
            *a += b * reps;
        }
    }

    /// Dims of [`extend_depth`](crate::calculus::extend_depth).
    pub fn extend(v: &BigDims, extra: usize) -> BigDims {
        let q = v[v.len() - 1].clone();
        let mut out: BigDims = v[..v.len() - 1].to_vec();
        out.extend(std::iter::repeat_n(&q * 2u32, extra));
        out.push(q);
        out
    }

    /// `D(Φ_n)` (independent of `θ` and `t`).
    pub fn mlp_dims(d: usize, mu_dims: &[usize], m: usize, n: usize) -> BigDims {
        let mu = from_usize(mu_dims);
        let mu_depth = mu_dims.len();
        let mut levels: Vec<BigDims> = vec![from_usize(&[d, 1, d])];
        for level in 1..=n {
            let depth = mlp_depth(mu_depth, level);
            let mut acc: BigDims = vec![big(2 * d); depth];
            acc[0] = big(d);
            acc[depth - 1] = big(d);
            for l in 1..level {
                let reps = BigUint::from(m).pow((level - l) as u32);
                let hi = compose(&mu, &extend(&merge_self(&levels[l]), padding(level - l, mu_depth) - 1));
                let lo = compose(&mu, &extend(&merge_self(&levels[l - 1]), padding(level + 1 - l, mu_depth) - 1));
                sum_into(&mut acc, &hi, &reps);
                sum_into(&mut acc, &lo, &reps);
            }
            levels.push(acc);
        }
        levels.swap_remove(n)
    }

    /// `D(Ψ_{K,n})`.
    pub fn mc_dims(d: usize, mu_dims: &[usize], f_dims: &[usize], m: usize, n: usize, k: &BigUint) -> BigDims {
        let one = compose(&from_usize(f_dims), &mlp_dims(d, mu_dims, m, n));
        let mut acc = one.clone();
        let extra = k - BigUint::one();
        if !extra.is_zero() {
            sum_into(&mut acc, &one, &extra);
        }
        acc
    }

    /// `Σ k_i (k_{i−1} + 1)`.
    pub fn param_count(v: &BigDims) -> BigUint {
        v.windows(2).map(|w| &w[1] * (&w[0] + 1u32)).sum()
    }

    pub fn supnorm(v: &BigDims) -> BigUint {
        v.iter().max().cloned().unwrap_or_default()
    }

    /// Natural log of a big integer, accurate to double precision.
    pub fn ln(v: &BigUint) -> f64 {
        if let Some(f) = v.to_f64().filter(|f| f.is_finite() && *f < 1e300) {
            return f.ln();
        }
        let bits = v.bits();
        let shift = bits - 60;
        let top = (v >> shift).to_f64().unwrap();
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{mlp_estimate_batch, monte_carlo_payoff_batch};
    use crate::numeric::rel_close;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probes(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
    }

    #[test]
    fn level_zero_is_zero_network() {
        let p = TestProblem::clip_mean_reversion(2, 1.0).unwrap();
        let tree = NoiseTree::new(1, 1.0, 2, 2, 2).unwrap();
        let rep = synthesize_mlp_network(&p, &tree, &ThetaIndex::root(), 0, 2, 1.0).unwrap();
        assert_eq!(rep.depth, 3);
        assert!(rep.depth_ok() && rep.width_ok());
        assert_eq!(rep.network.realize(&[5.0, -2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn level_one_is_shifted_identity() {
        let p = TestProblem::linear(2, 0.5, 0.25, 1.0).unwrap();
        let tree = NoiseTree::new(3, 1.0, 2, 2, 2).unwrap();
        let th = ThetaIndex::sample(4);
        let rep = synthesize_mlp_network(&p, &tree, &th, 1, 2, 0.6).unwrap();
        let zero = rep.network.realize(&[0.0, 0.0]).unwrap();
        let w = tree.brownian_at(&th, 0.5).unwrap();
        let mu00 = p.mu_at_origin();
        for i in 0..2 {
            assert!((zero[i] - (w[i] + 0.6 * mu00[i])).abs() < 1e-15);
        }
        let x = [1.5, -0.25];
        let at_x = rep.network.realize(&x).unwrap();
        for i in 0..2 {
            assert!((at_x[i] - x[i] - zero[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn level_two_matches_estimator() {
        for d in [1, 3] {
            let p = TestProblem::clip_mean_reversion(d, 1.0).unwrap();
            let tree = NoiseTree::new(11, 1.0, d, 2, 2).unwrap();
            let th = ThetaIndex::sample(1);
            let rep = synthesize_mlp_network(&p, &tree, &th, 2, 2, 0.9).unwrap();
            assert!(rep.depth_ok() && rep.width_ok());
            let xs = probes(d, 20, d as u64);
            let want = mlp_estimate_batch(&p, &tree, &th, 2, 2, 0.9, &xs).unwrap();
            for (x, w) in xs.iter().zip(&want) {
                let got = rep.network.realize(x).unwrap();
                for (g, v) in got.iter().zip(w) {
                    assert!(rel_close(*g, *v, 1e-8), "{g} vs {v}");
                }
            }
        }
    }

    #[test]
    fn mc_network_examples() {
        let p = TestProblem::clip_mean_reversion(2, 1.0).unwrap();
        let tree = NoiseTree::new(2, 1.0, 2, 2, 2).unwrap();
        let rep = synthesize_mc_network(&p, &tree, 1, 0, 2).unwrap();
        let f0 = p.f(&[0.0, 0.0]).unwrap();
        assert_eq!(rep.network.realize(&[1.0, 3.0]).unwrap(), vec![f0]);

        for n in 0..=2 {
            for k in [1, 2, 5] {
                let rep = synthesize_mc_network(&p, &tree, k, n, 2).unwrap();
                assert_eq!(rep.depth, mc_depth(p.f_net().depth(), p.mu_net().depth(), n));
                assert!(rep.width_ok());
            }
        }

        let rep = synthesize_mc_network(&p, &tree, 4, 2, 2).unwrap();
        let xs = probes(2, 20, 99);
        let want = monte_carlo_payoff_batch(&p, &tree, 4, 2, 2, &xs).unwrap();
        for (x, w) in xs.iter().zip(&want) {
            assert!(rel_close(rep.network.realize(x).unwrap()[0], *w, 1e-8));
        }
    }

    #[test]
    fn symbolic_dims_match_constructed() {
        let p = TestProblem::clip_mean_reversion(2, 1.0).unwrap();
        for m in 1..=3 {
            for n in 0..=3 {
                let tree = NoiseTree::new(0, 1.0, 2, m, n).unwrap();
                let phi = synthesize_mlp_network(&p, &tree, &ThetaIndex::root(), n, m, 1.0).unwrap();
                let sym = symbolic::mlp_dims(2, p.mu_net().dims().as_slice(), m, n);
                assert_eq!(sym, symbolic::from_usize(phi.network.dims().as_slice()), "m={m} n={n}");
                if n <= 2 {
                    let psi = synthesize_mc_network(&p, &tree, 3, n, m).unwrap();
                    let sym = symbolic::mc_dims(
                        2,
                        p.mu_net().dims().as_slice(),
                        p.f_net().dims().as_slice(),
                        m,
                        n,
                        &BigUint::from(3u32),
                    );
                    assert_eq!(sym, symbolic::from_usize(psi.network.dims().as_slice()));
                    assert_eq!(symbolic::param_count(&sym), BigUint::from(psi.param_count));
                }
            }
        }
    }

    #[test]
    fn big_ln_is_accurate() {
        let v = BigUint::from(10u32).pow(400);
        assert!((symbolic::ln(&v) - 400.0 * 10f64.ln()).abs() < 1e-9);
        assert!((symbolic::ln(&BigUint::from(12345u32)) - 12345f64.ln()).abs() < 1e-12);
    }
}
