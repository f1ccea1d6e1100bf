//! Euler–Maruyama for the interacting particle system
//!
//! ```text
//! X_i(t + h) = X_i(t) + h · (1/J) Σ_{j ∈ P_i} μ(X_i(t), X_j(t)) + (W_i(t + h) − W_i(t)),
//! ```
//!
//! whose mean-field limit is the McKean–Vlasov SDE. Each particle averages the
//! drift over a fixed random set `P_i` of `J` partners instead of all `M − 1`
//! others, which keeps a step `O(M J)`.
//!
//! Particle `i` draws its partners and Brownian increments from its own
//! ChaCha stream keyed by `(seed, i)`, so two problems simulated with the same
//! configuration are driven by common random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::mlp::TestProblem;
use crate::network::Scratch;
use crate::{Error, Result};

const DOMAIN_TAG: &[u8] = b"mkv-dnn/particles/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParticleConfig {
    pub particles: usize,
    pub euler_steps: usize,
    pub partners: usize,
    pub master_seed: u64,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self { particles: 10_000, euler_steps: 200, partners: 64, master_seed: 0 }
    }
}

impl ParticleConfig {
    pub fn new(particles: usize, euler_steps: usize, partners: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self { particles, euler_steps, partners, master_seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 || self.euler_steps == 0 || self.partners == 0 {
            return Err(Error::InvalidArgument(format!(
                "particle config needs M >= 2, steps >= 1, J >= 1; got M={}, steps={}, J={}",
                self.particles, self.euler_steps, self.partners
            )));
        }
        Ok(())
    }

    fn particle_rng(&self, i: usize) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(DOMAIN_TAG);
        h.update(self.master_seed.to_le_bytes());
        h.update((i as u64).to_le_bytes());
        ChaCha8Rng::from_seed(h.finalize().into())
    }
}

/// Terminal particle states, `M × d` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub d: usize,
    pub states: Vec<f64>,
}

impl ParticleCloud {
    pub fn len(&self) -> usize {
        self.states.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.states.chunks_exact(self.d)
    }

    /// Componentwise empirical mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.d];
        for row in self.iter() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        let n = self.len() as f64;
        acc.into_iter().map(|a| a / n).collect()
    }

    /// `f` evaluated at every particle.
    pub fn payoffs(&self, problem: &TestProblem) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        problem.f_net().realize_flat(&self.states, &mut Scratch::default(), &mut out)?;
        Ok(out)
    }
}

/// Particles started at `x` and run to `T`.
pub fn simulate_particles(problem: &TestProblem, cfg: &ParticleConfig, x: &[f64]) -> Result<ParticleCloud> {
    cfg.validate()?;
    let d = problem.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let m = cfg.particles;
    let j = cfg.partners;
    let h = problem.horizon() / cfg.euler_steps as f64;
    let sqrt_h = h.sqrt();

    let mut rngs: Vec<ChaCha8Rng> = (0..m).map(|i| cfg.particle_rng(i)).collect();
    let partners: Vec<usize> = rngs
        .iter_mut()
        .enumerate()
        .flat_map(|(i, rng)| {
            (0..j)
                .map(|_| {
                    // Uniform over the other M − 1 particles.
                    let p = rng.random_range(0..m - 1);
                    if p >= i {
                        p + 1
                    } else {
                        p
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut states: Vec<f64> = x.iter().copied().cycle().take(m * d).collect();
    let mut pairs = Vec::with_capacity(m * j * 2 * d);
    let mut drift = Vec::new();
    let mut scratch = Scratch::default();
    let inv_j = 1.0 / j as f64;
    for _ in 0..cfg.euler_steps {
        pairs.clear();
        for i in 0..m {
            let own = &states[i * d..(i + 1) * d];
            for &p in &partners[i * j..(i + 1) * j] {
                pairs.extend_from_slice(own);
                pairs.extend_from_slice(&states[p * d..(p + 1) * d]);
            }
        }
        problem.mu_net().realize_flat(&pairs, &mut scratch, &mut drift)?;
        for (i, rng) in rngs.iter_mut().enumerate() {
            let block = &drift[i * j * d..(i + 1) * j * d];
            for c in 0..d {
                let mean: f64 = block.iter().skip(c).step_by(d).sum::<f64>() * inv_j;
                let z: f64 = rng.sample(StandardNormal);
                states[i * d + c] += h * mean + sqrt_h * z;
            }
        }
    }
    Ok(ParticleCloud { d, states })
}

/// `(1/M) Σ_i f(X_i(T))`.
pub fn particle_mean_payoff(problem: &TestProblem, cfg: &ParticleConfig, x: &[f64]) -> Result<f64> {
    let cloud = simulate_particles(problem, cfg, x)?;
    let pay = cloud.payoffs(problem)?;
    Ok(pay.iter().sum::<f64>() / pay.len() as f64)
}
