//! The noise tree: uniforms `𝔱^θ` and Brownian paths `W^θ` as pure functions
//! of `(seed, θ)`.
//!
//! Every index is hashed together with the master seed into a 256-bit ChaCha
//! key. Stream 0 of that key yields `𝔱^θ`; stream 1 yields the Brownian
//! increments on the finest grid `{k T / m^G}`, in time-major order with `d`
//! normals per step. Because nothing depends on call order, any evaluation
//! schedule sees the same realization.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::ThetaIndex;
use crate::{Error, Result};

const DOMAIN_TAG: &[u8] = b"mkv-dnn/noise-tree/v1";
const STREAM_UNIFORM: u64 = 0;
const STREAM_BROWNIAN: u64 = 1;

/// Relative slack used when deciding that a time sits on a grid point.
const GRID_SNAP: f64 = 1e-12;

type Key = [u8; 32];

/// `(seed, m, G, T, d)`: the fixed realization `ω` and its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTree {
    seed: u64,
    horizon: f64,
    d: usize,
    m: usize,
    grid_levels: usize,
    fine_steps: u64,
}

/// Brownian paths already generated for this evaluation. Kept outside the
/// tree so the tree stays immutable and shareable; callers decide the cache
/// lifetime (typically one top-level Monte-Carlo sample).
#[derive(Debug, Default)]
pub struct PathCache {
    paths: HashMap<Key, Vec<f64>>,
}

impl PathCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.paths.clear();
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// `m^n` as an integer, if it fits.
pub(crate) fn checked_pow(m: usize, n: usize) -> Option<u64> {
    (m as u64).checked_pow(u32::try_from(n).ok()?)
}

/// Index `k` of the largest grid point `k T / m^n` not exceeding `t`.
///
/// Values within a relative `1e-12` of a grid point are snapped onto it so
/// that products like `(k T / m^n) · m^n / T` land on `k`.
pub fn grid_floor_index(t: f64, m: usize, n: usize, horizon: f64) -> Result<u64> {
    if !(horizon > 0.0) || m == 0 {
        return Err(Error::InvalidArgument(format!("need T > 0 and m >= 1, got T={horizon}, m={m}")));
    }
    if !(t >= 0.0 && t <= horizon * (1.0 + GRID_SNAP)) {
        return Err(Error::TimeOutOfRange { t, horizon });
    }
    let steps = checked_pow(m, n).ok_or_else(|| Error::InvalidArgument(format!("grid {m}^{n} overflows")))?;
    let r = t / horizon * steps as f64;
    let nearest = r.round();
    let k = if (r - nearest).abs() <= GRID_SNAP * r.max(1.0) { nearest } else { r.floor() };
    Ok((k as u64).min(steps))
}

/// `sup({k T / m^n : k ∈ ℕ_0} ∩ [0, t])`.
pub fn floor_to_grid(t: f64, m: usize, n: usize, horizon: f64) -> Result<f64> {
    let k = grid_floor_index(t, m, n, horizon)?;
    let steps = checked_pow(m, n).unwrap();
    if k == steps {
        return Ok(horizon);
    }
    Ok(k as f64 * horizon / steps as f64)
}

impl NoiseTree {
    /// Tree whose Brownian paths live on the grid `{k T / m^grid_levels}`.
    pub fn new(seed: u64, horizon: f64, d: usize, m: usize, grid_levels: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if d == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!("need d >= 1 and m >= 1, got d={d}, m={m}")));
        }
        let fine_steps = checked_pow(m, grid_levels)
            .filter(|&s| s.saturating_mul(d as u64) <= 1 << 32)
            .ok_or_else(|| Error::InvalidArgument(format!("finest grid {m}^{grid_levels} is too fine to store")))?;
        Ok(Self { seed, horizon, d, m, grid_levels, fine_steps })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn base(&self) -> usize {
        self.m
    }

    pub fn grid_levels(&self) -> usize {
        self.grid_levels
    }

    /// Number of steps of the finest grid, `m^G`.
    pub fn fine_steps(&self) -> u64 {
        self.fine_steps
    }

    fn key(&self, theta: &ThetaIndex) -> Key {
        let mut h = Sha256::new();
        h.update(DOMAIN_TAG);
        h.update(self.seed.to_le_bytes());
        h.update((theta.path().len() as u64).to_le_bytes());
        for v in theta.path() {
            h.update(v.to_le_bytes());
        }
        h.finalize().into()
    }

    fn stream(key: Key, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        rng
    }

    /// `𝔱^θ ∈ [0, 1)`.
    pub fn uniform_time(&self, theta: &ThetaIndex) -> f64 {
        Self::stream(self.key(theta), STREAM_UNIFORM).random::<f64>()
    }

    fn generate_path(&self, key: Key) -> Vec<f64> {
        let d = self.d;
        let steps = self.fine_steps as usize;
        let sd = (self.horizon / steps as f64).sqrt();
        let mut rng = Self::stream(key, STREAM_BROWNIAN);
        let mut path = vec![0.0; (steps + 1) * d];
        for k in 1..=steps {
            for i in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                path[k * d + i] = path[(k - 1) * d + i] + sd * z;
            }
        }
        path
    }

    /// The whole path of `W^θ` on the finest grid, `(m^G + 1) × d` row-major.
    pub fn brownian_path(&self, theta: &ThetaIndex) -> Vec<f64> {
        self.generate_path(self.key(theta))
    }

    /// Index of `t` on the finest grid; `t` must be a grid point.
    pub fn fine_index(&self, t: f64) -> Result<usize> {
        let k = grid_floor_index(t, self.m, self.grid_levels, self.horizon)?;
        let on_grid = k as f64 * self.horizon / self.fine_steps as f64;
        if (on_grid - t).abs() > 1e-9 * self.horizon {
            return Err(Error::OffGrid { t });
        }
        Ok(k as usize)
    }

    /// `W^θ(t)` for a finest-grid time `t`.
    pub fn brownian_at(&self, theta: &ThetaIndex, t: f64) -> Result<Vec<f64>> {
        let k = self.fine_index(t)?;
        let path = self.brownian_path(theta);
        Ok(path[k * self.d..(k + 1) * self.d].to_vec())
    }

    /// `W^θ` at finest-grid index `k`, generating and caching the path on
    /// first use.
    pub fn brownian_cached<'c>(&self, cache: &'c mut PathCache, theta: &ThetaIndex, k: usize) -> &'c [f64] {
        let key = self.key(theta);
        let path = cache.paths.entry(key).or_insert_with(|| self.generate_path(key));
        &path[k * self.d..(k + 1) * self.d]
    }

    /// `W^θ(sup({j T / m^n} ∩ [0, t]))`, looked up through the cache.
    pub fn brownian_floor<'c>(
        &self,
        cache: &'c mut PathCache,
        theta: &ThetaIndex,
        t: f64,
        n: usize,
    ) -> Result<&'c [f64]> {
        if n > self.grid_levels {
            return Err(Error::LevelOverflow { level: n, grid_levels: self.grid_levels });
        }
        let k = grid_floor_index(t, self.m, n, self.horizon)?;
        let scale = checked_pow(self.m, self.grid_levels - n).unwrap();
        Ok(self.brownian_cached(cache, theta, (k * scale) as usize))
    }
}
