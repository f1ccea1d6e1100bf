//! Flat `key = value` experiment configuration. `#` starts a comment, lists
//! are comma-separated, unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::mlp::TestProblem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    Linear,
    Clip,
    Constant,
}

impl ProblemId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::Linear => "linear",
            ProblemId::Clip => "clip",
            ProblemId::Constant => "constant",
        }
    }

    /// The shipped problem of this family in dimension `d`.
    pub fn build(&self, d: usize, horizon: f64) -> Result<TestProblem> {
        match self {
            ProblemId::Linear => TestProblem::linear_default(d, horizon),
            ProblemId::Clip => TestProblem::clip_mean_reversion(d, horizon),
            ProblemId::Constant => TestProblem::constant(d, 1.0, horizon),
        }
    }
}

impl FromStr for ProblemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ProblemId::Linear),
            "clip" => Ok(ProblemId::Clip),
            "constant" => Ok(ProblemId::Constant),
            other => Err(Error::Parse(format!("unknown problem {other:?} (expected linear, clip or constant)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    /// Dimensions of the scaling table.
    pub d: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub output: PathBuf,

    /// Horizon of the scaling table.
    pub horizon: f64,
    pub l2_points: usize,
    pub retry_budget: usize,
    pub synthesis_budget: u64,

    pub equivalence_d: Vec<usize>,
    pub equivalence_max_level: usize,
    pub equivalence_k: Vec<usize>,
    pub equivalence_seeds: u64,
    pub equivalence_probes: usize,
    pub equivalence_horizon: f64,
    pub equivalence_tolerance: f64,

    pub convergence_d: Vec<usize>,
    pub convergence_k: usize,
    pub convergence_seeds: u64,
    pub convergence_probes: usize,
    pub convergence_horizon: f64,

    pub particles: usize,
    pub euler_steps: usize,
    pub partners: usize,
    pub brownian_samples: usize,
    pub mlp_error_seeds: u64,
    pub perturbation_eps: Vec<f64>,
    pub bounds_horizon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::Linear,
            d: vec![1, 2, 3],
            epsilon: vec![0.5, 0.25],
            delta: 0.5,
            seed: 0,
            output: PathBuf::from("out"),
            horizon: 0.1,
            l2_points: 1024,
            retry_budget: 4,
            synthesis_budget: 20_000_000,
            equivalence_d: vec![1, 2, 5],
            equivalence_max_level: 3,
            equivalence_k: vec![1, 4],
            equivalence_seeds: 5,
            equivalence_probes: 20,
            equivalence_horizon: 1.0,
            equivalence_tolerance: 1e-8,
            convergence_d: vec![1, 5],
            convergence_k: 1000,
            convergence_seeds: 50,
            convergence_probes: 4,
            convergence_horizon: 1.0,
            particles: 4000,
            euler_steps: 100,
            partners: 32,
            brownian_samples: 100_000,
            mlp_error_seeds: 100,
            perturbation_eps: vec![0.05, 0.1, 0.2],
            bounds_horizon: 1.0,
        }
    }
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| scalar(key, s)).collect()
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e| Error::Parse(format!("{key}: cannot parse {:?}: {e}", v.trim())))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problem" => cfg.problem = value.parse()?,
                "d" => cfg.d = list(key, value)?,
                "epsilon" => cfg.epsilon = list(key, value)?,
                "delta" => cfg.delta = scalar(key, value)?,
                "seed" => cfg.seed = scalar(key, value)?,
                "output" => cfg.output = PathBuf::from(value),
                "horizon" => cfg.horizon = scalar(key, value)?,
                "l2_points" => cfg.l2_points = scalar(key, value)?,
                "retry_budget" => cfg.retry_budget = scalar(key, value)?,
                "synthesis_budget" => cfg.synthesis_budget = scalar(key, value)?,
                "equivalence_d" => cfg.equivalence_d = list(key, value)?,
                "equivalence_max_level" => cfg.equivalence_max_level = scalar(key, value)?,
                "equivalence_k" => cfg.equivalence_k = list(key, value)?,
                "equivalence_seeds" => cfg.equivalence_seeds = scalar(key, value)?,
                "equivalence_probes" => cfg.equivalence_probes = scalar(key, value)?,
                "equivalence_horizon" => cfg.equivalence_horizon = scalar(key, value)?,
                "equivalence_tolerance" => cfg.equivalence_tolerance = scalar(key, value)?,
                "convergence_d" => cfg.convergence_d = list(key, value)?,
                "convergence_k" => cfg.convergence_k = scalar(key, value)?,
                "convergence_seeds" => cfg.convergence_seeds = scalar(key, value)?,
                "convergence_probes" => cfg.convergence_probes = scalar(key, value)?,
                "convergence_horizon" => cfg.convergence_horizon = scalar(key, value)?,
                "particles" => cfg.particles = scalar(key, value)?,
                "euler_steps" => cfg.euler_steps = scalar(key, value)?,
                "partners" => cfg.partners = scalar(key, value)?,
                "brownian_samples" => cfg.brownian_samples = scalar(key, value)?,
                "mlp_error_seeds" => cfg.mlp_error_seeds = scalar(key, value)?,
                "perturbation_eps" => cfg.perturbation_eps = list(key, value)?,
                "bounds_horizon" => cfg.bounds_horizon = scalar(key, value)?,
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.d.is_empty() {
            return bad("d list is empty".into());
        }
        if self.d.iter().chain(&self.equivalence_d).chain(&self.convergence_d).any(|&d| d == 0 || d > 24) {
            return bad("dimensions must lie in 1..=24".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.epsilon.is_empty() || self.epsilon.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return bad("epsilon list must be nonempty with entries in (0, 1)".into());
        }
        for (name, t) in [
            ("horizon", self.horizon),
            ("equivalence_horizon", self.equivalence_horizon),
            ("convergence_horizon", self.convergence_horizon),
            ("bounds_horizon", self.bounds_horizon),
        ] {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("{name} must be positive, got {t}"));
            }
        }
        if self.equivalence_k.contains(&0) || self.convergence_k == 0 {
            return bad("Monte-Carlo counts must be >= 1".into());
        }
        if self.perturbation_eps.iter().any(|&e| !(0.0..0.5).contains(&e)) {
            return bad("perturbation sizes must lie in [0, 0.5)".into());
        }
        if self.l2_points == 0 || self.equivalence_probes == 0 || self.convergence_probes == 0 {
            return bad("point counts must be >= 1".into());
        }
        if self.particles < 2 || self.euler_steps == 0 || self.partners == 0 || self.brownian_samples < 2 {
            return bad("particle settings must satisfy M >= 2, steps >= 1, J >= 1, samples >= 2".into());
        }
        Ok(())
    }
}
