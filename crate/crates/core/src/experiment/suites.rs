//! The four experiment suites. Each produces deterministic CSV tables (a
//! function of the config alone) and a list of named pass/fail checks.

use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::pipeline::{theorem_pipeline, PipelineConfig, Reference};
use crate::mlp::{mlp_estimate_batch, monte_carlo_payoff_batch, NoiseTree, PerturbedPair, TestProblem, ThetaIndex};
use crate::numeric::{halton_points, max_rel_dev, ols_slope};
use crate::oracle::{
    check_brownian_moment, check_mlp_error, check_moment_bound, check_perturbation_bounds, BoundCheckResult,
    ParticleConfig,
};
use crate::synthesis::{synthesize_mc_network, synthesize_mlp_network, SynthesisReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Equivalence,
    Bounds,
    Convergence,
    Scaling,
    All,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Equivalence => "equivalence",
            Suite::Bounds => "bounds",
            Suite::Convergence => "convergence",
            Suite::Scaling => "scaling",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Equivalence, Suite::Bounds, Suite::Convergence, Suite::Scaling],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equivalence" => Ok(Suite::Equivalence),
            "bounds" => Ok(Suite::Bounds),
            "convergence" => Ok(Suite::Convergence),
            "scaling" => Ok(Suite::Scaling),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub suite: Suite,
    /// `(file name, CSV contents)`.
    pub files: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl SuiteOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Fixed-precision float formatting so that reruns are byte-identical.
fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Self { w })
    }

    fn row(&mut self, fields: Vec<String>) -> Result<()> {
        self.w.write_record(&fields)?;
        Ok(())
    }

    fn finish(self) -> Result<String> {
        let bytes = self.w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<Vec<SuiteOutput>> {
    cfg.validate()?;
    suite
        .expand()
        .into_iter()
        .map(|s| match s {
            Suite::Equivalence => equivalence(cfg),
            Suite::Bounds => bounds(cfg),
            Suite::Convergence => convergence(cfg),
            Suite::Scaling => scaling(cfg),
            Suite::All => unreachable!(),
        })
        .collect()
}

pub fn write_outputs(outputs: &[SuiteOutput], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for out in outputs {
        for (name, contents) in &out.files {
            std::fs::write(dir.join(name), contents)?;
        }
    }
    Ok(())
}

fn random_probes(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
}

fn report_fields(r: &SynthesisReport) -> Vec<String> {
    vec![
        r.depth.to_string(),
        r.predicted_depth.to_string(),
        r.width_supnorm.to_string(),
        r.predicted_width_bound.to_string(),
        r.param_count.to_string(),
    ]
}

/// Realization of the synthesized networks against the estimators they encode.
fn equivalence(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&[
        "problem",
        "d",
        "n",
        "m",
        "k",
        "seed",
        "network",
        "depth",
        "predicted_depth",
        "width",
        "width_bound",
        "param_count",
        "max_rel_dev",
        "pass",
    ])?;
    let (mut cases, mut failures, mut worst) = (0usize, Vec::new(), 0.0f64);
    let tol = cfg.equivalence_tolerance;
    for &d in &cfg.equivalence_d {
        let problem = cfg.problem.build(d, cfg.equivalence_horizon)?;
        for n in 0..=cfg.equivalence_max_level {
            let m = n.max(1);
            for s in 0..cfg.equivalence_seeds {
                let seed = cfg.seed.wrapping_add(s);
                let tree = NoiseTree::new(seed, problem.horizon(), d, m, n)?;
                let probes = random_probes(d, cfg.equivalence_probes, seed ^ 0x9e37_79b9);
                let mut record = |table: &mut Table, kind: &str, k: usize, rep: &SynthesisReport, dev: f64| {
                    let pass = dev <= tol && rep.depth_ok() && rep.width_ok();
                    cases += 1;
                    worst = worst.max(dev);
                    if !pass {
                        failures.push(format!("{kind} d={d} n={n} k={k} seed={seed}"));
                    }
                    let mut row = vec![
                        problem.id().to_string(),
                        d.to_string(),
                        n.to_string(),
                        m.to_string(),
                        k.to_string(),
                        seed.to_string(),
                        kind.to_string(),
                    ];
                    row.extend(report_fields(rep));
                    row.push(fmt(dev));
                    row.push(pass.to_string());
                    table.row(row)
                };

                let theta = ThetaIndex::sample(1);
                let phi = synthesize_mlp_network(&problem, &tree, &theta, n, m, problem.horizon())?;
                let want: Vec<f64> =
                    mlp_estimate_batch(&problem, &tree, &theta, n, m, problem.horizon(), &probes)?.concat();
                let got: Vec<f64> = probes.iter().map(|x| phi.network.realize(x)).collect::<Result<Vec<_>>>()?.concat();
                record(&mut table, "phi", 0, &phi, max_rel_dev(&got, &want))?;

                for &k in &cfg.equivalence_k {
                    let psi = synthesize_mc_network(&problem, &tree, k, n, m)?;
                    let want = monte_carlo_payoff_batch(&problem, &tree, k, n, m, &probes)?;
                    let got: Vec<f64> =
                        probes.iter().map(|x| psi.network.realize(x).map(|v| v[0])).collect::<Result<_>>()?;
                    record(&mut table, "psi", k, &psi, max_rel_dev(&got, &want))?;
                }
            }
        }
    }
    let detail = format!("{cases} networks, worst deviation {worst:.3e}, failures: {failures:?}");
    Ok(SuiteOutput {
        suite: Suite::Equivalence,
        files: vec![("equivalence.csv".into(), table.finish()?)],
        checks: vec![Check::new("equivalence", failures.is_empty(), detail)],
    })
}

fn particle_config(cfg: &ExperimentConfig) -> Result<ParticleConfig> {
    ParticleConfig::new(cfg.particles, cfg.euler_steps, cfg.partners, cfg.seed)
}

/// Moment, perturbation and MLP error bounds against Monte-Carlo estimates.
fn bounds(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let t = cfg.bounds_horizon;
    let pcfg = particle_config(cfg)?;
    let mut results: Vec<(String, BoundCheckResult)> = Vec::new();

    for d in [1, 3, 5] {
        for p in [1, 2] {
            for r in [1, 2] {
                let res = check_brownian_moment(d, p, r, t, cfg.brownian_samples, cfg.seed)?;
                results.push(("brownian".into(), res));
            }
        }
    }

    for d in [1, 3] {
        for problem in [TestProblem::linear_default(d, t)?, TestProblem::clip_mean_reversion(d, t)?] {
            for p in [1, 2] {
                let res = check_moment_bound(&problem, &pcfg, &vec![0.5; d], p)?;
                results.push((problem.id().to_string(), res));
            }
        }
    }

    let mut ratios = Vec::new();
    for &eps in &cfg.perturbation_eps {
        let pair = PerturbedPair::linear(1, 0.0, -0.5, t, eps)?;
        let (state, payoff) = check_perturbation_bounds(&pair, &pcfg, &[1.0], 2)?;
        if eps > 0.0 {
            ratios.push((state.empirical / eps, payoff.empirical / eps));
        }
        results.push((pair.base.id().to_string(), state));
        results.push((pair.base.id().to_string(), payoff));
    }

    let linear = TestProblem::linear_default(1, t)?;
    for n in 1..=3 {
        let res = check_mlp_error(&linear, &pcfg, n, n, &[1.0], cfg.mlp_error_seeds)?;
        results.push((linear.id().to_string(), res));
    }

    let mut table = Table::new(&[
        "problem",
        "bound_name",
        "empirical",
        "bound",
        "satisfied",
        "std_error",
        "samples",
        "satisfied_at_99",
    ])?;
    let mut checks = Vec::new();
    for (problem, r) in &results {
        table.row(vec![
            problem.clone(),
            r.name.clone(),
            fmt(r.empirical),
            fmt(r.bound),
            r.satisfied.to_string(),
            fmt(r.std_error),
            r.samples.to_string(),
            r.satisfied_at_99().to_string(),
        ])?;
        checks.push(Check::new(
            format!("{problem}/{}", r.name),
            r.satisfied_at_99(),
            format!("{:.4e} + 2.326 * {:.2e} vs {:.4e}", r.empirical, r.std_error, r.bound),
        ));
    }

    // The perturbation differences scale linearly in ε.
    if ratios.len() >= 2 {
        let spread = |f: fn(&(f64, f64)) -> f64| {
            let vals: Vec<f64> = ratios.iter().map(f).collect();
            let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
            let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
            hi / lo
        };
        let (s, f) = (spread(|r| r.0), spread(|r| r.1));
        checks.push(Check::new(
            "perturbation_linearity",
            s <= 1.25 && f <= 1.25,
            format!("max/min of difference/eps: state {s:.4}, payoff {f:.4}"),
        ));
    }

    Ok(SuiteOutput { suite: Suite::Bounds, files: vec![("bounds.csv".into(), table.finish()?)], checks })
}

/// Probe points with `x_1 ∈ [1, 3]` so the linear problem's value stays away from zero.
fn convergence_probes(d: usize, count: usize) -> Vec<Vec<f64>> {
    halton_points(d, count)
        .into_iter()
        .map(|mut x| {
            x[0] = 1.0 + 2.0 * x[0];
            for v in x.iter_mut().skip(1) {
                *v = 2.0 * *v - 1.0;
            }
            x
        })
        .collect()
}

/// Error of the Monte-Carlo payoff against the closed form as `n = m` grows.
fn convergence(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let levels = [1usize, 2, 3];
    let mut table = Table::new(&["problem", "d", "seed", "n", "m", "k", "rms_error", "rel_rms_error"])?;
    let mut summary = Table::new(&["problem", "d", "n", "rms_error", "rel_rms_error", "improved_seeds", "seeds"])?;
    let mut checks = Vec::new();
    for &d in &cfg.convergence_d {
        let problem = TestProblem::linear_default(d, cfg.convergence_horizon)?;
        let probes = convergence_probes(d, cfg.convergence_probes);
        let exact: Vec<f64> = probes.iter().map(|x| problem.exact(x).expect("closed form")).collect();
        let exact_ms = exact.iter().map(|v| v * v).sum::<f64>() / exact.len() as f64;
        let mut sq = vec![0.0; levels.len()];
        let mut improved = 0u64;
        for s in 0..cfg.convergence_seeds {
            let seed = cfg.seed.wrapping_add(s);
            let mut per_level = Vec::with_capacity(levels.len());
            for (li, &n) in levels.iter().enumerate() {
                let tree = NoiseTree::new(seed, problem.horizon(), d, n, n)?;
                let est = monte_carlo_payoff_batch(&problem, &tree, cfg.convergence_k, n, n, &probes)?;
                let ms = est.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / est.len() as f64;
                sq[li] += ms;
                per_level.push(ms.sqrt());
                table.row(vec![
                    problem.id().into(),
                    d.to_string(),
                    seed.to_string(),
                    n.to_string(),
                    n.to_string(),
                    cfg.convergence_k.to_string(),
                    fmt(ms.sqrt()),
                    fmt((ms / exact_ms).sqrt()),
                ])?;
            }
            if per_level[levels.len() - 1] < per_level[0] {
                improved += 1;
            }
        }
        let seeds = cfg.convergence_seeds as f64;
        for (li, &n) in levels.iter().enumerate() {
            let rms = (sq[li] / seeds).sqrt();
            summary.row(vec![
                problem.id().into(),
                d.to_string(),
                n.to_string(),
                fmt(rms),
                fmt((sq[li] / seeds / exact_ms).sqrt()),
                improved.to_string(),
                cfg.convergence_seeds.to_string(),
            ])?;
        }
        let needed = (0.9 * seeds).ceil() as u64;
        checks.push(Check::new(
            format!("convergence_decrease_d{d}"),
            improved >= needed,
            format!("n=3 beats n=1 in {improved}/{} seeds (need {needed})", cfg.convergence_seeds),
        ));
        let rel = (sq[levels.len() - 1] / seeds / exact_ms).sqrt();
        checks.push(Check::new(
            format!("convergence_relative_rms_d{d}"),
            rel <= 0.10,
            format!("relative RMS at n=3: {rel:.4}"),
        ));
    }
    Ok(SuiteOutput {
        suite: Suite::Convergence,
        files: vec![("convergence.csv".into(), table.finish()?), ("convergence_summary.csv".into(), summary.finish()?)],
        checks,
    })
}

/// The accuracy-to-network pipeline over the `(d, ϵ)` grid.
fn scaling(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&[
        "problem",
        "d",
        "epsilon",
        "delta",
        "mode",
        "n",
        "m",
        "k",
        "seed",
        "attempts",
        "l2_error",
        "param_count",
        "ln_param_count",
        "certified_n",
        "certified_ln_param_count",
        "ln_param_bound",
        "eps_perturbation",
        "depth",
        "width",
        "pass",
    ])?;
    let mut fit = Table::new(&["problem", "d", "points", "slope_produced", "slope_certified", "slope_bound", "pass"])?;
    let mut checks = Vec::new();
    for &d in &cfg.d {
        let problem = cfg.problem.build(d, cfg.horizon)?;
        let reference = match problem.closed_form() {
            Some(_) => Reference::ClosedForm,
            None => Reference::Particles(particle_config(cfg)?),
        };
        let pcfg = PipelineConfig {
            delta: cfg.delta,
            l2_points: cfg.l2_points,
            retry_budget: cfg.retry_budget,
            base_seed: cfg.seed,
            synthesis_budget: cfg.synthesis_budget,
            reference,
            ..PipelineConfig::default()
        };
        let (mut xs, mut produced, mut certified) = (Vec::new(), Vec::new(), Vec::new());
        for &eps in &cfg.epsilon {
            let tag = format!("d={d} eps={eps}");
            match theorem_pipeline(&problem, eps, &pcfg) {
                Ok(res) => {
                    let ok_err = res.l2_error < eps;
                    let ok_size = res.ln_param_count() <= res.ln_param_bound
                        && res.certified_ln_param_count <= res.ln_param_bound;
                    xs.push((1.0 / eps).ln());
                    produced.push(res.ln_param_count());
                    certified.push(res.certified_ln_param_count);
                    table.row(vec![
                        problem.id().into(),
                        d.to_string(),
                        fmt(eps),
                        fmt(cfg.delta),
                        res.mode.as_str().into(),
                        res.n.to_string(),
                        res.m.to_string(),
                        res.k.to_string(),
                        res.seed.to_string(),
                        res.attempts.to_string(),
                        fmt(res.l2_error),
                        res.report.param_count.to_string(),
                        fmt(res.ln_param_count()),
                        res.certified_n.to_string(),
                        fmt(res.certified_ln_param_count),
                        fmt(res.ln_param_bound),
                        fmt(res.eps_perturbation),
                        res.report.depth.to_string(),
                        res.report.width_supnorm.to_string(),
                        (ok_err && ok_size).to_string(),
                    ])?;
                    checks.push(Check::new(
                        format!("scaling_error {tag}"),
                        ok_err,
                        format!("L2 error {:.4e} ({} mode, n={}, K={})", res.l2_error, res.mode.as_str(), res.n, res.k),
                    ));
                    checks.push(Check::new(
                        format!("scaling_size {tag}"),
                        ok_size,
                        format!(
                            "ln P = {:.3}, certified ln P = {:.3}, ln bound = {:.3}",
                            res.ln_param_count(),
                            res.certified_ln_param_count,
                            res.ln_param_bound
                        ),
                    ));
                }
                Err(Error::RetryBudgetExhausted { attempts, best_error }) => {
                    let mut row =
                        vec![problem.id().into(), d.to_string(), fmt(eps), fmt(cfg.delta), "exhausted".into()];
                    row.extend(["", "", "", ""].map(String::from));
                    row.push(attempts.to_string());
                    row.push(fmt(best_error));
                    row.extend(std::iter::repeat_n(String::new(), 8));
                    row.push("false".into());
                    table.row(row)?;
                    checks.push(Check::new(
                        format!("scaling_error {tag}"),
                        false,
                        format!("retry budget exhausted after {attempts} attempts, best error {best_error:.4e}"),
                    ));
                }
                Err(e) => return Err(e),
            }
        }
        if xs.len() >= 2 {
            let bound = 3.0 * problem.c() + 8.0 + cfg.delta;
            let sp = ols_slope(&xs, &produced);
            let sc = ols_slope(&xs, &certified);
            // Two-point fits are noisy; allow half a unit over the exponent.
            let pass = sp <= bound + 0.5;
            fit.row(vec![
                problem.id().into(),
                d.to_string(),
                xs.len().to_string(),
                fmt(sp),
                fmt(sc),
                fmt(bound),
                pass.to_string(),
            ])?;
            checks.push(Check::new(
                format!("scaling_slope d={d}"),
                pass,
                format!("slope of ln P against ln(1/eps): {sp:.3} (certified {sc:.3}) vs {bound:.3} + 0.5"),
            ));
        }
    }
    Ok(SuiteOutput {
        suite: Suite::Scaling,
        files: vec![("scaling.csv".into(), table.finish()?), ("scaling_fit.csv".into(), fit.finish()?)],
        checks,
    })
}
