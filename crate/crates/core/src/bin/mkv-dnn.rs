use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use mkv_dnn::experiment::{run_suite, write_outputs, ExperimentConfig, Suite};
use mkv_dnn::mlp::{MlpParams, ThetaIndex};
use mkv_dnn::synthesis::{synthesize_mc_network, synthesize_mlp_network};

/// Runs the experiment suites and writes their CSV tables.
///
/// Exits with status 0 iff every check passes, 1 if a check fails and 2 on
/// usage or configuration errors.
#[derive(Debug, Parser)]
#[command(name = "mkv-dnn", version)]
struct Cli {
    /// `key = value` config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "all", value_parser = ["equivalence", "bounds", "convergence", "scaling", "all"])]
    suite: String,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instead of running suites, write `Φ_{n,T}` (K = 0) or `Ψ_{K,n}` with
    /// `n = m` for the first configured dimension in text format to this file.
    #[arg(long, value_name = "FILE")]
    dump_network: Option<PathBuf>,
    #[arg(long, default_value_t = 2, requires = "dump_network")]
    level: usize,
    #[arg(long, default_value_t = 0, requires = "dump_network")]
    samples: usize,
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dump(cfg: &ExperimentConfig, path: &PathBuf, n: usize, k: usize) -> anyhow::Result<()> {
    let problem = cfg.problem.build(cfg.d[0], cfg.horizon)?;
    let params = MlpParams::new(n, n.max(1), k.max(1), problem.horizon())?;
    let tree = params.tree(cfg.seed, &problem)?;
    let report = if k == 0 {
        synthesize_mlp_network(&problem, &tree, &ThetaIndex::sample(1), n, params.m, problem.horizon())?
    } else {
        synthesize_mc_network(&problem, &tree, k, n, params.m)?
    };
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    report.network.write_text(std::io::BufWriter::new(file))?;
    println!("wrote {} (dims {})", path.display(), report.network.dims());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(path) = &cli.dump_network {
        return match dump(&cfg, path, cli.level, cli.samples) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        };
    }
    let suite: Suite = cli.suite.parse().expect("restricted by clap");
    let outputs = match run_suite(suite, &cfg).and_then(|o| write_outputs(&o, &cfg.output).map(|_| o)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let mut all = true;
    for out in &outputs {
        for c in &out.checks {
            all &= c.passed;
            println!("[{}] {} {}: {}", out.suite.as_str(), if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    println!("tables written to {}", cfg.output.display());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
