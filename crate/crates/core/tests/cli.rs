use std::path::Path;
use std::process::Command;

use mkv_dnn::NeuralNetwork;

const SMALL: &str = "\
d = 1, 2
epsilon = 0.5
l2_points = 64
equivalence_d = 1, 2
equivalence_max_level = 2
equivalence_k = 2
equivalence_seeds = 2
equivalence_probes = 5
convergence_d = 1
convergence_k = 100
convergence_seeds = 3
convergence_probes = 3
particles = 300
euler_steps = 20
partners = 8
brownian_samples = 2000
mlp_error_seeds = 10
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mkv-dnn"))
}

fn run(config: &Path, out: &Path, suite: &str) -> std::process::Output {
    bin()
        .args(["--config", config.to_str().unwrap(), "--suite", suite, "--out", out.to_str().unwrap()])
        .output()
        .unwrap()
}

#[test]
fn empty_dimension_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, "d =\n").unwrap();
    let out = run(&cfg, &dir.path().join("out"), "scaling");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d list is empty"));
}

#[test]
fn unknown_key_and_bad_suite_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, "depth = 3\n").unwrap();
    assert_eq!(run(&cfg, dir.path(), "scaling").status.code(), Some(2));
    std::fs::write(&cfg, SMALL).unwrap();
    assert!(!run(&cfg, dir.path(), "everything").status.success());
}

#[test]
fn all_suites_pass_and_rerun_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = run(&cfg, &a, "all");
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stdout));
    assert!(run(&cfg, &b, "all").status.success());
    let names = [
        "equivalence.csv",
        "bounds.csv",
        "convergence.csv",
        "convergence_summary.csv",
        "scaling.csv",
        "scaling_fit.csv",
    ];
    for name in names {
        let x = std::fs::read(a.join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name} differs between runs");
    }
}

#[test]
fn seed_flag_changes_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&cfg, &a, "convergence");
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--suite",
            "convergence",
            "--seed",
            "17",
            "--out",
            b.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_ne!(std::fs::read(a.join("convergence.csv")).unwrap(), std::fs::read(b.join("convergence.csv")).unwrap());
}

#[test]
fn dumped_network_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.txt");
    let out =
        bin().args(["--dump-network", path.to_str().unwrap(), "--level", "2", "--samples", "3"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let net = NeuralNetwork::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(net.input_dim(), 1);
    assert_eq!(net.output_dim(), 1);
}
