//! Coupled particle runs of a problem and its perturbation.

use mkv_dnn::mlp::PerturbedPair;
use mkv_dnn::oracle::{check_perturbation_bounds, ParticleConfig};

#[test]
fn differences_scale_linearly_and_respect_bounds() {
    let cfg = ParticleConfig::new(2000, 50, 16, 4).unwrap();
    let mut ratios = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        let pair = PerturbedPair::linear(2, 0.0, -0.5, 1.0, eps).unwrap();
        let (state, payoff) = check_perturbation_bounds(&pair, &cfg, &[0.5, -0.5], 2).unwrap();
        assert!(state.satisfied_at_99() && payoff.satisfied_at_99(), "{state:?} {payoff:?}");
        assert!(state.empirical > 0.0);
        ratios.push((state.empirical / eps, payoff.empirical / eps));
    }
    for w in ratios.windows(2) {
        assert!((w[1].0 / w[0].0 - 1.0).abs() < 0.1, "{ratios:?}");
        assert!((w[1].1 / w[0].1 - 1.0).abs() < 0.1, "{ratios:?}");
    }
}

#[test]
fn perturbed_pair_shares_constants() {
    let pair = PerturbedPair::linear(3, 0.4, -0.5, 0.5, 0.2).unwrap();
    assert_eq!(pair.base.c(), pair.perturbed.c());
    assert_eq!(pair.base.r(), pair.perturbed.r());
    assert!(pair.base.c() >= 2.0 * (0.4 + 0.2));
    assert!(PerturbedPair::linear(1, 0.0, -0.5, 1.0, 0.5).is_err());
}
