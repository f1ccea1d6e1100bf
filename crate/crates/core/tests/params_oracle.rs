//! Parameter selection against direct term-by-term evaluation.

use mkv_dnn::experiment::{c_delta_argmax, ln_c_delta, ln_param_bound, select_n};

/// `ln(5^{2n} n n^{4n} (2 e^{(n−1)/2 + 3cT(n−1)} / (n−1)^{(n−1)/2})^{8+δ})`
/// written out independently.
fn term(n: u64, delta: f64, c: f64, t: f64) -> f64 {
    let nf = n as f64;
    let k = nf - 1.0;
    let inner = 2f64.ln() + k / 2.0 + 3.0 * c * t * k - k / 2.0 * k.ln();
    nf * 25f64.ln() + (4.0 * nf + 1.0) * nf.ln() + (8.0 + delta) * inner
}

#[test]
fn c_delta_matches_full_scan() {
    // δ close to 1 and a tiny horizon put the maximizer near 2·10^6.
    let (delta, c, t) = (0.99, 1.0, 1e-3);
    let (mut best_n, mut best) = (2u64, f64::NEG_INFINITY);
    for n in 2..10_000_000u64 {
        let v = term(n, delta, c, t);
        if v > best {
            best = v;
            best_n = n;
        }
    }
    assert!(best_n > 1000 && best_n < 9_000_000, "scan maximum at the edge: {best_n}");
    let arg = c_delta_argmax(delta, c, t).unwrap();
    let got = ln_c_delta(delta, c, t).unwrap();
    // The log-term is flat at the top; compare values tightly, positions loosely.
    assert!((got - best).abs() <= 1e-10 * best.abs(), "{got} vs {best}");
    assert!((arg as f64 - best_n as f64).abs() <= 1e-3 * best_n as f64, "{arg} vs {best_n}");
}

#[test]
fn select_n_matches_scan_without_logs() {
    for (d, eps, t) in [(1, 0.5, 0.1), (2, 0.25, 0.1), (3, 0.5, 0.5), (1, 0.9, 0.01)] {
        let lhs = |n: u64| {
            let nf = n as f64;
            // 2^r (c d^c)^{r+1} with r = c = 1.
            let pre = 2.0 * (d as f64).powi(2);
            pre * 2.0 * (nf / 2.0 + 3.0 * t * nf).exp() / nf.powf(nf / 2.0)
        };
        let want = (2..200u64).find(|&n| lhs(n) <= eps / 2.0).unwrap();
        assert_eq!(select_n(d, eps, 1.0, 1, t).unwrap(), want, "d={d} eps={eps} T={t}");
    }
}

#[test]
fn param_bound_epsilon_exponent() {
    // ln bound(ϵ/2) − ln bound(ϵ) = (3c + 8 + δ) ln 2.
    // δ near 1 and small T keep ln C_δ moderate, so the difference is resolvable.
    for c in [1.0, 2.0] {
        let delta = 0.99;
        let a = ln_param_bound(2, 0.4, delta, c, 1, 1e-3).unwrap();
        let b = ln_param_bound(2, 0.2, delta, c, 1, 1e-3).unwrap();
        let diff = b - a;
        let want = (3.0 * c + 8.0 + delta) * 2f64.ln();
        assert!((diff - want).abs() <= 1e-6, "{diff} vs {want}");
    }
}
