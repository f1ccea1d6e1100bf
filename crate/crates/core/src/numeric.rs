//! Small numeric helpers shared across modules: vector norms, relative
//! comparison, L^p sample norms and a Halton point set on the unit cube.

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Maximum absolute entry.
pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
///
/// Values of order one or smaller are compared absolutely, larger ones
/// relatively.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Largest entrywise scaled deviation, `max_i |a_i - b_i| / max(1, |a_i|, |b_i|)`.
pub fn max_rel_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / 1f64.max(x.abs()).max(y.abs())).fold(0.0, f64::max)
}

/// Empirical L^q norm `(mean |v|^q)^{1/q}` together with a delta-method
/// standard error.
pub fn lq_norm_with_se(values: &[f64], q: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(q)).collect();
    let mean = powered.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return (0.0, 0.0);
    }
    let var = powered.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let est = mean.powf(1.0 / q);
    let se = est / (q * mean) * (var / n).sqrt();
    (est, se)
}

/// One-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.326_347_874_040_841;

const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// First `count` points of the Halton sequence in `[0,1]^dim`, skipping the
/// origin.
///
/// # Panics
/// If `dim` exceeds the number of tabulated primes (24).
pub fn halton_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton_points supports up to {} dimensions", PRIMES.len());
    (1..=count as u64).map(|i| PRIMES[..dim].iter().map(|&p| radical_inverse(i, p)).collect()).collect()
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
