//! Accuracy-driven parameter selection: the perturbation size `ε_{d,ϵ}`, the
//! level count `N_{d,ϵ}`, the constant `C_δ` and the parameter-count bound.
//!
//! `C_δ` and the bound overflow `f64` for ordinary inputs, so both are
//! returned as natural logarithms.

use crate::{Error, Result};

/// Scan cap for [`select_n`].
pub const SELECT_N_CAP: u64 = 10_000;

/// `ϵ / (2^r (c d^c)^{r+1} e^{(r+2)cT})`.
pub fn select_epsilon(d: usize, epsilon: f64, c: f64, r: u32, horizon: f64) -> f64 {
    let cd = c * (d as f64).powf(c);
    epsilon / (2f64.powi(r as i32) * cd.powi(r as i32 + 1) * ((r as f64 + 2.0) * c * horizon).exp())
}

/// `ln( 2^r (c d^c)^{r+1} · 2 e^{n/2 + 3cTn} / n^{n/2} )`.
pub fn ln_level_error(n: u64, d: usize, c: f64, r: u32, horizon: f64) -> f64 {
    let nf = n as f64;
    r as f64 * std::f64::consts::LN_2
        + (r as f64 + 1.0) * (c.ln() + c * (d as f64).ln())
        + std::f64::consts::LN_2
        + nf / 2.0
        + 3.0 * c * horizon * nf
        - nf / 2.0 * nf.ln()
}

/// Smallest `n >= 2` with `2^r (c d^c)^{r+1} · 2 e^{n/2+3cTn} / n^{n/2} <= ϵ/2`.
pub fn select_n(d: usize, epsilon: f64, c: f64, r: u32, horizon: f64) -> Result<u64> {
    select_n_with_cap(d, epsilon, c, r, horizon, SELECT_N_CAP)
}

pub fn select_n_with_cap(d: usize, epsilon: f64, c: f64, r: u32, horizon: f64, cap: u64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let target = (epsilon / 2.0).ln();
    (2..=cap).find(|&n| ln_level_error(n, d, c, r, horizon) <= target).ok_or(Error::ScanCap { cap })
}

/// `ln` of the `n`-th term in the supremum defining `C_δ`:
/// `5^{2n} n n^{4n} (2 e^{(n−1)/2 + 3cT(n−1)} / (n−1)^{(n−1)/2})^{8+δ}`.
pub fn ln_c_delta_term(n: u64, delta: f64, c: f64, horizon: f64) -> f64 {
    let nf = n as f64;
    let k = nf - 1.0;
    let k_ln_k = if n == 1 { 0.0 } else { k * k.ln() };
    2.0 * nf * 5f64.ln()
        + nf.ln()
        + 4.0 * nf * nf.ln()
        + (8.0 + delta) * (std::f64::consts::LN_2 + k * (0.5 + 3.0 * c * horizon) - k_ln_k / 2.0)
}

/// `L(n + 1) − L(n)` for the log-term, written with `ln_1p` so it stays
/// accurate for `n` far beyond `2^53`.
fn ln_c_delta_increment(n: u64, delta: f64, c: f64, horizon: f64) -> f64 {
    let nf = n as f64;
    // (n+1) ln(n+1) − n ln n
    let up = (nf + 1.0).ln() + nf * (1.0 / nf).ln_1p();
    // n ln n − (n−1) ln(n−1)
    let down = if n == 1 { 0.0 } else { nf.ln() - (nf - 1.0) * (-1.0 / nf).ln_1p() };
    2.0 * 5f64.ln() + (1.0 / nf).ln_1p() + 4.0 * up + (8.0 + delta) * ((0.5 + 3.0 * c * horizon) - down / 2.0)
}

/// `ln C_δ`, `C_δ = sup_{n >= 2} term(n)`.
///
/// `ln term(n)` is strictly concave on `n >= 2`, so the supremum sits where the
/// increment changes sign, located by bisection. For small `δ` the maximizer
/// is astronomically large (around `10^16` for `δ = 0.5`, `c = 1`, `T = 0.1`),
/// far beyond any term-by-term scan.
pub fn ln_c_delta(delta: f64, c: f64, horizon: f64) -> Result<f64> {
    Ok(ln_c_delta_term(c_delta_argmax(delta, c, horizon)?, delta, c, horizon))
}

/// The integer `n >= 2` attaining the supremum in `C_δ`.
pub fn c_delta_argmax(delta: f64, c: f64, horizon: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(c >= 1.0 && horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("need c >= 1 and T > 0, got c={c}, T={horizon}")));
    }
    let cap: u64 = 1 << 62;
    if ln_c_delta_increment(cap, delta, c, horizon) > 0.0 {
        return Err(Error::ScanCap { cap });
    }
    // Invariant: increment(lo) > 0 unless lo == 2, increment(hi) <= 0.
    let (mut lo, mut hi) = (2u64, cap);
    if ln_c_delta_increment(2, delta, c, horizon) <= 0.0 {
        return Ok(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ln_c_delta_increment(mid, delta, c, horizon) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `ln( 96 d^{3c} ((2c d^c)^{r+1} e^{(r+2)cT})^{3c+8+δ} C_δ ϵ^{−(3c+8+δ)} )`.
pub fn ln_param_bound(d: usize, epsilon: f64, delta: f64, c: f64, r: u32, horizon: f64) -> Result<f64> {
    let ln_d = (d as f64).ln();
    let power = 3.0 * c + 8.0 + delta;
    let inner = (r as f64 + 1.0) * ((2.0 * c).ln() + c * ln_d) + (r as f64 + 2.0) * c * horizon;
    Ok(96f64.ln() + 3.0 * c * ln_d + power * inner + ln_c_delta(delta, c, horizon)? - power * epsilon.ln())
}
