//! Shipped McKean–Vlasov test problems. Each drift network realizes a map
//! `μ: ℝ^d × ℝ^d → ℝ^d` (own state first, independent copy second) and each
//! payoff network a map `f: ℝ^d → ℝ`.
//!
//! Lipschitz constants are established by construction and documented per
//! problem; nothing is checked at runtime.

use crate::calculus::{scaled_sum, zero_network};
use crate::network::{CsrMatrix, Layer, NeuralNetwork};
use crate::{Error, Result};

/// Known value of `E[f(X^x(T))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `x_1 · e^{rate · T}`.
    FirstCoordinateExp {
        rate: f64,
    },
    Constant(f64),
}

impl ClosedForm {
    pub fn eval(&self, x: &[f64], horizon: f64) -> f64 {
        match *self {
            ClosedForm::FirstCoordinateExp { rate } => x[0] * (rate * horizon).exp(),
            ClosedForm::Constant(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestProblem {
    id: String,
    d: usize,
    horizon: f64,
    c: f64,
    r: u32,
    mu_net: NeuralNetwork,
    f_net: NeuralNetwork,
    closed_form: Option<ClosedForm>,
}

impl TestProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        d: usize,
        horizon: f64,
        c: f64,
        r: u32,
        mu_net: NeuralNetwork,
        f_net: NeuralNetwork,
        closed_form: Option<ClosedForm>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be >= 1".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if !(c >= 1.0) {
            return Err(Error::InvalidArgument(format!("c must be >= 1, got {c}")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("r must be >= 1".into()));
        }
        if mu_net.input_dim() != 2 * d || mu_net.output_dim() != d {
            return Err(Error::ShapeMismatch(format!(
                "drift network maps R^{} -> R^{}, expected R^{} -> R^{d}",
                mu_net.input_dim(),
                mu_net.output_dim(),
                2 * d
            )));
        }
        if f_net.input_dim() != d || f_net.output_dim() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "payoff network maps R^{} -> R^{}, expected R^{d} -> R",
                f_net.input_dim(),
                f_net.output_dim()
            )));
        }
        Ok(Self { id: id.into(), d, horizon, c, r, mu_net, f_net, closed_form })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn mu_net(&self) -> &NeuralNetwork {
        &self.mu_net
    }

    pub fn f_net(&self) -> &NeuralNetwork {
        &self.f_net
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    /// `E[f(X^x(T))]` when known.
    pub fn exact(&self, x: &[f64]) -> Option<f64> {
        self.closed_form.map(|cf| cf.eval(x, self.horizon))
    }

    /// `μ(0, 0)`.
    pub fn mu_at_origin(&self) -> Vec<f64> {
        self.mu_net.realize(&vec![0.0; 2 * self.d]).expect("width checked at construction")
    }

    pub fn mu(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut z = Vec::with_capacity(2 * self.d);
        z.extend_from_slice(x);
        z.extend_from_slice(y);
        self.mu_net.realize(&z)
    }

    pub fn f(&self, x: &[f64]) -> Result<f64> {
        Ok(self.f_net.realize(x)?[0])
    }

    /// Same problem with a different horizon (closed forms depend on `T` only
    /// through evaluation).
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(
            self.id.clone(),
            self.d,
            horizon,
            self.c,
            self.r,
            self.mu_net.clone(),
            self.f_net.clone(),
            self.closed_form,
        )
    }

    /// Linear mean-field drift `μ(x, y) = a x + b y`, payoff `f(x) = x_1`.
    ///
    /// `E[X(t)]` solves `m' = (a + b) m`, hence `E[f(X^x(T))] = x_1 e^{(a+b)T}`.
    /// Lipschitz in the sense `‖μ(x,y) − μ(x',y')‖ ≤ |a|‖x−x'‖ + |b|‖y−y'‖`, so
    /// `c = max(1, 2|a|, 2|b|)`.
    pub fn linear(d: usize, a: f64, b: f64, horizon: f64) -> Result<Self> {
        let c = 1f64.max(2.0 * a.abs()).max(2.0 * b.abs());
        let mu = linear_drift_net(d, a, b)?;
        let f = coordinate_net(d, 0, 1.0)?;
        Self::new(format!("linear-d{d}"), d, horizon, c, 1, mu, f, Some(ClosedForm::FirstCoordinateExp { rate: a + b }))
    }

    /// The default linear problem, `a = 0`, `b = −1/2`.
    pub fn linear_default(d: usize, horizon: f64) -> Result<Self> {
        Self::linear(d, 0.0, -0.5, horizon)
    }

    /// Clipped mean reversion `μ_i(x, y) = ½ clip(y_i − x_i, −1, 1)` with
    /// payoff `f(x) = Σ_i relu(x_i) / √d`. Both are 1-Lipschitz in the
    /// required sense, so `c = 1`. No closed form.
    pub fn clip_mean_reversion(d: usize, horizon: f64) -> Result<Self> {
        let mu = clip_reversion_net(d)?;
        let f = relu_sum_net(d)?;
        Self::new(format!("clip-d{d}"), d, horizon, 1.0, 1, mu, f, None)
    }

    /// `μ ≡ 0`, `f ≡ value`.
    pub fn constant(d: usize, value: f64, horizon: f64) -> Result<Self> {
        let mu = zero_network(2 * d, d)?;
        let f = NeuralNetwork::new(vec![
            Layer::new(CsrMatrix::zeros(1, d), vec![0.0])?,
            Layer::new(CsrMatrix::zeros(1, 1), vec![value])?,
        ])?;
        Self::new(format!("const-d{d}"), d, horizon, 1.0, 1, mu, f, Some(ClosedForm::Constant(value)))
    }

    /// Pure Brownian motion: `μ ≡ 0`, `f(x) = x_1`.
    pub fn driftless(d: usize, horizon: f64) -> Result<Self> {
        let mu = zero_network(2 * d, d)?;
        let f = coordinate_net(d, 0, 1.0)?;
        Self::new(
            format!("driftless-d{d}"),
            d,
            horizon,
            1.0,
            1,
            mu,
            f,
            Some(ClosedForm::FirstCoordinateExp { rate: 0.0 }),
        )
    }
}

/// A base problem and its `ε`-perturbation sharing `d`, `T`, `c`, `r`.
#[derive(Debug, Clone)]
pub struct PerturbedPair {
    pub base: TestProblem,
    pub perturbed: TestProblem,
    pub eps: f64,
    /// Scale `b` in `‖μ_ε − μ_0‖ ≤ bε + ½bε‖x‖^r + ½bε‖y‖^r`.
    pub b: f64,
}

impl PerturbedPair {
    /// Perturbs the linear problem by `μ_ε = μ_0 + ε g`, `f_ε = f_0 + ε clip(x_1)`
    /// with `g(x, y) = clip(x_1, −1, 1) e_1`. Since `|clip| ≤ 1` the drift
    /// perturbation is bounded by `bε` with `b = 1`, the payoff perturbation by
    /// `ε`. The drift's Lipschitz constant in `x` grows from `|a|` to `|a| + ε`,
    /// so both problems carry `c = max(c_0, 2(|a| + ε))`.
    pub fn linear(d: usize, a: f64, b_coef: f64, horizon: f64, eps: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&eps) {
            return Err(Error::InvalidArgument(format!("perturbation size must lie in [0, 0.5), got {eps}")));
        }
        let base = TestProblem::linear(d, a, b_coef, horizon)?;
        let g = first_coordinate_clip_drift(d)?;
        let mu_eps = scaled_sum(&[base.mu_net(), &g], &[1.0, eps])?;
        let clip1 = clip_coordinate_net(d, 0)?;
        let f_eps = scaled_sum(&[base.f_net(), &clip1], &[1.0, eps])?;
        let c = base.c().max(2.0 * (a.abs() + eps));
        let id = base.id.clone();
        let base = TestProblem { c, ..base };
        let perturbed = TestProblem::new(format!("{id}-eps{eps}"), d, horizon, c, 1, mu_eps, f_eps, None)?;
        Ok(Self { base, perturbed, eps, b: 1.0 })
    }
}

fn dense_net(layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>) -> Result<NeuralNetwork> {
    NeuralNetwork::from_dense(layers)
}

/// `(x, y) ↦ a x + b y` via `u = relu(u) − relu(−u)`; dims `(2d, 2d, d)`.
pub fn linear_drift_net(d: usize, a: f64, b: f64) -> Result<NeuralNetwork> {
    let mut w1 = vec![vec![0.0; 2 * d]; 2 * d];
    let mut w2 = vec![vec![0.0; 2 * d]; d];
    for i in 0..d {
        w1[i][i] = a;
        w1[i][d + i] = b;
        w1[d + i][i] = -a;
        w1[d + i][d + i] = -b;
        w2[i][i] = 1.0;
        w2[i][d + i] = -1.0;
    }
    dense_net(vec![(w1, vec![0.0; 2 * d]), (w2, vec![0.0; d])])
}

/// `x ↦ s · x_j`; dims `(d, 2, 1)`.
pub fn coordinate_net(d: usize, j: usize, s: f64) -> Result<NeuralNetwork> {
    let mut w1 = vec![vec![0.0; d]; 2];
    w1[0][j] = 1.0;
    w1[1][j] = -1.0;
    dense_net(vec![(w1, vec![0.0; 2]), (vec![vec![s, -s]], vec![0.0])])
}

/// `x ↦ clip(x_j, −1, 1) = relu(x_j + 1) − relu(x_j − 1) − 1`; dims `(d, 2, 1)`.
pub fn clip_coordinate_net(d: usize, j: usize) -> Result<NeuralNetwork> {
    let mut w1 = vec![vec![0.0; d]; 2];
    w1[0][j] = 1.0;
    w1[1][j] = 1.0;
    dense_net(vec![(w1, vec![1.0, -1.0]), (vec![vec![1.0, -1.0]], vec![-1.0])])
}

/// `(x, y) ↦ clip(x_1, −1, 1) e_1`; dims `(2d, 2, d)`.
fn first_coordinate_clip_drift(d: usize) -> Result<NeuralNetwork> {
    let mut w1 = vec![vec![0.0; 2 * d]; 2];
    w1[0][0] = 1.0;
    w1[1][0] = 1.0;
    let mut w2 = vec![vec![0.0; 2]; d];
    w2[0] = vec![1.0, -1.0];
    let mut b2 = vec![0.0; d];
    b2[0] = -1.0;
    dense_net(vec![(w1, vec![1.0, -1.0]), (w2, b2)])
}

/// `μ_i(x, y) = ½ clip(y_i − x_i, −1, 1)`; dims `(2d, 2d, d)`.
fn clip_reversion_net(d: usize) -> Result<NeuralNetwork> {
    let mut w1 = vec![vec![0.0; 2 * d]; 2 * d];
    let mut b1 = vec![0.0; 2 * d];
    let mut w2 = vec![vec![0.0; 2 * d]; d];
    for i in 0..d {
        w1[i][i] = -1.0;
        w1[i][d + i] = 1.0;
        b1[i] = 1.0;
        w1[d + i][i] = -1.0;
        w1[d + i][d + i] = 1.0;
        b1[d + i] = -1.0;
        w2[i][i] = 0.5;
        w2[i][d + i] = -0.5;
    }
    dense_net(vec![(w1, b1), (w2, vec![-0.5; d])])
}

/// `x ↦ Σ_i relu(x_i) / √d`; dims `(d, d, 1)`.
fn relu_sum_net(d: usize) -> Result<NeuralNetwork> {
    let w1: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row = vec![0.0; d];
            row[i] = 1.0;
            row
        })
        .collect();
    let s = 1.0 / (d as f64).sqrt();
    dense_net(vec![(w1, vec![0.0; d]), (vec![vec![s; d]], vec![0.0])])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(u: f64) -> f64 {
        u.clamp(-1.0, 1.0)
    }

    #[test]
    fn linear_problem_realizes_its_formulas() {
        let p = TestProblem::linear(3, 0.3, -0.5, 1.0).unwrap();
        let x = [1.0, -2.0, 0.5];
        let y = [0.25, 4.0, -1.0];
        let mu = p.mu(&x, &y).unwrap();
        for i in 0..3 {
            assert!((mu[i] - (0.3 * x[i] - 0.5 * y[i])).abs() < 1e-14);
        }
        assert_eq!(p.f(&x).unwrap(), 1.0);
        assert_eq!(p.mu_net().dims().as_slice(), &[6, 6, 3]);
        assert!((p.exact(&[2.0, 0.0, 0.0]).unwrap() - 2.0 * (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn clip_problem_realizes_its_formulas() {
        let p = TestProblem::clip_mean_reversion(2, 1.0).unwrap();
        for (x, y) in [([0.0, 0.0], [3.0, -0.4]), ([1.5, -2.0], [0.0, 0.7])] {
            let mu = p.mu(&x, &y).unwrap();
            for i in 0..2 {
                assert!((mu[i] - 0.5 * clip(y[i] - x[i])).abs() < 1e-15);
            }
            let want = (x[0].max(0.0) + x[1].max(0.0)) / 2f64.sqrt();
            assert!((p.f(&x).unwrap() - want).abs() < 1e-15);
        }
        assert_eq!(p.mu_at_origin(), vec![0.0, 0.0]);
    }

    #[test]
    fn constant_and_driftless() {
        let p = TestProblem::constant(2, 1.75, 0.5).unwrap();
        assert_eq!(p.f(&[3.0, -1.0]).unwrap(), 1.75);
        assert_eq!(p.mu(&[1.0, 1.0], &[2.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        let q = TestProblem::driftless(1, 1.0).unwrap();
        assert_eq!(q.exact(&[0.4]), Some(0.4));
    }

    #[test]
    fn perturbation_size_is_as_documented() {
        let pair = PerturbedPair::linear(2, 0.0, -0.5, 1.0, 0.1).unwrap();
        for x1 in [-3.0, -0.5, 0.0, 0.2, 4.0] {
            let x = [x1, 1.0];
            let y = [0.3, -2.0];
            let m0 = pair.base.mu(&x, &y).unwrap();
            let me = pair.perturbed.mu(&x, &y).unwrap();
            assert!((me[0] - m0[0] - 0.1 * clip(x1)).abs() < 1e-14);
            assert!((me[1] - m0[1]).abs() < 1e-14);
            let df = pair.perturbed.f(&x).unwrap() - pair.base.f(&x).unwrap();
            assert!((df - 0.1 * clip(x1)).abs() < 1e-14);
        }
        assert!(PerturbedPair::linear(1, 0.0, -0.5, 1.0, 0.7).is_err());
    }

    #[test]
    fn shape_validation() {
        let mu = linear_drift_net(2, 0.0, 1.0).unwrap();
        let f = coordinate_net(3, 0, 1.0).unwrap();
        assert!(TestProblem::new("bad", 2, 1.0, 1.0, 1, mu, f, None).is_err());
    }
}
