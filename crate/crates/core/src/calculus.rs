//! Dimension-vector algebra and the matching network constructions.
//!
//! Each network operation has a dimension law that holds structurally:
//! `compose` follows `⊙`, `scaled_sum` follows `⊞`, `merge` follows `⊡`, and
//! `identity_network(d, H)` has dims `𝔫_{H+2}^d = (d, 2d, ..., 2d, d)`.

use crate::network::{CsrMatrix, DimVector, Layer, NeuralNetwork};
use crate::{Error, Result};

/// `α ⊙ β = (β_0, ..., β_H, β_{H+1} + α_0, α_1, ..., α_{last})`.
pub fn dim_compose(alpha: &DimVector, beta: &DimVector) -> DimVector {
    let a = alpha.as_slice();
    let b = beta.as_slice();
    let mut v = Vec::with_capacity(a.len() + b.len() - 1);
    v.extend_from_slice(&b[..b.len() - 1]);
    v.push(b[b.len() - 1] + a[0]);
    v.extend_from_slice(&a[1..]);
    DimVector::new(v).expect("⊙ of valid vectors is valid")
}

fn check_same_length(alpha: &DimVector, beta: &DimVector) -> Result<()> {
    if alpha.len() != beta.len() {
        return Err(Error::ShapeMismatch(format!("dimension vectors have lengths {} and {}", alpha.len(), beta.len())));
    }
    if alpha.input() != beta.input() {
        return Err(Error::ShapeMismatch(format!("first entries differ: {} vs {}", alpha.input(), beta.input())));
    }
    Ok(())
}

/// `α ⊞ β`: interior entries summed, endpoints shared.
pub fn dim_sum(alpha: &DimVector, beta: &DimVector) -> Result<DimVector> {
    check_same_length(alpha, beta)?;
    if alpha.output() != beta.output() {
        return Err(Error::ShapeMismatch(format!("last entries differ: {} vs {}", alpha.output(), beta.output())));
    }
    let (a, b) = (alpha.as_slice(), beta.as_slice());
    let last = a.len() - 1;
    let v = (0..a.len()).map(|i| if i == 0 || i == last { a[i] } else { a[i] + b[i] }).collect();
    DimVector::new(v)
}

/// `α ⊡ β`: first entry shared, every other entry summed.
pub fn dim_merge(alpha: &DimVector, beta: &DimVector) -> Result<DimVector> {
    check_same_length(alpha, beta)?;
    let (a, b) = (alpha.as_slice(), beta.as_slice());
    let v = (0..a.len()).map(|i| if i == 0 { a[0] } else { a[i] + b[i] }).collect();
    DimVector::new(v)
}

/// `𝔫_len^d = (d, 2d, ..., 2d, d)` with `len` entries.
pub fn identity_dims(d: usize, len: usize) -> Result<DimVector> {
    if d == 0 || len < 3 {
        return Err(Error::InvalidArgument(format!("identity_dims needs d >= 1 and len >= 3, got d={d}, len={len}")));
    }
    let mut v = vec![2 * d; len];
    v[0] = d;
    v[len - 1] = d;
    DimVector::new(v)
}

/// `[I; -I]` (2d × d).
fn split_matrix(d: usize) -> CsrMatrix {
    CsrMatrix::vstack(&[&CsrMatrix::identity(d), &CsrMatrix::scaled_identity(d, -1.0)])
}

/// `[I, -I]` (d × 2d).
fn join_matrix(d: usize) -> CsrMatrix {
    CsrMatrix::hstack(&[&CsrMatrix::identity(d), &CsrMatrix::scaled_identity(d, -1.0)])
}

fn negated_stack(layer: &Layer) -> Layer {
    let w = CsrMatrix::vstack(&[&layer.weights, &layer.weights.scaled(-1.0)]);
    let mut b = layer.bias.clone();
    b.extend(layer.bias.iter().map(|v| -v));
    Layer { weights: w, bias: b }
}

/// ReLU identity on `ℝ^d` with `hidden_layers` hidden layers of width `2d`,
/// using `x = relu(x) - relu(-x)`.
pub fn identity_network(d: usize, hidden_layers: usize) -> Result<NeuralNetwork> {
    if d == 0 || hidden_layers == 0 {
        return Err(Error::InvalidArgument(format!(
            "identity_network needs d >= 1 and H >= 1, got d={d}, H={hidden_layers}"
        )));
    }
    let mut layers = Vec::with_capacity(hidden_layers + 1);
    layers.push(Layer { weights: split_matrix(d), bias: vec![0.0; 2 * d] });
    for _ in 1..hidden_layers {
        layers.push(Layer { weights: CsrMatrix::identity(2 * d), bias: vec![0.0; 2 * d] });
    }
    layers.push(Layer { weights: join_matrix(d), bias: vec![0.0; d] });
    NeuralNetwork::new(layers)
}

/// Network with dims `(p, 1, q)` realizing the zero map `ℝ^p → ℝ^q`.
pub fn zero_network(p: usize, q: usize) -> Result<NeuralNetwork> {
    NeuralNetwork::new(vec![
        Layer::new(CsrMatrix::zeros(1, p), vec![0.0])?,
        Layer::new(CsrMatrix::zeros(q, 1), vec![0.0; q])?,
    ])
}

/// `f ∘ g`. The last affine map `u = W x + B` of `g` becomes the hidden layer
/// `(relu(u), relu(-u))`, and `f`'s first weight `V` becomes `[V, -V]`.
/// Dims follow `D(f) ⊙ D(g)`.
pub fn compose(f: &NeuralNetwork, g: &NeuralNetwork) -> Result<NeuralNetwork> {
    if f.input_dim() != g.output_dim() {
        return Err(Error::DimensionMismatch { expected: g.output_dim(), got: f.input_dim() });
    }
    let gl = g.layers();
    let fl = f.layers();
    let mut layers = Vec::with_capacity(gl.len() + fl.len());
    layers.extend_from_slice(&gl[..gl.len() - 1]);
    layers.push(negated_stack(&gl[gl.len() - 1]));
    let v = &fl[0].weights;
    layers.push(Layer { weights: CsrMatrix::hstack(&[v, &v.scaled(-1.0)]), bias: fl[0].bias.clone() });
    layers.extend_from_slice(&fl[1..]);
    NeuralNetwork::new(layers)
}

fn check_parallel(nets: &[&NeuralNetwork], same_output: bool) -> Result<()> {
    let first = nets.first().ok_or_else(|| Error::InvalidArgument("empty network list".into()))?;
    for n in &nets[1..] {
        if n.depth() != first.depth() {
            return Err(Error::ShapeMismatch(format!("depths {} and {}", first.depth(), n.depth())));
        }
        if n.input_dim() != first.input_dim() {
            return Err(Error::ShapeMismatch(format!("input widths {} and {}", first.input_dim(), n.input_dim())));
        }
        if same_output && n.output_dim() != first.output_dim() {
            return Err(Error::ShapeMismatch(format!("output widths {} and {}", first.output_dim(), n.output_dim())));
        }
    }
    Ok(())
}

/// First and hidden layers of a parallel stack: first weights stacked
/// vertically, later hidden weights block-diagonal, biases concatenated.
fn parallel_hidden(nets: &[&NeuralNetwork]) -> Vec<Layer> {
    let n_layers = nets[0].layers().len();
    let mut layers = Vec::with_capacity(n_layers);
    for li in 0..n_layers - 1 {
        let ws: Vec<&CsrMatrix> = nets.iter().map(|n| &n.layers()[li].weights).collect();
        let weights = if li == 0 { CsrMatrix::vstack(&ws) } else { CsrMatrix::block_diag(&ws) };
        let bias = nets.iter().flat_map(|n| n.layers()[li].bias.iter().copied()).collect();
        layers.push(Layer { weights, bias });
    }
    layers
}

/// `x ↦ Σ_i h_i f_i(x)` for networks of equal depth and equal in/out widths.
/// Dims follow the `⊞`-fold. Zero coefficients keep their summand's widths.
pub fn scaled_sum(nets: &[&NeuralNetwork], coeffs: &[f64]) -> Result<NeuralNetwork> {
    check_parallel(nets, true)?;
    if coeffs.len() != nets.len() {
        return Err(Error::DimensionMismatch { expected: nets.len(), got: coeffs.len() });
    }
    let mut layers = parallel_hidden(nets);
    let last = nets[0].layers().len() - 1;
    let scaled: Vec<CsrMatrix> = nets.iter().zip(coeffs).map(|(n, &h)| n.layers()[last].weights.scaled(h)).collect();
    let refs: Vec<&CsrMatrix> = scaled.iter().collect();
    let mut bias = vec![0.0; nets[0].output_dim()];
    for (n, &h) in nets.iter().zip(coeffs) {
        for (acc, b) in bias.iter_mut().zip(&n.layers()[last].bias) {
            *acc += h * b;
        }
    }
    layers.push(Layer { weights: CsrMatrix::hstack(&refs), bias });
    NeuralNetwork::new(layers)
}

/// `x ↦ (f_1(x), ..., f_M(x))` for networks of equal depth and input width.
/// Dims follow the `⊡`-fold.
pub fn merge(nets: &[&NeuralNetwork]) -> Result<NeuralNetwork> {
    check_parallel(nets, false)?;
    let mut layers = parallel_hidden(nets);
    let last = nets[0].layers().len() - 1;
    let ws: Vec<&CsrMatrix> = nets.iter().map(|n| &n.layers()[last].weights).collect();
    let bias = nets.iter().flat_map(|n| n.layers()[last].bias.iter().copied()).collect();
    layers.push(Layer { weights: CsrMatrix::block_diag(&ws), bias });
    NeuralNetwork::new(layers)
}

/// `x ↦ λ (f(x + b) + a)`, same dims as `f`.
pub fn affine_wrap(net: &NeuralNetwork, lambda: f64, b: &[f64], a: &[f64]) -> Result<NeuralNetwork> {
    if b.len() != net.input_dim() {
        return Err(Error::DimensionMismatch { expected: net.input_dim(), got: b.len() });
    }
    if a.len() != net.output_dim() {
        return Err(Error::DimensionMismatch { expected: net.output_dim(), got: a.len() });
    }
    let mut layers = net.layers().to_vec();
    let shift = layers[0].weights.mul_vec(b);
    for (bias, s) in layers[0].bias.iter_mut().zip(shift) {
        *bias += s;
    }
    let last = layers.last_mut().unwrap();
    last.weights = last.weights.scaled(lambda);
    for (bias, ai) in last.bias.iter_mut().zip(a) {
        *bias = lambda * (*bias + ai);
    }
    NeuralNetwork::new(layers)
}

/// Same realization, `extra_hidden` more entries in the dimension vector,
/// obtained by composing an identity network on the output side.
pub fn extend_depth(net: &NeuralNetwork, extra_hidden: usize) -> NeuralNetwork {
    match extra_hidden {
        0 => net.clone(),
        1 => {
            // Identity with zero hidden layers: split the last affine map and
            // rejoin it.
            let q = net.output_dim();
            let mut layers = net.layers().to_vec();
            let last = layers.pop().unwrap();
            layers.push(negated_stack(&last));
            layers.push(Layer { weights: join_matrix(q), bias: vec![0.0; q] });
            NeuralNetwork::new(layers).expect("valid by construction")
        }
        e => {
            let id = identity_network(net.output_dim(), e - 1).expect("q >= 1, H >= 1");
            compose(&id, net).expect("widths agree")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::max_rel_dev;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[usize]) -> DimVector {
        DimVector::new(v.to_vec()).unwrap()
    }

    fn rand_x(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()
    }

    #[test]
    fn dim_operator_examples() {
        assert_eq!(dim_compose(&dv(&[1, 2, 1]), &dv(&[3, 4, 2])), dv(&[3, 4, 3, 2, 1]));
        assert_eq!(dim_compose(&dv(&[1, 2, 1]), &dv(&[1, 2, 1])), dv(&[1, 2, 2, 2, 1]));
        assert_eq!(dim_sum(&dv(&[1, 2, 1]), &dv(&[1, 3, 1])).unwrap(), dv(&[1, 5, 1]));
        assert_eq!(dim_merge(&dv(&[1, 2, 1]), &dv(&[1, 3, 2])).unwrap(), dv(&[1, 5, 3]));
        assert_eq!(dim_merge(&dv(&[2, 4, 2]), &dv(&[2, 4, 2])).unwrap(), dv(&[2, 8, 4]));
        assert_eq!(identity_dims(3, 4).unwrap(), dv(&[3, 6, 6, 3]));
        assert_eq!(identity_dims(1, 3).unwrap(), dv(&[1, 2, 1]));
    }

    #[test]
    fn dim_operator_mismatches() {
        assert!(dim_sum(&dv(&[1, 2, 1]), &dv(&[1, 2, 2, 1])).is_err());
        assert!(dim_sum(&dv(&[1, 2, 1]), &dv(&[2, 2, 1])).is_err());
        assert!(dim_sum(&dv(&[1, 2, 1]), &dv(&[1, 2, 2])).is_err());
        assert!(dim_merge(&dv(&[1, 2, 1]), &dv(&[2, 2, 1])).is_err());
        assert!(identity_dims(2, 2).is_err());
    }

    #[test]
    fn identity_examples() {
        let id = identity_network(2, 1).unwrap();
        assert_eq!(id.realize(&[-1.5, 2.0]).unwrap(), vec![-1.5, 2.0]);
        assert_eq!(identity_network(1, 3).unwrap().realize(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(identity_network(3, 2).unwrap().dims(), dv(&[3, 6, 6, 3]));
        assert!(identity_network(2, 0).is_err());
    }

    #[test]
    fn identity_is_exact_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.random_range(1..=8);
            let h = rng.random_range(1..=4);
            let x = rand_x(&mut rng, d);
            let id = identity_network(d, h).unwrap();
            assert_eq!(id.realize(&x).unwrap(), x);
            assert_eq!(id.dims(), identity_dims(d, h + 2).unwrap());
        }
    }

    fn affine_1d(scale: f64, shift: f64) -> NeuralNetwork {
        // x ↦ scale·x + shift through one identity hidden layer.
        affine_wrap(&identity_network(1, 1).unwrap(), 1.0, &[0.0], &[0.0])
            .and_then(|id| {
                let mut layers = id.into_layers();
                let last = layers.last_mut().unwrap();
                last.weights = last.weights.scaled(scale);
                last.bias = vec![shift];
                NeuralNetwork::new(layers)
            })
            .unwrap()
    }

    #[test]
    fn compose_example() {
        let f = affine_1d(3.0, 0.0);
        let g = affine_1d(2.0, 1.0);
        let h = compose(&f, &g).unwrap();
        assert_eq!(h.realize(&[1.0]).unwrap(), vec![9.0]);
        assert_eq!(h.dims(), dim_compose(&f.dims(), &g.dims()));
        assert!(compose(&identity_network(2, 1).unwrap(), &g).is_err());
    }

    #[test]
    fn scaled_sum_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = NeuralNetwork::random(&mut rng, &[3, 4, 2]).unwrap();
        let zero = scaled_sum(&[&f, &f], &[1.0, -1.0]).unwrap();
        let single = scaled_sum(&[&f], &[2.5]).unwrap();
        for _ in 0..10 {
            let x = rand_x(&mut rng, 3);
            assert!(zero.realize(&x).unwrap().iter().all(|v| v.abs() < 1e-12));
            let want: Vec<f64> = f.realize(&x).unwrap().iter().map(|v| 2.5 * v).collect();
            assert!(max_rel_dev(&single.realize(&x).unwrap(), &want) < 1e-12);
        }
        assert!(scaled_sum(&[], &[]).is_err());
        let g = NeuralNetwork::random(&mut rng, &[3, 4, 4, 2]).unwrap();
        assert!(scaled_sum(&[&f, &g], &[1.0, 1.0]).is_err());
        assert!(scaled_sum(&[&f, &f], &[1.0]).is_err());
    }

    #[test]
    fn zero_coefficient_keeps_widths() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = NeuralNetwork::random(&mut rng, &[2, 3, 1]).unwrap();
        let g = NeuralNetwork::random(&mut rng, &[2, 5, 1]).unwrap();
        assert_eq!(scaled_sum(&[&f, &g], &[1.0, 0.0]).unwrap().dims(), dv(&[2, 8, 1]));
    }

    #[test]
    fn merge_examples() {
        let id = identity_network(1, 1).unwrap();
        assert_eq!(merge(&[&id, &id]).unwrap().realize(&[2.0]).unwrap(), vec![2.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = NeuralNetwork::random(&mut rng, &[1, 2, 1]).unwrap();
        let b = NeuralNetwork::random(&mut rng, &[1, 3, 2]).unwrap();
        assert_eq!(merge(&[&a, &b]).unwrap().dims(), dv(&[1, 5, 3]));
    }

    #[test]
    fn affine_wrap_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = NeuralNetwork::random(&mut rng, &[2, 5, 3]).unwrap();
        let same = affine_wrap(&f, 1.0, &[0.0; 2], &[0.0; 3]).unwrap();
        let zero = affine_wrap(&f, 0.0, &[0.3, 0.1], &[1.0; 3]).unwrap();
        for _ in 0..10 {
            let x = rand_x(&mut rng, 2);
            assert_eq!(same.realize(&x).unwrap(), f.realize(&x).unwrap());
            assert!(zero.realize(&x).unwrap().iter().all(|&v| v == 0.0));
        }
        assert!(affine_wrap(&f, 1.0, &[0.0; 3], &[0.0; 3]).is_err());
        assert!(affine_wrap(&f, 1.0, &[0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn extend_depth_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = NeuralNetwork::random(&mut rng, &[2, 4, 3]).unwrap();
        assert_eq!(extend_depth(&f, 0), f);
        for e in 1..=4 {
            let g = extend_depth(&f, e);
            assert_eq!(g.depth(), f.depth() + e);
            for _ in 0..5 {
                let x = rand_x(&mut rng, 2);
                assert!(max_rel_dev(&g.realize(&x).unwrap(), &f.realize(&x).unwrap()) <= 1e-12);
            }
        }
    }

    fn dims_strategy(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<usize>> {
        len.prop_flat_map(|l| prop::collection::vec(1usize..=6, l))
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in dims_strategy(3..=5), b in dims_strategy(3..=5), c in dims_strategy(3..=5)) {
            let (a, b, c) = (dv(&a), dv(&b), dv(&c));
            prop_assert_eq!(
                dim_compose(&dim_compose(&a, &b), &c),
                dim_compose(&a, &dim_compose(&b, &c))
            );
        }

        #[test]
        fn sum_triangle_and_associativity(
            len in 3usize..=5, ends in (1usize..=6, 1usize..=6),
            seeds in prop::collection::vec(prop::collection::vec(1usize..=6, 3), 3)
        ) {
            let mk = |s: &Vec<usize>| {
                let mut v: Vec<usize> = (0..len).map(|i| s[i % 3]).collect();
                v[0] = ends.0;
                v[len - 1] = ends.1;
                dv(&v)
            };
            let (a, b, c) = (mk(&seeds[0]), mk(&seeds[1]), mk(&seeds[2]));
            let ab = dim_sum(&a, &b).unwrap();
            prop_assert!(ab.supnorm() <= a.supnorm() + b.supnorm());
            prop_assert_eq!(dim_sum(&ab, &c).unwrap(), dim_sum(&a, &dim_sum(&b, &c).unwrap()).unwrap());
        }

        #[test]
        fn compose_chain_supnorm(chain in prop::collection::vec(dims_strategy(3..=4), 2..=4)) {
            // Make the chain composable: each output feeds the next input.
            let mut nets: Vec<Vec<usize>> = chain;
            for i in 1..nets.len() {
                let out = *nets[i - 1].last().unwrap();
                nets[i][0] = out;
            }
            let mut acc = dv(&nets[0]);
            let mut bound = acc.supnorm();
            for w in nets.iter().skip(1) {
                let next = dv(w);
                bound = bound.max(next.supnorm()).max(2 * next.input());
                acc = dim_compose(&next, &acc);
            }
            prop_assert!(acc.supnorm() <= bound);
        }

        #[test]
        fn param_count_vs_depth_width(dims in dims_strategy(3..=6)) {
            let v = dv(&dims);
            let w = v.supnorm() as u64;
            prop_assert!(v.param_count() <= 2 * v.len() as u64 * w * w);
        }
    }
}
