//! Distributional checks of the noise tree.

use mkv_dnn::mlp::{NoiseTree, ThetaIndex};

#[test]
fn uniform_times_pass_kolmogorov_smirnov() {
    let tree = NoiseTree::new(11, 1.0, 1, 2, 1).unwrap();
    let n = 100_000;
    let mut u: Vec<f64> = (0..n as u64).map(|i| tree.uniform_time(&ThetaIndex::new(vec![i, 2, 1, 1]))).collect();
    assert!(u.iter().all(|v| (0.0..1.0).contains(v)));
    u.sort_by(f64::total_cmp);
    let dn = u
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / n as f64 - v).max(v - i as f64 / n as f64))
        .fold(0.0, f64::max);
    // 1% critical value 1.628 / √n.
    assert!(dn < 1.628 / (n as f64).sqrt(), "D_n = {dn}");
}

#[test]
fn brownian_marginals_and_increments() {
    let (t, d, m, g) = (2.0, 3, 2, 2);
    let tree = NoiseTree::new(5, t, d, m, g).unwrap();
    let n = 100_000;
    let (mut sum, mut sq, mut cross) = (vec![0.0; d], vec![0.0; d], 0.0);
    let mut incr_sq = 0.0;
    for i in 0..n as u64 {
        let path = tree.brownian_path(&ThetaIndex::sample(i));
        assert_eq!(path.len(), 5 * d);
        assert!(path[..d].iter().all(|&v| v == 0.0));
        let end = &path[4 * d..];
        for j in 0..d {
            sum[j] += end[j];
            sq[j] += end[j] * end[j];
        }
        cross += end[0] * end[1];
        // W(1.0) − W(0.5) on the first coordinate, variance 0.5.
        let inc = path[2 * d] - path[d];
        incr_sq += inc * inc;
    }
    let nf = n as f64;
    for j in 0..d {
        let mean = sum[j] / nf;
        let var = sq[j] / nf - mean * mean;
        // Standard errors: √(t/n) ≈ 0.0045 for the mean, t√(2/n) ≈ 0.009 for the variance.
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - t).abs() < 0.05, "var {var}");
    }
    assert!((cross / nf).abs() < 0.04, "cov {}", cross / nf);
    assert!((incr_sq / nf - 0.5).abs() < 0.015, "increment variance {}", incr_sq / nf);
}

#[test]
fn seeds_and_indices_give_distinct_noise() {
    let a = NoiseTree::new(1, 1.0, 2, 2, 2).unwrap();
    let b = NoiseTree::new(2, 1.0, 2, 2, 2).unwrap();
    let th = ThetaIndex::sample(1);
    assert_ne!(a.brownian_path(&th), b.brownian_path(&th));
    assert_ne!(a.brownian_path(&th), a.brownian_path(&ThetaIndex::sample(2)));
    // (1, 0) and (1) differ only in length.
    assert_ne!(a.uniform_time(&th), a.uniform_time(&ThetaIndex::new(vec![1, 0])));
    assert_eq!(a.brownian_path(&th), NoiseTree::new(1, 1.0, 2, 2, 2).unwrap().brownian_path(&th));
}
