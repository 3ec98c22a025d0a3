use std::f64::consts::PI;

use dynrecon_core::operators::{forward_op, PatternFrame, SamplingPattern};
use dynrecon_core::solver::ls_reconstruct;
use dynrecon_core::{Image, C64};
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense `K = S F` with `F` the DFT normalized by `1 / N`.
fn dense_operator(h: usize, w: usize, indices: &[usize]) -> DMatrix<C64> {
    let n = (h * w) as f64;
    DMatrix::from_fn(indices.len(), h * w, |r, c| {
        let (ky, kx) = (indices[r] / w, indices[r] % w);
        let (y, x) = (c / w, c % w);
        let phase = -2.0 * PI * ((ky * y) as f64 / h as f64 + (kx * x) as f64 / w as f64);
        C64::from_polar(1.0 / n, phase)
    })
}

#[test]
fn cg_matches_dense_pseudoinverse_on_underdetermined_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (h, w) = (8, 8);
    for m in [5, 17, 40] {
        let mut indices = sample(&mut rng, h * w, m).into_vec();
        indices.sort_unstable();
        let pattern = SamplingPattern::new(h, w, vec![PatternFrame::new(indices.clone())]).unwrap();
        let f: Vec<C64> = (0..m).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();

        let k = dense_operator(h, w, &indices);
        let pinv = k.clone().pseudo_inverse(1e-12).unwrap();
        let oracle = &pinv * DVector::from_vec(f.clone());
        let oracle_residual = (&k * &oracle - DVector::from_vec(f.clone())).norm();

        let u = ls_reconstruct(&f, &pattern, 0, 200).unwrap();
        let ku = forward_op(&u, &pattern, 0).unwrap();
        let residual = ku.iter().zip(&f).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!((residual - oracle_residual).abs() < 1e-8, "m = {m}: {residual} vs {oracle_residual}");

        let diff = u.as_slice().iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-8 * oracle.norm().max(1.0), "m = {m}: min-norm solution off by {diff}");
    }
}

#[test]
fn cg_default_iterations_fit_data_on_spoke_patterns() {
    let pattern = dynrecon_core::sim::golden_angle_pattern(1, 5, 32, 24, 111.25).unwrap();
    let truth = Image::from_fn(32, 24, |y, x| C64::new(((y * 7 + x * 3) % 5) as f64 * 0.2, 0.0));
    let f = forward_op(&truth, &pattern, 0).unwrap();
    let u = ls_reconstruct(&f, &pattern, 0, 50).unwrap();
    let ku = forward_op(&u, &pattern, 0).unwrap();
    let rel = ku.iter().zip(&f).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
        / f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!(rel < 1e-10, "relative residual {rel}");
}
