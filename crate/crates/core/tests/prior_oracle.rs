use dynrecon_core::operators::{forward_op, gradient};
use dynrecon_core::regularization::tv_value;
use dynrecon_core::solver::{reconstruct_prior, PriorSolver, StepSizes, StoppingRule};
use dynrecon_core::{Image, SamplingPattern, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const H: usize = 16;
const W: usize = 16;
const ALPHA: f64 = 10.0;

fn noisy_step(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..H * W)
        .map(|i| {
            let clean = if i % W >= W / 2 { 1.0 } else { 0.2 };
            clean + 0.1 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect()
}

/// Forward differences with a Neumann boundary, on real images.
fn grad(u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; H * W];
    let mut gy = vec![0.0; H * W];
    for y in 0..H {
        for x in 0..W {
            let i = y * W + x;
            if x + 1 < W {
                gx[i] = u[i + 1] - u[i];
            }
            if y + 1 < H {
                gy[i] = u[i + W] - u[i];
            }
        }
    }
    (gx, gy)
}

/// Transpose of `grad`.
fn grad_t(px: &[f64], py: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; H * W];
    for y in 0..H {
        for x in 0..W {
            let i = y * W + x;
            if x + 1 < W {
                out[i + 1] += px[i];
                out[i] -= px[i];
            }
            if y + 1 < H {
                out[i + W] += py[i];
                out[i] -= py[i];
            }
        }
    }
    out
}

/// Minimizes `(alpha/2)||u - g||^2 + sum sqrt(|grad u|^2 + eps^2)` with
/// Nesterov's method for strongly convex smooth objectives.
fn smoothed_tv_oracle(g: &[f64], alpha: f64, eps: f64, steps: usize) -> Vec<f64> {
    let lipschitz = alpha + 8.0 / eps;
    let q = alpha / lipschitz;
    let momentum = (1.0 - q.sqrt()) / (1.0 + q.sqrt());
    let gradient_at = |u: &[f64]| -> Vec<f64> {
        let (gx, gy) = grad(u);
        let (px, py): (Vec<f64>, Vec<f64>) = gx
            .iter()
            .zip(&gy)
            .map(|(a, b)| {
                let m = (a * a + b * b + eps * eps).sqrt();
                (a / m, b / m)
            })
            .unzip();
        let tv = grad_t(&px, &py);
        u.iter().zip(g).zip(tv).map(|((ui, gi), t)| alpha * (ui - gi) + t).collect()
    };
    let mut x = g.to_vec();
    let mut v = g.to_vec();
    for _ in 0..steps {
        let d = gradient_at(&v);
        let next: Vec<f64> = v.iter().zip(&d).map(|(vi, di)| vi - di / lipschitz).collect();
        v = next.iter().zip(&x).map(|(n, o)| n + momentum * (n - o)).collect();
        x = next;
    }
    x
}

fn full_sampling_data(g: &[f64]) -> (SamplingPattern, Vec<C64>) {
    let pattern = SamplingPattern::identity(H, W);
    let f = forward_op(&Image::from_real(H, W, g).unwrap(), &pattern, 0).unwrap();
    (pattern, f)
}

fn tight_rule() -> StoppingRule {
    StoppingRule { energy_rel_tol: 1e-10, residual_tol: 1e-6, check_interval: 10, max_iterations: 5000 }
}

#[test]
fn pd_agrees_with_smoothed_tv_oracle() {
    let g = noisy_step(3);
    let (pattern, f) = full_sampling_data(&g);
    // Full sampling makes the data term strong; a small primal step balances it.
    let steps = StepSizes::Balanced { ratio: 0.001 };
    let result = reconstruct_prior(&f, &pattern, ALPHA, tight_rule(), steps).unwrap();
    let last = result.history.last().unwrap().residual;
    assert!(last < 1e-6, "residual {last} after {} iterations", result.iterations);

    let oracle = smoothed_tv_oracle(&g, ALPHA, 1e-6, 100_000);
    let rmse = (result
        .image
        .as_slice()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - C64::new(*b, 0.0)).norm_sqr())
        .sum::<f64>()
        / (H * W) as f64)
        .sqrt();
    assert!(rmse < 1e-3, "rmse {rmse}");
}

#[test]
fn converged_duals_certify_optimality() {
    let g = noisy_step(5);
    let (pattern, f) = full_sampling_data(&g);
    let result = reconstruct_prior(&f, &pattern, ALPHA, tight_rule(), StepSizes::Auto).unwrap();
    assert!(result.y2.max_magnitude() <= 1.0 + 1e-9);

    // Optimality of u: A^H y1 - div y2 = 0, with A the unitary DFT here, so
    // y1 = alpha (A u - f~) and the condition reads alpha (u - g) + grad^T y2 = 0.
    let y2x: Vec<f64> = result.y2.dx.iter().map(|v| v.re).collect();
    let y2y: Vec<f64> = result.y2.dy.iter().map(|v| v.re).collect();
    let gt = grad_t(&y2x, &y2y);
    let mut worst = 0.0f64;
    for i in 0..H * W {
        let r = ALPHA * (result.image.as_slice()[i].re - g[i]) + gt[i];
        worst = worst.max(r.abs());
    }
    assert!(worst < 1e-3, "stationarity violation {worst}");

    // Duality: <y2, grad u> = TV(u) at the optimum.
    let gu = gradient(&result.image);
    let pairing: f64 = (0..H * W).map(|i| (result.y2.dx[i].conj() * gu.dx[i] + result.y2.dy[i].conj() * gu.dy[i]).re).sum();
    let tv = tv_value(&result.image);
    assert!((pairing - tv).abs() < 1e-3 * tv.max(1.0), "{pairing} vs {tv}");
}

#[test]
fn constant_data_returns_the_constant_for_any_weight() {
    let pattern = SamplingPattern::identity(H, W);
    let c = C64::new(0.4, 0.1);
    let f = forward_op(&Image::constant(H, W, c), &pattern, 0).unwrap();
    for alpha in [0.1, 2.0, 100.0] {
        let r = reconstruct_prior(&f, &pattern, alpha, StoppingRule::default(), StepSizes::Auto).unwrap();
        assert!(r.image.as_slice().iter().all(|v| (v - c).norm() < 1e-9));
    }
}

#[test]
fn initial_iterate_is_the_zero_filled_image() {
    let g = noisy_step(9);
    let (pattern, f) = full_sampling_data(&g);
    let solver = PriorSolver::new(&f, &pattern, 2.0, StoppingRule::default(), StepSizes::Auto).unwrap();
    for (a, b) in solver.image().as_slice().iter().zip(&g) {
        assert!((a - C64::new(*b, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn invalid_weight_is_rejected() {
    let (pattern, f) = full_sampling_data(&noisy_step(1));
    assert!(reconstruct_prior(&f, &pattern, 0.0, StoppingRule::default(), StepSizes::Auto).is_err());
    assert!(reconstruct_prior(&f, &pattern, -1.0, StoppingRule::default(), StepSizes::Auto).is_err());
}
