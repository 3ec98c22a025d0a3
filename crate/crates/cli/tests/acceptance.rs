//! Reproduction checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Runs on a single rayon thread so the reported
//! runtimes are single-threaded.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dynrecon_cli::config::{default_weights, RunConfig, Weights};
use dynrecon_core::eval::{pearson, peak_amplitude, roi_mean_curve, roi_rmse, tail_variance, RoiSpec};
use dynrecon_core::operators::{adjoint_op, dft_forward, dft_inverse, divergence, forward_op, gradient};
use dynrecon_core::regularization::{
    bregman_distance, extract_subgradient, icbtv_value, project_dual_ball, prox_dual_quadratic, tv_value, Sign,
};
use dynrecon_core::sim::{golden_angle_pattern, simulate, SimulatedDataset, ACTIVATED_ROI, GOLDEN_ANGLE_DEG};
use dynrecon_core::solver::{
    reconstruct, reconstruct_dynamic, reconstruct_prior, PrimalDual, StepSizes, StoppingRule,
};
use dynrecon_core::{
    Image, ImageSequence, KSpaceData, Method, MethodSpec, PatternFrame, SamplingPattern, SubgradientField,
    VectorField, C64,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<(bool, String), String>;

fn main() -> ExitCode {
    rayon::ThreadPoolBuilder::new().num_threads(1).build_global().expect("first pool");
    let checks: [(&str, fn() -> Outcome); 7] = [
        ("operator adjoints and DFT round trip", operators),
        ("prox and projection exactness", prox_and_projection),
        ("prior solver against smoothed-TV oracle", prior_oracle),
        ("structural reductions", reductions),
        ("Bregman and ICB identities", bregman_identities),
        ("sampling pattern properties", sampling),
        ("determinism of the command pipeline", determinism),
    ];
    let mut all_pass = true;
    let mut report = |id: usize, title: &str, outcome: Outcome| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        all_pass &= pass;
        println!("criterion {id:>2} {} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    for (id, (title, f)) in [1, 2, 3, 4, 5, 9, 10].into_iter().zip(checks) {
        report(id, title, f());
    }
    match desk_scale() {
        Ok(d) => {
            report(6, "desk-scale reproduction", Ok(d.criterion6()));
            report(7, "temporal weight trade-off", Ok(d.criterion7()));
            report(8, "chunking fidelity", Ok(d.criterion8()));
        }
        Err(e) => {
            for (id, title) in [(6, "desk-scale reproduction"), (7, "temporal weight trade-off"), (8, "chunking fidelity")] {
                report(id, title, Err(e.clone()));
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    Image::from_fn(h, w, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_field(rng: &mut ChaCha8Rng, h: usize, w: usize, scale: f64) -> VectorField {
    let mut v = || C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
    let dx = (0..h * w).map(|_| v()).collect();
    let dy = (0..h * w).map(|_| v()).collect();
    VectorField::new(h, w, dx, dy).expect("matching sizes")
}

/// `sum conj(a) b`.
fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn field_dot(a: &VectorField, b: &VectorField) -> C64 {
    dot(&a.dx, &b.dx) + dot(&a.dy, &b.dy)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn max_diff(a: &Image, b: &Image) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn operators() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut grad_err, mut k_err, mut dft_err) = (0.0f64, 0.0f64, 0.0f64);
    for (h, w) in [(32, 32), (109, 91)] {
        let pattern = golden_angle_pattern(100, 5, h, w, GOLDEN_ANGLE_DEG).map_err(err)?;
        for t in 0..100 {
            let u = random_image(&mut rng, h, w);
            let p = random_field(&mut rng, h, w, 1.0);
            let neg_div = divergence(&p).scaled(C64::new(-1.0, 0.0));
            grad_err = grad_err.max(rel(field_dot(&gradient(&u), &p), dot(u.as_slice(), neg_div.as_slice())));

            let m = pattern.samples(t);
            let z: Vec<C64> = (0..m).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let ku = forward_op(&u, &pattern, t).map_err(err)?;
            let kz = adjoint_op(&z, &pattern, t).map_err(err)?;
            k_err = k_err.max(rel(dot(&ku, &z), dot(u.as_slice(), kz.as_slice())));

            let back = dft_inverse(&dft_forward(&u));
            dft_err = dft_err.max(max_diff(&back, &u) / u.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }
    let elapsed = start.elapsed();
    let pass = grad_err <= 1e-10 && k_err <= 1e-10 && dft_err <= 1e-12 && elapsed < Duration::from_secs(10);
    Ok((
        pass,
        format!(
            "grad/-div {grad_err:.1e}, K/K* {k_err:.1e} (<= 1e-10); DFT round trip {dft_err:.1e} (<= 1e-12); {:.2} s (< 10 s)",
            elapsed.as_secs_f64()
        ),
    ))
}

fn prox_and_projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut prox_err = 0.0f64;
    for _ in 0..100 {
        let alpha = rng.random_range(0.01..1000.0);
        let sigma = rng.random_range(0.0..100.0);
        let r: Vec<C64> = (0..16).map(|_| C64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))).collect();
        for (o, v) in prox_dual_quadratic(&r, alpha, sigma).iter().zip(&r) {
            let re = alpha * v.re / (alpha + sigma);
            let im = alpha * v.im / (alpha + sigma);
            prox_err = prox_err.max((o.re - re).abs() / re.abs().max(1.0)).max((o.im - im).abs() / im.abs().max(1.0));
        }
    }

    let (mut idempotent, mut expansion) = (true, 0.0f64);
    for _ in 0..100 {
        let radius = rng.random_range(0.05..2.0);
        let a = random_field(&mut rng, 12, 9, 3.0);
        let b = random_field(&mut rng, 12, 9, 3.0);
        let pa = project_dual_ball(&a, radius);
        let pb = project_dual_ball(&b, radius);
        idempotent &= project_dual_ball(&pa, radius) == pa && pa.max_magnitude() <= radius;
        let d_in = a.add_scaled(-1.0, &b).map_err(err)?.norm_l2();
        let d_out = pa.add_scaled(-1.0, &pb).map_err(err)?.norm_l2();
        expansion = expansion.max(d_out / d_in);
    }

    // Radii: w on the TV dual, 1 - w on both structural duals.
    let (data, sub) = toy_problem(104, 3, 8, 8);
    let mut spec = MethodSpec::constant(Method::Icbtv, 3, 30.0, 4.0, 0.3);
    spec.w = vec![0.3, 0.0, 0.85];
    let mut pd = PrimalDual::new(&data, &spec, Some(&sub), None).map_err(err)?;
    let mut feasible = true;
    for _ in 0..500 {
        pd.iterate();
        for (t, f) in pd.state().frames.iter().enumerate() {
            let w = spec.w[t];
            let max = |v: &Option<VectorField>| v.as_ref().map_or(0.0, |v| v.max_magnitude());
            feasible &= max(&f.y2) <= w && max(&f.y3) <= 1.0 - w && max(&f.y4) <= 1.0 - w;
        }
    }

    let pass = prox_err <= 1e-15 && idempotent && expansion <= 1.0 + 1e-12 && feasible;
    Ok((
        pass,
        format!(
            "prox error {prox_err:.1e} (<= 1e-15); projection idempotent {idempotent}, max expansion {expansion:.6}; duals feasible over 500 iterations {feasible}"
        ),
    ))
}

fn block_prior(h: usize, w: usize) -> Image {
    Image::from_fn(h, w, |y, x| C64::new(if y >= h / 2 && x >= w / 3 { 1.0 } else { 0.25 }, 0.0))
}

fn toy_problem(seed: u64, frames: usize, h: usize, w: usize) -> (KSpaceData, SubgradientField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<Image> = (0..frames)
        .map(|_| Image::from_fn(h, w, |_, _| C64::new(rng.random_range(0.0..1.0), rng.random_range(-0.2..0.2))))
        .collect();
    let pattern_frames =
        (0..frames).map(|_| PatternFrame::new(sample(&mut rng, h * w, 3 * h * w / 8).into_vec())).collect();
    let pattern = SamplingPattern::new(h, w, pattern_frames).expect("valid indices");
    let data = truth.iter().enumerate().map(|(t, u)| forward_op(u, &pattern, t).expect("grid")).collect();
    let sub = extract_subgradient(&block_prior(h, w), 0.05).expect("valid eta");
    (KSpaceData::new(pattern, data).expect("matching frames"), sub)
}

const H: usize = 16;
const W: usize = 16;

fn grad_real(u: &[f64]) -> (Vec<f64>, Vec<f64>) {
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

fn grad_real_t(px: &[f64], py: &[f64]) -> Vec<f64> {
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

/// Nesterov's method on `(alpha/2)||u - g||^2 + sum sqrt(|grad u|^2 + eps^2)`.
fn smoothed_tv_oracle(g: &[f64], alpha: f64, eps: f64, steps: usize) -> Vec<f64> {
    let lipschitz = alpha + 8.0 / eps;
    let q = (alpha / lipschitz).sqrt();
    let momentum = (1.0 - q) / (1.0 + q);
    let mut x = g.to_vec();
    let mut v = g.to_vec();
    for _ in 0..steps {
        let (gx, gy) = grad_real(&v);
        let (px, py): (Vec<f64>, Vec<f64>) = gx
            .iter()
            .zip(&gy)
            .map(|(a, b)| {
                let m = (a * a + b * b + eps * eps).sqrt();
                (a / m, b / m)
            })
            .unzip();
        let tv = grad_real_t(&px, &py);
        let next: Vec<f64> =
            v.iter().zip(g).zip(&tv).map(|((vi, gi), t)| vi - (alpha * (vi - gi) + t) / lipschitz).collect();
        v = next.iter().zip(&x).map(|(n, o)| n + momentum * (n - o)).collect();
        x = next;
    }
    x
}

fn prior_oracle() -> Outcome {
    let start = Instant::now();
    let alpha = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let g: Vec<f64> = (0..H * W)
        .map(|i| {
            let clean = if i % W >= W / 2 { 1.0 } else { 0.2 };
            clean + 0.1 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let pattern = SamplingPattern::identity(H, W);
    let f = forward_op(&Image::from_real(H, W, &g).map_err(err)?, &pattern, 0).map_err(err)?;
    let rule = StoppingRule { energy_rel_tol: 1e-10, residual_tol: 1e-6, check_interval: 10, max_iterations: 5000 };
    let r = reconstruct_prior(&f, &pattern, alpha, rule, StepSizes::Balanced { ratio: 0.001 }).map_err(err)?;
    let reached = r.history.iter().find(|c| c.residual < 1e-6).map(|c| c.iteration);
    let oracle = smoothed_tv_oracle(&g, alpha, 1e-6, 100_000);
    let rmse = (r.image.as_slice().iter().zip(&oracle).map(|(a, b)| (a - C64::new(*b, 0.0)).norm_sqr()).sum::<f64>()
        / (H * W) as f64)
        .sqrt();
    let elapsed = start.elapsed();
    let pass = reached.is_some() && rmse <= 1e-3 && elapsed < Duration::from_secs(60);
    let reached = reached.map_or("not within 5000".into(), |k| format!("at iteration {k}"));
    Ok((pass, format!("RMSE {rmse:.1e} (<= 1e-3); residual < 1e-6 {reached}; {:.2} s (< 60 s)", elapsed.as_secs_f64())))
}

fn reductions() -> Outcome {
    let (data, sub) = toy_problem(105, 3, 8, 8);
    let temp_tv = MethodSpec::constant(Method::TempTv, 3, 20.0, 5.0, 1.0);
    let icbtv = MethodSpec { method: Method::Icbtv, ..temp_tv.clone() };
    let mut a = PrimalDual::new(&data, &temp_tv, None, None).map_err(err)?;
    let mut b = PrimalDual::new(&data, &icbtv, Some(&sub), None).map_err(err)?;
    let mut track = 0.0f64;
    for _ in 0..500 {
        a.iterate();
        b.iterate();
        for (fa, fb) in a.state().frames.iter().zip(&b.state().frames) {
            track = track.max(max_diff(&fa.u, &fb.u));
        }
    }

    let mut decouple = 0.0f64;
    for method in [Method::Temp, Method::TempTv, Method::Icbtv] {
        let mut spec = MethodSpec::constant(method, 3, 15.0, 0.0, 0.4);
        spec.steps = StepSizes::Fixed { tau: 0.3, sigma: 0.3 };
        spec.stopping = StoppingRule { max_iterations: 500, ..StoppingRule::default() };
        let joint = reconstruct_dynamic(&data, &spec, Some(&sub), None).map_err(err)?;
        for t in 0..3 {
            let single =
                reconstruct_dynamic(&data.slice(t..t + 1).map_err(err)?, &spec.slice(t..t + 1), Some(&sub), None)
                    .map_err(err)?;
            decouple = decouple.max(max_diff(single.sequence.frame(0), joint.sequence.frame(t)));
        }
    }
    let pass = track <= 1e-12 && decouple <= 1e-10;
    Ok((pass, format!("ICBTV(w=1) vs TEMP_TV over 500 iterates {track:.1e} (<= 1e-12); gamma=0 vs single frames {decouple:.1e} (<= 1e-10)")))
}

fn bregman_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut identity_err = 0.0f64;
    let mut icb_zero = 0.0f64;
    for _ in 0..10 {
        let u0 = Image::from_fn(8, 8, |_, _| C64::new(rng.random_range(0.0..1.0), 0.0));
        let sub = extract_subgradient(&u0, 0.0).map_err(err)?;
        let tv = tv_value(&u0);
        let c = rng.random_range(0.1..10.0);
        identity_err = identity_err
            .max(bregman_distance(&u0, &sub, Sign::Plus).map_err(err)?)
            .max(bregman_distance(&u0.scaled(C64::new(c, 0.0)), &sub, Sign::Plus).map_err(err)?)
            .max((bregman_distance(&u0.scaled(C64::new(-1.0, 0.0)), &sub, Sign::Plus).map_err(err)? - 2.0 * tv).abs());
        icb_zero = icb_zero
            .max(icbtv_value(&u0, &sub, 1e-6).map_err(err)?)
            .max(icbtv_value(&u0.scaled(C64::new(-1.0, 0.0)), &sub, 1e-6).map_err(err)?);
    }

    let sub = extract_subgradient(&block_prior(8, 8), 0.0).map_err(err)?;
    let mut bounded = true;
    for _ in 0..50 {
        let u = Image::from_fn(8, 8, |_, _| C64::new(rng.random_range(0.0..1.0), 0.0));
        let icb = icbtv_value(&u, &sub, 1e-4).map_err(err)?;
        bounded &= (0.0..=2.0 * tv_value(&u)).contains(&icb);
    }
    let pass = identity_err <= 1e-9 && icb_zero <= 1e-6 && bounded;
    Ok((
        pass,
        format!("Bregman identities {identity_err:.1e} (<= 1e-9); ICB at +-u0 {icb_zero:.1e} (<= 1e-6); 0 <= ICB <= 2 TV on 50 images {bounded}"),
    ))
}

fn sampling() -> Outcome {
    let cfg = RunConfig::default();
    let pattern = golden_angle_pattern(
        cfg.phantom.frames,
        cfg.phantom.spokes_per_frame,
        cfg.phantom.height,
        cfg.phantom.width,
        cfg.phantom.angle_increment_deg,
    )
    .map_err(err)?;
    let mut disjoint = true;
    for t in 0..pattern.frame_count() - 1 {
        for a in pattern.angles(t) {
            disjoint &= pattern.angles(t + 1).iter().all(|b| (a - b).abs() > 1e-9);
        }
    }
    let worst = (0..pattern.frame_count()).map(|t| pattern.samples(t) as f64 / 9919.0).fold(0.0, f64::max);
    let pass = pattern.frame_count() == 60 && disjoint && worst <= 0.055;
    Ok((pass, format!("adjacent angle sets disjoint over 60 frames {disjoint}; max sampled fraction {worst:.4} (<= 0.055)")))
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut cfg = RunConfig::default();
    cfg.phantom.frames = 6;
    cfg.phantom.seed = 7;
    cfg.method.stopping.max_iterations = 100;
    cfg.method.chunk_size = 3;
    cfg.prior_recon.stopping.max_iterations = 200;
    let config_path = tmp.path().join("config.json");
    std::fs::write(&config_path, serde_json::to_string(&cfg).map_err(err)?).map_err(err)?;

    let run = |root: &Path| -> Result<(), String> {
        let p = |name: &str| root.join(name).to_string_lossy().into_owned();
        let c = config_path.to_string_lossy().into_owned();
        let steps: [Vec<String>; 4] = [
            vec!["simulate".into(), "--out".into(), p("data")],
            vec!["recon-prior".into(), "--dataset".into(), p("data"), "--out".into(), p("prior")],
            vec!["recon".into(), "--dataset".into(), p("data"), "--prior".into(), p("prior"), "--out".into(), p("icbtv")],
            vec!["eval".into(), "--dataset".into(), p("data"), "--result".into(), p("icbtv"), "--out".into(), p("eval")],
        ];
        for args in steps {
            let argv = std::iter::once("dynrecon".to_string()).chain(args).chain(["--config".into(), c.clone()]);
            dynrecon_cli::run_from(argv).map_err(err)?;
        }
        Ok(())
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a)?;
    run(&b)?;
    let (fa, fb) = (read_tree(&a)?, read_tree(&b)?);
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let pass = fa.len() == fb.len() && differing.is_empty() && !fa.is_empty();
    Ok((pass, format!("{} files compared, {} differ", fa.len(), differing.len())))
}

fn read_tree(root: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(err)? {
            let path = entry.map_err(err)?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).map_err(err)?.to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).map_err(err)?);
            }
        }
    }
    Ok(out)
}

struct MethodResult {
    label: String,
    rmse: f64,
    correlation: f64,
    amplitude: f64,
    tail_variance: f64,
}

struct DeskScale {
    runtime: Duration,
    ls: MethodResult,
    temp: MethodResult,
    temp_tv: MethodResult,
    /// Structural method for gamma = 5, 25 (the default) and 100.
    icbtv: [MethodResult; 3],
    chunk_rel: Vec<f64>,
}

fn spec_for(cfg: &RunConfig, method: Method, gamma: Option<f64>, frames: usize) -> Result<MethodSpec, String> {
    let mut m = cfg.method.clone();
    m.method = method;
    let (alpha, default_gamma) = default_weights(method);
    m.alpha = Some(Weights::Constant(alpha));
    m.gamma = Some(Weights::Constant(gamma.unwrap_or(default_gamma)));
    m.to_spec(frames).map_err(err)
}

fn evaluate(label: &str, seq: &ImageSequence, ds: &SimulatedDataset) -> Result<MethodResult, String> {
    let roi = RoiSpec::rectangle("activated", ACTIVATED_ROI);
    let truth_curve = roi_mean_curve(&ds.truth, &roi).map_err(err)?;
    let curve = roi_mean_curve(seq, &roi).map_err(err)?;
    let eval = RunConfig::default().eval;
    Ok(MethodResult {
        label: label.into(),
        rmse: roi_rmse(seq, &ds.truth, &roi).map_err(err)?,
        correlation: pearson(&curve, &truth_curve).unwrap_or(f64::NAN),
        amplitude: peak_amplitude(&curve, eval.baseline_frames),
        tail_variance: tail_variance(&curve, eval.tail_from),
    })
}

/// Simulation, prior, the four methods at their presets, then the extra
/// temporal weights and the chunking comparison. Only the first part is
/// timed.
fn desk_scale() -> Result<DeskScale, String> {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let ds = simulate(&cfg.phantom).map_err(err)?;
    let frames = ds.truth.len();
    let p = &cfg.prior_recon;
    let prior = reconstruct_prior(ds.prior_data.frame(0), ds.prior_data.pattern(), p.alpha, p.stopping, p.steps)
        .map_err(err)?;
    let sub = extract_subgradient(&prior.image, p.eta).map_err(err)?;
    let run = |method: Method, gamma: Option<f64>| -> Result<MethodResult, String> {
        let spec = spec_for(&cfg, method, gamma, frames)?;
        let t = Instant::now();
        let r = reconstruct(&ds.data, &spec, Some(&sub)).map_err(err)?;
        let label = match gamma {
            Some(g) => format!("{method} gamma={g}"),
            None => method.to_string(),
        };
        eprintln!("  {label}: {:.1} s, converged {}", t.elapsed().as_secs_f64(), r.converged);
        evaluate(&label, &r.sequence, &ds)
    };
    let ls = run(Method::Ls, None)?;
    let temp = run(Method::Temp, None)?;
    let temp_tv = run(Method::TempTv, None)?;
    let icb25 = run(Method::Icbtv, None)?;
    let runtime = start.elapsed();
    let icb5 = run(Method::Icbtv, Some(5.0))?;
    let icb100 = run(Method::Icbtv, Some(100.0))?;

    let head = ds.data.slice(0..10).map_err(err)?;
    let mut spec = spec_for(&cfg, Method::Icbtv, None, 10)?;
    spec.chunk_size = 10;
    let whole = reconstruct(&head, &spec, Some(&sub)).map_err(err)?;
    spec.chunk_size = 5;
    let chunked = reconstruct(&head, &spec, Some(&sub)).map_err(err)?;
    let mut chunk_rel = Vec::new();
    for t in 0..10 {
        let d = chunked.sequence.frame(t).sub(whole.sequence.frame(t)).map_err(err)?;
        chunk_rel.push(d.norm_l2() / whole.sequence.frame(t).norm_l2());
    }
    Ok(DeskScale { runtime, ls, temp, temp_tv, icbtv: [icb5, icb25, icb100], chunk_rel })
}

impl DeskScale {
    fn criterion6(&self) -> (bool, String) {
        let proposed = &self.icbtv[1];
        let order = [proposed, &self.temp_tv, &self.temp, &self.ls];
        let ordered = order.windows(2).all(|p| p[0].rmse <= p[1].rmse);
        let a = proposed.correlation >= 0.90;
        let c = (0.05..=0.11).contains(&proposed.amplitude);
        let fast = self.runtime <= Duration::from_secs(15 * 60);
        let rmses: Vec<String> = order.iter().map(|m| format!("{} {:.4}", m.label, m.rmse)).collect();
        (
            a && ordered && c && fast,
            format!(
                "(a) correlation {:.3} (>= 0.90); (b) RMSE {} ordered {ordered}; (c) peak amplitude {:.4} in [0.05, 0.11]; {:.0} s (<= 900 s)",
                proposed.correlation,
                rmses.join(" <= "),
                proposed.amplitude,
                self.runtime.as_secs_f64()
            ),
        )
    }

    fn criterion7(&self) -> (bool, String) {
        let amp: Vec<f64> = self.icbtv.iter().map(|m| m.amplitude).collect();
        let var: Vec<f64> = self.icbtv.iter().map(|m| m.tail_variance).collect();
        let decreasing = |v: &[f64]| v.windows(2).all(|p| p[1] < p[0]);
        (
            decreasing(&amp) && decreasing(&var),
            format!(
                "gamma 5/25/100: peak amplitude {:.4}/{:.4}/{:.4}, post-peak variance {:.2e}/{:.2e}/{:.2e} (both strictly decreasing)",
                amp[0], amp[1], amp[2], var[0], var[1], var[2]
            ),
        )
    }

    fn criterion8(&self) -> (bool, String) {
        let worst = self.chunk_rel.iter().copied().fold(0.0, f64::max);
        (worst <= 0.05, format!("max per-frame relative L2 difference {worst:.4} (<= 0.05), chunks of 5 vs one block of 10"))
    }
}
