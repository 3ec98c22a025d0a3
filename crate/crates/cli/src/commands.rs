//! The five batch commands. Each writes into `config.out` and finishes with a
//! manifest; none reads the clock or the environment, so identical configs
//! give identical bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dynrecon_core::eval::{self, RoiKind, RoiSpec};
use dynrecon_core::regularization::extract_subgradient;
use dynrecon_core::sim::{self, PhantomMode, PhantomSpec, Rect, CONTROL_ROI};
use dynrecon_core::solver::{reconstruct, reconstruct_prior};
use dynrecon_core::{ImageSequence, MethodSpec};
use log::{info, warn};
use serde_json::json;

use crate::config::{RunConfig, Weights};
use crate::dataset::{self as layout, load_dataset, load_result, load_subgradient, save_dataset, write_manifest, Inputs, RunRecord};
use crate::error::{CliError, Result};
use crate::pgm::write_pgm16;
use crate::rawio::{self, write_json};
use crate::table::{num, opt, write_csv};

pub fn cmd_simulate(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    let mut spec = cfg.phantom.clone();
    let mut inputs = Inputs::default();
    let ds = match &cfg.external {
        Some(pair) => {
            spec.mode = PhantomMode::External;
            let prior = rawio::read_image(&pair.prior)?;
            let dynamic = rawio::read_image(&pair.dynamic)?;
            inputs.add("prior_contrast", &pair.prior)?;
            inputs.add("dynamic_contrast", &pair.dynamic)?;
            let (prior, truth) = sim::make_phantom_from(&spec, prior, &dynamic)?;
            sim::simulate_from(&spec, prior, truth)?
        }
        None if spec.mode == PhantomMode::External => {
            return Err(CliError::Missing("external phantom mode needs an 'external' image pair".into()))
        }
        None => sim::simulate(&spec)?,
    };
    info!(
        "simulated {}x{}, {} frames, {} spokes per frame",
        spec.height, spec.width, spec.frames, spec.spokes_per_frame
    );
    save_dataset(out, &spec, &ds)?;
    write_manifest(out, "simulate", json!({ "phantom": spec }), inputs, &BTreeMap::new())?;
    Ok(out.to_path_buf())
}

pub fn cmd_recon_prior(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    let dataset_dir = cfg.dataset_dir()?;
    let ds = load_dataset(dataset_dir)?;
    let p = &cfg.prior_recon;
    let r = reconstruct_prior(ds.prior_data.frame(0), ds.prior_data.pattern(), p.alpha, p.stopping, p.steps)?;
    if !r.converged {
        warn!("prior reconstruction stopped at the iteration cap ({})", r.iterations);
    }
    let sub = extract_subgradient(&r.image, p.eta)?;
    info!("prior: {} iterations, {} edge pixels", r.iterations, sub.support().iter().filter(|&&s| s).count());

    rawio::write_image(&out.join(layout::U0), &r.image)?;
    rawio::write_subgradient(&out.join(layout::SUBGRADIENT), &sub)?;
    let (h, w) = r.image.dims();
    let mut ranges = BTreeMap::new();
    ranges.insert("u0.pgm".to_string(), write_pgm16(&out.join("u0.pgm"), &r.image.magnitude(), h, w)?);
    let rows: Vec<Vec<String>> =
        r.history.iter().map(|c| vec![c.iteration.to_string(), num(c.energy), num(c.residual)]).collect();
    write_csv(&out.join(layout::CONVERGENCE), &header(&["iteration", "energy", "residual"]), &rows)?;
    write_json(
        &out.join("prior.json"),
        &json!({
            "alpha": p.alpha,
            "eta": p.eta,
            "iterations": r.iterations,
            "converged": r.converged,
            "tau": r.tau,
            "sigma": r.sigma,
        }),
    )?;
    let mut inputs = Inputs::default();
    inputs.add("prior_kspace", &dataset_dir.join(layout::PRIOR_KSPACE))?;
    write_manifest(out, "recon-prior", json!({ "prior_recon": p }), inputs, &ranges)?;
    Ok(out.to_path_buf())
}

pub fn cmd_recon(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    let spec = cfg.method.to_spec(load_frame_count(cfg)?)?;
    recon_into(cfg, &spec, out)?;
    Ok(out.to_path_buf())
}

fn load_frame_count(cfg: &RunConfig) -> Result<usize> {
    let pattern: dynrecon_core::SamplingPattern = rawio::read_json(&cfg.dataset_dir()?.join(layout::PATTERN))?;
    Ok(pattern.frame_count())
}

fn recon_into(cfg: &RunConfig, spec: &MethodSpec, out: &Path) -> Result<RunRecord> {
    let dataset_dir = cfg.dataset_dir()?;
    let ds = load_dataset(dataset_dir)?;
    let mut inputs = Inputs::default();
    inputs.add("kspace", &dataset_dir.join(layout::KSPACE))?;
    inputs.add("pattern", &dataset_dir.join(layout::PATTERN))?;
    let sub = if spec.method.needs_prior() {
        let dir = cfg
            .prior
            .as_deref()
            .ok_or_else(|| CliError::Missing(format!("method {} needs a prior directory (--prior)", spec.method)))?;
        inputs.add("subgradient", &dir.join(layout::SUBGRADIENT))?;
        Some(load_subgradient(dir)?)
    } else {
        None
    };
    let r = reconstruct(&ds.data, spec, sub.as_ref())?;
    if !r.converged {
        warn!("{}: at least one chunk stopped at the iteration cap", spec.method);
    }
    info!(
        "{}: {} chunks, iterations {:?}",
        spec.method,
        r.chunks.len(),
        r.chunks.iter().map(|c| c.iterations).collect::<Vec<_>>()
    );

    rawio::write_sequence(&out.join(layout::RECON), &r.sequence)?;
    let rows: Vec<Vec<String>> = r
        .history
        .iter()
        .map(|c| vec![c.chunk.to_string(), c.iteration.to_string(), num(c.energy), num(c.residual)])
        .collect();
    write_csv(&out.join(layout::CONVERGENCE), &header(&["chunk", "iteration", "energy", "residual"]), &rows)?;
    let record = RunRecord { spec: spec.clone(), converged: r.converged, chunks: r.chunks };
    write_json(&out.join(layout::RUN), &record)?;
    write_manifest(out, "recon", json!({ "method": spec }), inputs, &BTreeMap::new())?;
    Ok(record)
}

/// Activated region, a white-matter control region when it fits, the
/// centre pixel, and a vertical line through the activation.
pub fn default_rois(phantom: &PhantomSpec, margin: usize) -> Vec<RoiSpec> {
    let r = phantom.roi;
    let (cy, cx) = (r.top + r.height / 2, r.left + r.width / 2);
    let mut rois = vec![RoiSpec::rectangle("activated", r)];
    let overlaps = (0..CONTROL_ROI.height).any(|dy| {
        (0..CONTROL_ROI.width).any(|dx| r.contains(CONTROL_ROI.top + dy, CONTROL_ROI.left + dx))
    });
    if CONTROL_ROI.fits(phantom.height, phantom.width) && !overlaps {
        rois.push(RoiSpec::rectangle("control", CONTROL_ROI));
    }
    rois.push(RoiSpec::pixels("pixel", vec![(cy, cx)]));
    let top = r.top.saturating_sub(margin);
    let bottom = (r.top + r.height + margin).min(phantom.height);
    rois.push(RoiSpec::vertical_line("line", cx, top, bottom - top));
    rois
}

/// The activated region grown by `margin`, clipped to the grid.
pub fn zoom_rect(phantom: &PhantomSpec, margin: usize) -> Rect {
    let r = phantom.roi;
    let top = r.top.saturating_sub(margin);
    let left = r.left.saturating_sub(margin);
    Rect {
        top,
        left,
        height: (r.top + r.height + margin).min(phantom.height) - top,
        width: (r.left + r.width + margin).min(phantom.width) - left,
    }
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    let dataset_dir = cfg.dataset_dir()?;
    let ds = load_dataset(dataset_dir)?;
    let mut inputs = Inputs::default();
    inputs.add("truth", &dataset_dir.join(layout::TRUTH))?;
    let mut sources: Vec<(String, ImageSequence)> = vec![("truth".into(), ds.truth.clone())];
    for dir in &cfg.results {
        let r = load_result(dir)?;
        if r.sequence.dims() != ds.truth.dims() || r.sequence.len() != ds.truth.len() {
            return Err(CliError::Missing(format!("{} does not match the dataset shape", dir.display())));
        }
        inputs.add(format!("result:{}", r.label), &dir.join(layout::RECON))?;
        sources.push((r.label, r.sequence));
    }
    let e = &cfg.eval;
    let rois = if e.rois.is_empty() { default_rois(&ds.phantom, e.zoom_margin) } else { e.rois.clone() };
    let frames = ds.truth.len();
    let (h, w) = ds.truth.dims();

    let mut curves: Vec<Vec<Vec<f64>>> = Vec::new();
    for (_, seq) in &sources {
        curves.push(rois.iter().map(|roi| eval::roi_mean_curve(seq, roi)).collect::<std::result::Result<_, _>>()?);
    }
    let mut cols = vec!["frame".to_string()];
    for (name, _) in &sources {
        cols.extend(rois.iter().map(|roi| format!("{name}:{}", roi.label)));
    }
    let rows: Vec<Vec<String>> = (0..frames)
        .map(|t| {
            let mut row = vec![t.to_string()];
            row.extend(curves.iter().flat_map(|c| c.iter().map(move |curve| num(curve[t]))));
            row
        })
        .collect();
    write_csv(&out.join("roi_curves.csv"), &cols, &rows)?;

    let mut metric_rows = Vec::new();
    for (s, (name, seq)) in sources.iter().enumerate() {
        for (k, roi) in rois.iter().enumerate() {
            let m = eval::curve_metrics(&curves[s][k], &curves[0][k])?;
            metric_rows.push(vec![
                name.clone(),
                roi.label.clone(),
                num(eval::roi_rmse(seq, &ds.truth, roi)?),
                num(m.rmse),
                opt(m.correlation),
                num(m.peak_value),
                m.peak_frame.to_string(),
                num(eval::peak_amplitude(&curves[s][k], e.baseline_frames)),
                num(eval::tail_variance(&curves[s][k], e.tail_from)),
            ]);
        }
    }
    let metric_cols = header(&[
        "source",
        "roi",
        "rmse",
        "curve_rmse",
        "correlation",
        "peak_value",
        "peak_frame",
        "peak_amplitude",
        "tail_variance",
    ]);
    write_csv(&out.join("metrics.csv"), &metric_cols, &metric_rows)?;

    let pixel_rois: Vec<&RoiSpec> = rois.iter().filter(|r| matches!(r.kind, RoiKind::Pixels { .. })).collect();
    if !pixel_rois.is_empty() {
        let mut cols = vec!["frame".to_string()];
        let mut series: Vec<Vec<f64>> = Vec::new();
        for (name, seq) in &sources {
            for roi in &pixel_rois {
                let px = roi.coordinates(h, w)?;
                let c = eval::pixel_curves(seq, &px)?;
                for (i, &(y, x)) in px.iter().enumerate() {
                    cols.push(format!("{name}:{}:{y}_{x}", roi.label));
                    series.push(c.iter().map(|f| f[i]).collect());
                }
            }
        }
        let rows: Vec<Vec<String>> = (0..frames)
            .map(|t| std::iter::once(t.to_string()).chain(series.iter().map(|s| num(s[t]))).collect())
            .collect();
        write_csv(&out.join("pixel_curves.csv"), &cols, &rows)?;
    }

    for roi in rois.iter().filter(|r| matches!(r.kind, RoiKind::VerticalLine { .. })) {
        let px = roi.coordinates(h, w)?;
        let cols: Vec<String> =
            std::iter::once("frame".to_string()).chain(px.iter().map(|(y, _)| format!("y{y}"))).collect();
        for (name, seq) in &sources {
            let map = eval::roi_line_map(seq, roi)?;
            let rows: Vec<Vec<String>> = (0..frames)
                .map(|t| std::iter::once(t.to_string()).chain(map.iter().map(|p| num(p[t]))).collect())
                .collect();
            write_csv(&out.join(format!("line_{}_{name}.csv", roi.label)), &cols, &rows)?;
        }
    }

    let mut ranges = BTreeMap::new();
    if e.write_images {
        let zoom = zoom_rect(&ds.phantom, e.zoom_margin);
        for (name, seq) in &sources {
            for (t, frame) in seq.iter().enumerate() {
                let mag = frame.magnitude();
                let rel = format!("images/{name}/frame_{t:03}.pgm");
                ranges.insert(rel.clone(), write_pgm16(&out.join(&rel), &mag, h, w)?);
                let crop: Vec<f64> = zoom.pixels().into_iter().map(|(y, x)| mag[y * w + x]).collect();
                let rel = format!("zoom/{name}/frame_{t:03}.pgm");
                ranges.insert(rel.clone(), write_pgm16(&out.join(&rel), &crop, zoom.height, zoom.width)?);
            }
        }
    }
    write_manifest(out, "eval", json!({ "eval": e, "rois": rois }), inputs, &ranges)?;
    Ok(out.to_path_buf())
}

/// One reconstruction per `gamma` under `out/gamma_<g>`, an evaluation of all
/// of them under `out/eval`, and the activated-region curve per `gamma` in
/// `out/sweep.csv`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    if cfg.sweep_gammas.is_empty() {
        return Err(CliError::Config("sweep needs at least one gamma".into()));
    }
    let frames = load_frame_count(cfg)?;
    let mut dirs = Vec::new();
    for &g in &cfg.sweep_gammas {
        let mut m = cfg.method.clone();
        m.gamma = Some(Weights::Constant(g));
        let spec = m.to_spec(frames)?;
        let dir = out.join(format!("gamma_{g}"));
        info!("sweep: gamma = {g}");
        recon_into(cfg, &spec, &dir)?;
        dirs.push(dir);
    }
    let eval_cfg = RunConfig { results: dirs.clone(), out: Some(out.join("eval")), ..cfg.clone() };
    cmd_eval(&eval_cfg)?;

    let ds = load_dataset(cfg.dataset_dir()?)?;
    let roi = RoiSpec::rectangle("activated", ds.phantom.roi);
    let mut cols = vec!["frame".to_string(), "truth".to_string()];
    let mut series = vec![eval::roi_mean_curve(&ds.truth, &roi)?];
    let mut metric_rows = Vec::new();
    for (g, dir) in cfg.sweep_gammas.iter().zip(&dirs) {
        let r = load_result(dir)?;
        let c = eval::roi_mean_curve(&r.sequence, &roi)?;
        let m = eval::curve_metrics(&c, &series[0])?;
        metric_rows.push(vec![
            num(*g),
            num(eval::peak_amplitude(&c, cfg.eval.baseline_frames)),
            num(eval::tail_variance(&c, cfg.eval.tail_from)),
            num(eval::roi_rmse(&r.sequence, &ds.truth, &roi)?),
            opt(m.correlation),
        ]);
        cols.push(format!("gamma={g}"));
        series.push(c);
    }
    let rows: Vec<Vec<String>> = (0..ds.truth.len())
        .map(|t| std::iter::once(t.to_string()).chain(series.iter().map(|s| num(s[t]))).collect())
        .collect();
    write_csv(&out.join("sweep.csv"), &cols, &rows)?;
    write_csv(
        &out.join("sweep_metrics.csv"),
        &header(&["gamma", "peak_amplitude", "tail_variance", "rmse", "correlation"]),
        &metric_rows,
    )?;
    let settings = json!({ "method": cfg.method, "gammas": cfg.sweep_gammas });
    write_manifest(out, "sweep", settings, Inputs::default(), &BTreeMap::new())?;
    Ok(out.to_path_buf())
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
