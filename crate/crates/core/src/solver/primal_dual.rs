use rayon::prelude::*;

use super::{ConvergenceRecord, StoppingRule};
use crate::error::{Error, Result};
use crate::operators::{divergence, gradient, operator_norm_estimate, FourierSampling, OperatorBlocks};
use crate::regularization::{project_pair, prox_dual_quadratic_in_place, tv_value, SubgradientField};
use crate::types::{norm_sqr, real_dot, Image, ImageSequence, KSpaceData, Method, MethodSpec, VectorField, C64};

/// Reconstructed frame preceding a chunk, held fixed and coupled to the
/// chunk's first frame with weight `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmFrame {
    pub image: Image,
    pub gamma: f64,
}

/// Primal and dual variables of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub u: Image,
    pub u_bar: Image,
    /// Splitting variable of the infimal convolution (structural methods only).
    pub z: Option<Image>,
    pub z_bar: Option<Image>,
    pub y1: Vec<C64>,
    pub y2: Option<VectorField>,
    pub y3: Option<VectorField>,
    pub y4: Option<VectorField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub frames: Vec<FrameState>,
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

impl SolverState {
    pub fn images(&self) -> Vec<Image> {
        self.frames.iter().map(|f| f.u.clone()).collect()
    }
}

/// Validated configuration of one primal-dual run over a block of frames.
#[derive(Debug, Clone)]
pub struct Problem {
    dims: (usize, usize),
    op: FourierSampling,
    iso: f64,
    data: KSpaceData,
    /// `sqrt(N) f_t`
    scaled_data: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    /// `gamma[t]` couples `t` and `t + 1`; last entry forced to zero.
    gamma: Vec<f64>,
    /// Radius of the TV dual ball (weight of the TV term), `None` when the
    /// method has no TV term.
    tv_radius: Option<Vec<f64>>,
    /// `1 - w_t` for the structural term, `None` when absent.
    icb_weight: Option<Vec<f64>>,
    p0: Option<Image>,
    warm: Option<WarmFrame>,
    tau: f64,
    sigma: f64,
    operator_norm: Option<f64>,
    stopping: StoppingRule,
}

impl Problem {
    pub fn new(
        data: &KSpaceData,
        spec: &MethodSpec,
        sub: Option<&SubgradientField>,
        warm: Option<WarmFrame>,
    ) -> Result<Self> {
        let frames = data.frame_count();
        if frames == 0 {
            return Err(Error::InvalidParameter("no frames to reconstruct".into()));
        }
        spec.validate(frames)?;
        let dims = data.dims();
        let n = (dims.0 * dims.1) as f64;
        let iso = n.sqrt();

        let (tv_radius, icb_weight) = match spec.method {
            Method::Ls => {
                return Err(Error::InvalidParameter(
                    "least squares is solved by conjugate gradients, not primal-dual".into(),
                ))
            }
            Method::Tv | Method::TempTv => (Some(vec![1.0; frames]), None),
            Method::Temp => (None, None),
            Method::Icbtv => (
                Some(spec.w.clone()),
                Some(spec.w.iter().map(|w| 1.0 - w).collect::<Vec<_>>()),
            ),
        };
        let p0 = match (spec.method, sub) {
            (Method::Icbtv, Some(s)) => {
                if s.dims() != dims {
                    return Err(Error::dims(
                        format!("{}x{} subgradient", dims.0, dims.1),
                        format!("{}x{}", s.dims().0, s.dims().1),
                    ));
                }
                Some(s.p0().clone())
            }
            (Method::Icbtv, None) => {
                return Err(Error::MissingInput("the structural method requires a prior subgradient".into()))
            }
            _ => None,
        };
        let mut gamma = if spec.method == Method::Tv { vec![0.0; frames] } else { spec.gamma.clone() };
        gamma[frames - 1] = 0.0;
        let warm = match warm {
            Some(wf) if spec.method.is_temporal() => {
                if wf.image.dims() != dims {
                    return Err(Error::dims(
                        format!("{}x{} warm frame", dims.0, dims.1),
                        format!("{}x{}", wf.image.height(), wf.image.width()),
                    ));
                }
                if !(wf.gamma >= 0.0) {
                    return Err(Error::InvalidParameter(format!("warm coupling must be >= 0, got {}", wf.gamma)));
                }
                Some(wf)
            }
            _ => None,
        };

        // Blocks whose dual ball has radius zero for every frame stay
        // identically zero and do not couple to the primal variables.
        let has_tv = tv_radius.as_ref().is_some_and(|r| r.iter().any(|&v| v > 0.0));
        let has_icb = icb_weight.as_ref().is_some_and(|r| r.iter().any(|&v| v > 0.0));
        let blocks = OperatorBlocks { data_scale: Some(iso), gradient: has_tv, icb_split: has_icb };
        let (tau, sigma, operator_norm) =
            spec.steps.resolve(|| operator_norm_estimate(data.pattern(), 0..frames, blocks))?;

        let scaled_data = data
            .frames()
            .iter()
            .map(|f| f.iter().map(|v| v * iso).collect())
            .collect();

        Ok(Self {
            dims,
            op: FourierSampling::new(dims.0, dims.1),
            iso,
            data: data.clone(),
            scaled_data,
            alpha: spec.alpha.clone(),
            gamma,
            tv_radius,
            icb_weight,
            p0,
            warm,
            tau,
            sigma,
            operator_norm,
            stopping: spec.stopping,
        })
    }

    pub fn frames(&self) -> usize {
        self.alpha.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn operator_norm(&self) -> Option<f64> {
        self.operator_norm
    }

    fn indices(&self, t: usize) -> &[usize] {
        self.data.pattern().indices(t).expect("validated pattern")
    }

    /// `A_t u = sqrt(N) K_t u`.
    fn apply_data(&self, t: usize, u: &Image) -> Vec<C64> {
        let mut y = self.op.forward_op(u, self.indices(t)).expect("validated dims");
        y.iter_mut().for_each(|v| *v *= self.iso);
        y
    }

    /// `A_t^H y = sqrt(N) K_t^H y`.
    fn apply_data_adjoint(&self, t: usize, y: &[C64]) -> Image {
        let mut img = self.op.adjoint_op(y, self.indices(t)).expect("validated dims");
        img.as_mut_slice().iter_mut().for_each(|v| *v *= self.iso);
        img
    }

    /// Cold start: `u = A^H f~` (zero-filled inverse DFT), everything else zero.
    pub fn initial_state(&self) -> SolverState {
        let (h, w) = self.dims;
        let structural = self.icb_weight.is_some();
        let frames = (0..self.frames())
            .map(|t| {
                let u = self.apply_data_adjoint(t, &self.scaled_data[t]);
                FrameState {
                    u_bar: u.clone(),
                    u,
                    z: structural.then(|| Image::zeros(h, w)),
                    z_bar: structural.then(|| Image::zeros(h, w)),
                    y1: vec![C64::new(0.0, 0.0); self.scaled_data[t].len()],
                    y2: self.tv_radius.as_ref().map(|_| VectorField::zeros(h, w)),
                    y3: structural.then(|| VectorField::zeros(h, w)),
                    y4: structural.then(|| VectorField::zeros(h, w)),
                }
            })
            .collect();
        let mut state = SolverState { frames, iteration: 0, energy: f64::NAN, residual: f64::NAN };
        state.energy = self.energy(&state);
        state
    }

    fn dual_update(&self, t: usize, f: &mut FrameState) {
        let sigma = self.sigma;
        let au = self.apply_data(t, &f.u_bar);
        for ((y, a), d) in f.y1.iter_mut().zip(&au).zip(&self.scaled_data[t]) {
            *y += (a - d) * sigma;
        }
        prox_dual_quadratic_in_place(&mut f.y1, self.alpha[t], sigma);

        let (h, w) = self.dims;
        let ub = f.u_bar.as_slice();
        if let (Some(y2), Some(radius)) = (f.y2.as_mut(), self.tv_radius.as_ref()) {
            let r = radius[t];
            for (i, x, y) in pixels(h, w) {
                let (gx, gy) = grad_at(ub, i, x, y, w, h);
                y2.dx[i] += gx * sigma;
                y2.dy[i] += gy * sigma;
                clamp_pair(&mut y2.dx[i], &mut y2.dy[i], r);
            }
        }
        if let (Some(y3), Some(y4), Some(weight), Some(z_bar)) =
            (f.y3.as_mut(), f.y4.as_mut(), self.icb_weight.as_ref(), f.z_bar.as_ref())
        {
            let r = weight[t];
            let zb = z_bar.as_slice();
            for (i, x, y) in pixels(h, w) {
                let (ux, uy) = grad_at(ub, i, x, y, w, h);
                let (zx, zy) = grad_at(zb, i, x, y, w, h);
                y3.dx[i] += (ux - zx) * sigma;
                y3.dy[i] += (uy - zy) * sigma;
                clamp_pair(&mut y3.dx[i], &mut y3.dy[i], r);
                y4.dx[i] += zx * sigma;
                y4.dy[i] += zy * sigma;
                clamp_pair(&mut y4.dx[i], &mut y4.dy[i], r);
            }
        }
    }

    /// New `(u, z)` of frame `t` given every frame's iterate-k values.
    fn primal_update(&self, t: usize, frames: &[FrameState]) -> (Image, Option<Image>) {
        let tau = self.tau;
        let f = &frames[t];
        let (h, w) = self.dims;

        let gamma_next = self.gamma[t];
        let (gamma_prev, prev) = if t > 0 {
            (self.gamma[t - 1], Some(frames[t - 1].u.as_slice()))
        } else if let Some(wf) = &self.warm {
            (wf.gamma, Some(wf.image.as_slice()))
        } else {
            (0.0, None)
        };
        let next = (t + 1 < frames.len()).then(|| frames[t + 1].u.as_slice());
        let denom = tau * (gamma_next + gamma_prev) + 1.0;
        let icb_w = self.icb_weight.as_ref().map(|v| v[t]);
        let u_old = f.u.as_slice();
        let zero = C64::new(0.0, 0.0);

        // u <- (u - tau [A^H y1 - div y2 - div y3 - (1 - w) p0] + neighbours) / denom
        // z <- z - tau [2 (1 - w) p0 + div y3 - div y4]
        let mut u = self.apply_data_adjoint(t, &f.y1);
        let mut z = f.z.clone();
        let structural = match (&f.y3, &f.y4, icb_w, &self.p0, z.as_mut()) {
            (Some(y3), Some(y4), Some(cw), Some(p0), Some(z)) => Some((y3, y4, cw, p0.as_slice(), z.as_mut_slice())),
            _ => None,
        };
        let u_out = u.as_mut_slice();
        match structural {
            Some((y3, y4, cw, p0, z_out)) => {
                for (i, x, y) in pixels(h, w) {
                    let d2 = f.y2.as_ref().map_or(zero, |y2| div_at(y2, i, x, y, w, h));
                    let d3 = div_at(y3, i, x, y, w, h);
                    let d4 = div_at(y4, i, x, y, w, h);
                    let bracket = u_out[i] - d2 - d3 - p0[i] * cw;
                    u_out[i] = self.relax_u(u_old[i], bracket, i, next, prev, gamma_next, gamma_prev, denom);
                    z_out[i] -= (p0[i] * (2.0 * cw) + d3 - d4) * tau;
                }
            }
            None => {
                for (i, x, y) in pixels(h, w) {
                    let d2 = f.y2.as_ref().map_or(zero, |y2| div_at(y2, i, x, y, w, h));
                    let bracket = u_out[i] - d2;
                    u_out[i] = self.relax_u(u_old[i], bracket, i, next, prev, gamma_next, gamma_prev, denom);
                }
            }
        }
        (u, z)
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn relax_u(
        &self,
        u: C64,
        bracket: C64,
        i: usize,
        next: Option<&[C64]>,
        prev: Option<&[C64]>,
        gamma_next: f64,
        gamma_prev: f64,
        denom: f64,
    ) -> C64 {
        let tau = self.tau;
        let mut num = u - bracket * tau;
        if let Some(nx) = next {
            num += nx[i] * (tau * gamma_next);
        }
        if let Some(pv) = prev {
            num += pv[i] * (tau * gamma_prev);
        }
        num / denom
    }

    /// One full iteration: dual ascent on every frame, then the time-coupled
    /// primal step (neighbors at iterate k), then overrelaxation.
    pub fn iterate(&self, state: &mut SolverState) {
        state
            .frames
            .par_iter_mut()
            .enumerate()
            .for_each(|(t, f)| self.dual_update(t, f));

        let updates: Vec<(Image, Option<Image>)> = (0..self.frames())
            .into_par_iter()
            .map(|t| self.primal_update(t, &state.frames))
            .collect();

        for (f, (u_new, z_new)) in state.frames.iter_mut().zip(updates) {
            overrelax_into(f.u_bar.as_mut_slice(), u_new.as_slice(), f.u.as_slice());
            f.u = u_new;
            if let (Some(z_new), Some(z), Some(z_bar)) = (z_new, f.z.as_mut(), f.z_bar.as_mut()) {
                overrelax_into(z_bar.as_mut_slice(), z_new.as_slice(), z.as_slice());
                *z = z_new;
            }
        }
        state.iteration += 1;
    }

    /// Primal objective at the current `u` (and `z`, which makes the
    /// structural term an upper bound of the infimal convolution).
    pub fn energy(&self, state: &SolverState) -> f64 {
        let per_frame: Vec<f64> = state
            .frames
            .par_iter()
            .enumerate()
            .map(|(t, f)| {
                let au = self.apply_data(t, &f.u);
                let misfit: f64 = au
                    .iter()
                    .zip(&self.scaled_data[t])
                    .map(|(a, d)| (a - d).norm_sqr())
                    .sum();
                let mut e = 0.5 * self.alpha[t] * misfit;
                if let Some(r) = &self.tv_radius {
                    if r[t] > 0.0 {
                        e += r[t] * tv_value(&f.u);
                    }
                }
                if let (Some(cw), Some(p0), Some(z)) = (&self.icb_weight, &self.p0, &f.z) {
                    if cw[t] > 0.0 {
                        let uz = f.u.sub(z).expect("same grid");
                        e += cw[t]
                            * (tv_value(&uz) + tv_value(z) - real_dot(p0.as_slice(), f.u.as_slice())
                                + 2.0 * real_dot(p0.as_slice(), z.as_slice()));
                    }
                }
                e
            })
            .collect();
        let mut energy: f64 = per_frame.iter().sum();
        for t in 0..self.frames().saturating_sub(1) {
            if self.gamma[t] > 0.0 {
                let d = state.frames[t + 1].u.sub(&state.frames[t].u).expect("same grid");
                energy += 0.5 * self.gamma[t] * norm_sqr(d.as_slice());
            }
        }
        if let Some(wf) = &self.warm {
            let d = state.frames[0].u.sub(&wf.image).expect("same grid");
            energy += 0.5 * wf.gamma * norm_sqr(d.as_slice());
        }
        energy
    }

    /// Size-normalized primal-dual residual between two consecutive states:
    /// `||dx / tau - L^H dy|| + ||dy / sigma - L dx||` over `sqrt(#entries)`,
    /// with `dx = x^k - x^{k+1}` and `dy = y^k - y^{k+1}`.
    pub fn residual(&self, before: &SolverState, after: &SolverState) -> f64 {
        let (tau, sigma) = (self.tau, self.sigma);
        let parts: Vec<(f64, f64, usize)> = before
            .frames
            .par_iter()
            .zip(after.frames.par_iter())
            .enumerate()
            .map(|(t, (b, a))| {
                let du = b.u.sub(&a.u).expect("same grid");
                let dz = match (&b.z, &a.z) {
                    (Some(bz), Some(az)) => Some(bz.sub(az).expect("same grid")),
                    _ => None,
                };
                let dy1: Vec<C64> = b.y1.iter().zip(&a.y1).map(|(x, y)| x - y).collect();
                let diff = |x: &Option<VectorField>, y: &Option<VectorField>| match (x, y) {
                    (Some(x), Some(y)) => Some(x.add_scaled(-1.0, y).expect("same grid")),
                    _ => None,
                };
                let dy2 = diff(&b.y2, &a.y2);
                let dy3 = diff(&b.y3, &a.y3);
                let dy4 = diff(&b.y4, &a.y4);

                // primal: u part
                let mut lh_u = self.apply_data_adjoint(t, &dy1).into_vec();
                if let Some(d) = &dy2 {
                    sub_assign(&mut lh_u, divergence(d).as_slice());
                }
                let div3 = dy3.as_ref().map(divergence);
                if let Some(d3) = &div3 {
                    sub_assign(&mut lh_u, d3.as_slice());
                }
                let mut primal: f64 = du
                    .as_slice()
                    .iter()
                    .zip(&lh_u)
                    .map(|(x, l)| (x / tau - l).norm_sqr())
                    .sum();
                let mut count = du.len();
                if let (Some(dz), Some(d3), Some(d4)) = (&dz, &div3, &dy4) {
                    let d4 = divergence(d4);
                    primal += dz
                        .as_slice()
                        .iter()
                        .zip(d3.as_slice().iter().zip(d4.as_slice()))
                        .map(|(x, (a, b))| (x / tau - (a - b)).norm_sqr())
                        .sum::<f64>();
                    count += dz.len();
                }

                // dual
                let a_du = self.apply_data(t, &du);
                let mut dual: f64 = dy1.iter().zip(&a_du).map(|(y, l)| (y / sigma - l).norm_sqr()).sum();
                count += dy1.len();
                let g_du = gradient(&du);
                let field_res = |dy: &VectorField, l: &VectorField| -> f64 {
                    let mut s = 0.0;
                    for i in 0..dy.len() {
                        s += (dy.dx[i] / sigma - l.dx[i]).norm_sqr() + (dy.dy[i] / sigma - l.dy[i]).norm_sqr();
                    }
                    s
                };
                if let Some(d2) = &dy2 {
                    dual += field_res(d2, &g_du);
                    count += 2 * d2.len();
                }
                if let (Some(d3), Some(d4), Some(dz)) = (&dy3, &dy4, &dz) {
                    let g_dz = gradient(dz);
                    let g_diff = g_du.add_scaled(-1.0, &g_dz).expect("same grid");
                    dual += field_res(d3, &g_diff) + field_res(d4, &g_dz);
                    count += 2 * d3.len() + 2 * d4.len();
                }
                (primal, dual, count)
            })
            .collect();
        let primal: f64 = parts.iter().map(|p| p.0).sum();
        let dual: f64 = parts.iter().map(|p| p.1).sum();
        let count: usize = parts.iter().map(|p| p.2).sum();
        (primal.sqrt() + dual.sqrt()) / (count.max(1) as f64).sqrt()
    }
}

fn sub_assign(a: &mut [C64], b: &[C64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
}

/// `bar = 2 new - old`.
fn overrelax_into(bar: &mut [C64], new: &[C64], old: &[C64]) {
    for ((b, n), o) in bar.iter_mut().zip(new).zip(old) {
        *b = n * 2.0 - o;
    }
}

/// `(linear index, column, row)` in row-major order.
#[inline(always)]
fn pixels(h: usize, w: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..h).flat_map(move |y| (0..w).map(move |x| (y * w + x, x, y)))
}

/// Forward differences at linear index `i`, Neumann boundary.
#[inline(always)]
fn grad_at(u: &[C64], i: usize, x: usize, y: usize, width: usize, height: usize) -> (C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let gx = if x + 1 < width { u[i + 1] - u[i] } else { zero };
    let gy = if y + 1 < height { u[i + width] - u[i] } else { zero };
    (gx, gy)
}

/// Divergence (negative adjoint of [`grad_at`]) at linear index `i`.
#[inline(always)]
fn div_at(p: &VectorField, i: usize, x: usize, y: usize, width: usize, height: usize) -> C64 {
    let zero = C64::new(0.0, 0.0);
    let ax = if x + 1 < width { p.dx[i] } else { zero };
    let bx = if x > 0 { p.dx[i - 1] } else { zero };
    let ay = if y + 1 < height { p.dy[i] } else { zero };
    let by = if y > 0 { p.dy[i - width] } else { zero };
    ax - bx + ay - by
}

#[inline(always)]
fn clamp_pair(dx: &mut C64, dy: &mut C64, radius: f64) {
    if radius > 0.0 {
        project_pair(dx, dy, radius);
    } else {
        *dx = C64::new(0.0, 0.0);
        *dy = C64::new(0.0, 0.0);
    }
}

/// A primal-dual run that can be stepped manually or driven to convergence.
#[derive(Debug, Clone)]
pub struct PrimalDual {
    problem: Problem,
    state: SolverState,
}

/// Output of one primal-dual run.
#[derive(Debug, Clone)]
pub struct ChunkResult {
    pub sequence: ImageSequence,
    pub state: SolverState,
    pub converged: bool,
    pub iterations: usize,
    pub tau: f64,
    pub sigma: f64,
    pub operator_norm: Option<f64>,
    pub energy: f64,
    pub residual: f64,
    pub history: Vec<ConvergenceRecord>,
}

impl PrimalDual {
    pub fn new(
        data: &KSpaceData,
        spec: &MethodSpec,
        sub: Option<&SubgradientField>,
        warm: Option<WarmFrame>,
    ) -> Result<Self> {
        let problem = Problem::new(data, spec, sub, warm)?;
        let state = problem.initial_state();
        Ok(Self { problem, state })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn iterate(&mut self) {
        self.problem.iterate(&mut self.state);
    }

    pub fn energy(&self) -> f64 {
        self.problem.energy(&self.state)
    }

    /// Iterates until the stopping rule holds or the cap is reached.
    pub fn run(mut self) -> Result<ChunkResult> {
        let rule = self.problem.stopping;
        let mut history = Vec::new();
        let mut converged = false;
        while self.state.iteration < rule.max_iterations {
            let check = (self.state.iteration + 1) % rule.check_interval == 0;
            let before = check.then(|| self.state.clone());
            self.iterate();
            if let Some(before) = before {
                let e_before = self.problem.energy(&before);
                let e_after = self.problem.energy(&self.state);
                if !e_after.is_finite() {
                    return Err(Error::Diverged {
                        iteration: self.state.iteration,
                        tau: self.problem.tau,
                        sigma: self.problem.sigma,
                    });
                }
                let residual = self.problem.residual(&before, &self.state);
                self.state.energy = e_after;
                self.state.residual = residual;
                history.push(ConvergenceRecord {
                    chunk: 0,
                    iteration: self.state.iteration,
                    energy: e_after,
                    residual,
                });
                let change = (e_after - e_before).abs() / e_after.abs().max(f64::MIN_POSITIVE);
                if rule.is_met(change, residual) {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            self.state.energy = self.problem.energy(&self.state);
            if !self.state.energy.is_finite() {
                return Err(Error::Diverged {
                    iteration: self.state.iteration,
                    tau: self.problem.tau,
                    sigma: self.problem.sigma,
                });
            }
            log::warn!(
                "primal-dual stopped at the iteration cap ({}) without meeting the tolerances",
                rule.max_iterations
            );
        }
        Ok(ChunkResult {
            sequence: ImageSequence::new(self.state.images())?,
            converged,
            iterations: self.state.iteration,
            tau: self.problem.tau,
            sigma: self.problem.sigma,
            operator_norm: self.problem.operator_norm,
            energy: self.state.energy,
            residual: self.state.residual,
            history,
            state: self.state,
        })
    }
}

/// Primal-dual reconstruction of every frame in `data` as one coupled block.
pub fn reconstruct_dynamic(
    data: &KSpaceData,
    spec: &MethodSpec,
    sub: Option<&SubgradientField>,
    warm: Option<WarmFrame>,
) -> Result<ChunkResult> {
    PrimalDual::new(data, spec, sub, warm)?.run()
}

/// Primal objective of `state` for the given data and weights.
pub fn energy_value(
    state: &SolverState,
    data: &KSpaceData,
    spec: &MethodSpec,
    sub: Option<&SubgradientField>,
) -> Result<f64> {
    let spec = MethodSpec { steps: super::StepSizes::Fixed { tau: 1.0, sigma: 1.0 }, ..spec.clone() };
    let problem = Problem::new(data, &spec, sub, None)?;
    check_state(&problem, state)?;
    Ok(problem.energy(state))
}

/// Primal-dual residual between the states before and after one iteration.
pub fn pd_residual(problem: &Problem, before: &SolverState, after: &SolverState) -> Result<f64> {
    check_state(problem, before)?;
    check_state(problem, after)?;
    Ok(problem.residual(before, after))
}

fn check_state(problem: &Problem, state: &SolverState) -> Result<()> {
    if state.frames.len() != problem.frames() {
        return Err(Error::dims(format!("{} frames", problem.frames()), state.frames.len()));
    }
    for (t, f) in state.frames.iter().enumerate() {
        if f.u.dims() != problem.dims || f.y1.len() != problem.scaled_data[t].len() {
            return Err(Error::dims(format!("frame {t} shaped like the problem"), "mismatched state"));
        }
    }
    Ok(())
}
