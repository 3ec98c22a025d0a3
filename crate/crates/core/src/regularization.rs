//! Complex isotropic TV, the edge-direction field of a prior image, Bregman
//! distances built on it, and the proximal maps used by the primal-dual
//! iterations.
//!
//! Magnitudes are always taken over the four real components of a gradient
//! pixel, `sqrt(|dx|^2 + |dy|^2)`, so TV is invariant under global phase
//! rotations of the image.

use crate::error::{Error, Result};
use crate::operators::{divergence, divergence_into, gradient, gradient_into};
use crate::types::{inner_product, Image, VectorField, C64};

/// Isotropic TV: `sum_n |(grad u)_n|`.
pub fn tv_value(u: &Image) -> f64 {
    gradient(u).l1_norm()
}

/// Unit edge-direction field `q0` of a prior image and the matching TV
/// subgradient `p0 = -div q0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientField {
    q0: VectorField,
    p0: Image,
    eta: f64,
}

impl SubgradientField {
    /// Wraps an existing direction field, recomputing `p0`.
    pub fn from_field(q0: VectorField, eta: f64) -> Result<Self> {
        if !(eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("threshold must be >= 0, got {eta}")));
        }
        if q0.max_magnitude() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(
                "subgradient field must have per-pixel magnitude <= 1".into(),
            ));
        }
        let p0 = divergence(&q0).scaled(C64::new(-1.0, 0.0));
        Ok(Self { q0, p0, eta })
    }

    /// A field that is zero everywhere (no structural information).
    pub fn zero(height: usize, width: usize) -> Self {
        Self {
            q0: VectorField::zeros(height, width),
            p0: Image::zeros(height, width),
            eta: 0.0,
        }
    }

    pub fn q0(&self) -> &VectorField {
        &self.q0
    }

    pub fn p0(&self) -> &Image {
        &self.p0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dims(&self) -> (usize, usize) {
        self.q0.dims()
    }

    /// Pixels where `q0` is nonzero.
    pub fn support(&self) -> Vec<bool> {
        (0..self.q0.len()).map(|i| self.q0.magnitude_at(i) > 0.0).collect()
    }

    fn check(&self, u: &Image) -> Result<()> {
        if u.dims() != self.dims() {
            return Err(Error::dims(
                format!("{}x{} subgradient grid", self.dims().0, self.dims().1),
                format!("{}x{} image", u.height(), u.width()),
            ));
        }
        Ok(())
    }
}

/// Thresholded normalized gradient of `u0`: `grad u0 / |grad u0|` where the
/// magnitude is at least `eta` (and nonzero), zero elsewhere.
pub fn extract_subgradient(u0: &Image, eta: f64) -> Result<SubgradientField> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("threshold must be >= 0, got {eta}")));
    }
    let mut q0 = gradient(u0);
    for i in 0..q0.len() {
        let m = q0.magnitude_at(i);
        if m > 0.0 && m >= eta {
            q0.dx[i] /= m;
            q0.dy[i] /= m;
        } else {
            q0.dx[i] = C64::new(0.0, 0.0);
            q0.dy[i] = C64::new(0.0, 0.0);
        }
    }
    let p0 = divergence(&q0).scaled(C64::new(-1.0, 0.0));
    Ok(SubgradientField { q0, p0, eta })
}

/// Orientation of the subgradient in a Bregman distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `TV(u) - sign * <p0, u>`, the TV Bregman distance to the prior with
/// respect to `+p0` or `-p0`.
pub fn bregman_distance(u: &Image, sub: &SubgradientField, sign: Sign) -> Result<f64> {
    sub.check(u)?;
    let d = tv_value(u) - sign.value() * inner_product(&sub.p0, u)?;
    // Nonnegative in exact arithmetic since |q0| <= 1.
    Ok(d.max(0.0))
}

/// Settings of the inner minimization behind [`icbtv_value`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcbOptions {
    /// Bound on the value improvement over `stall_checks` checks, relative
    /// to `max(TV(u), 1)`.
    pub tolerance: f64,
    /// Bound on the size-normalized PD residual.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    pub check_interval: usize,
    pub stall_checks: usize,
}

impl IcbOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance, residual_tolerance: 1e-3, max_iterations: 200_000, check_interval: 50, stall_checks: 20 }
    }
}

/// Result of the infimal-convolution evaluation: the value and the part `psi`
/// of the decomposition `u = phi + psi` assigned to the opposite-sign distance.
#[derive(Debug, Clone)]
pub struct IcbDecomposition {
    pub value: f64,
    pub psi: Image,
    pub iterations: usize,
}

/// `inf_{phi + psi = u} D^{p0}(phi) + D^{-p0}(psi)`.
pub fn icbtv_value(u: &Image, sub: &SubgradientField, tolerance: f64) -> Result<f64> {
    icbtv_decomposition(u, sub, IcbOptions::with_tolerance(tolerance)).map(|d| d.value)
}

/// Evaluates the infimal convolution with a primal-dual iteration over `psi`:
///
/// `min_psi TV(u - psi) + TV(psi) + 2 <p0, psi> - <p0, u>`
///
/// started from the better of the trivial splits `psi = 0` and `psi = u`.
/// Converged when the best value is within the tolerance of zero, or when it
/// has stopped improving over a window of checks while the PD residual is
/// small. The inner problem is piecewise linear, so the residual decays only
/// like `1/k` and is not a usable accuracy target on its own.
pub fn icbtv_decomposition(u: &Image, sub: &SubgradientField, opts: IcbOptions) -> Result<IcbDecomposition> {
    sub.check(u)?;
    if !(opts.tolerance > 0.0) || !(opts.residual_tolerance > 0.0) || opts.check_interval == 0 || opts.stall_checks == 0 {
        return Err(Error::InvalidParameter("tolerances must be > 0 and intervals >= 1".into()));
    }
    let (h, w) = u.dims();
    let n = h * w;
    let p0 = sub.p0.as_slice();
    let p0u = inner_product(&sub.p0, u)?;
    let scale = tv_value(u).max(1.0);

    let objective = |psi: &[C64], scratch: &mut VectorField| -> f64 {
        let diff: Vec<C64> = u.as_slice().iter().zip(psi).map(|(a, b)| a - b).collect();
        gradient_into(&diff, h, w, scratch);
        let mut v = scratch.l1_norm();
        gradient_into(psi, h, w, scratch);
        v += scratch.l1_norm();
        v + 2.0 * crate::types::real_dot(p0, psi) - p0u
    };

    let mut scratch = VectorField::zeros(h, w);
    let zero = vec![C64::new(0.0, 0.0); n];
    let at_zero = objective(&zero, &mut scratch);
    let at_u = objective(u.as_slice(), &mut scratch);
    let mut psi = if at_u < at_zero { u.as_slice().to_vec() } else { zero };
    let mut best = at_zero.min(at_u).max(0.0);
    let mut best_psi = psi.clone();
    if best == 0.0 {
        return Ok(IcbDecomposition { value: 0.0, psi: Image::from_parts(h, w, best_psi), iterations: 0 });
    }

    // ||[-grad; grad]|| = sqrt(2) ||grad|| <= 4
    let tau = 0.99 / 4.0;
    let sigma = tau;
    let grad_u = gradient(u);
    let mut a = VectorField::zeros(h, w);
    let mut b = VectorField::zeros(h, w);
    let mut psi_bar = psi.clone();
    let mut div_a = vec![C64::new(0.0, 0.0); n];
    let mut div_b = vec![C64::new(0.0, 0.0); n];
    let mut g = VectorField::zeros(h, w);
    let mut window = std::collections::VecDeque::from([best]);
    let mut residual = f64::INFINITY;

    for k in 1..=opts.max_iterations {
        let check = k % opts.check_interval == 0;
        let (a_old, b_old, psi_old) = if check {
            (Some(a.clone()), Some(b.clone()), Some(psi.clone()))
        } else {
            (None, None, None)
        };

        gradient_into(&psi_bar, h, w, &mut g);
        for i in 0..n {
            a.dx[i] += sigma * (grad_u.dx[i] - g.dx[i]);
            a.dy[i] += sigma * (grad_u.dy[i] - g.dy[i]);
            b.dx[i] += sigma * g.dx[i];
            b.dy[i] += sigma * g.dy[i];
        }
        project_dual_ball_in_place(&mut a, 1.0);
        project_dual_ball_in_place(&mut b, 1.0);

        divergence_into(&a, &mut div_a);
        divergence_into(&b, &mut div_b);
        for i in 0..n {
            let new = psi[i] - tau * (div_a[i] - div_b[i] + 2.0 * p0[i]);
            psi_bar[i] = 2.0 * new - psi[i];
            psi[i] = new;
        }

        if check {
            let value = objective(&psi, &mut scratch);
            if value < best {
                best = value.max(0.0);
                best_psi.clone_from(&psi);
            }
            // Primal/dual fixed-point residuals for L psi = (-grad psi, grad psi).
            let (a_old, b_old, psi_old) = (a_old.unwrap(), b_old.unwrap(), psi_old.unwrap());
            let da = a_old.add_scaled(-1.0, &a)?;
            let db = b_old.add_scaled(-1.0, &b)?;
            let dpsi: Vec<C64> = psi_old.iter().zip(&psi).map(|(o, p)| o - p).collect();
            let lhda = divergence(&da).add_scaled(-1.0, &divergence(&db))?;
            let primal: f64 = dpsi
                .iter()
                .zip(lhda.as_slice())
                .map(|(dp, l)| (dp / tau - l).norm_sqr())
                .sum::<f64>()
                .sqrt();
            gradient_into(&dpsi, h, w, &mut g);
            let mut dual = 0.0;
            for i in 0..n {
                dual += (da.dx[i] / sigma + g.dx[i]).norm_sqr() + (da.dy[i] / sigma + g.dy[i]).norm_sqr();
                dual += (db.dx[i] / sigma - g.dx[i]).norm_sqr() + (db.dy[i] / sigma - g.dy[i]).norm_sqr();
            }
            residual = (primal + dual.sqrt()) / ((5 * n) as f64).sqrt();
            window.push_back(best);
            if window.len() > opts.stall_checks + 1 {
                window.pop_front();
            }
            let stalled = window.len() > opts.stall_checks && window[0] - best <= opts.tolerance * scale;
            if best <= opts.tolerance * scale || (stalled && residual <= opts.residual_tolerance) {
                return Ok(IcbDecomposition {
                    value: best,
                    psi: Image::from_parts(h, w, best_psi),
                    iterations: k,
                });
            }
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iterations, last_gap: residual })
}

/// Prox of `sigma * ||.||^2 / (2 alpha)` (the conjugate of the quadratic data
/// term): `r -> alpha r / (alpha + sigma)`.
pub fn prox_dual_quadratic(r: &[C64], alpha: f64, sigma: f64) -> Vec<C64> {
    let mut out = r.to_vec();
    prox_dual_quadratic_in_place(&mut out, alpha, sigma);
    out
}

pub fn prox_dual_quadratic_in_place(r: &mut [C64], alpha: f64, sigma: f64) {
    debug_assert!(alpha > 0.0 && sigma >= 0.0);
    let factor = alpha / (alpha + sigma);
    r.iter_mut().for_each(|v| *v *= factor);
}

/// Pixelwise projection onto `{ |w_i| <= radius }`.
pub fn project_dual_ball(w: &VectorField, radius: f64) -> VectorField {
    let mut out = w.clone();
    project_dual_ball_in_place(&mut out, radius);
    out
}

/// In-place variant of [`project_dual_ball`]. The result satisfies
/// `|w_i| <= radius` exactly in floating point, so a second projection is a
/// no-op.
pub fn project_dual_ball_in_place(w: &mut VectorField, radius: f64) {
    let zero = C64::new(0.0, 0.0);
    if radius <= 0.0 {
        w.dx.iter_mut().for_each(|v| *v = zero);
        w.dy.iter_mut().for_each(|v| *v = zero);
        return;
    }
    for (dx, dy) in w.dx.iter_mut().zip(w.dy.iter_mut()) {
        project_pair(dx, dy, radius);
    }
}

/// Projects one pair onto `{ |(dx, dy)| <= radius }`, `radius > 0`.
#[inline]
pub(crate) fn project_pair(dx: &mut C64, dy: &mut C64, radius: f64) {
    let m = (dx.norm_sqr() + dy.norm_sqr()).sqrt();
    if m <= radius {
        return;
    }
    let (x, y) = (*dx, *dy);
    let mut s = radius / m;
    loop {
        *dx = x * s;
        *dy = y * s;
        if (dx.norm_sqr() + dy.norm_sqr()).sqrt() <= radius {
            break;
        }
        s = s.next_down();
    }
}
