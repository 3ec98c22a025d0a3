use crate::error::Result;
use crate::operators::{FourierSampling, SamplingPattern};
use crate::types::{norm_sqr, real_dot, Image, C64};

/// Minimum-norm least-squares solution of `K_t u = f_t` by conjugate
/// gradients on the normal equations, started at zero.
pub fn ls_reconstruct(f: &[C64], pattern: &SamplingPattern, t: usize, iterations: usize) -> Result<Image> {
    let (h, w) = pattern.dims();
    let indices = pattern.indices(t)?;
    let op = FourierSampling::new(h, w);
    let normal = |v: &[C64]| -> Result<Vec<C64>> {
        let img = Image::from_parts(h, w, v.to_vec());
        Ok(op.adjoint_op(&op.forward_op(&img, indices)?, indices)?.into_vec())
    };

    let mut x = vec![C64::new(0.0, 0.0); h * w];
    let mut r = op.adjoint_op(f, indices)?.into_vec();
    let mut p = r.clone();
    let mut rr = norm_sqr(&r);
    let floor = rr * 1e-30;
    for _ in 0..iterations {
        if rr <= floor || rr == 0.0 {
            break;
        }
        let ap = normal(&p)?;
        let pap = real_dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let step = rr / pap;
        for i in 0..x.len() {
            x[i] += p[i] * step;
            r[i] -= ap[i] * step;
        }
        let rr_new = norm_sqr(&r);
        let beta = rr_new / rr;
        for i in 0..p.len() {
            p[i] = r[i] + p[i] * beta;
        }
        rr = rr_new;
    }
    Ok(Image::from_parts(h, w, x))
}
