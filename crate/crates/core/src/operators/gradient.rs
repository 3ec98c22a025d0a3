use crate::types::{Image, VectorField, C64};

/// Forward differences with a Neumann boundary: the x-difference of the last
/// column and the y-difference of the last row are zero.
pub fn gradient(u: &Image) -> VectorField {
    let (h, w) = u.dims();
    let mut out = VectorField::zeros(h, w);
    gradient_into(u.as_slice(), h, w, &mut out);
    out
}

pub fn gradient_into(u: &[C64], height: usize, width: usize, out: &mut VectorField) {
    debug_assert_eq!(u.len(), height * width);
    debug_assert_eq!(out.dims(), (height, width));
    let zero = C64::new(0.0, 0.0);
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            let i = row + x;
            out.dx[i] = if x + 1 < width { u[i + 1] - u[i] } else { zero };
            out.dy[i] = if y + 1 < height { u[i + width] - u[i] } else { zero };
        }
    }
}

/// Negative adjoint of [`gradient`]: `<grad u, w> = -<u, div w>`.
pub fn divergence(w: &VectorField) -> Image {
    let (h, wd) = w.dims();
    let mut out = vec![C64::new(0.0, 0.0); h * wd];
    divergence_into(w, &mut out);
    Image::from_parts(h, wd, out)
}

pub fn divergence_into(field: &VectorField, out: &mut [C64]) {
    let (h, w) = field.dims();
    debug_assert_eq!(out.len(), h * w);
    let zero = C64::new(0.0, 0.0);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let i = row + x;
            let ax = if x + 1 < w { field.dx[i] } else { zero };
            let bx = if x > 0 { field.dx[i - 1] } else { zero };
            let ay = if y + 1 < h { field.dy[i] } else { zero };
            let by = if y > 0 { field.dy[i - w] } else { zero };
            out[i] = ax - bx + ay - by;
        }
    }
}
