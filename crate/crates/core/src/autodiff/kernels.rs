//! Forward and backward kernels for the spatial layers, on `[C, H, W]` data.

use super::tensor::Real;

/// Geometry of a "same"-padded 2D cross-correlation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvDims {
    pub c_in: usize,
    pub c_out: usize,
    pub h: usize,
    pub w: usize,
    pub kh: usize,
    pub kw: usize,
}

impl ConvDims {
    pub fn k(&self) -> usize {
        self.c_in * self.kh * self.kw
    }

    pub fn pixels(&self) -> usize {
        self.h * self.w
    }

    fn is_pointwise(&self) -> bool {
        self.kh == 1 && self.kw == 1
    }
}

/// Unfold `x` into a `[C_in * kh * kw, H * W]` patch matrix.
pub(crate) fn im2col<T: Real>(x: &[T], d: &ConvDims) -> Vec<T> {
    let (ph, pw) = (d.kh / 2, d.kw / 2);
    let p = d.pixels();
    let mut cols = vec![T::zero(); d.k() * p];
    for ci in 0..d.c_in {
        let plane = &x[ci * p..(ci + 1) * p];
        for i in 0..d.kh {
            for j in 0..d.kw {
                let row = &mut cols[((ci * d.kh + i) * d.kw + j) * p..][..p];
                for y in 0..d.h {
                    let sy = y as isize + i as isize - ph as isize;
                    if sy < 0 || sy >= d.h as isize {
                        continue;
                    }
                    let src = &plane[sy as usize * d.w..(sy as usize + 1) * d.w];
                    let dst = &mut row[y * d.w..(y + 1) * d.w];
                    let shift = j as isize - pw as isize;
                    let (x0, x1) = (
                        (-shift).max(0) as usize,
                        (d.w as isize - shift).min(d.w as isize) as usize,
                    );
                    for xx in x0..x1 {
                        dst[xx] = src[(xx as isize + shift) as usize];
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-add patch gradients back to the input.
pub(crate) fn col2im<T: Real>(cols: &[T], d: &ConvDims, dx: &mut [T]) {
    let (ph, pw) = (d.kh / 2, d.kw / 2);
    let p = d.pixels();
    for ci in 0..d.c_in {
        let plane = &mut dx[ci * p..(ci + 1) * p];
        for i in 0..d.kh {
            for j in 0..d.kw {
                let row = &cols[((ci * d.kh + i) * d.kw + j) * p..][..p];
                for y in 0..d.h {
                    let sy = y as isize + i as isize - ph as isize;
                    if sy < 0 || sy >= d.h as isize {
                        continue;
                    }
                    let dst = &mut plane[sy as usize * d.w..(sy as usize + 1) * d.w];
                    let src = &row[y * d.w..(y + 1) * d.w];
                    let shift = j as isize - pw as isize;
                    let (x0, x1) = (
                        (-shift).max(0) as usize,
                        (d.w as isize - shift).min(d.w as isize) as usize,
                    );
                    let (t0, t1) = ((x0 as isize + shift) as usize, (x1 as isize + shift) as usize);
                    for (t, &s) in dst[t0..t1].iter_mut().zip(&src[x0..x1]) {
                        *t = *t + s;
                    }
                }
            }
        }
    }
}

/// Returns the output and the patch matrix (empty for 1x1 kernels, which
/// read `x` directly).
pub(crate) fn conv2d_forward<T: Real>(x: &[T], w: &[T], b: &[T], d: &ConvDims) -> (Vec<T>, Vec<T>) {
    let p = d.pixels();
    let mut out = vec![T::zero(); d.c_out * p];
    for (co, row) in out.chunks_mut(p).enumerate() {
        row.fill(b[co]);
    }
    let cols = if d.is_pointwise() { Vec::new() } else { im2col(x, d) };
    let patches: &[T] = if d.is_pointwise() { x } else { &cols };
    let k = d.k() as isize;
    T::gemm(
        d.c_out,
        d.k(),
        p,
        (w, k, 1),
        (patches, p as isize, 1),
        T::one(),
        (&mut out, p as isize, 1),
    );
    (out, cols)
}

/// Gradients `(dx, dw, db)` given the upstream gradient `dy`.
pub(crate) fn conv2d_backward<T: Real>(
    x: &[T],
    w: &[T],
    cols: &[T],
    dy: &[T],
    d: &ConvDims,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let p = d.pixels();
    let k = d.k();
    let patches: &[T] = if d.is_pointwise() { x } else { cols };

    let db: Vec<T> = dy.chunks(p).map(|row| row.iter().copied().sum()).collect();

    let mut dw = vec![T::zero(); d.c_out * k];
    // dw = dy @ patches^T
    T::gemm(
        d.c_out,
        p,
        k,
        (dy, p as isize, 1),
        (patches, 1, p as isize),
        T::zero(),
        (&mut dw, k as isize, 1),
    );

    // dpatches = w^T @ dy
    let mut dpatches = vec![T::zero(); k * p];
    T::gemm(
        k,
        d.c_out,
        p,
        (w, 1, k as isize),
        (dy, p as isize, 1),
        T::zero(),
        (&mut dpatches, p as isize, 1),
    );
    let dx = if d.is_pointwise() {
        dpatches
    } else {
        let mut dx = vec![T::zero(); d.c_in * p];
        col2im(&dpatches, d, &mut dx);
        dx
    };
    (dx, dw, db)
}

/// Max pooling over non-overlapping `ph x pw` windows. Returns the output and
/// the flat input index of each window's maximum (first in row-major order
/// on ties).
pub(crate) fn maxpool_forward<T: Real>(
    x: &[T],
    (c, h, w): (usize, usize, usize),
    (ph, pw): (usize, usize),
) -> (Vec<T>, Vec<usize>) {
    let (oh, ow) = (h / ph, w / pw);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut arg = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best_i = ch * h * w + oy * ph * w + ox * pw;
                let mut best = x[best_i];
                for i in 0..ph {
                    for j in 0..pw {
                        let idx = ch * h * w + (oy * ph + i) * w + ox * pw + j;
                        if x[idx] > best {
                            best = x[idx];
                            best_i = idx;
                        }
                    }
                }
                out.push(best);
                arg.push(best_i);
            }
        }
    }
    (out, arg)
}

pub(crate) fn upsample_forward<T: Real>(x: &[T], (c, h, w): (usize, usize, usize), (fh, fw): (usize, usize)) -> Vec<T> {
    let (oh, ow) = (h * fh, w * fw);
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            let src = &x[ch * h * w + (oy / fh) * w..][..w];
            for ox in 0..ow {
                out.push(src[ox / fw]);
            }
        }
    }
    out
}

/// Adjoint of nearest upsampling: sum each replicated block.
pub(crate) fn upsample_backward<T: Real>(
    dy: &[T],
    (c, h, w): (usize, usize, usize),
    (fh, fw): (usize, usize),
) -> Vec<T> {
    let (oh, ow) = (h * fh, w * fw);
    let mut dx = vec![T::zero(); c * h * w];
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let t = ch * h * w + (oy / fh) * w + ox / fw;
                dx[t] = dx[t] + dy[ch * oh * ow + oy * ow + ox];
            }
        }
    }
    dx
}
