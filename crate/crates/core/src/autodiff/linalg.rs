//! Dense matrix products and the patch unfolding shared by both convolutions.

/// A row-major `rows x cols` view, optionally read transposed.
#[derive(Clone, Copy)]
pub(crate) struct Mat<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub transposed: bool,
}

impl<'a> Mat<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Mat {
            data,
            rows,
            cols,
            transposed: false,
        }
    }

    pub fn t(self) -> Self {
        Mat {
            transposed: !self.transposed,
            ..self
        }
    }

    fn logical(&self) -> (usize, usize) {
        if self.transposed {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        }
    }

    fn strides(&self) -> (isize, isize) {
        if self.transposed {
            (1, self.cols as isize)
        } else {
            (self.cols as isize, 1)
        }
    }
}

/// `out = a * b` (or `out += a * b` when `accumulate`), `out` row-major.
pub(crate) fn gemm(a: Mat<'_>, b: Mat<'_>, out: &mut [f64], accumulate: bool) {
    let (m, k) = a.logical();
    let (k2, n) = b.logical();
    assert_eq!(k, k2, "gemm inner dimensions");
    assert_eq!(out.len(), m * n, "gemm output size");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if !accumulate {
            out.fill(0.0);
        }
        return;
    }
    let (rsa, csa) = a.strides();
    let (rsb, csb) = b.strides();
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: the strides describe exactly the extents of the checked slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Correspondence between a large `[C, H, W]` plane stack and the grid of
/// kernel windows sampled from it at a given stride and zero padding.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Unfold {
    pub channels: usize,
    pub big_h: usize,
    pub big_w: usize,
    pub grid_h: usize,
    pub grid_w: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl Unfold {
    pub fn rows(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    pub fn cols(&self) -> usize {
        self.grid_h * self.grid_w
    }

    /// Big-plane coordinate hit by grid index `o` and kernel offset `kk`.
    #[inline]
    fn source(&self, o: usize, kk: usize, extent: usize) -> Option<usize> {
        let pos = (o * self.stride + kk) as isize - self.padding as isize;
        (pos >= 0 && (pos as usize) < extent).then_some(pos as usize)
    }

    /// Gathers every window into a `[C*k*k, grid_h*grid_w]` column matrix.
    pub fn im2col(&self, big: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        let mut out = vec![0.0; self.rows() * cols];
        let plane = self.big_h * self.big_w;
        for c in 0..self.channels {
            let src = &big[c * plane..(c + 1) * plane];
            for ki in 0..self.kernel {
                for kj in 0..self.kernel {
                    let row = (c * self.kernel + ki) * self.kernel + kj;
                    let dst = &mut out[row * cols..(row + 1) * cols];
                    for oh in 0..self.grid_h {
                        let Some(ih) = self.source(oh, ki, self.big_h) else {
                            continue;
                        };
                        let src_row = &src[ih * self.big_w..(ih + 1) * self.big_w];
                        let dst_row = &mut dst[oh * self.grid_w..(oh + 1) * self.grid_w];
                        for (ow, d) in dst_row.iter_mut().enumerate() {
                            if let Some(iw) = self.source(ow, kj, self.big_w) {
                                *d = src_row[iw];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Adjoint of [`Unfold::im2col`]: scatter-adds columns back into `big`.
    pub fn col2im(&self, cols_data: &[f64], big: &mut [f64]) {
        let cols = self.cols();
        let plane = self.big_h * self.big_w;
        for c in 0..self.channels {
            let dst = &mut big[c * plane..(c + 1) * plane];
            for ki in 0..self.kernel {
                for kj in 0..self.kernel {
                    let row = (c * self.kernel + ki) * self.kernel + kj;
                    let src = &cols_data[row * cols..(row + 1) * cols];
                    for oh in 0..self.grid_h {
                        let Some(ih) = self.source(oh, ki, self.big_h) else {
                            continue;
                        };
                        let src_row = &src[oh * self.grid_w..(oh + 1) * self.grid_w];
                        let dst_row = &mut dst[ih * self.big_w..(ih + 1) * self.big_w];
                        for (ow, s) in src_row.iter().enumerate() {
                            if let Some(iw) = self.source(ow, kj, self.big_w) {
                                dst_row[iw] += s;
                            }
                        }
                    }
                }
            }
        }
    }
}
