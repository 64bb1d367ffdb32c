use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::Image;

/// Separable Gaussian filter with clamp-to-border edges; `sigma <= 0` is the
/// identity.
pub fn blur_with_sigma(image: &Image, sigma: f64) -> Image {
    if !(sigma > 0.0) {
        return image.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let (w, h) = (image.width(), image.height());
    let src = image.pixels();

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &wt)| wt * row[clamp_index(x as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &wt)| wt * tmp[clamp_index(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    Image::from_clipped(w, h, out)
}

/// Weights `exp(-i^2 / 2 sigma^2)` for `|i| <= ceil(3 sigma)`, summing to 1.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Adds seeded i.i.d. Gaussian noise of standard deviation `sigma`, clipping
/// to `[0, 1]`; `sigma <= 0` is the identity.
pub fn noise_with_sigma(image: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma > 0.0) {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = image
        .pixels()
        .iter()
        .map(|&v| v + normal.sample(&mut rng))
        .collect();
    Ok(Image::from_clipped(image.width(), image.height(), data))
}

pub const BLOCK: usize = 8;

/// Orthonormal DCT-II basis: `basis[k][n] = a(k) cos(pi (2n + 1) k / 16)`.
fn dct_basis() -> [[f64; BLOCK]; BLOCK] {
    let mut c = [[0.0; BLOCK]; BLOCK];
    for (k, row) in c.iter_mut().enumerate() {
        let a = if k == 0 {
            (1.0 / BLOCK as f64).sqrt()
        } else {
            (2.0 / BLOCK as f64).sqrt()
        };
        for (n, v) in row.iter_mut().enumerate() {
            *v = a * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * BLOCK) as f64).cos();
        }
    }
    c
}

/// `C X C^T` for a row-major 8x8 block.
pub fn dct8(block: &[f64; 64]) -> [f64; 64] {
    let c = dct_basis();
    transform(block, |i, j| c[i][j])
}

/// `C^T Y C`, the inverse of [`dct8`].
pub fn idct8(coeffs: &[f64; 64]) -> [f64; 64] {
    let c = dct_basis();
    transform(coeffs, |i, j| c[j][i])
}

/// `M X M^T` with `M[i][j] = m(i, j)`.
fn transform(x: &[f64; 64], m: impl Fn(usize, usize) -> f64) -> [f64; 64] {
    let mut rows = [0.0; 64];
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            rows[i * BLOCK + j] = (0..BLOCK).map(|k| m(i, k) * x[k * BLOCK + j]).sum();
        }
    }
    let mut out = [0.0; 64];
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            out[i * BLOCK + j] = (0..BLOCK).map(|k| rows[i * BLOCK + k] * m(j, k)).sum();
        }
    }
    out
}

/// Uniform quantization of 8x8 block-DCT coefficients with steps `dc_step`
/// for the mean coefficient and `ac_step` for the rest. Extents are padded
/// by edge replication and cropped back; `ac_step <= 0` is the identity.
pub fn quantize_blocks(image: &Image, ac_step: f64, dc_step: f64) -> Image {
    if !(ac_step > 0.0 && dc_step > 0.0) {
        return image.clone();
    }
    let (w, h) = (image.width(), image.height());
    let src = image.pixels();
    let mut out = vec![0.0; w * h];
    for by in (0..h).step_by(BLOCK) {
        for bx in (0..w).step_by(BLOCK) {
            let mut block = [0.0; 64];
            for (i, v) in block.iter_mut().enumerate() {
                let x = (bx + i % BLOCK).min(w - 1);
                let y = (by + i / BLOCK).min(h - 1);
                *v = src[y * w + x];
            }
            let mut coeffs = dct8(&block);
            for (i, c) in coeffs.iter_mut().enumerate() {
                let step = if i == 0 { dc_step } else { ac_step };
                *c = (*c / step).round() * step;
            }
            let rec = idct8(&coeffs);
            for (i, &v) in rec.iter().enumerate() {
                let (x, y) = (bx + i % BLOCK, by + i / BLOCK);
                if x < w && y < h {
                    out[y * w + x] = v;
                }
            }
        }
    }
    Image::from_clipped(w, h, out)
}
