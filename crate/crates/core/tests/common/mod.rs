//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the library's own implementation of the
//! quantity being checked.

#![allow(dead_code)]

use biqa::autodiff::{
    conv2d, conv2d_transpose, gdn, mse_loss, ConvGeometry, ConvParams, ConvVars, GdnParams,
    GdnVars, Tape, Tensor,
};
use biqa::image::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(shape: &[usize], lo: f64, hi: f64, rng: &mut impl Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// Finite differences

pub const FD_STEP: f64 = 1e-5;

/// Norm-wise relative error `|a - n| / max(|a|, |n|)` of each input's
/// analytic gradient `a` against its central-difference estimate `n`.
pub fn gradient_errors(
    inputs: &[Tensor],
    loss: impl Fn(&[Tensor]) -> f64,
    analytic: &[Tensor],
) -> Vec<f64> {
    let mut work: Vec<Tensor> = inputs.to_vec();
    inputs
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let mut numeric = vec![0.0; t.len()];
            for (i, slot) in numeric.iter_mut().enumerate() {
                let orig = t.data()[i];
                work[k].data_mut()[i] = orig + FD_STEP;
                let up = loss(&work);
                work[k].data_mut()[i] = orig - FD_STEP;
                let down = loss(&work);
                work[k].data_mut()[i] = orig;
                *slot = (up - down) / (2.0 * FD_STEP);
            }
            let a = analytic[k].data();
            let diff: f64 = a.iter().zip(&numeric).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nn = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = na.max(nn);
            if scale == 0.0 {
                0.0
            } else {
                diff / scale
            }
        })
        .collect()
}

/// Random geometry for a convolution on a tensor of at most 4x8x8.
pub struct ConvCase {
    pub x: Tensor,
    pub w: Tensor,
    pub b: Tensor,
    pub geometry: ConvGeometry,
    pub target_shape: Vec<usize>,
}

pub fn conv_case(transposed: bool, rng: &mut impl Rng) -> ConvCase {
    let c_in = rng.random_range(1..=4);
    let c_out = rng.random_range(1..=4);
    let k = [1, 3, 5][rng.random_range(0..3)];
    let stride = rng.random_range(1..=3);
    let padding = k / 2;
    let (h, w) = if transposed {
        (rng.random_range(1..=4), rng.random_range(1..=4))
    } else {
        (rng.random_range(k.max(2)..=8), rng.random_range(k.max(2)..=8))
    };
    let output_padding = if transposed { rng.random_range(0..stride) } else { 0 };
    let x = random_tensor(&[c_in, h, w], -1.0, 1.0, rng);
    let wshape = if transposed {
        [c_in, c_out, k, k]
    } else {
        [c_out, c_in, k, k]
    };
    let wt = random_tensor(&wshape, -0.5, 0.5, rng);
    let b = random_tensor(&[c_out], -0.2, 0.2, rng);
    let (oh, ow) = if transposed {
        (
            (h - 1) * stride + k + output_padding - 2 * padding,
            (w - 1) * stride + k + output_padding - 2 * padding,
        )
    } else {
        ((h + 2 * padding - k) / stride + 1, (w + 2 * padding - k) / stride + 1)
    };
    ConvCase {
        x,
        w: wt,
        b,
        geometry: ConvGeometry {
            stride,
            padding,
            output_padding,
        },
        target_shape: vec![c_out, oh, ow],
    }
}

fn conv_params(w: &Tensor, b: &Tensor, g: ConvGeometry) -> ConvParams {
    ConvParams::new(w.clone(), b.clone(), g.stride, g.padding)
        .unwrap()
        .with_output_padding(g.output_padding)
}

/// Worst relative gradient error of `mse(conv(x), target)` over x, w, b.
pub fn check_conv(transposed: bool, rng: &mut impl Rng) -> f64 {
    let case = conv_case(transposed, rng);
    let target = random_tensor(&case.target_shape, -1.0, 1.0, rng);
    let g = case.geometry;
    let forward = |t: &[Tensor]| {
        let p = conv_params(&t[1], &t[2], g);
        let y = if transposed {
            conv2d_transpose(&t[0], &p)
        } else {
            conv2d(&t[0], &p)
        };
        mse_loss(&y.unwrap(), &target).unwrap()
    };
    let inputs = [case.x.clone(), case.w.clone(), case.b.clone()];
    let mut tape = Tape::new();
    let x = tape.leaf(case.x);
    let layer = ConvVars {
        weights: tape.leaf(case.w),
        bias: tape.leaf(case.b),
        geometry: g,
    };
    let y = if transposed {
        tape.conv2d_transpose(x, layer)
    } else {
        tape.conv2d(x, layer)
    }
    .unwrap();
    let t = tape.leaf(target.clone());
    let loss = tape.mse(y, t).unwrap();
    let grads = tape.backward(loss).unwrap();
    let analytic = [x, layer.weights, layer.bias].map(|v| grads.get(v).unwrap().clone());
    worst(gradient_errors(&inputs, forward, &analytic))
}

/// Worst relative gradient error of `mse(gdn(x), target)` over x, beta, gamma.
pub fn check_gdn(inverse: bool, rng: &mut impl Rng) -> f64 {
    let c = rng.random_range(1..=4);
    let (h, w) = (rng.random_range(1..=8), rng.random_range(1..=8));
    let x = random_tensor(&[c, h, w], -1.5, 1.5, rng);
    let beta = random_tensor(&[c], 0.5, 1.5, rng);
    let gamma = random_tensor(&[c, c], 0.0, 0.5, rng);
    let target = random_tensor(&[c, h, w], -1.0, 1.0, rng);
    let forward = |t: &[Tensor]| {
        let p = GdnParams::new(t[1].clone(), t[2].clone()).unwrap();
        mse_loss(&gdn(&t[0], &p, inverse).unwrap(), &target).unwrap()
    };
    let inputs = [x.clone(), beta.clone(), gamma.clone()];
    let mut tape = Tape::new();
    let xv = tape.leaf(x);
    let layer = GdnVars {
        beta: tape.leaf(beta),
        gamma: tape.leaf(gamma),
    };
    let y = tape.gdn(xv, layer, inverse).unwrap();
    let t = tape.leaf(target.clone());
    let loss = tape.mse(y, t).unwrap();
    let grads = tape.backward(loss).unwrap();
    let analytic = [xv, layer.beta, layer.gamma].map(|v| grads.get(v).unwrap().clone());
    worst(gradient_errors(&inputs, forward, &analytic))
}

/// Worst relative gradient error of `mse(p, q)` over both arguments.
pub fn check_mse(rng: &mut impl Rng) -> f64 {
    let shape = [rng.random_range(1..=4), rng.random_range(1..=8), rng.random_range(1..=8)];
    let p = random_tensor(&shape, -1.0, 1.0, rng);
    let q = random_tensor(&shape, -1.0, 1.0, rng);
    let forward = |t: &[Tensor]| mse_loss(&t[0], &t[1]).unwrap();
    let inputs = [p.clone(), q.clone()];
    let mut tape = Tape::new();
    let pv = tape.leaf(p);
    let qv = tape.leaf(q);
    let loss = tape.mse(pv, qv).unwrap();
    let grads = tape.backward(loss).unwrap();
    let analytic = [pv, qv].map(|v| grads.get(v).unwrap().clone());
    worst(gradient_errors(&inputs, forward, &analytic))
}

fn worst(errors: Vec<f64>) -> f64 {
    errors.into_iter().fold(0.0, f64::max)
}

/// Direct-summation convolution: `y[o,i,j] = b[o] + sum x[c, i s + u - p, j s + v - p] w[o,c,u,v]`.
pub fn naive_conv2d(x: &Tensor, w: &Tensor, b: &Tensor, stride: usize, padding: usize) -> Tensor {
    let (c_in, h, wd) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (c_out, k) = (w.shape()[0], w.shape()[2]);
    let oh = (h + 2 * padding - k) / stride + 1;
    let ow = (wd + 2 * padding - k) / stride + 1;
    let mut out = vec![0.0; c_out * oh * ow];
    for o in 0..c_out {
        for i in 0..oh {
            for j in 0..ow {
                let mut acc = b.data()[o];
                for c in 0..c_in {
                    for u in 0..k {
                        for v in 0..k {
                            let yy = (i * stride + u) as isize - padding as isize;
                            let xx = (j * stride + v) as isize - padding as isize;
                            if yy >= 0 && xx >= 0 && (yy as usize) < h && (xx as usize) < wd {
                                acc += x.data()[(c * h + yy as usize) * wd + xx as usize]
                                    * w.data()[((o * c_in + c) * k + u) * k + v];
                            }
                        }
                    }
                }
                out[(o * oh + i) * ow + j] = acc;
            }
        }
    }
    Tensor::new(vec![c_out, oh, ow], out).unwrap()
}

// ---------------------------------------------------------------------------
// Density estimation

pub fn naive_kernel(u: f64) -> f64 {
    if (-1.0..=1.0).contains(&u) {
        3.0 / 4.0 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Direct sum over every observation, in input order.
pub fn naive_kde(observations: &[f64], h: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    for &xi in observations {
        sum += naive_kernel((xi - x) / h);
    }
    sum / (observations.len() as f64 * h)
}

/// Composite trapezoid rule with `points` nodes on `[a, b]`.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
    let step = (b - a) / (points - 1) as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..points - 1 {
        sum += f(a + i as f64 * step);
    }
    sum * step
}

/// Random observation set mixing a few clusters, 2..=max_n values.
pub fn random_observations(max_n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let n = rng.random_range(2..=max_n);
    let centers: Vec<f64> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(-5.0..5.0)).collect();
    let spread = rng.random_range(0.05..2.0);
    (0..n)
        .map(|_| centers[rng.random_range(0..centers.len())] + spread * rng.random_range(-1.0..1.0))
        .collect()
}

// ---------------------------------------------------------------------------
// Correlation

/// Enumerates every pair: `(concordant - discordant) / pairs`.
pub fn brute_kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut c, mut d) = (0i64, 0i64);
    for i in 0..n {
        for j in 0..n {
            if i < j {
                let sx = (x[j] - x[i]).signum();
                let sy = (y[j] - y[i]).signum();
                if sx == sy {
                    c += 1;
                } else {
                    d += 1;
                }
            }
        }
    }
    (c - d) as f64 / (c + d) as f64
}

/// Rank by counting smaller values (tie-free input).
pub fn count_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| 1.0 + v.iter().filter(|b| *b < a).count() as f64)
        .collect()
}

/// Sample-covariance Pearson; the normalization cancels.
pub fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Distinct values drawn from a shuffled grid, so there are no ties.
pub fn tie_free_series(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut pool: Vec<f64> = (0..4 * n).map(|i| i as f64 * 0.37 + rng.random_range(0.0..0.3)).collect();
    for i in (1..pool.len()).rev() {
        pool.swap(i, rng.random_range(0..=i));
    }
    pool.truncate(n);
    pool
}

// ---------------------------------------------------------------------------
// Images

/// Smooth texture with an image-specific phase, values inside `[0.1, 0.9]`.
pub fn synthetic_image(width: usize, height: usize, seed: u64) -> Image {
    let phase = seed as f64 * 0.731;
    Image::from_fn(width, height, move |x, y| {
        let (x, y) = (x as f64, y as f64);
        0.5 + 0.2 * ((x * 0.21 + phase).sin() * (y * 0.13 - phase).cos())
            + 0.15 * ((x + y) * 0.05 + 2.0 * phase).sin()
    })
}
