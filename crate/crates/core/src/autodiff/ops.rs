//! Forward kernels and their vector-Jacobian products.
//!
//! Every differentiable operation comes as a pair: a forward function and a
//! `*_vjp` function that maps an upstream gradient onto gradients of each
//! input. The [`Tape`](super::Tape) strings these together.

use rand::Rng;

use super::linalg::{gemm, Mat, Unfold};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Lower bound enforced on GDN offsets.
pub const BETA_MIN: f64 = 1e-6;

/// Stride and padding of a (transposed) convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeometry {
    pub stride: usize,
    pub padding: usize,
    /// Extra rows/columns appended to a transposed convolution's output.
    /// Ignored by the forward convolution.
    pub output_padding: usize,
}

/// Weights and bias of one convolution layer.
///
/// For a forward convolution `weights` is `[C_out, C_in, k, k]` and `bias`
/// has `C_out` entries. A transposed convolution reuses the layout of the
/// convolution it is the adjoint of: `weights` is `[C_in, C_out, k, k]`
/// (input channels first) and `bias` has `C_out` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    pub weights: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub padding: usize,
    pub output_padding: usize,
}

impl ConvParams {
    pub fn new(weights: Tensor, bias: Tensor, stride: usize, padding: usize) -> Result<Self> {
        let params = ConvParams {
            weights,
            bias,
            stride,
            padding,
            output_padding: 0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_output_padding(mut self, output_padding: usize) -> Self {
        self.output_padding = output_padding;
        self
    }

    /// Glorot-uniform weights, zero bias, `padding = k / 2`.
    ///
    /// `outputs` is the channel count produced by the layer; `transposed`
    /// selects the weight layout described on [`ConvParams`].
    pub fn glorot<R: Rng>(
        outputs: usize,
        inputs: usize,
        kernel: usize,
        stride: usize,
        transposed: bool,
        rng: &mut R,
    ) -> Self {
        let k2 = kernel * kernel;
        let bound = (6.0 / ((inputs * k2 + outputs * k2) as f64)).sqrt();
        let shape = if transposed {
            [inputs, outputs, kernel, kernel]
        } else {
            [outputs, inputs, kernel, kernel]
        };
        ConvParams {
            weights: Tensor::uniform(&shape, bound, rng),
            bias: Tensor::zeros(&[outputs]),
            stride,
            padding: kernel / 2,
            output_padding: 0,
        }
    }

    pub fn kernel(&self) -> usize {
        self.weights.shape()[3]
    }

    pub fn geometry(&self) -> ConvGeometry {
        ConvGeometry {
            stride: self.stride,
            padding: self.padding,
            output_padding: self.output_padding,
        }
    }

    fn validate(&self) -> Result<()> {
        let s = self.weights.shape();
        if s.len() != 4 || s[2] != s[3] {
            return Err(Error::Shape(format!(
                "convolution weights must be [C, C, k, k], got {s:?}"
            )));
        }
        if s[2].is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "kernel size must be odd, got {}",
                s[2]
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be positive".into()));
        }
        if self.bias.rank() != 1 {
            return Err(Error::Shape(format!(
                "bias must be a vector, got {:?}",
                self.bias.shape()
            )));
        }
        Ok(())
    }
}

/// Offsets and cross-channel weights of a GDN / IGDN layer.
#[derive(Clone, Debug, PartialEq)]
pub struct GdnParams {
    /// `[C]`, each entry at least [`BETA_MIN`].
    pub beta: Tensor,
    /// `[C, C]`, non-negative.
    pub gamma: Tensor,
}

impl GdnParams {
    pub fn new(beta: Tensor, gamma: Tensor) -> Result<Self> {
        let c = beta.len();
        if beta.rank() != 1 || gamma.shape() != [c, c] {
            return Err(Error::Shape(format!(
                "gdn expects beta [C] and gamma [C, C], got {:?} and {:?}",
                beta.shape(),
                gamma.shape()
            )));
        }
        if beta.data().iter().any(|&b| !(b >= BETA_MIN)) {
            return Err(Error::InvalidArgument(format!(
                "gdn beta must be >= {BETA_MIN}"
            )));
        }
        if gamma.data().iter().any(|&g| !(g >= 0.0)) {
            return Err(Error::InvalidArgument(
                "gdn gamma must be non-negative".into(),
            ));
        }
        Ok(GdnParams { beta, gamma })
    }

    /// `beta = 1`, `gamma = 0.1 * I`.
    pub fn initial(channels: usize) -> Self {
        let mut gamma = Tensor::zeros(&[channels, channels]);
        for i in 0..channels {
            gamma.data_mut()[i * channels + i] = 0.1;
        }
        GdnParams {
            beta: Tensor::full(&[channels], 1.0),
            gamma,
        }
    }

    pub fn channels(&self) -> usize {
        self.beta.len()
    }

    /// Clamps the parameters back onto their feasible set.
    pub fn project(&mut self) {
        project_beta(&mut self.beta);
        project_gamma(&mut self.gamma);
    }
}

pub(crate) fn project_beta(beta: &mut Tensor) {
    for b in beta.data_mut() {
        *b = b.max(BETA_MIN);
    }
}

pub(crate) fn project_gamma(gamma: &mut Tensor) {
    for g in gamma.data_mut() {
        *g = g.max(0.0);
    }
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

fn conv_unfold(input: &Tensor, weights: &Tensor, bias: &Tensor, g: ConvGeometry) -> Result<Unfold> {
    let (c_in, h, w) = input.chw("conv2d")?;
    let ws = weights.shape();
    if ws.len() != 4 || ws[2] != ws[3] {
        return Err(Error::Shape(format!("conv2d weights {ws:?}")));
    }
    let k = ws[2];
    if ws[1] != c_in {
        return Err(Error::Shape(format!(
            "conv2d input has {c_in} channels but weights expect {}",
            ws[1]
        )));
    }
    if bias.shape() != [ws[0]] {
        return Err(Error::Shape(format!(
            "conv2d bias {:?} does not match {} output channels",
            bias.shape(),
            ws[0]
        )));
    }
    if g.stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    if h + 2 * g.padding < k || w + 2 * g.padding < k {
        return Err(Error::Shape(format!(
            "conv2d input {h}x{w} with padding {} is smaller than kernel {k}",
            g.padding
        )));
    }
    Ok(Unfold {
        channels: c_in,
        big_h: h,
        big_w: w,
        grid_h: (h + 2 * g.padding - k) / g.stride + 1,
        grid_w: (w + 2 * g.padding - k) / g.stride + 1,
        kernel: k,
        stride: g.stride,
        padding: g.padding,
    })
}

fn add_channel_bias(out: &mut [f64], bias: &[f64]) {
    let plane = out.len() / bias.len();
    for (chunk, b) in out.chunks_mut(plane).zip(bias) {
        for v in chunk {
            *v += b;
        }
    }
}

fn channel_sums(grad: &[f64], channels: usize) -> Vec<f64> {
    let plane = grad.len() / channels;
    grad.chunks(plane).map(|c| c.iter().sum()).collect()
}

pub(crate) fn conv2d_raw(input: &Tensor, weights: &Tensor, bias: &Tensor, g: ConvGeometry) -> Result<Tensor> {
    let u = conv_unfold(input, weights, bias, g)?;
    let c_out = weights.shape()[0];
    let cols = u.im2col(input.data());
    let mut out = vec![0.0; c_out * u.cols()];
    gemm(
        Mat::new(weights.data(), c_out, u.rows()),
        Mat::new(&cols, u.rows(), u.cols()),
        &mut out,
        false,
    );
    add_channel_bias(&mut out, bias.data());
    Tensor::new(vec![c_out, u.grid_h, u.grid_w], out)
}

/// Strided, zero-padded 2-D convolution of a `[C_in, H, W]` tensor.
pub fn conv2d(input: &Tensor, params: &ConvParams) -> Result<Tensor> {
    conv2d_raw(input, &params.weights, &params.bias, params.geometry())
}

/// Gradients of a convolution w.r.t. (input, weights, bias).
pub(crate) fn conv2d_vjp(
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    g: ConvGeometry,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let u = conv_unfold(input, weights, bias, g)?;
    let c_out = weights.shape()[0];
    if grad_out.shape() != [c_out, u.grid_h, u.grid_w] {
        return Err(Error::Shape(format!(
            "conv2d upstream gradient {:?}",
            grad_out.shape()
        )));
    }
    let cols = u.im2col(input.data());
    let go = Mat::new(grad_out.data(), c_out, u.cols());

    let mut grad_w = vec![0.0; weights.len()];
    gemm(go, Mat::new(&cols, u.rows(), u.cols()).t(), &mut grad_w, false);

    let mut grad_cols = vec![0.0; cols.len()];
    gemm(
        Mat::new(weights.data(), c_out, u.rows()).t(),
        go,
        &mut grad_cols,
        false,
    );
    let mut grad_in = vec![0.0; input.len()];
    u.col2im(&grad_cols, &mut grad_in);

    Ok((
        Tensor::new(input.shape().to_vec(), grad_in)?,
        Tensor::new(weights.shape().to_vec(), grad_w)?,
        Tensor::new(vec![c_out], channel_sums(grad_out.data(), c_out))?,
    ))
}

fn transpose_unfold(input: &Tensor, weights: &Tensor, bias: &Tensor, g: ConvGeometry) -> Result<Unfold> {
    let (c_in, h, w) = input.chw("conv2d_transpose")?;
    let ws = weights.shape();
    if ws.len() != 4 || ws[2] != ws[3] {
        return Err(Error::Shape(format!("conv2d_transpose weights {ws:?}")));
    }
    let k = ws[2];
    if ws[0] != c_in {
        return Err(Error::Shape(format!(
            "conv2d_transpose input has {c_in} channels but weights expect {}",
            ws[0]
        )));
    }
    if bias.shape() != [ws[1]] {
        return Err(Error::Shape(format!(
            "conv2d_transpose bias {:?} does not match {} output channels",
            bias.shape(),
            ws[1]
        )));
    }
    if g.stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let extent = |n: usize| -> Result<usize> {
        let e = ((n - 1) * g.stride + k + g.output_padding) as isize - 2 * g.padding as isize;
        if e <= 0 {
            return Err(Error::Shape(format!(
                "conv2d_transpose output extent {e} is not positive"
            )));
        }
        Ok(e as usize)
    };
    Ok(Unfold {
        channels: ws[1],
        big_h: extent(h)?,
        big_w: extent(w)?,
        grid_h: h,
        grid_w: w,
        kernel: k,
        stride: g.stride,
        padding: g.padding,
    })
}

pub(crate) fn conv2d_transpose_raw(
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    g: ConvGeometry,
) -> Result<Tensor> {
    let u = transpose_unfold(input, weights, bias, g)?;
    let c_in = input.shape()[0];
    let mut cols = vec![0.0; u.rows() * u.cols()];
    gemm(
        Mat::new(weights.data(), c_in, u.rows()).t(),
        Mat::new(input.data(), c_in, u.cols()),
        &mut cols,
        false,
    );
    let mut out = vec![0.0; u.channels * u.big_h * u.big_w];
    u.col2im(&cols, &mut out);
    add_channel_bias(&mut out, bias.data());
    Tensor::new(vec![u.channels, u.big_h, u.big_w], out)
}

/// Transposed convolution: the adjoint of [`conv2d`]'s linear map plus a bias.
///
/// Output extent is `(H - 1) * stride - 2 * padding + k + output_padding`.
pub fn conv2d_transpose(input: &Tensor, params: &ConvParams) -> Result<Tensor> {
    conv2d_transpose_raw(input, &params.weights, &params.bias, params.geometry())
}

pub(crate) fn conv2d_transpose_vjp(
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    g: ConvGeometry,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let u = transpose_unfold(input, weights, bias, g)?;
    let c_in = input.shape()[0];
    if grad_out.shape() != [u.channels, u.big_h, u.big_w] {
        return Err(Error::Shape(format!(
            "conv2d_transpose upstream gradient {:?}",
            grad_out.shape()
        )));
    }
    let gcols = u.im2col(grad_out.data());
    let gc = Mat::new(&gcols, u.rows(), u.cols());

    let mut grad_in = vec![0.0; input.len()];
    gemm(Mat::new(weights.data(), c_in, u.rows()), gc, &mut grad_in, false);

    let mut grad_w = vec![0.0; weights.len()];
    gemm(Mat::new(input.data(), c_in, u.cols()), gc.t(), &mut grad_w, false);

    Ok((
        Tensor::new(input.shape().to_vec(), grad_in)?,
        Tensor::new(weights.shape().to_vec(), grad_w)?,
        Tensor::new(vec![u.channels], channel_sums(grad_out.data(), u.channels))?,
    ))
}

// ---------------------------------------------------------------------------
// Generalized divisive normalization
// ---------------------------------------------------------------------------

fn check_gdn(x: &Tensor, beta: &Tensor, gamma: &Tensor) -> Result<(usize, usize)> {
    let (c, h, w) = x.chw("gdn")?;
    if beta.shape() != [c] || gamma.shape() != [c, c] {
        return Err(Error::Shape(format!(
            "gdn over {c} channels got beta {:?}, gamma {:?}",
            beta.shape(),
            gamma.shape()
        )));
    }
    Ok((c, h * w))
}

/// Per-site normalizer `d_i = sqrt(beta_i + sum_j gamma_ij x_j^2)` as `[C, HW]`.
fn gdn_norm(x: &[f64], beta: &[f64], gamma: &[f64], c: usize, sites: usize) -> (Vec<f64>, Vec<f64>) {
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let mut norm = vec![0.0; c * sites];
    gemm(
        Mat::new(gamma, c, c),
        Mat::new(&sq, c, sites),
        &mut norm,
        false,
    );
    for (row, b) in norm.chunks_mut(sites).zip(beta) {
        for v in row {
            *v = (*v + b).sqrt();
        }
    }
    (sq, norm)
}

pub(crate) fn gdn_raw(x: &Tensor, beta: &Tensor, gamma: &Tensor, inverse: bool) -> Result<Tensor> {
    let (c, sites) = check_gdn(x, beta, gamma)?;
    let (_, norm) = gdn_norm(x.data(), beta.data(), gamma.data(), c, sites);
    let out = x
        .data()
        .iter()
        .zip(&norm)
        .map(|(v, d)| if inverse { v * d } else { v / d })
        .collect();
    Tensor::new(x.shape().to_vec(), out)
}

/// GDN (`inverse = false`: `x_i / d_i`) or IGDN (`inverse = true`: `x_i * d_i`)
/// with `d_i = sqrt(beta_i + sum_j gamma_ij * x_j^2)` at every spatial site.
pub fn gdn(x: &Tensor, params: &GdnParams, inverse: bool) -> Result<Tensor> {
    gdn_raw(x, &params.beta, &params.gamma, inverse)
}

/// Gradients of GDN / IGDN w.r.t. (x, beta, gamma).
pub(crate) fn gdn_vjp(
    x: &Tensor,
    beta: &Tensor,
    gamma: &Tensor,
    inverse: bool,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (c, sites) = check_gdn(x, beta, gamma)?;
    grad_out.check_same_shape(x, "gdn upstream gradient")?;
    let (sq, norm) = gdn_norm(x.data(), beta.data(), gamma.data(), c, sites);
    let xs = x.data();
    let gs = grad_out.data();

    // t_i = g_i x_i * d(d_i^{+/-1})/d(d_i^2), the sensitivity to the pooled energy.
    let t: Vec<f64> = (0..xs.len())
        .map(|i| {
            let d = norm[i];
            if inverse {
                gs[i] * xs[i] / (2.0 * d)
            } else {
                -gs[i] * xs[i] / (2.0 * d * d * d)
            }
        })
        .collect();

    let grad_beta: Vec<f64> = t.chunks(sites).map(|row| row.iter().sum()).collect();

    let mut grad_gamma = vec![0.0; c * c];
    gemm(
        Mat::new(&t, c, sites),
        Mat::new(&sq, c, sites).t(),
        &mut grad_gamma,
        false,
    );

    let mut pooled = vec![0.0; c * sites];
    gemm(
        Mat::new(gamma.data(), c, c).t(),
        Mat::new(&t, c, sites),
        &mut pooled,
        false,
    );
    let grad_x = (0..xs.len())
        .map(|i| {
            let local = if inverse { gs[i] * norm[i] } else { gs[i] / norm[i] };
            local + 2.0 * xs[i] * pooled[i]
        })
        .collect();

    Ok((
        Tensor::new(x.shape().to_vec(), grad_x)?,
        Tensor::new(vec![c], grad_beta)?,
        Tensor::new(vec![c, c], grad_gamma)?,
    ))
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

/// Mean of squared differences.
pub fn mse_loss(prediction: &Tensor, target: &Tensor) -> Result<f64> {
    prediction.check_same_shape(target, "mse_loss")?;
    let n = prediction.len() as f64;
    Ok(prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// Gradients of the mean squared error w.r.t. (prediction, target).
pub(crate) fn mse_vjp(prediction: &Tensor, target: &Tensor, upstream: f64) -> Result<(Tensor, Tensor)> {
    prediction.check_same_shape(target, "mse_loss")?;
    let scale = 2.0 * upstream / prediction.len() as f64;
    let gp: Vec<f64> = prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| scale * (p - t))
        .collect();
    let gt = gp.iter().map(|v| -v).collect();
    Ok((
        Tensor::new(prediction.shape().to_vec(), gp)?,
        Tensor::new(target.shape().to_vec(), gt)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones(shape: &[usize]) -> Tensor {
        Tensor::full(shape, 1.0)
    }

    /// Direct six-loop convolution used as an oracle.
    fn naive_conv(x: &Tensor, p: &ConvParams) -> Tensor {
        let (ci, h, w) = x.chw("naive").unwrap();
        let [co, _, k, _] = p.weights.shape()[..] else { unreachable!() };
        let (s, pad) = (p.stride as isize, p.padding as isize);
        let ho = (h + 2 * p.padding - k) / p.stride + 1;
        let wo = (w + 2 * p.padding - k) / p.stride + 1;
        let mut out = vec![0.0; co * ho * wo];
        for o in 0..co {
            for i in 0..ho {
                for j in 0..wo {
                    let mut acc = p.bias.data()[o];
                    for c in 0..ci {
                        for a in 0..k {
                            for b in 0..k {
                                let y = i as isize * s + a as isize - pad;
                                let xx = j as isize * s + b as isize - pad;
                                if y < 0 || xx < 0 || y >= h as isize || xx >= w as isize {
                                    continue;
                                }
                                acc += p.weights.data()[((o * ci + c) * k + a) * k + b]
                                    * x.data()[(c * h + y as usize) * w + xx as usize];
                            }
                        }
                    }
                    out[(o * ho + i) * wo + j] = acc;
                }
            }
        }
        Tensor::new(vec![co, ho, wo], out).unwrap()
    }

    #[test]
    fn conv_output_extent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ConvParams::glorot(5, 1, 9, 4, false, &mut rng);
        let y = conv2d(&Tensor::zeros(&[1, 64, 64]), &p).unwrap();
        assert_eq!(y.shape(), [5, 16, 16]);
    }

    #[test]
    fn zero_weights_give_bias() {
        let p = ConvParams::new(
            Tensor::zeros(&[1, 2, 3, 3]),
            Tensor::new(vec![1], vec![0.7]).unwrap(),
            2,
            1,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = conv2d(&Tensor::uniform(&[2, 9, 7], 1.0, &mut rng), &p).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn ones_kernel_sums_window() {
        let p = ConvParams::new(ones(&[1, 1, 3, 3]), Tensor::zeros(&[1]), 1, 0).unwrap();
        let y = conv2d(&ones(&[1, 3, 3]), &p).unwrap();
        assert_eq!(y.shape(), [1, 1, 1]);
        assert_eq!(y.data(), [9.0]);
    }

    #[test]
    fn conv_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(k, s) in &[(3, 1), (3, 2), (5, 2), (5, 3)] {
            let mut p = ConvParams::glorot(3, 2, k, s, false, &mut rng);
            p.bias = Tensor::uniform(&[3], 1.0, &mut rng);
            let x = Tensor::uniform(&[2, 11, 9], 1.0, &mut rng);
            let fast = conv2d(&x, &p).unwrap();
            let slow = naive_conv(&x, &p);
            assert_eq!(fast.shape(), slow.shape());
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conv_rejects_channel_mismatch() {
        let p = ConvParams::new(ones(&[1, 2, 3, 3]), Tensor::zeros(&[1]), 1, 1).unwrap();
        let err = conv2d(&ones(&[3, 5, 5]), &p).unwrap_err();
        assert!(err.to_string().contains("channels"));
    }

    #[test]
    fn conv_rejects_input_smaller_than_kernel() {
        let p = ConvParams::new(ones(&[1, 1, 5, 5]), Tensor::zeros(&[1]), 1, 0).unwrap();
        assert!(conv2d(&ones(&[1, 4, 4]), &p).is_err());
    }

    #[test]
    fn even_kernel_rejected() {
        assert!(ConvParams::new(ones(&[1, 1, 4, 4]), Tensor::zeros(&[1]), 1, 1).is_err());
    }

    #[test]
    fn transpose_scatters_impulse() {
        let p = ConvParams::new(ones(&[1, 1, 3, 3]), Tensor::zeros(&[1]), 1, 0).unwrap();
        let y = conv2d_transpose(&ones(&[1, 1, 1]), &p).unwrap();
        assert_eq!(y.shape(), [1, 3, 3]);
        assert!(y.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn transpose_restores_extent_with_output_padding() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ConvParams::glorot(1, 6, 9, 4, true, &mut rng).with_output_padding(3);
        let y = conv2d_transpose(&Tensor::zeros(&[6, 16, 16]), &p).unwrap();
        assert_eq!(y.shape(), [1, 64, 64]);
    }

    #[test]
    fn transpose_rejects_non_positive_extent() {
        let mut p = ConvParams::new(ones(&[1, 1, 3, 3]), Tensor::zeros(&[1]), 1, 0).unwrap();
        p.padding = 3;
        assert!(conv2d_transpose(&ones(&[1, 1, 1]), &p).is_err());
    }

    #[test]
    fn gdn_hand_evaluation() {
        let x = Tensor::new(vec![2, 1, 1], vec![3.0, 4.0]).unwrap();
        let mut p = GdnParams::initial(2);
        p.gamma = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let y = gdn(&x, &p, false).unwrap();
        assert!((y.data()[0] - 3.0 / 10f64.sqrt()).abs() < 1e-15);
        assert!((y.data()[1] - 4.0 / 17f64.sqrt()).abs() < 1e-15);
        assert!((y.data()[0] - 0.94868).abs() < 1e-5);
        assert!((y.data()[1] - 0.97014).abs() < 1e-5);
    }

    #[test]
    fn gdn_identity_when_unpooled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Tensor::uniform(&[3, 4, 5], 2.0, &mut rng);
        let mut p = GdnParams::initial(3);
        p.gamma = Tensor::zeros(&[3, 3]);
        assert_eq!(gdn(&x, &p, false).unwrap(), x);

        p.beta = Tensor::new(vec![3], vec![0.3, 2.0, 7.5]).unwrap();
        let round = gdn(&gdn(&x, &p, false).unwrap(), &p, true).unwrap();
        for (a, b) in round.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gdn_params_invariants() {
        assert!(GdnParams::new(Tensor::full(&[2], 1e-7), Tensor::zeros(&[2, 2])).is_err());
        assert!(GdnParams::new(Tensor::full(&[2], 1.0), Tensor::full(&[2, 2], -0.1)).is_err());
        assert!(GdnParams::new(Tensor::full(&[2], 1.0), Tensor::zeros(&[3, 3])).is_err());
        let mut p = GdnParams::initial(2);
        p.beta.data_mut()[0] = -4.0;
        p.gamma.data_mut()[1] = -1.0;
        p.project();
        assert_eq!(p.beta.data()[0], BETA_MIN);
        assert_eq!(p.gamma.data()[1], 0.0);
    }

    #[test]
    fn mse_examples() {
        let t = Tensor::new(vec![2], vec![1.0, 3.0]).unwrap();
        assert_eq!(mse_loss(&t, &t).unwrap(), 0.0);
        let p = t.map(|v| v + 0.5);
        assert_eq!(mse_loss(&p, &t).unwrap(), 0.25);
        let p = Tensor::new(vec![2], vec![0.0, 1.0]).unwrap();
        assert_eq!(mse_loss(&p, &t).unwrap(), 2.5);
        assert!(mse_loss(&p, &Tensor::zeros(&[3])).is_err());
    }
}
