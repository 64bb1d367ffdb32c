mod common;

use biqa::autodiff::{conv2d, conv2d_transpose, ConvParams, Tensor};
use common::*;

const TRIALS: u64 = 25;
const TOLERANCE: f64 = 1e-4;

#[test]
fn conv2d_gradients_match_finite_differences() {
    for seed in 0..TRIALS {
        let err = check_conv(false, &mut rng(seed));
        assert!(err < TOLERANCE, "trial {seed}: relative error {err:e}");
    }
}

#[test]
fn conv2d_transpose_gradients_match_finite_differences() {
    for seed in 0..TRIALS {
        let err = check_conv(true, &mut rng(100 + seed));
        assert!(err < TOLERANCE, "trial {seed}: relative error {err:e}");
    }
}

#[test]
fn gdn_gradients_match_finite_differences() {
    for seed in 0..TRIALS {
        let fwd = check_gdn(false, &mut rng(200 + seed));
        let inv = check_gdn(true, &mut rng(300 + seed));
        assert!(fwd < TOLERANCE && inv < TOLERANCE, "trial {seed}: {fwd:e} / {inv:e}");
    }
}

#[test]
fn mse_gradients_match_finite_differences() {
    for seed in 0..TRIALS {
        let err = check_mse(&mut rng(400 + seed));
        assert!(err < TOLERANCE, "trial {seed}: relative error {err:e}");
    }
}

#[test]
fn conv2d_matches_direct_summation() {
    for seed in 0..20 {
        let mut r = rng(500 + seed);
        let case = conv_case(false, &mut r);
        let g = case.geometry;
        let p = ConvParams::new(case.w.clone(), case.b.clone(), g.stride, g.padding).unwrap();
        let fast = conv2d(&case.x, &p).unwrap();
        let slow = naive_conv2d(&case.x, &case.w, &case.b, g.stride, g.padding);
        assert_eq!(fast.shape(), slow.shape());
        for (a, b) in fast.data().iter().zip(slow.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn transpose_is_adjoint_of_convolution() {
    let mut checked = 0;
    for seed in 0..60 {
        let mut r = rng(600 + seed);
        let case = conv_case(false, &mut r);
        let g = case.geometry;
        let (c_out, c_in) = (case.w.shape()[0], case.w.shape()[1]);
        let zero_out = Tensor::zeros(&[c_out]);
        let zero_in = Tensor::zeros(&[c_in]);
        let fwd = ConvParams::new(case.w.clone(), zero_out, g.stride, g.padding).unwrap();
        let y = random_tensor(&case.target_shape, -1.0, 1.0, &mut r);

        // Choose output padding so the transposed output matches x exactly.
        let (h, w) = (case.x.shape()[1], case.x.shape()[2]);
        let k = case.w.shape()[2];
        let base = (case.target_shape[1] - 1) * g.stride + k - 2 * g.padding;
        let op = h - base;
        // One output padding serves both axes; skip shapes that need two.
        if w - ((case.target_shape[2] - 1) * g.stride + k - 2 * g.padding) != op {
            continue;
        }
        let weights_t = Tensor::new(vec![c_out, c_in, k, k], case.w.data().to_vec()).unwrap();
        let adj = ConvParams::new(weights_t, zero_in, g.stride, g.padding)
            .unwrap()
            .with_output_padding(op);

        let lhs = conv2d(&case.x, &fwd).unwrap().dot(&y).unwrap();
        let rhs = case.x.dot(&conv2d_transpose(&y, &adj).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "trial {seed}: {lhs} vs {rhs}");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} usable shapes");
}
