//! Compares reverse-mode gradients of a conv -> GDN -> MSE chain against
//! central finite differences.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use biqa::autodiff::{conv2d, gdn, mse_loss, ConvParams, GdnParams, Tape, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

fn loss(x: &Tensor, conv: &ConvParams, norm: &GdnParams, target: &Tensor) -> f64 {
    let h = conv2d(x, conv).unwrap();
    let y = gdn(&h, norm, false).unwrap();
    mse_loss(&y, target).unwrap()
}

fn main() -> biqa::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Tensor::uniform(&[2, 9, 9], 1.0, &mut rng);
    let conv = ConvParams::new(
        Tensor::uniform(&[3, 2, 3, 3], 0.5, &mut rng),
        Tensor::uniform(&[3], 0.1, &mut rng),
        2,
        1,
    )?;
    let norm = GdnParams::new(Tensor::full(&[3], 1.0), Tensor::full(&[3, 3], 0.1))?;
    let target = Tensor::uniform(&[3, 5, 5], 1.0, &mut rng);

    let mut tape = Tape::new();
    let input = tape.leaf(x.clone());
    let layer = tape.conv_params(&conv);
    let norm_vars = tape.gdn_params(&norm);
    let goal = tape.leaf(target.clone());
    let h = tape.conv2d(input, layer)?;
    let y = tape.gdn(h, norm_vars, false)?;
    let l = tape.mse(y, goal)?;
    let grads = tape.backward(l)?;
    let analytic = grads.get(layer.weights).expect("weights receive a gradient");

    let mut worst: f64 = 0.0;
    for i in 0..conv.weights.len() {
        let mut plus = conv.clone();
        plus.weights.data_mut()[i] += STEP;
        let mut minus = conv.clone();
        minus.weights.data_mut()[i] -= STEP;
        let numeric = (loss(&x, &plus, &norm, &target) - loss(&x, &minus, &norm, &target)) / (2.0 * STEP);
        let a = analytic.data()[i];
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
    }
    println!("loss {:.6}", tape.value(l).item().unwrap_or(f64::NAN));
    println!("{} weight gradients, worst relative error {worst:.2e}", conv.weights.len());
    Ok(())
}
