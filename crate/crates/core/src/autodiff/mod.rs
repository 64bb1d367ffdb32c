//! Tensors and reverse-mode differentiation for the autoencoder.
//!
//! Only the operations the feature extractor needs are provided: strided
//! convolution and its transpose, GDN / IGDN, mean squared error, and Adam.
//! All arithmetic is `f64` and single-threaded inside an operation, so the
//! same inputs always produce bit-identical outputs.

mod adam;
pub(crate) mod linalg;
mod ops;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState, Constraint};
pub use ops::{
    conv2d, conv2d_transpose, gdn, mse_loss, ConvGeometry, ConvParams, GdnParams, BETA_MIN,
};
pub use tape::{ConvVars, GdnVars, Gradients, Tape, Var};
pub use tensor::Tensor;
