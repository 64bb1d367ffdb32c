//! Per-channel kernel density model of pristine bottleneck features and the
//! divergence score derived from it.

mod divergence;
mod kde;
mod model;

pub use divergence::{discrete_kl, kl_divergence, GridSpec};
pub use kde::{epanechnikov_kernel, Bandwidth, BandwidthRule, ChannelKde};
pub use model::{
    build_natural_model, channel_features, score_image, ModelParams, NaturalModel, QualityScore,
    Scorer, MODEL_MAGIC,
};
