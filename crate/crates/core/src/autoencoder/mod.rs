//! Convolutional autoencoder used as the feature extractor.
//!
//! Trained without labels to reconstruct random patches of pristine images;
//! only the analysis (encoder) half is used for scoring.

mod checkpoint;
mod config;
mod network;
mod patches;
mod train;

pub use checkpoint::{Checkpoint, Fingerprint, TrainingMetadata, CHECKPOINT_MAGIC};
pub use config::{NetworkConfig, ANALYSIS_STRIDES, DOWNSAMPLING, SYNTHESIS_STRIDES};
pub use network::Autoencoder;
pub use patches::{extract_patches, grid_offsets, PatchMode, PatchSet};
pub use train::{
    mean_predictor_mse, reconstruction_mse, train, train_with_progress, training_patches,
    EpochReport,
};
pub(crate) use train::derive_seed;
