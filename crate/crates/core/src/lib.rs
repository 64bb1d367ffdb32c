pub mod autodiff;
pub mod autoencoder;
mod binio;
pub mod cli;
pub mod distortions;
pub mod error;
pub mod image;
pub mod metrics;
pub mod natural_model;

pub use error::{Error, Result};
