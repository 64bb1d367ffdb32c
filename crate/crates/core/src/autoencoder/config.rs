use crate::autodiff::AdamConfig;
use crate::error::{Error, Result};

/// Downsampling factors of the three analysis layers.
pub const ANALYSIS_STRIDES: [usize; 3] = [4, 2, 2];
/// Upsampling factors of the three synthesis layers.
pub const SYNTHESIS_STRIDES: [usize; 3] = [2, 2, 4];
/// Total spatial reduction between a patch and its latent.
pub const DOWNSAMPLING: usize = 16;

/// Architecture and training hyperparameters of the feature extractor.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    /// Width of every hidden layer and of the bottleneck.
    pub channels: usize,
    /// Analysis kernel sizes; the synthesis transform mirrors them.
    pub kernel_sizes: [usize; 3],
    pub patch_size: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// Random patches drawn from each training image.
    pub patches_per_image: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            channels: 32,
            kernel_sizes: [9, 5, 5],
            patch_size: 64,
            batch_size: 32,
            epochs: 30,
            patches_per_image: 200,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.channels == 0 {
            return bad("channels must be positive".into());
        }
        if self.patch_size == 0 || !self.patch_size.is_multiple_of(DOWNSAMPLING) {
            return bad(format!(
                "patch_size must be a positive multiple of {DOWNSAMPLING}, got {}",
                self.patch_size
            ));
        }
        if let Some(k) = self.kernel_sizes.iter().find(|&&k| k % 2 == 0) {
            return bad(format!("kernel sizes must be odd, got {k}"));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.patches_per_image == 0 {
            return bad("patches_per_image must be positive".into());
        }
        let a = &self.adam;
        if !(a.lr > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.epsilon > 0.0) {
            return bad(format!("invalid optimizer settings {a:?}"));
        }
        Ok(())
    }

    /// Synthesis kernel sizes, the analysis ones in reverse.
    pub fn synthesis_kernels(&self) -> [usize; 3] {
        let [a, b, c] = self.kernel_sizes;
        [c, b, a]
    }

    pub fn latent_size(&self) -> usize {
        self.patch_size / DOWNSAMPLING
    }
}
