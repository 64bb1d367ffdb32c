//! Trained-network files.
//!
//! Layout (all integers `u64` and reals `f64`, little-endian, unless noted):
//!
//! ```text
//! "BIQCKPT1"
//! channels, kernel_sizes[3], analysis_strides[3], synthesis_strides[3]
//! patch_size, batch_size, epochs, patches_per_image, seed
//! lr, beta1, beta2, epsilon
//! epochs_completed, final_loss, loss_count, epoch_losses[loss_count]
//! tensor_count
//! per tensor: rank (u32), extents[rank], values (f32)
//! ```
//!
//! Tensors follow [`Autoencoder::params`] order.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::{NetworkConfig, ANALYSIS_STRIDES, SYNTHESIS_STRIDES};
use super::network::Autoencoder;
use crate::autodiff::{AdamConfig, GdnParams, Tensor};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::image::write_atomic;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"BIQCKPT1";

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrainingMetadata {
    pub epochs_completed: usize,
    /// Mean reconstruction loss of the last epoch.
    pub final_loss: f64,
    /// Mean reconstruction loss of every epoch, in order.
    pub epoch_losses: Vec<f64>,
}

/// Network configuration, parameters and training record.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: NetworkConfig,
    pub network: Autoencoder,
    pub metadata: TrainingMetadata,
}

/// SHA-256 of a serialized checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub [u8; 32]);

impl std::fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl Checkpoint {
    pub fn analysis_transform(&self, patch: &Tensor) -> Result<Tensor> {
        self.network.analysis_transform(patch, self.config.patch_size)
    }

    pub fn synthesis_transform(&self, latent: &Tensor) -> Result<Tensor> {
        self.network.synthesis_transform(latent, self.config.patch_size)
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint(Sha256::digest(self.to_bytes()).into())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let c = &self.config;
        let mut w = Writer::new(CHECKPOINT_MAGIC);
        w.usize(c.channels);
        for k in c.kernel_sizes {
            w.usize(k);
        }
        for s in ANALYSIS_STRIDES.iter().chain(&SYNTHESIS_STRIDES) {
            w.usize(*s);
        }
        w.usize(c.patch_size);
        w.usize(c.batch_size);
        w.usize(c.epochs);
        w.usize(c.patches_per_image);
        w.u64(c.seed);
        w.f64(c.adam.lr);
        w.f64(c.adam.beta1);
        w.f64(c.adam.beta2);
        w.f64(c.adam.epsilon);

        let m = &self.metadata;
        w.usize(m.epochs_completed);
        w.f64(m.final_loss);
        w.usize(m.epoch_losses.len());
        for &l in &m.epoch_losses {
            w.f64(l);
        }

        let params = self.network.params();
        w.usize(params.len());
        for t in params {
            w.u32(t.rank() as u32);
            for &d in t.shape() {
                w.usize(d);
            }
            for &v in t.data() {
                w.f32(v as f32);
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new("checkpoint", bytes, CHECKPOINT_MAGIC)?;
        let channels = r.usize()?;
        let kernel_sizes = [r.usize()?, r.usize()?, r.usize()?];
        let strides = [r.usize()?, r.usize()?, r.usize()?];
        let up = [r.usize()?, r.usize()?, r.usize()?];
        if strides != ANALYSIS_STRIDES || up != SYNTHESIS_STRIDES {
            return Err(r.error(format!("unsupported strides {strides:?} / {up:?}")));
        }
        let patch_size = r.usize()?;
        let batch_size = r.usize()?;
        let epochs = r.usize()?;
        let patches_per_image = r.usize()?;
        let seed = r.u64()?;
        let adam = AdamConfig {
            lr: r.f64()?,
            beta1: r.f64()?,
            beta2: r.f64()?,
            epsilon: r.f64()?,
        };
        let config = NetworkConfig {
            channels,
            kernel_sizes,
            patch_size,
            batch_size,
            epochs,
            patches_per_image,
            adam,
            seed,
        };
        config
            .validate()
            .map_err(|e| r.error(format!("invalid config: {e}")))?;

        let epochs_completed = r.usize()?;
        let final_loss = r.f64()?;
        let n_losses = r.usize()?;
        r.check_remaining(n_losses, 8)?;
        let epoch_losses = (0..n_losses).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;

        // The expected shapes come from a freshly initialized network.
        let mut network = Autoencoder::init(&config, &mut ChaCha8Rng::seed_from_u64(0));
        let count = r.usize()?;
        let mut slots = network.params_mut();
        if count != slots.len() {
            return Err(r.error(format!(
                "expected {} tensors, found {count}",
                slots.len()
            )));
        }
        for (slot, _) in slots.iter_mut() {
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
            if shape != slot.shape() {
                return Err(r.error(format!(
                    "tensor shape {shape:?}, expected {:?}",
                    slot.shape()
                )));
            }
            for v in slot.data_mut() {
                *v = r.f32()? as f64;
            }
        }
        drop(slots);
        r.expect_end()?;
        for g in network
            .analysis_gdn
            .iter()
            .chain(&network.synthesis_igdn)
        {
            GdnParams::new(g.beta.clone(), g.gamma.clone())
                .map_err(|e| Error::format("checkpoint", e.to_string()))?;
        }
        Ok(Checkpoint {
            config,
            network,
            metadata: TrainingMetadata {
                epochs_completed,
                final_loss,
                epoch_losses,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let config = NetworkConfig {
            channels: 3,
            patch_size: 32,
            ..NetworkConfig::default()
        };
        let network = Autoencoder::init(&config, &mut ChaCha8Rng::seed_from_u64(1));
        Checkpoint {
            config,
            network,
            metadata: TrainingMetadata {
                epochs_completed: 2,
                final_loss: 0.125,
                epoch_losses: vec![0.5, 0.125],
            },
        }
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..8], b"BIQCKPT1");
        let loaded = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(loaded.to_bytes(), bytes);
        assert_eq!(loaded.metadata, sample().metadata);
    }

    #[test]
    fn rounded_network_survives_exactly() {
        let mut ck = sample();
        ck.network.round_to_f32();
        assert_eq!(Checkpoint::from_bytes(&ck.to_bytes()).unwrap(), ck);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = sample();
        let mut b = sample();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.network.analysis[0].bias.data_mut()[0] = 0.5;
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().to_string().len(), 64);
    }

    #[test]
    fn corrupt_files_rejected() {
        let bytes = sample().to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(Checkpoint::from_bytes(b"BIQNMDL1xxxxxxxx").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Checkpoint::from_bytes(&extra).is_err());
    }
}
