//! Natural-model construction, scoring and files.
//!
//! Layout (little-endian):
//!
//! ```text
//! "BIQNMDL1"
//! fingerprint (32 bytes), channel_count (u64)
//! per channel: n (u64), h (f64), observations[n] (f64, ascending)
//! bandwidth_factor, bandwidth_floor (f64), cap, seed (u64)
//! grid_points (u64), grid_floor (f64), patch_stride (u64)
//! ```

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::divergence::{kl_divergence, GridSpec};
use super::kde::{Bandwidth, BandwidthRule, ChannelKde};
use crate::autoencoder::{derive_seed, extract_patches, Checkpoint, Fingerprint, PatchMode};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::image::{write_atomic, Image};

pub const MODEL_MAGIC: &[u8; 8] = b"BIQNMDL1";

/// Construction parameters, stored with the model so scoring reuses them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub bandwidth: BandwidthRule,
    /// Maximum observations kept per channel.
    pub cap: usize,
    /// Seed of the per-channel subsampling draw.
    pub seed: u64,
    pub grid: GridSpec,
    /// Grid stride for patch extraction; `None` means half the patch size.
    pub patch_stride: Option<usize>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            bandwidth: BandwidthRule::default(),
            cap: 5000,
            seed: 0,
            grid: GridSpec::default(),
            patch_stride: None,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.cap < 2 {
            return Err(Error::InvalidArgument(format!(
                "observation cap must be at least 2, got {}",
                self.cap
            )));
        }
        if !(self.bandwidth.factor > 0.0 && self.bandwidth.factor.is_finite())
            || !(self.bandwidth.floor >= 0.0 && self.bandwidth.floor.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "invalid bandwidth rule {:?}",
                self.bandwidth
            )));
        }
        if self.patch_stride == Some(0) {
            return Err(Error::InvalidArgument("patch stride must be positive".into()));
        }
        Ok(())
    }

    pub fn stride_for(&self, patch_size: usize) -> usize {
        self.patch_stride.unwrap_or((patch_size / 2).max(1))
    }
}

/// Per-channel density estimates of pristine bottleneck activations.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalModel {
    pub fingerprint: Fingerprint,
    pub channels: Vec<ChannelKde>,
    pub params: ModelParams,
}

/// Higher means further from the natural model.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityScore {
    /// Mean of `per_channel`.
    pub value: f64,
    pub per_channel: Vec<f64>,
}

/// Bottleneck activations of every grid patch of `image`, pooled per channel.
///
/// Values are ordered by patch (row-major offsets), then spatial site.
pub fn channel_features(
    checkpoint: &Checkpoint,
    image: &Image,
    id: &str,
    stride: usize,
) -> Result<Vec<Vec<f64>>> {
    let size = checkpoint.config.patch_size;
    let set = extract_patches(image, id, size, PatchMode::Grid { stride }, 0)?;
    let latents = set
        .patches
        .par_iter()
        .map(|p| checkpoint.analysis_transform(p))
        .collect::<Result<Vec<_>>>()?;
    let c = checkpoint.network.channels();
    let mut pooled = vec![Vec::new(); c];
    for z in &latents {
        let sites = z.len() / c;
        for (ch, values) in z.data().chunks(sites).enumerate() {
            pooled[ch].extend_from_slice(values);
        }
    }
    Ok(pooled)
}

/// Fits one density per bottleneck channel to the pristine `images`.
pub fn build_natural_model(
    checkpoint: &Checkpoint,
    images: &[(String, Image)],
    params: &ModelParams,
) -> Result<NaturalModel> {
    params.validate()?;
    if images.is_empty() {
        return Err(Error::NoUsableImages("the pristine image set".into()));
    }
    let stride = params.stride_for(checkpoint.config.patch_size);
    let mut pooled = vec![Vec::new(); checkpoint.network.channels()];
    for (id, img) in images {
        for (acc, values) in pooled.iter_mut().zip(channel_features(checkpoint, img, id, stride)?) {
            acc.extend(values);
        }
    }
    let rule = Bandwidth::Rule(params.bandwidth);
    let channels = pooled
        .into_par_iter()
        .enumerate()
        .map(|(ch, obs)| {
            let obs = subsample(obs, params.cap, derive_seed(params.seed, ch));
            ChannelKde::fit(&obs, rule)
                .map_err(|e| Error::InvalidArgument(format!("channel {ch}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NaturalModel {
        fingerprint: checkpoint.fingerprint(),
        channels,
        params: *params,
    })
}

/// Uniform draw of `cap` values without replacement, in original order.
fn subsample(values: Vec<f64>, cap: usize, seed: u64) -> Vec<f64> {
    if values.len() <= cap {
        return values;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, values.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| values[i]).collect()
}

/// Scores `image` against `model`; see [`Scorer`] for repeated use.
pub fn score_image(model: &NaturalModel, checkpoint: &Checkpoint, image: &Image) -> Result<QualityScore> {
    Scorer::new(model, checkpoint)?.score(image, "query")
}

/// A model paired with the checkpoint it was built from.
pub struct Scorer<'a> {
    model: &'a NaturalModel,
    checkpoint: &'a Checkpoint,
}

impl<'a> Scorer<'a> {
    /// Rejects a checkpoint whose fingerprint differs from the model's.
    pub fn new(model: &'a NaturalModel, checkpoint: &'a Checkpoint) -> Result<Self> {
        let actual = checkpoint.fingerprint();
        if actual != model.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: model.fingerprint.to_string(),
                actual: actual.to_string(),
            });
        }
        if model.channels.len() != checkpoint.network.channels() {
            return Err(Error::format(
                "natural model",
                format!(
                    "{} channels but the checkpoint has {}",
                    model.channels.len(),
                    checkpoint.network.channels()
                ),
            ));
        }
        Ok(Scorer { model, checkpoint })
    }

    /// Mean over channels of `D(query || natural)`.
    pub fn score(&self, image: &Image, id: &str) -> Result<QualityScore> {
        let params = &self.model.params;
        let stride = params.stride_for(self.checkpoint.config.patch_size);
        let features = channel_features(self.checkpoint, image, id, stride)?;
        let rule = Bandwidth::Rule(params.bandwidth);
        let per_channel = features
            .into_par_iter()
            .zip(self.model.channels.par_iter())
            .map(|(obs, natural)| kl_divergence(&ChannelKde::fit(&obs, rule)?, natural, &params.grid))
            .collect::<Result<Vec<_>>>()?;
        let value = per_channel.iter().sum::<f64>() / per_channel.len() as f64;
        Ok(QualityScore { value, per_channel })
    }
}

impl NaturalModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(MODEL_MAGIC);
        w.bytes(&self.fingerprint.0);
        w.usize(self.channels.len());
        for kde in &self.channels {
            w.usize(kde.len());
            w.f64(kde.bandwidth());
            for &v in kde.observations() {
                w.f64(v);
            }
        }
        let p = &self.params;
        w.f64(p.bandwidth.factor);
        w.f64(p.bandwidth.floor);
        w.usize(p.cap);
        w.u64(p.seed);
        w.usize(p.grid.points);
        w.f64(p.grid.floor);
        w.usize(p.patch_stride.unwrap_or(0));
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new("natural model", bytes, MODEL_MAGIC)?;
        let fingerprint = Fingerprint(r.take(32)?.try_into().expect("32 bytes"));
        let count = r.usize()?;
        if count == 0 {
            return Err(r.error("no channels"));
        }
        r.check_remaining(count, 16)?;
        let mut channels = Vec::with_capacity(count);
        for ch in 0..count {
            let n = r.usize()?;
            let h = r.f64()?;
            r.check_remaining(n, 8)?;
            let obs = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            if obs.windows(2).any(|w| !(w[0] <= w[1])) {
                return Err(r.error(format!("channel {ch} observations are not sorted")));
            }
            channels.push(
                ChannelKde::from_parts(obs, h).map_err(|e| r.error(format!("channel {ch}: {e}")))?,
            );
        }
        let bandwidth = BandwidthRule {
            factor: r.f64()?,
            floor: r.f64()?,
        };
        let cap = r.usize()?;
        let seed = r.u64()?;
        let grid = GridSpec {
            points: r.usize()?,
            floor: r.f64()?,
        };
        let stride = r.usize()?;
        r.expect_end()?;
        let params = ModelParams {
            bandwidth,
            cap,
            seed,
            grid,
            patch_stride: (stride > 0).then_some(stride),
        };
        params
            .validate()
            .map_err(|e| r.error(format!("invalid parameters: {e}")))?;
        Ok(NaturalModel {
            fingerprint,
            channels,
            params,
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
