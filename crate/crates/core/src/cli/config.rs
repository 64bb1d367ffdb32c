//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; unknown keys are errors. Every
//! key has a default, so an empty file is valid.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::autoencoder::NetworkConfig;
use crate::distortions::DistortionSchedule;
use crate::error::{Error, Result};
use crate::natural_model::ModelParams;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub model: ModelParams,
    pub schedule: DistortionSchedule,
    pub distort_seed: u64,
}

pub const KEYS: [&str; 22] = [
    "channels",
    "kernel_sizes",
    "patch_size",
    "batch_size",
    "epochs",
    "patches_per_image",
    "lr",
    "beta1",
    "beta2",
    "epsilon",
    "seed",
    "bandwidth_factor",
    "bandwidth_floor",
    "kde_cap",
    "kde_seed",
    "grid_points",
    "grid_floor",
    "patch_stride",
    "blur_sigma",
    "noise_sigma",
    "compression_step",
    "distort_seed",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            config
                .set_pair(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Applies one `key=value` assignment.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let n = &mut self.network;
        let m = &mut self.model;
        let s = &mut self.schedule;
        match key {
            "channels" => n.channels = parse(key, value)?,
            "kernel_sizes" => {
                let parts = value
                    .split(',')
                    .map(|p| parse::<usize>(key, p.trim()))
                    .collect::<Result<Vec<_>>>()?;
                n.kernel_sizes = parts
                    .try_into()
                    .map_err(|_| Error::Config(format!("`{key}` needs three sizes, got `{value}`")))?;
            }
            "patch_size" => n.patch_size = parse(key, value)?,
            "batch_size" => n.batch_size = parse(key, value)?,
            "epochs" => n.epochs = parse(key, value)?,
            "patches_per_image" => n.patches_per_image = parse(key, value)?,
            "lr" => n.adam.lr = parse(key, value)?,
            "beta1" => n.adam.beta1 = parse(key, value)?,
            "beta2" => n.adam.beta2 = parse(key, value)?,
            "epsilon" => n.adam.epsilon = parse(key, value)?,
            "seed" => n.seed = parse(key, value)?,
            "bandwidth_factor" => m.bandwidth.factor = parse(key, value)?,
            "bandwidth_floor" => m.bandwidth.floor = parse(key, value)?,
            "kde_cap" => m.cap = parse(key, value)?,
            "kde_seed" => m.seed = parse(key, value)?,
            "grid_points" => m.grid.points = parse(key, value)?,
            "grid_floor" => m.grid.floor = parse(key, value)?,
            "patch_stride" => {
                let v: usize = parse(key, value)?;
                m.patch_stride = (v > 0).then_some(v);
            }
            "blur_sigma" => s.blur_sigma = parse(key, value)?,
            "noise_sigma" => s.noise_sigma = parse(key, value)?,
            "compression_step" => s.compression_step = parse(key, value)?,
            "distort_seed" => self.distort_seed = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.model.validate()?;
        self.schedule.validate()
    }

    /// Every key in [`KEYS`] order; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let n = &self.network;
        let m = &self.model;
        let s = &self.schedule;
        let k = n.kernel_sizes;
        let values: [String; 22] = [
            n.channels.to_string(),
            format!("{},{},{}", k[0], k[1], k[2]),
            n.patch_size.to_string(),
            n.batch_size.to_string(),
            n.epochs.to_string(),
            n.patches_per_image.to_string(),
            n.adam.lr.to_string(),
            n.adam.beta1.to_string(),
            n.adam.beta2.to_string(),
            n.adam.epsilon.to_string(),
            n.seed.to_string(),
            m.bandwidth.factor.to_string(),
            m.bandwidth.floor.to_string(),
            m.cap.to_string(),
            m.seed.to_string(),
            m.grid.points.to_string(),
            m.grid.floor.to_string(),
            m.patch_stride.unwrap_or(0).to_string(),
            s.blur_sigma.to_string(),
            s.noise_sigma.to_string(),
            s.compression_step.to_string(),
            self.distort_seed.to_string(),
        ];
        let mut out = String::new();
        for (key, value) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// Single-line `key=value` echo for artifact headers.
    pub fn summary(&self) -> String {
        self.to_text()
            .lines()
            .map(|l| l.replace(" = ", "="))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
