//! Synthetic degradations of pristine images and the benchmark corpus built
//! from them.
//!
//! Each family has five severity levels; level 0 returns the input
//! unchanged. The compression family is an 8x8 block-DCT quantization proxy
//! rather than a wavelet codec.

mod filters;
mod manifest;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;

pub use filters::{
    blur_with_sigma, dct8, gaussian_kernel, idct8, noise_with_sigma, quantize_blocks,
};
pub use manifest::{Family, Manifest, ManifestRow, MANIFEST_HEADER};

pub const MAX_LEVEL: u8 = 5;

/// Per-level strength of each family; parameters scale linearly with level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionSchedule {
    /// Blur standard deviation in pixels per level.
    pub blur_sigma: f64,
    /// Noise standard deviation on the `[0, 1]` scale per level.
    pub noise_sigma: f64,
    /// AC quantization step per level; the DC step is a quarter of it.
    pub compression_step: f64,
}

impl Default for DistortionSchedule {
    fn default() -> Self {
        DistortionSchedule {
            blur_sigma: 0.5,
            noise_sigma: 0.02,
            compression_step: 0.03,
        }
    }
}

impl DistortionSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("blur_sigma", self.blur_sigma),
            ("noise_sigma", self.noise_sigma),
            ("compression_step", self.compression_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Applies `family` at `level`; `seed` only affects noise.
    pub fn apply(&self, image: &Image, family: Family, level: u8, seed: u64) -> Result<Image> {
        check_level(level)?;
        let l = level as f64;
        match family {
            _ if level == 0 => Ok(image.clone()),
            Family::Pristine => Err(Error::InvalidArgument(format!(
                "pristine has no level {level}"
            ))),
            Family::Blur => Ok(blur_with_sigma(image, self.blur_sigma * l)),
            Family::Awgn => noise_with_sigma(image, self.noise_sigma * l, seed),
            Family::Compression => {
                let step = self.compression_step * l;
                Ok(quantize_blocks(image, step, step / 4.0))
            }
        }
    }

    fn describe(&self) -> String {
        format!(
            "blur_sigma={}*level noise_sigma={}*level compression_step={}*level",
            self.blur_sigma, self.noise_sigma, self.compression_step
        )
    }
}

fn check_level(level: u8) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "distortion level {level} outside 0..={MAX_LEVEL}"
        )));
    }
    Ok(())
}

/// Gaussian blur with `sigma = 0.5 * level`.
pub fn gaussian_blur(image: &Image, level: u8) -> Result<Image> {
    DistortionSchedule::default().apply(image, Family::Blur, level, 0)
}

/// Additive white Gaussian noise with `sigma = 0.02 * level`.
pub fn awgn(image: &Image, level: u8, seed: u64) -> Result<Image> {
    DistortionSchedule::default().apply(image, Family::Awgn, level, seed)
}

/// Block-DCT quantization with AC step `0.03 * level`.
pub fn compression_artifacts(image: &Image, level: u8) -> Result<Image> {
    DistortionSchedule::default().apply(image, Family::Compression, level, 0)
}

/// File name of one benchmark variant.
pub fn variant_file_name(image_id: &str, family: Family, level: u8) -> String {
    format!("{image_id}_{family}_{level}.png")
}

/// Writes the pristine copy and every distorted variant of each image into
/// `out_dir` as 16-bit PNGs and returns the manifest (also saved as
/// `manifest.csv`). Image `i` uses noise seed `seed ^ i`.
pub fn generate_benchmark(
    images: &[(String, Image)],
    out_dir: impl AsRef<Path>,
    seed: u64,
    schedule: &DistortionSchedule,
) -> Result<Manifest> {
    schedule.validate()?;
    if images.is_empty() {
        return Err(Error::NoUsableImages("the benchmark source set".into()));
    }
    let mut seen = HashSet::new();
    if let Some((dup, _)) = images.iter().find(|(id, _)| !seen.insert(id.as_str())) {
        return Err(Error::InvalidArgument(format!("duplicate image id `{dup}`")));
    }
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let per_image = images
        .par_iter()
        .enumerate()
        .map(|(i, (id, img))| {
            let image_seed = seed ^ i as u64;
            let mut variants = vec![(Family::Pristine, 0u8)];
            for family in Family::DISTORTIONS {
                variants.extend((1..=MAX_LEVEL).map(|l| (family, l)));
            }
            variants
                .into_iter()
                .map(|(family, level)| {
                    let out = match family {
                        Family::Pristine => img.clone(),
                        f => schedule.apply(img, f, level, image_seed)?,
                    };
                    let path = out_dir.join(variant_file_name(id, family, level));
                    out.save_png(&path)?;
                    Ok(ManifestRow {
                        image_id: id.clone(),
                        family,
                        level,
                        path,
                        score: None,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        comments: vec![
            "compression rows use an 8x8 block-DCT quantization proxy, not a wavelet codec".into(),
            format!("{} seed={seed}", schedule.describe()),
        ],
        rows: per_image.into_iter().flatten().collect(),
    };
    manifest.save(out_dir.join("manifest.csv"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured() -> Image {
        Image::from_fn(40, 36, |x, y| {
            0.5 + 0.3 * ((x as f64 * 0.7).sin() * (y as f64 * 0.45).cos())
                + 0.1 * (((x * 13 + y * 7) % 5) as f64 / 4.0 - 0.5)
        })
    }

    #[test]
    fn level_zero_is_identity() {
        let img = textured();
        for family in Family::DISTORTIONS {
            assert_eq!(DistortionSchedule::default().apply(&img, family, 0, 1).unwrap(), img);
        }
    }

    #[test]
    fn levels_out_of_range_rejected() {
        assert!(gaussian_blur(&textured(), 6).is_err());
        assert!(DistortionSchedule::default()
            .apply(&textured(), Family::Pristine, 1, 0)
            .is_err());
    }

    #[test]
    fn noise_standard_deviation() {
        let img = Image::constant(256, 256, 0.5);
        let out = awgn(&img, 5, 11).unwrap();
        let diffs: Vec<f64> = out.pixels().iter().map(|v| v - 0.5).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
        assert!((0.095..0.105).contains(&var.sqrt()));
    }

    #[test]
    fn error_grows_with_level() {
        let img = textured();
        for family in Family::DISTORTIONS {
            let errs: Vec<f64> = (0..=MAX_LEVEL)
                .map(|l| {
                    DistortionSchedule::default()
                        .apply(&img, family, l, 2)
                        .unwrap()
                        .mse(&img)
                        .unwrap()
                })
                .collect();
            assert!(errs.windows(2).all(|w| w[0] <= w[1]), "{family}: {errs:?}");
            assert!(errs[5] > errs[1], "{family}: {errs:?}");
        }
    }

    #[test]
    fn benchmark_layout() {
        let dir = tempfile::tempdir().unwrap();
        let imgs = vec![("p".to_string(), textured()), ("q".to_string(), textured())];
        let m = generate_benchmark(&imgs, dir.path(), 7, &DistortionSchedule::default()).unwrap();
        assert_eq!(m.rows.len(), 32);
        assert!(m.rows.iter().all(|r| r.path.is_file()));
        assert_eq!(m.rows[0].family, Family::Pristine);
        assert_eq!(m.rows[17].path, dir.path().join("q_blur_1.png"));
        assert_eq!(Manifest::load(dir.path().join("manifest.csv")).unwrap(), m);

        let dup = vec![("p".to_string(), textured()), ("p".to_string(), textured())];
        assert!(generate_benchmark(&dup, dir.path(), 7, &DistortionSchedule::default()).is_err());
    }
}
