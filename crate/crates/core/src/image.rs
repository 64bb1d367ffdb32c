//! Single-plane luma rasters and their file formats.
//!
//! Reads PNG (8/16-bit gray or color) and binary PGM/PPM; color is reduced
//! to luma with `Y = 0.299 R + 0.587 G + 0.114 B`. Writes 16-bit gray PNG.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageEncoder};

use crate::error::{Error, Result};

const SUPPORTED: [&str; 4] = ["png", "pgm", "ppm", "pnm"];

/// Luma plane with values in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Shape(format!(
                "image {width}x{height} with {} samples",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "pixel value {bad} outside [0, 1]"
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    /// Builds an image from `f(x, y)`, clipping into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(clip(f(x, y)));
            }
        }
        Image {
            width,
            height,
            data,
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub(crate) fn from_clipped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        for v in &mut data {
            *v = clip(*v);
        }
        Image {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image> {
        if x0 + width > self.width || y0 + height > self.height || width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + width]);
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Mean squared difference to another image of the same size.
    pub fn mse(&self, other: &Image) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Shape(format!(
                "mse between {}x{} and {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / self.data.len() as f64)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let decode_err = |reason: String| Error::Decode {
            path: path.to_path_buf(),
            reason,
        };
        let decoded = image::ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?
            .decode()
            .map_err(|e| decode_err(e.to_string()))?;
        Ok(luma_of(decoded))
    }

    /// Encodes as a 16-bit grayscale PNG.
    pub fn to_png16(&self) -> Result<Vec<u8>> {
        let mut bytes = Vec::with_capacity(self.data.len() * 2);
        for &v in &self.data {
            let q = (v * 65535.0).round() as u16;
            // The encoder takes native-endian samples and writes them big-endian.
            bytes.extend_from_slice(&q.to_ne_bytes());
        }
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(
                &bytes,
                self.width as u32,
                self.height as u32,
                image::ExtendedColorType::L16,
            )
            .map_err(|e| Error::format("png", e.to_string()))?;
        Ok(out)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_png16()?)
    }

    /// Value after a 16-bit PNG round trip.
    pub fn quantized16(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|v| (v * 65535.0).round() / 65535.0)
                .collect(),
        }
    }
}

#[inline]
pub(crate) fn clip(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

fn rgb_luma(r: f64, g: f64, b: f64) -> f64 {
    clip(0.299 * r + 0.587 * g + 0.114 * b)
}

fn luma_of(img: DynamicImage) -> Image {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(b) => b.into_raw().iter().map(|&v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(b) => {
            b.into_raw().iter().map(|&v| v as f64 / 65535.0).collect()
        }
        DynamicImage::ImageLumaA8(b) => b
            .into_raw()
            .chunks(2)
            .map(|p| p[0] as f64 / 255.0)
            .collect(),
        DynamicImage::ImageLumaA16(b) => b
            .into_raw()
            .chunks(2)
            .map(|p| p[0] as f64 / 65535.0)
            .collect(),
        DynamicImage::ImageRgb8(b) => rgb_u8(&b.into_raw(), 3),
        DynamicImage::ImageRgba8(b) => rgb_u8(&b.into_raw(), 4),
        DynamicImage::ImageRgb16(b) => rgb_u16(&b.into_raw(), 3),
        DynamicImage::ImageRgba16(b) => rgb_u16(&b.into_raw(), 4),
        other => other
            .to_rgb32f()
            .into_raw()
            .chunks(3)
            .map(|p| rgb_luma(p[0] as f64, p[1] as f64, p[2] as f64))
            .collect(),
    };
    Image::from_clipped(w, h, data)
}

fn rgb_u8(raw: &[u8], stride: usize) -> Vec<f64> {
    raw.chunks(stride)
        .map(|p| rgb_luma(p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0))
        .collect()
}

fn rgb_u16(raw: &[u16], stride: usize) -> Vec<f64> {
    raw.chunks(stride)
        .map(|p| {
            rgb_luma(
                p[0] as f64 / 65535.0,
                p[1] as f64 / 65535.0,
                p[2] as f64 / 65535.0,
            )
        })
        .collect()
}

/// Identifier of an image file: its stem.
pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Supported image files in `dir`, sorted by name.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| SUPPORTED.contains(&e.to_string_lossy().to_ascii_lowercase().as_str()))
                    .unwrap_or(false)
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Loads every supported image in `dir` as `(id, image)` pairs, sorted by name.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, Image)>> {
    list_images(dir)?
        .into_iter()
        .map(|p| Ok((image_id(&p), Image::load(&p)?)))
        .collect()
}

/// Writes `bytes` to a sibling temp file and renames it into place, so a
/// failed write never leaves a partial artifact at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(Image::new(2, 1, vec![0.0, 1.5]).is_err());
        assert!(Image::new(2, 1, vec![0.0]).is_err());
        assert!(Image::new(2, 1, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn png16_round_trip_is_exact_after_quantization() {
        let dir = tempfile::tempdir().unwrap();
        // Values whose 16-bit codes have distinct high and low bytes.
        let img = Image::from_fn(5, 3, |x, y| (x * 3 + y) as f64 / 17.0 + 0.0123);
        let path = dir.path().join("a.png");
        img.save_png(&path).unwrap();
        let back = Image::load(&path).unwrap();
        assert_eq!(back, img.quantized16());
    }

    #[test]
    fn eight_bit_values_survive_16_bit_storage() {
        let img = Image::from_fn(256, 1, |x, _| x as f64 / 255.0);
        assert_eq!(img.quantized16(), img);
    }

    #[test]
    fn reads_binary_pgm_and_ppm() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = dir.path().join("g.pgm");
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255]);
        fs::write(&pgm, bytes).unwrap();
        assert_eq!(Image::load(&pgm).unwrap().pixels(), [0.0, 1.0]);

        let ppm = dir.path().join("c.ppm");
        let mut bytes = b"P6\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0]);
        fs::write(&ppm, bytes).unwrap();
        let v = Image::load(&ppm).unwrap().pixels()[0];
        assert!((v - 0.299).abs() < 1e-12);
    }

    #[test]
    fn listing_filters_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.PGM", "notes.txt"] {
            fs::write(dir.path().join(name), b"x").unwrap();
        }
        let names: Vec<_> = list_images(dir.path())
            .unwrap()
            .iter()
            .map(|p| image_id(p))
            .collect();
        assert_eq!(names, ["a", "b"]);
    }
}
