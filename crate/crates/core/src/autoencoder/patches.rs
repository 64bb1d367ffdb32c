use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::image::Image;

/// How patch offsets are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchMode {
    /// `count` offsets drawn uniformly at random (overlaps allowed).
    RandomOverlapping { count: usize },
    /// Every `stride`-th offset plus one flush with the far border.
    Grid { stride: usize },
}

/// Square patches cut from one or more images.
#[derive(Clone, Debug, Default)]
pub struct PatchSet {
    pub size: usize,
    /// `[1, size, size]` tensors with values in `[0, 1]`.
    pub patches: Vec<Tensor>,
    /// Source image identifier of each patch.
    pub sources: Vec<String>,
    /// Top-left `(x, y)` of each patch in its source image.
    pub offsets: Vec<(usize, usize)>,
}

impl PatchSet {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn append(&mut self, other: PatchSet) {
        self.size = other.size;
        self.patches.extend(other.patches);
        self.sources.extend(other.sources);
        self.offsets.extend(other.offsets);
    }
}

/// Offsets `0, stride, 2*stride, ...` along an axis, plus `extent - size`.
pub fn grid_offsets(extent: usize, size: usize, stride: usize) -> Vec<usize> {
    let last = extent - size;
    let mut out: Vec<usize> = (0..=last).step_by(stride.max(1)).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

pub fn extract_patches(
    image: &Image,
    id: &str,
    size: usize,
    mode: PatchMode,
    seed: u64,
) -> Result<PatchSet> {
    let (w, h) = (image.width(), image.height());
    if size == 0 || w < size || h < size {
        return Err(Error::UndersizedImage {
            id: id.to_string(),
            width: w,
            height: h,
            patch: size,
        });
    }
    let offsets: Vec<(usize, usize)> = match mode {
        PatchMode::RandomOverlapping { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| (rng.random_range(0..=w - size), rng.random_range(0..=h - size)))
                .collect()
        }
        PatchMode::Grid { stride } => {
            if stride == 0 {
                return Err(Error::InvalidArgument("grid stride must be positive".into()));
            }
            let xs = grid_offsets(w, size, stride);
            grid_offsets(h, size, stride)
                .into_iter()
                .flat_map(|y| xs.iter().map(move |&x| (x, y)))
                .collect()
        }
    };
    let patches = offsets
        .iter()
        .map(|&(x, y)| {
            let crop = image.crop(x, y, size, size)?;
            Tensor::new(vec![1, size, size], crop.pixels().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchSet {
        size,
        sources: vec![id.to_string(); patches.len()],
        patches,
        offsets,
    })
}
