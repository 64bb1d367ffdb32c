use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::RunConfig;
use crate::autoencoder::{train_with_progress, Checkpoint};
use crate::distortions::{generate_benchmark, Manifest};
use crate::error::{Error, Result};
use crate::image::{image_id, load_dir, write_atomic, Image};
use crate::metrics::{evaluate, EvaluationReport};
use crate::natural_model::{build_natural_model, NaturalModel, QualityScore, Scorer};

fn load_images(dir: &Path) -> Result<Vec<(String, Image)>> {
    let images = load_dir(dir)?;
    if images.is_empty() {
        return Err(Error::NoUsableImages(dir.display().to_string()));
    }
    Ok(images)
}

fn out(log: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    writeln!(log, "{line}").map_err(|e| Error::io("<output>", e))
}

/// Trains on every image in `images` and writes the checkpoint to `out_path`.
pub fn cmd_train(
    images: &Path,
    config: &RunConfig,
    out_path: &Path,
    log: &mut dyn Write,
) -> Result<Checkpoint> {
    config.network.validate()?;
    let set = load_images(images)?;
    out(log, format_args!("# {}", config.summary()))?;
    out(log, format_args!("training on {} images", set.len()))?;
    let mut write_err = None;
    let checkpoint = train_with_progress(&set, &config.network, |r| {
        if let Err(e) = writeln!(log, "epoch {:>3}  loss {:.6e}", r.epoch, r.mean_loss) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(Error::io("<output>", e));
    }
    checkpoint.save(out_path)?;
    out(
        log,
        format_args!("wrote {} ({})", out_path.display(), checkpoint.fingerprint()),
    )?;
    Ok(checkpoint)
}

/// Builds the natural model from the pristine `images`.
pub fn cmd_build_model(
    images: &Path,
    checkpoint: &Path,
    config: &RunConfig,
    out_path: &Path,
    log: &mut dyn Write,
) -> Result<NaturalModel> {
    config.model.validate()?;
    let checkpoint = Checkpoint::load(checkpoint)?;
    let set = load_images(images)?;
    let model = build_natural_model(&checkpoint, &set, &config.model)?;
    model.save(out_path)?;
    out(
        log,
        format_args!(
            "wrote {} ({} channels from {} images)",
            out_path.display(),
            model.channels.len(),
            set.len()
        ),
    )?;
    Ok(model)
}

/// Wall-clock scoring time, excluding model and checkpoint loading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub images: usize,
    pub seconds: f64,
}

impl Timing {
    pub fn seconds_per_image(&self) -> f64 {
        self.seconds / self.images.max(1) as f64
    }

    pub fn to_text(&self) -> String {
        format!(
            "images={}\nseconds_total={}\nseconds_per_image={}\n",
            self.images,
            self.seconds,
            self.seconds_per_image()
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut images = None;
        let mut seconds = None;
        for line in text.lines() {
            match line.split_once('=') {
                Some(("images", v)) => images = v.trim().parse().ok(),
                Some(("seconds_total", v)) => seconds = v.trim().parse().ok(),
                _ => {}
            }
        }
        match (images, seconds) {
            (Some(images), Some(seconds)) => Ok(Timing { images, seconds }),
            _ => Err(Error::format("timing", "missing images or seconds_total")),
        }
    }
}

/// Timing file kept next to a scored manifest.
pub fn timing_path(manifest: &Path) -> PathBuf {
    let mut name = manifest.as_os_str().to_owned();
    name.push(".timing");
    PathBuf::from(name)
}

pub enum ScoreOutput {
    Single { score: QualityScore, timing: Timing },
    Manifest { manifest: Manifest, timing: Timing },
}

/// Scores one image, or every row of a `.csv` manifest. A scored manifest
/// is written to `out_path` (default: overwrite `input`) together with a
/// timing file.
pub fn cmd_score(
    model: &Path,
    checkpoint: &Path,
    input: &Path,
    out_path: Option<&Path>,
    log: &mut dyn Write,
) -> Result<ScoreOutput> {
    let model = NaturalModel::load(model)?;
    let checkpoint = Checkpoint::load(checkpoint)?;
    let scorer = Scorer::new(&model, &checkpoint)?;
    let is_manifest = input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));

    if !is_manifest {
        let image = Image::load(input)?;
        let start = Instant::now();
        let score = scorer.score(&image, &image_id(input))?;
        let timing = Timing {
            images: 1,
            seconds: start.elapsed().as_secs_f64(),
        };
        out(log, format_args!("{}\t{}", input.display(), score.value))?;
        return Ok(ScoreOutput::Single { score, timing });
    }

    let mut manifest = Manifest::load(input)?;
    let mut seconds = 0.0;
    for row in &mut manifest.rows {
        let image = Image::load(&row.path)?;
        let start = Instant::now();
        let score = scorer.score(&image, &row.image_id)?;
        seconds += start.elapsed().as_secs_f64();
        row.score = Some(score.value);
    }
    let timing = Timing {
        images: manifest.rows.len(),
        seconds,
    };
    let target = out_path.unwrap_or(input);
    manifest.save(target)?;
    write_atomic(&timing_path(target), timing.to_text().as_bytes())?;
    out(
        log,
        format_args!(
            "scored {} rows into {} ({:.3} s per image)",
            timing.images,
            target.display(),
            timing.seconds_per_image()
        ),
    )?;
    Ok(ScoreOutput::Manifest { manifest, timing })
}

/// Writes the distortion benchmark for every image in `images`.
pub fn cmd_distort(
    images: &Path,
    out_dir: &Path,
    config: &RunConfig,
    log: &mut dyn Write,
) -> Result<Manifest> {
    let set = load_images(images)?;
    let mut manifest = generate_benchmark(&set, out_dir, config.distort_seed, &config.schedule)?;
    manifest.comments.push(format!("config {}", config.summary()));
    let path = out_dir.join("manifest.csv");
    manifest.save(&path)?;
    out(
        log,
        format_args!("wrote {} rows to {}", manifest.rows.len(), path.display()),
    )?;
    Ok(manifest)
}

/// Evaluates a scored manifest, writes the CSV report (default
/// `report.csv` beside the manifest) and prints the summary. Fails after
/// reporting when any group is incomplete.
pub fn cmd_evaluate(
    manifest_path: &Path,
    out_path: Option<&Path>,
    log: &mut dyn Write,
) -> Result<EvaluationReport> {
    let manifest = Manifest::load(manifest_path)?;
    let mut report = evaluate(&manifest);
    let timing = timing_path(manifest_path);
    if timing.is_file() {
        let text = fs::read_to_string(&timing).map_err(|e| Error::io(&timing, e))?;
        report.seconds_per_image = Some(Timing::from_text(&text)?.seconds_per_image());
    }

    let default_out = manifest_path.with_file_name("report.csv");
    let target = out_path.unwrap_or(&default_out);
    let mut bytes = Vec::new();
    for c in &manifest.comments {
        bytes.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    bytes.extend(report.to_csv()?);
    write_atomic(target, &bytes)?;

    write!(log, "{}", report.to_text()).map_err(|e| Error::io("<output>", e))?;
    out(log, format_args!("wrote {}", target.display()))?;
    if report.incomplete > 0 {
        return Err(Error::IncompleteEvaluation(report.incomplete));
    }
    Ok(report)
}
