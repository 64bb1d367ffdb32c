//! Builds a natural model and scores pristine and distorted versions of a
//! held-out image. Higher scores mean the image's features sit further from
//! the natural model.
//!
//! ```text
//! cargo run --release --example score_images -- CKPT [PRISTINE_DIR] [IMAGE]
//! ```
//!
//! `CKPT` comes from `train_autoencoder` or `biqa train`.

use std::path::PathBuf;

use biqa::autoencoder::Checkpoint;
use biqa::distortions::{DistortionSchedule, Family, MAX_LEVEL};
use biqa::image::{load_dir, Image};
use biqa::natural_model::{build_natural_model, ModelParams, Scorer};

fn main() -> biqa::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let Some(ckpt_path) = args.first() else {
        eprintln!("usage: score_images CKPT [PRISTINE_DIR] [IMAGE]");
        std::process::exit(2);
    };
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/natural");
    let pristine_dir = args.get(1).cloned().unwrap_or(fixtures.join("train"));
    let image_path = args
        .get(2)
        .cloned()
        .unwrap_or(fixtures.join("heldout/coins.png"));

    let ckpt = Checkpoint::load(ckpt_path)?;
    let pristine = load_dir(&pristine_dir)?;
    let model = build_natural_model(&ckpt, &pristine, &ModelParams::default())?;
    let scorer = Scorer::new(&model, &ckpt)?;
    let image = Image::load(&image_path)?;

    println!("{:<12} level  score", "family");
    let base = scorer.score(&image, "query")?;
    println!("{:<12} {:>5}  {:.5}", Family::Pristine, 0, base.value);
    let schedule = DistortionSchedule::default();
    for family in Family::DISTORTIONS {
        for level in 1..=MAX_LEVEL {
            let distorted = schedule.apply(&image, family, level, 0)?;
            let score = scorer.score(&distorted, "query")?;
            println!("{:<12} {:>5}  {:.5}", family, level, score.value);
        }
    }
    Ok(())
}
