//! Writes the distorted benchmark for a folder of images and reports how
//! far each level moves from the source.
//!
//! ```text
//! cargo run --release --example distortion_benchmark -- [IMAGE_DIR] [OUT_DIR]
//! ```

use std::path::PathBuf;

use biqa::distortions::{generate_benchmark, DistortionSchedule, Family};
use biqa::image::{load_dir, Image};

fn main() -> biqa::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/natural/heldout");
    let dir = args.first().cloned().unwrap_or(fixtures);
    let out = args
        .get(1)
        .cloned()
        .unwrap_or(std::env::temp_dir().join("biqa-benchmark"));

    let images = load_dir(&dir)?;
    let schedule = DistortionSchedule::default();
    let manifest = generate_benchmark(&images, &out, 0, &schedule)?;
    println!("{} variants written to {}", manifest.rows.len(), out.display());

    println!("{:<12} {:>5}  mean psnr (dB)", "family", "level");
    for family in Family::DISTORTIONS {
        for level in 1..=5u8 {
            let mut psnr = 0.0;
            for row in manifest.rows.iter().filter(|r| r.family == family && r.level == level) {
                let (_, source) = images.iter().find(|(id, _)| *id == row.image_id).expect("source");
                let mse = Image::load(&row.path)?.mse(source)?;
                psnr += -10.0 * mse.log10();
            }
            println!("{:<12} {:>5}  {:.2}", family, level, psnr / images.len() as f64);
        }
    }
    Ok(())
}
