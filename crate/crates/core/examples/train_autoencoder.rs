//! Trains the autoencoder on a folder of images and reports the loss curve.
//!
//! ```text
//! cargo run --release --example train_autoencoder -- [IMAGE_DIR] [OUT.ckpt] [key=value ...]
//! ```
//!
//! Defaults to the bundled training fixtures with a short schedule
//! (`epochs=5`); pass e.g. `epochs=30` for the default configuration.

use std::path::PathBuf;

use biqa::autoencoder::{mean_predictor_mse, reconstruction_mse, train_with_progress, training_patches};
use biqa::cli::RunConfig;
use biqa::image::load_dir;

fn main() -> biqa::Result<()> {
    let mut config = RunConfig::default();
    config.set_pair("epochs=5")?;
    let mut positional = Vec::new();
    for arg in std::env::args().skip(1) {
        if arg.contains('=') {
            config.set_pair(&arg)?;
        } else {
            positional.push(PathBuf::from(arg));
        }
    }
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/natural/train");
    let dir = positional.first().cloned().unwrap_or(fixtures);
    let out = positional
        .get(1)
        .cloned()
        .unwrap_or(std::env::temp_dir().join("biqa-example.ckpt"));

    let images = load_dir(&dir)?;
    println!("{} images from {}", images.len(), dir.display());
    let ckpt = train_with_progress(&images, &config.network, |r| {
        println!("epoch {:3}  loss {:.6}  steps {}", r.epoch, r.mean_loss, r.optimizer_steps);
    })?;
    let patches = training_patches(&images, &config.network)?;
    println!(
        "reconstruction mse {:.6}, mean-predictor baseline {:.6}",
        reconstruction_mse(&ckpt, &patches)?,
        mean_predictor_mse(&patches)
    );
    ckpt.save(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
