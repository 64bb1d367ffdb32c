//! Full pipeline: train, build the natural model, distort held-out images,
//! score every variant and evaluate.
//!
//! ```text
//! cargo run --release --example pipeline -- [TRAIN_DIR] [HELDOUT_DIR] [OUT_DIR] [key=value ...]
//! ```
//!
//! Defaults to the bundled fixtures and the default configuration; trailing
//! `key=value` pairs override configuration keys (e.g. `epochs=2`).

use std::path::PathBuf;
use std::time::Instant;

use biqa::cli::{cmd_build_model, cmd_distort, cmd_evaluate, cmd_score, cmd_train, RunConfig};

fn main() -> biqa::Result<()> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/natural");
    let mut positional = Vec::new();
    let mut config = RunConfig::default();
    for arg in std::env::args().skip(1) {
        if arg.contains('=') {
            config.set_pair(&arg)?;
        } else {
            positional.push(PathBuf::from(arg));
        }
    }
    let train_dir = positional.first().cloned().unwrap_or(fixtures.join("train"));
    let heldout_dir = positional.get(1).cloned().unwrap_or(fixtures.join("heldout"));
    let out_dir = positional
        .get(2)
        .cloned()
        .unwrap_or(std::env::temp_dir().join("biqa-pipeline"));
    std::fs::create_dir_all(&out_dir).map_err(|e| biqa::Error::Config(e.to_string()))?;

    let start = Instant::now();
    let log = &mut std::io::stdout();
    let ckpt = out_dir.join("autoencoder.ckpt");
    let model = out_dir.join("natural.model");
    let bench = out_dir.join("benchmark");
    let manifest = bench.join("manifest.csv");

    cmd_train(&train_dir, &config, &ckpt, log)?;
    cmd_build_model(&train_dir, &ckpt, &config, &model, log)?;
    cmd_distort(&heldout_dir, &bench, &config, log)?;
    cmd_score(&model, &ckpt, &manifest, None, log)?;
    cmd_evaluate(&manifest, None, log)?;
    println!("total time {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
