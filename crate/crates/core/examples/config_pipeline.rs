//! Drive the command layer from code: a flat config file, then prepare,
//! measure and reconstruct into one output directory, exactly as the
//! `wavetomo` binary would.
//!
//!     cargo run --release --example config_pipeline -- [out_dir]

use std::path::PathBuf;

use wavetomo::cli::{cmd_measure, cmd_prepare, cmd_reconstruct};
use wavetomo::ExperimentConfig;

fn main() -> wavetomo::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "config_pipeline".into());
    let mut cfg = ExperimentConfig::parse(
        "# LG beam, l = 1, on a 32 x 32 scan\n\
         nx = 32\n\
         ny = 32\n\
         mode = lg\n\
         l = 1\n\
         photons = 0\n\
         seed = 7\n",
    )?;
    cfg.out = PathBuf::from(out);
    print!("{}", cfg.to_text());

    let field = cmd_prepare(&cfg)?;
    let records = cmd_measure(&cfg, &field)?;
    let report = cmd_reconstruct(&cfg, &records, Some(&field), None)?;
    println!("psi_t {:.3e}  R2 {:?}  fidelity {:?}", report.psi_tilde, report.r_square, report.fidelity);
    println!("outputs in {}", cfg.out.display());
    Ok(())
}
