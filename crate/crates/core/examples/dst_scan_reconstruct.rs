//! Scan a Gaussian beam cell by cell, invert the pointer readout and score the
//! result, noiseless and with shot noise. Writes gnuplot data for both.
//!
//!     cargo run --release --example dst_scan_reconstruct -- [photons] [out_dir]

use std::path::PathBuf;

use wavetomo::io::write_plot_data;
use wavetomo::{make_mode, reconstruct_dst, scan, score, CouplingConfig, GridSpec, ModeSpec, PsiTildeMode};

fn main() -> wavetomo::Result<()> {
    let mut args = std::env::args().skip(1);
    let photons: u64 = args.next().map_or(Ok(10_000_000), |s| s.parse()).expect("photons must be an integer");
    let out = PathBuf::from(args.next().unwrap_or_else(|| "dst_scan".into()));

    let grid = GridSpec::new(64, 64, 125e-6)?;
    let field = make_mode(&ModeSpec::gaussian(ModeSpec::default_waist(&grid)), grid)?;
    let coupling = CouplingConfig::strong();

    for (label, budget) in [("noiseless", 0), ("noisy", photons)] {
        let records = scan(&field, &coupling, budget, 1)?;
        let rec = reconstruct_dst(&records, &grid, PsiTildeMode::SelfConsistent)?;
        let q = score(&rec, &field)?;
        println!(
            "{label:<9} photons/setting {budget:>10}: R2 {:.4}  fidelity {:.6}  rmse re {:.2e} im {:.2e}  flagged {}",
            q.r_square,
            q.fidelity,
            q.rmse_re,
            q.rmse_im,
            rec.flagged_cells.len()
        );
        let dir = out.join(label);
        std::fs::create_dir_all(&dir)?;
        write_plot_data(&dir, &rec)?;
    }
    println!("plot data in {}", out.display());
    Ok(())
}
