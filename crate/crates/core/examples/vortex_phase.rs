//! Reconstruct the phase of an l = 1 Laguerre-Gaussian beam and count its
//! winding on square loops around the axis.
//!
//!     cargo run --release --example vortex_phase -- [photons]

use wavetomo::wavefield::phase_winding;
use wavetomo::{make_mode, reconstruct_dst, scan, CouplingConfig, GridSpec, ModeSpec, PsiTildeMode};

fn main() -> wavetomo::Result<()> {
    let photons: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("photons must be an integer"));
    let grid = GridSpec::new(64, 64, 125e-6)?;
    let field = make_mode(&ModeSpec::laguerre_gaussian(ModeSpec::default_waist(&grid), 1, 0), grid)?;
    // A centred vortex nearly cancels the zero-momentum amplitude.
    println!("|psi_t| = {:.3e}", field.psi_tilde().norm());

    let records = scan(&field, &CouplingConfig::strong(), photons, 0)?;
    let rec = reconstruct_dst(&records, &grid, PsiTildeMode::SelfConsistent)?;
    for r in 3..=8 {
        println!("loop radius {r}: winding {:+.3}", phase_winding(&grid, &rec.phase_map, r)?);
    }
    Ok(())
}
