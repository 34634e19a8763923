//! Compare the exact strong-coupling inversion with the first-order weak-value
//! estimate across coupling strengths, on noiseless records.
//!
//!     cargo run --release --example dst_vs_dwt

use std::f64::consts::FRAC_PI_2;

use wavetomo::{
    make_mode, reconstruct_dst, reconstruct_dwt, scan, score, CouplingConfig, GridSpec, ModeSpec, PsiTildeMode,
};

fn main() -> wavetomo::Result<()> {
    let grid = GridSpec::new(64, 64, 125e-6)?;
    let field = make_mode(&ModeSpec::gaussian(ModeSpec::default_waist(&grid)), grid)?;

    let strong = scan(&field, &CouplingConfig::strong(), 0, 0)?;
    let dst = score(&reconstruct_dst(&strong, &grid, PsiTildeMode::SelfConsistent)?, &field)?;
    println!("DST  theta = pi/2   1 - fidelity {:.3e}", 1.0 - dst.fidelity);

    for theta in [0.01, 0.05, 0.1, 0.3, 0.6, 1.0, FRAC_PI_2] {
        let records = scan(&field, &CouplingConfig::weak(theta)?, 0, 0)?;
        let rec = reconstruct_dwt(&records, &grid, theta, PsiTildeMode::SelfConsistent)?;
        let q = score(&rec, &field)?;
        println!("DWT  theta = {theta:<6.3} 1 - fidelity {:.3e}  R2 {:.6}", 1.0 - q.fidelity, q.r_square);
    }
    Ok(())
}
