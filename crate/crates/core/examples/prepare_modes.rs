//! Generate the transverse modes used throughout the crate and write them as
//! WFGRID files.
//!
//!     cargo run --example prepare_modes -- [out_dir]

use std::path::PathBuf;

use wavetomo::io::write_wfgrid;
use wavetomo::{make_mode, GridSpec, ModeSpec};

fn main() -> wavetomo::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "modes".into()));
    std::fs::create_dir_all(&out)?;

    // 64 x 64 scan cells of 125 um.
    let grid = GridSpec::new(64, 64, 125e-6)?;
    let waist = ModeSpec::default_waist(&grid);
    let specs = [
        ("gaussian", ModeSpec::gaussian(waist)),
        ("lg_l1", ModeSpec::laguerre_gaussian(waist, 1, 0)),
        ("lg_l2", ModeSpec::laguerre_gaussian(waist, 2, 0)),
        ("lg_l1_p1", ModeSpec::laguerre_gaussian(waist, 1, 1)),
    ];
    println!("{:<10} {:>10} {:>12} {:>10}", "mode", "power", "|psi_t|", "winding");
    for (name, spec) in specs {
        let f = make_mode(&spec, grid)?;
        // Loop of radius 4 stays inside the radial node of the p = 1 mode.
        let winding = f.winding(4)?;
        println!("{name:<10} {:>10.6} {:>12.3e} {:>10.3}", f.power(), f.psi_tilde().norm(), winding);
        write_wfgrid(out.join(format!("{name}.wfg")), &f)?;
    }

    // A vortex plate adds charge to any field.
    let plated = make_mode(&ModeSpec::gaussian(waist), grid)?.apply_vortex_plate(3);
    println!("gaussian + vortex plate l=3: winding {:.3}", plated.winding(4)?);
    write_wfgrid(out.join("gaussian_vortex3.wfg"), &plated)?;
    println!("wrote {}", out.display());
    Ok(())
}
