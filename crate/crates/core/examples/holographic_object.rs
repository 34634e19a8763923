//! Image a letter-shaped amplitude mask without a reference beam: illuminate
//! it, propagate to the detection plane, measure that field by direct strong
//! tomography, back-propagate and divide out the illumination.
//!
//!     cargo run --release --example holographic_object -- [photons] [out_dir]

use std::path::PathBuf;

use wavetomo::io::{grid_data, MaskKind, Pgm};
use wavetomo::{
    make_mode, propagate_forward, reconstruct_dst, reconstruct_object, scan, CouplingConfig, GridSpec, Kernel,
    ModeSpec, ObjectOptions, PropagationSpec, PsiTildeMode,
};

fn letter_l(n: usize) -> Pgm {
    let mut pixels = vec![0u8; n * n];
    for row in 0..n {
        for col in 0..n {
            let (r, c) = (row * 64 / n, col * 64 / n);
            if ((12..52).contains(&r) && (14..24).contains(&c)) || ((42..52).contains(&r) && (14..48).contains(&c)) {
                pixels[row * n + col] = 255;
            }
        }
    }
    Pgm { width: n, height: n, maxval: 255, pixels }
}

fn main() -> wavetomo::Result<()> {
    let mut args = std::env::args().skip(1);
    let photons: u64 = args.next().map_or(0, |s| s.parse().expect("photons must be an integer"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "holo_object".into()));
    std::fs::create_dir_all(&out)?;

    let grid = GridSpec::new(64, 64, 4e-6)?;
    let mask = letter_l(64);
    let t = mask.to_mask(&grid, MaskKind::Amplitude)?;
    let illumination = make_mode(&ModeSpec::gaussian(grid.extent() / 2.0), grid)?;
    let object = illumination.map(|i, a| a * t[i])?;

    let spec = PropagationSpec::new(808e-9, 10.0 * grid.extent(), Kernel::FresnelParaxial)?;
    let detected = propagate_forward(&object, &spec)?;
    let records = scan(&detected, &CouplingConfig::strong(), photons, 0)?;
    let measured = reconstruct_dst(&records, &grid, PsiTildeMode::SelfConsistent)?.to_wavefunction()?;
    let recovered = reconstruct_object(&measured, &illumination, &spec, &ObjectOptions::default())?;

    let truth: Vec<f64> = t.iter().map(|m| m.re).collect();
    println!(
        "photons/setting {photons}: |t| vs mask correlation {:.3} over {} cells",
        recovered.amplitude_correlation(&truth)?,
        recovered.valid_count()
    );
    let amp: Vec<f64> = recovered.transmission_map.iter().map(|v| v.norm()).collect();
    std::fs::write(out.join("transmission_amp.dat"), grid_data(&grid, &amp))?;
    std::fs::write(out.join("mask.pgm"), mask.encode())?;
    println!("wrote {}", out.display());
    Ok(())
}
