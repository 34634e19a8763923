//! Propagate a Gaussian to the detection plane and back, and compare the exact
//! spherical-wave kernel with its paraxial approximation.
//!
//!     cargo run --release --example holography_round_trip

use wavetomo::{make_mode, propagate_forward, propagate_inverse, GridSpec, Kernel, ModeSpec, PropagationSpec};

fn rel_l2(a: &[wavetomo::Complex64], b: &[wavetomo::Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn main() -> wavetomo::Result<()> {
    // 128 cells of 2 um; the kernel is sampled without aliasing from about 10x the extent.
    let grid = GridSpec::new(128, 128, 2e-6)?;
    let field = make_mode(&ModeSpec::gaussian(grid.extent() / 8.0), grid)?;
    let lambda = 808e-9;

    for pad in [2, 4] {
        let spec = PropagationSpec::new(lambda, 10.0 * grid.extent(), Kernel::FresnelParaxial)?.with_pad_factor(pad)?;
        let back = propagate_inverse(&propagate_forward(&field, &spec)?, &spec)?;
        println!("pad {pad}: round-trip relative L2 error {:.2e}", rel_l2(back.amps(), field.amps()));
    }

    let wide = make_mode(&ModeSpec::gaussian(grid.extent() / 4.0), grid)?;
    for ratio in [10.0, 20.0, 50.0, 100.0] {
        let spec = PropagationSpec::new(lambda, ratio * grid.extent(), Kernel::FresnelParaxial)?;
        let paraxial = propagate_forward(&wide, &spec)?;
        let exact = propagate_forward(&wide, &spec.with_kernel(Kernel::FeynmanExact))?;
        println!(
            "D = {ratio:>5} x extent: exact vs paraxial {:.2e}  (max phase step {:.2} rad/cell)",
            rel_l2(exact.amps(), paraxial.amps()),
            spec.max_phase_step(&grid)
        );
    }
    Ok(())
}
