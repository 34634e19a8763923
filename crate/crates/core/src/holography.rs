//! Digital holography from directly measured fields.
//!
//! Forward propagation over distance `D` convolves the object-plane field with
//! either the spherical-wave propagator
//!
//! ```text
//! K = exp(i k R) / (i lambda R),   R = sqrt(dx^2 + dy^2 + D^2)
//! ```
//!
//! or its paraxial (Fresnel) form `exp(i k D) / (i lambda D) * exp(i k rho^2 / 2D)`.
//! Back-propagation uses the conjugate Fresnel kernel. Convolutions run through
//! zero-padded FFTs and the output is cropped back to the input grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::wavefield::{GridSpec, TransverseWavefunction};

/// Paraxial validity heuristic: `D >= PARAXIAL_RATIO * extent`.
pub const PARAXIAL_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    FeynmanExact,
    FresnelParaxial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSpec {
    wavelength: f64,
    distance: f64,
    kernel: Kernel,
    wavenumber: f64,
    pad_factor: usize,
}

impl PropagationSpec {
    pub fn new(wavelength: f64, distance: f64, kernel: Kernel) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::invalid(format!("distance must be positive, got {distance}")));
        }
        Ok(Self { wavelength, distance, kernel, wavenumber: 2.0 * PI / wavelength, pad_factor: 2 })
    }

    /// FFT grid size per axis, as a multiple of the field size (at least 2).
    pub fn with_pad_factor(mut self, pad_factor: usize) -> Result<Self> {
        if pad_factor < 2 {
            return Err(Error::invalid(format!("pad factor must be at least 2, got {pad_factor}")));
        }
        self.pad_factor = pad_factor;
        Ok(self)
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn pad_factor(&self) -> usize {
        self.pad_factor
    }

    /// Whether `D >= 10 x` the grid's transverse extent.
    pub fn is_paraxial_for(&self, grid: &GridSpec) -> bool {
        self.distance >= PARAXIAL_RATIO * grid.extent()
    }

    /// Largest phase step per cell of the kernel over the offsets the
    /// convolution actually uses, in radians. Must not exceed pi.
    pub fn max_phase_step(&self, grid: &GridSpec) -> f64 {
        let (k, d, p) = (self.wavenumber, self.distance, grid.pitch());
        let reach = (grid.nx().max(grid.ny()) - 1) as f64 * p;
        let slope = match self.kernel {
            Kernel::FresnelParaxial => k * reach / d,
            Kernel::FeynmanExact => k * reach / (reach * reach + d * d).sqrt(),
        };
        slope * p
    }

    fn check(&self, grid: &GridSpec) -> Result<()> {
        if self.kernel == Kernel::FresnelParaxial && !self.is_paraxial_for(grid) {
            return Err(Error::Paraxial(format!(
                "distance {:.4e} m is below {PARAXIAL_RATIO} x the transverse extent {:.4e} m",
                self.distance,
                grid.extent()
            )));
        }
        let step = self.max_phase_step(grid);
        if step > PI {
            return Err(Error::Nyquist(format!(
                "kernel phase advances {step:.3} rad per cell at the grid edge (limit pi); \
                 use a finer pitch or a longer distance"
            )));
        }
        Ok(())
    }

    fn kernel_value(&self, dx: f64, dy: f64, inverse: bool) -> Complex64 {
        let (k, d, lambda) = (self.wavenumber, self.distance, self.wavelength);
        let rho2 = dx * dx + dy * dy;
        let i = Complex64::new(0.0, 1.0);
        match (self.kernel, inverse) {
            (Kernel::FresnelParaxial, false) => {
                Complex64::from_polar(1.0, k * d + k * rho2 / (2.0 * d)) / (i * lambda * d)
            }
            (Kernel::FresnelParaxial, true) => {
                Complex64::from_polar(1.0, -k * d - k * rho2 / (2.0 * d)) / (-i * lambda * d)
            }
            (Kernel::FeynmanExact, _) => {
                let r = (rho2 + d * d).sqrt();
                // k R = k D + k (R - D) keeps the small transverse term accurate.
                let phase = k * d + k * rho2 / (r + d);
                Complex64::from_polar(1.0 / r, phase) / (i * lambda)
            }
        }
    }
}

struct Fft2 {
    rows: Arc<dyn Fft<f64>>,
    cols: Arc<dyn Fft<f64>>,
    width: usize,
    height: usize,
}

impl Fft2 {
    fn new(width: usize, height: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (rows, cols) = if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        };
        Self { rows, cols, width, height }
    }

    fn process(&self, data: &mut [Complex64]) {
        let (w, h) = (self.width, self.height);
        data.par_chunks_mut(w).for_each(|row| self.rows.process(row));
        let mut t = transpose(data, w, h);
        t.par_chunks_mut(h).for_each(|col| self.cols.process(col));
        data.copy_from_slice(&transpose(&t, h, w));
    }
}

fn transpose(data: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = data[y * w + x];
        }
    }
    out
}

/// Linear convolution of `f` with the kernel (times the cell area), cropped
/// to the input grid.
fn convolve(f: &TransverseWavefunction, spec: &PropagationSpec, inverse: bool) -> Result<TransverseWavefunction> {
    let grid = *f.grid();
    spec.check(&grid)?;
    let (nx, ny, p) = (grid.nx(), grid.ny(), grid.pitch());
    let (mx, my) = (spec.pad_factor * nx, spec.pad_factor * ny);
    let zero = Complex64::new(0.0, 0.0);

    let mut field = vec![zero; mx * my];
    for iy in 0..ny {
        field[iy * mx..iy * mx + nx].copy_from_slice(&f.amps()[iy * nx..(iy + 1) * nx]);
    }

    // Only offsets in (-n, n) reach the cropped window.
    let area = p * p;
    let mut kernel = vec![zero; mx * my];
    kernel.par_chunks_mut(mx).enumerate().for_each(|(ky, row)| {
        let oy = if ky < my / 2 { ky as isize } else { ky as isize - my as isize };
        if oy.unsigned_abs() >= ny {
            return;
        }
        for (kx, v) in row.iter_mut().enumerate() {
            let ox = if kx < mx / 2 { kx as isize } else { kx as isize - mx as isize };
            if ox.unsigned_abs() < nx {
                *v = spec.kernel_value(ox as f64 * p, oy as f64 * p, inverse) * area;
            }
        }
    });

    let fwd = Fft2::new(mx, my, false);
    fwd.process(&mut field);
    fwd.process(&mut kernel);
    let norm = 1.0 / (mx * my) as f64;
    field.par_iter_mut().zip(kernel.par_iter()).for_each(|(a, b)| *a = *a * b * norm);
    Fft2::new(mx, my, true).process(&mut field);

    let mut out = Vec::with_capacity(grid.len());
    for iy in 0..ny {
        out.extend_from_slice(&field[iy * mx..iy * mx + nx]);
    }
    TransverseWavefunction::new(grid, out)
}

/// Object plane to detection plane with the configured kernel.
pub fn propagate_forward(f: &TransverseWavefunction, spec: &PropagationSpec) -> Result<TransverseWavefunction> {
    convolve(f, spec, false)
}

/// Detection plane back to the object plane. Only the paraxial kernel has a
/// closed-form inverse.
pub fn propagate_inverse(f_d: &TransverseWavefunction, spec: &PropagationSpec) -> Result<TransverseWavefunction> {
    if spec.kernel != Kernel::FresnelParaxial {
        return Err(Error::invalid("inverse propagation is defined for the Fresnel kernel only"));
    }
    convolve(f_d, spec, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectOptions {
    /// Cells with `|psi_in| < mask_threshold * max |psi_in|` are left undefined.
    pub mask_threshold: f64,
}

impl Default for ObjectOptions {
    fn default() -> Self {
        Self { mask_threshold: 1e-3 }
    }
}

/// Complex transmission of a thin object, `psi_obj / psi_in` on the mask.
///
/// DST fixes neither the scale nor the global phase of the measured field, so
/// `t` is normalized to unit `|psi_in|^2`-weighted power with a real, positive
/// weighted mean. A null object therefore reconstructs to `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectReconstruction {
    pub grid: GridSpec,
    /// Zero where the mask is false.
    pub transmission_map: Vec<Complex64>,
    pub validity_mask: Vec<bool>,
}

impl ObjectReconstruction {
    pub fn get(&self, idx: usize) -> Option<Complex64> {
        self.validity_mask[idx].then(|| self.transmission_map[idx])
    }

    pub fn valid_count(&self) -> usize {
        self.validity_mask.iter().filter(|&&m| m).count()
    }

    /// Pearson correlation between `|t|` and `truth` over the valid cells.
    pub fn amplitude_correlation(&self, truth: &[f64]) -> Result<f64> {
        if truth.len() != self.grid.len() {
            return Err(Error::invalid("truth map size does not match grid"));
        }
        let pairs: Vec<(f64, f64)> =
            (0..truth.len()).filter_map(|i| self.get(i).map(|t| (t.norm(), truth[i]))).collect();
        pearson(&pairs).ok_or_else(|| Error::Degenerate("correlation undefined for constant maps".into()))
    }
}

pub(crate) fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (mx, my) = (pairwise_sum(&xs) / n, pairwise_sum(&ys) / n);
    let sxy: Vec<f64> = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let syy: Vec<f64> = ys.iter().map(|y| (y - my) * (y - my)).collect();
    let denom = (pairwise_sum(&sxx) * pairwise_sum(&syy)).sqrt();
    (denom > 0.0).then(|| pairwise_sum(&sxy) / denom)
}

/// Back-propagates the measured detection-plane field and divides by the known
/// illumination.
pub fn reconstruct_object(
    measured_d: &TransverseWavefunction,
    known_input: &TransverseWavefunction,
    spec: &PropagationSpec,
    opts: &ObjectOptions,
) -> Result<ObjectReconstruction> {
    measured_d.check_same_grid(known_input)?;
    if !(opts.mask_threshold.is_finite() && opts.mask_threshold >= 0.0) {
        return Err(Error::invalid("mask threshold must be a non-negative number"));
    }
    let object = propagate_inverse(measured_d, spec)?;
    let peak = known_input.amps().iter().map(|a| a.norm()).fold(0.0, f64::max);
    let cut = opts.mask_threshold * peak;
    let validity_mask: Vec<bool> =
        known_input.amps().iter().map(|a| peak > 0.0 && a.norm() >= cut && a.norm() > 0.0).collect();
    if !validity_mask.iter().any(|&m| m) {
        return Err(Error::Degenerate("known input field is zero everywhere; mask is empty".into()));
    }

    let zero = Complex64::new(0.0, 0.0);
    let raw: Vec<Complex64> = object
        .amps()
        .iter()
        .zip(known_input.amps())
        .zip(&validity_mask)
        .map(|((o, i), &m)| if m { o / i } else { zero })
        .collect();

    let weights: Vec<f64> =
        known_input.amps().iter().zip(&validity_mask).map(|(i, &m)| if m { i.norm_sqr() } else { 0.0 }).collect();
    let wsum = pairwise_sum(&weights);
    let mean: Vec<Complex64> = raw.iter().zip(&weights).map(|(t, w)| t * w).collect();
    let power: Vec<f64> = raw.iter().zip(&weights).map(|(t, w)| t.norm_sqr() * w).collect();
    let mean = pairwise_sum(&mean);
    let rms = (pairwise_sum(&power) / wsum).sqrt();
    if rms.is_nan() || rms <= 0.0 {
        return Err(Error::Degenerate("back-propagated field vanishes on the mask".into()));
    }
    let align = Complex64::from_polar(1.0 / rms, -mean.arg());
    let transmission_map = raw.into_iter().map(|t| t * align).collect();
    Ok(ObjectReconstruction { grid: *known_input.grid(), transmission_map, validity_mask })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{make_mode, ModeSpec};

    const LAMBDA: f64 = 808e-9;

    fn grid(n: usize, pitch: f64) -> GridSpec {
        GridSpec::new(n, n, pitch).unwrap()
    }

    fn l2_rel(a: &TransverseWavefunction, b: &TransverseWavefunction) -> f64 {
        let d = a.map(|i, x| x - b.amps()[i]).unwrap();
        (d.power() / b.power()).sqrt()
    }

    #[test]
    fn spec_validation() {
        assert!(PropagationSpec::new(0.0, 1.0, Kernel::FresnelParaxial).is_err());
        assert!(PropagationSpec::new(LAMBDA, -1.0, Kernel::FresnelParaxial).is_err());
        let s = PropagationSpec::new(LAMBDA, 1.0, Kernel::FresnelParaxial).unwrap();
        assert!((s.wavenumber() - 2.0 * PI / LAMBDA).abs() < 1e-6);
        assert!(s.with_pad_factor(1).is_err());
        assert_eq!(s.with_pad_factor(4).unwrap().pad_factor(), 4);
    }

    #[test]
    fn point_source_reproduces_sampled_kernel() {
        let g = grid(32, 2e-6);
        let d = 20.0 * g.extent();
        let (cx, cy) = g.center();
        let delta = TransverseWavefunction::zeros(g)
            .map(|i, _| if i == g.index(cx, cy) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .unwrap();
        for kernel in [Kernel::FresnelParaxial, Kernel::FeynmanExact] {
            let spec = PropagationSpec::new(LAMBDA, d, kernel).unwrap();
            let out = propagate_forward(&delta, &spec).unwrap();
            for iy in 0..g.ny() {
                for ix in 0..g.nx() {
                    let (x, y) = g.coords(ix, iy);
                    let want = spec.kernel_value(x, y, false) * g.pitch() * g.pitch();
                    let got = out.amp(ix, iy);
                    assert!((got - want).norm() < 1e-12 * want.norm().max(1e-30), "{kernel:?} {ix},{iy}");
                }
            }
        }
    }

    #[test]
    fn fresnel_preserves_gaussian_power() {
        let g = grid(64, 2e-6);
        let f = make_mode(&ModeSpec::gaussian(g.extent() / 8.0), g).unwrap();
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FresnelParaxial).unwrap();
        let out = propagate_forward(&f, &spec).unwrap();
        assert!((out.power() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = grid(16, 2e-6);
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FresnelParaxial).unwrap();
        let out = propagate_inverse(&TransverseWavefunction::zeros(g), &spec).unwrap();
        assert!(out.amps().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn inverse_rejects_feynman_kernel() {
        let g = grid(16, 2e-6);
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FeynmanExact).unwrap();
        assert!(propagate_inverse(&TransverseWavefunction::zeros(g), &spec).is_err());
    }

    #[test]
    fn guards_fire() {
        let g = grid(64, 125e-6);
        // Paraxial: D below 10x extent.
        let near = PropagationSpec::new(LAMBDA, 0.05, Kernel::FresnelParaxial).unwrap();
        assert!(matches!(propagate_forward(&TransverseWavefunction::zeros(g), &near), Err(Error::Paraxial(_))));
        // Nyquist: 125 um cells need D >~ 2.4 m at 808 nm.
        let short = PropagationSpec::new(LAMBDA, 0.1, Kernel::FresnelParaxial).unwrap();
        assert!(matches!(propagate_forward(&TransverseWavefunction::zeros(g), &short), Err(Error::Nyquist(_))));
        let ok = PropagationSpec::new(LAMBDA, 3.0, Kernel::FresnelParaxial).unwrap();
        assert!(propagate_forward(&TransverseWavefunction::zeros(g), &ok).is_ok());
    }

    #[test]
    fn inverse_kernel_is_conjugate_of_forward() {
        let g = grid(32, 4e-6);
        let (cx, cy) = g.center();
        let delta = TransverseWavefunction::zeros(g)
            .map(|i, _| if i == g.index(cx, cy) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .unwrap();
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FresnelParaxial).unwrap();
        let fwd = propagate_forward(&delta, &spec).unwrap();
        let inv = propagate_inverse(&delta, &spec).unwrap();
        for (a, b) in fwd.amps().iter().zip(inv.amps()) {
            assert!((a.conj() - b).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn round_trip_gaussian() {
        let g = grid(128, 2e-6);
        let f = make_mode(&ModeSpec::gaussian(g.extent() / 8.0), g).unwrap();
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FresnelParaxial).unwrap();
        let back = propagate_inverse(&propagate_forward(&f, &spec).unwrap(), &spec).unwrap();
        assert!(l2_rel(&back, &f) < 1e-3);
    }

    #[test]
    fn null_object_gives_unit_transmission() {
        let g = grid(64, 4e-6);
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FresnelParaxial).unwrap();
        let input = make_mode(&ModeSpec::gaussian(g.extent() / 8.0), g).unwrap();
        let measured = propagate_forward(&input, &spec).unwrap().normalize().unwrap().gauge_fixed();
        let obj = reconstruct_object(&measured, &input, &spec, &ObjectOptions::default()).unwrap();
        let worst = (0..g.len()).filter_map(|i| obj.get(i)).map(|t| (t - 1.0).norm()).fold(0.0, f64::max);
        assert!(worst < 0.05, "max |t-1| = {worst}");
    }

    #[test]
    fn empty_mask_is_an_error() {
        let g = grid(16, 2e-6);
        let spec = PropagationSpec::new(LAMBDA, 10.0 * g.extent(), Kernel::FresnelParaxial).unwrap();
        let z = TransverseWavefunction::zeros(g);
        assert!(reconstruct_object(&z, &z, &spec, &ObjectOptions::default()).is_err());
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[(1.0, 2.0), (2.0, 0.0)]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }
}
