#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavetomo::io::Pgm;
use wavetomo::{Complex64, GridSpec, PointerState, TransverseWavefunction};

pub const LAMBDA: f64 = 808e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A few Gaussian blobs with random complex weights and phase tilts on top of
/// a broad positive background, so the zero-momentum amplitude stays clear of
/// zero.
pub fn random_smooth_field(grid: GridSpec, seed: u64) -> TransverseWavefunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = grid.extent() / 2.0;
    let blobs: Vec<(f64, f64, f64, Complex64, f64, f64)> = (0..4)
        .map(|_| {
            let x0 = rng.random_range(-0.5..0.5) * half;
            let y0 = rng.random_range(-0.5..0.5) * half;
            let w = rng.random_range(0.15..0.4) * half;
            let amp = Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(-3.0..3.0));
            let kx = rng.random_range(-2.0..2.0) / half;
            let ky = rng.random_range(-2.0..2.0) / half;
            (x0, y0, w, amp, kx, ky)
        })
        .collect();
    let bg = half * 0.6;
    TransverseWavefunction::from_fn(grid, |x, y| {
        let mut v = c((-(x * x + y * y) / (bg * bg)).exp(), 0.0);
        for &(x0, y0, w, amp, kx, ky) in &blobs {
            let r2 = (x - x0).powi(2) + (y - y0).powi(2);
            v += amp * (-r2 / (w * w)).exp() * Complex64::from_polar(1.0, kx * x + ky * y);
        }
        v
    })
    .unwrap()
    .normalize()
    .unwrap()
}

/// Arbitrary (not necessarily smooth) field with random entries.
pub fn random_field(grid: GridSpec, seed: u64) -> TransverseWavefunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..grid.len()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    TransverseWavefunction::new(grid, amps).unwrap()
}

/// Post-selected pointer from the full joint state: builds the 2N x 2N
/// generator `|c><c| (x) sigma_y`, exponentiates it, applies it to
/// `psi (x) |0>` and projects onto the uniform zero-momentum state.
pub fn oracle_pointer(f: &TransverseWavefunction, cell: (usize, usize), theta: f64) -> PointerState {
    let n = f.grid().len();
    let k = f.grid().index(cell.0, cell.1);
    let i = c(0.0, 1.0);
    // Basis ordering: (position, pointer) -> 2 * position + pointer.
    let mut h = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    h[(2 * k, 2 * k + 1)] = -i;
    h[(2 * k + 1, 2 * k)] = i;
    let u = (h * c(0.0, -theta)).exp();
    let mut state = DVector::<Complex64>::zeros(2 * n);
    for (j, a) in f.amps().iter().enumerate() {
        state[2 * j] = *a;
    }
    let out = u * state;
    let norm = 1.0 / (n as f64).sqrt();
    let (mut a0, mut a1) = (c(0.0, 0.0), c(0.0, 0.0));
    for j in 0..n {
        a0 += out[2 * j] * norm;
        a1 += out[2 * j + 1] * norm;
    }
    PointerState::new(a0, a1)
}

/// An "L" drawn with 10-cell-wide strokes on a 64 x 64 image, top row first.
pub fn letter_l() -> Pgm {
    let (w, h) = (64usize, 64usize);
    let mut pixels = vec![0u8; w * h];
    for row in 0..h {
        for col in 0..w {
            let stem = (12..52).contains(&row) && (14..24).contains(&col);
            let foot = (42..52).contains(&row) && (14..48).contains(&col);
            if stem || foot {
                pixels[row * w + col] = 255;
            }
        }
    }
    Pgm { width: w, height: h, maxval: 255, pixels }
}

pub fn rel_l2(a: &TransverseWavefunction, reference: &TransverseWavefunction) -> f64 {
    let d: f64 = a.amps().iter().zip(reference.amps()).map(|(x, y)| (x - y).norm_sqr()).sum();
    (d / reference.power()).sqrt()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Winding of a phase map around the grid center, counted independently of
/// the library: walk the square loop counter-clockwise and sum the wrapped
/// increments.
pub fn loop_winding(grid: &GridSpec, phase: &[f64], r: usize) -> i64 {
    let (cx, cy) = grid.center();
    let (cx, cy, r) = (cx as i64, cy as i64, r as i64);
    let mut path = Vec::new();
    for x in -r..r {
        path.push((cx + x, cy - r));
    }
    for y in -r..r {
        path.push((cx + r, cy + y));
    }
    for x in (-r + 1..=r).rev() {
        path.push((cx + x, cy + r));
    }
    for y in (-r + 1..=r).rev() {
        path.push((cx - r, cy + y));
    }
    let at = |(x, y): (i64, i64)| phase[grid.index(x as usize, y as usize)];
    let mut total = 0.0;
    for k in 0..path.len() {
        let mut d = at(path[(k + 1) % path.len()]) - at(path[k]);
        d -= (2.0 * std::f64::consts::PI) * (d / (2.0 * std::f64::consts::PI)).round();
        total += d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Letter "L" imaged end to end: Gaussian illumination through the mask,
/// Fresnel propagation to the detection plane, a DST scan there with
/// `photons` per setting (0 = noiseless), then holographic object recovery.
/// Returns the correlation of `|t|` with the mask.
pub fn letter_pipeline(photons: u64, seed: u64) -> f64 {
    use wavetomo::{
        make_mode, propagate_forward, reconstruct_dst, reconstruct_object, scan, CouplingConfig, Kernel, ModeSpec,
        ObjectOptions, PropagationSpec, PsiTildeMode,
    };
    let grid = GridSpec::new(64, 64, 4e-6).unwrap();
    let mask = letter_l();
    let t = mask.to_mask(&grid, wavetomo::io::MaskKind::Amplitude).unwrap();
    let illum = make_mode(&ModeSpec::gaussian(grid.extent() / 2.0), grid).unwrap();
    let object = illum.map(|i, a| a * t[i]).unwrap();
    let spec = PropagationSpec::new(LAMBDA, 10.0 * grid.extent(), Kernel::FresnelParaxial).unwrap();
    let detected = propagate_forward(&object, &spec).unwrap();
    let recs = scan(&detected, &CouplingConfig::strong(), photons, seed).unwrap();
    let measured = reconstruct_dst(&recs, &grid, PsiTildeMode::SelfConsistent).unwrap().to_wavefunction().unwrap();
    let obj = reconstruct_object(&measured, &illum, &spec, &ObjectOptions::default()).unwrap();
    let truth: Vec<f64> = t.iter().map(|m| m.re).collect();
    obj.amplitude_correlation(&truth).unwrap()
}
