//! Complex scalar fields on uniform grids and generators for the input states.
//!
//! Amplitudes are cell-integrated coefficients, so a normalized field has
//! `sum |psi|^2 == 1` rather than a unit integral. Cell `(ix, iy)` lives at
//! `x = (ix - nx/2) * pitch`, `y = (iy - ny/2) * pitch`, with `y` pointing up;
//! for even sizes the central cell sits exactly on the optical axis.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{laguerre, pairwise_sum, wrap_phase};

/// Uniform scan grid: `nx * ny` cells of width `pitch` meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    pitch: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, pitch: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid(format!("grid {nx}x{ny} is too small, need at least 2x2")));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::invalid(format!("pitch must be positive and finite, got {pitch}")));
        }
        Ok(Self { nx, ny, pitch })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Total cell count N.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the cell on the optical axis.
    pub fn center(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }

    /// Row-major buffer index (y outer, x inner).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_of(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn contains(&self, ix: usize, iy: usize) -> bool {
        ix < self.nx && iy < self.ny
    }

    /// Physical coordinates of a cell relative to the grid center, in meters.
    pub fn coords(&self, ix: usize, iy: usize) -> (f64, f64) {
        let (cx, cy) = self.center();
        ((ix as f64 - cx as f64) * self.pitch, (iy as f64 - cy as f64) * self.pitch)
    }

    /// Largest side length, `max(nx, ny) * pitch`.
    pub fn extent(&self) -> f64 {
        self.nx.max(self.ny) as f64 * self.pitch
    }
}

/// The system state: a complex amplitude per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseWavefunction {
    grid: GridSpec,
    amps: Vec<Complex64>,
}

impl TransverseWavefunction {
    pub fn new(grid: GridSpec, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::invalid(format!(
                "amplitude buffer has {} entries, grid needs {}",
                amps.len(),
                grid.len()
            )));
        }
        if let Some(i) = amps.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite amplitude at index {i}")));
        }
        Ok(Self { grid, amps })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, amps: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f(x, y)` at every cell center (meters, relative to grid center).
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        let mut amps = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny() {
            for ix in 0..grid.nx() {
                let (x, y) = grid.coords(ix, iy);
                amps.push(f(x, y));
            }
        }
        Self::new(grid, amps)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amp(&self, ix: usize, iy: usize) -> Complex64 {
        self.amps[self.grid.index(ix, iy)]
    }

    /// `sum |psi|^2`.
    pub fn power(&self) -> f64 {
        let sq: Vec<f64> = self.amps.iter().map(|a| a.norm_sqr()).collect();
        pairwise_sum(&sq)
    }

    /// The zero-momentum amplitude `sum psi(x, y)`.
    pub fn psi_tilde(&self) -> Complex64 {
        pairwise_sum(&self.amps)
    }

    /// `<self|other> = sum conj(self) * other`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let terms: Vec<Complex64> = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).collect();
        Ok(pairwise_sum(&terms))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid(format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Rescales so that `sum |psi|^2 == 1`. Phases are untouched.
    pub fn normalize(&self) -> Result<Self> {
        let p = self.power();
        if p <= 0.0 || !p.is_finite() {
            return Err(Error::Degenerate("cannot normalize a zero field".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / p.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, amps: self.amps.iter().map(|a| a * c).collect() }
    }

    pub fn map(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Result<Self> {
        let amps = self.amps.iter().enumerate().map(|(i, &a)| f(i, a)).collect();
        Self::new(self.grid, amps)
    }

    /// Removes the global phase so that `psi_tilde` is real and non-negative.
    pub fn gauge_fixed(&self) -> Self {
        let t = self.psi_tilde();
        if t.norm() == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::from_polar(1.0, -t.arg()))
    }

    /// Multiplies every amplitude by `exp(i l phi)`, phi measured about the
    /// grid center. The central cell (phi undefined) is left unchanged.
    pub fn apply_vortex_plate(&self, l: i32) -> Self {
        if l == 0 {
            return self.clone();
        }
        let g = self.grid;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let (ix, iy) = g.cell_of(i);
                let (x, y) = g.coords(ix, iy);
                let phi = y.atan2(x);
                a * Complex64::from_polar(1.0, l as f64 * phi)
            })
            .collect();
        Self { grid: g, amps }
    }

    pub fn phases(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.im.atan2(a.re)).collect()
    }

    /// Phase winding number around the grid center; see [`phase_winding`].
    pub fn winding(&self, radius: usize) -> Result<f64> {
        phase_winding(&self.grid, &self.phases(), radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeKind {
    Gaussian,
    /// LG_{p,l}: azimuthal index `oam` (l) and radial index `radial` (p).
    LaguerreGaussian {
        oam: i32,
        radial: u32,
    },
    /// A complex mask (row-major, one entry per cell) under Gaussian illumination.
    Custom(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub kind: ModeKind,
    /// Beam waist w0 in meters.
    pub waist: f64,
    /// Beam axis relative to the grid center, meters.
    pub center: (f64, f64),
}

impl ModeSpec {
    pub fn gaussian(waist: f64) -> Self {
        Self { kind: ModeKind::Gaussian, waist, center: (0.0, 0.0) }
    }

    pub fn laguerre_gaussian(waist: f64, oam: i32, radial: u32) -> Self {
        Self { kind: ModeKind::LaguerreGaussian { oam, radial }, waist, center: (0.0, 0.0) }
    }

    pub fn custom(waist: f64, mask: Vec<Complex64>) -> Self {
        Self { kind: ModeKind::Custom(mask), waist, center: (0.0, 0.0) }
    }

    pub fn with_center(mut self, cx: f64, cy: f64) -> Self {
        self.center = (cx, cy);
        self
    }

    /// Default waist, one eighth of the grid width.
    pub fn default_waist(grid: &GridSpec) -> f64 {
        grid.nx() as f64 * grid.pitch() / 8.0
    }
}

/// Generates the normalized field for `spec` on `grid`.
pub fn make_mode(spec: &ModeSpec, grid: GridSpec) -> Result<TransverseWavefunction> {
    let w = spec.waist;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::invalid(format!("waist must be positive and finite, got {w}")));
    }
    let (cx, cy) = spec.center;
    if !(cx.is_finite() && cy.is_finite()) {
        return Err(Error::invalid("mode center must be finite"));
    }
    let envelope = |x: f64, y: f64| {
        let (dx, dy) = (x - cx, y - cy);
        (dx, dy, (-(dx * dx + dy * dy) / (w * w)).exp())
    };
    let field = match &spec.kind {
        ModeKind::Gaussian => TransverseWavefunction::from_fn(grid, |x, y| Complex64::new(envelope(x, y).2, 0.0))?,
        ModeKind::LaguerreGaussian { oam, radial } => {
            let l = *oam;
            let alpha = l.unsigned_abs() as f64;
            TransverseWavefunction::from_fn(grid, |x, y| {
                let (dx, dy, g) = envelope(x, y);
                let rho2 = 2.0 * (dx * dx + dy * dy) / (w * w);
                let radial_part = rho2.sqrt().powi(l.abs()) * laguerre(*radial, alpha, rho2) * g;
                let phi = dy.atan2(dx);
                Complex64::from_polar(1.0, l as f64 * phi) * radial_part
            })?
        }
        ModeKind::Custom(mask) => {
            if mask.len() != grid.len() {
                return Err(Error::invalid(format!("custom mask has {} cells, grid has {}", mask.len(), grid.len())));
            }
            let mut i = 0;
            TransverseWavefunction::from_fn(grid, |x, y| {
                let v = mask[i] * envelope(x, y).2;
                i += 1;
                v
            })?
        }
    };
    field.normalize()
}

/// Total wrapped phase accumulated counterclockwise around the square loop of
/// Chebyshev radius `radius` centered on the grid center, divided by 2 pi.
pub fn phase_winding(grid: &GridSpec, phase: &[f64], radius: usize) -> Result<f64> {
    if phase.len() != grid.len() {
        return Err(Error::invalid("phase map size does not match grid"));
    }
    let (cx, cy) = grid.center();
    if radius == 0 || radius > cx || radius > cy || cx + radius >= grid.nx() || cy + radius >= grid.ny() {
        return Err(Error::invalid(format!("loop radius {radius} does not fit the grid")));
    }
    let r = radius as isize;
    let (cx, cy) = (cx as isize, cy as isize);
    let mut path = Vec::with_capacity(8 * radius);
    for k in -r..r {
        path.push((cx + k, cy - r));
    }
    for k in -r..r {
        path.push((cx + r, cy + k));
    }
    for k in -r..r {
        path.push((cx - k, cy + r));
    }
    for k in -r..r {
        path.push((cx - r, cy - k));
    }
    let at = |(x, y): (isize, isize)| phase[grid.index(x as usize, y as usize)];
    let total: f64 = path.iter().zip(path.iter().cycle().skip(1)).map(|(&a, &b)| wrap_phase(at(b) - at(a))).sum();
    Ok(total / (2.0 * PI))
}
