//! Cell-local strong coupling, zero-momentum post-selection and pointer readout.
//!
//! Coupling a scan cell `c` with strength `theta` applies
//! `exp(-i theta |c><c| (x) sigma_y)` to `|psi> (x) |0>`. Projecting the system
//! onto `|p0> = sum |x,y> / sqrt(N)` leaves the pointer in
//!
//! ```text
//! |phi> = ( psi_t |0> + psi_c [ (cos theta - 1)|0> + sin theta |1> ] ) / sqrt(N)
//! ```
//!
//! where `psi_t = sum psi` is made real and non-negative by a global phase.
//! At `theta = pi/2` this is `((psi_t - psi_c)|0> + psi_c|1>) / sqrt(N)`.

use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::pointer::{readout_probs, Basis, PointerProjector, PointerState, ProjectorMap};
use crate::wavefield::TransverseWavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Exact strong coupling, read out with the exact inversion.
    StrongExact,
    /// Weak-value readout, first order in theta.
    WeakFirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    theta: f64,
    mode: CouplingMode,
}

impl CouplingConfig {
    pub fn new(theta: f64, mode: CouplingMode) -> Result<Self> {
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(Error::invalid(format!("coupling angle must lie in (0, pi/2], got {theta}")));
        }
        Ok(Self { theta, mode })
    }

    /// theta = pi/2, the projective position measurement.
    pub fn strong() -> Self {
        Self { theta: FRAC_PI_2, mode: CouplingMode::StrongExact }
    }

    pub fn weak(theta: f64) -> Result<Self> {
        Self::new(theta, CouplingMode::WeakFirstOrder)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }
}

/// Probabilities and (optionally) sampled photon counts for one scan cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutRecord {
    pub cell: (usize, usize),
    /// Unnormalized: each basis pair sums to the post-selection weight.
    pub probs: ProjectorMap<f64>,
    pub counts: Option<ProjectorMap<u64>>,
    /// Photons sent per analyzer setting; 0 means noiseless.
    pub photons_per_setting: u64,
}

impl ReadoutRecord {
    /// Post-selection weight `|| |phi> ||^2`.
    pub fn weight(&self) -> f64 {
        let (a, b) = self.probs.pair(Basis::Computational);
        a + b
    }
}

/// Zero-momentum amplitude of `f`, rejected when it cannot be distinguished
/// from summation round-off.
pub(crate) fn postselectable_psi_tilde(f: &TransverseWavefunction) -> Result<Complex64> {
    let t = f.psi_tilde();
    let abs: Vec<f64> = f.amps().iter().map(|a| a.norm()).collect();
    let scale = pairwise_sum(&abs);
    let n = f.grid().len() as f64;
    let floor = (n.log2() + 1.0) * f64::EPSILON * scale;
    if t.norm().is_nan() || t.norm() <= floor {
        return Err(Error::Degenerate(format!(
            "zero-momentum amplitude |sum psi| = {:.3e} is numerically zero; \
             post-selection on p = 0 carries no signal for this field",
            t.norm()
        )));
    }
    Ok(t)
}

fn trig(theta: f64) -> (f64, f64) {
    if theta == FRAC_PI_2 {
        (0.0, 1.0)
    } else if theta == 0.0 {
        (1.0, 0.0)
    } else {
        (theta.cos(), theta.sin())
    }
}

/// Gauge-fixed view of a field ready for repeated cell couplings.
struct Postselection<'a> {
    field: &'a TransverseWavefunction,
    gauge: Complex64,
    psi_tilde: f64,
    inv_sqrt_n: f64,
}

impl<'a> Postselection<'a> {
    fn new(field: &'a TransverseWavefunction) -> Result<Self> {
        let t = postselectable_psi_tilde(field)?;
        Ok(Self {
            field,
            gauge: Complex64::from_polar(1.0, -t.arg()),
            psi_tilde: t.norm(),
            inv_sqrt_n: 1.0 / (field.grid().len() as f64).sqrt(),
        })
    }

    fn pointer(&self, cell: (usize, usize), theta: f64) -> PointerState {
        let (cos, sin) = trig(theta);
        let psi_c = self.field.amp(cell.0, cell.1) * self.gauge;
        let a0 = (psi_c * (cos - 1.0) + self.psi_tilde) * self.inv_sqrt_n;
        let a1 = psi_c * sin * self.inv_sqrt_n;
        PointerState::new(a0, a1)
    }
}

fn check_cell(f: &TransverseWavefunction, cell: (usize, usize)) -> Result<()> {
    if !f.grid().contains(cell.0, cell.1) {
        return Err(Error::invalid(format!("cell {:?} outside {}x{} grid", cell, f.grid().nx(), f.grid().ny())));
    }
    Ok(())
}

/// Post-selected (unnormalized) pointer state after coupling `cell`.
pub fn couple_and_postselect(
    f: &TransverseWavefunction,
    cell: (usize, usize),
    cfg: &CouplingConfig,
) -> Result<PointerState> {
    check_cell(f, cell)?;
    Ok(Postselection::new(f)?.pointer(cell, cfg.theta))
}

/// The exact pointer for a weak-measurement run at strength `theta`. The
/// first-order approximation lives in [`crate::reconstruct::reconstruct_dwt`],
/// so its bias can be measured against the true field. `theta = 0` is allowed
/// and yields the uncoupled pointer.
pub fn dwt_pointer(f: &TransverseWavefunction, cell: (usize, usize), theta: f64) -> Result<PointerState> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid(format!("coupling angle must lie in [0, pi/2], got {theta}")));
    }
    check_cell(f, cell)?;
    Ok(Postselection::new(f)?.pointer(cell, theta))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a root seed and a key path.
pub fn derive_seed(root: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(root), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Samples detector counts for the three analyzer settings. Per setting the
/// number of post-selected photons is Poisson with mean
/// `photons_per_setting * weight`, split binomially between the two outcomes.
pub fn sample_counts(probs: &ProjectorMap<f64>, photons_per_setting: u64, seed: u64) -> ProjectorMap<u64> {
    let mut counts = ProjectorMap::<u64>::default();
    if photons_per_setting == 0 {
        return counts;
    }
    for (b, basis) in Basis::ALL.into_iter().enumerate() {
        let [pa, pb] = basis.projectors();
        let (wa, wb) = (probs[pa].max(0.0), probs[pb].max(0.0));
        let w = wa + wb;
        if w.is_nan() || w <= 0.0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b as u64]));
        let mean = photons_per_setting as f64 * w;
        let total = match Poisson::new(mean) {
            Ok(d) => d.sample(&mut rng) as u64,
            Err(_) => 0,
        };
        let frac = (wa / w).clamp(0.0, 1.0);
        let na = Binomial::new(total, frac).map(|d| d.sample(&mut rng)).unwrap_or(0);
        counts[pa] = na;
        counts[pb] = total - na;
    }
    counts
}

/// Measures every cell on a fresh ensemble, row-major. Cells run in parallel;
/// each draws from a stream keyed by `(seed, ix, iy)`, so output does not
/// depend on scheduling.
pub fn scan(
    f: &TransverseWavefunction,
    cfg: &CouplingConfig,
    photons_per_setting: u64,
    seed: u64,
) -> Result<Vec<ReadoutRecord>> {
    let post = Postselection::new(f)?;
    let grid = *f.grid();
    let theta = cfg.theta;
    let records = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let cell = grid.cell_of(i);
            let probs = readout_probs(&post.pointer(cell, theta));
            let counts = (photons_per_setting > 0).then(|| {
                let cell_seed = derive_seed(seed, &[cell.0 as u64, cell.1 as u64]);
                sample_counts(&probs, photons_per_setting, cell_seed)
            });
            ReadoutRecord { cell, probs, counts, photons_per_setting }
        })
        .collect();
    Ok(records)
}

pub const CSV_HEADER: &str = "ix,iy,w_plus,w_minus,w_0,w_1,w_L,w_R,n_plus,n_minus,n_0,n_1,n_L,n_R,budget";

const CSV_ORDER: [PointerProjector; 6] = [
    PointerProjector::Plus,
    PointerProjector::Minus,
    PointerProjector::P0,
    PointerProjector::P1,
    PointerProjector::Left,
    PointerProjector::Right,
];

pub fn write_records_csv<W: Write>(records: &[ReadoutRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        write!(out, "{},{}", r.cell.0, r.cell.1)?;
        for p in CSV_ORDER {
            write!(out, ",{:.16e}", r.probs[p])?;
        }
        for p in CSV_ORDER {
            match &r.counts {
                Some(c) => write!(out, ",{}", c[p])?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out, ",{}", r.photons_per_setting)?;
    }
    Ok(())
}

pub fn read_records_csv<R: BufRead>(input: R) -> Result<Vec<ReadoutRecord>> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::format("empty records file"))??;
    if header.trim_end() != CSV_HEADER {
        return Err(Error::format(format!("unexpected records header: {header}")));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::format(format!("records line {}: {what}", lineno + 2));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 15 {
            return Err(bad(&format!("expected 15 columns, found {}", cols.len())));
        }
        let ix = cols[0].parse().map_err(|_| bad("bad ix"))?;
        let iy = cols[1].parse().map_err(|_| bad("bad iy"))?;
        let mut probs = ProjectorMap::<f64>::default();
        for (k, p) in CSV_ORDER.into_iter().enumerate() {
            let v: f64 = cols[2 + k].parse().map_err(|_| bad("bad probability"))?;
            if !v.is_finite() {
                return Err(bad("non-finite probability"));
            }
            probs[p] = v;
        }
        let count_cols = &cols[8..14];
        let counts = if count_cols.iter().all(|c| c.is_empty()) {
            None
        } else {
            let mut c = ProjectorMap::<u64>::default();
            for (k, p) in CSV_ORDER.into_iter().enumerate() {
                c[p] = count_cols[k].parse().map_err(|_| bad("bad count"))?;
            }
            Some(c)
        };
        let photons_per_setting = cols[14].parse().map_err(|_| bad("bad budget"))?;
        records.push(ReadoutRecord { cell: (ix, iy), probs, counts, photons_per_setting });
    }
    Ok(records)
}
