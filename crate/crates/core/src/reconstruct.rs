//! Wavefunction reconstruction from pointer readout.
//!
//! Strong (exact) inversion, with `psi_t` the gauge constant `sum psi > 0`:
//!
//! ```text
//! Re psi = N / (2 psi_t) * (P+ + 2 P1 - P-)
//! Im psi = N / (2 psi_t) * (PL - PR)
//! ```
//!
//! The weak-value estimator drops the `2 P1` term and divides by the coupling
//! angle, which is only correct to first order in theta.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::ReadoutRecord;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::pointer::{Basis, PointerProjector, ProjectorMap};
use crate::wavefield::{GridSpec, TransverseWavefunction};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "DST")]
    Dst,
    #[serde(rename = "DWT")]
    Dwt,
}

/// How the gauge constant `psi_t` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiTildeMode {
    /// Known from the prepared state.
    Oracle(f64),
    /// Chosen so that the reconstructed density sums to one.
    SelfConsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub grid: GridSpec,
    pub re_map: Vec<f64>,
    pub im_map: Vec<f64>,
    pub density_map: Vec<f64>,
    /// atan2(Im, Re), in (-pi, pi].
    pub phase_map: Vec<f64>,
    pub psi_tilde: f64,
    pub mode: Estimator,
    /// Cells where some analyzer setting recorded zero photons.
    pub flagged_cells: Vec<(usize, usize)>,
}

impl ReconstructionResult {
    pub fn to_wavefunction(&self) -> Result<TransverseWavefunction> {
        let amps = self.re_map.iter().zip(&self.im_map).map(|(&re, &im)| Complex64::new(re, im)).collect();
        TransverseWavefunction::new(self.grid, amps)
    }

    /// Builds a result from a complex field, e.g. one read back from disk.
    pub fn from_wavefunction(f: &TransverseWavefunction, psi_tilde: f64, mode: Estimator) -> Self {
        let re_map: Vec<f64> = f.amps().iter().map(|a| a.re).collect();
        let im_map: Vec<f64> = f.amps().iter().map(|a| a.im).collect();
        finish(*f.grid(), re_map, im_map, psi_tilde, mode, Vec::new())
    }
}

fn finish(
    grid: GridSpec,
    re_map: Vec<f64>,
    im_map: Vec<f64>,
    psi_tilde: f64,
    mode: Estimator,
    flagged_cells: Vec<(usize, usize)>,
) -> ReconstructionResult {
    let density_map = re_map.iter().zip(&im_map).map(|(r, i)| r * r + i * i).collect();
    let phase_map = re_map.iter().zip(&im_map).map(|(r, i)| i.atan2(*r)).collect();
    ReconstructionResult { grid, re_map, im_map, density_map, phase_map, psi_tilde, mode, flagged_cells }
}

/// Orders records row-major and checks that every cell appears exactly once.
fn arrange<'a>(records: &'a [ReadoutRecord], grid: &GridSpec) -> Result<Vec<&'a ReadoutRecord>> {
    let mut slots: Vec<Option<&ReadoutRecord>> = vec![None; grid.len()];
    for r in records {
        let (ix, iy) = r.cell;
        if !grid.contains(ix, iy) {
            return Err(Error::invalid(format!("record for cell {:?} lies outside the grid", r.cell)));
        }
        let slot = &mut slots[grid.index(ix, iy)];
        if slot.is_some() {
            return Err(Error::invalid(format!("duplicate record for cell {:?}", r.cell)));
        }
        *slot = Some(r);
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::invalid(format!("missing record for cell {:?}", grid.cell_of(i)))))
        .collect()
}

/// Probabilities to feed the inversion: exact ones for noiseless records,
/// otherwise `count / budget`, i.e. the in-basis frequency scaled by the
/// sampled post-selection weight. The flag marks a basis with no photons.
fn effective_probs(r: &ReadoutRecord) -> Result<(ProjectorMap<f64>, bool)> {
    let bad = |what: &str| Error::invalid(format!("cell {:?}: {what}", r.cell));
    match &r.counts {
        None => {
            if r.probs.0.iter().any(|p| !p.is_finite()) {
                return Err(bad("non-finite probability"));
            }
            Ok((r.probs, false))
        }
        Some(counts) => {
            if r.photons_per_setting == 0 {
                return Err(bad("counts present but photon budget is zero"));
            }
            let budget = r.photons_per_setting as f64;
            let mut probs = ProjectorMap::<f64>::default();
            let mut flagged = false;
            for basis in Basis::ALL {
                let [a, b] = basis.projectors();
                if counts[a] + counts[b] == 0 {
                    flagged = true;
                    continue;
                }
                probs[a] = counts[a] as f64 / budget;
                probs[b] = counts[b] as f64 / budget;
            }
            Ok((probs, flagged))
        }
    }
}

fn reconstruct_with(
    records: &[ReadoutRecord],
    grid: &GridSpec,
    psi_mode: PsiTildeMode,
    mode: Estimator,
    raw: impl Fn(&ProjectorMap<f64>) -> (f64, f64) + Sync,
) -> Result<ReconstructionResult> {
    let ordered = arrange(records, grid)?;
    let cells: Vec<((f64, f64), bool)> =
        ordered.par_iter().map(|r| effective_probs(r).map(|(p, flag)| (raw(&p), flag))).collect::<Result<_>>()?;

    let psi_tilde = match psi_mode {
        PsiTildeMode::Oracle(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid(format!("oracle psi_tilde must be positive, got {t}")));
            }
            t
        }
        PsiTildeMode::SelfConsistent => {
            let sq: Vec<f64> = cells.iter().map(|((r, i), _)| r * r + i * i).collect();
            let t = pairwise_sum(&sq).sqrt();
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Degenerate("readout carries no signal; psi_tilde estimate is not positive".into()));
            }
            t
        }
    };

    let re_map = cells.iter().map(|((r, _), _)| r / psi_tilde).collect();
    let im_map = cells.iter().map(|((_, i), _)| i / psi_tilde).collect();
    let flagged = cells.iter().enumerate().filter(|(_, (_, f))| *f).map(|(i, _)| grid.cell_of(i)).collect();
    Ok(finish(*grid, re_map, im_map, psi_tilde, mode, flagged))
}

/// Exact strong-measurement inversion.
pub fn reconstruct_dst(
    records: &[ReadoutRecord],
    grid: &GridSpec,
    psi_mode: PsiTildeMode,
) -> Result<ReconstructionResult> {
    use PointerProjector::*;
    let half_n = grid.len() as f64 / 2.0;
    reconstruct_with(records, grid, psi_mode, Estimator::Dst, |p| {
        (half_n * (p[Plus] + 2.0 * p[P1] - p[Minus]), half_n * (p[Left] - p[Right]))
    })
}

/// First-order weak-value estimate for records taken at coupling `theta`.
pub fn reconstruct_dwt(
    records: &[ReadoutRecord],
    grid: &GridSpec,
    theta: f64,
    psi_mode: PsiTildeMode,
) -> Result<ReconstructionResult> {
    use PointerProjector::*;
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::invalid(format!("coupling angle must lie in (0, pi/2], got {theta}")));
    }
    let scale = grid.len() as f64 / (2.0 * theta);
    reconstruct_with(records, grid, psi_mode, Estimator::Dwt, |p| {
        (scale * (p[Plus] - p[Minus]), scale * (p[Left] - p[Right]))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Coefficient of determination of the density against the ideal density.
    pub r_square: f64,
    /// `|<ideal|rec>|^2` of the normalized fields.
    pub fidelity: f64,
    pub rmse_re: f64,
    pub rmse_im: f64,
}

/// Scores a reconstruction against the ideal field (normalized and gauge-fixed
/// here, so any normalization or global phase of `ideal` is irrelevant).
pub fn score(rec: &ReconstructionResult, ideal: &TransverseWavefunction) -> Result<QualityReport> {
    if rec.grid != *ideal.grid() {
        return Err(Error::invalid(format!("grid mismatch: reconstruction {:?}, ideal {:?}", rec.grid, ideal.grid())));
    }
    let ideal = ideal.normalize()?.gauge_fixed();
    let n = ideal.grid().len() as f64;
    let ideal_density: Vec<f64> = ideal.amps().iter().map(|a| a.norm_sqr()).collect();

    let mean = pairwise_sum(&ideal_density) / n;
    let tot: Vec<f64> = ideal_density.iter().map(|d| (d - mean) * (d - mean)).collect();
    let res: Vec<f64> = ideal_density.iter().zip(&rec.density_map).map(|(d, e)| (d - e) * (d - e)).collect();
    let (ss_tot, ss_res) = (pairwise_sum(&tot), pairwise_sum(&res));
    let r_square = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };

    let rec_field = rec.to_wavefunction()?;
    let rec_power = rec_field.power();
    let fidelity =
        if rec_power > 0.0 { (ideal.inner(&rec_field)?.norm_sqr() / rec_power).clamp(0.0, 1.0) } else { 0.0 };

    let dre: Vec<f64> = ideal.amps().iter().zip(&rec.re_map).map(|(a, r)| (a.re - r).powi(2)).collect();
    let dim: Vec<f64> = ideal.amps().iter().zip(&rec.im_map).map(|(a, i)| (a.im - i).powi(2)).collect();
    Ok(QualityReport {
        r_square,
        fidelity,
        rmse_re: (pairwise_sum(&dre) / n).sqrt(),
        rmse_im: (pairwise_sum(&dim) / n).sqrt(),
    })
}

/// JSON sidecar written next to a reconstructed WFGRID.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub psi_tilde: f64,
    pub mode: Estimator,
    pub r_square: Option<f64>,
    pub fidelity: Option<f64>,
}

impl ReconstructionReport {
    pub fn new(rec: &ReconstructionResult, quality: Option<&QualityReport>) -> Self {
        Self {
            psi_tilde: rec.psi_tilde,
            mode: rec.mode,
            r_square: quality.map(|q| q.r_square),
            fidelity: quality.map(|q| q.fidelity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{scan, CouplingConfig};
    use crate::wavefield::{make_mode, ModeSpec};

    fn uniform2() -> TransverseWavefunction {
        let g = GridSpec::new(2, 2, 1e-4).unwrap();
        TransverseWavefunction::new(g, vec![Complex64::new(0.5, 0.0); 4]).unwrap()
    }

    fn gaussian(n: usize) -> TransverseWavefunction {
        let g = GridSpec::new(n, n, 1e-4).unwrap();
        make_mode(&ModeSpec::gaussian(ModeSpec::default_waist(&g)), g).unwrap()
    }

    #[test]
    fn uniform_two_by_two_inverts_to_one_half() {
        let f = uniform2();
        let recs = scan(&f, &CouplingConfig::strong(), 0, 0).unwrap();
        for mode in [PsiTildeMode::Oracle(2.0), PsiTildeMode::SelfConsistent] {
            let rec = reconstruct_dst(&recs, f.grid(), mode).unwrap();
            for (re, im) in rec.re_map.iter().zip(&rec.im_map) {
                assert!((re - 0.5).abs() < 1e-15);
                assert!(im.abs() < 1e-15);
            }
            assert!((rec.psi_tilde - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn noiseless_gaussian_is_exact() {
        let f = gaussian(16);
        let recs = scan(&f, &CouplingConfig::strong(), 0, 0).unwrap();
        let rec = reconstruct_dst(&recs, f.grid(), PsiTildeMode::SelfConsistent).unwrap();
        let q = score(&rec, &f).unwrap();
        assert!(q.fidelity >= 1.0 - 1e-10);
        assert!((q.r_square - 1.0).abs() < 1e-10);
        assert!(q.rmse_re < 1e-12 && q.rmse_im < 1e-12);
    }

    #[test]
    fn zero_amplitude_cell_reconstructs_to_zero() {
        let g = GridSpec::new(16, 16, 1e-4).unwrap();
        let f = make_mode(&ModeSpec::gaussian(4e-4), g)
            .unwrap()
            .map(|i, a| if i == g.index(3, 4) { Complex64::new(0.0, 0.0) } else { a })
            .unwrap();
        let recs = scan(&f, &CouplingConfig::strong(), 0, 0).unwrap();
        let rec = reconstruct_dst(&recs, &g, PsiTildeMode::Oracle(f.psi_tilde().norm())).unwrap();
        let i = g.index(3, 4);
        assert!(rec.re_map[i].abs() < 1e-15);
        assert!(rec.im_map[i].abs() < 1e-15);
    }

    #[test]
    fn density_and_phase_consistency() {
        let f = gaussian(16).apply_vortex_plate(1).map(|i, a| a + Complex64::new(0.002, 0.0001 * i as f64)).unwrap();
        let recs = scan(&f, &CouplingConfig::strong(), 0, 0).unwrap();
        let rec = reconstruct_dst(&recs, f.grid(), PsiTildeMode::SelfConsistent).unwrap();
        for i in 0..rec.re_map.len() {
            let (re, im, d, ph) = (rec.re_map[i], rec.im_map[i], rec.density_map[i], rec.phase_map[i]);
            assert_eq!(d, re * re + im * im);
            if d > 1e-15 {
                let z = Complex64::from_polar(d.sqrt(), ph);
                assert!((z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12);
            }
            assert!(ph > -std::f64::consts::PI && ph <= std::f64::consts::PI);
        }
    }

    #[test]
    fn dwt_real_field_has_no_imaginary_part() {
        let f = gaussian(16);
        let theta = 1e-3;
        let recs = scan(&f, &CouplingConfig::weak(theta).unwrap(), 0, 0).unwrap();
        let rec = reconstruct_dwt(&recs, f.grid(), theta, PsiTildeMode::SelfConsistent).unwrap();
        assert!(rec.im_map.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dwt_bias_grows_with_theta() {
        let f = gaussian(16);
        let fid = |theta: f64| {
            let recs = scan(&f, &CouplingConfig::weak(theta).unwrap(), 0, 0).unwrap();
            let rec = reconstruct_dwt(&recs, f.grid(), theta, PsiTildeMode::SelfConsistent).unwrap();
            score(&rec, &f).unwrap().fidelity
        };
        let (small, large) = (fid(0.05), fid(std::f64::consts::FRAC_PI_2));
        assert!(small >= 0.99);
        assert!(large < small);
    }

    #[test]
    fn missing_duplicate_and_foreign_cells_are_rejected() {
        let f = uniform2();
        let recs = scan(&f, &CouplingConfig::strong(), 0, 0).unwrap();
        let g = *f.grid();
        assert!(reconstruct_dst(&recs[..3], &g, PsiTildeMode::SelfConsistent).is_err());
        let mut dup = recs.clone();
        dup[3].cell = (0, 0);
        assert!(reconstruct_dst(&dup, &g, PsiTildeMode::SelfConsistent).is_err());
        let mut far = recs.clone();
        far[0].cell = (5, 5);
        assert!(reconstruct_dst(&far, &g, PsiTildeMode::SelfConsistent).is_err());
        let mut nan = recs;
        nan[1].probs[PointerProjector::Plus] = f64::NAN;
        assert!(reconstruct_dst(&nan, &g, PsiTildeMode::SelfConsistent).is_err());
    }

    #[test]
    fn bad_oracle_and_silent_readout_are_rejected() {
        let f = uniform2();
        let mut recs = scan(&f, &CouplingConfig::strong(), 0, 0).unwrap();
        assert!(reconstruct_dst(&recs, f.grid(), PsiTildeMode::Oracle(0.0)).is_err());
        for r in &mut recs {
            r.probs = ProjectorMap::default();
        }
        assert!(matches!(reconstruct_dst(&recs, f.grid(), PsiTildeMode::SelfConsistent), Err(Error::Degenerate(_))));
    }

    #[test]
    fn zero_count_basis_is_flagged_not_dropped() {
        let f = gaussian(8);
        let mut recs = scan(&f, &CouplingConfig::strong(), 1000, 1).unwrap();
        let c = recs[5].counts.as_mut().unwrap();
        c[PointerProjector::Left] = 0;
        c[PointerProjector::Right] = 0;
        let rec = reconstruct_dst(&recs, f.grid(), PsiTildeMode::SelfConsistent).unwrap();
        assert_eq!(rec.flagged_cells, vec![f.grid().cell_of(5)]);
        assert_eq!(rec.re_map.len(), 64);
        assert_eq!(rec.im_map[5], 0.0);
    }

    #[test]
    fn score_identity_and_grid_mismatch() {
        let f = gaussian(8);
        let rec = ReconstructionResult::from_wavefunction(&f.gauge_fixed(), 1.0, Estimator::Dst);
        let q = score(&rec, &f).unwrap();
        assert!((q.r_square - 1.0).abs() < 1e-14);
        assert!((q.fidelity - 1.0).abs() < 1e-14);
        assert!(score(&rec, &gaussian(4)).is_err());
    }

    #[test]
    fn report_serializes_with_expected_keys() {
        let f = gaussian(4);
        let rec = ReconstructionResult::from_wavefunction(&f, 1.5, Estimator::Dwt);
        let q = score(&rec, &f).unwrap();
        let json = serde_json::to_value(ReconstructionReport::new(&rec, Some(&q))).unwrap();
        assert_eq!(json["mode"], "DWT");
        assert_eq!(json["psi_tilde"], 1.5);
        assert!(json["r_square"].is_number() && json["fidelity"].is_number());
        let bare = serde_json::to_value(ReconstructionReport::new(&rec, None)).unwrap();
        assert!(bare["r_square"].is_null());
    }
}
