//! Command functions behind the `wavetomo` binary.
//!
//! Settings are layered: built-in defaults, then `--config FILE`, then flags.
//! Every command validates the merged configuration before reading any input,
//! writes its outputs atomically into `--out`, and records the effective
//! configuration as `<command>.cfg` next to them.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{self, ExperimentConfig};
use crate::engine::{read_records_csv, scan, write_records_csv};
use crate::error::{Error, Result};
use crate::holography::{propagate_forward, propagate_inverse, reconstruct_object, ObjectOptions};
use crate::io::{grid_data, read_pgm, read_wfgrid, write_atomic, write_plot_data, write_wfgrid, MaskKind};
use crate::numeric::pairwise_sum;
use crate::reconstruct::{
    reconstruct_dst, reconstruct_dwt, score, Estimator, PsiTildeMode, QualityReport, ReconstructionReport,
    ReconstructionResult,
};
use crate::wavefield::{make_mode, GridSpec, TransverseWavefunction};

#[derive(Debug, Parser)]
#[command(name = "wavetomo", version, about = "Direct strong tomography of transverse photon fields")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Clone, Args)]
pub struct SharedFlags {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true)]
    pub ny: Option<usize>,
    #[arg(long = "pitch-um", global = true)]
    pub pitch_um: Option<f64>,
    /// gaussian | lg | custom
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Orbital angular momentum of an LG mode.
    #[arg(long = "l", global = true, allow_negative_numbers = true)]
    pub l: Option<i32>,
    #[arg(long, global = true)]
    pub radial: Option<u32>,
    #[arg(long = "waist-um", global = true)]
    pub waist_um: Option<f64>,
    /// Extra vortex plate charge applied to the prepared field.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub vortex: Option<i32>,
    /// PGM mask for `--mode custom`.
    #[arg(long, global = true)]
    pub mask: Option<PathBuf>,
    /// amplitude | phase
    #[arg(long = "mask-kind", global = true)]
    pub mask_kind: Option<String>,
    /// Coupling angle in radians.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// dst | dwt
    #[arg(long, global = true)]
    pub estimator: Option<String>,
    /// Photons per analyzer setting; 0 is noiseless.
    #[arg(long, global = true)]
    pub photons: Option<u64>,
    #[arg(long = "lambda-nm", global = true)]
    pub lambda_nm: Option<f64>,
    #[arg(long = "distance-mm", global = true)]
    pub distance_mm: Option<f64>,
    /// feynman | fresnel
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    #[arg(long = "pad-factor", global = true)]
    pub pad_factor: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a transverse mode and write `field.wfg`.
    Prepare,
    /// Scan a field and write `records.csv`.
    Measure { field: PathBuf },
    /// Invert pointer records into `reconstruction.wfg` plus report and plot data.
    Reconstruct {
        records: PathBuf,
        /// Ideal field used for scoring (and for the grid pitch).
        #[arg(long)]
        ideal: Option<PathBuf>,
        /// Known gauge constant; estimated from the data when absent.
        #[arg(long = "psi-tilde")]
        psi_tilde: Option<f64>,
    },
    /// Score a reconstructed field against an ideal one.
    Score { reconstruction: PathBuf, ideal: PathBuf },
    /// Propagation and holographic object recovery.
    Holo {
        #[command(subcommand)]
        op: HoloCommand,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum HoloCommand {
    /// Propagate an object-plane field to the detection plane.
    Forward {
        field: PathBuf,
        /// Expected output; its relative L2 distance is reported.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Back-propagate a detection-plane field (Fresnel kernel).
    Inverse {
        field: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Recover the transmission of a thin object.
    Object {
        /// Detection-plane field, e.g. a reconstruction.
        #[arg(long)]
        measured: PathBuf,
        /// Known object-plane illumination.
        #[arg(long)]
        input: PathBuf,
        /// PGM amplitude mask to correlate `|t|` against.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long = "mask-threshold")]
        mask_threshold: Option<f64>,
    },
}

impl SharedFlags {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            cfg.apply_text(&text)?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { cfg.$f = v; } )* };
        }
        take!(seed, out, nx, ny, pitch_um, l, radial, vortex, photons, lambda_nm, pad_factor);
        if let Some(v) = &self.mode {
            cfg.mode = config::parse_mode(v)?;
        }
        if let Some(v) = &self.estimator {
            cfg.estimator = config::parse_estimator(v)?;
        }
        if let Some(v) = &self.kernel {
            cfg.kernel = config::parse_kernel(v)?;
        }
        if let Some(v) = &self.mask_kind {
            cfg.mask_kind = config::parse_mask_kind(v)?;
        }
        if self.waist_um.is_some() {
            cfg.waist_um = self.waist_um;
        }
        if self.mask.is_some() {
            cfg.mask = self.mask.clone();
        }
        if self.theta.is_some() {
            cfg.theta = self.theta;
        }
        if self.distance_mm.is_some() {
            cfg.distance_mm = self.distance_mm;
        }
        Ok(cfg)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command line; returns a one-line summary for stdout.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = cli.shared.resolve()?;
    match &cli.command {
        Command::Prepare => cmd_prepare(&cfg).map(|p| p.display().to_string()),
        Command::Measure { field } => cmd_measure(&cfg, field).map(|p| p.display().to_string()),
        Command::Reconstruct { records, ideal, psi_tilde } => {
            let report = cmd_reconstruct(&cfg, records, ideal.as_deref(), *psi_tilde)?;
            Ok(to_json(&report)?.trim_end().to_string())
        }
        Command::Score { reconstruction, ideal } => {
            let q = cmd_score(&cfg, reconstruction, ideal)?;
            Ok(to_json(&q)?.trim_end().to_string())
        }
        Command::Holo { op } => {
            let report = cmd_holo(&cfg, op)?;
            Ok(to_json(&report)?.trim_end().to_string())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn prepare_out(cfg: &ExperimentConfig, command: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out)?;
    write_atomic(cfg.out.join(format!("{command}.cfg")), cfg.to_text().as_bytes())?;
    Ok(cfg.out.clone())
}

/// Generates the configured mode; writes `field.wfg`.
pub fn cmd_prepare(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mask = match &cfg.mask {
        Some(path) if cfg.mode == config::ModeName::Custom => Some(read_pgm(path)?.to_mask(&grid, cfg.mask_kind)?),
        _ => None,
    };
    let spec = cfg.mode_spec_with_mask(&grid, mask)?;
    let mut field = make_mode(&spec, grid)?;
    if cfg.vortex != 0 {
        field = field.apply_vortex_plate(cfg.vortex);
    }
    let out = prepare_out(cfg, "prepare")?.join("field.wfg");
    write_wfgrid(&out, &field)?;
    Ok(out)
}

/// Scans the field on its own grid; writes `records.csv`.
pub fn cmd_measure(cfg: &ExperimentConfig, field: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let coupling = cfg.coupling()?;
    let f = read_wfgrid(field)?;
    let records = scan(&f, &coupling, cfg.photons, cfg.seed)?;
    let mut buf = Vec::new();
    write_records_csv(&records, &mut buf)?;
    let out = prepare_out(cfg, "measure")?.join("records.csv");
    write_atomic(&out, &buf)?;
    Ok(out)
}

/// Inverts records into `reconstruction.wfg`, `report.json`, `density.dat`
/// and `phase.dat`.
///
/// The grid comes from `ideal` when given, otherwise from the largest cell
/// index in the records together with the configured pitch.
pub fn cmd_reconstruct(
    cfg: &ExperimentConfig,
    records: &Path,
    ideal: Option<&Path>,
    psi_tilde: Option<f64>,
) -> Result<ReconstructionReport> {
    cfg.validate()?;
    let theta = cfg.theta_for_estimator()?;
    if cfg.estimator == Estimator::Dst && (theta - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::invalid(format!("the dst estimator needs theta = pi/2, got {theta}")));
    }
    let psi_mode = match psi_tilde {
        Some(p) if p.is_finite() && p > 0.0 => PsiTildeMode::Oracle(p),
        Some(p) => return Err(Error::invalid(format!("psi-tilde must be positive, got {p}"))),
        None => PsiTildeMode::SelfConsistent,
    };

    let recs = read_records_csv(std::io::BufReader::new(fs::File::open(records)?))?;
    let ideal = ideal.map(read_wfgrid).transpose()?;
    let grid = match &ideal {
        Some(f) => *f.grid(),
        None => {
            let nx = recs.iter().map(|r| r.cell.0 + 1).max().unwrap_or(0);
            let ny = recs.iter().map(|r| r.cell.1 + 1).max().unwrap_or(0);
            GridSpec::new(nx, ny, cfg.pitch_um * 1e-6)?
        }
    };
    let rec = match cfg.estimator {
        Estimator::Dst => reconstruct_dst(&recs, &grid, psi_mode)?,
        Estimator::Dwt => reconstruct_dwt(&recs, &grid, theta, psi_mode)?,
    };
    let quality = ideal.as_ref().map(|f| score(&rec, f)).transpose()?;
    let report = ReconstructionReport::new(&rec, quality.as_ref());

    let dir = prepare_out(cfg, "reconstruct")?;
    write_wfgrid(dir.join("reconstruction.wfg"), &rec.to_wavefunction()?)?;
    write_atomic(dir.join("report.json"), to_json(&report)?.as_bytes())?;
    write_plot_data(&dir, &rec)?;
    Ok(report)
}

/// Scores a stored reconstruction; writes `score.json`.
pub fn cmd_score(cfg: &ExperimentConfig, reconstruction: &Path, ideal: &Path) -> Result<QualityReport> {
    cfg.validate()?;
    let rec_field = read_wfgrid(reconstruction)?;
    let ideal = read_wfgrid(ideal)?;
    let psi = rec_field.psi_tilde().norm();
    let rec = ReconstructionResult::from_wavefunction(&rec_field, psi, cfg.estimator);
    let q = score(&rec, &ideal)?;
    let dir = prepare_out(cfg, "score")?;
    write_atomic(dir.join("score.json"), to_json(&q)?.as_bytes())?;
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoloReport {
    pub operation: String,
    pub output: String,
    pub max_phase_step: f64,
    pub paraxial: bool,
    /// `||out - reference|| / ||reference||` when a reference was given.
    pub relative_l2: Option<f64>,
    pub valid_cells: Option<usize>,
    pub correlation: Option<f64>,
}

pub fn relative_l2(a: &TransverseWavefunction, reference: &TransverseWavefunction) -> Result<f64> {
    a.check_same_grid(reference)?;
    let diff: Vec<f64> = a.amps().iter().zip(reference.amps()).map(|(x, y)| (x - y).norm_sqr()).collect();
    let denom = reference.power();
    if denom == 0.0 {
        return Err(Error::Degenerate("reference field is zero".into()));
    }
    Ok((pairwise_sum(&diff) / denom).sqrt())
}

/// Runs one holography operation; outputs `forward.wfg`, `inverse.wfg` or
/// `transmission.wfg` plus a JSON report named after the operation.
pub fn cmd_holo(cfg: &ExperimentConfig, op: &HoloCommand) -> Result<HoloReport> {
    cfg.validate()?;
    let spec = cfg.propagation()?;
    let (name, field, reference, extra) = match op {
        HoloCommand::Forward { field, reference } => {
            let f = read_wfgrid(field)?;
            ("forward", propagate_forward(&f, &spec)?, reference, None)
        }
        HoloCommand::Inverse { field, reference } => {
            let f = read_wfgrid(field)?;
            ("inverse", propagate_inverse(&f, &spec)?, reference, None)
        }
        HoloCommand::Object { measured, input, truth, mask_threshold } => {
            let opts =
                ObjectOptions { mask_threshold: mask_threshold.unwrap_or(ObjectOptions::default().mask_threshold) };
            let measured = read_wfgrid(measured)?;
            let input = read_wfgrid(input)?;
            let obj = reconstruct_object(&measured, &input, &spec, &opts)?;
            let correlation = match truth {
                Some(path) => {
                    let mask = read_pgm(path)?.to_mask(&obj.grid, MaskKind::Amplitude)?;
                    let truth: Vec<f64> = mask.iter().map(|m| m.re).collect();
                    Some(obj.amplitude_correlation(&truth)?)
                }
                None => None,
            };
            let t = TransverseWavefunction::new(obj.grid, obj.transmission_map.clone())?;
            ("object", t, &None, Some((obj, correlation)))
        }
    };
    let grid = *field.grid();
    let relative = reference.as_ref().map(|p| relative_l2(&field, &read_wfgrid(p)?)).transpose()?;

    let dir = prepare_out(cfg, &format!("holo_{name}"))?;
    let output = if extra.is_some() { "transmission.wfg".to_string() } else { format!("{name}.wfg") };
    write_wfgrid(dir.join(&output), &field)?;
    let (valid_cells, correlation) = match &extra {
        Some((obj, corr)) => {
            let amp: Vec<f64> = obj.transmission_map.iter().map(|t| t.norm()).collect();
            let phase: Vec<f64> = obj.transmission_map.iter().map(|t| t.arg()).collect();
            write_atomic(dir.join("transmission_amp.dat"), grid_data(&grid, &amp).as_bytes())?;
            write_atomic(dir.join("transmission_phase.dat"), grid_data(&grid, &phase).as_bytes())?;
            (Some(obj.valid_count()), *corr)
        }
        None => (None, None),
    };
    let report = HoloReport {
        operation: name.to_string(),
        output,
        max_phase_step: spec.max_phase_step(&grid),
        paraxial: spec.is_paraxial_for(&grid),
        relative_l2: relative,
        valid_cells,
        correlation,
    };
    write_atomic(dir.join(format!("holo_{name}.json")), to_json(&report)?.as_bytes())?;
    Ok(report)
}
