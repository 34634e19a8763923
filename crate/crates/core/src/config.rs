//! Experiment configuration as a flat `key = value` text file.
//!
//! Lines starting with `#` are comments. Keys mirror the command-line flags
//! with dashes replaced by underscores (`pitch_um`, `lambda_nm`, ...). Unset
//! optional keys are simply absent.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::engine::{CouplingConfig, CouplingMode};
use crate::error::{Error, Result};
use crate::holography::{Kernel, PropagationSpec};
use crate::io::MaskKind;
use crate::reconstruct::Estimator;
use crate::wavefield::{GridSpec, ModeKind, ModeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeName {
    Gaussian,
    Lg,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nx: usize,
    pub ny: usize,
    pub pitch_um: f64,
    pub mode: ModeName,
    pub l: i32,
    pub radial: u32,
    pub waist_um: Option<f64>,
    pub center_x_um: f64,
    pub center_y_um: f64,
    /// Vortex plate charge applied after mode generation (0 = none).
    pub vortex: i32,
    pub mask: Option<PathBuf>,
    pub mask_kind: MaskKind,
    /// Coupling angle in radians.
    pub theta: Option<f64>,
    pub estimator: Estimator,
    pub photons: u64,
    pub seed: u64,
    pub lambda_nm: f64,
    pub distance_mm: Option<f64>,
    pub kernel: Kernel,
    pub pad_factor: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            // 10 x 10 SLM pixels of 12.5 um per scan cell.
            pitch_um: 125.0,
            mode: ModeName::Gaussian,
            l: 1,
            radial: 0,
            waist_um: None,
            center_x_um: 0.0,
            center_y_um: 0.0,
            vortex: 0,
            mask: None,
            mask_kind: MaskKind::Amplitude,
            theta: None,
            estimator: Estimator::Dst,
            photons: 0,
            seed: 0,
            lambda_nm: 808.0,
            distance_mm: None,
            kernel: Kernel::FresnelParaxial,
            pad_factor: 2,
            out: PathBuf::from("."),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::invalid(format!("bad value for {key}: {v:?}")))
}

pub fn parse_mode(v: &str) -> Result<ModeName> {
    match v {
        "gaussian" => Ok(ModeName::Gaussian),
        "lg" => Ok(ModeName::Lg),
        "custom" => Ok(ModeName::Custom),
        _ => Err(Error::invalid(format!("unknown mode {v:?} (gaussian|lg|custom)"))),
    }
}

pub fn parse_estimator(v: &str) -> Result<Estimator> {
    match v {
        "dst" => Ok(Estimator::Dst),
        "dwt" => Ok(Estimator::Dwt),
        _ => Err(Error::invalid(format!("unknown estimator {v:?} (dst|dwt)"))),
    }
}

pub fn parse_kernel(v: &str) -> Result<Kernel> {
    match v {
        "feynman" => Ok(Kernel::FeynmanExact),
        "fresnel" => Ok(Kernel::FresnelParaxial),
        _ => Err(Error::invalid(format!("unknown kernel {v:?} (feynman|fresnel)"))),
    }
}

pub fn parse_mask_kind(v: &str) -> Result<MaskKind> {
    match v {
        "amplitude" => Ok(MaskKind::Amplitude),
        "phase" => Ok(MaskKind::Phase),
        _ => Err(Error::invalid(format!("unknown mask kind {v:?} (amplitude|phase)"))),
    }
}

fn mode_str(m: ModeName) -> &'static str {
    match m {
        ModeName::Gaussian => "gaussian",
        ModeName::Lg => "lg",
        ModeName::Custom => "custom",
    }
}

fn estimator_str(e: Estimator) -> &'static str {
    match e {
        Estimator::Dst => "dst",
        Estimator::Dwt => "dwt",
    }
}

fn kernel_str(k: Kernel) -> &'static str {
    match k {
        Kernel::FeynmanExact => "feynman",
        Kernel::FresnelParaxial => "fresnel",
    }
}

fn mask_kind_str(k: MaskKind) -> &'static str {
    match k {
        MaskKind::Amplitude => "amplitude",
        MaskKind::Phase => "phase",
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "nx" => self.nx = parse_value(key, v)?,
            "ny" => self.ny = parse_value(key, v)?,
            "pitch_um" => self.pitch_um = parse_value(key, v)?,
            "mode" => self.mode = parse_mode(v)?,
            "l" => self.l = parse_value(key, v)?,
            "radial" => self.radial = parse_value(key, v)?,
            "waist_um" => self.waist_um = Some(parse_value(key, v)?),
            "center_x_um" => self.center_x_um = parse_value(key, v)?,
            "center_y_um" => self.center_y_um = parse_value(key, v)?,
            "vortex" => self.vortex = parse_value(key, v)?,
            "mask" => self.mask = Some(PathBuf::from(v)),
            "mask_kind" => self.mask_kind = parse_mask_kind(v)?,
            "theta" => self.theta = Some(parse_value(key, v)?),
            "estimator" => self.estimator = parse_estimator(v)?,
            "photons" => self.photons = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "lambda_nm" => self.lambda_nm = parse_value(key, v)?,
            "distance_mm" => self.distance_mm = Some(parse_value(key, v)?),
            "kernel" => self.kernel = parse_kernel(v)?,
            "pad_factor" => self.pad_factor = parse_value(key, v)?,
            "out" => self.out = PathBuf::from(v),
            _ => return Err(Error::invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Overlays the settings in `text` onto `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("pitch_um", self.pitch_um.to_string());
        kv("mode", mode_str(self.mode).into());
        kv("l", self.l.to_string());
        kv("radial", self.radial.to_string());
        if let Some(w) = self.waist_um {
            kv("waist_um", w.to_string());
        }
        kv("center_x_um", self.center_x_um.to_string());
        kv("center_y_um", self.center_y_um.to_string());
        kv("vortex", self.vortex.to_string());
        if let Some(m) = &self.mask {
            kv("mask", m.display().to_string());
        }
        kv("mask_kind", mask_kind_str(self.mask_kind).into());
        if let Some(t) = self.theta {
            kv("theta", t.to_string());
        }
        kv("estimator", estimator_str(self.estimator).into());
        kv("photons", self.photons.to_string());
        kv("seed", self.seed.to_string());
        kv("lambda_nm", self.lambda_nm.to_string());
        if let Some(d) = self.distance_mm {
            kv("distance_mm", d.to_string());
        }
        kv("kernel", kernel_str(self.kernel).into());
        kv("pad_factor", self.pad_factor.to_string());
        kv("out", self.out.display().to_string());
        s
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.nx, self.ny, self.pitch_um * 1e-6)
    }

    /// Mode spec without a custom mask payload (see [`Self::mode_spec_with_mask`]).
    pub fn mode_spec(&self, grid: &GridSpec) -> Result<ModeSpec> {
        self.mode_spec_with_mask(grid, None)
    }

    pub fn mode_spec_with_mask(&self, grid: &GridSpec, mask: Option<Vec<num_complex::Complex64>>) -> Result<ModeSpec> {
        let waist = self.waist_um.map_or_else(|| ModeSpec::default_waist(grid), |w| w * 1e-6);
        let kind = match self.mode {
            ModeName::Gaussian => ModeKind::Gaussian,
            ModeName::Lg => ModeKind::LaguerreGaussian { oam: self.l, radial: self.radial },
            ModeName::Custom => {
                ModeKind::Custom(mask.ok_or_else(|| Error::invalid("mode custom requires a mask (--mask FILE.pgm)"))?)
            }
        };
        Ok(ModeSpec { kind, waist, center: (self.center_x_um * 1e-6, self.center_y_um * 1e-6) })
    }

    /// Coupling for a scan; theta defaults to pi/2 for the strong estimator.
    pub fn coupling(&self) -> Result<CouplingConfig> {
        let mode = match self.estimator {
            Estimator::Dst => CouplingMode::StrongExact,
            Estimator::Dwt => CouplingMode::WeakFirstOrder,
        };
        CouplingConfig::new(self.theta_for_estimator()?, mode)
    }

    /// The weak estimator needs the coupling angle spelled out.
    pub fn theta_for_estimator(&self) -> Result<f64> {
        match (self.estimator, self.theta) {
            (Estimator::Dwt, None) => Err(Error::invalid("--estimator dwt requires --theta")),
            (_, Some(t)) => Ok(t),
            (Estimator::Dst, None) => Ok(FRAC_PI_2),
        }
    }

    pub fn propagation(&self) -> Result<PropagationSpec> {
        let d = self.distance_mm.ok_or_else(|| Error::invalid("holography needs --distance-mm"))?;
        PropagationSpec::new(self.lambda_nm * 1e-9, d * 1e-3, self.kernel)?.with_pad_factor(self.pad_factor)
    }

    /// Checks everything that can be checked without touching input files.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if let Some(w) = self.waist_um {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("waist must be positive, got {w}")));
            }
        }
        if self.mode == ModeName::Custom && self.mask.is_none() {
            return Err(Error::invalid("mode custom requires --mask"));
        }
        self.theta_for_estimator()?;
        if let Some(t) = self.theta {
            CouplingConfig::new(t, CouplingMode::StrongExact)?;
        }
        if !(self.lambda_nm.is_finite() && self.lambda_nm > 0.0) {
            return Err(Error::invalid("lambda must be positive"));
        }
        if self.pad_factor < 2 {
            return Err(Error::invalid("pad factor must be at least 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_with_comments_and_overrides() {
        let cfg = ExperimentConfig::parse(
            "# geometry\nnx = 32\n\nny=16\npitch_um = 12.5\nmode = lg\nl = -2\nestimator = dwt\ntheta = 0.1\n",
        )
        .unwrap();
        assert_eq!((cfg.nx, cfg.ny), (32, 16));
        assert_eq!(cfg.pitch_um, 12.5);
        assert_eq!(cfg.mode, ModeName::Lg);
        assert_eq!(cfg.l, -2);
        assert_eq!(cfg.theta, Some(0.1));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("nx 32").is_err());
        assert!(ExperimentConfig::parse("nx = many").is_err());
    }

    #[test]
    fn dwt_without_theta_fails_validation() {
        let cfg = ExperimentConfig { estimator: Estimator::Dwt, ..Default::default() };
        assert!(cfg.validate().is_err());
        assert!(cfg.coupling().is_err());
        let ok = ExperimentConfig { theta: Some(0.2), ..cfg };
        assert_eq!(ok.coupling().unwrap().theta(), 0.2);
    }

    #[test]
    fn defaults_match_setup() {
        let cfg = ExperimentConfig::default();
        let g = cfg.grid().unwrap();
        assert_eq!((g.nx(), g.ny()), (64, 64));
        assert!((g.pitch() - 125e-6).abs() < 1e-18);
        assert_eq!(cfg.lambda_nm, 808.0);
        assert_eq!(cfg.coupling().unwrap().theta(), FRAC_PI_2);
        let spec = cfg.mode_spec(&g).unwrap();
        assert!((spec.waist - 64.0 * 125e-6 / 8.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn text_round_trip_is_a_fixed_point(nx in 2usize..512, pitch in 0.1f64..1e3, seed: u64,
                                            photons in 0u64..10_000_000, theta in proptest::option::of(0.001f64..1.5),
                                            waist in proptest::option::of(1.0f64..1e4), l in -5i32..6,
                                            dist in proptest::option::of(0.1f64..1e5)) {
            let cfg = ExperimentConfig {
                nx, ny: nx + 1, pitch_um: pitch, seed, photons, theta, waist_um: waist, l,
                distance_mm: dist, mode: ModeName::Lg, kernel: Kernel::FeynmanExact,
                ..Default::default()
            };
            let text = cfg.to_text();
            let back = ExperimentConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
