//! Direct strong tomography of two-dimensional photon wavefunctions.
//!
//! A transverse field is scanned cell by cell: each cell is coupled to a
//! two-level pointer, the photon is post-selected on zero transverse momentum,
//! and six pointer projections are recorded. [`reconstruct`] inverts those
//! records exactly; [`holography`] propagates the recovered field to image
//! thin objects without a reference beam.

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod holography;
pub mod io;
pub mod numeric;
pub mod pointer;
pub mod reconstruct;
pub mod wavefield;

pub use config::ExperimentConfig;
pub use engine::{couple_and_postselect, dwt_pointer, scan, CouplingConfig, CouplingMode, ReadoutRecord};
pub use error::{Error, Result};
pub use holography::{
    propagate_forward, propagate_inverse, reconstruct_object, Kernel, ObjectOptions, ObjectReconstruction,
    PropagationSpec,
};
pub use pointer::{Basis, PointerProjector, PointerState, ProjectorMap};
pub use reconstruct::{
    reconstruct_dst, reconstruct_dwt, score, Estimator, PsiTildeMode, QualityReport, ReconstructionResult,
};
pub use wavefield::{make_mode, GridSpec, ModeKind, ModeSpec, TransverseWavefunction};

pub use num_complex::Complex64;
