//! Beam-Doppler reduced-dimension STAP toolkit.
//!
//! Simulates a side-looking airborne radar clutter scene, designs space-time
//! filters in the beam-Doppler domain and evaluates them by SCNR loss:
//!
//! - [`scene`] — radar scenario, clairvoyant clutter-plus-noise covariance,
//!   snapshot synthesis.
//! - [`beamdoppler`] — the full NM x NM beam-Doppler transform, main/auxiliary
//!   channel split, and the fixed localized-processing regions (JDL, STMB,
//!   ACR).
//! - [`numerics`] — dense complex Hermitian kernels (direct solve, eigen,
//!   regularized conjugate gradient).
//! - [`solvers`] — clairvoyant MVDR, reduced-dimension MVDR, the sparse
//!   beam-Doppler-selection designer (R-FOCUSS) and an l1-GSC beamformer.
//! - [`experiments`] — SCNR-loss metric, Monte Carlo snapshot/Doppler sweeps,
//!   weight-map export.

pub mod beamdoppler;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod scene;
pub mod solvers;

pub use error::{Error, Result};

pub use beamdoppler::{acr_region, jdl_region, stmb_region, BeamDopplerBasis, LpRegion};
pub use experiments::{
    export_weight_map, run_doppler_sweep, run_snapshot_sweep, scnr_loss_db, AlgorithmSpec,
    ExperimentSpec, Method, SweepGrid, SweepResult, WeightMap,
};
pub use scene::{
    build_clairvoyant_covariance, clutter_ridge_slope, doppler_steering, generate_snapshots,
    space_time_steering, spatial_steering, ArrayErrorModel, ClairvoyantCovariance, RadarConfig,
    SnapshotBatch,
};
pub use solvers::{
    l1_gsc_design, mvdr_clairvoyant, mvdr_reduced, rfocuss, scbds_design, FilterWeights,
    MethodTag, SolveDiagnostics, SparseSolverConfig,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector used throughout the crate.
pub type CVector = DVector<Complex64>;
