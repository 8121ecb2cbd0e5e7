//! Filter designers: clairvoyant MVDR, reduced-dimension MVDR over an LP
//! region, the sparse beam-Doppler-selection designer built on R-FOCUSS, and
//! an l1-regularized GSC beamformer baseline.
//!
//! The sparse designer treats the training data themselves as the sensing
//! matrix: with main-channel samples `d_l = s^H x_l` and auxiliary-channel
//! data `X~ = T_aux^H X`, the weight vector solves
//!
//! ```text
//!     min_w ||d* - X~^H w||^2 + kappa ||w||_p,   0 < p <= 1,
//! ```
//!
//! so the surviving entries of `w` pick the beam-Doppler cells used for
//! adaptation. The iteratively reweighted solve keeps the linear system in
//! the L x L Gram domain and inverts it by conjugate gradient, which is what
//! keeps the per-iteration cost at `O(D L^2)` for `D` active cells.

use std::cell::Cell;

use num_complex::Complex64;

use crate::beamdoppler::{BeamDopplerBasis, LpRegion};
use crate::error::{Error, Result};
use crate::numerics::{cg_regularized_solve, hermitian_solve, HermitianSystem};
use crate::{CMatrix, CVector};

/// Tolerance of the inner conjugate-gradient solves.
const CG_TOL: f64 = 1e-12;

/// Identifies which designer produced a set of weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    /// Full-dimension MVDR from the exact covariance.
    Clairvoyant,
    /// Reduced-dimension MVDR over a fixed LP region.
    LpMvdr,
    /// Sparse beam-Doppler selection (R-FOCUSS).
    Scbds,
    /// l1-regularized GSC beamformer.
    L1Gsc,
}

/// Configuration of the sparse designers.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolverConfig {
    /// lp relaxation exponent in (0, 1].
    pub p: f64,
    /// Regularization weight; also the ridge of the inner solve. Data are
    /// normalized to unit noise power before solving so this value is
    /// comparable across scenarios.
    pub kappa: f64,
    pub max_iter: usize,
    /// Stop when the relative change of the solution between two adjacent
    /// iterations falls below this.
    pub rel_change_tol: f64,
    /// Entries below this fraction of the current peak amplitude are frozen
    /// at zero and leave the active set permanently.
    pub prune_threshold: f64,
}

impl Default for SparseSolverConfig {
    fn default() -> Self {
        Self {
            p: 0.8,
            kappa: 3.0,
            max_iter: 500,
            rel_change_tol: 1e-4,
            prune_threshold: 1e-4,
        }
    }
}

impl SparseSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!("p must be in (0, 1], got {}", self.p)));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::invalid(format!(
                "kappa must be nonnegative, got {}",
                self.kappa
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::invalid("max_iter must be at least 1".to_string()));
        }
        if !(self.rel_change_tol > 0.0) {
            return Err(Error::invalid("rel_change_tol must be positive".to_string()));
        }
        if !(self.prune_threshold >= 0.0) {
            return Err(Error::invalid(
                "prune_threshold must be nonnegative".to_string(),
            ));
        }
        Ok(())
    }
}

/// Designed filter weights in both the solver's reduced domain and the
/// antenna-pulse domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterWeights {
    /// Weights in the reduced domain (auxiliary channels or LP cells).
    pub reduced: CVector,
    /// Composed full-domain weight vector of length NM.
    pub full: CVector,
    /// Indices of nonzero reduced entries.
    pub support: Vec<usize>,
    pub tag: MethodTag,
}

impl FilterWeights {
    fn new(reduced: CVector, full: CVector, tag: MethodTag) -> Self {
        let support = reduced
            .iter()
            .enumerate()
            .filter(|(_, w)| w.norm() > 0.0)
            .map(|(i, _)| i)
            .collect();
        Self {
            reduced,
            full,
            support,
            tag,
        }
    }
}

/// Per-call diagnostics of the iterative sparse solvers.
#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    pub iterations_used: usize,
    /// Active-set size each iteration worked with (before that iteration's
    /// pruning step).
    pub active_set_history: Vec<usize>,
    pub final_rel_change: f64,
    /// Penalized objective `||b - A w||^2 + (2 kappa / p) sum |w_i|^p` after
    /// each iteration.
    pub objective_history: Vec<f64>,
    /// Counted complex multiply-accumulate operations per iteration
    /// (sensing-matrix applications, inner CG work and weight updates).
    pub flops_per_iteration: Vec<u64>,
    /// True when every entry fell below the pruning threshold and the zero
    /// vector was returned.
    pub all_pruned: bool,
    /// True when the relative-change stopping rule fired before `max_iter`.
    pub converged: bool,
}

/// Full-dimension MVDR filter `w = R^-1 s / (s^H R^-1 s)` from the exact
/// covariance.
pub fn mvdr_clairvoyant(r: &CMatrix, s: &CVector) -> Result<FilterWeights> {
    if s.norm() == 0.0 {
        return Err(Error::invalid("steering vector must be nonzero".to_string()));
    }
    let rinv_s = hermitian_solve(&HermitianSystem::new(r.clone(), s.clone(), 0.0)?)?;
    let denom = s.dotc(&rinv_s);
    if denom.norm() == 0.0 {
        return Err(Error::Singular("s^H R^-1 s vanished".to_string()));
    }
    let w = rinv_s.map(|v| v / denom);
    Ok(FilterWeights::new(w.clone(), w, MethodTag::Clairvoyant))
}

/// Reduced-dimension MVDR over a fixed LP region from training snapshots.
///
/// Forms the reduced sample covariance `(1/L) sum x~ x~^H`, adds diagonal
/// loading of `loading * NM` (the transform columns have squared norm NM, so
/// one unit of `loading` is one noise level in the reduced domain), and
/// solves the distortionless constraint there. The full-domain weights are
/// `T_LP w~`.
pub fn mvdr_reduced(
    region: &LpRegion,
    snapshots: &CMatrix,
    s: &CVector,
    loading: f64,
) -> Result<FilterWeights> {
    let l = snapshots.ncols();
    if l == 0 {
        return Err(Error::invalid("need at least one training snapshot".to_string()));
    }
    let t_lp = region.selection_matrix();
    let nm = t_lp.nrows();
    if snapshots.nrows() != nm || s.len() != nm {
        return Err(Error::dims(format!(
            "snapshots/steering must have {nm} rows"
        )));
    }
    if !(loading >= 0.0) {
        return Err(Error::invalid("loading must be nonnegative".to_string()));
    }

    let reduced_data = t_lp.adjoint() * snapshots;
    let d = region.dimension();
    let mut r_hat = (&reduced_data * reduced_data.adjoint()).scale(1.0 / l as f64);
    let load = loading * nm as f64;
    for i in 0..d {
        r_hat[(i, i)] += Complex64::new(load, 0.0);
    }
    r_hat = (&r_hat + r_hat.adjoint()).scale(0.5);

    let s_tilde = t_lp.adjoint() * s;
    let rinv_s = hermitian_solve(&HermitianSystem::new(r_hat, s_tilde.clone(), 0.0)?)?;
    let denom = s_tilde.dotc(&rinv_s);
    if denom.norm() == 0.0 {
        return Err(Error::Singular("reduced constraint vanished".to_string()));
    }
    let w_tilde = rinv_s.map(|v| v / denom);
    let full = t_lp * &w_tilde;
    Ok(FilterWeights::new(w_tilde, full, MethodTag::LpMvdr))
}

/// Regularized FOCUSS for `min ||b - A w||^2 + kappa ||w||_p`.
///
/// `a` has one row per measurement (L rows) and one column per unknown. Each
/// iteration reweights with `Pi = diag(|w_i|^(2-p))` over the active set and
/// updates `w = Pi A^H (A Pi A^H + kappa I)^-1 b`; the L x L system is solved
/// matrix-free by conjugate gradient capped at L steps. Entries falling below
/// `prune_threshold` times the peak amplitude leave the active set for good.
pub fn rfocuss(
    a: &CMatrix,
    b: &CVector,
    cfg: &SparseSolverConfig,
) -> Result<(CVector, SolveDiagnostics)> {
    cfg.validate()?;
    let l = a.nrows();
    let n = a.ncols();
    if b.len() != l {
        return Err(Error::dims(format!(
            "rhs length {} does not match the {} sensing rows",
            b.len(),
            l
        )));
    }
    if a.norm() == 0.0 {
        return Err(Error::invalid("sensing matrix must be nonzero".to_string()));
    }
    if b.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::invalid("rhs must be finite".to_string()));
    }

    let mut diag = SolveDiagnostics::default();
    let mut w = CVector::zeros(n);
    let mut active: Vec<usize> = (0..n).collect();
    // Matched-filter initialization: the reweighting starts from the column
    // correlations with the data, normalized to unit peak. Entries that the
    // data never touch start (and stay) at zero weight.
    let mut pi: Vec<f64> = (0..n).map(|j| a.column(j).dotc(b).norm()).collect();
    let peak = pi.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak > 0.0 {
        for v in &mut pi {
            *v = (*v / peak).powf(2.0 - cfg.p);
        }
    }

    for _ in 0..cfg.max_iter {
        let d_active = active.len();
        diag.active_set_history.push(d_active);
        let flops = Cell::new(0u64);

        // y solves (A_act Pi A_act^H + kappa I) y = b without forming the
        // Gram matrix.
        let op = |v: &CVector| -> CVector {
            let mut out = CVector::zeros(l);
            for (slot, &j) in active.iter().enumerate() {
                let col = a.column(j);
                let t = col.dotc(v) * pi[slot];
                out.axpy(t, &col, Complex64::new(1.0, 0.0));
            }
            flops.set(flops.get() + (2 * l as u64 + 1) * d_active as u64);
            out
        };
        let cg = cg_regularized_solve(op, b, cfg.kappa, CG_TOL, l);
        // CG bookkeeping: ~5 length-L vector passes per step.
        flops.set(flops.get() + 5 * l as u64 * cg.iterations as u64);

        let w_prev = w.clone();
        let mut w_next = CVector::zeros(n);
        let mut max_amp = 0.0f64;
        for (slot, &j) in active.iter().enumerate() {
            let val = a.column(j).dotc(&cg.solution) * pi[slot];
            w_next[j] = val;
            max_amp = max_amp.max(val.norm());
        }
        flops.set(flops.get() + (l as u64 + 1) * d_active as u64);
        w = w_next;
        diag.iterations_used += 1;

        if max_amp == 0.0 {
            active.clear();
            diag.all_pruned = true;
            diag.flops_per_iteration.push(flops.get());
            diag.objective_history.push(objective(a, b, &w, cfg));
            diag.final_rel_change = f64::INFINITY;
            log::debug!("rfocuss: all entries pruned, returning the zero vector");
            return Ok((w, diag));
        }

        // Permanent pruning of entries far below the peak.
        let threshold = cfg.prune_threshold * max_amp;
        active.retain(|&j| {
            if w[j].norm() < threshold {
                w[j] = Complex64::new(0.0, 0.0);
                false
            } else {
                true
            }
        });
        pi = active.iter().map(|&j| w[j].norm().powf(2.0 - cfg.p)).collect();

        diag.flops_per_iteration.push(flops.get());
        diag.objective_history.push(objective(a, b, &w, cfg));

        let denom = w_prev.norm();
        let rel_change = if denom > 0.0 {
            (&w - &w_prev).norm() / denom
        } else {
            f64::INFINITY
        };
        diag.final_rel_change = rel_change;
        if rel_change <= cfg.rel_change_tol {
            diag.converged = true;
            break;
        }
    }

    Ok((w, diag))
}

/// Penalized objective tracked across iterations; the `(2 kappa / p)` factor
/// matches the fixed point of the reweighted update with ridge `kappa`.
fn objective(a: &CMatrix, b: &CVector, w: &CVector, cfg: &SparseSolverConfig) -> f64 {
    let residual = b - a * w;
    let penalty: f64 = w.iter().map(|v| v.norm().powf(cfg.p)).sum();
    residual.norm_squared() + 2.0 * cfg.kappa / cfg.p * penalty
}

/// Sparse beam-Doppler selection design from training snapshots.
///
/// Builds the main-channel samples `d_l = s^H x_l` and auxiliary data
/// `X~ = T_aux^H X`, normalizes both to unit noise power, solves the sparse
/// recovery problem with [`rfocuss`], and composes `w_full = s - T_aux w~`.
pub fn scbds_design(
    snapshots: &CMatrix,
    basis: &BeamDopplerBasis,
    cfg: &SparseSolverConfig,
    noise_power: f64,
) -> Result<(FilterWeights, SolveDiagnostics)> {
    let l = snapshots.ncols();
    if l == 0 {
        return Err(Error::invalid("need at least one training snapshot".to_string()));
    }
    if !(noise_power > 0.0) {
        return Err(Error::invalid("noise power must be positive".to_string()));
    }
    let scale = 1.0 / noise_power.sqrt();

    let s = basis.target_steering();
    // b = conj(d) scaled to unit noise: b_l = x_l^H s / sigma.
    let b = CVector::from_fn(l, |i, _| {
        basis.main_channel(&snapshots.column(i).into_owned()).conj() * scale
    });
    // Sensing matrix A = X~^H (L rows, NM-1 columns), same scaling.
    let a = (basis.aux_channels(snapshots) * Complex64::new(scale, 0.0)).adjoint();

    let (w_tilde, diag) = rfocuss(&a, &b, cfg)?;
    let full = s - basis.aux_matrix() * &w_tilde;
    Ok((FilterWeights::new(w_tilde, full, MethodTag::Scbds), diag))
}

/// l1-regularized GSC beamformer baseline.
///
/// A blocking matrix `B` spanning the orthogonal complement of `s` supplies
/// the auxiliary data; the weights solve `min ||d* - (B^H X)^H w||^2 +
/// kappa ||w||_1` by iterative reweighting (the p = 1 path) with the full
/// auxiliary dimension kept active. Each iteration re-forms the reweighted
/// normal matrix from the data, so the per-iteration cost carries the
/// `(NM)^2 L` factor of the published algorithm this reproduces. The
/// full-domain weights are `s - B w`.
pub fn l1_gsc_design(
    snapshots: &CMatrix,
    s: &CVector,
    cfg: &SparseSolverConfig,
    noise_power: f64,
) -> Result<(FilterWeights, SolveDiagnostics)> {
    cfg.validate()?;
    let l = snapshots.ncols();
    if l == 0 {
        return Err(Error::invalid("need at least one training snapshot".to_string()));
    }
    let nm = s.len();
    if snapshots.nrows() != nm {
        return Err(Error::dims(format!("snapshots must have {nm} rows")));
    }
    if !(noise_power > 0.0) {
        return Err(Error::invalid("noise power must be positive".to_string()));
    }

    let blocking = blocking_matrix(s);
    let n = blocking.ncols();
    let scale = Complex64::new(1.0 / noise_power.sqrt(), 0.0);

    let b_rhs = CVector::from_fn(l, |i, _| s.dotc(&snapshots.column(i).into_owned()).conj())
        * scale;
    let a = (blocking.adjoint() * snapshots * scale).adjoint();

    let mut diag = SolveDiagnostics::default();
    let mut w = CVector::zeros(n);
    let mut pi_sqrt: Vec<f64> = vec![1.0; n];
    let cap = l.min(n) + 1;

    for _ in 0..cfg.max_iter {
        diag.active_set_history.push(n);
        let mut flops = 0u64;

        // Reweighted data A_w = A Pi^(1/2) and its normal matrix, re-formed
        // from the data every pass.
        let mut a_w = a.clone();
        for (j, &f) in pi_sqrt.iter().enumerate() {
            a_w.column_mut(j).scale_mut(f);
        }
        flops += (n * l) as u64;
        let gram = a_w.adjoint() * &a_w;
        flops += (n * n * l) as u64;
        let rhs = a_w.adjoint() * &b_rhs;
        flops += (n * l) as u64;

        let cg_flops = Cell::new(0u64);
        let op = |v: &CVector| -> CVector {
            cg_flops.set(cg_flops.get() + (n * n) as u64);
            &gram * v
        };
        let cg = cg_regularized_solve(op, &rhs, cfg.kappa, CG_TOL, cap);
        flops += cg_flops.get() + 5 * n as u64 * cg.iterations as u64;

        let w_prev = w.clone();
        w = CVector::from_fn(n, |j, _| cg.solution[j] * pi_sqrt[j]);
        flops += n as u64;
        pi_sqrt = w.iter().map(|v| v.norm().sqrt()).collect();

        diag.iterations_used += 1;
        diag.flops_per_iteration.push(flops + (n * l) as u64);
        let l1_cfg = SparseSolverConfig {
            p: 1.0,
            ..cfg.clone()
        };
        diag.objective_history.push(objective(&a, &b_rhs, &w, &l1_cfg));

        let denom = w_prev.norm();
        let rel_change = if denom > 0.0 {
            (&w - &w_prev).norm() / denom
        } else {
            f64::INFINITY
        };
        diag.final_rel_change = rel_change;
        if rel_change <= cfg.rel_change_tol {
            diag.converged = true;
            break;
        }
    }

    let full = s - &blocking * &w;
    Ok((FilterWeights::new(w, full, MethodTag::L1Gsc), diag))
}

/// Orthonormal completion of `s`: an NM x (NM-1) matrix whose columns span
/// the orthogonal complement of `s` (so `B^H s = 0`).
fn blocking_matrix(s: &CVector) -> CMatrix {
    let nm = s.len();
    // QR of [s, e_j...] with the pivot basis vector dropped keeps the set
    // linearly independent for any s.
    let pivot = s
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut m = CMatrix::zeros(nm, nm);
    m.set_column(0, s);
    let mut col = 1;
    for j in 0..nm {
        if j == pivot {
            continue;
        }
        m[(j, col)] = Complex64::new(1.0, 0.0);
        col += 1;
    }
    let qr = nalgebra::linalg::QR::new(m);
    let q = qr.q();
    q.columns(1, nm - 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamdoppler::jdl_region;
    use crate::scene::{
        build_clairvoyant_covariance, generate_snapshots, space_time_steering, RadarConfig,
    };
    use approx::assert_relative_eq;
    use nalgebra::linalg::SVD;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut StdRng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    /// Complex Gaussian sensing matrix with unit-norm columns, the standard
    /// ensemble for sparse-recovery experiments.
    fn sensing_matrix(rows: usize, cols: usize, rng: &mut StdRng) -> CMatrix {
        let mut m = CMatrix::from_fn(rows, cols, |_, _| {
            crate::scene::standard_complex_normal(rng)
        });
        for mut col in m.column_iter_mut() {
            let norm = col.norm();
            col.scale_mut(1.0 / norm);
        }
        m
    }

    /// Configuration tuned for exact-sparse recovery: essentially
    /// unregularized, strong lp drive and hard pruning.
    fn recovery_config() -> SparseSolverConfig {
        SparseSolverConfig {
            p: 0.3,
            kappa: 1e-8,
            max_iter: 300,
            rel_change_tol: 1e-6,
            prune_threshold: 0.2,
        }
    }

    fn planted_two_sparse_problem(seed: u64) -> (CMatrix, CVector) {
        let mut rng = StdRng::seed_from_u64(1000 + seed);
        let a = sensing_matrix(4, 8, &mut rng);
        let mut w0 = CVector::zeros(8);
        let i = rng.gen_range(0..8);
        let mut j = rng.gen_range(0..8);
        while j == i {
            j = rng.gen_range(0..8);
        }
        w0[i] = Complex64::from_polar(1.0 + rng.gen::<f64>(), rng.gen::<f64>());
        w0[j] = Complex64::from_polar(1.0 + rng.gen::<f64>(), rng.gen::<f64>());
        let b = &a * &w0;
        (a, b)
    }

    fn small_scene() -> (RadarConfig, crate::scene::ClairvoyantCovariance) {
        let cfg = RadarConfig {
            num_elements: 4,
            num_pulses: 4,
            cnr_db: 30.0,
            ..RadarConfig::default()
        }
        .with_half_wavelength_spacing();
        let cov = build_clairvoyant_covariance(&cfg, 64).unwrap();
        (cfg, cov)
    }

    #[test]
    fn clairvoyant_white_noise_is_matched_filter() {
        let cfg = RadarConfig::default();
        let s = space_time_steering(0.0, -0.1667, &cfg);
        let nm = cfg.dof() as f64;
        let r = CMatrix::identity(cfg.dof(), cfg.dof()).scale(2.0);
        let w = mvdr_clairvoyant(&r, &s).unwrap();
        // w = s / NM regardless of the noise scale.
        let expected = s.scale(1.0 / nm);
        assert!((&w.full - expected).norm() < 1e-10);
    }

    #[test]
    fn clairvoyant_satisfies_unit_gain() {
        let mut rng = StdRng::seed_from_u64(3);
        let g = random_matrix(12, 12, &mut rng);
        let r = &g * g.adjoint() + CMatrix::identity(12, 12);
        let s = CVector::from_fn(12, |i, _| Complex64::from_polar(1.0, 0.4 * i as f64));
        let w = mvdr_clairvoyant(&r, &s).unwrap();
        let gain = w.full.dotc(&s);
        assert_relative_eq!(gain.re, 1.0, epsilon = 1e-10);
        assert!(gain.im.abs() < 1e-10);
    }

    #[test]
    fn reduced_mvdr_full_basis_matches_clairvoyant_direction() {
        let (cfg, cov) = small_scene();
        let basis = BeamDopplerBasis::build(0.1, -0.3, &cfg);
        // Region covering every beam-Doppler cell: the reduced filter then
        // spans the whole space and must converge on the clairvoyant one.
        let n = basis.num_dopplers() as i64;
        let m = basis.num_beams() as i64;
        let region = LpRegion::from_offsets(
            &basis,
            (0..n).flat_map(|k| (0..m).map(move |mm| (k, mm))),
        );

        let batch = generate_snapshots(&cov, 5000, 11);
        let trained = mvdr_reduced(&region, &batch.data, basis.target_steering(), 1e-6).unwrap();
        let clair = mvdr_clairvoyant(cov.matrix(), basis.target_steering()).unwrap();

        let cosine = trained.full.dotc(&clair.full).norm()
            / (trained.full.norm() * clair.full.norm());
        assert!(cosine > 0.99, "cosine similarity {cosine:.4}");
    }

    #[test]
    fn reduced_mvdr_target_cell_only_is_scaled_steering() {
        let (cfg, cov) = small_scene();
        let basis = BeamDopplerBasis::build(0.0, 0.2, &cfg);
        let region = jdl_region(&basis, 1, 1).unwrap();
        let batch = generate_snapshots(&cov, 10, 1);
        let w = mvdr_reduced(&region, &batch.data, basis.target_steering(), 1.0).unwrap();
        // One degree of freedom: the full weights are proportional to s.
        let s = basis.target_steering();
        let cosine = w.full.dotc(s).norm() / (w.full.norm() * s.norm());
        assert_relative_eq!(cosine, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn reduced_mvdr_jdl_unit_gain_and_errors() {
        let cfg = RadarConfig::default();
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let basis = BeamDopplerBasis::build(0.0, -0.1667, &cfg);
        let region = jdl_region(&basis, 3, 3).unwrap();
        let batch = generate_snapshots(&cov, 30, 77);
        let w = mvdr_reduced(&region, &batch.data, basis.target_steering(), 1.0).unwrap();

        let s_tilde = region.selection_matrix().adjoint() * basis.target_steering();
        let gain = w.reduced.dotc(&s_tilde);
        assert_relative_eq!(gain.re, 1.0, epsilon = 1e-8);

        let empty = CMatrix::zeros(cfg.dof(), 0);
        assert!(mvdr_reduced(&region, &empty, basis.target_steering(), 1.0).is_err());
    }

    #[test]
    fn rfocuss_identity_sensing_recovers_sparse_rhs() {
        let n = 8;
        let a = CMatrix::identity(n, n);
        let mut b = CVector::zeros(n);
        b[2] = c(1.0, -0.5);
        b[6] = c(-0.3, 0.8);
        let cfg = SparseSolverConfig {
            kappa: 1e-6,
            max_iter: 50,
            ..SparseSolverConfig::default()
        };
        let (w, diag) = rfocuss(&a, &b, &cfg).unwrap();
        let support: Vec<usize> = (0..n).filter(|&i| w[i].norm() > 1e-8).collect();
        assert_eq!(support, vec![2, 6]);
        assert!(diag.iterations_used <= 50);
    }

    /// Exhaustive best-2-support least squares over all column pairs.
    fn best_two_support(a: &CMatrix, b: &CVector) -> Vec<usize> {
        let n = a.ncols();
        let mut best = (f64::INFINITY, vec![0, 1]);
        for i in 0..n {
            for j in i + 1..n {
                let sub = CMatrix::from_columns(&[
                    a.column(i).into_owned(),
                    a.column(j).into_owned(),
                ]);
                let svd = SVD::new(sub.clone(), true, true);
                let coef = svd.solve(b, 1e-12).unwrap();
                let res = (b - sub * coef).norm();
                if res < best.0 {
                    best = (res, vec![i, j]);
                }
            }
        }
        best.1
    }

    #[test]
    fn rfocuss_recovers_planted_supports() {
        let cfg = recovery_config();
        let mut hits = 0;
        let trials = 50;
        for seed in 0..trials {
            let (a, b) = planted_two_sparse_problem(seed);
            let (w, _) = rfocuss(&a, &b, &cfg).unwrap();
            let mut idx: Vec<usize> = (0..8).collect();
            idx.sort_by(|&x, &y| w[y].norm().total_cmp(&w[x].norm()));
            let mut recovered = vec![idx[0], idx[1]];
            recovered.sort_unstable();

            let mut oracle = best_two_support(&a, &b);
            oracle.sort_unstable();
            if recovered == oracle {
                hits += 1;
            }
        }
        assert!(
            hits * 10 >= trials * 9,
            "support recovery rate {hits}/{trials}"
        );
    }

    #[test]
    fn rfocuss_zero_kappa_square_system_is_exact_solve() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_matrix(8, 8, &mut rng) + CMatrix::identity(8, 8).scale(2.0);
        let w0 = CVector::from_fn(8, |i, _| c(0.3 * i as f64 - 1.0, 0.1 * i as f64));
        let b = &a * &w0;
        let cfg = SparseSolverConfig {
            kappa: 0.0,
            max_iter: 100,
            ..SparseSolverConfig::default()
        };
        let (w, _) = rfocuss(&a, &b, &cfg).unwrap();
        // Square invertible system: every solution equals the unique one,
        // which is also the pseudo-inverse solution.
        let pinv = SVD::new(a.clone(), true, true)
            .solve(&b, 1e-13)
            .unwrap();
        assert!((&w - &pinv).norm() / pinv.norm() < 1e-6);
    }

    #[test]
    fn rfocuss_zero_kappa_fits_consistent_underdetermined_system() {
        // Without regularization every iterate solves A w = b exactly on a
        // consistent system; the sparsity drive only moves along that
        // solution set.
        let mut rng = StdRng::seed_from_u64(6);
        let a = sensing_matrix(4, 8, &mut rng);
        let b = CVector::from_fn(4, |i, _| c(1.0 - i as f64, 0.5 * i as f64));
        let cfg = SparseSolverConfig {
            kappa: 0.0,
            max_iter: 50,
            ..SparseSolverConfig::default()
        };
        let (w, _) = rfocuss(&a, &b, &cfg).unwrap();
        let res = (&b - &a * &w).norm() / b.norm();
        assert!(res < 1e-6, "residual {res:.3e}");
    }

    #[test]
    fn rfocuss_objective_monotone_and_pruning_permanent() {
        let cfg = SparseSolverConfig {
            kappa: 0.05,
            max_iter: 200,
            ..SparseSolverConfig::default()
        };
        for seed in 0..10 {
            let mut rng = StdRng::seed_from_u64(2000 + seed);
            let a = random_matrix(6, 12, &mut rng);
            let mut w0 = CVector::zeros(12);
            w0[1] = c(2.0, 0.0);
            w0[7] = c(0.0, -1.5);
            let noise = CVector::from_fn(6, |_, _| {
                c(0.01 * (rng.gen::<f64>() - 0.5), 0.01 * (rng.gen::<f64>() - 0.5))
            });
            let b = &a * &w0 + noise;
            let (_, diag) = rfocuss(&a, &b, &cfg).unwrap();

            for pair in diag.objective_history.windows(2) {
                assert!(
                    pair[1] <= pair[0] * (1.0 + 1e-9) + 1e-9,
                    "objective increased: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
            for pair in diag.active_set_history.windows(2) {
                assert!(pair[1] <= pair[0], "active set grew");
            }
        }
    }

    #[test]
    fn rfocuss_zero_rhs_returns_zero_with_flag() {
        let a = CMatrix::identity(4, 4);
        let b = CVector::zeros(4);
        let (w, diag) = rfocuss(&a, &b, &SparseSolverConfig::default()).unwrap();
        assert!(w.norm() == 0.0);
        assert!(diag.all_pruned);
    }

    #[test]
    fn rfocuss_input_validation() {
        let cfg = SparseSolverConfig::default();
        let a = CMatrix::zeros(3, 4);
        assert!(rfocuss(&a, &CVector::zeros(3), &cfg).is_err());

        let a = CMatrix::identity(3, 3);
        assert!(rfocuss(&a, &CVector::zeros(2), &cfg).is_err());

        let bad = SparseSolverConfig {
            p: 1.5,
            ..SparseSolverConfig::default()
        };
        assert!(rfocuss(&a, &CVector::zeros(3), &bad).is_err());
    }

    #[test]
    fn scbds_clutter_free_keeps_the_steering_vector() {
        let cfg = RadarConfig {
            num_elements: 4,
            num_pulses: 4,
            cnr_db: f64::NEG_INFINITY,
            ..RadarConfig::default()
        };
        let cov = build_clairvoyant_covariance(&cfg, 32).unwrap();
        let basis = BeamDopplerBasis::build(0.0, 0.1, &cfg);
        let batch = generate_snapshots(&cov, 20, 9);
        let solver_cfg = SparseSolverConfig {
            kappa: 100.0,
            ..SparseSolverConfig::default()
        };
        let (w, _) = scbds_design(&batch.data, &basis, &solver_cfg, cfg.noise_power).unwrap();
        let rel = (&w.full - basis.target_steering()).norm() / basis.target_steering().norm();
        assert!(rel < 0.05, "full weights strayed from s: {rel:.4}");
    }

    #[test]
    fn scbds_distortionless_gain_is_exact() {
        let cfg = RadarConfig::default();
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let basis = BeamDopplerBasis::build(0.0, -0.1667, &cfg);
        let batch = generate_snapshots(&cov, 30, 13);
        let (w, diag) =
            scbds_design(&batch.data, &basis, &SparseSolverConfig::default(), 1.0).unwrap();
        // w_full^H s = s^H s because the auxiliary columns are orthogonal to s.
        let gain = w.full.dotc(basis.target_steering());
        assert_relative_eq!(gain.re, cfg.dof() as f64, max_relative = 1e-8);
        assert!(gain.im.abs() < 1e-6);
        assert!(diag.iterations_used >= 1);
        assert_eq!(w.support.len(), w.reduced.iter().filter(|v| v.norm() > 0.0).count());
    }

    #[test]
    fn scbds_is_deterministic() {
        let cfg = RadarConfig::default();
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let basis = BeamDopplerBasis::build(0.0, -0.1667, &cfg);
        let batch = generate_snapshots(&cov, 30, 21);
        let a = scbds_design(&batch.data, &basis, &SparseSolverConfig::default(), 1.0).unwrap();
        let b = scbds_design(&batch.data, &basis, &SparseSolverConfig::default(), 1.0).unwrap();
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn blocking_matrix_annihilates_steering() {
        let cfg = RadarConfig::default();
        let s = space_time_steering(0.12, -0.33, &cfg);
        let b = blocking_matrix(&s);
        assert_eq!(b.ncols(), cfg.dof() - 1);
        assert!((b.adjoint() * &s).norm() < 1e-12 * s.norm());
        let gram = b.adjoint() * &b;
        assert!((gram - CMatrix::identity(cfg.dof() - 1, cfg.dof() - 1)).norm() < 1e-10);
    }

    #[test]
    fn l1_gsc_clutter_free_keeps_the_steering_vector() {
        let cfg = RadarConfig {
            num_elements: 4,
            num_pulses: 4,
            cnr_db: f64::NEG_INFINITY,
            ..RadarConfig::default()
        };
        let cov = build_clairvoyant_covariance(&cfg, 32).unwrap();
        let batch = generate_snapshots(&cov, 20, 3);
        let s = space_time_steering(0.0, 0.1, &cfg);
        let solver_cfg = SparseSolverConfig {
            kappa: 100.0,
            ..SparseSolverConfig::default()
        };
        let (w, _) = l1_gsc_design(&batch.data, &s, &solver_cfg, cfg.noise_power).unwrap();
        let rel = (&w.full - &s).norm() / s.norm();
        assert!(rel < 0.05, "full weights strayed from s: {rel:.4}");
        let gain = w.full.dotc(&s);
        assert_relative_eq!(gain.re, cfg.dof() as f64, max_relative = 1e-8);
    }
}
