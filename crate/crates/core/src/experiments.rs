//! SCNR-loss metric, Monte Carlo sweep harness and weight-map export.
//!
//! A sweep evaluates a set of filter designers over either a grid of training
//! snapshot counts or a grid of target Doppler frequencies. Trials are
//! independent: each trial draws a fresh snapshot batch from a seed derived
//! deterministically from the master seed, hands every method the same batch
//! (methods with shorter training lengths take a prefix), and scores the
//! designed filter against the exact covariance.

use rayon::prelude::*;

use crate::beamdoppler::{acr_region, jdl_region, stmb_region, BeamDopplerBasis, LpRegion};
use crate::error::{Error, Result};
use crate::scene::{
    build_clairvoyant_covariance, clutter_ridge_slope, generate_snapshots, ClairvoyantCovariance,
    RadarConfig,
};
use crate::solvers::{
    l1_gsc_design, mvdr_clairvoyant, mvdr_reduced, scbds_design, FilterWeights, MethodTag,
    SparseSolverConfig,
};
use crate::{CMatrix, CVector};

/// Output SCNR loss of a filter in dB:
/// `10 log10( sigma^2 |w^H s|^2 / (NM w^H R w) )`.
///
/// The reference is the matched filter in noise alone, so the value is at
/// most 0 dB for any weight vector when `R >= sigma^2 I`.
pub fn scnr_loss_db(
    full_w: &CVector,
    s: &CVector,
    r: &CMatrix,
    noise_power: f64,
) -> Result<f64> {
    let nm = s.len();
    if full_w.len() != nm || r.nrows() != nm || r.ncols() != nm {
        return Err(Error::dims(format!("weights/steering/covariance must all be {nm}-dim")));
    }
    if full_w.norm() == 0.0 {
        return Err(Error::invalid("weight vector must be nonzero".to_string()));
    }
    let gain = full_w.dotc(s).norm_sqr();
    let output_power = full_w.dotc(&(r * full_w)).re;
    if !(output_power > 0.0) {
        return Err(Error::invalid(
            "filter output power must be positive (is R positive definite?)".to_string(),
        ));
    }
    Ok(10.0 * (noise_power * gain / (nm as f64 * output_power)).log10())
}

/// A filter-design method participating in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Full-dimension MVDR from the exact covariance (no training).
    Clairvoyant,
    /// Reduced MVDR over a rectangular JDL region.
    Jdl {
        beams: usize,
        dopplers: usize,
        loading: f64,
    },
    /// Reduced MVDR over a cross-shaped STMB region.
    Stmb {
        doppler_arm: usize,
        beam_arm: usize,
        loading: f64,
    },
    /// Reduced MVDR over ridge-aligned ACR cells (uses the scenario's true
    /// ridge slope).
    Acr { num_cells: usize, loading: f64 },
    /// Sparse beam-Doppler selection.
    Scbds(SparseSolverConfig),
    /// l1-regularized GSC beamformer.
    L1Gsc(SparseSolverConfig),
}

/// One method entry of an experiment: display name, designer and its
/// training length (the training length is overridden by the abscissa in
/// snapshot sweeps).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub method: Method,
    pub snapshots: usize,
}

/// Sweep abscissa grid.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    /// Training snapshot counts (all methods train on the abscissa value).
    Snapshots(Vec<usize>),
    /// Target Doppler frequencies in `[-0.5, 0.5)`; each method trains on
    /// its own configured snapshot count.
    Doppler(Vec<f64>),
}

/// Full description of a sweep experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: RadarConfig,
    /// Clutter patches for the clairvoyant covariance.
    pub num_patches: usize,
    pub target_fs: f64,
    pub target_fd: f64,
    pub algorithms: Vec<AlgorithmSpec>,
    pub sweep: SweepGrid,
    pub num_trials: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.num_trials < 1 {
            return Err(Error::invalid("num_trials must be at least 1".to_string()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("need at least one algorithm".to_string()));
        }
        for alg in &self.algorithms {
            if alg.name.is_empty() {
                return Err(Error::invalid("algorithm names must be nonempty".to_string()));
            }
            if alg.snapshots < 1 {
                return Err(Error::invalid(format!(
                    "algorithm '{}' needs at least one training snapshot",
                    alg.name
                )));
            }
            if let Method::Scbds(cfg) | Method::L1Gsc(cfg) = &alg.method {
                cfg.validate()?;
            }
        }
        let mut names: Vec<&str> = self.algorithms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.algorithms.len() {
            return Err(Error::invalid("algorithm names must be unique".to_string()));
        }
        match &self.sweep {
            SweepGrid::Snapshots(ls) => {
                if ls.is_empty() {
                    return Err(Error::invalid("snapshot sweep grid is empty".to_string()));
                }
                if ls.iter().any(|&l| l < 1) {
                    return Err(Error::invalid("snapshot counts must be positive".to_string()));
                }
            }
            SweepGrid::Doppler(fds) => {
                if fds.is_empty() {
                    return Err(Error::invalid("Doppler sweep grid is empty".to_string()));
                }
                if fds.iter().any(|&f| !(-0.5..0.5).contains(&f)) {
                    return Err(Error::invalid(
                        "Doppler values must lie in [-0.5, 0.5)".to_string(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Per-abscissa averaged SCNR losses for every method of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Abscissa values (snapshot counts or Doppler frequencies).
    pub abscissae: Vec<f64>,
    /// Method names, in the order of the experiment's algorithm list.
    pub methods: Vec<String>,
    /// Mean SCNR loss in dB, indexed `[abscissa][method]`; NaN when every
    /// trial of that cell failed.
    pub mean_db: Vec<Vec<f64>>,
    /// Standard deviation of the per-trial dB losses (population form).
    pub std_db: Vec<Vec<f64>>,
    /// Count of excluded trials per `[abscissa][method]`.
    pub failures: Vec<Vec<usize>>,
    pub num_trials: usize,
    pub master_seed: u64,
    /// Trial seeds, indexed `[abscissa][trial]`.
    pub trial_seeds: Vec<Vec<u64>>,
}

impl SweepResult {
    /// Column index of a method by name.
    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == name)
    }

    /// Mean curve of one method across the abscissae.
    pub fn method_curve(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.method_index(name)?;
        Some(self.mean_db.iter().map(|row| row[idx]).collect())
    }
}

/// Runs a sweep over training snapshot counts at the fixed target.
pub fn run_snapshot_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    if !matches!(spec.sweep, SweepGrid::Snapshots(_)) {
        return Err(Error::invalid("spec does not hold a snapshot sweep".to_string()));
    }
    run_sweep(spec)
}

/// Runs a sweep over target Doppler frequencies with per-method training
/// lengths.
pub fn run_doppler_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    if !matches!(spec.sweep, SweepGrid::Doppler(_)) {
        return Err(Error::invalid("spec does not hold a Doppler sweep".to_string()));
    }
    run_sweep(spec)
}

fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cov = build_clairvoyant_covariance(&spec.scenario, spec.num_patches)?;

    let (abscissae, is_doppler) = match &spec.sweep {
        SweepGrid::Snapshots(ls) => (ls.iter().map(|&l| l as f64).collect::<Vec<_>>(), false),
        SweepGrid::Doppler(fds) => (fds.clone(), true),
    };

    let mut result = SweepResult {
        abscissae: abscissae.clone(),
        methods: spec.algorithms.iter().map(|a| a.name.clone()).collect(),
        mean_db: Vec::new(),
        std_db: Vec::new(),
        failures: Vec::new(),
        num_trials: spec.num_trials,
        master_seed: spec.master_seed,
        trial_seeds: Vec::new(),
    };

    for (ai, &abscissa) in abscissae.iter().enumerate() {
        let target_fd = if is_doppler { abscissa } else { spec.target_fd };
        let basis = BeamDopplerBasis::build(spec.target_fs, target_fd, &spec.scenario);
        let point = SweepPoint::prepare(spec, &cov, &basis, abscissa, is_doppler)?;

        let seeds: Vec<u64> = (0..spec.num_trials)
            .map(|t| derive_trial_seed(spec.master_seed, ai, t))
            .collect();

        // Trials run in parallel; collecting per-trial values into a
        // trial-indexed vector keeps the aggregation order-independent.
        let trial_losses: Vec<Vec<Option<f64>>> = seeds
            .par_iter()
            .map(|&seed| point.run_trial(seed))
            .collect();

        let num_methods = spec.algorithms.len();
        let mut means = vec![0.0f64; num_methods];
        let mut stds = vec![0.0f64; num_methods];
        let mut fails = vec![0usize; num_methods];
        for m in 0..num_methods {
            let values: Vec<f64> = trial_losses.iter().filter_map(|row| row[m]).collect();
            fails[m] = spec.num_trials - values.len();
            if values.is_empty() {
                means[m] = f64::NAN;
                stds[m] = f64::NAN;
                continue;
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            means[m] = mean;
            stds[m] = var.sqrt();
        }
        if fails.iter().any(|&f| f > 0) {
            log::warn!(
                "abscissa {abscissa}: excluded failing trials per method: {:?}",
                fails
            );
        }

        result.mean_db.push(means);
        result.std_db.push(stds);
        result.failures.push(fails);
        result.trial_seeds.push(seeds);
    }

    Ok(result)
}

/// Everything fixed for one abscissa of a sweep.
struct SweepPoint<'a> {
    spec: &'a ExperimentSpec,
    cov: &'a ClairvoyantCovariance,
    basis: &'a BeamDopplerBasis,
    /// Per-method training lengths for this abscissa.
    lengths: Vec<usize>,
    batch_len: usize,
    /// Prebuilt LP regions for the region-based methods (index-aligned with
    /// the algorithm list).
    regions: Vec<Option<LpRegion>>,
    /// Clairvoyant loss, computed once (it does not depend on training data).
    clairvoyant_loss: Option<f64>,
}

impl<'a> SweepPoint<'a> {
    fn prepare(
        spec: &'a ExperimentSpec,
        cov: &'a ClairvoyantCovariance,
        basis: &'a BeamDopplerBasis,
        abscissa: f64,
        is_doppler: bool,
    ) -> Result<Self> {
        let lengths: Vec<usize> = spec
            .algorithms
            .iter()
            .map(|alg| {
                if is_doppler {
                    alg.snapshots
                } else {
                    abscissa as usize
                }
            })
            .collect();
        let batch_len = lengths.iter().copied().max().unwrap_or(1);
        let beta = clutter_ridge_slope(&spec.scenario);

        let mut regions = Vec::with_capacity(spec.algorithms.len());
        let mut clairvoyant_loss = None;
        for alg in &spec.algorithms {
            let region = match &alg.method {
                Method::Jdl {
                    beams, dopplers, ..
                } => Some(jdl_region(basis, *beams, *dopplers)?),
                Method::Stmb {
                    doppler_arm,
                    beam_arm,
                    ..
                } => Some(stmb_region(basis, *doppler_arm, *beam_arm)?),
                Method::Acr { num_cells, .. } => Some(acr_region(basis, beta, *num_cells)?),
                Method::Clairvoyant => {
                    if clairvoyant_loss.is_none() {
                        let w = mvdr_clairvoyant(cov.matrix(), basis.target_steering())?;
                        clairvoyant_loss = Some(scnr_loss_db(
                            &w.full,
                            basis.target_steering(),
                            cov.matrix(),
                            cov.noise_power(),
                        )?);
                    }
                    None
                }
                _ => None,
            };
            regions.push(region);
        }

        Ok(Self {
            spec,
            cov,
            basis,
            lengths,
            batch_len,
            regions,
            clairvoyant_loss,
        })
    }

    /// Runs all methods on one trial's snapshot batch. `None` marks a method
    /// whose designer failed on this trial.
    fn run_trial(&self, seed: u64) -> Vec<Option<f64>> {
        let batch = generate_snapshots(self.cov, self.batch_len, seed);
        let s = self.basis.target_steering();

        self.spec
            .algorithms
            .iter()
            .enumerate()
            .map(|(mi, alg)| {
                let training = batch.data.columns(0, self.lengths[mi]).into_owned();
                let designed: Result<FilterWeights> = match &alg.method {
                    Method::Clairvoyant => return self.clairvoyant_loss,
                    Method::Jdl { loading, .. }
                    | Method::Stmb { loading, .. }
                    | Method::Acr { loading, .. } => {
                        let region = self.regions[mi].as_ref().expect("region prebuilt");
                        mvdr_reduced(region, &training, s, *loading)
                    }
                    Method::Scbds(cfg) => {
                        scbds_design(&training, self.basis, cfg, self.cov.noise_power())
                            .map(|(w, _)| w)
                    }
                    Method::L1Gsc(cfg) => {
                        l1_gsc_design(&training, s, cfg, self.cov.noise_power()).map(|(w, _)| w)
                    }
                };
                match designed.and_then(|w| {
                    scnr_loss_db(&w.full, s, self.cov.matrix(), self.cov.noise_power())
                }) {
                    Ok(loss) => Some(loss),
                    Err(err) => {
                        log::debug!("method '{}' failed on seed {seed}: {err}", alg.name);
                        None
                    }
                }
            })
            .collect()
    }
}

/// Deterministic per-trial seed: a splitmix64 finalizer over the master seed
/// and the (abscissa, trial) coordinates.
pub fn derive_trial_seed(master_seed: u64, abscissa_index: usize, trial: usize) -> u64 {
    let mut z = master_seed
        .wrapping_add((abscissa_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((trial as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 2-D view of a sparse weight vector on the beam-Doppler grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    /// `|w~|` by `[doppler_offset][beam_offset]`; the target cell holds 0.
    pub grid: Vec<Vec<f64>>,
    /// Grid position of the target cell (not a weight value).
    pub target_cell: (usize, usize),
    /// Peak amplitude, for normalized rendering.
    pub peak: f64,
}

impl WeightMap {
    pub fn num_dopplers(&self) -> usize {
        self.grid.len()
    }

    pub fn num_beams(&self) -> usize {
        self.grid.first().map_or(0, |row| row.len())
    }

    /// Fraction of auxiliary cells with amplitude above `rel_threshold`
    /// times the peak.
    pub fn active_fraction(&self, rel_threshold: f64) -> f64 {
        let n = self.num_dopplers() * self.num_beams() - 1;
        if n == 0 || self.peak == 0.0 {
            return 0.0;
        }
        let count = self
            .grid
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().map(move |(m, v)| ((k, m), *v)))
            .filter(|&(cell, v)| cell != self.target_cell && v > rel_threshold * self.peak)
            .count();
        count as f64 / n as f64
    }
}

/// Places the reduced weights of a sparse design onto the beam-Doppler grid.
///
/// Only weights produced by the sparse beam-Doppler designer are accepted:
/// other methods' reduced weights do not live on this grid.
pub fn export_weight_map(weights: &FilterWeights, basis: &BeamDopplerBasis) -> Result<WeightMap> {
    if weights.tag != MethodTag::Scbds {
        return Err(Error::invalid(format!(
            "weight map needs sparse beam-Doppler weights, got {:?}",
            weights.tag
        )));
    }
    if weights.reduced.len() != basis.dof() - 1 {
        return Err(Error::dims(format!(
            "expected {} auxiliary weights, got {}",
            basis.dof() - 1,
            weights.reduced.len()
        )));
    }
    let n = basis.num_dopplers();
    let m = basis.num_beams();
    let mut grid = vec![vec![0.0f64; m]; n];
    let mut peak = 0.0f64;
    for j in 0..weights.reduced.len() {
        let (k, mm) = basis.aux_offsets(j);
        let amp = weights.reduced[j].norm();
        grid[k][mm] = amp;
        peak = peak.max(amp);
    }
    Ok(WeightMap {
        grid,
        target_cell: (0, 0),
        peak,
    })
}
