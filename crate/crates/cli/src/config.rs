//! Experiment configuration file: TOML with `[scenario]`, `[target]`,
//! `[algorithms.*]` and `[sweep]` sections.
//!
//! Unknown keys are rejected so a typo in a physics parameter cannot pass
//! silently. Every optional key has a documented default; the fully resolved
//! configuration is echoed into the run manifest, and a manifest fed back in
//! as `--config` reproduces the run (its `[run]` section is ignored on
//! input).

use serde::{Deserialize, Serialize};

use bdstap_core::scene::SPEED_OF_LIGHT;
use bdstap_core::{
    AlgorithmSpec, ArrayErrorModel, ExperimentSpec, Method, RadarConfig, SparseSolverConfig,
    SweepGrid,
};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub target: TargetConfig,
    #[serde(default)]
    pub algorithms: AlgorithmsConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Present when the input is a run manifest; ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_elements: usize,
    pub num_pulses: usize,
    pub carrier_freq_hz: f64,
    pub prf_hz: f64,
    pub platform_velocity_mps: f64,
    /// Clutter-to-noise ratio in dB (`-inf` disables clutter).
    pub cnr_db: f64,
    /// Defaults to half the carrier wavelength.
    #[serde(default)]
    pub element_spacing_m: Option<f64>,
    #[serde(default = "default_altitude")]
    pub platform_altitude_m: f64,
    #[serde(default = "default_noise_power")]
    pub noise_power: f64,
    #[serde(default = "default_patches")]
    pub num_clutter_patches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array_error: Option<ArrayErrorConfig>,
}

fn default_altitude() -> f64 {
    8000.0
}

fn default_noise_power() -> f64 {
    1.0
}

fn default_patches() -> usize {
    361
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayErrorConfig {
    pub gain_std: f64,
    pub phase_std_deg: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub fs: f64,
    #[serde(default = "default_target_fd")]
    pub fd: f64,
}

fn default_target_fd() -> f64 {
    -0.1667
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            fs: 0.0,
            fd: default_target_fd(),
        }
    }
}

/// Which designers run, with their per-method settings. Omitting the whole
/// `[algorithms]` section enables the full default set; listing any
/// subsection enables exactly the listed ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clairvoyant: Option<ClairvoyantAlg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jdl: Option<JdlAlg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stmb: Option<StmbAlg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acr: Option<AcrAlg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scbds: Option<ScbdsAlg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_gsc: Option<L1GscAlg>,
}

impl Default for AlgorithmsConfig {
    fn default() -> Self {
        Self {
            clairvoyant: Some(ClairvoyantAlg {}),
            jdl: Some(JdlAlg::default()),
            stmb: Some(StmbAlg::default()),
            acr: None,
            scbds: Some(ScbdsAlg::default()),
            l1_gsc: Some(L1GscAlg::default()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClairvoyantAlg {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JdlAlg {
    #[serde(default = "default_jdl_size")]
    pub beams: usize,
    #[serde(default = "default_jdl_size")]
    pub dopplers: usize,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Diagonal loading in noise-power units; defaults to the scenario noise
    /// power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading: Option<f64>,
}

impl Default for JdlAlg {
    fn default() -> Self {
        Self {
            beams: default_jdl_size(),
            dopplers: default_jdl_size(),
            snapshots: default_snapshots(),
            loading: None,
        }
    }
}

fn default_jdl_size() -> usize {
    3
}

fn default_snapshots() -> usize {
    30
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StmbAlg {
    #[serde(default = "default_doppler_arm")]
    pub doppler_arm: usize,
    #[serde(default = "default_beam_arm")]
    pub beam_arm: usize,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading: Option<f64>,
}

impl Default for StmbAlg {
    fn default() -> Self {
        Self {
            doppler_arm: default_doppler_arm(),
            beam_arm: default_beam_arm(),
            snapshots: default_snapshots(),
            loading: None,
        }
    }
}

fn default_doppler_arm() -> usize {
    8
}

fn default_beam_arm() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcrAlg {
    /// Defaults to the number of Doppler bins (one ridge cell per bin).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_cells: Option<usize>,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScbdsAlg {
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_scbds_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_scbds_tol")]
    pub rel_change_tol: f64,
    #[serde(default = "default_prune")]
    pub prune_threshold: f64,
}

impl Default for ScbdsAlg {
    fn default() -> Self {
        Self {
            snapshots: default_snapshots(),
            p: default_p(),
            kappa: default_kappa(),
            max_iter: default_scbds_max_iter(),
            rel_change_tol: default_scbds_tol(),
            prune_threshold: default_prune(),
        }
    }
}

fn default_p() -> f64 {
    0.8
}

fn default_kappa() -> f64 {
    3.0
}

fn default_scbds_max_iter() -> usize {
    500
}

fn default_scbds_tol() -> f64 {
    1e-4
}

fn default_prune() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1GscAlg {
    #[serde(default = "default_gsc_snapshots")]
    pub snapshots: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_gsc_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_gsc_tol")]
    pub rel_change_tol: f64,
}

impl Default for L1GscAlg {
    fn default() -> Self {
        Self {
            snapshots: default_gsc_snapshots(),
            kappa: default_kappa(),
            max_iter: default_gsc_max_iter(),
            rel_change_tol: default_gsc_tol(),
        }
    }
}

fn default_gsc_snapshots() -> usize {
    60
}

fn default_gsc_max_iter() -> usize {
    20
}

fn default_gsc_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_snapshot_counts")]
    pub snapshot_counts: Vec<usize>,
    #[serde(default = "default_doppler_grid")]
    pub doppler_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snapshot_counts: default_snapshot_counts(),
            doppler_grid: default_doppler_grid(),
            trials: default_trials(),
            master_seed: default_master_seed(),
        }
    }
}

fn default_snapshot_counts() -> Vec<usize> {
    vec![10, 20, 30, 40, 60, 80, 100]
}

fn default_doppler_grid() -> Vec<f64> {
    // -0.45 .. 0.45 in steps of 0.05.
    (-9..=9).map(|i| i as f64 / 20.0).collect()
}

fn default_trials() -> usize {
    50
}

fn default_master_seed() -> u64 {
    1
}

/// Run metadata appended to the echoed configuration in a manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub tool_version: String,
    pub command: String,
    pub master_seed: u64,
    /// Total excluded trials per method across the sweep.
    #[serde(default)]
    pub failures: Vec<MethodFailures>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodFailures {
    pub method: String,
    pub count: usize,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies CLI overrides and fills every default, producing the exact
    /// configuration echoed into the manifest.
    pub fn resolve(
        mut self,
        seed_override: Option<u64>,
        trials_override: Option<usize>,
    ) -> Result<ConfigFile, CliError> {
        if let Some(seed) = seed_override {
            self.sweep.master_seed = seed;
        }
        if let Some(trials) = trials_override {
            self.sweep.trials = trials;
        }
        self.run = None;
        if self.scenario.element_spacing_m.is_none() {
            let lambda = SPEED_OF_LIGHT / self.scenario.carrier_freq_hz;
            self.scenario.element_spacing_m = Some(0.5 * lambda);
        }
        let noise = self.scenario.noise_power;
        if let Some(jdl) = &mut self.algorithms.jdl {
            jdl.loading.get_or_insert(noise);
        }
        if let Some(stmb) = &mut self.algorithms.stmb {
            stmb.loading.get_or_insert(noise);
        }
        if let Some(acr) = &mut self.algorithms.acr {
            acr.loading.get_or_insert(noise);
            acr.num_cells.get_or_insert(self.scenario.num_pulses);
        }
        self.radar_config()?.validate().map_err(CliError::config)?;
        Ok(self)
    }

    pub fn radar_config(&self) -> Result<RadarConfig, CliError> {
        let s = &self.scenario;
        let spacing = s.element_spacing_m.ok_or_else(|| {
            CliError::Config("internal: configuration not resolved".to_string())
        })?;
        Ok(RadarConfig {
            num_elements: s.num_elements,
            num_pulses: s.num_pulses,
            carrier_freq_hz: s.carrier_freq_hz,
            prf_hz: s.prf_hz,
            element_spacing_m: spacing,
            platform_velocity_mps: s.platform_velocity_mps,
            platform_altitude_m: s.platform_altitude_m,
            cnr_db: s.cnr_db,
            noise_power: s.noise_power,
            array_error: s.array_error.as_ref().map(|e| ArrayErrorModel {
                gain_std: e.gain_std,
                phase_std: e.phase_std_deg.to_radians(),
                seed: e.seed,
            }),
        })
    }

    /// Algorithm list in canonical order (clairvoyant, jdl, stmb, acr,
    /// scbds, l1_gsc).
    pub fn algorithm_specs(&self) -> Vec<AlgorithmSpec> {
        let noise = self.scenario.noise_power;
        let mut specs = Vec::new();
        if self.algorithms.clairvoyant.is_some() {
            specs.push(AlgorithmSpec {
                name: "clairvoyant".into(),
                method: Method::Clairvoyant,
                snapshots: 1,
            });
        }
        if let Some(jdl) = &self.algorithms.jdl {
            specs.push(AlgorithmSpec {
                name: "jdl".into(),
                method: Method::Jdl {
                    beams: jdl.beams,
                    dopplers: jdl.dopplers,
                    loading: jdl.loading.unwrap_or(noise),
                },
                snapshots: jdl.snapshots,
            });
        }
        if let Some(stmb) = &self.algorithms.stmb {
            specs.push(AlgorithmSpec {
                name: "stmb".into(),
                method: Method::Stmb {
                    doppler_arm: stmb.doppler_arm,
                    beam_arm: stmb.beam_arm,
                    loading: stmb.loading.unwrap_or(noise),
                },
                snapshots: stmb.snapshots,
            });
        }
        if let Some(acr) = &self.algorithms.acr {
            specs.push(AlgorithmSpec {
                name: "acr".into(),
                method: Method::Acr {
                    num_cells: acr.num_cells.unwrap_or(self.scenario.num_pulses),
                    loading: acr.loading.unwrap_or(noise),
                },
                snapshots: acr.snapshots,
            });
        }
        if let Some(scbds) = &self.algorithms.scbds {
            specs.push(AlgorithmSpec {
                name: "scbds".into(),
                method: Method::Scbds(SparseSolverConfig {
                    p: scbds.p,
                    kappa: scbds.kappa,
                    max_iter: scbds.max_iter,
                    rel_change_tol: scbds.rel_change_tol,
                    prune_threshold: scbds.prune_threshold,
                }),
                snapshots: scbds.snapshots,
            });
        }
        if let Some(gsc) = &self.algorithms.l1_gsc {
            specs.push(AlgorithmSpec {
                name: "l1_gsc".into(),
                method: Method::L1Gsc(SparseSolverConfig {
                    p: 1.0,
                    kappa: gsc.kappa,
                    max_iter: gsc.max_iter,
                    rel_change_tol: gsc.rel_change_tol,
                    prune_threshold: 0.0,
                }),
                snapshots: gsc.snapshots,
            });
        }
        specs
    }

    /// Builds the experiment for one sweep kind.
    pub fn experiment(&self, kind: SweepKind) -> Result<ExperimentSpec, CliError> {
        let sweep = match kind {
            SweepKind::Snapshots => SweepGrid::Snapshots(self.sweep.snapshot_counts.clone()),
            SweepKind::Doppler => SweepGrid::Doppler(self.sweep.doppler_grid.clone()),
        };
        let spec = ExperimentSpec {
            scenario: self.radar_config()?,
            num_patches: self.scenario.num_clutter_patches,
            target_fs: self.target.fs,
            target_fd: self.target.fd,
            algorithms: self.algorithm_specs(),
            sweep,
            num_trials: self.sweep.trials,
            master_seed: self.sweep.master_seed,
        };
        spec.validate().map_err(CliError::config)?;
        Ok(spec)
    }

    pub fn scbds_config(&self) -> Option<(SparseSolverConfig, usize)> {
        self.algorithms.scbds.as_ref().map(|s| {
            (
                SparseSolverConfig {
                    p: s.p,
                    kappa: s.kappa,
                    max_iter: s.max_iter,
                    rel_change_tol: s.rel_change_tol,
                    prune_threshold: s.prune_threshold,
                },
                s.snapshots,
            )
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKind {
    Snapshots,
    Doppler,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::Snapshots => "snapshots",
            SweepKind::Doppler => "doppler",
        }
    }
}
