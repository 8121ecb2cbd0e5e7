//! Radar scenario definition, clairvoyant clutter-plus-noise covariance and
//! training-snapshot synthesis.
//!
//! The clutter model is a discrete ring of independent patches placed on the
//! clutter ridge of a side-looking uniform linear array: patch azimuths cover
//! the forward hemisphere, each patch contributes a rank-one term at spatial
//! frequency `f_s = (d/lambda) sin(phi)` and Doppler `f_d = beta * f_s`, and
//! patch powers are scaled so the total clutter-to-noise ratio matches the
//! configured value exactly.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::eig_hermitian;
use crate::{CMatrix, CVector};

/// Nominal speed of light (m/s). The round radar value keeps half-wavelength
/// spacing and the ridge slope at their textbook figures.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Fixed per-element gain/phase perturbations applied to the clutter steering
/// vectors (the filters keep assuming nominal steering).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayErrorModel {
    /// Standard deviation of the relative amplitude error (dimensionless).
    pub gain_std: f64,
    /// Standard deviation of the phase error in radians.
    pub phase_std: f64,
    /// Seed of the realization; the multipliers are drawn once per scenario.
    pub seed: u64,
}

impl ArrayErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain_std >= 0.0) || !(self.phase_std >= 0.0) {
            return Err(Error::invalid(
                "array error deviations must be nonnegative".to_string(),
            ));
        }
        Ok(())
    }

    /// Realizes the per-element multipliers `(1 + dg_m) * exp(j * dphi_m)`.
    pub fn realize(&self, num_elements: usize) -> CVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        CVector::from_fn(num_elements, |_, _| {
            let dg = self.gain_std * standard_normal(&mut rng);
            let dphi = self.phase_std * standard_normal(&mut rng);
            Complex64::from_polar(1.0 + dg, dphi)
        })
    }
}

/// Array, waveform and platform parameters defining the scenario geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    /// Number of array elements M.
    pub num_elements: usize,
    /// Number of pulses N in the coherent processing interval.
    pub num_pulses: usize,
    pub carrier_freq_hz: f64,
    pub prf_hz: f64,
    pub element_spacing_m: f64,
    pub platform_velocity_mps: f64,
    pub platform_altitude_m: f64,
    /// Clutter-to-noise ratio in dB; `-inf` disables clutter.
    pub cnr_db: f64,
    /// Thermal noise power per element-pulse (linear).
    pub noise_power: f64,
    pub array_error: Option<ArrayErrorModel>,
}

impl Default for RadarConfig {
    /// The side-looking demo scenario used throughout the tests: 12 elements,
    /// 12 pulses, 1.2 GHz carrier, 2 kHz PRF, half-wavelength spacing,
    /// 125 m/s platform speed (ridge slope exactly 1) and 45 dB CNR.
    fn default() -> Self {
        let carrier_freq_hz = 1.2e9;
        Self {
            num_elements: 12,
            num_pulses: 12,
            carrier_freq_hz,
            prf_hz: 2000.0,
            element_spacing_m: 0.5 * SPEED_OF_LIGHT / carrier_freq_hz,
            platform_velocity_mps: 125.0,
            platform_altitude_m: 8000.0,
            cnr_db: 45.0,
            noise_power: 1.0,
            array_error: None,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_elements < 1 || self.num_pulses < 1 {
            return Err(Error::invalid("need at least one element and one pulse"));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if !(self.prf_hz > 0.0) {
            return Err(Error::invalid("PRF must be positive"));
        }
        if !(self.element_spacing_m > 0.0) {
            return Err(Error::invalid("element spacing must be positive"));
        }
        if !(self.noise_power > 0.0) {
            return Err(Error::invalid("noise power must be positive"));
        }
        if !self.platform_velocity_mps.is_finite() {
            return Err(Error::invalid("platform velocity must be finite"));
        }
        if let Some(err) = &self.array_error {
            err.validate()?;
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Resets the element spacing to half the carrier wavelength.
    pub fn with_half_wavelength_spacing(mut self) -> Self {
        self.element_spacing_m = 0.5 * self.wavelength();
        self
    }

    /// Space-time degrees of freedom NM.
    pub fn dof(&self) -> usize {
        self.num_elements * self.num_pulses
    }

    /// Linear clutter-to-noise ratio (0 when clutter is disabled).
    pub fn cnr_linear(&self) -> f64 {
        10f64.powf(self.cnr_db / 10.0)
    }
}

/// Spatial steering vector: element `m` is `exp(j 2 pi m f_s)`.
///
/// `f_s` is the normalized spatial frequency (periodic with period 1).
pub fn spatial_steering(f_s: f64, num_elements: usize) -> CVector {
    assert!(num_elements >= 1, "steering vector needs at least one element");
    CVector::from_fn(num_elements, |m, _| {
        Complex64::from_polar(1.0, TAU * m as f64 * f_s)
    })
}

/// Temporal (Doppler) steering vector: pulse `n` is `exp(j 2 pi n f_d)`.
pub fn doppler_steering(f_d: f64, num_pulses: usize) -> CVector {
    spatial_steering(f_d, num_pulses)
}

/// Space-time steering vector `v_d(f_d) (x) v_s(f_s)` of length NM.
///
/// Entry `n*M + m` equals `exp(j 2 pi (n f_d + m f_s))`; the squared norm is
/// exactly NM.
pub fn space_time_steering(f_s: f64, f_d: f64, config: &RadarConfig) -> CVector {
    let vd = doppler_steering(f_d, config.num_pulses);
    let vs = spatial_steering(f_s, config.num_elements);
    CVector::from_fn(config.dof(), |i, _| {
        vd[i / config.num_elements] * vs[i % config.num_elements]
    })
}

/// Clutter ridge slope `beta = 2 v / (d f_r)`: the ratio of normalized
/// Doppler to normalized spatial frequency along the ridge.
pub fn clutter_ridge_slope(config: &RadarConfig) -> f64 {
    2.0 * config.platform_velocity_mps / (config.element_spacing_m * config.prf_hz)
}

/// Exact clutter-plus-noise covariance of a scenario, together with a factor
/// for snapshot synthesis.
#[derive(Debug, Clone)]
pub struct ClairvoyantCovariance {
    matrix: CMatrix,
    factor: CMatrix,
    noise_power: f64,
}

impl ClairvoyantCovariance {
    /// The NM x NM Hermitian positive-definite covariance R.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Factor F with `F F^H = R` (eigendecomposition based).
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn dof(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the clairvoyant covariance `R = sum_i sigma_i^2 v_i v_i^H +
/// noise_power * I` from a ring of `num_patches` clutter patches.
///
/// Patch azimuths are uniform over the forward hemisphere `[-pi/2, pi/2]`,
/// every patch carries the same power before CNR scaling, and configured
/// array errors perturb the spatial factor of the patch steering vectors
/// only.
pub fn build_clairvoyant_covariance(
    config: &RadarConfig,
    num_patches: usize,
) -> Result<ClairvoyantCovariance> {
    config.validate()?;
    let nm = config.dof();
    if num_patches < 2 * nm {
        log::warn!(
            "num_patches = {num_patches} is below the recommended 2*NM = {}; \
             the clutter ridge may be undersampled",
            2 * nm
        );
    }

    let cnr = config.cnr_linear();
    if cnr.is_nan() || cnr < 0.0 {
        return Err(Error::invalid(format!(
            "CNR scale must be nonnegative, got {cnr}"
        )));
    }

    let mut r = CMatrix::identity(nm, nm).scale(config.noise_power);

    if cnr > 0.0 {
        if num_patches == 0 {
            return Err(Error::invalid("clutter requires at least one patch"));
        }
        let beta = clutter_ridge_slope(config);
        let fs_scale = config.element_spacing_m / config.wavelength();
        let errors = config
            .array_error
            .as_ref()
            .map(|m| m.realize(config.num_elements));

        let mut steering = Vec::with_capacity(num_patches);
        let mut total_norm_sq = 0.0;
        for i in 0..num_patches {
            let azimuth = if num_patches == 1 {
                0.0
            } else {
                -std::f64::consts::FRAC_PI_2
                    + std::f64::consts::PI * i as f64 / (num_patches - 1) as f64
            };
            let f_s = fs_scale * azimuth.sin();
            let f_d = beta * f_s;
            let mut vs = spatial_steering(f_s, config.num_elements);
            if let Some(e) = &errors {
                vs.component_mul_assign(e);
            }
            let vd = doppler_steering(f_d, config.num_pulses);
            let v = CVector::from_fn(nm, |idx, _| {
                vd[idx / config.num_elements] * vs[idx % config.num_elements]
            });
            total_norm_sq += v.norm_squared();
            steering.push(v);
        }

        // Equal patch powers, normalized so trace(R_clutter) = CNR * NM * noise
        // even when array errors change the steering norms.
        let patch_power = cnr * config.noise_power * nm as f64 / total_norm_sq;
        let alpha = Complex64::new(patch_power, 0.0);
        for v in &steering {
            r.gerc(alpha, v, v, Complex64::new(1.0, 0.0));
        }
    }

    // Symmetrize away accumulation rounding before factorizing.
    r = (&r + r.adjoint()).scale(0.5);

    let (eigenvalues, vectors) = eig_hermitian(&r)?;
    let mut factor = vectors;
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let scale = lambda.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(scale);
    }

    Ok(ClairvoyantCovariance {
        matrix: r,
        factor,
        noise_power: config.noise_power,
    })
}

/// A batch of training snapshots drawn from a clairvoyant covariance.
#[derive(Debug, Clone)]
pub struct SnapshotBatch {
    /// NM x L data matrix; columns are i.i.d. zero-mean with covariance R.
    pub data: CMatrix,
    pub seed: u64,
}

impl SnapshotBatch {
    pub fn num_snapshots(&self) -> usize {
        self.data.ncols()
    }
}

/// Draws `num_snapshots` i.i.d. snapshots `X = F G` with `G` standard complex
/// Gaussian from a deterministic stream.
///
/// The stream is consumed column by column, so for a fixed seed the batch of
/// length `L1` is exactly the first `L1` columns of the batch of length
/// `L2 > L1`; the Monte Carlo harness relies on this to hand methods with
/// different training lengths a common snapshot prefix.
pub fn generate_snapshots(
    cov: &ClairvoyantCovariance,
    num_snapshots: usize,
    seed: u64,
) -> SnapshotBatch {
    assert!(num_snapshots >= 1, "need at least one snapshot");
    let r = cov.factor.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMatrix::zeros(r, num_snapshots);
    for l in 0..num_snapshots {
        for i in 0..r {
            g[(i, l)] = standard_complex_normal(&mut rng);
        }
    }
    SnapshotBatch {
        data: &cov.factor * g,
        seed,
    }
}

/// Standard real normal via Box-Muller.
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Standard circular complex normal (unit total variance): Rayleigh amplitude
/// with uniform phase.
pub(crate) fn standard_complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn demo_config() -> RadarConfig {
        RadarConfig::default()
    }

    /// Small scenario (NM = 16) for the statistics-heavy tests.
    fn small_config() -> RadarConfig {
        RadarConfig {
            num_elements: 4,
            num_pulses: 4,
            cnr_db: 30.0,
            ..RadarConfig::default()
        }
        .with_half_wavelength_spacing()
    }

    #[test]
    fn spatial_steering_zero_frequency() {
        let v = spatial_steering(0.0, 4);
        for e in v.iter() {
            assert_relative_eq!(e.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn spatial_steering_half_cycle() {
        let v = spatial_steering(0.5, 2);
        assert_relative_eq!(v[0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(v[1].re, -1.0, epsilon = 1e-12);
        assert!(v[1].im.abs() < 1e-12);
    }

    #[test]
    fn spatial_steering_quarter_cycle() {
        // f_s = 0.25, M = 4: phases 0, pi/2, pi, 3pi/2.
        let v = spatial_steering(0.25, 4);
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (e, (re, im)) in v.iter().zip(expected) {
            assert_relative_eq!(e.re, re, epsilon = 1e-12);
            assert_relative_eq!(e.im, im, epsilon = 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "at least one element")]
    fn spatial_steering_rejects_zero_elements() {
        let _ = spatial_steering(0.0, 0);
    }

    #[test]
    fn doppler_steering_examples() {
        let v = doppler_steering(0.0, 3);
        assert!(v.iter().all(|e| (e - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let v = doppler_steering(-0.1667, 2);
        let expected = Complex64::from_polar(1.0, -TAU * 0.1667);
        assert!((v[1] - expected).norm() < 1e-12);

        // Periodicity: integer frequency is the zero-frequency vector.
        let v = doppler_steering(1.0, 5);
        for e in v.iter() {
            assert_relative_eq!(e.re, 1.0, epsilon = 1e-12);
            assert!(e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn space_time_steering_kronecker_order() {
        let cfg = RadarConfig {
            num_elements: 2,
            num_pulses: 2,
            ..RadarConfig::default()
        };
        let v = space_time_steering(0.0, 0.0, &cfg);
        assert!(v.iter().all(|e| (e - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        // Spatial frequency flips within each pulse block: [1, -1, 1, -1].
        let v = space_time_steering(0.5, 0.0, &cfg);
        let expected = [1.0, -1.0, 1.0, -1.0];
        for (e, re) in v.iter().zip(expected) {
            assert_relative_eq!(e.re, re, epsilon = 1e-12);
        }
    }

    #[test]
    fn space_time_steering_norm() {
        let cfg = demo_config();
        for (fs, fd) in [(0.13, -0.31), (0.0, -0.1667), (-0.49, 0.5)] {
            let v = space_time_steering(fs, fd, &cfg);
            assert_relative_eq!(v.norm_squared(), 144.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ridge_slope_demo_scenario_is_one() {
        let cfg = demo_config();
        assert_relative_eq!(clutter_ridge_slope(&cfg), 1.0, epsilon = 1e-12);

        let stationary = RadarConfig {
            platform_velocity_mps: 0.0,
            ..demo_config()
        };
        assert_eq!(clutter_ridge_slope(&stationary), 0.0);

        let fast = RadarConfig {
            platform_velocity_mps: 250.0,
            ..demo_config()
        };
        assert_relative_eq!(clutter_ridge_slope(&fast), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn covariance_without_clutter_is_scaled_identity() {
        let cfg = RadarConfig {
            cnr_db: f64::NEG_INFINITY,
            noise_power: 2.0,
            num_elements: 3,
            num_pulses: 2,
            ..RadarConfig::default()
        };
        let cov = build_clairvoyant_covariance(&cfg, 32).unwrap();
        let expected = CMatrix::identity(6, 6).scale(2.0);
        assert!((cov.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn covariance_trace_matches_cnr() {
        let cfg = demo_config();
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let nm = cfg.dof() as f64;
        let trace: f64 = cov.matrix().diagonal().iter().map(|d| d.re).sum();
        let expected = nm * cfg.noise_power * (1.0 + cfg.cnr_linear());
        assert_relative_eq!(trace, expected, max_relative = 1e-9);
    }

    #[test]
    fn covariance_is_hermitian_and_positive_definite() {
        let cfg = demo_config();
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let r = cov.matrix();
        assert!((r - r.adjoint()).norm() / r.norm() < 1e-12);
        let (vals, _) = eig_hermitian(r).unwrap();
        let min = vals.last().copied().unwrap();
        assert!(min >= cfg.noise_power * (1.0 - 1e-9), "min eigenvalue {min}");
    }

    #[test]
    fn clutter_rank_follows_brennan_rule() {
        // M + beta (N - 1) = 12 + 11 = 23 dominant eigenvalues for the demo
        // scenario; allow +-1.
        let cfg = demo_config();
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let (vals, _) = eig_hermitian(cov.matrix()).unwrap();
        let count = vals
            .iter()
            .filter(|&&v| v > 10.0 * cfg.noise_power)
            .count();
        assert!(
            (22..=24).contains(&count),
            "eigenvalues above 10*noise: {count}"
        );
    }

    #[test]
    fn covariance_factor_reconstructs_matrix() {
        let cfg = small_config();
        let cov = build_clairvoyant_covariance(&cfg, 64).unwrap();
        let recon = cov.factor() * cov.factor().adjoint();
        assert!((recon - cov.matrix()).norm() / cov.matrix().norm() < 1e-10);
    }

    #[test]
    fn snapshots_are_deterministic() {
        let cfg = small_config();
        let cov = build_clairvoyant_covariance(&cfg, 64).unwrap();
        let a = generate_snapshots(&cov, 5, 99);
        let b = generate_snapshots(&cov, 5, 99);
        assert_eq!(a.data, b.data);
        let c = generate_snapshots(&cov, 5, 100);
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn snapshot_prefix_property() {
        let cfg = small_config();
        let cov = build_clairvoyant_covariance(&cfg, 64).unwrap();
        let short = generate_snapshots(&cov, 3, 4242);
        let long = generate_snapshots(&cov, 8, 4242);
        assert_eq!(short.data, long.data.columns(0, 3).into_owned());
    }

    #[test]
    fn white_noise_snapshot_power() {
        let cfg = RadarConfig {
            cnr_db: f64::NEG_INFINITY,
            num_elements: 4,
            num_pulses: 4,
            ..RadarConfig::default()
        };
        let cov = build_clairvoyant_covariance(&cfg, 32).unwrap();
        // Average squared norm per element over many single-snapshot draws.
        let mut acc = 0.0;
        let trials = 400;
        for seed in 0..trials {
            let batch = generate_snapshots(&cov, 1, seed);
            acc += batch.data.column(0).norm_squared();
        }
        let mean_power = acc / (trials as f64 * cfg.dof() as f64);
        assert_relative_eq!(mean_power, cfg.noise_power, max_relative = 0.05);
    }

    #[test]
    fn sample_covariance_converges_to_r() {
        let cfg = small_config();
        let cov = build_clairvoyant_covariance(&cfg, 64).unwrap();
        let l = 10_000;
        let batch = generate_snapshots(&cov, l, 7);
        let sample = (&batch.data * batch.data.adjoint()).scale(1.0 / l as f64);
        let rel = (&sample - cov.matrix()).norm() / cov.matrix().norm();
        assert!(rel < 0.05, "relative Frobenius error {rel:.4}");
    }

    #[test]
    fn array_errors_fixed_per_scenario_and_calibrated() {
        let model = ArrayErrorModel {
            gain_std: 0.03,
            phase_std: 3f64.to_radians(),
            seed: 5,
        };
        let a = model.realize(12);
        let b = model.realize(12);
        assert_eq!(a, b);

        let cfg = RadarConfig {
            array_error: Some(model),
            ..demo_config()
        };
        let cov = build_clairvoyant_covariance(&cfg, 361).unwrap();
        let trace: f64 = cov.matrix().diagonal().iter().map(|d| d.re).sum();
        let expected = cfg.dof() as f64 * cfg.noise_power * (1.0 + cfg.cnr_linear());
        assert_relative_eq!(trace, expected, max_relative = 1e-9);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = demo_config();
        cfg.num_elements = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = demo_config();
        cfg.prf_hz = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = demo_config();
        cfg.noise_power = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = demo_config();
        cfg.cnr_db = f64::NAN;
        assert!(build_clairvoyant_covariance(&cfg, 361).is_err());
    }
}
