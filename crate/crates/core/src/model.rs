//! System configuration, protocol timing, random channel generation and IRS
//! phase state.
//!
//! The BS–IRS channel `G` and the IRS–user channel `h_r` only ever appear
//! through their cascade `G·diag(h_r)`, so a [`ChannelRealization`] stores the
//! cascaded `M×N` matrix directly. Column `i` is the path through reflector
//! `i` alone and is drawn from `CN(0, C_i)`.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::LinkDirection;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::rng;

/// Covariance of a circularly-symmetric complex Gaussian vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// `c · I` of whatever dimension the context requires.
    Scaled(f64),
    /// An explicit Hermitian PSD matrix.
    Full(CMatrix),
}

impl Covariance {
    pub fn identity() -> Self {
        Covariance::Scaled(1.0)
    }

    pub fn validate(&self, dim: usize, key: &str) -> Result<()> {
        match self {
            Covariance::Scaled(c) => {
                if !c.is_finite() || *c < 0.0 {
                    return Err(Error::config(
                        key,
                        format!("scale must be finite and >= 0, got {c}"),
                    ));
                }
            }
            Covariance::Full(a) => {
                if a.nrows() != dim || a.ncols() != dim {
                    return Err(Error::config(
                        key,
                        format!(
                            "expected a {dim}x{dim} matrix, got {}x{}",
                            a.nrows(),
                            a.ncols()
                        ),
                    ));
                }
                if !linalg::is_hermitian(a) {
                    return Err(Error::config(key, "matrix is not Hermitian"));
                }
                if !linalg::is_psd(a) {
                    return Err(Error::config(key, "matrix is not positive semi-definite"));
                }
            }
        }
        Ok(())
    }

    /// Real diagonal of the covariance as a length-`dim` vector.
    pub fn diagonal(&self, dim: usize) -> DVector<f64> {
        match self {
            Covariance::Scaled(c) => DVector::from_element(dim, *c),
            Covariance::Full(a) => DVector::from_fn(dim, |i, _| a[(i, i)].re),
        }
    }

    pub fn to_matrix(&self, dim: usize) -> CMatrix {
        match self {
            Covariance::Scaled(c) => CMatrix::identity(dim, dim).scale(*c),
            Covariance::Full(a) => a.clone(),
        }
    }

    fn factor(&self, dim: usize, key: &str) -> Result<Factor> {
        self.validate(dim, key)?;
        match self {
            Covariance::Scaled(c) => Ok(Factor::Scaled(c.sqrt())),
            Covariance::Full(a) => linalg::psd_factor(a)
                .map(Factor::Full)
                .ok_or_else(|| Error::config(key, "covariance factorization failed")),
        }
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Scaled(f64),
    Full(CMatrix),
}

impl Factor {
    fn color(&self, white: CVector) -> CVector {
        match self {
            Factor::Scaled(s) => white.scale(*s),
            Factor::Full(l) => l * white,
        }
    }
}

/// Which receiver noise variance the uplink noise-plus-distortion matrix uses.
///
/// The uplink signal is received at the BS, so `Bs` (σ²_BS) is the physically
/// consistent choice. `UeAsPrinted` reproduces the alternative form that uses
/// σ²_UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UplinkNoiseSource {
    #[default]
    Bs,
    UeAsPrinted,
}

impl std::str::FromStr for UplinkNoiseSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "bs" => Ok(UplinkNoiseSource::Bs),
            "ue-as-printed" => Ok(UplinkNoiseSource::UeAsPrinted),
            other => Err(format!("expected `bs` or `ue-as-printed`, got `{other}`")),
        }
    }
}

/// Dimensions, powers, noise variances, impairment coefficients and channel
/// covariances. Powers and variances are in Joule per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count `M`.
    pub antennas: usize,
    /// IRS reflector count `N`.
    pub reflectors: usize,
    pub p_bs: f64,
    pub p_ue: f64,
    pub sigma2_bs: f64,
    pub sigma2_ue: f64,
    pub kappa_bs: f64,
    pub kappa_ue: f64,
    /// Covariance of the direct BS–user channel.
    pub cov_direct: Covariance,
    /// Covariance of each cascaded column, one per reflector.
    pub cov_irs_columns: Vec<Covariance>,
    pub uplink_noise_source: UplinkNoiseSource,
}

impl SystemConfig {
    /// Ideal hardware, unit powers and noise, identity covariances.
    pub fn new(antennas: usize, reflectors: usize) -> Self {
        Self {
            antennas,
            reflectors,
            p_bs: 1.0,
            p_ue: 1.0,
            sigma2_bs: 1.0,
            sigma2_ue: 1.0,
            kappa_bs: 0.0,
            kappa_ue: 0.0,
            cov_direct: Covariance::identity(),
            cov_irs_columns: vec![Covariance::identity(); reflectors],
            uplink_noise_source: UplinkNoiseSource::Bs,
        }
    }

    pub fn with_kappas(mut self, kappa_bs: f64, kappa_ue: f64) -> Self {
        self.kappa_bs = kappa_bs;
        self.kappa_ue = kappa_ue;
        self
    }

    pub fn with_powers(mut self, p_bs: f64, p_ue: f64) -> Self {
        self.p_bs = p_bs;
        self.p_ue = p_ue;
        self
    }

    pub fn with_noise(mut self, sigma2_bs: f64, sigma2_ue: f64) -> Self {
        self.sigma2_bs = sigma2_bs;
        self.sigma2_ue = sigma2_ue;
        self
    }

    /// Uses `cov` for every cascaded column.
    pub fn with_irs_covariance(mut self, cov: Covariance) -> Self {
        self.cov_irs_columns = vec![cov; self.reflectors];
        self
    }

    pub fn with_direct_covariance(mut self, cov: Covariance) -> Self {
        self.cov_direct = cov;
        self
    }

    /// Transmit power and receiver noise variance of `dir`.
    pub fn power_and_noise(&self, dir: LinkDirection) -> (f64, f64) {
        match dir {
            LinkDirection::Downlink => (self.p_bs, self.sigma2_ue),
            LinkDirection::Uplink => match self.uplink_noise_source {
                UplinkNoiseSource::Bs => (self.p_ue, self.sigma2_bs),
                UplinkNoiseSource::UeAsPrinted => (self.p_ue, self.sigma2_ue),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::config("m", "antenna count must be >= 1"));
        }
        for (key, v) in [
            ("p_bs", self.p_bs),
            ("p_ue", self.p_ue),
            ("sigma2_bs", self.sigma2_bs),
            ("sigma2_ue", self.sigma2_ue),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        self.validate_kappas()?;
        self.validate_covariances()
    }

    pub(crate) fn validate_kappas(&self) -> Result<()> {
        for (key, v) in [("kappa_bs", self.kappa_bs), ("kappa_ue", self.kappa_ue)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(
                    key,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn validate_covariances(&self) -> Result<()> {
        if self.cov_irs_columns.len() != self.reflectors {
            return Err(Error::config(
                "cov_irs",
                format!(
                    "expected {} column covariances, got {}",
                    self.reflectors,
                    self.cov_irs_columns.len()
                ),
            ));
        }
        self.cov_direct.validate(self.antennas, "cov_direct")?;
        for cov in &self.cov_irs_columns {
            cov.validate(self.antennas, "cov_irs")?;
        }
        Ok(())
    }
}

/// Split of a coherence period into uplink pilot, uplink data and downlink
/// data phases, all in channel uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolTiming {
    tau: f64,
    tau_pilot: f64,
    tau_up: f64,
    tau_down: f64,
}

impl ProtocolTiming {
    pub fn new(tau_pilot: f64, tau_up: f64, tau_down: f64) -> Result<Self> {
        for (key, v) in [
            ("tau_pilot", tau_pilot),
            ("tau_up", tau_up),
            ("tau_down", tau_down),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(
                    key,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if tau_up + tau_down <= 0.0 {
            return Err(Error::config("tau_up", "tau_up + tau_down must be > 0"));
        }
        Ok(Self {
            tau: tau_pilot + tau_up + tau_down,
            tau_pilot,
            tau_up,
            tau_down,
        })
    }

    /// One pilot channel use per training subphase (`N + 1` subphases), a
    /// coherence period of `10·(N + 1)` uses, data split evenly.
    pub fn for_reflectors(reflectors: usize) -> Self {
        let pilot = (reflectors + 1) as f64;
        let tau = 10.0 * pilot;
        let data = (tau - pilot) / 2.0;
        Self::new(pilot, data, data).expect("default timing is valid")
    }

    /// No training and no uplink data: every channel use carries downlink
    /// data, so the downlink prefactor is 1.
    pub fn downlink_only() -> Self {
        Self::new(0.0, 0.0, 1.0).expect("downlink-only timing is valid")
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn tau_pilot(&self) -> f64 {
        self.tau_pilot
    }

    pub fn tau_up(&self) -> f64 {
        self.tau_up
    }

    pub fn tau_down(&self) -> f64 {
        self.tau_down
    }

    /// Fraction of the coherence period carrying data in direction `dir`.
    pub fn prefactor(&self, dir: LinkDirection) -> f64 {
        match dir {
            LinkDirection::Downlink => self.tau_down / self.tau,
            LinkDirection::Uplink => self.tau_up / self.tau,
        }
    }

    /// `τ_down / (τ_up + τ_down)`.
    pub fn downlink_data_share(&self) -> f64 {
        self.tau_down / (self.tau_up + self.tau_down)
    }
}

/// One draw of the direct and cascaded channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Direct BS–user channel, length `M`.
    pub direct: CVector,
    /// Cascaded channel `G·diag(h_r)`, `M×N`.
    pub cascaded: CMatrix,
}

/// Pre-factored channel covariances for repeated sampling.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    antennas: usize,
    direct: Factor,
    columns: Vec<Factor>,
}

impl ChannelSampler {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        if config.antennas == 0 {
            return Err(Error::config("m", "antenna count must be >= 1"));
        }
        if config.cov_irs_columns.len() != config.reflectors {
            config.validate_covariances()?;
        }
        let m = config.antennas;
        let direct = config.cov_direct.factor(m, "cov_direct")?;
        // Identical column covariances share one factorization.
        let mut columns: Vec<Factor> = Vec::with_capacity(config.reflectors);
        for (i, cov) in config.cov_irs_columns.iter().enumerate() {
            if i > 0 && *cov == config.cov_irs_columns[i - 1] {
                let prev = columns[i - 1].clone();
                columns.push(prev);
            } else {
                columns.push(cov.factor(m, "cov_irs")?);
            }
        }
        Ok(Self {
            antennas: m,
            direct,
            columns,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let m = self.antennas;
        let direct = self.direct.color(linalg::standard_complex_gaussian(rng, m));
        let mut cascaded = CMatrix::zeros(m, self.columns.len());
        for (i, factor) in self.columns.iter().enumerate() {
            let col = factor.color(linalg::standard_complex_gaussian(rng, m));
            cascaded.set_column(i, &col);
        }
        ChannelRealization { direct, cascaded }
    }
}

/// Draws one channel realization; deterministic in `seed`.
pub fn generate_channels(config: &SystemConfig, seed: u64) -> Result<ChannelRealization> {
    let sampler = ChannelSampler::new(config)?;
    Ok(sampler.sample(&mut rng::rng_from_seed(seed)))
}

/// `G·diag(h_r)`: column `i` of `g` scaled by `h_r[i]`.
pub fn cascade_channel(g: &CMatrix, h_r: &CVector) -> Result<CMatrix> {
    if g.ncols() != h_r.len() {
        return Err(Error::DimensionMismatch {
            expected: g.ncols(),
            actual: h_r.len(),
        });
    }
    let mut out = g.clone();
    for (mut col, &s) in out.column_iter_mut().zip(h_r.iter()) {
        col *= s;
    }
    Ok(out)
}

/// Per-element IRS phase-noise distribution. Both kinds are symmetric about
/// zero, so the circular mean direction is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseNoise {
    /// Uniform on `[−half_width, half_width)`, `0 ≤ half_width ≤ π`.
    Uniform { half_width: f64 },
    /// Von Mises with zero mean direction and the given concentration
    /// (`0` is uniform on the circle).
    VonMises { concentration: f64 },
}

impl Default for PhaseNoise {
    fn default() -> Self {
        PhaseNoise::none()
    }
}

impl PhaseNoise {
    pub fn none() -> Self {
        PhaseNoise::Uniform { half_width: 0.0 }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PhaseNoise::Uniform { half_width } if *half_width == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseNoise::Uniform { half_width } => {
                if !half_width.is_finite() || half_width < 0.0 {
                    return Err(Error::config(
                        "phase_noise",
                        format!("width must be >= 0, got {half_width}"),
                    ));
                }
                if half_width > PI {
                    return Err(Error::config(
                        "phase_noise",
                        format!("width {half_width} puts the support outside [-pi, pi)"),
                    ));
                }
            }
            PhaseNoise::VonMises { concentration } => {
                if !concentration.is_finite() || concentration < 0.0 {
                    return Err(Error::config(
                        "phase_noise",
                        format!("concentration must be finite and >= 0, got {concentration}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// One sample in `[−π, π)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            PhaseNoise::Uniform { half_width } => {
                if half_width == 0.0 {
                    0.0
                } else {
                    rng.random_range(-half_width..half_width)
                }
            }
            PhaseNoise::VonMises { concentration } => sample_von_mises(rng, concentration),
        }
    }
}

// Best & Fisher rejection sampler around mean direction zero.
fn sample_von_mises<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> f64 {
    if kappa < 1e-8 {
        return rng.random_range(-PI..PI);
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let theta = f.clamp(-1.0, 1.0).acos();
            let theta = if u3 < 0.5 { -theta } else { theta };
            return if theta >= PI { -PI } else { theta };
        }
    }
}

/// Nominal IRS phases plus the phase-noise model and its current realization.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsState {
    theta: Vec<f64>,
    noise: PhaseNoise,
    delta_theta: Vec<f64>,
}

impl IrsState {
    /// Phases are wrapped into `[0, 2π)`; the noise realization starts at zero.
    pub fn new(theta: Vec<f64>, noise: PhaseNoise) -> Result<Self> {
        noise.validate()?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("theta", "phases must be finite"));
        }
        let theta: Vec<f64> = theta.into_iter().map(|t| t.rem_euclid(TAU)).collect();
        let delta_theta = vec![0.0; theta.len()];
        Ok(Self {
            theta,
            noise,
            delta_theta,
        })
    }

    /// All nominal phases zero (the IRS acts as an identity matrix).
    pub fn identity(reflectors: usize, noise: PhaseNoise) -> Result<Self> {
        Self::new(vec![0.0; reflectors], noise)
    }

    /// Nominal phases drawn uniformly on `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(
        reflectors: usize,
        noise: PhaseNoise,
        rng: &mut R,
    ) -> Result<Self> {
        let theta = (0..reflectors)
            .map(|_| rng.random_range(0.0..TAU))
            .collect();
        Self::new(theta, noise)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn delta_theta(&self) -> &[f64] {
        &self.delta_theta
    }

    pub fn noise(&self) -> PhaseNoise {
        self.noise
    }

    /// Same nominal phases with a fresh phase-noise draw.
    pub fn realize_with<R: Rng + ?Sized>(&self, rng: &mut R) -> IrsState {
        let delta_theta = if self.noise.is_none() {
            vec![0.0; self.theta.len()]
        } else {
            self.theta.iter().map(|_| self.noise.sample(rng)).collect()
        };
        IrsState {
            theta: self.theta.clone(),
            noise: self.noise,
            delta_theta,
        }
    }

    /// `exp(j(θ_i + Δθ_i))` for every element.
    pub fn reflection_vector(&self) -> CVector {
        CVector::from_iterator(
            self.theta.len(),
            self.theta
                .iter()
                .zip(&self.delta_theta)
                .map(|(t, d)| Complex64::from_polar(1.0, t + d)),
        )
    }
}

pub fn realize_phase_noise(state: &IrsState, seed: u64) -> Result<IrsState> {
    state.noise.validate()?;
    Ok(state.realize_with(&mut rng::rng_from_seed(seed)))
}

/// `h_d + H_irs·θ̃`, the channel seen through the (noisy) IRS.
pub fn effective_channel(realization: &ChannelRealization, irs: &IrsState) -> Result<CVector> {
    let m = realization.direct.len();
    if realization.cascaded.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: realization.cascaded.nrows(),
        });
    }
    if realization.cascaded.ncols() != irs.len() {
        return Err(Error::DimensionMismatch {
            expected: realization.cascaded.ncols(),
            actual: irs.len(),
        });
    }
    if irs.is_empty() {
        return Ok(realization.direct.clone());
    }
    Ok(&realization.direct + &realization.cascaded * irs.reflection_vector())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_covariance_gives_zero_direct_channel() {
        let cfg = SystemConfig::new(3, 0).with_direct_covariance(Covariance::Scaled(0.0));
        let r = generate_channels(&cfg, 1).unwrap();
        assert!(r.direct.iter().all(|z| *z == c(0.0, 0.0)));
        let cfg = cfg.with_direct_covariance(Covariance::Full(CMatrix::zeros(3, 3)));
        let r = generate_channels(&cfg, 1).unwrap();
        assert!(r.direct.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn same_seed_same_realization() {
        let cfg = SystemConfig::new(4, 8);
        assert_eq!(
            generate_channels(&cfg, 9).unwrap(),
            generate_channels(&cfg, 9).unwrap()
        );
        assert_ne!(
            generate_channels(&cfg, 9).unwrap(),
            generate_channels(&cfg, 10).unwrap()
        );
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.0)]));
        let cfg = SystemConfig::new(2, 1).with_irs_covariance(Covariance::Full(bad));
        match generate_channels(&cfg, 0) {
            Err(Error::InvalidConfig { key, .. }) => assert_eq!(key, "cov_irs"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cascade_scales_columns() {
        let g =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let h = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let out = cascade_channel(&g, &h).unwrap();
        let want =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0), c(0.0, 4.0)]);
        assert_eq!(out, want);
        assert_eq!(
            cascade_channel(&g, &CVector::from_element(2, c(1.0, 0.0))).unwrap(),
            g
        );
        assert_eq!(
            cascade_channel(&g, &CVector::zeros(2)).unwrap(),
            CMatrix::zeros(2, 2)
        );
        assert!(matches!(
            cascade_channel(&g, &CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_width_noise_keeps_nominal_phases() {
        let s = IrsState::new(vec![0.3, 1.2, 5.0], PhaseNoise::none()).unwrap();
        let r = realize_phase_noise(&s, 3).unwrap();
        assert!(r.delta_theta().iter().all(|&d| d == 0.0));
        assert_eq!(r.reflection_vector(), s.reflection_vector());
    }

    #[test]
    fn uniform_noise_stays_in_support() {
        let s = IrsState::identity(
            10_000,
            PhaseNoise::Uniform {
                half_width: PI / 4.0,
            },
        )
        .unwrap();
        let r = realize_phase_noise(&s, 11).unwrap();
        assert!(r.delta_theta().iter().all(|d| d.abs() <= PI / 4.0));
    }

    #[test]
    fn circular_mean_direction_is_zero() {
        // Oracle: empirical arg(mean e^{jΔθ}) over 1e5 draws.
        for noise in [
            PhaseNoise::Uniform { half_width: PI },
            PhaseNoise::Uniform { half_width: 1.0 },
            PhaseNoise::VonMises { concentration: 0.5 },
            PhaseNoise::VonMises { concentration: 4.0 },
        ] {
            let s = IrsState::identity(100_000, noise).unwrap();
            let r = realize_phase_noise(&s, 21).unwrap();
            let mean: Complex64 = r
                .delta_theta()
                .iter()
                .map(|&d| Complex64::from_polar(1.0, d))
                .sum::<Complex64>()
                / 1e5;
            assert!(r.delta_theta().iter().all(|&d| (-PI..PI).contains(&d)));
            if matches!(noise, PhaseNoise::Uniform { half_width } if half_width == PI) {
                // Resultant length ~0; the angle is noise-dominated, so check the
                // imaginary part which carries any asymmetry.
                assert!(mean.im.abs() < 0.02, "{noise:?}: {mean}");
            } else {
                assert!(mean.arg().abs() < 0.02, "{noise:?}: {mean}");
            }
        }
    }

    #[test]
    fn von_mises_resultant_length_matches_bessel_ratio() {
        // E[cos Δθ] = I1(k)/I0(k); for k = 2 this is 0.697774657964.
        let s = IrsState::identity(200_000, PhaseNoise::VonMises { concentration: 2.0 }).unwrap();
        let r = realize_phase_noise(&s, 5).unwrap();
        let m = r.delta_theta().iter().map(|d| d.cos()).sum::<f64>() / 200_000.0;
        assert!((m - 0.697_774_657_964).abs() < 0.005, "{m}");
    }

    #[test]
    fn phase_noise_support_beyond_pi_is_rejected() {
        assert!(IrsState::identity(2, PhaseNoise::Uniform { half_width: 3.2 }).is_err());
        assert!(IrsState::identity(2, PhaseNoise::Uniform { half_width: PI }).is_ok());
        assert!(IrsState::identity(
            2,
            PhaseNoise::VonMises {
                concentration: -1.0
            }
        )
        .is_err());
    }

    #[test]
    fn effective_channel_examples() {
        let id = ChannelRealization {
            direct: CVector::zeros(3),
            cascaded: CMatrix::identity(3, 3),
        };
        let irs = IrsState::identity(3, PhaseNoise::none()).unwrap();
        assert_eq!(
            effective_channel(&id, &irs).unwrap(),
            CVector::from_element(3, c(1.0, 0.0))
        );

        let direct = CVector::from_vec(vec![c(1.0, 2.0), c(-1.0, 0.5)]);
        let no_irs = ChannelRealization {
            direct: direct.clone(),
            cascaded: CMatrix::zeros(2, 0),
        };
        let empty = IrsState::identity(0, PhaseNoise::none()).unwrap();
        assert_eq!(effective_channel(&no_irs, &empty).unwrap(), direct);

        let cancel = ChannelRealization {
            direct: CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            cascaded: CMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]),
        };
        let irs = IrsState::new(vec![PI], PhaseNoise::none()).unwrap();
        let h = effective_channel(&cancel, &irs).unwrap();
        assert!(h.norm() < 1e-15);

        assert!(effective_channel(&cancel, &empty).is_err());
    }

    #[test]
    fn reflection_vector_has_unit_modulus() {
        let mut rng = rng::rng_from_seed(4);
        let s = IrsState::random(500, PhaseNoise::Uniform { half_width: 2.0 }, &mut rng).unwrap();
        let r = s.realize_with(&mut rng);
        assert!(r.theta().iter().all(|t| (0.0..TAU).contains(t)));
        assert!(r
            .reflection_vector()
            .iter()
            .all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn timing_invariants() {
        let t = ProtocolTiming::for_reflectors(9);
        assert_eq!(t.tau_pilot(), 10.0);
        assert_eq!(t.tau(), t.tau_pilot() + t.tau_up() + t.tau_down());
        assert_eq!(t.tau(), 100.0);
        assert_eq!(t.prefactor(LinkDirection::Downlink), 0.45);
        assert_eq!(
            ProtocolTiming::downlink_only().prefactor(LinkDirection::Downlink),
            1.0
        );
        assert!(ProtocolTiming::new(5.0, 0.0, 0.0).is_err());
        assert!(ProtocolTiming::new(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn config_validation_names_key() {
        let mut cfg = SystemConfig::new(2, 3);
        cfg.p_bs = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { key, .. }) if key == "p_bs"));
        let mut cfg = SystemConfig::new(2, 3);
        cfg.kappa_ue = -0.1;
        assert!(
            matches!(cfg.validate(), Err(Error::InvalidConfig { key, .. }) if key == "kappa_ue")
        );
        let mut cfg = SystemConfig::new(2, 3);
        cfg.cov_irs_columns.pop();
        assert!(
            matches!(cfg.validate(), Err(Error::InvalidConfig { key, .. }) if key == "cov_irs")
        );
        assert!(
            matches!(SystemConfig::new(0, 1).validate(), Err(Error::InvalidConfig { key, .. }) if key == "m")
        );
    }
}
