//! Spectral efficiency: per realization, ergodic (Monte Carlo), and the
//! closed-form ceilings reached as transmit power or array sizes grow.
//!
//! All values are in bits per channel use. The protocol prefactor (the data
//! fraction of the coherence period) is always passed explicitly.

use rayon::prelude::*;

use crate::beamforming::{self, LinkDirection};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::{ChannelSampler, IrsState, SystemConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub mean: f64,
    /// Standard error of the mean (zero for a single trial).
    pub std_error: f64,
    pub trials: usize,
    /// Whether a prefactor other than 1 was applied.
    pub prefactor_applied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
}

impl CapacityBounds {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }

    fn scaled(self, factor: f64) -> Self {
        Self {
            lower: self.lower * factor,
            upper: self.upper * factor,
        }
    }
}

fn noise_to_power(config: &SystemConfig, dir: LinkDirection) -> Result<f64> {
    let (power, noise) = config.power_and_noise(dir);
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "transmit power must be > 0, got {power}"
        )));
    }
    if !noise.is_finite() || noise <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be > 0, got {noise}"
        )));
    }
    Ok(noise / power)
}

/// `log₂(1 + hᴴD⁻¹h)` for one channel, with the optimal beamformer and no
/// protocol prefactor.
///
/// Evaluated through the diagonal reduced matrix: `q̃ = Σ|h_i|²/D̃_ii`, then
/// `hᴴD⁻¹h = q̃/(1 + κ_UE·q̃)`. [`instantaneous_se_full`] is the direct route.
pub fn instantaneous_se(h_eff: &CVector, config: &SystemConfig, dir: LinkDirection) -> Result<f64> {
    if h_eff.len() != config.antennas {
        return Err(Error::DimensionMismatch {
            expected: config.antennas,
            actual: h_eff.len(),
        });
    }
    let r = noise_to_power(config, dir)?;
    let per_antenna = (1.0 + config.kappa_ue) * config.kappa_bs;
    let reduced: f64 = h_eff
        .iter()
        .map(|h| {
            let g = h.norm_sqr();
            g / (per_antenna * g + r)
        })
        .sum();
    let q = reduced / (1.0 + config.kappa_ue * reduced);
    Ok((1.0 + q).log2())
}

/// Same quantity as [`instantaneous_se`], via a Cholesky solve with the full
/// noise-plus-distortion matrix.
pub fn instantaneous_se_full(
    h_eff: &CVector,
    config: &SystemConfig,
    dir: LinkDirection,
) -> Result<f64> {
    let mat = beamforming::build_noise_matrices(h_eff, config, dir)?;
    let q = beamforming::quadratic_form(h_eff, &mat, false)?;
    Ok((1.0 + q).log2())
}

/// Effective channel of Monte Carlo trial `trial`: channels and phase noise
/// drawn from one stream seeded by [`rng::trial_seed`].
pub fn trial_channel(
    sampler: &ChannelSampler,
    irs: &IrsState,
    seed: u64,
    trial: u64,
) -> Result<CVector> {
    let mut rng = rng::rng_from_seed(rng::trial_seed(seed, trial));
    let realization = sampler.sample(&mut rng);
    let irs = irs.realize_with(&mut rng);
    crate::model::effective_channel(&realization, &irs)
}

/// Plain Monte Carlo estimate of `prefactor · E{log₂(1 + hᴴD⁻¹h)}` over fresh
/// channel and phase-noise draws. The nominal IRS phases are held fixed.
///
/// Trials run in parallel; each draws from its own seed and the reduction is
/// sequential, so the result does not depend on the thread count.
pub fn ergodic_capacity(
    config: &SystemConfig,
    irs: &IrsState,
    dir: LinkDirection,
    prefactor: f64,
    trials: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    if trials == 0 {
        return Err(Error::config("trials", "must be >= 1"));
    }
    check_prefactor(prefactor)?;
    config.validate()?;
    if irs.len() != config.reflectors {
        return Err(Error::DimensionMismatch {
            expected: config.reflectors,
            actual: irs.len(),
        });
    }
    let sampler = ChannelSampler::new(config)?;
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = trial_channel(&sampler, irs, seed, t)?;
            instantaneous_se(&h, config, dir)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std_error) = mean_and_std_error(&samples);
    Ok(CapacityEstimate {
        mean: prefactor * mean,
        std_error: prefactor * std_error,
        trials,
        prefactor_applied: prefactor != 1.0,
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_prefactor(prefactor: f64) -> Result<()> {
    if !prefactor.is_finite() || prefactor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "prefactor must be finite and >= 0, got {prefactor}"
        )));
    }
    Ok(())
}

fn check_kappas(kappa_bs: f64, kappa_ue: f64) -> Result<()> {
    for (key, k) in [("kappa_bs", kappa_bs), ("kappa_ue", kappa_ue)] {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::config(
                key,
                format!("must be finite and >= 0, got {k}"),
            ));
        }
    }
    Ok(())
}

/// `log₂(1 + 1/(κ_BS + κ_UE(1 + κ_BS)))`, the single-antenna ceiling shared by
/// both lower bounds.
fn single_antenna_ceiling(kappa_bs: f64, kappa_ue: f64) -> f64 {
    (1.0 + 1.0 / (kappa_bs + kappa_ue * (1.0 + kappa_bs))).log2()
}

/// Bounds on the downlink capacity limit as `p_BS → ∞` with `M` antennas:
///
/// ```text
/// upper = prefactor · log₂(1 + M / (κ_BS + κ_UE(M + κ_BS)))
/// lower = prefactor · log₂(1 + 1 / (κ_BS + κ_UE(1 + κ_BS)))
/// ```
pub fn high_power_bounds(
    antennas: usize,
    kappa_bs: f64,
    kappa_ue: f64,
    prefactor: f64,
) -> Result<CapacityBounds> {
    if antennas == 0 {
        return Err(Error::config("m", "antenna count must be >= 1"));
    }
    check_kappas(kappa_bs, kappa_ue)?;
    check_prefactor(prefactor)?;
    if kappa_bs == 0.0 && kappa_ue == 0.0 {
        return Err(Error::Unbounded(
            "ideal hardware has no high-power capacity ceiling",
        ));
    }
    let m = antennas as f64;
    let upper = (1.0 + m / (kappa_bs + kappa_ue * (m + kappa_bs))).log2();
    let lower = single_antenna_ceiling(kappa_bs, kappa_ue);
    Ok(CapacityBounds { lower, upper }.scaled(prefactor))
}

/// Bounds on the downlink capacity limit as `M, N → ∞`:
/// `upper = prefactor·log₂(1 + 1/κ_UE)`, lower as in [`high_power_bounds`].
pub fn large_array_bounds(kappa_bs: f64, kappa_ue: f64, prefactor: f64) -> Result<CapacityBounds> {
    check_kappas(kappa_bs, kappa_ue)?;
    check_prefactor(prefactor)?;
    if kappa_ue == 0.0 {
        return Err(Error::Unbounded(
            "kappa_ue = 0 gives no large-array capacity ceiling",
        ));
    }
    let upper = (1.0 + 1.0 / kappa_ue).log2();
    let lower = single_antenna_ceiling(kappa_bs, kappa_ue);
    Ok(CapacityBounds { lower, upper }.scaled(prefactor))
}

/// `lim_{p→∞} E{hᴴD̃⁻¹h} = M / ((1 + κ_UE)·κ_BS)`.
pub fn high_power_quadratic_limit(antennas: usize, kappa_bs: f64, kappa_ue: f64) -> Result<f64> {
    check_kappas(kappa_bs, kappa_ue)?;
    if kappa_bs == 0.0 {
        return Err(Error::Unbounded(
            "kappa_bs = 0 makes the reduced quadratic form diverge",
        ));
    }
    Ok(antennas as f64 / ((1.0 + kappa_ue) * kappa_bs))
}
