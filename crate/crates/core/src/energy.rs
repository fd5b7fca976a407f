//! Power consumption and downlink energy efficiency (bits per Joule).
//!
//! Circuit power is `M·ρ + ζ` per channel use. The model has no per-reflector
//! term: the IRS is passive.

use crate::capacity::{self, CapacityBounds};
use crate::error::{Error, Result};
use crate::model::ProtocolTiming;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    /// Circuit power per BS antenna.
    pub rho: f64,
    /// Static circuit power.
    pub zeta: f64,
}

impl PowerModel {
    pub fn new(rho: f64, zeta: f64) -> Result<Self> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::config(
                "rho",
                format!("must be finite and >= 0, got {rho}"),
            ));
        }
        if !zeta.is_finite() || zeta <= 0.0 {
            return Err(Error::config(
                "zeta",
                format!("must be finite and > 0, got {zeta}"),
            ));
        }
        Ok(Self { rho, zeta })
    }

    /// Splits a total per-antenna-plus-static budget `rho + zeta = total` so
    /// that `rho / total = fraction`.
    pub fn from_split(total: f64, fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::config(
                "rho_fraction",
                format!("must be in [0, 1), got {fraction}"),
            ));
        }
        Self::new(total * fraction, total * (1.0 - fraction))
    }

    pub fn circuit_power(&self, antennas: usize) -> f64 {
        antennas as f64 * self.rho + self.zeta
    }
}

/// Transmit energy spent by BS and user in one coherence period.
pub fn energy_per_coherence(timing: &ProtocolTiming, p_bs: f64, p_ue: f64) -> f64 {
    timing.tau_down() * p_bs + (timing.tau_pilot() + timing.tau_up()) * p_ue
}

/// Average power charged to the downlink:
/// `(τ_down/(τ_up+τ_down))·(τ_pilot·p_UE/τ + Mρ + ζ) + τ_down·p_BS/τ`.
pub fn downlink_average_power(
    timing: &ProtocolTiming,
    p_bs: f64,
    p_ue: f64,
    power: &PowerModel,
    antennas: usize,
) -> f64 {
    let tau = timing.tau();
    timing.downlink_data_share() * (timing.tau_pilot() * p_ue / tau + power.circuit_power(antennas))
        + timing.tau_down() * p_bs / tau
}

/// Downlink energy efficiency. `capacity` must already carry the
/// `τ_down/τ` prefactor.
pub fn downlink_ee(
    capacity: f64,
    timing: &ProtocolTiming,
    p_bs: f64,
    p_ue: f64,
    power: &PowerModel,
    antennas: usize,
) -> Result<f64> {
    let denom = downlink_average_power(timing, p_bs, p_ue, power, antennas);
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "average power must be > 0, got {denom}"
        )));
    }
    Ok(capacity / denom)
}

// τ·ζ / (τ_up + τ_down)
fn static_power_per_data_use(timing: &ProtocolTiming, zeta: f64) -> Result<f64> {
    if !zeta.is_finite() || zeta <= 0.0 {
        return Err(Error::config(
            "zeta",
            format!("must be finite and > 0, got {zeta}"),
        ));
    }
    Ok(timing.tau() * zeta / (timing.tau_up() + timing.tau_down()))
}

/// Bounds on the maximal downlink energy efficiency with static circuit power
/// only (`ρ = 0`) and transmit power neglected.
pub fn ee_bounds_max(
    kappa_bs: f64,
    kappa_ue: f64,
    timing: &ProtocolTiming,
    zeta: f64,
) -> Result<CapacityBounds> {
    let denom = static_power_per_data_use(timing, zeta)?;
    let b = capacity::large_array_bounds(kappa_bs, kappa_ue, 1.0)?;
    Ok(CapacityBounds {
        lower: b.lower / denom,
        upper: b.upper / denom,
    })
}

/// Energy-efficiency ceiling for a fixed antenna count with `ρ = 0`.
pub fn ee_upper_fixed_antennas(
    antennas: usize,
    kappa_bs: f64,
    kappa_ue: f64,
    timing: &ProtocolTiming,
    zeta: f64,
) -> Result<f64> {
    let denom = static_power_per_data_use(timing, zeta)?;
    Ok(capacity::high_power_bounds(antennas, kappa_bs, kappa_ue, 1.0)?.upper / denom)
}

/// Maximal energy efficiency at `antennas` when circuit power grows with the
/// array: the high-power capacity ceiling for `M` antennas over
/// `τ(Mρ + ζ)/(τ_up + τ_down)`. Equals [`ee_upper_fixed_antennas`] at `ρ = 0`.
pub fn max_ee_at_antennas(
    antennas: usize,
    kappa_bs: f64,
    kappa_ue: f64,
    timing: &ProtocolTiming,
    power: &PowerModel,
) -> Result<f64> {
    let ceiling = capacity::high_power_bounds(
        antennas,
        kappa_bs,
        kappa_ue,
        timing.prefactor(crate::LinkDirection::Downlink),
    )?;
    downlink_ee(ceiling.upper, timing, 0.0, 0.0, power, antennas)
}
