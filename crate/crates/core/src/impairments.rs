//! Additive transceiver distortion noise.
//!
//! Distortion at an antenna is proportional to the signal power at that
//! antenna, so the BS distortion covariance is always diagonal. We store only
//! its diagonal; [`DistortionCovariances::upsilon_bs_matrix`] expands it.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::SystemConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCovariances {
    /// Diagonal of the BS distortion covariance `Υ_BS`.
    pub upsilon_bs: DVector<f64>,
    /// User distortion variance `v_UE`.
    pub v_ue: f64,
}

impl DistortionCovariances {
    pub fn upsilon_bs_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.upsilon_bs.map(|d| Complex64::new(d, 0.0)))
    }
}

/// Error vector magnitude `√κ` of a transceiver with impairment coefficient κ.
pub fn evm_from_kappa(kappa: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "kappa must be >= 0, got {kappa}"
        )));
    }
    Ok(kappa.sqrt())
}

fn check_kappa(key: &str, kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::config(
            key,
            format!("must be finite and >= 0, got {kappa}"),
        ));
    }
    Ok(())
}

/// Downlink distortion for transmit covariance `q` over channel `h_eff`:
/// `Υ_BS = κ_BS·diag(Q)` and `v_UE = κ_UE·(hᴴQh + hᴴΥ_BS h)`.
pub fn downlink_distortion(
    h_eff: &CVector,
    q: &CMatrix,
    kappa_bs: f64,
    kappa_ue: f64,
) -> Result<DistortionCovariances> {
    check_kappa("kappa_bs", kappa_bs)?;
    check_kappa("kappa_ue", kappa_ue)?;
    let m = h_eff.len();
    if q.nrows() != m || q.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: q.nrows(),
        });
    }
    if !linalg::is_psd(q) {
        return Err(Error::InvalidArgument(
            "transmit covariance must be Hermitian positive semi-definite".into(),
        ));
    }
    let upsilon_bs = DVector::from_fn(m, |i, _| kappa_bs * q[(i, i)].re);
    let signal = h_eff.dotc(&(q * h_eff)).re;
    let distortion: f64 = h_eff
        .iter()
        .zip(upsilon_bs.iter())
        .map(|(h, u)| h.norm_sqr() * u)
        .sum();
    Ok(DistortionCovariances {
        upsilon_bs,
        v_ue: kappa_ue * (signal + distortion),
    })
}

/// Uplink distortion from channel statistics:
/// `v_UE = κ_UE·p_UE`, `Υ_BS = κ_BS·p_UE·(1 + κ_UE)·diag(C_d + Σ C_i)`.
///
/// A zero `p_UE` is accepted here (no signal, no distortion).
pub fn uplink_distortion(config: &SystemConfig) -> Result<DistortionCovariances> {
    config.validate_kappas()?;
    if !config.p_ue.is_finite() || config.p_ue < 0.0 {
        return Err(Error::config(
            "p_ue",
            format!("must be finite and >= 0, got {}", config.p_ue),
        ));
    }
    config.validate_covariances()?;
    let m = config.antennas;
    let mut total = config.cov_direct.diagonal(m);
    for cov in &config.cov_irs_columns {
        total += cov.diagonal(m);
    }
    let scale = config.kappa_bs * config.p_ue * (1.0 + config.kappa_ue);
    Ok(DistortionCovariances {
        upsilon_bs: total * scale,
        v_ue: config.kappa_ue * config.p_ue,
    })
}
