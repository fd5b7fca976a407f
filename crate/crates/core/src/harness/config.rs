//! Flat key-value run configuration (TOML syntax).
//!
//! ```toml
//! kappa_bs = 0.0025
//! kappa_ue = 0.0025
//! cov_direct = "identity"      # or "scaled:<c>", or a row-major list
//! cov_irs = "scaled:0.5"
//! m_values = [1, 15, 50]
//! snr_db_values = [0, 10, 20]
//! ```
//!
//! Explicit covariance lists hold `M²` entries, each a real number or a
//! `[re, im]` pair.

use std::path::Path;

use num_complex::Complex64;
use toml::{Table, Value};

use crate::energy::PowerModel;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{Covariance, PhaseNoise, ProtocolTiming, SystemConfig};

pub const DEFAULT_KAPPA: f64 = 0.0025;
pub const DEFAULT_POWER_BUDGET: f64 = 0.5e-6;
pub const DEFAULT_TRIALS: usize = 2000;

/// Everything a sweep needs besides its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Powers, noise, impairments, direct covariance. `antennas` and
    /// `reflectors` are overridden per grid point.
    pub system: SystemConfig,
    /// Covariance applied to every cascaded column.
    pub cov_irs: Covariance,
    /// Explicit protocol timing; `None` derives it from `N` per grid point.
    pub timing: Option<ProtocolTiming>,
    /// `ρ + ζ` in Joule per channel use.
    pub power_budget: f64,
    pub phase_noise: PhaseNoise,
    /// Draw nominal IRS phases uniformly instead of using all zeros.
    pub random_phases: bool,
    pub apply_protocol_prefactor: bool,
    pub neglect_tx_power: bool,
    pub trials: usize,
    pub seed: u64,
    pub antenna_values: Option<Vec<usize>>,
    pub reflector_values: Option<Vec<usize>>,
    pub snr_db_values: Option<Vec<f64>>,
    pub rho_fractions: Option<Vec<f64>>,
    /// Largest antenna count of the energy-efficiency sweep.
    pub ee_antenna_max: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::new(1, 0).with_kappas(DEFAULT_KAPPA, DEFAULT_KAPPA),
            cov_irs: Covariance::identity(),
            timing: None,
            power_budget: DEFAULT_POWER_BUDGET,
            phase_noise: PhaseNoise::none(),
            random_phases: false,
            apply_protocol_prefactor: false,
            neglect_tx_power: false,
            trials: DEFAULT_TRIALS,
            seed: 0,
            antenna_values: None,
            reflector_values: None,
            snr_db_values: None,
            rho_fractions: None,
            ee_antenna_max: 200,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            Error::config("<file>", e.to_string().trim().to_string())
        })?;
        let mut cfg = RunConfig::default();
        let mut tau: [Option<f64>; 3] = [None; 3];
        let mut noise_kind = "uniform".to_string();
        let mut noise_width = 0.0;

        for (key, value) in &table {
            let k = key.as_str();
            match k {
                "m" => cfg.system.antennas = as_count(k, value)?,
                "n" => cfg.system.reflectors = as_count(k, value)?,
                "p_bs" => cfg.system.p_bs = as_f64(k, value)?,
                "p_ue" => cfg.system.p_ue = as_f64(k, value)?,
                "sigma2_bs" => cfg.system.sigma2_bs = as_f64(k, value)?,
                "sigma2_ue" => cfg.system.sigma2_ue = as_f64(k, value)?,
                "kappa_bs" => cfg.system.kappa_bs = as_f64(k, value)?,
                "kappa_ue" => cfg.system.kappa_ue = as_f64(k, value)?,
                "cov_direct" => cfg.system.cov_direct = as_covariance(k, value)?,
                "cov_irs" => cfg.cov_irs = as_covariance(k, value)?,
                "uplink_noise_variance_source" => {
                    cfg.system.uplink_noise_source = as_str(k, value)?
                        .parse()
                        .map_err(|e: String| Error::config(k, e))?
                }
                "tau_pilot" => tau[0] = Some(as_f64(k, value)?),
                "tau_up" => tau[1] = Some(as_f64(k, value)?),
                "tau_down" => tau[2] = Some(as_f64(k, value)?),
                "rho_plus_zeta" => cfg.power_budget = as_f64(k, value)?,
                "phase_noise_kind" => noise_kind = as_str(k, value)?.to_string(),
                "phase_noise_width" => noise_width = as_f64(k, value)?,
                "random_phases" => cfg.random_phases = as_bool(k, value)?,
                "apply_protocol_prefactor" => cfg.apply_protocol_prefactor = as_bool(k, value)?,
                "neglect_tx_power" => cfg.neglect_tx_power = as_bool(k, value)?,
                "trials" => cfg.trials = as_count(k, value)?,
                "seed" => cfg.seed = as_count(k, value)? as u64,
                "m_values" => cfg.antenna_values = Some(as_list(k, value, as_count)?),
                "n_values" => cfg.reflector_values = Some(as_list(k, value, as_count)?),
                "snr_db_values" => cfg.snr_db_values = Some(as_list(k, value, as_f64)?),
                "rho_fractions" => cfg.rho_fractions = Some(as_list(k, value, as_f64)?),
                "ee_m_max" => cfg.ee_antenna_max = as_count(k, value)?,
                other => return Err(Error::config(other, "unknown key")),
            }
        }

        cfg.phase_noise = match noise_kind.as_str() {
            "uniform" => PhaseNoise::Uniform {
                half_width: noise_width,
            },
            "von-mises" => PhaseNoise::VonMises {
                concentration: noise_width,
            },
            other => {
                return Err(Error::config(
                    "phase_noise_kind",
                    format!("expected `uniform` or `von-mises`, got `{other}`"),
                ))
            }
        };
        cfg.timing = match tau {
            [None, None, None] => None,
            [Some(p), Some(u), Some(d)] => Some(ProtocolTiming::new(p, u, d)?),
            _ => {
                return Err(Error::config(
                    "tau_pilot",
                    "tau_pilot, tau_up and tau_down must be given together",
                ))
            }
        };
        cfg.system.cov_irs_columns = vec![cfg.cov_irs.clone(); cfg.system.reflectors];
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not depend on the grid point.
    pub fn validate(&self) -> Result<()> {
        let mut probe = self.system.clone();
        probe.antennas = probe.antennas.max(1);
        probe.cov_irs_columns = vec![self.cov_irs.clone(); probe.reflectors];
        if let Covariance::Full(a) = &self.system.cov_direct {
            probe.antennas = a.nrows();
        }
        if let Covariance::Full(a) = &self.cov_irs {
            probe.antennas = a.nrows();
        }
        probe.validate()?;
        self.phase_noise.validate()?;
        PowerModel::new(0.0, self.power_budget).map_err(|e| match e {
            Error::InvalidConfig { reason, .. } => Error::config("rho_plus_zeta", reason),
            other => other,
        })?;
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if self.ee_antenna_max == 0 {
            return Err(Error::config("ee_m_max", "must be >= 1"));
        }
        for (key, list) in [("m_values", &self.antenna_values)] {
            if let Some(l) = list {
                if l.is_empty() || l.contains(&0) {
                    return Err(Error::config(
                        key,
                        "must be a non-empty list of positive counts",
                    ));
                }
            }
        }
        if matches!(&self.reflector_values, Some(l) if l.is_empty()) {
            return Err(Error::config("n_values", "must be non-empty"));
        }
        if let Some(l) = &self.snr_db_values {
            if l.is_empty() || l.iter().any(|x| !x.is_finite()) {
                return Err(Error::config(
                    "snr_db_values",
                    "must be a non-empty list of finite values",
                ));
            }
        }
        if let Some(l) = &self.rho_fractions {
            if l.is_empty() || l.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(Error::config("rho_fractions", "values must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}

fn type_error(key: &str, want: &str, got: &Value) -> Error {
    Error::config(key, format!("expected {want}, got `{got}`"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(type_error(key, "a number", other)),
    }
}

fn as_count(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(type_error(key, "a non-negative integer", other)),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| type_error(key, "true or false", v))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| type_error(key, "a string", v))
}

fn as_list<T>(key: &str, v: &Value, item: fn(&str, &Value) -> Result<T>) -> Result<Vec<T>> {
    let arr = v.as_array().ok_or_else(|| type_error(key, "a list", v))?;
    arr.iter().map(|x| item(key, x)).collect()
}

fn as_complex(key: &str, v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(
            as_f64(key, &pair[0])?,
            as_f64(key, &pair[1])?,
        )),
        other => as_f64(key, other).map(|re| Complex64::new(re, 0.0)),
    }
}

/// `"identity"`, `"scaled:<c>"`, or a row-major list of `M²` entries.
pub fn as_covariance(key: &str, v: &Value) -> Result<Covariance> {
    match v {
        Value::String(s) => parse_covariance_str(key, s),
        Value::Array(items) => {
            let entries = items
                .iter()
                .map(|x| as_complex(key, x))
                .collect::<Result<Vec<_>>>()?;
            let dim = (entries.len() as f64).sqrt().round() as usize;
            if dim == 0 || dim * dim != entries.len() {
                return Err(Error::config(
                    key,
                    format!("{} entries do not form a square matrix", entries.len()),
                ));
            }
            Ok(Covariance::Full(CMatrix::from_row_slice(
                dim, dim, &entries,
            )))
        }
        other => Err(type_error(
            key,
            "\"identity\", \"scaled:<c>\" or a list",
            other,
        )),
    }
}

fn parse_covariance_str(key: &str, s: &str) -> Result<Covariance> {
    if s == "identity" {
        return Ok(Covariance::identity());
    }
    if let Some(c) = s.strip_prefix("scaled:") {
        let c: f64 = c
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("bad scale in `{s}`")))?;
        return Ok(Covariance::Scaled(c));
    }
    Err(Error::config(
        key,
        format!("expected \"identity\" or \"scaled:<c>\", got `{s}`"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_all_key_kinds() {
        let cfg = RunConfig::parse(
            r#"
            m = 4
            n = 8
            kappa_bs = 0.01
            kappa_ue = 0.02
            p_ue = 2
            cov_direct = [[2.0, 0.0], [0.5, 0.5], [0.5, -0.5], 1.0]
            cov_irs = "scaled:0.5"
            uplink_noise_variance_source = "ue-as-printed"
            tau_pilot = 9
            tau_up = 45
            tau_down = 45
            phase_noise_kind = "von-mises"
            phase_noise_width = 3.0
            random_phases = true
            trials = 10
            seed = 42
            snr_db_values = [0, 10.5]
            rho_fractions = [0.0, 0.01]
            "#,
        );
        // cov_direct is 2x2 while m = 4: the probe adopts the explicit size.
        let cfg = cfg.unwrap();
        assert_eq!(cfg.system.kappa_ue, 0.02);
        assert_eq!(cfg.system.p_ue, 2.0);
        assert_eq!(cfg.cov_irs, Covariance::Scaled(0.5));
        match &cfg.system.cov_direct {
            Covariance::Full(a) => assert_eq!(a[(0, 1)], Complex64::new(0.5, 0.5)),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.timing.unwrap().tau(), 99.0);
        assert_eq!(cfg.phase_noise, PhaseNoise::VonMises { concentration: 3.0 });
        assert!(cfg.random_phases);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.snr_db_values, Some(vec![0.0, 10.5]));
        assert_eq!(
            cfg.system.uplink_noise_source,
            crate::model::UplinkNoiseSource::UeAsPrinted
        );
    }

    fn bad_key(text: &str) -> String {
        match RunConfig::parse(text) {
            Err(Error::InvalidConfig { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_offending_key() {
        assert_eq!(bad_key("bogus = 1"), "bogus");
        assert_eq!(bad_key("kappa_bs = -0.1"), "kappa_bs");
        assert_eq!(bad_key("p_bs = \"loud\""), "p_bs");
        assert_eq!(bad_key("cov_irs = \"diagonal\""), "cov_irs");
        assert_eq!(bad_key("cov_direct = [1, 2, 3]"), "cov_direct");
        assert_eq!(bad_key("cov_direct = [1, 0, 0, -1]"), "cov_direct");
        assert_eq!(bad_key("tau_up = 3"), "tau_pilot");
        assert_eq!(bad_key("phase_noise_width = 4.0"), "phase_noise");
        assert_eq!(bad_key("trials = 0"), "trials");
        assert_eq!(bad_key("rho_fractions = [1.5]"), "rho_fractions");
        assert_eq!(bad_key("rho_plus_zeta = 0"), "rho_plus_zeta");
        assert_eq!(bad_key("m = ["), "<file>");
    }

    #[test]
    fn missing_file_reports_path() {
        let err = RunConfig::from_file("/definitely/not/here.toml").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.toml"));
    }
}
