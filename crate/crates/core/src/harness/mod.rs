//! Parameter sweeps: downlink SE versus SNR, SE versus reflector count, and
//! maximal EE versus antenna count.
//!
//! Each SE grid point runs an independent Monte Carlo estimate whose seed is
//! derived from the run seed and the point's parameters, so a point's value
//! does not change when the rest of the grid does.

mod config;
mod csv;

pub use config::{as_covariance, RunConfig, DEFAULT_KAPPA, DEFAULT_POWER_BUDGET, DEFAULT_TRIALS};
pub use csv::{read_csv, write_csv, write_csv_to, CsvTable};

use crate::beamforming::LinkDirection;
use crate::capacity::{self, CapacityBounds};
use crate::energy::{self, PowerModel};
use crate::error::{Error, Result};
use crate::model::{IrsState, ProtocolTiming, SystemConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    SnrSweep,
    ReflectorSweep,
    AntennaEeSweep,
}

impl SweepKind {
    /// Parameter column names, in grid order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            SweepKind::SnrSweep => &["m", "n", "snr_db"],
            SweepKind::ReflectorSweep => &["m", "snr_db", "n"],
            SweepKind::AntennaEeSweep => &["rho_fraction", "m"],
        }
    }

    pub fn value_name(self) -> &'static str {
        match self {
            SweepKind::AntennaEeSweep => "ee",
            _ => "se_mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Snr {
        antennas: usize,
        reflectors: usize,
        snr_db: f64,
    },
    Reflector {
        antennas: usize,
        snr_db: f64,
        reflectors: usize,
    },
    AntennaEe {
        rho_fraction: f64,
        antennas: usize,
    },
}

impl GridPoint {
    fn kind(&self) -> SweepKind {
        match self {
            GridPoint::Snr { .. } => SweepKind::SnrSweep,
            GridPoint::Reflector { .. } => SweepKind::ReflectorSweep,
            GridPoint::AntennaEe { .. } => SweepKind::AntennaEeSweep,
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            GridPoint::Snr {
                antennas,
                reflectors,
                snr_db,
            } => vec![antennas as f64, reflectors as f64, snr_db],
            GridPoint::Reflector {
                antennas,
                snr_db,
                reflectors,
            } => vec![antennas as f64, snr_db, reflectors as f64],
            GridPoint::AntennaEe {
                rho_fraction,
                antennas,
            } => vec![rho_fraction, antennas as f64],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<GridPoint>,
    pub trials: usize,
    pub seed: u64,
    pub base: RunConfig,
}

const DEFAULT_SNR_ANTENNAS: [usize; 3] = [1, 15, 50];
const DEFAULT_SNR_REFLECTORS: [usize; 3] = [20, 70, 150];
const DEFAULT_REFLECTOR_ANTENNAS: [usize; 3] = [1, 5, 20];
const DEFAULT_REFLECTOR_SNRS: [f64; 3] = [10.0, 15.0, 20.0];
const DEFAULT_REFLECTOR_GRID: [usize; 10] = [0, 10, 20, 50, 100, 150, 200, 300, 500, 1000];
const DEFAULT_RHO_FRACTIONS: [f64; 4] = [0.0, 0.002, 0.01, 0.02];

impl SweepSpec {
    /// Builds the grid for `kind` from the lists in `base`, falling back to
    /// the standard experiment grid for lists that are not set.
    pub fn from_config(kind: SweepKind, base: RunConfig) -> Result<Self> {
        let grid = match kind {
            SweepKind::SnrSweep => {
                let ms = base
                    .antenna_values
                    .clone()
                    .unwrap_or(DEFAULT_SNR_ANTENNAS.to_vec());
                let ns = base
                    .reflector_values
                    .clone()
                    .unwrap_or(DEFAULT_SNR_REFLECTORS.to_vec());
                let snrs = base
                    .snr_db_values
                    .clone()
                    .unwrap_or_else(|| (-2..=16).map(|i| 5.0 * i as f64).collect());
                let mut grid = Vec::new();
                for &antennas in &ms {
                    for &reflectors in &ns {
                        for &snr_db in &snrs {
                            grid.push(GridPoint::Snr {
                                antennas,
                                reflectors,
                                snr_db,
                            });
                        }
                    }
                }
                grid
            }
            SweepKind::ReflectorSweep => {
                let ms = base
                    .antenna_values
                    .clone()
                    .unwrap_or(DEFAULT_REFLECTOR_ANTENNAS.to_vec());
                let snrs = base
                    .snr_db_values
                    .clone()
                    .unwrap_or(DEFAULT_REFLECTOR_SNRS.to_vec());
                let ns = base
                    .reflector_values
                    .clone()
                    .unwrap_or(DEFAULT_REFLECTOR_GRID.to_vec());
                let mut grid = Vec::new();
                for &antennas in &ms {
                    for &snr_db in &snrs {
                        for &reflectors in &ns {
                            grid.push(GridPoint::Reflector {
                                antennas,
                                snr_db,
                                reflectors,
                            });
                        }
                    }
                }
                grid
            }
            SweepKind::AntennaEeSweep => {
                let fractions = base
                    .rho_fractions
                    .clone()
                    .unwrap_or(DEFAULT_RHO_FRACTIONS.to_vec());
                let ms: Vec<usize> = match &base.antenna_values {
                    Some(v) => v.clone(),
                    None => (1..=base.ee_antenna_max).collect(),
                };
                let mut grid = Vec::new();
                for &rho_fraction in &fractions {
                    for &antennas in &ms {
                        grid.push(GridPoint::AntennaEe {
                            rho_fraction,
                            antennas,
                        });
                    }
                }
                grid
            }
        };
        let spec = Self {
            kind,
            grid,
            trials: base.trials,
            seed: base.seed,
            base,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("grid", "sweep grid is empty"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if let Some(p) = self.grid.iter().find(|p| p.kind() != self.kind) {
            return Err(Error::InvalidArgument(format!(
                "grid point {p:?} does not belong to a {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: Vec<f64>,
    /// Mean SE (bits/channel use) or EE (bits/Joule).
    pub value: f64,
    pub std_err: f64,
    pub bound_lower: f64,
    pub bound_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn header(&self) -> Vec<&'static str> {
        let mut h = self.kind.param_names().to_vec();
        h.extend([
            self.kind.value_name(),
            "std_err",
            "bound_lower",
            "bound_upper",
        ]);
        h
    }
}

/// Seed stream reserved for drawing random nominal IRS phases.
const PHASE_STREAM: u64 = u64::MAX;

fn point_seed(seed: u64, antennas: usize, reflectors: usize, snr_db: f64) -> u64 {
    let s = rng::derive_seed(seed, antennas as u64);
    let s = rng::derive_seed(s, reflectors as u64);
    rng::derive_seed(s, snr_db.to_bits())
}

fn point_system(base: &RunConfig, antennas: usize, reflectors: usize, snr_db: f64) -> SystemConfig {
    let mut cfg = base.system.clone();
    cfg.antennas = antennas;
    cfg.reflectors = reflectors;
    cfg.cov_irs_columns = vec![base.cov_irs.clone(); reflectors];
    cfg.p_bs = 10f64.powf(snr_db / 10.0) * cfg.sigma2_ue;
    cfg
}

fn timing_for(base: &RunConfig, reflectors: usize) -> ProtocolTiming {
    base.timing
        .unwrap_or_else(|| ProtocolTiming::for_reflectors(reflectors))
}

fn se_prefactor(base: &RunConfig, reflectors: usize) -> f64 {
    if base.apply_protocol_prefactor {
        timing_for(base, reflectors).prefactor(LinkDirection::Downlink)
    } else {
        1.0
    }
}

/// Ergodic downlink SE at one `(M, N, SNR)` point.
fn se_point(
    spec: &SweepSpec,
    antennas: usize,
    reflectors: usize,
    snr_db: f64,
) -> Result<(f64, f64, f64)> {
    let base = &spec.base;
    let cfg = point_system(base, antennas, reflectors, snr_db);
    let prefactor = se_prefactor(base, reflectors);
    let seed = point_seed(spec.seed, antennas, reflectors, snr_db);
    let irs = if base.random_phases {
        let mut rng = rng::rng_from_seed(rng::derive_seed(seed, PHASE_STREAM));
        IrsState::random(reflectors, base.phase_noise, &mut rng)?
    } else {
        IrsState::identity(reflectors, base.phase_noise)?
    };
    let est = capacity::ergodic_capacity(
        &cfg,
        &irs,
        LinkDirection::Downlink,
        prefactor,
        spec.trials,
        seed,
    )?;
    Ok((est.mean, est.std_error, prefactor))
}

/// Bounds where ideal hardware yields an unbounded limit are reported as `inf`.
fn or_unbounded(
    bounds: Result<CapacityBounds>,
    kappa_bs: f64,
    kappa_ue: f64,
    prefactor: f64,
) -> Result<CapacityBounds> {
    match bounds {
        Err(Error::Unbounded(_)) => {
            let lower = if kappa_bs + kappa_ue > 0.0 {
                prefactor * (1.0 + 1.0 / (kappa_bs + kappa_ue * (1.0 + kappa_bs))).log2()
            } else {
                f64::INFINITY
            };
            Ok(CapacityBounds {
                lower,
                upper: f64::INFINITY,
            })
        }
        other => other,
    }
}

fn expect_kind(spec: &SweepSpec, kind: SweepKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "expected a {kind:?} spec, got {:?}",
            spec.kind
        )));
    }
    spec.validate()
}

/// Downlink SE versus SNR with high-power bound columns.
pub fn run_snr_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    expect_kind(spec, SweepKind::SnrSweep)?;
    let (kbs, kue) = (spec.base.system.kappa_bs, spec.base.system.kappa_ue);
    let mut rows = Vec::with_capacity(spec.grid.len());
    for point in &spec.grid {
        let GridPoint::Snr {
            antennas,
            reflectors,
            snr_db,
        } = *point
        else {
            unreachable!("validated")
        };
        let (value, std_err, prefactor) = se_point(spec, antennas, reflectors, snr_db)?;
        let b = or_unbounded(
            capacity::high_power_bounds(antennas, kbs, kue, prefactor),
            kbs,
            kue,
            prefactor,
        )?;
        rows.push(SweepRow {
            params: point.params(),
            value,
            std_err,
            bound_lower: b.lower,
            bound_upper: b.upper,
        });
    }
    Ok(SweepResult {
        kind: spec.kind,
        rows,
    })
}

/// Downlink SE versus reflector count with large-array bound columns.
pub fn run_reflector_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    expect_kind(spec, SweepKind::ReflectorSweep)?;
    let (kbs, kue) = (spec.base.system.kappa_bs, spec.base.system.kappa_ue);
    let mut rows = Vec::with_capacity(spec.grid.len());
    for point in &spec.grid {
        let GridPoint::Reflector {
            antennas,
            snr_db,
            reflectors,
        } = *point
        else {
            unreachable!("validated")
        };
        let (value, std_err, prefactor) = se_point(spec, antennas, reflectors, snr_db)?;
        let b = or_unbounded(
            capacity::large_array_bounds(kbs, kue, prefactor),
            kbs,
            kue,
            prefactor,
        )?;
        rows.push(SweepRow {
            params: point.params(),
            value,
            std_err,
            bound_lower: b.lower,
            bound_upper: b.upper,
        });
    }
    Ok(SweepResult {
        kind: spec.kind,
        rows,
    })
}

/// Maximal downlink EE versus antenna count for several `ρ/(ρ+ζ)` splits.
///
/// The capacity is the high-power ceiling for `M` antennas (the `N → ∞`
/// regime), so the column is closed-form and `std_err` is zero. With
/// `neglect_tx_power` the denominator is `(τ_down/(τ_up+τ_down))·(Mρ + ζ)`;
/// otherwise the configured transmit powers are charged as well. Bound
/// columns are the static-power EE bounds for the split's `ζ`.
pub fn run_antenna_ee_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    expect_kind(spec, SweepKind::AntennaEeSweep)?;
    let base = &spec.base;
    let (kbs, kue) = (base.system.kappa_bs, base.system.kappa_ue);
    let timing = if base.apply_protocol_prefactor {
        timing_for(base, base.system.reflectors)
    } else {
        ProtocolTiming::downlink_only()
    };
    let mut rows = Vec::with_capacity(spec.grid.len());
    for point in &spec.grid {
        let GridPoint::AntennaEe {
            rho_fraction,
            antennas,
        } = *point
        else {
            unreachable!("validated")
        };
        let power = PowerModel::from_split(base.power_budget, rho_fraction)?;
        let value = if base.neglect_tx_power {
            energy::max_ee_at_antennas(antennas, kbs, kue, &timing, &power)?
        } else {
            let prefactor = timing.prefactor(LinkDirection::Downlink);
            let ceiling = capacity::high_power_bounds(antennas, kbs, kue, prefactor)?.upper;
            energy::downlink_ee(
                ceiling,
                &timing,
                base.system.p_bs,
                base.system.p_ue,
                &power,
                antennas,
            )?
        };
        let b = energy::ee_bounds_max(kbs, kue, &timing, power.zeta)?;
        rows.push(SweepRow {
            params: point.params(),
            value,
            std_err: 0.0,
            bound_lower: b.lower,
            bound_upper: b.upper,
        });
    }
    Ok(SweepResult {
        kind: spec.kind,
        rows,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    match spec.kind {
        SweepKind::SnrSweep => run_snr_sweep(spec),
        SweepKind::ReflectorSweep => run_reflector_sweep(spec),
        SweepKind::AntennaEeSweep => run_antenna_ee_sweep(spec),
    }
}
