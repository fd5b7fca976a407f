//! `irs-sim`: parameter sweeps and closed-form bounds from the command line.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irs_sim::capacity;
use irs_sim::energy;
use irs_sim::harness::{self, RunConfig, SweepKind, SweepSpec};
use irs_sim::{Error, PhaseNoise, ProtocolTiming};

const THREADS_ENV: &str = "IRS_SIM_THREADS";

#[derive(Parser)]
#[command(
    name = "irs-sim",
    version,
    about = "IRS link simulator with hardware impairments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Downlink spectral efficiency versus SNR.
    SnrSweep(SweepArgs),
    /// Downlink spectral efficiency versus number of reflecting elements.
    ReflectorSweep(SweepArgs),
    /// Maximal downlink energy efficiency versus number of antennas.
    EeSweep(SweepArgs),
    /// Print the closed-form capacity and energy-efficiency bounds.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Key-value config file (TOML syntax).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Half-width of uniform IRS phase noise, in radians.
    #[arg(long, value_name = "DELTA")]
    phase_noise: Option<f64>,
    /// Drop transmit-power terms from the energy-efficiency denominator.
    #[arg(long)]
    neglect_tx_power: bool,
    /// Scale capacities by the downlink data fraction of the coherence period.
    #[arg(long)]
    apply_protocol_prefactor: bool,
    /// Draw nominal IRS phases uniformly instead of all zeros.
    #[arg(long)]
    random_phases: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Config file supplying kappa_bs, kappa_ue and rho_plus_zeta.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa_bs: Option<f64>,
    #[arg(long)]
    kappa_ue: Option<f64>,
    /// Antenna counts for the high-power bound.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 15, 50])]
    m: Vec<usize>,
    /// Prefactor applied to the capacity bounds.
    #[arg(long, default_value_t = 1.0)]
    prefactor: f64,
    /// Static circuit power for the energy-efficiency bounds (J/channel use).
    #[arg(long)]
    zeta: Option<f64>,
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::from_file(p),
        None => Ok(RunConfig::default()),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| Error::InvalidConfig {
        key: THREADS_ENV.into(),
        reason: format!("expected a non-negative integer, got `{raw}`"),
    })?;
    // 0 leaves rayon's automatic choice in place.
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn run_sweep(kind: SweepKind, args: SweepArgs) -> Result<(), Error> {
    let mut cfg = load_config(&args.config)?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(delta) = args.phase_noise {
        cfg.phase_noise = PhaseNoise::Uniform { half_width: delta };
    }
    cfg.neglect_tx_power |= args.neglect_tx_power;
    cfg.apply_protocol_prefactor |= args.apply_protocol_prefactor;
    cfg.random_phases |= args.random_phases;
    cfg.validate()?;

    let spec = SweepSpec::from_config(kind, cfg)?;
    let result = harness::run_sweep(&spec)?;
    match &args.out {
        Some(path) => harness::write_csv(&result, path),
        None => harness::write_csv_to(&result, io::stdout().lock()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        }),
    }
}

fn fmt(v: Result<f64, Error>) -> String {
    match v {
        Ok(x) => x.to_string(),
        Err(Error::Unbounded(_)) => "inf".into(),
        Err(e) => format!("undefined ({e})"),
    }
}

fn run_bounds(args: BoundsArgs) -> Result<(), Error> {
    let cfg = load_config(&args.config)?;
    let kbs = args.kappa_bs.unwrap_or(cfg.system.kappa_bs);
    let kue = args.kappa_ue.unwrap_or(cfg.system.kappa_ue);
    let zeta = args.zeta.unwrap_or(cfg.power_budget);
    for (key, v) in [("kappa_bs", kbs), ("kappa_ue", kue)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidConfig {
                key: key.into(),
                reason: format!("must be finite and >= 0, got {v}"),
            });
        }
    }
    if !zeta.is_finite() || zeta <= 0.0 {
        return Err(Error::InvalidConfig {
            key: "zeta".into(),
            reason: format!("must be finite and > 0, got {zeta}"),
        });
    }
    let p = args.prefactor;
    let large = capacity::large_array_bounds(kbs, kue, p);
    let timing = ProtocolTiming::downlink_only();
    let ee = energy::ee_bounds_max(kbs, kue, &timing, zeta);

    let mut out = io::stdout().lock();
    let mut lines = vec![
        format!("kappa_bs {kbs}"),
        format!("kappa_ue {kue}"),
        format!("prefactor {p}"),
        format!("large_array_upper {}", fmt(large.map(|b| b.upper))),
        format!(
            "shared_lower {}",
            fmt(capacity::high_power_bounds(1, kbs, kue, p).map(|b| b.lower))
        ),
    ];
    for &m in &args.m {
        lines.push(format!(
            "high_power_upper m={m} {}",
            fmt(capacity::high_power_bounds(m, kbs, kue, p).map(|b| b.upper))
        ));
    }
    lines.push(format!("zeta {zeta}"));
    lines.push(format!("ee_max_lower {}", fmt(ee.clone().map(|b| b.lower))));
    lines.push(format!("ee_max_upper {}", fmt(ee.map(|b| b.upper))));
    for line in lines {
        writeln!(out, "{line}").map_err(|e| Error::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::SnrSweep(a) => run_sweep(SweepKind::SnrSweep, a),
        Command::ReflectorSweep(a) => run_sweep(SweepKind::ReflectorSweep, a),
        Command::EeSweep(a) => run_sweep(SweepKind::AntennaEeSweep, a),
        Command::Bounds(a) => run_bounds(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irs-sim: error: {e}");
            ExitCode::FAILURE
        }
    }
}
