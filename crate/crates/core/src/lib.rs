//! Link-level Monte Carlo simulator and closed-form bound calculator for
//! IRS-assisted single-user MIMO links whose transceivers suffer additive
//! distortion noise and whose reflecting elements suffer phase noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: system configuration, protocol timing, random channels and
//!   IRS phase state.
//! - [`impairments`]: distortion-noise covariances for both link directions.
//! - [`beamforming`]: noise-plus-distortion matrices, the optimal
//!   beamformer/combiner and the rank-one resolvent identity.
//! - [`capacity`]: per-realization spectral efficiency, ergodic Monte Carlo
//!   estimates and the high-power / large-array capacity ceilings.
//! - [`energy`]: power consumption and energy-efficiency metrics.
//! - [`harness`]: parameter sweeps, config files and CSV output.

pub mod beamforming;
pub mod capacity;
pub mod energy;
pub mod error;
pub mod harness;
pub mod impairments;
pub mod linalg;
pub mod model;
pub mod rng;

pub use beamforming::{LinkDirection, NoisePlusDistortion};
pub use capacity::{CapacityBounds, CapacityEstimate};
pub use energy::PowerModel;
pub use error::{Error, Result};
pub use impairments::DistortionCovariances;
pub use model::{
    ChannelRealization, ChannelSampler, Covariance, IrsState, PhaseNoise, ProtocolTiming,
    SystemConfig, UplinkNoiseSource,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
