//! Simulation and analysis toolkit for quantum state transfer between two
//! microwave resonators through tunable couplers.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below cover the common case.

pub mod coupler;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod pulse;
pub mod quantum;
pub mod reflections;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type ProtocolParamsF64 = pulse::ProtocolParams<f64>;
pub type PulseShapeF64 = pulse::PulseShape<f64>;
pub type SimConfigF64 = dynamics::SimConfig<f64>;
pub type TransferOutcomeF64 = dynamics::TransferOutcome<f64>;
pub type FieldTrajectoryF64 = dynamics::FieldTrajectory<f64>;
pub type CouplerParamsF64 = coupler::CouplerParams<f64>;
pub type CouplerPointF64 = coupler::CouplerPoint<f64>;
pub type FockVectorF64 = quantum::FockVector<f64>;
pub type DensityMatrixF64 = quantum::DensityMatrix<f64>;
