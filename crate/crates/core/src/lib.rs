//! Energy-optimal point-to-point motion profiles for single-axis servo
//! mechanisms with position-dependent inertia and load torque.
//!
//! Profiles are Chebyshev series on a rescaled time/position square with the
//! rest-to-rest conditions eliminated analytically. The RMS motor torque,
//! which is proportional to the square root of copper losses, is minimized
//! with BFGS or a bounded genetic algorithm.

pub mod cheb;
pub mod cli;
pub mod error;
pub mod harness;
pub mod identify;
pub mod io;
pub mod optimize;
pub mod plant;
pub mod profile;
pub mod quadrature;

pub use cheb::ChebyshevSeries;
pub use error::{Error, Result};
pub use plant::{FrictionModel, MotorParams, PropertyModel, PropertySamples};
pub use profile::{JerkMode, MotionProfile, MotionTask, ScaleFactors};
