//! Numerics and simulation for secret-key-generation rate bounds derived from
//! received signal strength (RSS) over line-of-sight multipath channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`chanmodel`]: tapped-delay-line profiles (TDL-E), delay-spread and
//!   K-factor retargeting, and reciprocal/independent channel draws.
//! - [`sigproc`]: chirp generation, channel application, AWGN, the unit-gain
//!   low-pass front end and RSS measurement, plus whole-dataset simulation.
//! - [`analytic`]: power densities for unresolved, fully resolved and hybrid
//!   multipath, frame noise power, and grid convolution.
//! - [`generative`]: a direct Monte Carlo sampler of the complex Gaussian
//!   multipath model, used as an independent check of [`analytic`].
//! - [`mi`]: KSG and LNC k-nearest-neighbour mutual information estimators.
//! - [`skg`]: secret key rate bounds from mutual information estimates.

pub mod analytic;
pub mod chanmodel;
mod error;
pub mod generative;
pub mod mi;
pub mod rng;
pub mod sigproc;
pub mod skg;
pub mod stats;

pub use error::{Result, SkgError};
