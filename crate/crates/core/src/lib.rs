//! Fiberwise attractors of concave skew products over interval fibers.
//!
//! Modules follow the analysis pipeline: single-map certification
//! ([`fiber`]), two-orbit contraction for map sequences
//! ([`nonautonomous`]), skew products ([`base`], [`skew`]), attractor graphs
//! ([`attractor`]), concrete systems ([`catalog`]) and JSON configuration
//! ([`config`]).

pub mod attractor;
pub mod base;
pub mod catalog;
pub mod config;
pub mod error;
pub mod fiber;
pub mod nonautonomous;
pub mod registry;
pub mod skew;

pub use attractor::{GraphFunction, Provenance};
pub use base::{BasePoint, BaseSystem, FiniteOrbitBase, ShiftPoint, Sided, Word};
pub use config::SystemConfig;
pub use error::{Error, Result};
pub use fiber::{certify, kappa, ConcavityCertificate, FiberMap};
pub use registry::{BaseFn, MapSpec};
pub use skew::{classify, Classification, FiberFamily, SkewSystem};
