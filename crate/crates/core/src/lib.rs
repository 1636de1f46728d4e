//! Critical points of the two-vortex Kirchhoff–Routh function on planar
//! domains with a small hole.

pub mod asymptotics;
pub mod config;
pub mod critical;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod kr;
pub mod linalg;
pub mod validate;

pub use error::{Error, Result};
pub use geometry::{Domain, DomainSpec, Hole, Point2, PuncturedDomain};
pub use greens::{GreenModel, HDerivs, MfsConfig, RobinData};
pub use kr::{KrEvaluator, VortexConfig};
