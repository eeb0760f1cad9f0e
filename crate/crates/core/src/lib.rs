//! Comparison statistics for pairs of left-invariant metrics on hyperbolic
//! groups at desk scale: Cannon codings, Green metrics of random walks,
//! Hilbert lengths of matrix representations, transfer-operator pressure,
//! Manhattan curves, mean distortion, the counting CLT variance, and
//! exhaustive ball enumeration with certified completeness.

pub mod counting;
pub mod error;
pub mod group;
pub mod metrics;
pub mod spectral;
pub mod symbolic;

pub use error::{Error, Result};
