//! Thermodynamic formalism on the coding: cylinder potentials, transfer
//! matrices per component, pressure, the Manhattan curve and the derived
//! distortion constants τ and σ².

pub mod blocks;
pub mod constants;
pub mod equilibrium;
pub mod manhattan;
pub mod potential;
pub mod pressure;
pub mod transfer;

pub use blocks::{refine_to_blocks, BlockSft};
pub use constants::{
    distortion_constants, normalize_pair, DerivativeReport, DistortionConfig, DistortionReport,
    NormalizationRecord,
};
pub use equilibrium::{equilibrium_measure, EquilibriumMeasure, VarianceEstimate};
pub use manhattan::{
    growth_rate_spectral, manhattan_theta, max_chord_deviation, min_second_divided_difference,
    sample_curve, ManhattanCurve, ThetaConfig, ThetaPoint,
};
pub use potential::CylinderPotential;
pub use pressure::{
    pressure, pressure_agreement, AgreementPoint, PressureAgreement, PressurePoint, PRESSURE_TOL,
};
pub use transfer::{build_transfer, weighted_matrix, TransferMatrix};
