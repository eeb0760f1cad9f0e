//! Exhaustive enumeration of metric balls with certified completeness, and
//! the empirical statistics: growth rates, orbital constants, CLT moments
//! and KS distances, rough-similarity verdicts, translation-defect decay.

pub mod ball;
pub mod clt;
pub mod growth;
pub mod rigidity;

pub use ball::{
    ball_counts, enumerate_ball, BallEntry, BallEnumeration, BallMode, BallParams, Certificate,
};
pub use clt::{clt_report, normal_moment_targets, CdfRow, Centering, CltReport, MomentReport};
pub use growth::{
    empirical_manhattan, growth_rate, orbital_constant, GrowthEstimate, OrbitalReport,
};
pub use rigidity::{
    rough_similarity_test, sample_conjugacy_classes, translation_defect_fraction, DefectReport,
    DefectRow, SimilarityParams, SimilarityReport, SimilaritySample,
};
