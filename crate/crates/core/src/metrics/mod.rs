//! Concrete left-invariant metrics d(o, ·): word metrics, Green metrics of
//! symmetric random walks, Hilbert lengths of matrix representations, and
//! external tables, with translation lengths and Busemann potentials.

pub mod busemann;
pub mod convolution;
pub mod green;
pub mod matrixrep;
pub mod measure;
pub mod model;
pub mod translation;

pub use busemann::{busemann_potential, BusemannParams};
pub use convolution::{convolution_powers, ClassTreeDp};
pub use green::{green_metric, GreenParams, GreenTable};
pub use matrixrep::{hilbert_length, MatrixRep};
pub use measure::FiniteMeasure;
pub use model::{MetricKind, MetricModel, QuasiIsometry};
pub use translation::{translation_length, translation_via_cyclic_reduction, TranslationEstimate};
