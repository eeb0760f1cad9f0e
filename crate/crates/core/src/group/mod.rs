//! Group elements as reduced words, generating alphabets, and Cannon codings
//! with their component analysis.

pub mod alphabet;
pub mod automaton;
pub mod scc;
pub mod word;

pub use alphabet::{Alphabet, Letter};
pub use automaton::{
    validate_strongly_markov, AutomaticStructure, Edge, ValidationReport, VertexId, AUGMENTATION,
    INITIAL,
};
pub use scc::{scc_decomposition, ComponentInfo};
pub use word::{random_reduced_word, GroupElement};
