use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a letter inside an [`Alphabet`].
pub type Letter = u8;

/// A finite symmetric generating alphabet: an ordered list of letter names
/// together with a formal-inverse involution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    inverse: Vec<Letter>,
}

impl Alphabet {
    /// Builds an alphabet from letter names and involution pairs given as
    /// `(letter, inverse)` index pairs. The involution must be its own inverse;
    /// fixed points (order-2 generators) are allowed.
    pub fn new(names: Vec<String>, inverse: Vec<Letter>) -> Result<Arc<Self>> {
        if names.len() != inverse.len() || names.len() > u8::MAX as usize {
            return Err(Error::InvalidMeasure("malformed alphabet".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidMeasure(format!("duplicate letter `{n}`")));
            }
        }
        for (i, &j) in inverse.iter().enumerate() {
            let j = j as usize;
            if j >= names.len() || inverse[j] as usize != i {
                return Err(Error::InvalidMeasure("involution is not an involution".into()));
            }
        }
        Ok(Arc::new(Alphabet { names, inverse }))
    }

    /// Standard alphabet of the free group of rank `k`: letters
    /// `a, A, b, B, ...` with `x ↔ X` as the involution.
    pub fn free(rank: usize) -> Result<Arc<Self>> {
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        if rank > 26 {
            return Err(Error::InvalidMeasure("free rank above 26 unsupported".into()));
        }
        let mut names = Vec::with_capacity(2 * rank);
        let mut inverse = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            let lower = (b'a' + i as u8) as char;
            names.push(lower.to_string());
            names.push(lower.to_ascii_uppercase().to_string());
            inverse.push((2 * i + 1) as Letter);
            inverse.push((2 * i) as Letter);
        }
        Alphabet::new(names, inverse)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len()).map(|i| i as Letter)
    }

    pub fn inverse(&self, x: Letter) -> Letter {
        self.inverse[x as usize]
    }

    pub fn name(&self, x: Letter) -> &str {
        &self.names[x as usize]
    }

    /// Looks a letter up by name.
    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as Letter)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    /// Rank when the alphabet pairs `2i ↔ 2i+1` (free-group layout).
    pub fn free_rank(&self) -> Option<usize> {
        if self.names.len() % 2 != 0 {
            return None;
        }
        for i in (0..self.names.len()).step_by(2) {
            if self.inverse[i] as usize != i + 1 {
                return None;
            }
        }
        Some(self.names.len() / 2)
    }

    /// Generator-pair class of a letter under the free layout: `a, A ↦ 0`,
    /// `b, B ↦ 1`, ...
    pub fn class_of(&self, x: Letter) -> usize {
        (x / 2) as usize
    }

    /// Parses a word given as concatenated single-character letter names, or
    /// as whitespace-free text. `e` denotes the empty word when it is not a
    /// letter itself.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>> {
        if text == "e" && self.names.iter().all(|n| n != "e") {
            return Ok(Vec::new());
        }
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        if single {
            text.chars().map(|c| self.letter(&c.to_string())).collect()
        } else {
            text.split('.').map(|t| self.letter(t)).collect()
        }
    }

    pub fn format_word(&self, word: &[Letter]) -> String {
        if word.is_empty() {
            return "e".to_string();
        }
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let sep = if single { "" } else { "." };
        word.iter().map(|&x| self.name(x)).collect::<Vec<_>>().join(sep)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" "))
    }
}
