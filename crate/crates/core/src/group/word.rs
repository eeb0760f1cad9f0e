use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::alphabet::{Alphabet, Letter};

/// A group element represented by a freely reduced word. The empty word is
/// the identity `o`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    letters: Vec<Letter>,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { letters: Vec::new() }
    }

    /// Freely reduces a raw letter sequence: cancels adjacent `x · x⁻¹`
    /// pairs until none remain. Idempotent.
    pub fn reduce(alphabet: &Alphabet, raw: &[Letter]) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
        for &x in raw {
            if out.last().is_some_and(|&y| alphabet.inverse(y) == x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        GroupElement { letters: out }
    }

    /// Wraps a sequence that is already freely reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Self {
        GroupElement { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, alphabet: &Alphabet, other: &GroupElement) -> GroupElement {
        let mut out = self.letters.clone();
        for &x in &other.letters {
            if out.last().is_some_and(|&y| alphabet.inverse(y) == x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        GroupElement { letters: out }
    }

    pub fn invert(&self, alphabet: &Alphabet) -> GroupElement {
        let letters = self.letters.iter().rev().map(|&x| alphabet.inverse(x)).collect();
        GroupElement { letters }
    }

    pub fn pow(&self, alphabet: &Alphabet, n: usize) -> GroupElement {
        let mut out = GroupElement::identity();
        for _ in 0..n {
            out = out.multiply(alphabet, self);
        }
        out
    }

    /// Cyclic reduction: strips matching first/last letters. Returns the
    /// cyclically reduced core `h` with `g = u h u⁻¹`.
    pub fn cyclic_reduction(&self, alphabet: &Alphabet) -> GroupElement {
        let mut lo = 0usize;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && alphabet.inverse(self.letters[lo]) == self.letters[hi - 1] {
            lo += 1;
            hi -= 1;
        }
        GroupElement { letters: self.letters[lo..hi].to_vec() }
    }

    /// Canonical order: by length, then lexicographically by letter index.
    pub fn canonical_cmp(&self, other: &GroupElement) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters.cmp(&other.letters))
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alphabet }
    }
}

pub struct WordDisplay<'a> {
    word: &'a GroupElement,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.alphabet.format_word(self.word.letters()))
    }
}

/// Draws a uniformly random reduced word of exactly `len` letters.
pub fn random_reduced_word(
    alphabet: &Arc<Alphabet>,
    len: usize,
    rng: &mut impl rand::Rng,
) -> GroupElement {
    let n = alphabet.len();
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        loop {
            let x = rng.gen_range(0..n) as Letter;
            if letters.last().is_some_and(|&y| alphabet.inverse(y) == x) {
                continue;
            }
            letters.push(x);
            break;
        }
    }
    GroupElement::from_reduced(letters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn f2() -> Arc<Alphabet> {
        Alphabet::free(2).unwrap()
    }

    #[test]
    fn inverse_pair_cancels() {
        let ab = f2();
        let w = GroupElement::reduce(&ab, &[0, 1]); // a·A
        assert!(w.is_empty());
    }

    #[test]
    fn single_cancellation() {
        let ab = f2();
        // a·b·B·a → a·a
        let w = GroupElement::reduce(&ab, &[0, 2, 3, 0]);
        assert_eq!(w.letters(), &[0, 0]);
    }

    #[test]
    fn reduce_is_idempotent() {
        let ab = f2();
        let w = GroupElement::reduce(&ab, &[0, 2, 0, 3]);
        let again = GroupElement::reduce(&ab, w.letters());
        assert_eq!(w, again);
    }

    #[test]
    fn inverse_axiom_and_antihomomorphism() {
        let ab = f2();
        let g = GroupElement::reduce(&ab, &[0, 2]); // ab
        assert!(g.multiply(&ab, &g.invert(&ab)).is_empty());
        // invert(a·b) = B·A
        assert_eq!(g.invert(&ab).letters(), &[3, 1]);
        let o = GroupElement::identity();
        assert_eq!(o.multiply(&ab, &g), g);
    }

    #[test]
    fn cyclic_reduction_examples() {
        let ab = f2();
        // a·b·A cyclically reduces to b
        let g = GroupElement::reduce(&ab, &[0, 2, 1]);
        assert_eq!(g.cyclic_reduction(&ab).letters(), &[2]);
        // already cyclically reduced
        let h = GroupElement::reduce(&ab, &[0, 2]);
        assert_eq!(h.cyclic_reduction(&ab), h);
    }

    #[test]
    fn group_axioms_on_random_triples() {
        let ab = f2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let g = random_reduced_word(&ab, rng.gen_range(0..8), &mut rng);
            let h = random_reduced_word(&ab, rng.gen_range(0..8), &mut rng);
            let k = random_reduced_word(&ab, rng.gen_range(0..8), &mut rng);
            let lhs = g.multiply(&ab, &h).multiply(&ab, &k);
            let rhs = g.multiply(&ab, &h.multiply(&ab, &k));
            assert_eq!(lhs, rhs);
            assert!(g.multiply(&ab, &g.invert(&ab)).is_empty());
            assert_eq!(g.multiply(&ab, &GroupElement::identity()), g);
        }
    }
}
