use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Alphabet, GroupElement};

/// A finitely supported symmetric probability measure on the group, the step
/// distribution of a random walk.
#[derive(Debug, Clone)]
pub struct FiniteMeasure {
    alphabet: Arc<Alphabet>,
    /// Sorted canonically; weights strictly positive and summing to 1.
    support: Vec<(GroupElement, f64)>,
}

impl FiniteMeasure {
    pub fn new(alphabet: Arc<Alphabet>, entries: Vec<(GroupElement, f64)>) -> Result<Self> {
        let mut support = entries;
        support.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidMeasure(format!(
                    "duplicate support element `{}`",
                    w[0].0.display(&alphabet)
                )));
            }
        }
        if support.iter().any(|(g, w)| *w <= 0.0 || g.is_empty()) {
            return Err(Error::InvalidMeasure(
                "weights must be positive and supported away from the identity".into(),
            ));
        }
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, expected 1")));
        }
        let m = FiniteMeasure { alphabet, support };
        m.check_symmetric()?;
        m.check_generates()?;
        Ok(m)
    }

    /// Uniform nearest-neighbour walk: weight 1/(2k) per generator.
    pub fn uniform_srw(alphabet: Arc<Alphabet>) -> Result<Self> {
        let n = alphabet.len();
        let entries = alphabet
            .letters()
            .map(|x| (GroupElement::from_reduced(vec![x]), 1.0 / n as f64))
            .collect();
        FiniteMeasure::new(alphabet, entries)
    }

    /// Nearest-neighbour walk with one weight per letter, letter order of the
    /// alphabet. Weights must already be symmetric under the involution.
    pub fn nearest_neighbour(alphabet: Arc<Alphabet>, weights: &[f64]) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return Err(Error::InvalidMeasure("one weight per letter required".into()));
        }
        let entries = alphabet
            .letters()
            .map(|x| (GroupElement::from_reduced(vec![x]), weights[x as usize]))
            .collect();
        FiniteMeasure::new(alphabet, entries)
    }

    fn check_symmetric(&self) -> Result<()> {
        for (g, w) in &self.support {
            let inv = g.invert(&self.alphabet);
            let w_inv = self.weight(&inv);
            if (w - w_inv).abs() > 1e-12 {
                return Err(Error::InvalidMeasure(format!(
                    "not symmetric at `{}`: {w} vs {w_inv}",
                    g.display(&self.alphabet)
                )));
            }
        }
        Ok(())
    }

    /// The support must generate the group as a semigroup; checked by
    /// reaching the word ball of radius 2 with bounded products.
    fn check_generates(&self) -> Result<()> {
        let mut reached: BTreeSet<GroupElement> = BTreeSet::new();
        reached.insert(GroupElement::identity());
        for _ in 0..8 {
            let mut next = reached.clone();
            for g in &reached {
                for (s, _) in &self.support {
                    next.insert(g.multiply(&self.alphabet, s));
                }
            }
            if next.len() == reached.len() {
                break;
            }
            reached = next;
        }
        let mut ball2 = vec![GroupElement::identity()];
        for x in self.alphabet.letters() {
            ball2.push(GroupElement::from_reduced(vec![x]));
            for y in self.alphabet.letters() {
                if y != self.alphabet.inverse(x) {
                    ball2.push(GroupElement::from_reduced(vec![x, y]));
                }
            }
        }
        for g in ball2 {
            if !reached.contains(&g) {
                return Err(Error::InvalidMeasure(format!(
                    "support does not reach `{}` within the product budget",
                    g.display(&self.alphabet)
                )));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn support(&self) -> &[(GroupElement, f64)] {
        &self.support
    }

    pub fn weight(&self, g: &GroupElement) -> f64 {
        self.support
            .binary_search_by(|(h, _)| h.canonical_cmp(g))
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    /// Per-class weight vector when the walk is nearest-neighbour on a free
    /// alphabet (support exactly the letter set); `None` otherwise.
    pub fn class_weights(&self) -> Option<Vec<f64>> {
        let rank = self.alphabet.free_rank()?;
        if self.support.len() != self.alphabet.len() {
            return None;
        }
        if !self.support.iter().all(|(g, _)| g.len() == 1) {
            return None;
        }
        let mut per_class = vec![0.0; rank];
        for (g, w) in &self.support {
            per_class[self.alphabet.class_of(g.letters()[0])] = *w;
        }
        Some(per_class)
    }

    /// Deterministic text form used in cache keys: `weight <word> <w>` lines.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for (g, w) in &self.support {
            s.push_str(&format!("weight {} {:.17e}\n", self.alphabet.format_word(g.letters()), w));
        }
        s
    }

    /// Parses the measure file format: lines `weight <word> <positive rational>`
    /// with `#` comments; rationals as `p/q` or decimals.
    pub fn parse_text(alphabet: Arc<Alphabet>, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "weight" {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "expected `weight <word> <rational>`".into(),
                });
            }
            let word = GroupElement::reduce(&alphabet, &alphabet.parse_word(toks[1])?);
            let w = parse_rational(toks[2]).ok_or(Error::Parse {
                line: lineno + 1,
                message: format!("bad rational `{}`", toks[2]),
            })?;
            entries.push((word, w));
        }
        FiniteMeasure::new(alphabet, entries)
    }
}

fn parse_rational(s: &str) -> Option<f64> {
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().ok()?;
        let q: f64 = q.trim().parse().ok()?;
        if q == 0.0 {
            return None;
        }
        Some(p / q)
    } else {
        s.trim().parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn srw_is_class_symmetric() {
        let ab = Alphabet::free(2).unwrap();
        let mu = FiniteMeasure::uniform_srw(ab).unwrap();
        assert_eq!(mu.class_weights(), Some(vec![0.25, 0.25]));
    }

    #[test]
    fn asymmetric_weights_rejected() {
        let ab = Alphabet::free(2).unwrap();
        let res = FiniteMeasure::nearest_neighbour(ab, &[0.4, 0.3, 0.15, 0.15]);
        assert!(matches!(res, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let ab = Alphabet::free(2).unwrap();
        let res = FiniteMeasure::nearest_neighbour(ab, &[0.3, 0.3, 0.3, 0.3]);
        assert!(matches!(res, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn parse_rationals_and_words() {
        let ab = Alphabet::free(2).unwrap();
        let text = "# srw\nweight a 1/4\nweight A 1/4\nweight b 1/4\nweight B 1/4\n";
        let mu = FiniteMeasure::parse_text(ab, text).unwrap();
        assert_eq!(mu.support().len(), 4);
        assert!((mu.support()[0].1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn non_nearest_neighbour_support_allowed() {
        let ab = Alphabet::free(2).unwrap();
        let mk = |s: &str| GroupElement::reduce(&ab, &ab.parse_word(s).unwrap());
        let entries = vec![
            (mk("a"), 0.2),
            (mk("A"), 0.2),
            (mk("b"), 0.2),
            (mk("B"), 0.2),
            (mk("ab"), 0.1),
            (mk("BA"), 0.1),
        ];
        let mu = FiniteMeasure::new(ab, entries).unwrap();
        assert_eq!(mu.class_weights(), None);
    }
}
