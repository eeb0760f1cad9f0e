use super::model::MetricModel;
use crate::error::{Error, Result};
use crate::group::GroupElement;

/// Translation length estimate with a certified bracket.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TranslationEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// True when the value came from the exact cyclic-reduction route.
    pub exact: bool,
}

impl TranslationEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// ℓ_d[g] = lim d(o, gⁿ)/n.
///
/// For letter-additive metrics (word metric and scalings) the limit is the
/// metric of the cyclic reduction, exactly. Otherwise the subadditive
/// sequence aₙ = d(o, gⁿ) gives the bracket
/// [max_n (aₙ − k)/n, min_n aₙ/n], where k allows for the conjugation part
/// and evaluator tolerance (aₙ ≥ n·ℓ − k for roughly geodesic metrics).
pub fn translation_length(
    d: &MetricModel,
    g: &GroupElement,
    max_power: usize,
    k_allowance: f64,
    max_width: Option<f64>,
) -> Result<TranslationEstimate> {
    if g.is_empty() {
        return Err(Error::InvalidMetric("translation length of the identity".into()));
    }
    let alphabet = d.alphabet().clone();
    if d.is_letter_additive() {
        let ell = d.eval(&g.cyclic_reduction(&alphabet))?;
        return Ok(TranslationEstimate { estimate: ell, lower: ell, upper: ell, exact: true });
    }
    if max_power == 0 {
        return Err(Error::Degenerate("max_power must be positive".into()));
    }
    let core = g.cyclic_reduction(&alphabet);
    let mut power = GroupElement::identity();
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut estimate = 0.0;
    for n in 1..=max_power {
        power = power.multiply(&alphabet, &core);
        let a_n = d.eval(&power)?;
        let k = k_allowance + 2.0 * d.eval_tolerance(power.len());
        lower = lower.max((a_n - k) / n as f64);
        upper = upper.min(a_n / n as f64);
        estimate = a_n / n as f64;
    }
    if let Some(w) = max_width {
        if upper - lower > w {
            return Err(Error::BracketTooWide { width: upper - lower, requested: w });
        }
    }
    Ok(TranslationEstimate { estimate, lower, upper, exact: false })
}

/// Exact-or-table translation length through the cyclic reduction: valid for
/// the word metric and for nearest-neighbour Green metrics, where the true
/// metric is additive over letters of a cyclically reduced word.
pub fn translation_via_cyclic_reduction(d: &MetricModel, g: &GroupElement) -> Result<f64> {
    let core = g.cyclic_reduction(d.alphabet());
    d.eval(&core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Alphabet;

    #[test]
    fn word_metric_translation_lengths() {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab.clone());
        let g = GroupElement::reduce(&ab, &ab.parse_word("ab").unwrap());
        let t = translation_length(&d, &g, 4, 0.0, None).unwrap();
        assert_eq!(t.estimate, 2.0);
        assert!(t.exact);
        // a·b·A cyclically reduces to b.
        let h = GroupElement::reduce(&ab, &ab.parse_word("abA").unwrap());
        let t = translation_length(&d, &h, 4, 0.0, None).unwrap();
        assert_eq!(t.estimate, 1.0);
    }

    #[test]
    fn identity_rejected() {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab);
        assert!(translation_length(&d, &GroupElement::identity(), 4, 0.0, None).is_err());
    }

    #[test]
    fn bracket_contains_double_power_estimate() {
        // Hilbert metric: genuinely non-additive, exercises the bracket.
        let rep = crate::metrics::matrixrep::MatrixRep::sl2_schottky(3.0).unwrap();
        let d = crate::metrics::matrixrep::hilbert_length(std::sync::Arc::new(rep)).unwrap();
        let ab = d.alphabet().clone();
        let g = GroupElement::reduce(&ab, &ab.parse_word("ab").unwrap());
        let n = 5;
        let t = translation_length(&d, &g, n, 0.1, None).unwrap();
        let a2n = d.eval(&g.pow(&ab, 2 * n)).unwrap() / (2 * n) as f64;
        assert!(t.lower - 1e-12 <= a2n && a2n <= t.upper + 1e-12, "{t:?} vs {a2n}");
    }

    #[test]
    fn width_limit_enforced() {
        let rep = crate::metrics::matrixrep::MatrixRep::sl2_schottky(3.0).unwrap();
        let d = crate::metrics::matrixrep::hilbert_length(std::sync::Arc::new(rep)).unwrap();
        let ab = d.alphabet().clone();
        let g = GroupElement::reduce(&ab, &ab.parse_word("aB").unwrap());
        match translation_length(&d, &g, 1, 5.0, Some(1e-6)) {
            Err(Error::BracketTooWide { .. }) => {}
            other => panic!("expected wide bracket, got {other:?}"),
        }
    }
}
