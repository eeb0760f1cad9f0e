use rand::SeedableRng;

use super::ball::BallEnumeration;
use crate::error::{Error, Result};
use crate::group::{Alphabet, GroupElement};
use crate::metrics::{translation_length, MetricModel};

/// A sampled conjugacy-class representative with translation lengths under
/// both metrics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SimilaritySample {
    pub word: String,
    pub ell_d: f64,
    pub ell_dstar: f64,
    pub ratio: f64,
    /// Measured uncertainty of the ratio (power-consistency defect or
    /// bracket width).
    pub uncertainty: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SimilarityReport {
    pub similar: bool,
    /// Empirical τ from the ratios (median).
    pub ratio: f64,
    pub spread: f64,
    pub allowed_spread: f64,
    pub wide_fraction: f64,
    pub samples: Vec<SimilaritySample>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimilarityParams {
    /// Base tolerance on the ratio spread.
    pub tolerance: f64,
    /// Power used by the bracket route for non-cyclic metrics.
    pub max_power: usize,
    /// Subadditivity allowance passed to the bracket route.
    pub k_allowance: f64,
    /// A sample is "wide" when its relative uncertainty exceeds this.
    pub wide_rel_width: f64,
    /// Error out when more than this fraction of samples is wide.
    pub max_wide_fraction: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            tolerance: 1e-6,
            max_power: 6,
            k_allowance: 1.0,
            wide_rel_width: 0.25,
            max_wide_fraction: 0.1,
        }
    }
}

/// Deterministic sample of cyclically reduced conjugacy-class
/// representatives, deduplicated up to cyclic rotation and inversion.
pub fn sample_conjugacy_classes(
    alphabet: &std::sync::Arc<Alphabet>,
    count: usize,
    min_len: usize,
    max_len: usize,
    seed: u64,
) -> Vec<GroupElement> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let len = min_len + attempts % (max_len - min_len + 1);
        let g = crate::group::random_reduced_word(alphabet, len, &mut rng);
        let core = g.cyclic_reduction(alphabet);
        if core.len() < min_len {
            continue;
        }
        // Canonical form of the conjugacy class ∪ inverse class.
        let canon = conjugacy_key(alphabet, &core);
        if seen.insert(canon) {
            out.push(core);
        }
    }
    out
}

fn conjugacy_key(alphabet: &Alphabet, g: &GroupElement) -> Vec<u8> {
    let mut best: Option<Vec<u8>> = None;
    for candidate in [g.clone(), g.invert(alphabet)] {
        let l = candidate.letters();
        for r in 0..l.len() {
            let rotated: Vec<u8> = l[r..].iter().chain(l[..r].iter()).copied().collect();
            if best.as_ref().is_none_or(|b| rotated < *b) {
                best = Some(rotated);
            }
        }
    }
    best.unwrap_or_default()
}

/// ℓ estimate with a measured uncertainty. Cyclic-route metrics evaluate the
/// cyclic reduction and measure additivity through the squared power;
/// everything else takes the subadditive bracket.
fn ell_with_uncertainty(
    d: &MetricModel,
    g: &GroupElement,
    params: &SimilarityParams,
) -> Result<(f64, f64)> {
    let alphabet = d.alphabet().clone();
    let core = g.cyclic_reduction(&alphabet);
    if d.is_letter_additive() {
        return Ok((d.eval(&core)?, 0.0));
    }
    if d.translation_via_cyclic_reduction_supported() {
        let v = d.eval(&core)?;
        let square = core.multiply(&alphabet, &core);
        // Power-consistency defect: measured, not assumed.
        let defect = match d.eval(&square) {
            Ok(v2) => (v2 / 2.0 - v).abs(),
            Err(_) => v * 0.05,
        };
        return Ok((v, 2.0 * defect + 1e-12));
    }
    let est = translation_length(d, g, params.max_power, params.k_allowance, None)?;
    Ok((est.estimate, est.width().max(1e-12)))
}

/// Tests rough similarity through translation-length ratios over sampled
/// conjugacy classes: SIMILAR iff the ratio spread is within the tolerance
/// implied by the measured uncertainties.
pub fn rough_similarity_test(
    d: &MetricModel,
    d_star: &MetricModel,
    samples: &[GroupElement],
    params: &SimilarityParams,
) -> Result<SimilarityReport> {
    if samples.is_empty() {
        return Err(Error::Degenerate("no conjugacy samples".into()));
    }
    let mut rows = Vec::with_capacity(samples.len());
    let mut wide = 0usize;
    let mut max_uncertainty_term: f64 = 0.0;
    for g in samples {
        let (ell_d, u_d) = ell_with_uncertainty(d, g, params)?;
        let (ell_s, u_s) = ell_with_uncertainty(d_star, g, params)?;
        if ell_d <= 0.0 {
            return Err(Error::Degenerate(format!(
                "nonpositive translation length under d for `{}`",
                d.alphabet().format_word(g.letters())
            )));
        }
        let ratio = ell_s / ell_d;
        let uncertainty = u_s / ell_d + ratio * u_d / ell_d;
        if uncertainty / ratio.abs().max(1e-12) > params.wide_rel_width {
            wide += 1;
        }
        max_uncertainty_term = max_uncertainty_term.max(uncertainty);
        rows.push(SimilaritySample {
            word: d.alphabet().format_word(g.letters()),
            ell_d,
            ell_dstar: ell_s,
            ratio,
            uncertainty,
        });
    }
    let wide_fraction = wide as f64 / rows.len() as f64;
    if wide_fraction > params.max_wide_fraction {
        return Err(Error::BracketTooWide {
            width: max_uncertainty_term,
            requested: params.wide_rel_width,
        });
    }
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let spread = ratios.last().unwrap() - ratios[0];
    let allowed_spread = params.tolerance + 2.0 * max_uncertainty_term;
    Ok(SimilarityReport {
        similar: spread <= allowed_spread,
        ratio: ratios[ratios.len() / 2],
        spread,
        allowed_spread,
        wide_fraction,
        samples: rows,
    })
}

/// Fraction of ball elements whose metric value deviates from their
/// translation length by more than T^{exponent}, per grid threshold.
/// Elements whose defect sits within `ell_uncertainty` of the threshold are
/// counted separately as inconclusive.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DefectReport {
    pub per_t: Vec<DefectRow>,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DefectRow {
    pub t: f64,
    pub n: u64,
    pub fraction: f64,
    pub inconclusive_fraction: f64,
}

pub fn translation_defect_fraction(
    ball: &BallEnumeration,
    d: &MetricModel,
    t_grid: &[f64],
    exponent: f64,
    ell_uncertainty: f64,
) -> Result<DefectReport> {
    if !d.translation_via_cyclic_reduction_supported() {
        return Err(Error::InvalidMetric(
            "per-element translation lengths need the cyclic-reduction route".into(),
        ));
    }
    let alphabet = d.alphabet().clone();
    // Defects are independent of T; precompute once over the largest ball.
    let mut defects = Vec::with_capacity(ball.entries.len());
    for e in &ball.entries {
        let ell = d.eval(&e.word.cyclic_reduction(&alphabet))?;
        defects.push((e.d, (e.d - ell).abs()));
    }
    let mut per_t = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let threshold = t.powf(exponent);
        let mut n = 0u64;
        let mut over = 0u64;
        let mut inconclusive = 0u64;
        for &(dv, defect) in &defects {
            if dv < t {
                n += 1;
                if (defect - threshold).abs() <= ell_uncertainty {
                    inconclusive += 1;
                } else if defect > threshold {
                    over += 1;
                }
            }
        }
        if n == 0 {
            return Err(Error::DegenerateGrid(format!("empty ball at T = {t}")));
        }
        per_t.push(DefectRow {
            t,
            n,
            fraction: over as f64 / n as f64,
            inconclusive_fraction: inconclusive as f64 / n as f64,
        });
    }
    Ok(DefectReport { per_t, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::ball::{enumerate_ball, BallMode, BallParams};

    fn word_metrics() -> (MetricModel, MetricModel) {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab.clone());
        let ds = MetricModel::word_metric(ab).scale_metric(2.0).unwrap();
        (d, ds)
    }

    #[test]
    fn doubled_metric_is_similar_with_ratio_two() {
        let (d, ds) = word_metrics();
        let samples = sample_conjugacy_classes(d.alphabet(), 60, 2, 8, 7);
        assert!(samples.len() >= 50);
        let report =
            rough_similarity_test(&d, &ds, &samples, &SimilarityParams::default()).unwrap();
        assert!(report.similar);
        assert_eq!(report.spread, 0.0);
        assert!((report.ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hilbert_vs_word_is_not_similar() {
        let rep = crate::metrics::MatrixRep::sl2_schottky(4.0).unwrap();
        let alpha = crate::metrics::hilbert_length(std::sync::Arc::new(rep)).unwrap();
        let d = MetricModel::word_metric(alpha.alphabet().clone());
        let samples = sample_conjugacy_classes(d.alphabet(), 50, 2, 5, 13);
        let params = SimilarityParams { max_power: 12, k_allowance: 0.5, ..Default::default() };
        let report = rough_similarity_test(&d, &alpha, &samples, &params).unwrap();
        // Translation lengths of a Schottky representation are not
        // proportional to word lengths.
        assert!(!report.similar, "spread {}", report.spread);
        assert!(report.spread > 0.1);
    }

    #[test]
    fn conjugacy_sampler_is_deterministic_and_cyclically_reduced() {
        let ab = Alphabet::free(2).unwrap();
        let a1 = sample_conjugacy_classes(&ab, 50, 2, 8, 42);
        let a2 = sample_conjugacy_classes(&ab, 50, 2, 8, 42);
        assert_eq!(a1, a2);
        for g in &a1 {
            assert_eq!(g.cyclic_reduction(&ab), *g);
        }
    }

    #[test]
    fn word_metric_defect_fraction_decays() {
        let (d, _) = word_metrics();
        let ds = MetricModel::word_metric(d.alphabet().clone());
        let ball =
            enumerate_ball(&d, &ds, 10.5, BallMode::Exact, BallParams::default()).unwrap();
        let grid: Vec<f64> = (5..=10).map(|i| i as f64 + 0.5).collect();
        let report = translation_defect_fraction(&ball, &d, &grid, 1.0 / 3.0, 0.0).unwrap();
        // Defect = 2|u| for g = u h u⁻¹; the T^{1/3} threshold eventually
        // exceeds any fixed defect, so the fraction trends down.
        let first = report.per_t.first().unwrap().fraction;
        let last = report.per_t.last().unwrap().fraction;
        assert!(last <= first + 0.02, "{first} -> {last}");
        assert!(last < 0.2, "{last}");
        for row in &report.per_t {
            assert_eq!(row.inconclusive_fraction, 0.0);
        }
    }
}
