use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::group::{GroupElement, Letter};
use crate::metrics::MetricModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMode {
    Exact,
    Fast,
}

/// Completeness certificate of an enumeration.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Certificate {
    /// Exact mode: every length-R frontier word had d ≥ T, so together with
    /// the quasi-isometry cap no element can be missing.
    Pass,
    /// A frontier word violated the cap; the ball may be incomplete.
    Fail { witness: String, d_value: f64 },
    /// Fast mode: pruned by running distance, no completeness claim.
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct BallEntry {
    pub word: GroupElement,
    pub d: f64,
    pub d_star: f64,
}

/// An exhaustively enumerated metric ball {g : d(o,g) < T}, canonically
/// sorted by (d, word).
#[derive(Debug)]
pub struct BallEnumeration {
    pub t: f64,
    pub mode: BallMode,
    pub certificate: Certificate,
    pub entries: Vec<BallEntry>,
    pub word_radius: usize,
    pub metric_fingerprint: String,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, Copy)]
pub struct BallParams {
    /// Hard cap on the word radius of exact enumeration (3^R nodes).
    pub word_radius_budget: usize,
    /// Fast mode prunes once the running distance exceeds T + slack.
    pub fast_slack: f64,
    /// Element-count budget.
    pub max_elements: usize,
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams { word_radius_budget: 19, fast_slack: 2.0, max_elements: 5_000_000 }
    }
}

/// Enumerates {g : d(o,g) < t}.
///
/// Exact mode walks every reduced word of length ≤ R where R comes from the
/// stored quasi-isometry envelope, then verifies the frontier: every
/// length-R word must already have d ≥ t (monotonicity of d along paths is
/// never assumed). Fast mode prunes subtrees on the running distance and is
/// marked heuristic. The prefix tree is partitioned by first letter and
/// partitions run concurrently; the merge is canonically sorted, so results
/// are deterministic.
pub fn enumerate_ball(
    d: &MetricModel,
    d_star: &MetricModel,
    t: f64,
    mode: BallMode,
    params: BallParams,
) -> Result<BallEnumeration> {
    let start = std::time::Instant::now();
    let alphabet = d.alphabet().clone();
    let radius = match mode {
        BallMode::Exact => {
            let r = d.quasi_isometry().word_radius_for(t);
            if r > params.word_radius_budget {
                return Err(Error::RadiusBudget { radius: r, budget: params.word_radius_budget });
            }
            r
        }
        BallMode::Fast => params.word_radius_budget,
    };

    let counter = AtomicUsize::new(0);
    let letters: Vec<Letter> = alphabet.letters().collect();
    let results: Vec<Result<Partition>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &first in &letters {
            let counter = &counter;
            let d_ref = &*d;
            let ds_ref = &*d_star;
            handles.push(scope.spawn(move || {
                let mut part = Partition::default();
                let mut word = vec![first];
                walk(d_ref, ds_ref, t, mode, radius, params, counter, &mut word, &mut part)?;
                Ok(part)
            }));
        }
        handles.into_iter().map(|h| h.join().expect("enumeration thread panicked")).collect()
    });

    let mut entries: Vec<BallEntry> = Vec::new();
    let mut certificate = match mode {
        BallMode::Exact => Certificate::Pass,
        BallMode::Fast => Certificate::Heuristic,
    };
    if t > 0.0 {
        entries.push(BallEntry { word: GroupElement::identity(), d: 0.0, d_star: 0.0 });
    }
    for r in results {
        let part = r?;
        entries.extend(part.entries);
        if let (Certificate::Pass, Some((w, dv))) = (&certificate, part.frontier_violation) {
            certificate =
                Certificate::Fail { witness: alphabet.format_word(&w), d_value: dv };
        }
    }
    entries.sort_by(|a, b| a.d.total_cmp(&b.d).then_with(|| a.word.canonical_cmp(&b.word)));

    Ok(BallEnumeration {
        t,
        mode,
        certificate,
        entries,
        word_radius: radius,
        metric_fingerprint: format!("d={};d*={}", d.fingerprint(), d_star.fingerprint()),
        wall_ms: start.elapsed().as_millis(),
    })
}

#[derive(Default)]
struct Partition {
    entries: Vec<BallEntry>,
    frontier_violation: Option<(Vec<Letter>, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn walk(
    d: &MetricModel,
    d_star: &MetricModel,
    t: f64,
    mode: BallMode,
    radius: usize,
    params: BallParams,
    counter: &AtomicUsize,
    word: &mut Vec<Letter>,
    part: &mut Partition,
) -> Result<()> {
    let dv = d.eval_letters(word)?;
    let inside = dv < t;
    if inside {
        if counter.fetch_add(1, Ordering::Relaxed) >= params.max_elements {
            return Err(Error::BudgetExceeded {
                reachable: params.max_elements + 1,
                budget: params.max_elements,
            });
        }
        let ds = d_star.eval_letters(word)?;
        part.entries.push(BallEntry {
            word: GroupElement::from_reduced(word.clone()),
            d: dv,
            d_star: ds,
        });
    }
    if word.len() == radius {
        if mode == BallMode::Exact && inside && part.frontier_violation.is_none() {
            // A frontier word inside the ball contradicts the cap.
            part.frontier_violation = Some((word.clone(), dv));
        }
        return Ok(());
    }
    if mode == BallMode::Fast && dv >= t + params.fast_slack {
        return Ok(());
    }
    let alphabet = d.alphabet();
    let last = *word.last().unwrap();
    for x in alphabet.letters() {
        if alphabet.inverse(last) == x {
            continue;
        }
        word.push(x);
        walk(d, d_star, t, mode, radius, params, counter, word, part)?;
        word.pop();
    }
    Ok(())
}

/// N(T) for each grid value, from a sorted enumeration at T_max ≥ max grid.
pub fn ball_counts(ball: &BallEnumeration, t_grid: &[f64]) -> Vec<(f64, u64)> {
    t_grid
        .iter()
        .map(|&t| {
            let n = ball.entries.partition_point(|e| e.d < t) as u64;
            (t, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Alphabet;

    fn word_pair() -> (MetricModel, MetricModel) {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab.clone());
        let ds = MetricModel::word_metric(ab).scale_metric(2.0).unwrap();
        (d, ds)
    }

    #[test]
    fn word_ball_t5_has_161_elements() {
        let (d, ds) = word_pair();
        let ball = enumerate_ball(&d, &ds, 5.0, BallMode::Exact, BallParams::default()).unwrap();
        assert_eq!(ball.entries.len(), 161);
        assert_eq!(ball.certificate, Certificate::Pass);
    }

    #[test]
    fn degenerate_thresholds() {
        let (d, ds) = word_pair();
        let b0 = enumerate_ball(&d, &ds, 0.0, BallMode::Exact, BallParams::default()).unwrap();
        assert!(b0.entries.is_empty());
        let bh = enumerate_ball(&d, &ds, 0.5, BallMode::Exact, BallParams::default()).unwrap();
        assert_eq!(bh.entries.len(), 1);
        assert!(bh.entries[0].word.is_empty());
    }

    #[test]
    fn fast_ball_equals_exact_ball() {
        let (d, ds) = word_pair();
        let exact = enumerate_ball(&d, &ds, 6.0, BallMode::Exact, BallParams::default()).unwrap();
        let fast = enumerate_ball(&d, &ds, 6.0, BallMode::Fast, BallParams::default()).unwrap();
        assert_eq!(fast.certificate, Certificate::Heuristic);
        assert_eq!(exact.entries.len(), fast.entries.len());
        for (a, b) in exact.entries.iter().zip(&fast.entries) {
            assert_eq!(a.word, b.word);
        }
    }

    #[test]
    fn balls_are_nested_and_counts_monotone() {
        let (d, ds) = word_pair();
        let big = enumerate_ball(&d, &ds, 7.5, BallMode::Exact, BallParams::default()).unwrap();
        let counts = ball_counts(&big, &[2.0, 3.5, 5.0, 6.5, 7.5]);
        for w in counts.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
        let small = enumerate_ball(&d, &ds, 5.0, BallMode::Exact, BallParams::default()).unwrap();
        let big_set: std::collections::BTreeSet<_> =
            big.entries.iter().map(|e| e.word.clone()).collect();
        for e in &small.entries {
            assert!(big_set.contains(&e.word));
        }
    }

    #[test]
    fn radius_budget_enforced() {
        let (d, ds) = word_pair();
        let params = BallParams { word_radius_budget: 3, ..Default::default() };
        match enumerate_ball(&d, &ds, 10.0, BallMode::Exact, params) {
            Err(Error::RadiusBudget { .. }) => {}
            other => panic!("expected radius budget error, got {other:?}"),
        }
    }

    #[test]
    fn element_budget_enforced() {
        let (d, ds) = word_pair();
        let params = BallParams { max_elements: 10, ..Default::default() };
        assert!(matches!(
            enumerate_ball(&d, &ds, 6.0, BallMode::Exact, params),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sorted_canonically() {
        let (d, ds) = word_pair();
        let ball = enumerate_ball(&d, &ds, 4.5, BallMode::Exact, BallParams::default()).unwrap();
        for w in ball.entries.windows(2) {
            let ord = w[0].d.total_cmp(&w[1].d).then_with(|| w[0].word.canonical_cmp(&w[1].word));
            assert!(ord.is_lt());
        }
    }
}
