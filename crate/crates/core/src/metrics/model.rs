use std::collections::BTreeMap;
use std::sync::Arc;

use super::green::GreenTable;
use super::matrixrep::MatrixRep;
use crate::error::{Error, Result};
use crate::group::{Alphabet, GroupElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Word,
    Green,
    Hilbert,
    Table,
    Scaled,
}

/// Quasi-isometry data versus the reference word metric, measured on a small
/// ball and inflated by 25% (the paper's constants are non-constructive).
///
/// The envelope `|g|/l − c ≤ d(o,g) ≤ l·|g| + c` holds on the measured ball by
/// construction. `cap_slope`/`cap_offset` store the lower-envelope form used
/// for enumeration caps: `|g| ≥ cap_slope·(T + cap_offset)  ⟹  d(o,g) ≥ T`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct QuasiIsometry {
    pub l: f64,
    pub c: f64,
    pub cap_slope: f64,
    pub cap_offset: f64,
}

impl QuasiIsometry {
    pub fn exact_word() -> Self {
        QuasiIsometry { l: 1.0, c: 0.0, cap_slope: 1.0, cap_offset: 0.0 }
    }

    fn scaled(&self, s: f64) -> Self {
        QuasiIsometry {
            l: (self.l * s).max(self.l / s),
            c: self.c * s,
            cap_slope: self.cap_slope / s,
            cap_offset: self.cap_offset * s,
        }
    }

    /// Word radius that certifies completeness of the ball `{d < t}`.
    pub fn word_radius_for(&self, t: f64) -> usize {
        (self.cap_slope * (t + self.cap_offset)).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Word,
    Green(Arc<GreenTable>),
    Hilbert(Arc<MatrixRep>),
    Table(Arc<BTreeMap<GroupElement, f64>>),
}

/// A concrete left-invariant metric `d(o, ·)` with evaluation metadata.
#[derive(Debug, Clone)]
pub struct MetricModel {
    kind: MetricKind,
    alphabet: Arc<Alphabet>,
    backend: Backend,
    scale: f64,
    qi: QuasiIsometry,
    strongly_hyperbolic: bool,
    label: String,
}

impl MetricModel {
    /// The word metric of the generating alphabet: d(o,g) = |g|, exact and
    /// integer-valued. Arithmetic length spectrum; not strongly hyperbolic.
    pub fn word_metric(alphabet: Arc<Alphabet>) -> Self {
        MetricModel {
            kind: MetricKind::Word,
            alphabet,
            backend: Backend::Word,
            scale: 1.0,
            qi: QuasiIsometry::exact_word(),
            strongly_hyperbolic: false,
            label: "word".into(),
        }
    }

    pub(crate) fn from_green(table: Arc<GreenTable>, qi: QuasiIsometry, label: String) -> Self {
        MetricModel {
            kind: MetricKind::Green,
            alphabet: table.alphabet().clone(),
            backend: Backend::Green(table),
            scale: 1.0,
            qi,
            strongly_hyperbolic: true,
            label,
        }
    }

    pub(crate) fn from_hilbert(rep: Arc<MatrixRep>, qi: QuasiIsometry, label: String) -> Self {
        MetricModel {
            kind: MetricKind::Hilbert,
            alphabet: rep.alphabet().clone(),
            backend: Backend::Hilbert(rep),
            scale: 1.0,
            qi,
            strongly_hyperbolic: true,
            label,
        }
    }

    /// External table metric: explicit values per element.
    pub fn from_table(
        alphabet: Arc<Alphabet>,
        values: BTreeMap<GroupElement, f64>,
        strongly_hyperbolic: bool,
        label: String,
    ) -> Result<Self> {
        if values.get(&GroupElement::identity()).copied().unwrap_or(0.0) != 0.0 {
            return Err(Error::InvalidMetric("table must assign 0 to the identity".into()));
        }
        let table = Arc::new(values);
        let eval = |g: &GroupElement| table.get(g).copied();
        let radius = table.keys().map(|g| g.len()).max().unwrap_or(0).min(10);
        let qi = measure_quasi_isometry(&alphabet, radius, &eval)?;
        Ok(MetricModel {
            kind: MetricKind::Table,
            alphabet,
            backend: Backend::Table(table),
            scale: 1.0,
            qi,
            strongly_hyperbolic,
            label,
        })
    }

    /// Multiplies the evaluator by `c > 0`. Growth rate divides by `c`.
    pub fn scale_metric(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidMetric(format!("scale must be positive, got {c}")));
        }
        let mut out = self.clone();
        out.kind = if (c * self.scale - 1.0).abs() < 1e-15 { self.kind } else { MetricKind::Scaled };
        out.scale = self.scale * c;
        out.qi = self.qi.scaled(c);
        out.label = if c == 1.0 { self.label.clone() } else { format!("{}*{c}", self.label) };
        Ok(out)
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn quasi_isometry(&self) -> QuasiIsometry {
        self.qi
    }

    pub fn strongly_hyperbolic(&self) -> bool {
        self.strongly_hyperbolic
    }

    pub fn set_strongly_hyperbolic(&mut self, flag: bool) {
        self.strongly_hyperbolic = flag;
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn green_table(&self) -> Option<&Arc<GreenTable>> {
        match &self.backend {
            Backend::Green(t) => Some(t),
            _ => None,
        }
    }

    /// d(o, g) for a reduced word.
    pub fn eval(&self, g: &GroupElement) -> Result<f64> {
        self.eval_letters(g.letters())
    }

    /// d(o, g) straight from a reduced letter slice; the hot path for
    /// exhaustive enumeration (no per-node allocation).
    pub fn eval_letters(&self, letters: &[crate::group::Letter]) -> Result<f64> {
        let raw = match &self.backend {
            Backend::Word => letters.len() as f64,
            Backend::Green(table) => table.distance_letters(letters)?,
            Backend::Hilbert(rep) => {
                rep.hilbert_length(&GroupElement::from_reduced(letters.to_vec()))?
            }
            Backend::Table(map) => {
                let g = GroupElement::from_reduced(letters.to_vec());
                map.get(&g)
                    .copied()
                    .ok_or_else(|| Error::OutsideTable(self.alphabet.format_word(letters)))?
            }
        };
        Ok(self.scale * raw)
    }

    /// Evaluator tolerance: certified error bound for a value at word length
    /// `len` (0 for exact backends).
    pub fn eval_tolerance(&self, len: usize) -> f64 {
        let raw = match &self.backend {
            Backend::Word | Backend::Table(_) => 0.0,
            Backend::Green(table) => table.distance_error_bound(len),
            Backend::Hilbert(_) => 1e-12,
        };
        self.scale * raw
    }

    /// Translation length is exactly the metric of the cyclic reduction for
    /// letter-additive backends (word metric and its scalings).
    pub fn is_letter_additive(&self) -> bool {
        matches!(&self.backend, Backend::Word)
    }

    /// Metrics whose translation length is legitimately evaluated through
    /// the cyclic reduction: the word metric (exactly) and nearest-neighbour
    /// Green metrics (the true metric is additive over cyclically reduced
    /// words; residual error is the table accuracy).
    pub fn translation_via_cyclic_reduction_supported(&self) -> bool {
        match &self.backend {
            Backend::Word => true,
            Backend::Green(t) => t.is_nearest_neighbour(),
            _ => false,
        }
    }

    /// Canonical description used for cache keys and provenance.
    pub fn fingerprint(&self) -> String {
        let backend = match &self.backend {
            Backend::Word => "word".to_string(),
            Backend::Green(t) => format!("green({})", t.fingerprint()),
            Backend::Hilbert(r) => format!("hilbert({})", r.fingerprint()),
            Backend::Table(t) => format!("table({} entries)", t.len()),
        };
        format!("{backend}*{:.17e}", self.scale)
    }
}

/// Measures quasi-isometry constants of an evaluator against the word metric
/// over the radius-`radius` ball, inflating slopes by 25%.
pub(crate) fn measure_quasi_isometry(
    alphabet: &Arc<Alphabet>,
    radius: usize,
    eval: &dyn Fn(&GroupElement) -> Option<f64>,
) -> Result<QuasiIsometry> {
    let mut m_low: f64 = 1.0; // max |g| / d
    let mut m_up: f64 = 1.0; // max d / |g|
    let mut worst_defect: f64 = 0.0; // max |g| − m_low·d (for the cap offset)
    let mut stack: Vec<GroupElement> = vec![GroupElement::identity()];
    let mut samples: Vec<(usize, f64)> = Vec::new();
    while let Some(g) = stack.pop() {
        if !g.is_empty() {
            let d = eval(&g).ok_or_else(|| {
                Error::OutsideTable(alphabet.format_word(g.letters()))
            })?;
            if d <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "nonpositive distance {d} at `{}`",
                    alphabet.format_word(g.letters())
                )));
            }
            m_low = m_low.max(g.len() as f64 / d);
            m_up = m_up.max(d / g.len() as f64);
            samples.push((g.len(), d));
        }
        if g.len() < radius {
            for x in alphabet.letters() {
                if g.letters().last().is_some_and(|&y| alphabet.inverse(y) == x) {
                    continue;
                }
                let mut l = g.letters().to_vec();
                l.push(x);
                stack.push(GroupElement::from_reduced(l));
            }
        }
    }
    for &(len, d) in &samples {
        worst_defect = worst_defect.max(len as f64 - m_low * d);
    }
    let l = (1.25 * m_low.max(m_up)).max(1.0);
    let mut c: f64 = 0.0;
    for &(len, d) in &samples {
        c = c.max(len as f64 / l - d).max(d - l * len as f64);
    }
    Ok(QuasiIsometry {
        l,
        c: c.max(0.0),
        cap_slope: 1.25 * m_low,
        cap_offset: (worst_defect / m_low).max(0.0) + 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<Alphabet> {
        Alphabet::free(2).unwrap()
    }

    #[test]
    fn word_metric_values() {
        let d = MetricModel::word_metric(f2());
        let ab = d.alphabet().clone();
        assert_eq!(d.eval(&GroupElement::identity()).unwrap(), 0.0);
        let aba = GroupElement::reduce(&ab, &ab.parse_word("aba").unwrap());
        assert_eq!(d.eval(&aba).unwrap(), 3.0);
        // a·A·b reduces to b.
        let w = GroupElement::reduce(&ab, &ab.parse_word("aAb").unwrap());
        assert_eq!(d.eval(&w).unwrap(), 1.0);
    }

    #[test]
    fn scaling_composes_multiplicatively() {
        let d = MetricModel::word_metric(f2());
        let d2 = d.scale_metric(2.0).unwrap().scale_metric(3.0).unwrap();
        let ab = d.alphabet().clone();
        let g = GroupElement::reduce(&ab, &ab.parse_word("ab").unwrap());
        assert_eq!(d2.eval(&g).unwrap(), 12.0);
        let d1 = d.scale_metric(1.0).unwrap();
        assert_eq!(d1.eval(&g).unwrap(), d.eval(&g).unwrap());
        assert_eq!(d1.kind(), MetricKind::Word);
        assert_eq!(d2.kind(), MetricKind::Scaled);
    }

    #[test]
    fn scaled_cap_still_covers() {
        let d = MetricModel::word_metric(f2()).scale_metric(0.5).unwrap();
        // d(o,g) = |g|/2, so {d < t} needs words up to 2t.
        let r = d.quasi_isometry().word_radius_for(3.0);
        assert!(r >= 6, "cap radius {r}");
    }

    #[test]
    fn table_metric_requires_identity_zero() {
        let ab = f2();
        let mut values = BTreeMap::new();
        values.insert(GroupElement::identity(), 1.0);
        assert!(MetricModel::from_table(ab, values, false, "t".into()).is_err());
    }
}
