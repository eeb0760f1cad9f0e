use std::sync::Arc;

use nalgebra::DMatrix;

use super::model::{measure_quasi_isometry, MetricModel};
use crate::error::{Error, Result};
use crate::group::{Alphabet, GroupElement, Letter};

/// A representation letter → SL_n(ℝ), the data behind a Hilbert length
/// functional α(g) = log σ₁(ρ(g)) − log σ_n(ρ(g)).
#[derive(Debug, Clone)]
pub struct MatrixRep {
    alphabet: Arc<Alphabet>,
    dim: usize,
    mats: Vec<DMatrix<f64>>,
    fingerprint: String,
}

/// Renormalize long products every this many multiplications to keep entries
/// in range; the scale is accumulated in log form.
const RENORM_EVERY: usize = 8;

impl MatrixRep {
    pub fn new(alphabet: Arc<Alphabet>, dim: usize, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.len() != alphabet.len() {
            return Err(Error::InvalidRepresentation("one matrix per letter required".into()));
        }
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidRepresentation(format!(
                    "matrix for `{}` is not {dim}x{dim}",
                    alphabet.name(i as Letter)
                )));
            }
            let det = m.determinant();
            if (det - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidRepresentation(format!(
                    "matrix for `{}` has determinant {det}, expected 1",
                    alphabet.name(i as Letter)
                )));
            }
        }
        for x in alphabet.letters() {
            let prod = &mats[x as usize] * &mats[alphabet.inverse(x) as usize];
            let id = DMatrix::<f64>::identity(dim, dim);
            if (&prod - &id).abs().max() > 1e-12 {
                return Err(Error::InvalidRepresentation(format!(
                    "ρ({})·ρ({}) is not the identity",
                    alphabet.name(x),
                    alphabet.name(alphabet.inverse(x))
                )));
            }
        }
        let mut fp = format!("dim={dim}");
        for m in &mats {
            for v in m.iter() {
                fp.push_str(&format!(";{v:.17e}"));
            }
        }
        Ok(MatrixRep { alphabet, dim, mats, fingerprint: fp })
    }

    /// The standard SL₂(ℝ) Schottky-type pair: ρ(a) = diag(λ, 1/λ) and
    /// ρ(b) its conjugate by a 45° rotation (axes crossing at i).
    pub fn sl2_schottky(lambda: f64) -> Result<Self> {
        let alphabet = Alphabet::free(2)?;
        let diag = DMatrix::from_row_slice(2, 2, &[lambda, 0.0, 0.0, 1.0 / lambda]);
        let diag_inv = DMatrix::from_row_slice(2, 2, &[1.0 / lambda, 0.0, 0.0, lambda]);
        let t = std::f64::consts::FRAC_PI_4;
        let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let rot_inv = rot.transpose();
        let b = &rot * &diag * &rot_inv;
        let b_inv = &rot * &diag_inv * &rot_inv;
        MatrixRep::new(alphabet, 2, vec![diag, diag_inv, b, b_inv])
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, x: Letter) -> &DMatrix<f64> {
        &self.mats[x as usize]
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// ρ(g) as (renormalized matrix, log scale): the true product is
    /// e^{log_scale}·matrix.
    pub fn product(&self, g: &GroupElement) -> (DMatrix<f64>, f64) {
        let mut m = DMatrix::<f64>::identity(self.dim, self.dim);
        let mut log_scale = 0.0f64;
        for (i, &x) in g.letters().iter().enumerate() {
            m *= &self.mats[x as usize];
            if (i + 1) % RENORM_EVERY == 0 {
                let norm = m.abs().max();
                if norm > 0.0 {
                    m /= norm;
                    log_scale += norm.ln();
                }
            }
        }
        (m, log_scale)
    }

    /// (log σ₁, log σ_n) of ρ(g).
    pub fn log_singular_extremes(&self, g: &GroupElement) -> Result<(f64, f64)> {
        let (m, log_scale) = self.product(g);
        if self.dim == 2 {
            // Closed form: σ₁² = (f + √(f² − 4 det²))/2 with f = Σ entries²,
            // and σ₁σ₂ = |det|. Numerically stable for extreme ratios.
            let f: f64 = m.iter().map(|v| v * v).sum();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
            let s1_sq = (f + disc) / 2.0;
            let log_s1 = 0.5 * s1_sq.ln();
            let log_s2 = det.abs().ln() - log_s1;
            Ok((log_s1 + log_scale, log_s2 + log_scale))
        } else {
            let svd = m.svd(false, false);
            let sv = &svd.singular_values;
            let mut s_max = f64::MIN;
            let mut s_min = f64::MAX;
            for &s in sv.iter() {
                s_max = s_max.max(s);
                s_min = s_min.min(s);
            }
            if s_min <= 0.0 {
                return Err(Error::InvalidRepresentation("singular value underflow".into()));
            }
            Ok((s_max.ln() + log_scale, s_min.ln() + log_scale))
        }
    }

    /// α(g) = log σ₁(ρ(g)) − log σ_n(ρ(g)).
    pub fn hilbert_length(&self, g: &GroupElement) -> Result<f64> {
        let (hi, lo) = self.log_singular_extremes(g)?;
        Ok(hi - lo)
    }

    /// Singular-value collapse (σ₁ ≈ σ_n on a non-identity element) signals a
    /// non-Anosov direction.
    pub fn collapse_warning(&self, g: &GroupElement) -> bool {
        !g.is_empty() && self.hilbert_length(g).map(|a| a < 1e-9).unwrap_or(true)
    }

    /// Parses the representation file format: `dim n`, then per letter
    /// `gen <letter>` followed by n rows of n numbers. Missing inverse
    /// letters are filled in from the matrix inverse.
    pub fn parse_text(alphabet: Arc<Alphabet>, text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut mats: Vec<Option<DMatrix<f64>>> = vec![None; alphabet.len()];
        let mut current: Option<(Letter, Vec<f64>)> = None;
        let flush =
            |cur: &mut Option<(Letter, Vec<f64>)>, mats: &mut Vec<Option<DMatrix<f64>>>, d: usize|
             -> Result<()> {
                if let Some((letter, vals)) = cur.take() {
                    if vals.len() != d * d {
                        return Err(Error::InvalidRepresentation(format!(
                            "matrix for letter index {letter} has {} entries, expected {}",
                            vals.len(),
                            d * d
                        )));
                    }
                    mats[letter as usize] = Some(DMatrix::from_row_slice(d, d, &vals));
                }
                Ok(())
            };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            match toks[0] {
                "dim" if toks.len() == 2 => {
                    dim = Some(toks[1].parse().map_err(|_| err("bad dimension".into()))?);
                }
                "gen" if toks.len() == 2 => {
                    let d = dim.ok_or_else(|| err("`dim` must come first".into()))?;
                    flush(&mut current, &mut mats, d)?;
                    current = Some((alphabet.letter(toks[1])?, Vec::new()));
                }
                _ => {
                    let (_, vals) = current
                        .as_mut()
                        .ok_or_else(|| err("matrix row outside a `gen` block".into()))?;
                    for t in toks {
                        vals.push(t.parse().map_err(|_| err(format!("bad number `{t}`")))?);
                    }
                }
            }
        }
        let d = dim.ok_or(Error::Parse { line: 0, message: "missing `dim`".into() })?;
        flush(&mut current, &mut mats, d)?;
        // Fill inverses.
        for x in alphabet.letters() {
            if mats[x as usize].is_none() {
                let inv = alphabet.inverse(x);
                if let Some(m) = &mats[inv as usize] {
                    let minv = m.clone().try_inverse().ok_or_else(|| {
                        Error::InvalidRepresentation(format!(
                            "matrix for `{}` is singular",
                            alphabet.name(inv)
                        ))
                    })?;
                    mats[x as usize] = Some(minv);
                }
            }
        }
        let mats: Option<Vec<_>> = mats.into_iter().collect();
        let mats = mats.ok_or_else(|| {
            Error::InvalidRepresentation("missing generator matrices".into())
        })?;
        MatrixRep::new(alphabet, d, mats)
    }
}

/// Builds the Hilbert length functional of a representation as a metric
/// model, measuring quasi-isometry constants on the radius-6 ball.
pub fn hilbert_length(rep: Arc<MatrixRep>) -> Result<MetricModel> {
    let r = rep.clone();
    let qi = measure_quasi_isometry(rep.alphabet(), 6, &move |g: &GroupElement| {
        r.hilbert_length(g).ok()
    })?;
    let label = format!("hilbert[dim={}]", rep.dim());
    Ok(MetricModel::from_hilbert(rep, qi, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_zero_length() {
        let rep = MatrixRep::sl2_schottky(3.0).unwrap();
        assert!(rep.hilbert_length(&GroupElement::identity()).unwrap().abs() < 1e-12);
        assert!(rep.collapse_warning(&GroupElement::identity()) == false);
    }

    #[test]
    fn diagonal_matrix_gap() {
        // diag(e, 1/e) has σ₁ = e, σ₂ = e⁻¹, so α = 2.
        let rep = MatrixRep::sl2_schottky(std::f64::consts::E).unwrap();
        let ab = rep.alphabet().clone();
        let a = GroupElement::reduce(&ab, &ab.parse_word("a").unwrap());
        assert!((rep.hilbert_length(&a).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn long_products_do_not_overflow() {
        let rep = MatrixRep::sl2_schottky(3.0).unwrap();
        let ab = rep.alphabet().clone();
        // (ab)^20: 40 letters.
        let ab_word = GroupElement::reduce(&ab, &ab.parse_word("ab").unwrap());
        let g = ab_word.pow(&ab, 20);
        let alpha = rep.hilbert_length(&g).unwrap();
        assert!(alpha.is_finite() && alpha > 10.0);
    }

    #[test]
    fn submultiplicativity_of_top_singular_value() {
        use rand::SeedableRng;
        let rep = MatrixRep::sl2_schottky(2.0).unwrap();
        let ab = rep.alphabet().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let g = crate::group::random_reduced_word(&ab, 6, &mut rng);
            let h = crate::group::random_reduced_word(&ab, 6, &mut rng);
            let gh = g.multiply(&ab, &h);
            let (s_gh, _) = rep.log_singular_extremes(&gh).unwrap();
            let (s_g, _) = rep.log_singular_extremes(&g).unwrap();
            let (s_h, _) = rep.log_singular_extremes(&h).unwrap();
            assert!(s_gh <= s_g + s_h + 1e-9);
        }
    }

    #[test]
    fn parse_round_trip() {
        let ab = Alphabet::free(2).unwrap();
        let text = "dim 2\ngen a\n2 0\n0 0.5\ngen b\n1.25 0.75\n0.75 1.25\n";
        let rep = MatrixRep::parse_text(ab.clone(), text).unwrap();
        assert_eq!(rep.dim(), 2);
        // Inverse letters derived from the given matrices.
        let a = GroupElement::reduce(&ab, &ab.parse_word("aA").unwrap());
        assert!(a.is_empty());
        let g = GroupElement::reduce(&ab, &ab.parse_word("bB").unwrap());
        assert!(rep.hilbert_length(&g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn determinant_checked() {
        let ab = Alphabet::free(2).unwrap();
        let text = "dim 2\ngen a\n2 0\n0 1\ngen b\n1 0\n0 1\n";
        assert!(matches!(
            MatrixRep::parse_text(ab, text),
            Err(Error::InvalidRepresentation(_))
        ));
    }
}
