use std::collections::BTreeMap;
use std::sync::Arc;

use super::convolution::ClassTreeDp;
use super::measure::FiniteMeasure;
use super::model::{measure_quasi_isometry, MetricModel};
use crate::error::{Error, Result};
use crate::group::{Alphabet, GroupElement};

/// Parameters of a Green-function table build.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GreenParams {
    /// Truncation depth N of the convolution sum.
    pub depth_n: usize,
    /// Word radius L of the state space.
    pub radius_l: usize,
    /// Per-value target accuracy on d_μ; values whose certified bound exceeds
    /// it are flagged, never silently inaccurate.
    pub epsilon: f64,
    /// State-count budget for the generic (non-collapsed) DP.
    pub budget: usize,
    /// Safety factor on the walk spectral-radius estimate.
    pub safety: f64,
}

impl Default for GreenParams {
    fn default() -> Self {
        GreenParams { depth_n: 160, radius_l: 18, epsilon: 1e-2, budget: 1 << 22, safety: 1.05 }
    }
}

#[derive(Debug)]
enum Storage {
    /// Collapsed class-tree accumulator (nearest-neighbour walks on F_k).
    Collapsed { dp: ClassTreeDp, acc: Vec<f64> },
    /// Explicit reduced-word accumulator.
    Map(BTreeMap<GroupElement, f64>),
}

/// Truncated Green function table G(o, ·) = Σ_{n≤N} μ^{∗n}(·) with a
/// conservative error certificate.
///
/// Certificate recipe: with ρ̂ the safety-inflated spectral-radius estimate,
/// the n-tail of the sum is bounded by Σ_{n>N} ρ̂ⁿ (using μ^{∗n}(g) ≤ ρⁿ for
/// symmetric walks); mass killed at the radius-L boundary re-enters an
/// element at word length ℓ only after covering distance L+1−ℓ, contributing
/// at most kill_total·ρ̂^{(L+1−ℓ)/S}/(1−ρ̂) where S is the longest support
/// word. Both parts are far above the truth for distant elements; values
/// whose certified d-error exceeds ε are flagged.
#[derive(Debug)]
pub struct GreenTable {
    alphabet: Arc<Alphabet>,
    params: GreenParams,
    storage: Storage,
    g_identity: f64,
    rho_hat: f64,
    kill_total: f64,
    max_support_len: usize,
    /// μ^{∗n}(o) for n = 1..=N.
    returns: Vec<f64>,
    /// Minimum stored Green value per word length (for per-length bounds).
    min_g_by_len: Vec<f64>,
    fingerprint: String,
}

impl GreenTable {
    pub fn build(mu: &FiniteMeasure, params: GreenParams) -> Result<Self> {
        let alphabet = mu.alphabet().clone();
        let max_support_len = mu.support().iter().map(|(g, _)| g.len()).max().unwrap_or(1);
        let (storage, returns, kill_total) = match mu.class_weights() {
            Some(weights) => {
                let rank = alphabet.free_rank().expect("class weights imply free layout");
                let dp = ClassTreeDp::new(rank, params.radius_l, weights)?;
                let (acc, returns, killed) = dp.run(params.depth_n);
                (Storage::Collapsed { dp, acc }, returns, killed)
            }
            None => {
                let (map, returns, killed) = truncated_word_dp(mu, &params)?;
                (Storage::Map(map), returns, killed)
            }
        };

        let g_identity = match &storage {
            Storage::Collapsed { acc, .. } => acc[0],
            Storage::Map(map) => map[&GroupElement::identity()],
        };

        // ρ̂ = max over even n in [N/2, N] of μ^{∗n}(o)^{1/n}, inflated.
        let mut rho = 0.0f64;
        for (i, &r) in returns.iter().enumerate() {
            let n = i + 1;
            if n % 2 == 0 && n >= params.depth_n / 2 && r > 0.0 {
                rho = rho.max(r.powf(1.0 / n as f64));
            }
        }
        let rho_hat = (rho * params.safety).min(0.999_999);

        let mut min_g_by_len = vec![f64::INFINITY; params.radius_l + 1];
        match &storage {
            Storage::Collapsed { dp, acc } => {
                let mut idx = 0usize;
                for (len, slot) in min_g_by_len.iter_mut().enumerate() {
                    let count = dp.layer_count(len);
                    for _ in 0..count {
                        if acc[idx] > 0.0 {
                            *slot = slot.min(acc[idx]);
                        }
                        idx += 1;
                    }
                }
            }
            Storage::Map(map) => {
                for (g, &v) in map {
                    if v > 0.0 {
                        let slot = &mut min_g_by_len[g.len()];
                        *slot = slot.min(v);
                    }
                }
            }
        }

        let fingerprint = format!(
            "mu[{}];N={};L={};eps={:.3e};safety={:.3}",
            mu.canonical_text().replace('\n', ","),
            params.depth_n,
            params.radius_l,
            params.epsilon,
            params.safety,
        );
        Ok(GreenTable {
            alphabet,
            params,
            storage,
            g_identity,
            rho_hat,
            kill_total,
            max_support_len,
            returns,
            min_g_by_len,
            fingerprint,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn params(&self) -> GreenParams {
        self.params
    }

    pub fn g_identity(&self) -> f64 {
        self.g_identity
    }

    pub fn rho_hat(&self) -> f64 {
        self.rho_hat
    }

    pub fn kill_total(&self) -> f64 {
        self.kill_total
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn radius(&self) -> usize {
        self.params.radius_l
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// G(o, g).
    pub fn green_value(&self, g: &GroupElement) -> Result<f64> {
        self.green_value_letters(g.letters())
    }

    pub fn green_value_letters(&self, letters: &[crate::group::Letter]) -> Result<f64> {
        if letters.len() > self.params.radius_l {
            return Err(Error::OutsideTable(self.alphabet.format_word(letters)));
        }
        let v = match &self.storage {
            Storage::Collapsed { dp, acc } => {
                let idx = dp
                    .index_of_word(letters)
                    .ok_or_else(|| Error::OutsideTable(self.alphabet.format_word(letters)))?;
                acc[idx]
            }
            Storage::Map(map) => {
                let g = GroupElement::from_reduced(letters.to_vec());
                map.get(&g).copied().unwrap_or(0.0)
            }
        };
        if v <= 0.0 {
            return Err(Error::OutsideTable(self.alphabet.format_word(letters)));
        }
        Ok(v)
    }

    /// d_μ(o, g) = −log(G(o,g) / G(o,o)).
    pub fn distance(&self, g: &GroupElement) -> Result<f64> {
        Ok(-(self.green_value(g)? / self.g_identity).ln())
    }

    pub fn distance_letters(&self, letters: &[crate::group::Letter]) -> Result<f64> {
        Ok(-(self.green_value_letters(letters)? / self.g_identity).ln())
    }

    /// True when the walk is nearest-neighbour on the free alphabet; the true
    /// Green metric is then additive over letters of cyclically reduced
    /// words, so translation lengths come from the cyclic reduction.
    pub fn is_nearest_neighbour(&self) -> bool {
        matches!(self.storage, Storage::Collapsed { .. })
    }

    /// Certified absolute error on G(o,g) for elements of word length `len`.
    pub fn green_error_bound(&self, len: usize) -> f64 {
        let rho = self.rho_hat;
        let geom = 1.0 / (1.0 - rho);
        let tail = rho.powi(self.params.depth_n as i32 + 1) * geom;
        let gap = (self.params.radius_l + 1).saturating_sub(len);
        let steps = (gap as f64 / self.max_support_len as f64).floor();
        let leak = self.kill_total * rho.powf(steps) * geom;
        tail + leak
    }

    /// Certified error on d_μ(o,g) for word length `len`, using the smallest
    /// stored Green value at that length.
    pub fn distance_error_bound(&self, len: usize) -> f64 {
        if len == 0 {
            return 0.0;
        }
        let g_min = self.min_g_by_len.get(len).copied().unwrap_or(f64::INFINITY);
        if !g_min.is_finite() {
            return f64::INFINITY;
        }
        self.green_error_bound(len) / g_min + self.green_error_bound(0) / self.g_identity
    }

    /// True when the certified bound at this word length misses the ε target.
    pub fn is_flagged(&self, len: usize) -> bool {
        self.distance_error_bound(len) > self.params.epsilon
    }

    /// Smallest word length whose certificate misses ε, if any.
    pub fn first_flagged_length(&self) -> Option<usize> {
        (1..=self.params.radius_l).find(|&len| self.is_flagged(len))
    }
}

/// Generic truncated DP over explicit reduced words, for walks without the
/// collapsed structure. States beyond word radius L are dropped into the
/// kill counter.
fn truncated_word_dp(
    mu: &FiniteMeasure,
    params: &GreenParams,
) -> Result<(BTreeMap<GroupElement, f64>, Vec<f64>, f64)> {
    let alphabet = mu.alphabet().clone();
    let o = GroupElement::identity();
    let mut cur: BTreeMap<GroupElement, f64> = BTreeMap::new();
    cur.insert(o.clone(), 1.0);
    let mut acc = cur.clone();
    let mut killed = 0.0f64;
    let mut returns = Vec::with_capacity(params.depth_n);
    for _ in 0..params.depth_n {
        let mut next: BTreeMap<GroupElement, f64> = BTreeMap::new();
        for (g, &p) in &cur {
            for (s, w) in mu.support() {
                let h = g.multiply(&alphabet, s);
                if h.len() > params.radius_l {
                    killed += p * w;
                } else {
                    *next.entry(h).or_insert(0.0) += p * w;
                }
            }
        }
        if next.len() > params.budget {
            return Err(Error::BudgetExceeded { reachable: next.len(), budget: params.budget });
        }
        returns.push(next.get(&o).copied().unwrap_or(0.0));
        for (g, &v) in &next {
            *acc.entry(g.clone()).or_insert(0.0) += v;
        }
        cur = next;
    }
    Ok((acc, returns, killed))
}

/// Builds the Green metric d_μ of a symmetric admissible walk, together with
/// its table. Quasi-isometry constants are measured on a small ball.
pub fn green_metric(
    mu: &FiniteMeasure,
    params: GreenParams,
) -> Result<(MetricModel, Arc<GreenTable>)> {
    let table = Arc::new(GreenTable::build(mu, params)?);
    let qi_radius = usize::min(10, params.radius_l.saturating_sub(2)).max(3);
    let t = table.clone();
    let qi = measure_quasi_isometry(mu.alphabet(), qi_radius, &move |g: &GroupElement| {
        t.distance(g).ok()
    })?;
    let label = format!("green[{}]", short_weights(mu));
    let model = MetricModel::from_green(table.clone(), qi, label);
    Ok((model, table))
}

fn short_weights(mu: &FiniteMeasure) -> String {
    mu.support()
        .iter()
        .map(|(g, w)| format!("{}:{w:.4}", mu.alphabet().format_word(g.letters())))
        .collect::<Vec<_>>()
        .join(",")
}
