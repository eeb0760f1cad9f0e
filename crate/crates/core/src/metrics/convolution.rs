use std::collections::BTreeMap;

use super::measure::FiniteMeasure;
use crate::error::{Error, Result};
use crate::group::{GroupElement, Letter};

/// Exact convolution powers μ^{∗n} for n = 1..=N by dynamic programming over
/// reduced words: μ^{∗n}(g) = Σ_s μ^{∗(n−1)}(g·s⁻¹)·μ(s), rearranged as a
/// forward push. Deterministic iteration order via BTreeMap.
pub fn convolution_powers(
    mu: &FiniteMeasure,
    n: usize,
    budget: usize,
) -> Result<Vec<BTreeMap<GroupElement, f64>>> {
    let alphabet = mu.alphabet().clone();
    let mut out: Vec<BTreeMap<GroupElement, f64>> = Vec::with_capacity(n);
    let mut prev: BTreeMap<GroupElement, f64> = BTreeMap::new();
    prev.insert(GroupElement::identity(), 1.0);
    for _ in 0..n {
        let mut next: BTreeMap<GroupElement, f64> = BTreeMap::new();
        for (g, &p) in &prev {
            for (s, w) in mu.support() {
                let h = g.multiply(&alphabet, s);
                *next.entry(h).or_insert(0.0) += p * w;
            }
        }
        if next.len() > budget {
            return Err(Error::BudgetExceeded { reachable: next.len(), budget });
        }
        out.push(next.clone());
        prev = next;
    }
    Ok(out)
}

/// Collapsed convolution DP for nearest-neighbour walks on the free group
/// F_k with symmetric letter weights.
///
/// The weighted Cayley tree admits automorphisms fixing the identity that
/// permute equal-weight branches independently at every vertex, so
/// μ^{∗n}(g) depends on g only through the sequence of generator classes
/// along its reduced word. The DP therefore runs on class sequences of
/// length ≤ L: k^m states at depth m instead of 2k(2k−1)^{m−1} words. The
/// computed sums are identical to the word DP restricted to the word ball
/// of radius L; mass stepping to depth L+1 is dropped and accounted for in
/// the kill counter.
#[derive(Debug, Clone)]
pub struct ClassTreeDp {
    rank: usize,
    radius: usize,
    /// offsets[m] = first index of depth-m states; offsets[L+1] = total.
    offsets: Vec<usize>,
    class_weight: Vec<f64>,
}

impl ClassTreeDp {
    pub fn new(rank: usize, radius: usize, class_weight: Vec<f64>) -> Result<Self> {
        assert_eq!(class_weight.len(), rank);
        let mut offsets = Vec::with_capacity(radius + 2);
        let mut total = 0usize;
        let mut layer = 1usize;
        for _ in 0..=radius {
            offsets.push(total);
            total = total
                .checked_add(layer)
                .ok_or(Error::BudgetExceeded { reachable: usize::MAX, budget: usize::MAX })?;
            layer = layer.saturating_mul(rank);
        }
        offsets.push(total);
        // Two work arrays plus an accumulator of f64 each.
        if total > (1usize << 28) {
            return Err(Error::BudgetExceeded { reachable: total, budget: 1 << 28 });
        }
        Ok(ClassTreeDp { rank, radius, offsets, class_weight })
    }

    pub fn state_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Number of collapsed states at a given depth.
    pub fn layer_count(&self, depth: usize) -> usize {
        self.offsets[depth + 1] - self.offsets[depth]
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Collapsed index of a reduced word given as letter classes.
    pub fn index_of_classes(&self, classes: impl Iterator<Item = usize>) -> Option<usize> {
        let mut idx = 0usize;
        let mut depth = 0usize;
        for c in classes {
            if depth == self.radius {
                return None;
            }
            idx = (idx - self.offsets[depth]) * self.rank + c + self.offsets[depth + 1];
            depth += 1;
        }
        Some(idx)
    }

    pub fn index_of_word(&self, letters: &[Letter]) -> Option<usize> {
        self.index_of_classes(letters.iter().map(|&x| (x / 2) as usize))
    }

    /// Runs n steps, accumulating Σ_n μ^{∗n} into `acc` (which starts at δ_o)
    /// and recording the return probabilities μ^{∗n}(o). Returns
    /// (acc, return_sequence, killed_mass_total).
    pub fn run(&self, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let total = self.state_count();
        let mut cur = vec![0.0f64; total];
        let mut next = vec![0.0f64; total];
        let mut acc = vec![0.0f64; total];
        cur[0] = 1.0;
        acc[0] = 1.0;
        let mut returns = Vec::with_capacity(n);
        let top_fiber = self.top_layer_fibers();
        let mut killed = 0.0f64;

        for _ in 0..n {
            self.step(&cur, &mut next);
            killed += self.killed_mass(&cur, &top_fiber);
            for (a, &v) in acc.iter_mut().zip(next.iter()) {
                *a += v;
            }
            returns.push(next[0]);
            std::mem::swap(&mut cur, &mut next);
        }
        (acc, returns, killed)
    }

    /// One transition of the collapsed walk.
    fn step(&self, cur: &[f64], next: &mut [f64]) {
        let k = self.rank;
        let p = &self.class_weight;
        // Root: inflow from both letters of each class-j depth-1 state.
        let mut root = 0.0;
        for j in 0..k {
            root += 2.0 * p[j] * cur[self.offsets[1] + j];
        }
        next[0] = root;

        for depth in 1..=self.radius {
            let start = self.offsets[depth];
            let parent_start = self.offsets[depth - 1];
            let parent_count = start - parent_start;
            let has_children = depth < self.radius;
            let child_start = if has_children { self.offsets[depth + 1] } else { 0 };
            // Parent-major order keeps all index arithmetic additive.
            for prel in 0..parent_count {
                let pv = cur[parent_start + prel];
                let rel0 = prel * k;
                for last in 0..k {
                    let rel = rel0 + last;
                    let mut v = p[last] * pv;
                    if has_children {
                        let base = child_start + rel * k;
                        for j in 0..k {
                            let coeff = if j == last { 1.0 } else { 2.0 };
                            v += coeff * p[j] * cur[base + j];
                        }
                    }
                    next[start + rel] = v;
                }
            }
        }
    }

    /// Probability mass stepping past depth L this step: per top-layer state,
    /// outflow (p_last + Σ_{j≠last} 2 p_j) weighted by the fiber size.
    fn killed_mass(&self, cur: &[f64], top_fiber: &[f64]) -> f64 {
        let k = self.rank;
        let p = &self.class_weight;
        let total_out: f64 = p.iter().map(|w| 2.0 * w).sum();
        let start = self.offsets[self.radius];
        let count = self.offsets[self.radius + 1] - start;
        let mut killed = 0.0;
        let mut last = 0usize;
        for rel in 0..count {
            killed += cur[start + rel] * (total_out - p[last]) * top_fiber[rel];
            last += 1;
            if last == k {
                last = 0;
            }
        }
        killed
    }

    /// Number of reduced words per top-depth class sequence: 2^(1 + changes).
    fn top_layer_fibers(&self) -> Vec<f64> {
        let depth = self.radius;
        let count = self.offsets[depth + 1] - self.offsets[depth];
        let mut fibers = Vec::with_capacity(count);
        for rel in 0..count {
            let mut changes = 0u32;
            let mut x = rel;
            let mut prev = usize::MAX;
            for _ in 0..depth {
                let d = x % self.rank;
                if prev != usize::MAX && d != prev {
                    changes += 1;
                }
                prev = d;
                x /= self.rank;
            }
            fibers.push((2u64 << changes) as f64);
        }
        fibers
    }

    /// Total mass of μ^{∗n}_truncated over the whole ball (test support).
    pub fn total_mass(&self, layer: &[f64]) -> f64 {
        let mut sum = layer[0];
        for depth in 1..=self.radius {
            let start = self.offsets[depth];
            for i in start..self.offsets[depth + 1] {
                let rel = i - start;
                let mut changes = 0u32;
                let mut x = rel;
                let mut prev = usize::MAX;
                for _ in 0..depth {
                    let d = x % self.rank;
                    if prev != usize::MAX && d != prev {
                        changes += 1;
                    }
                    prev = d;
                    x /= self.rank;
                }
                sum += layer[i] * (2u64 << changes) as f64;
            }
        }
        sum
    }
}
