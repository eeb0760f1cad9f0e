use super::blocks::BlockSft;
use super::potential::CylinderPotential;
use super::pressure::PressurePoint;
use crate::error::{Error, Result};
use crate::spectral::SparseMatrix;
use crate::symbolic::transfer::TransferMatrix;

/// The equilibrium (Parry-type) measure of a converged pressure point:
/// stationary block probabilities π ∝ left ⊙ right and the transition kernel
/// Q(u,v) = M(u,v)·r(v) / (λ·r(u)) from the standard Perron similarity.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    pub pi: Vec<f64>,
    pub kernel: SparseMatrix,
}

pub fn equilibrium_measure(m: &TransferMatrix, p: &PressurePoint) -> Result<EquilibriumMeasure> {
    let n = m.matrix.dim;
    if p.right.len() != n {
        return Err(Error::Degenerate("pressure point does not match the matrix".into()));
    }
    let mut pi: Vec<f64> = (0..n).map(|i| p.left[i] * p.right[i]).collect();
    let total: f64 = pi.iter().sum();
    for v in pi.iter_mut() {
        *v /= total;
    }
    let mut kernel = SparseMatrix::new(n);
    for (u, row) in m.matrix.rows.iter().enumerate() {
        for &(v, w) in row {
            kernel.push(u, v, w * p.right[v] / (p.lambda * p.right[u]));
        }
    }
    kernel.sort_rows();
    Ok(EquilibriumMeasure { pi, kernel })
}

impl EquilibriumMeasure {
    /// Row sums of the kernel: 1 within the spectral residual.
    pub fn max_row_defect(&self) -> f64 {
        self.kernel
            .rows
            .iter()
            .map(|row| (row.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// ‖πQ − π‖∞: stationarity defect.
    pub fn stationarity_defect(&self) -> f64 {
        let mut out = vec![0.0; self.pi.len()];
        self.kernel.apply_transpose(&self.pi, &mut out);
        out.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// ∫ f dμ for an edge (cylinder) function over the block SFT.
    pub fn edge_average(&self, block: &BlockSft, f: &CylinderPotential) -> Result<f64> {
        let mut acc = 0.0;
        for (u, row) in self.kernel.rows.iter().enumerate() {
            for &(v, q) in row {
                let cyl = block.transition_cylinder(u, v);
                let val = f.get(&cyl).ok_or_else(|| {
                    Error::Degenerate(format!("cylinder {cyl:?} missing from the potential"))
                })?;
                acc += self.pi[u] * q * val;
            }
        }
        Ok(acc)
    }

    /// Entropy of the stationary chain: −Σ_u π_u Σ_v Q(u,v) log Q(u,v).
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (u, row) in self.kernel.rows.iter().enumerate() {
            for &(_, q) in row {
                if q > 0.0 {
                    h -= self.pi[u] * q * q.ln();
                }
            }
        }
        h
    }

    /// Asymptotic variance of the centred edge function under the stationary
    /// chain via the truncated Green–Kubo series  c₀ + 2·Σ_{j≥1} c_j, with
    /// c_j the lag-j autocovariance. Truncates once |c_j| falls below
    /// `tail_tol` and estimates the remaining tail from the decay ratio.
    pub fn asymptotic_variance(
        &self,
        block: &BlockSft,
        f: &CylinderPotential,
        tail_tol: f64,
        max_lag: usize,
    ) -> Result<VarianceEstimate> {
        let n = self.pi.len();
        let mean = self.edge_average(block, f)?;

        // Edge values centred by the mean.
        let mut centred: Vec<Vec<(usize, f64, f64)>> = Vec::with_capacity(n); // (v, q, f̃)
        for (u, row) in self.kernel.rows.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for &(v, q) in row {
                let cyl = block.transition_cylinder(u, v);
                let val = f.get(&cyl).ok_or_else(|| {
                    Error::Degenerate(format!("cylinder {cyl:?} missing from the potential"))
                })?;
                r.push((v, q, val - mean));
            }
            centred.push(r);
        }

        // c₀ and the building blocks:
        //   α(v) = Σ_u π_u Q(u,v) f̃(u,v)   (signed inflow measure)
        //   g(u) = Σ_v Q(u,v) f̃(u,v)       (expected next-edge value)
        let mut c0 = 0.0;
        let mut alpha = vec![0.0; n];
        let mut g = vec![0.0; n];
        for (u, row) in centred.iter().enumerate() {
            for &(v, q, fv) in row {
                c0 += self.pi[u] * q * fv * fv;
                alpha[v] += self.pi[u] * q * fv;
                g[u] += q * fv;
            }
        }

        let mut variance = c0;
        let mut tail_estimate = 0.0;
        let mut prev_abs = f64::INFINITY;
        let mut lags = 0usize;
        let mut buf = vec![0.0; n];
        for _ in 1..=max_lag {
            // c_j = Σ_v α_j(v) g(v) with α_j = α Qʲ⁻¹.
            let cj: f64 = alpha.iter().zip(&g).map(|(a, b)| a * b).sum();
            variance += 2.0 * cj;
            lags += 1;
            let abs = cj.abs();
            if abs < tail_tol {
                let ratio = if prev_abs.is_finite() && prev_abs > 0.0 {
                    (abs / prev_abs).min(0.95)
                } else {
                    0.5
                };
                tail_estimate = 2.0 * abs * ratio / (1.0 - ratio);
                break;
            }
            prev_abs = abs;
            // α ← αQ (row-vector product).
            self.kernel.apply_transpose(&alpha, &mut buf);
            std::mem::swap(&mut alpha, &mut buf);
        }
        Ok(VarianceEstimate { mean, variance, tail_estimate, lags })
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct VarianceEstimate {
    pub mean: f64,
    pub variance: f64,
    pub tail_estimate: f64,
    pub lags: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{scc_decomposition, AutomaticStructure};
    use crate::metrics::{busemann_potential, BusemannParams, MetricModel};
    use crate::symbolic::blocks::refine_to_blocks;
    use crate::symbolic::pressure::{pressure, PRESSURE_TOL};
    use crate::symbolic::transfer::build_transfer;

    fn uniform_chain() -> (BlockSft, TransferMatrix, PressurePoint, CylinderPotential) {
        let a = AutomaticStructure::free_group(2).unwrap();
        let comp = scc_decomposition(&a).into_iter().find(|c| c.is_word_maximal).unwrap();
        let block = refine_to_blocks(&a, &comp, 2).unwrap();
        let d = MetricModel::word_metric(a.alphabet().clone());
        let params = BusemannParams {
            depth: 2,
            horizon: 8,
            alt_extensions: 1,
            allow_non_strongly_hyperbolic: true,
        };
        let psi = busemann_potential(&d, &a, params).unwrap();
        let zero = psi.sub(&psi).unwrap();
        let m = build_transfer(&block, &zero, &zero, 0.0, 0.0).unwrap();
        let p = pressure(&m, PRESSURE_TOL).unwrap();
        (block, m, p, psi)
    }

    #[test]
    fn zero_potential_measure_is_uniform_with_entropy_log3() {
        let (_block, m, p, _psi) = uniform_chain();
        let mu = equilibrium_measure(&m, &p).unwrap();
        for &x in &mu.pi {
            assert!((x - 1.0 / 12.0).abs() < 1e-10, "{x}");
        }
        assert!((mu.entropy() - 3.0f64.ln()).abs() < 1e-9);
        assert!(mu.max_row_defect() < 1e-10);
        assert!(mu.stationarity_defect() < 1e-10);
    }

    #[test]
    fn total_mass_and_word_potential_average() {
        let (block, m, p, psi) = uniform_chain();
        let mu = equilibrium_measure(&m, &p).unwrap();
        let total: f64 = mu.pi.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // ∫ Ψ_word dμ = 1 since Ψ ≡ 1.
        let avg = mu.edge_average(&block, &psi).unwrap();
        assert!((avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_of_constant_function_vanishes() {
        let (block, m, p, psi) = uniform_chain();
        let mu = equilibrium_measure(&m, &p).unwrap();
        let est = mu.asymptotic_variance(&block, &psi, 1e-12, 1000).unwrap();
        assert!((est.mean - 1.0).abs() < 1e-12);
        assert!(est.variance.abs() < 1e-10, "{}", est.variance);
    }

    #[test]
    fn variance_positive_for_nonconstant_function() {
        let (block, m, p, psi) = uniform_chain();
        let mu = equilibrium_measure(&m, &p).unwrap();
        // A cylinder function that depends on the last vertex.
        let values = psi
            .iter()
            .map(|(k, _)| {
                let last = *k.last().unwrap();
                (k.clone(), if last <= 3 { 1.0 } else { 2.0 })
            })
            .collect();
        let f = CylinderPotential::new(2, values, 0.0).unwrap();
        let est = mu.asymptotic_variance(&block, &f, 1e-12, 1000).unwrap();
        assert!(est.variance > 0.01, "{}", est.variance);
    }
}
