use super::blocks::BlockSft;
use super::potential::CylinderPotential;
use crate::error::{Error, Result};
use crate::spectral::SparseMatrix;

/// Weighted transition matrix of the transfer operator restricted to a
/// component's block SFT: entry (u, v) = exp(−s·Ψ_d − t·Φ) evaluated on the
/// cylinder of the transition. Preimages through the augmentation fixed
/// point are excluded by construction (the block SFT never sees it).
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub s: f64,
    pub t: f64,
    pub matrix: SparseMatrix,
}

pub fn build_transfer(
    block: &BlockSft,
    psi_d: &CylinderPotential,
    phi: &CylinderPotential,
    s: f64,
    t: f64,
) -> Result<TransferMatrix> {
    if psi_d.depth() != block.depth() {
        return Err(Error::DepthMismatch(psi_d.depth(), block.depth()));
    }
    if phi.depth() != block.depth() {
        return Err(Error::DepthMismatch(phi.depth(), block.depth()));
    }
    let matrix = weighted_matrix(block, &|cyl| {
        let a = psi_d.get(cyl)?;
        let b = phi.get(cyl)?;
        Some(-s * a - t * b)
    })?;
    Ok(TransferMatrix { s, t, matrix })
}

/// Sparse matrix with entry exp(f(cylinder)) per allowed block transition.
pub fn weighted_matrix(
    block: &BlockSft,
    log_weight: &dyn Fn(&[usize]) -> Option<f64>,
) -> Result<SparseMatrix> {
    let n = block.state_count();
    let mut m = SparseMatrix::new(n);
    for i in 0..n {
        for &j in block.successors(i) {
            let cyl = block.transition_cylinder(i, j);
            let w = log_weight(&cyl).ok_or_else(|| {
                Error::Degenerate(format!("no potential value on cylinder {cyl:?}"))
            })?;
            m.push(i, j, w.exp());
        }
    }
    m.sort_rows();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{scc_decomposition, AutomaticStructure};
    use crate::metrics::{busemann_potential, BusemannParams, MetricModel};
    use crate::symbolic::blocks::refine_to_blocks;

    fn setup(k: usize) -> (BlockSft, CylinderPotential, CylinderPotential) {
        let a = AutomaticStructure::free_group(2).unwrap();
        let comp = scc_decomposition(&a).into_iter().find(|c| c.is_word_maximal).unwrap();
        let block = refine_to_blocks(&a, &comp, k).unwrap();
        let d = MetricModel::word_metric(a.alphabet().clone());
        let params = BusemannParams {
            depth: k,
            horizon: 3 * k + 2,
            alt_extensions: 1,
            allow_non_strongly_hyperbolic: true,
        };
        let psi = busemann_potential(&d, &a, params).unwrap();
        let zero = psi.sub(&psi).unwrap();
        (block, psi, zero)
    }

    #[test]
    fn zero_parameters_give_adjacency() {
        let (block, psi, zero) = setup(2);
        let t = build_transfer(&block, &psi, &zero, 0.0, 0.0).unwrap();
        for row in &t.matrix.rows {
            assert_eq!(row.len(), 3);
            for &(_, w) in row {
                assert_eq!(w, 1.0);
            }
        }
    }

    #[test]
    fn constant_potential_factorizes() {
        let (block, psi, zero) = setup(2);
        let s = 0.7;
        let t = build_transfer(&block, &psi, &zero, s, 0.0).unwrap();
        // Ψ ≡ 1 for the word metric, so every weight is e^{−s}.
        for row in &t.matrix.rows {
            for &(_, w) in row {
                assert!((w - (-s).exp()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn weights_positive_for_finite_parameters() {
        let (block, psi, zero) = setup(3);
        let t = build_transfer(&block, &psi, &zero, -2.5, 3.0).unwrap();
        for row in &t.matrix.rows {
            for &(_, w) in row {
                assert!(w > 0.0);
            }
        }
    }

    #[test]
    fn depth_mismatch_detected() {
        let (block, _, _) = setup(2);
        let (_, psi3, _) = setup(3);
        assert!(matches!(
            build_transfer(&block, &psi3, &psi3, 1.0, 0.0),
            Err(Error::DepthMismatch(3, 2))
        ));
    }
}
