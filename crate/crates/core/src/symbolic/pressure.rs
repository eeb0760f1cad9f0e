use super::blocks::{refine_to_blocks, BlockSft};
use super::potential::CylinderPotential;
use super::transfer::{build_transfer, TransferMatrix};
use crate::error::Result;
use crate::group::{AutomaticStructure, ComponentInfo};
use crate::spectral::{perron, SparseMatrix};

/// Convergence tolerance of the spectral solves; pressure noise sits near
/// this level, which is why finite-difference steps are never taken below
/// the configured minimum.
pub const PRESSURE_TOL: f64 = 1e-13;
pub const PRESSURE_MAX_ITER: usize = 200_000;

/// Pressure of a weighted transfer matrix: P = log of its Perron value,
/// with left/right vectors normalised to ⟨left, right⟩ = 1.
#[derive(Debug, Clone)]
pub struct PressurePoint {
    pub s: f64,
    pub t: f64,
    pub pressure: f64,
    pub lambda: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub fn pressure(m: &TransferMatrix, tol: f64) -> Result<PressurePoint> {
    pressure_of_matrix(&m.matrix, m.s, m.t, tol)
}

pub fn pressure_of_matrix(m: &SparseMatrix, s: f64, t: f64, tol: f64) -> Result<PressurePoint> {
    let p = perron(m, tol, PRESSURE_MAX_ITER)?;
    let mut right = p.right;
    let mut left = p.left;
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    let r_norm: f64 = right.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    for v in right.iter_mut() {
        *v /= r_norm;
    }
    let scale = dot / r_norm;
    for v in left.iter_mut() {
        *v /= scale;
    }
    Ok(PressurePoint {
        s,
        t,
        pressure: p.value.ln(),
        lambda: p.value,
        right,
        left,
        residual: p.residual,
        iterations: p.iterations,
    })
}

/// Agreement of pressures across word-maximal components on a grid of real
/// (s, t) points.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PressureAgreement {
    /// (s, t, pressure per component, max pairwise discrepancy)
    pub points: Vec<AgreementPoint>,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AgreementPoint {
    pub s: f64,
    pub t: f64,
    pub pressures: Vec<f64>,
    pub discrepancy: f64,
}

/// Evaluates the pressure of −sΨ_d − tΦ over every word-maximal component
/// and reports the largest pairwise discrepancy per grid point. Trivially a
/// PASS for a single maximal component.
pub fn pressure_agreement(
    a: &AutomaticStructure,
    components: &[ComponentInfo],
    psi_d: &CylinderPotential,
    phi: &CylinderPotential,
    grid: &[(f64, f64)],
    tolerance: f64,
) -> Result<PressureAgreement> {
    let maximal: Vec<&ComponentInfo> = components.iter().filter(|c| c.is_word_maximal).collect();
    let blocks: Vec<BlockSft> = maximal
        .iter()
        .map(|c| refine_to_blocks(a, c, psi_d.depth()))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(grid.len());
    let mut max_disc = 0.0f64;
    for &(s, t) in grid {
        let mut pressures = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let m = build_transfer(block, psi_d, phi, s, t)?;
            pressures.push(pressure(&m, PRESSURE_TOL)?.pressure);
        }
        let hi = pressures.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lo = pressures.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let discrepancy = if pressures.len() > 1 { hi - lo } else { 0.0 };
        max_disc = max_disc.max(discrepancy);
        points.push(AgreementPoint { s, t, pressures, discrepancy });
    }
    Ok(PressureAgreement { points, max_discrepancy: max_disc, tolerance, passed: max_disc <= tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{scc_decomposition, AutomaticStructure};
    use crate::metrics::{busemann_potential, BusemannParams, MetricModel};

    fn f2_setup(k: usize) -> (AutomaticStructure, Vec<ComponentInfo>, CylinderPotential) {
        let a = AutomaticStructure::free_group(2).unwrap();
        let comps = scc_decomposition(&a);
        let d = MetricModel::word_metric(a.alphabet().clone());
        let params = BusemannParams {
            depth: k,
            horizon: 3 * k,
            alt_extensions: 1,
            allow_non_strongly_hyperbolic: true,
        };
        let psi = busemann_potential(&d, &a, params).unwrap();
        (a, comps, psi)
    }

    #[test]
    fn zero_potential_pressure_is_log_three() {
        let (a, comps, psi) = f2_setup(2);
        let comp = comps.iter().find(|c| c.is_word_maximal).unwrap();
        let block = refine_to_blocks(&a, comp, 2).unwrap();
        let zero = psi.sub(&psi).unwrap();
        let m = build_transfer(&block, &zero, &zero, 0.0, 0.0).unwrap();
        let p = pressure(&m, PRESSURE_TOL).unwrap();
        assert!((p.pressure - 3.0f64.ln()).abs() < 1e-10, "{}", p.pressure);
    }

    #[test]
    fn constant_shift_moves_pressure_exactly() {
        let (a, comps, psi) = f2_setup(2);
        let comp = comps.iter().find(|c| c.is_word_maximal).unwrap();
        let block = refine_to_blocks(&a, comp, 2).unwrap();
        let zero = psi.sub(&psi).unwrap();
        // Ψ ≡ 1: pressure of −sΨ is log 3 − s.
        let c = 0.37;
        let p0 = pressure(&build_transfer(&block, &psi, &zero, 0.0, 0.0).unwrap(), PRESSURE_TOL)
            .unwrap();
        let p1 = pressure(&build_transfer(&block, &psi, &zero, -c, 0.0).unwrap(), PRESSURE_TOL)
            .unwrap();
        assert!((p1.pressure - p0.pressure - c).abs() < 1e-10);
    }

    #[test]
    fn single_maximal_component_agreement_passes() {
        let (a, comps, psi) = f2_setup(2);
        let zero = psi.sub(&psi).unwrap();
        let grid = vec![(0.9, -0.1), (1.0, 0.0), (1.1, 0.1)];
        let report = pressure_agreement(&a, &comps, &psi, &zero, &grid, 1e-9).unwrap();
        assert!(report.passed);
        assert_eq!(report.max_discrepancy, 0.0);
    }

    #[test]
    fn duplicated_component_agreement_and_perturbation() {
        // Two disjoint copies of the F₂ letter component behind one `*`.
        let mut text = String::from("vertices 9\ninitial 0\n");
        let letters = ["a", "A", "b", "B"];
        for copy in 0..2 {
            for (i, l) in letters.iter().enumerate() {
                let v = 1 + 4 * copy + i;
                text.push_str(&format!("edge 0 {v} {l}\n"));
                for (j, m) in letters.iter().enumerate() {
                    if j != (i ^ 1) {
                        let w = 1 + 4 * copy + j;
                        text.push_str(&format!("edge {v} {w} {m}\n"));
                    }
                }
            }
        }
        let a = AutomaticStructure::parse_text(&text).unwrap();
        let comps = scc_decomposition(&a);
        assert_eq!(comps.iter().filter(|c| c.is_word_maximal).count(), 2);

        let d = MetricModel::word_metric(a.alphabet().clone());
        let params = BusemannParams {
            depth: 2,
            horizon: 6,
            alt_extensions: 1,
            allow_non_strongly_hyperbolic: true,
        };
        let psi = busemann_potential(&d, &a, params).unwrap();
        let zero = psi.sub(&psi).unwrap();
        let grid = vec![(1.0, 0.0), (1.1, 0.05)];
        let report = pressure_agreement(&a, &comps, &psi, &zero, &grid, 1e-9).unwrap();
        assert!(report.passed, "identical copies agree: {report:?}");

        // Perturb the potential on one copy only: agreement must fail.
        let bumped: std::collections::BTreeMap<_, _> = psi
            .iter()
            .map(|(k, v)| {
                let in_second_copy = k.iter().all(|&x| (6..10).contains(&x));
                (k.clone(), if in_second_copy { v + 0.1 } else { v })
            })
            .collect();
        let psi_bumped = CylinderPotential::new(2, bumped, 0.0).unwrap();
        let report = pressure_agreement(&a, &comps, &psi_bumped, &zero, &grid, 1e-9).unwrap();
        assert!(!report.passed);
        assert!(report.max_discrepancy > 0.05);
    }
}
