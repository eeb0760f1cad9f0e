use super::ball::BallEnumeration;
use crate::error::{Error, Result};

/// Least-squares exponential growth rate from ball counts.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GrowthEstimate {
    pub rate: f64,
    /// Two standard errors of the fitted slope (from fit residuals).
    pub band: f64,
    pub points_used: usize,
}

/// Fits log N(T) against T over the largest half of the grid.
pub fn growth_rate(counts: &[(f64, u64)]) -> Result<GrowthEstimate> {
    let usable: Vec<(f64, f64)> = counts
        .iter()
        .filter(|&&(_, n)| n > 0)
        .map(|&(t, n)| (t, (n as f64).ln()))
        .collect();
    if usable.len() < 5 {
        return Err(Error::DegenerateGrid(format!("{} usable points, need 5", usable.len())));
    }
    let half = &usable[usable.len() / 2..];
    let (slope, band) = fit_line(half)?;
    let span = (half.last().unwrap().0 - half[0].0) * slope;
    if span < 3.0 {
        return Err(Error::DegenerateGrid(format!(
            "grid spans {span:.2} units of T·v̂, need 3"
        )));
    }
    Ok(GrowthEstimate { rate: slope, band, points_used: half.len() })
}

fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::DegenerateGrid("fewer than two fit points".into()));
    }
    let mean_x: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateGrid("all grid points coincide".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 =
        points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let dof = (points.len().saturating_sub(2)).max(1) as f64;
    let stderr = (ss_res / dof / sxx).sqrt();
    Ok((slope, 2.0 * stderr))
}

/// The orbital-constant sequence e^{−v̂T} N(T) with a plateau detector:
/// relative oscillation of the last third of the grid. Oscillation is a
/// finding, not an error — arithmetic length spectra oscillate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrbitalReport {
    pub values: Vec<(f64, f64)>,
    pub oscillation: f64,
    pub plateau: bool,
}

pub fn orbital_constant(counts: &[(f64, u64)], v_hat: f64, plateau_tol: f64) -> OrbitalReport {
    let values: Vec<(f64, f64)> =
        counts.iter().map(|&(t, n)| (t, (-v_hat * t).exp() * n as f64)).collect();
    let tail = &values[values.len() - (values.len() / 3).max(2).min(values.len())..];
    let hi = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mean = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
    let oscillation = if mean > 0.0 { (hi - lo) / mean } else { f64::INFINITY };
    OrbitalReport { values, oscillation, plateau: oscillation <= plateau_tol }
}

/// Empirical Manhattan curve value: the growth rate in T of
/// Σ_{d(o,g)<T} e^{−s·d∗(o,g)}, fitted like `growth_rate`. Cross-checks the
/// spectral θ(s).
pub fn empirical_manhattan(ball: &BallEnumeration, t_grid: &[f64], s: f64) -> Result<f64> {
    // One pass over the sorted entries per grid point via prefix sums.
    let mut sums = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let upto = ball.entries.partition_point(|e| e.d < t);
        let sum: f64 = ball.entries[..upto].iter().map(|e| (-s * e.d_star).exp()).sum();
        sums.push((t, sum));
    }
    let usable: Vec<(f64, f64)> =
        sums.into_iter().filter(|&(_, v)| v > 0.0).map(|(t, v)| (t, v.ln())).collect();
    if usable.len() < 5 {
        return Err(Error::DegenerateGrid("fewer than five usable weighted sums".into()));
    }
    let half = &usable[usable.len() / 2..];
    Ok(fit_line(half)?.0)
}
