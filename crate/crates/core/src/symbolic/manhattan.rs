use super::blocks::BlockSft;
use super::equilibrium::equilibrium_measure;
use super::potential::CylinderPotential;
use super::pressure::{pressure, PressurePoint, PRESSURE_TOL};
use super::transfer::build_transfer;
use crate::error::{Error, Result};

/// Root-finder configuration for pressure-zero solves.
#[derive(Debug, Clone, Copy)]
pub struct ThetaConfig {
    /// |P| target at the root.
    pub pressure_tol: f64,
    /// Bisection narrows the bracket to this width before Newton polish.
    pub bisect_width: f64,
    pub newton_steps: usize,
    pub spectral_tol: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            pressure_tol: 1e-12,
            bisect_width: 1e-6,
            newton_steps: 8,
            spectral_tol: PRESSURE_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThetaPoint {
    pub s: f64,
    pub theta: f64,
    /// |P| at the returned root.
    pub pressure_residual: f64,
    pub point: PressurePoint,
}

/// θ(s): the unique t with P(−s·Ψ_{d∗} − t·Ψ_d) = 0, by bisection bracketed
/// through monotonicity in t, then Newton polish using ∂P/∂t = −∫Ψ_d dμ.
pub fn manhattan_theta(
    block: &BlockSft,
    psi_dstar: &CylinderPotential,
    psi_d: &CylinderPotential,
    s: f64,
    hint: Option<f64>,
    cfg: &ThetaConfig,
) -> Result<ThetaPoint> {
    if psi_d.min_value() <= 0.0 {
        return Err(Error::Bracketing(
            "Ψ_d is not positive on cylinders; pressure is not monotone in t".into(),
        ));
    }
    let eval = |t: f64| -> Result<PressurePoint> {
        let m = build_transfer(block, psi_dstar, psi_d, s, t)?;
        // Note the parameter roles: weight = exp(−s·Ψ_{d∗} − t·Ψ_d).
        pressure(&m, cfg.spectral_tol)
    };

    let mut lo = hint.unwrap_or(0.0);
    let mut hi = lo;
    let mut p_lo = eval(lo)?.pressure;
    let mut p_hi = p_lo;
    let mut step = 1.0;
    let mut tries = 0;
    while p_lo <= 0.0 {
        lo -= step;
        step *= 2.0;
        p_lo = eval(lo)?.pressure;
        tries += 1;
        if tries > 60 {
            return Err(Error::Bracketing(format!("no lower bracket at s = {s}")));
        }
    }
    step = 1.0;
    tries = 0;
    while p_hi >= 0.0 {
        hi += step;
        step *= 2.0;
        p_hi = eval(hi)?.pressure;
        tries += 1;
        if tries > 60 {
            return Err(Error::Bracketing(format!("no upper bracket at s = {s}")));
        }
    }

    while hi - lo > cfg.bisect_width {
        let mid = 0.5 * (lo + hi);
        let p_mid = eval(mid)?.pressure;
        if p_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut t = 0.5 * (lo + hi);
    let mut point = eval(t)?;
    for _ in 0..cfg.newton_steps {
        if point.pressure.abs() <= cfg.pressure_tol {
            break;
        }
        let m = build_transfer(block, psi_dstar, psi_d, s, t)?;
        let mu = equilibrium_measure(&m, &point)?;
        let dp_dt = -mu.edge_average(block, psi_d)?;
        let t_next = t - point.pressure / dp_dt;
        if !t_next.is_finite() {
            break;
        }
        t = t_next;
        point = eval(t)?;
    }
    Ok(ThetaPoint { s, theta: t, pressure_residual: point.pressure.abs(), point })
}

/// The exponential growth rate of a potential: the unique v with P(−vΨ) = 0.
pub fn growth_rate_spectral(
    block: &BlockSft,
    psi: &CylinderPotential,
    cfg: &ThetaConfig,
) -> Result<f64> {
    // With s = 0 the first potential is inert.
    Ok(manhattan_theta(block, psi, psi, 0.0, Some(1.0), cfg)?.theta)
}

/// A sampled Manhattan curve with derivative estimates at 0.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ManhattanCurve {
    pub samples: Vec<(f64, f64)>,
    pub tau: f64,
    pub sigma_sq: f64,
    pub max_pressure_residual: f64,
}

/// Samples θ over `s_values` (sorted ascending), chaining hints.
pub fn sample_curve(
    block: &BlockSft,
    psi_dstar: &CylinderPotential,
    psi_d: &CylinderPotential,
    s_values: &[f64],
    cfg: &ThetaConfig,
) -> Result<Vec<ThetaPoint>> {
    let mut out = Vec::with_capacity(s_values.len());
    let mut hint: Option<f64> = None;
    for &s in s_values {
        let p = manhattan_theta(block, psi_dstar, psi_d, s, hint, cfg)?;
        hint = Some(p.theta);
        out.push(p);
    }
    Ok(out)
}

/// Largest deviation of the sampled curve from the chord joining its
/// endpoints (zero for straight lines).
pub fn max_chord_deviation(samples: &[(f64, f64)]) -> f64 {
    if samples.len() < 3 {
        return 0.0;
    }
    let (s0, t0) = samples[0];
    let (s1, t1) = *samples.last().unwrap();
    let slope = (t1 - t0) / (s1 - s0);
    samples
        .iter()
        .map(|&(s, t)| (t - (t0 + slope * (s - s0))).abs())
        .fold(0.0, f64::max)
}

/// Minimum second divided difference over consecutive sample triples;
/// nonnegative (within noise) for convex curves.
pub fn min_second_divided_difference(samples: &[(f64, f64)]) -> f64 {
    let mut min = f64::INFINITY;
    for w in samples.windows(3) {
        let (s0, t0) = w[0];
        let (s1, t1) = w[1];
        let (s2, t2) = w[2];
        let d01 = (t1 - t0) / (s1 - s0);
        let d12 = (t2 - t1) / (s2 - s1);
        min = min.min(2.0 * (d12 - d01) / (s2 - s0));
    }
    min
}
