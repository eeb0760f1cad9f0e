use super::blocks::BlockSft;
use super::equilibrium::{equilibrium_measure, VarianceEstimate};
use super::manhattan::{growth_rate_spectral, manhattan_theta, ThetaConfig};
use super::potential::CylinderPotential;
use super::pressure::pressure;
use super::transfer::build_transfer;
use crate::error::{Error, Result};

/// Scales applied to bring a pair to the standing normalisation
/// (growth rate of d equal to 1, mean distortion equal to 1), kept so every
/// reported constant can be mapped back to user units.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NormalizationRecord {
    /// d′ = scale_d · d
    pub scale_d: f64,
    /// d∗′ = scale_dstar · d∗
    pub scale_dstar: f64,
    /// Growth rate of the raw d (pressure route).
    pub v_d: f64,
    /// Growth rate of the raw d∗ (pressure route).
    pub v_dstar: f64,
    /// Mean distortion of the raw pair.
    pub tau_raw: f64,
}

impl NormalizationRecord {
    pub fn identity() -> Self {
        NormalizationRecord { scale_d: 1.0, scale_dstar: 1.0, v_d: 1.0, v_dstar: 1.0, tau_raw: 1.0 }
    }

    /// Maps a mean distortion in normalised units back to user units.
    pub fn tau_to_user(&self, tau_norm: f64) -> f64 {
        tau_norm * self.scale_d / self.scale_dstar
    }

    /// Maps a CLT variance in normalised units back to user units.
    pub fn sigma_sq_to_user(&self, sigma_sq_norm: f64) -> f64 {
        sigma_sq_norm * self.scale_d / (self.scale_dstar * self.scale_dstar)
    }
}

/// Rescales (Ψ_d, Ψ_{d∗}) so that v_{d′} = 1 and τ(d∗′/d′) = 1.
pub fn normalize_pair(
    block: &BlockSft,
    psi_d: &CylinderPotential,
    psi_dstar: &CylinderPotential,
    cfg: &ThetaConfig,
) -> Result<(CylinderPotential, CylinderPotential, NormalizationRecord)> {
    let v_d = growth_rate_spectral(block, psi_d, cfg)?;
    let v_dstar = growth_rate_spectral(block, psi_dstar, cfg)?;
    if !(v_d > 0.0) || !(v_dstar > 0.0) {
        return Err(Error::Degenerate(format!("nonpositive growth rates {v_d}, {v_dstar}")));
    }
    let psi_d_norm = psi_d.scale(v_d);

    // Provisional mean distortion of the raw pair at the critical point of
    // the normalised d: τ = ∫Ψ_{d∗} dμ / ∫Ψ_d dμ.
    let zero = psi_d_norm.sub(&psi_d_norm)?;
    let s_crit = growth_rate_spectral(block, &psi_d_norm, cfg)?;
    let m = build_transfer(block, &psi_d_norm, &zero, s_crit, 0.0)?;
    let point = pressure(&m, cfg.spectral_tol)?;
    let mu = equilibrium_measure(&m, &point)?;
    let int_d = mu.edge_average(block, psi_d)?;
    let int_dstar = mu.edge_average(block, psi_dstar)?;
    if int_d <= 0.0 || int_dstar <= 0.0 {
        return Err(Error::Degenerate("nonpositive potential averages".into()));
    }
    let tau_raw = int_dstar / int_d;
    let scale_dstar = v_d / tau_raw;
    let psi_dstar_norm = psi_dstar.scale(scale_dstar);
    let record =
        NormalizationRecord { scale_d: v_d, scale_dstar, v_d, v_dstar, tau_raw };
    Ok((psi_d_norm, psi_dstar_norm, record))
}

#[derive(Debug, Clone, Copy)]
pub struct DistortionConfig {
    /// Central finite-difference steps for the curve route, largest first;
    /// smaller steps are forbidden (pressure noise floor).
    pub fd_steps: [f64; 3],
    pub variance_tail_tol: f64,
    pub variance_max_lag: usize,
    /// Cross-route agreement bound: max(abs_tol, rel_tol·scale).
    pub route_abs_tol: f64,
    pub route_rel_tol: f64,
    pub theta: ThetaConfig,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        DistortionConfig {
            fd_steps: [1e-2, 5e-3, 2.5e-3],
            variance_tail_tol: 1e-12,
            variance_max_lag: 20_000,
            route_abs_tol: 1e-4,
            route_rel_tol: 0.02,
            theta: ThetaConfig::default(),
        }
    }
}

/// Spectral derivatives at the critical point, λ(s, t) = e^{P(−sΨ_d − tΦ)}.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DerivativeReport {
    pub s_critical: f64,
    pub lambda_s: f64,
    pub lambda_t: f64,
    pub lambda_tt: f64,
    pub int_psi_d: f64,
    pub int_psi_dstar: f64,
    pub int_phi: f64,
    pub variance_mean: f64,
    pub variance: f64,
    pub variance_tail_estimate: f64,
    pub variance_lags: usize,
    /// Second finite difference of P in t, cross-checking the Green–Kubo sum.
    pub fd_p_tt: f64,
}

/// Mean distortion and CLT variance by both routes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DistortionReport {
    /// Route A (spectral), normalised units.
    pub tau_spectral: f64,
    pub sigma_sq_spectral: f64,
    /// Route B (Manhattan-curve finite differences), normalised units.
    pub tau_curve: f64,
    pub sigma_sq_curve: f64,
    /// User-unit values.
    pub tau_user_spectral: f64,
    pub sigma_sq_user_spectral: f64,
    pub tau_user_curve: f64,
    pub sigma_sq_user_curve: f64,
    pub route_discrepancy: f64,
    pub discrepancy_bound: f64,
    pub discrepancy_exceeded: bool,
    pub derivative: DerivativeReport,
    pub record: NormalizationRecord,
}

/// Computes τ and σ² for a normalised pair by the spectral route (Perron
/// integrals and the Green–Kubo asymptotic variance) and the curve route
/// (Richardson-extrapolated finite differences of θ at 0).
pub fn distortion_constants(
    block: &BlockSft,
    psi_d_norm: &CylinderPotential,
    psi_dstar_norm: &CylinderPotential,
    record: NormalizationRecord,
    cfg: &DistortionConfig,
) -> Result<DistortionReport> {
    let phi = psi_dstar_norm.sub(psi_d_norm)?;

    // Route A: derivatives at the critical point.
    let s_crit = growth_rate_spectral(block, psi_d_norm, &cfg.theta)?;
    let m = build_transfer(block, psi_d_norm, &phi, s_crit, 0.0)?;
    let point = pressure(&m, cfg.theta.spectral_tol)?;
    let mu = equilibrium_measure(&m, &point)?;
    let int_psi_d = mu.edge_average(block, psi_d_norm)?;
    let int_psi_dstar = mu.edge_average(block, psi_dstar_norm)?;
    let int_phi = mu.edge_average(block, &phi)?;
    let var: VarianceEstimate =
        mu.asymptotic_variance(block, &phi, cfg.variance_tail_tol, cfg.variance_max_lag)?;

    let lambda = point.lambda;
    let p_t = -int_phi;
    let p_tt = var.variance;
    let lambda_s = -lambda * int_psi_d;
    let lambda_t = -lambda * int_phi;
    let lambda_tt = lambda * (p_tt + p_t * p_t);
    let tau_spectral = int_psi_dstar / int_psi_d;
    let sigma_sq_spectral = -lambda_tt / lambda_s;

    // Internal cross-check: second finite difference of P in t.
    let h = cfg.fd_steps[0];
    let p_at = |t: f64| -> Result<f64> {
        let m = build_transfer(block, psi_d_norm, &phi, s_crit, t)?;
        Ok(pressure(&m, cfg.theta.spectral_tol)?.pressure)
    };
    let fd_p_tt = {
        let d2 = |hh: f64| -> Result<f64> {
            Ok((p_at(hh)? - 2.0 * p_at(0.0)? + p_at(-hh)?) / (hh * hh))
        };
        let a = d2(h)?;
        let b = d2(h / 2.0)?;
        (4.0 * b - a) / 3.0
    };

    let derivative = DerivativeReport {
        s_critical: s_crit,
        lambda_s,
        lambda_t,
        lambda_tt,
        int_psi_d,
        int_psi_dstar,
        int_phi,
        variance_mean: var.mean,
        variance: var.variance,
        variance_tail_estimate: var.tail_estimate,
        variance_lags: var.lags,
        fd_p_tt,
    };

    // Route B: θ(s) near 0 with Richardson extrapolation.
    let theta_at = |s: f64, hint: Option<f64>| -> Result<f64> {
        Ok(manhattan_theta(block, psi_dstar_norm, psi_d_norm, s, hint, &cfg.theta)?.theta)
    };
    let t0 = theta_at(0.0, Some(1.0))?;
    let [h1, h2, h3] = cfg.fd_steps;
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for (i, h) in [h1, h2, h3].into_iter().enumerate() {
        let tp = theta_at(h, Some(t0))?;
        let tm = theta_at(-h, Some(t0))?;
        d1[i] = (tp - tm) / (2.0 * h);
        d2[i] = (tp - 2.0 * t0 + tm) / (h * h);
    }
    let richardson = |v: [f64; 3]| -> f64 {
        let r_a = (4.0 * v[1] - v[0]) / 3.0;
        let r_b = (4.0 * v[2] - v[1]) / 3.0;
        (16.0 * r_b - r_a) / 15.0
    };
    let tau_curve = -richardson(d1);
    let sigma_sq_curve = richardson(d2);

    let route_discrepancy = (sigma_sq_spectral - sigma_sq_curve).abs();
    let scale = sigma_sq_spectral.abs().max(sigma_sq_curve.abs());
    let discrepancy_bound = cfg.route_abs_tol.max(cfg.route_rel_tol * scale);

    Ok(DistortionReport {
        tau_spectral,
        sigma_sq_spectral,
        tau_curve,
        sigma_sq_curve,
        tau_user_spectral: record.tau_to_user(tau_spectral),
        sigma_sq_user_spectral: record.sigma_sq_to_user(sigma_sq_spectral),
        tau_user_curve: record.tau_to_user(tau_curve),
        sigma_sq_user_curve: record.sigma_sq_to_user(sigma_sq_curve),
        route_discrepancy,
        discrepancy_bound,
        discrepancy_exceeded: route_discrepancy > discrepancy_bound,
        derivative,
        record,
    })
}
