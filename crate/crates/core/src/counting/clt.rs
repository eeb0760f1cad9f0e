use statrs::distribution::{ContinuousCDF, Normal};

use super::ball::BallEnumeration;
use crate::error::{Error, Result};
use crate::symbolic::NormalizationRecord;

/// Number of points of the fixed CDF evaluation grid.
pub const CDF_GRID_POINTS: usize = 201;

/// Per-threshold statistics of the counting distributions. All statistic
/// values are in normalised units (growth rate 1, mean distortion 1); raw
/// moments are reported (the limit targets are the raw normal moments).
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentReport {
    pub t: f64,
    pub n: u64,
    /// (1/N(T)) Σ d∗/T — the mean-distortion estimator.
    pub tau_hat: f64,
    /// Σ d∗ / Σ d — the ratio estimator (smaller finite-size bias).
    pub tau_hat_ratio: f64,
    /// Raw moments p = 1..4 of (d∗ − τT)/√T.
    pub moments_tau: [f64; 4],
    /// Raw moments p = 1..4 of (d∗ − d)/√T.
    pub moments_diff: [f64; 4],
    /// Σ (d∗ − τT)²/T computed directly (equals n·moments_tau[1] up to the
    /// final division; kept for the centering-algebra check).
    pub thm_var_sum: f64,
    /// KS distance of (d∗ − τT)/√T to N(0, σ²) on the fixed grid.
    pub ks_tau: f64,
    /// KS distance of (d∗ − d)/√T to N(0, σ²) on the fixed grid.
    pub ks_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    TauT,
    Diff,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CdfRow {
    pub t: f64,
    pub empirical: f64,
    pub normal_reference: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CltReport {
    pub tau_ref: f64,
    pub sigma_sq_ref: f64,
    pub per_t: Vec<MomentReport>,
    /// Empirical CDF at the largest threshold, on the fixed grid.
    pub cdf: Vec<CdfRow>,
    pub cdf_centering: Centering,
    pub record: NormalizationRecord,
}

/// Statistics of the counting CLT over a T-grid (user units). The ball must
/// have been enumerated at a threshold covering the grid; d and d∗ columns
/// are rescaled to normalised units through the record, and τ, σ² are the
/// normalised-unit references from the symbolic module.
pub fn clt_report(
    ball: &BallEnumeration,
    record: &NormalizationRecord,
    tau_norm: f64,
    sigma_sq_norm: f64,
    t_grid_user: &[f64],
    cdf_centering: Centering,
) -> Result<CltReport> {
    if t_grid_user.is_empty() {
        return Err(Error::DegenerateGrid("empty T grid".into()));
    }
    let sigma = sigma_sq_norm.max(0.0).sqrt();
    let normal = if sigma > 1e-9 { Some(Normal::new(0.0, sigma).expect("sigma > 0")) } else { None };
    let grid = cdf_grid(sigma);

    let mut per_t = Vec::with_capacity(t_grid_user.len());
    let mut final_stats_tau: Vec<f64> = Vec::new();
    let mut final_stats_diff: Vec<f64> = Vec::new();
    for (gi, &t_user) in t_grid_user.iter().enumerate() {
        let t = t_user * record.scale_d;
        let upto = ball.entries.partition_point(|e| e.d < t_user);
        let n = upto as u64;
        if n == 0 {
            return Err(Error::DegenerateGrid(format!("empty ball at T = {t_user}")));
        }
        let sqrt_t = t.sqrt();
        let mut stats_tau = Vec::with_capacity(upto);
        let mut stats_diff = Vec::with_capacity(upto);
        let mut sum_d = 0.0f64;
        let mut sum_dstar = 0.0f64;
        let mut thm_var_sum = 0.0f64;
        for e in &ball.entries[..upto] {
            let dn = e.d * record.scale_d;
            let dsn = e.d_star * record.scale_dstar;
            sum_d += dn;
            sum_dstar += dsn;
            let x = (dsn - tau_norm * t) / sqrt_t;
            let y = (dsn - dn) / sqrt_t;
            thm_var_sum += (dsn - tau_norm * t) * (dsn - tau_norm * t) / t;
            stats_tau.push(x);
            stats_diff.push(y);
        }
        let nf = n as f64;
        let moments_tau = raw_moments(&stats_tau);
        let moments_diff = raw_moments(&stats_diff);
        // Upstream consistency guard: a degenerate reference with visible
        // spread signals a broken σ² pipeline.
        if sigma_sq_norm <= 0.0 && moments_diff[1] > 1e-9 {
            return Err(Error::Degenerate(format!(
                "σ²_ref = {sigma_sq_norm} but sample second moment {}",
                moments_diff[1]
            )));
        }
        stats_tau.sort_by(f64::total_cmp);
        stats_diff.sort_by(f64::total_cmp);
        let ks_tau = ks_distance(&stats_tau, &grid, normal.as_ref());
        let ks_diff = ks_distance(&stats_diff, &grid, normal.as_ref());
        per_t.push(MomentReport {
            t: t_user,
            n,
            tau_hat: sum_dstar / record.scale_dstar / nf / t_user,
            tau_hat_ratio: (sum_dstar / record.scale_dstar) / (sum_d / record.scale_d),
            moments_tau,
            moments_diff,
            thm_var_sum,
            ks_tau,
            ks_diff,
        });
        if gi + 1 == t_grid_user.len() {
            final_stats_tau = stats_tau;
            final_stats_diff = stats_diff;
        }
    }

    let final_stats = match cdf_centering {
        Centering::TauT => &final_stats_tau,
        Centering::Diff => &final_stats_diff,
    };
    let nf = final_stats.len() as f64;
    let cdf = grid
        .iter()
        .map(|&x| CdfRow {
            t: x,
            empirical: final_stats.partition_point(|&v| v <= x) as f64 / nf,
            normal_reference: normal_cdf(normal.as_ref(), x),
        })
        .collect();

    Ok(CltReport {
        tau_ref: tau_norm,
        sigma_sq_ref: sigma_sq_norm,
        per_t,
        cdf,
        cdf_centering,
        record: *record,
    })
}

fn raw_moments(xs: &[f64]) -> [f64; 4] {
    let n = xs.len() as f64;
    let mut m = [0.0f64; 4];
    for &x in xs {
        let x2 = x * x;
        m[0] += x;
        m[1] += x2;
        m[2] += x2 * x;
        m[3] += x2 * x2;
    }
    for v in m.iter_mut() {
        *v /= n;
    }
    m
}

/// Fixed symmetric grid: 201 points across ±5·max(σ, 0.2).
fn cdf_grid(sigma: f64) -> Vec<f64> {
    let half = 5.0 * sigma.max(0.2);
    (0..CDF_GRID_POINTS)
        .map(|i| -half + 2.0 * half * i as f64 / (CDF_GRID_POINTS - 1) as f64)
        .collect()
}

fn normal_cdf(normal: Option<&Normal>, x: f64) -> f64 {
    match normal {
        Some(n) => n.cdf(x),
        // Degenerate reference: point mass at 0.
        None => {
            if x >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// sup over the fixed grid of |F̂ − N_σ|; `sorted` must be ascending.
fn ks_distance(sorted: &[f64], grid: &[f64], normal: Option<&Normal>) -> f64 {
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&x| {
            let emp = sorted.partition_point(|&v| v <= x) as f64 / n;
            (emp - normal_cdf(normal, x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Expected raw moments of N(0, σ²): (0, σ², 0, 3σ⁴) — σᵖ(p−1)!! for even p.
pub fn normal_moment_targets(sigma_sq: f64) -> [f64; 4] {
    [0.0, sigma_sq, 0.0, 3.0 * sigma_sq * sigma_sq]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::ball::{enumerate_ball, BallMode, BallParams};
    use crate::group::Alphabet;
    use crate::metrics::MetricModel;

    fn identical_pair_report() -> CltReport {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab.clone());
        let ds = MetricModel::word_metric(ab);
        let ball = enumerate_ball(&d, &ds, 8.5, BallMode::Exact, BallParams::default()).unwrap();
        let record = NormalizationRecord::identity();
        clt_report(&ball, &record, 1.0, 0.0, &[4.5, 6.5, 8.5], Centering::Diff).unwrap()
    }

    #[test]
    fn identical_metrics_are_degenerate_at_zero() {
        let report = identical_pair_report();
        for m in &report.per_t {
            // All mass at 0 under the (d∗ − d) centering.
            for p in m.moments_diff {
                assert_eq!(p, 0.0);
            }
            // Against the point mass the empirical step matches exactly.
            assert_eq!(m.ks_diff, 0.0);
        }
    }

    #[test]
    fn thm_var_sum_matches_second_moment() {
        let report = identical_pair_report();
        for m in &report.per_t {
            let rebuilt = m.moments_tau[1] * m.n as f64;
            assert!(
                (m.thm_var_sum - rebuilt).abs() <= 1e-12 * m.thm_var_sum.abs().max(1.0),
                "{} vs {rebuilt}",
                m.thm_var_sum
            );
        }
    }

    #[test]
    fn doubled_metric_statistic_sits_left_of_zero() {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab.clone());
        let ds = MetricModel::word_metric(ab).scale_metric(2.0).unwrap();
        let ball = enumerate_ball(&d, &ds, 8.5, BallMode::Exact, BallParams::default()).unwrap();
        // Raw pair: τ(d∗/d) = 2, degenerate. In raw units with τT centering
        // the statistic is 2(d − T)/√T ≤ 0.
        let record = NormalizationRecord::identity();
        let report =
            clt_report(&ball, &record, 2.0, 0.0, &[8.5], Centering::TauT).unwrap();
        let m = &report.per_t[0];
        assert!(m.moments_tau[0] < 0.0);
        // Consistent with σ² = 0: the spread shrinks with T (bounded here).
        assert!(m.moments_tau[1] < 9.0);
    }

    #[test]
    fn sigma_zero_with_spread_is_an_error() {
        let ab = Alphabet::free(2).unwrap();
        let d = MetricModel::word_metric(ab.clone());
        let ds = MetricModel::word_metric(ab).scale_metric(1.5).unwrap();
        let ball = enumerate_ball(&d, &ds, 7.5, BallMode::Exact, BallParams::default()).unwrap();
        let record = NormalizationRecord::identity();
        // (d∗ − d)/√T has genuine spread but σ²_ref = 0.
        assert!(matches!(
            clt_report(&ball, &record, 1.5, 0.0, &[7.5], Centering::Diff),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn moment_targets() {
        let t = normal_moment_targets(0.25);
        assert_eq!(t, [0.0, 0.25, 0.0, 3.0 * 0.0625]);
    }
}
