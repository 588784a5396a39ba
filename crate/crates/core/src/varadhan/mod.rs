//! Small-time upper bounds `t^{1/(2k-1)} log|p_t(x, y)| ≤ -l(x, y)` and the
//! set, exit and tilted estimates behind them.
//!
//! Every pass rule is an inequality with slack. Kernels of these
//! semigroups change sign, so only upper bounds are meaningful.

mod curve;
mod exit;

pub use curve::{localized_estimate, varadhan_curve, wf_set_estimate, Bump, LocalizedCurve, Region};
pub use exit::{
    chernoff_extremize, exit_bound_check, tilted_bound_check, Chernoff, ExitBoundFit, TiltedBound, EXIT_FIT_R2, TILT_SLACK,
};

use nalgebra::{Matrix3, Vector3};

use crate::error::{invalid, Result};
use crate::large_deviations::RateConfig;

/// Slack coefficient in `C t^{1/(2k-1)} log(1/t)`. The heat kernel of `ξ²`
/// has `t log p_t(0, y) = -y²/4 + (t/2) log(1/t) - (t/2) log 4π`, which
/// stays below `-y²/4 + C t log(1/t)` for all `t < 1` exactly when
/// `C ≥ 1/2`.
pub const C_SLACK: f64 = 0.5;
/// Relative allowance on the extrapolated limit.
pub const LIMIT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaradhanConfig {
    pub c_slack: f64,
    pub limit_tolerance: f64,
    pub rate: RateConfig,
}

impl Default for VaradhanConfig {
    fn default() -> Self {
        Self {
            c_slack: C_SLACK,
            limit_tolerance: LIMIT_TOLERANCE,
            rate: RateConfig::default(),
        }
    }
}

/// `t^{1/(2k-1)}`.
pub fn scaling_factor(k: u32, t: f64) -> f64 {
    t.powf(1.0 / (2 * k - 1) as f64)
}

/// `c t^{1/(2k-1)} log(1/t)`.
pub fn slack(k: u32, t: f64, c: f64) -> f64 {
    c * scaling_factor(k, t) * (1.0 / t).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    /// `t^{1/(2k-1)} log|·|`; `-∞` when the quantity vanishes exactly.
    pub v: f64,
    pub slack: f64,
    /// `target + slack`.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    pub k: u32,
    pub points: Vec<CurvePoint>,
    /// Richardson extrapolation of the last three points.
    pub limit: Option<f64>,
    /// `-l`, the predicted limit.
    pub target: f64,
    /// Every point below its bound and the limit at most
    /// `target + tolerance·|target|`.
    pub pass: bool,
}

impl ScalingCurve {
    fn assemble(k: u32, times: &[f64], values: &[f64], target: f64, slack_coeff: f64, tolerance: f64) -> Self {
        let points: Vec<CurvePoint> = times
            .iter()
            .zip(values)
            .map(|(&t, &v)| {
                let s = slack(k, t, slack_coeff);
                CurvePoint {
                    t,
                    v,
                    slack: s,
                    bound: target + s,
                    pass: v <= target + s,
                }
            })
            .collect();
        let limit = richardson_limit(k, times, values);
        let limit_ok = match limit {
            Some(l) => l <= target + tolerance * target.abs(),
            // a vanishing quantity sits below any finite bound
            None => values.last().is_some_and(|v| *v == f64::NEG_INFINITY),
        };
        Self {
            k,
            pass: limit_ok && points.iter().all(|p| p.pass),
            points,
            limit,
            target,
        }
    }
}

/// Fits `v = v_∞ + A τ log(1/t) + B τ` with `τ = t^{1/(2k-1)}` through the
/// last three points and returns `v_∞`.
pub fn richardson_limit(k: u32, times: &[f64], values: &[f64]) -> Option<f64> {
    let n = times.len();
    if n < 3 || values.len() != n {
        return None;
    }
    let (ts, vs) = (&times[n - 3..], &values[n - 3..]);
    if vs.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let rows: Vec<f64> = ts
        .iter()
        .flat_map(|&t| {
            let tau = scaling_factor(k, t);
            [1.0, tau * (1.0 / t).ln(), tau]
        })
        .collect();
    let m = Matrix3::from_row_slice(&rows);
    m.lu().solve(&Vector3::new(vs[0], vs[1], vs[2])).map(|x| x[0])
}

/// Times must decrease geometrically.
fn validate_times(times: &[f64]) -> Result<()> {
    if times.len() < 3 {
        return invalid("a scaling curve needs at least 3 times");
    }
    if times.iter().any(|t| !(*t > 0.0)) {
        return invalid("times must be positive");
    }
    let ratio = times[1] / times[0];
    if !(ratio < 1.0) {
        return invalid("times must decrease");
    }
    for w in times.windows(2) {
        if ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-6 {
            return invalid("times must form a geometric sequence");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_exact_on_the_model() {
        let times = [1e-1f64, 1e-2, 1e-3];
        let vs: Vec<f64> = times.iter().map(|&t| -0.25 + 0.5 * t * (1.0 / t).ln() - 1.3 * t).collect();
        assert!((richardson_limit(1, &times, &vs).unwrap() + 0.25).abs() < 1e-12);
    }

    #[test]
    fn time_validation() {
        assert!(validate_times(&[1.0, 0.1, 0.01]).is_ok());
        assert!(validate_times(&[1.0, 0.1, 0.02]).is_err());
        assert!(validate_times(&[0.01, 0.1, 1.0]).is_err());
    }
}
