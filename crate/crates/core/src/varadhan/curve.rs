//! Pointwise, set-level and localized scaling curves.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{scaling_factor, validate_times, ScalingCurve, VaradhanConfig};
use crate::error::{invalid, Result};
use crate::fourier::{index_of_frequency, GridFunction};
use crate::large_deviations::{rate_function, Hamiltonian, Lagrangian, RateConfig};
use crate::malliavin::exponent_fit;
use crate::numerics::GaussLegendre;
use crate::semigroup::{ensure_cutoff, kernel_value, with_cutoff_for, Multiplier, TRUNCATION_THRESHOLD};
use crate::spectral::Symbol;

fn hamiltonian_of(symbol: &Symbol) -> Result<Hamiltonian> {
    match symbol.operator() {
        Some(spec) => Hamiltonian::from_spec(spec, symbol.dim()),
        None => invalid("scaling curves need a symbol built from an operator"),
    }
}

/// `min_y l(x, y)` over sample endpoints.
fn min_rate(h: Hamiltonian, x: [f64; 2], ys: &[[f64; 2]], cfg: &RateConfig) -> Result<f64> {
    let p_max = 2.0 * TAU * (1.0 + cfg.winding_max as f64);
    let lagrangian = Lagrangian::from_hamiltonian(h, p_max)?;
    let values = ys
        .par_iter()
        .map(|&y| rate_function(x, y, &lagrangian, cfg).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

fn point(dim: usize, p: &[f64]) -> Result<[f64; 2]> {
    if p.len() != dim {
        return invalid(format!("points must have {dim} coordinates"));
    }
    Ok([p[0], if dim == 2 { p[1] } else { 0.0 }])
}

/// Distance on the torus `(ℝ/2πℤ)^d`.
fn torus_distance(dim: usize, a: [f64; 2], b: [f64; 2]) -> f64 {
    (0..dim)
        .map(|c| {
            let d = (a[c] - b[c]).rem_euclid(TAU);
            d.min(TAU - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// `v(t) = t^{1/(2k-1)} log|p_t(x, y)|` against `-l(x, y)`.
pub fn varadhan_curve(
    symbol: &Symbol,
    k: u32,
    x: &[f64],
    y: &[f64],
    times: &[f64],
    cfg: &VaradhanConfig,
) -> Result<ScalingCurve> {
    validate_times(times)?;
    let dim = symbol.dim();
    let (xp, yp) = (point(dim, x)?, point(dim, y)?);
    let symbol = with_cutoff_for(symbol, times, TRUNCATION_THRESHOLD)?;
    let values = times
        .par_iter()
        .map(|&t| Ok(scaling_factor(k, t) * kernel_value(&symbol, t, x, y)?.abs().ln()))
        .collect::<Result<Vec<_>>>()?;
    let l = if torus_distance(dim, xp, yp) == 0.0 {
        0.0
    } else {
        min_rate(hamiltonian_of(&symbol)?, xp, &[yp], &cfg.rate)?
    };
    Ok(ScalingCurve::assemble(k, times, &values, -l, cfg.c_slack, cfg.limit_tolerance))
}

/// Open target set `O` for the set-level estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `(center - radius, center + radius)` on the circle.
    Interval { center: f64, radius: f64 },
    /// Euclidean disk on the 2-torus.
    Disk { center: [f64; 2], radius: f64 },
}

const REGION_PANELS: usize = 64;
const REGION_RINGS: usize = 16;
const ENDPOINT_SAMPLES: usize = 40;

impl Region {
    /// Interval on the circle or disk on the 2-torus.
    pub fn ball(dim: usize, center: [f64; 2], radius: f64) -> Self {
        match dim {
            1 => Self::Interval {
                center: center[0],
                radius,
            },
            _ => Self::Disk { center, radius },
        }
    }

    fn dim(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            Self::Disk { .. } => 2,
        }
    }

    fn radius(&self) -> f64 {
        match *self {
            Self::Interval { radius, .. } | Self::Disk { radius, .. } => radius,
        }
    }

    fn center(&self) -> [f64; 2] {
        match *self {
            Self::Interval { center, .. } => [center, 0.0],
            Self::Disk { center, .. } => center,
        }
    }

    fn contains(&self, x: [f64; 2]) -> bool {
        torus_distance(self.dim(), self.center(), x) < self.radius()
    }

    /// Gauss–Legendre nodes and weights covering the region.
    fn quadrature(&self) -> Vec<([f64; 2], f64)> {
        let gl = GaussLegendre::new(8);
        let (c, r) = (self.center(), self.radius());
        match self {
            Self::Interval { .. } => {
                let w = 2.0 * r / REGION_PANELS as f64;
                (0..REGION_PANELS)
                    .flat_map(|p| {
                        let a = c[0] - r + p as f64 * w;
                        gl.mapped(a, a + w).map(|(y, wt)| ([y, 0.0], wt)).collect::<Vec<_>>()
                    })
                    .collect()
            }
            Self::Disk { .. } => {
                let dr = r / REGION_RINGS as f64;
                let dth = TAU / (2 * REGION_RINGS) as f64;
                let mut nodes = Vec::new();
                for i in 0..REGION_RINGS {
                    for (rho, wr) in gl.mapped(i as f64 * dr, (i + 1) as f64 * dr) {
                        for j in 0..2 * REGION_RINGS {
                            for (th, wt) in gl.mapped(j as f64 * dth, (j + 1) as f64 * dth) {
                                nodes.push(([c[0] + rho * th.cos(), c[1] + rho * th.sin()], wr * wt * rho));
                            }
                        }
                    }
                }
                nodes
            }
        }
    }

    /// Endpoints on the closure at which the rate function is sampled.
    fn endpoints(&self) -> Vec<[f64; 2]> {
        let (c, r) = (self.center(), self.radius());
        match self {
            Self::Interval { .. } => (0..=ENDPOINT_SAMPLES)
                .map(|j| [c[0] - r + 2.0 * r * j as f64 / ENDPOINT_SAMPLES as f64, 0.0])
                .collect(),
            Self::Disk { .. } => {
                let mut pts = vec![c];
                for ring in 1..=4 {
                    let rho = r * ring as f64 / 4.0;
                    for j in 0..ENDPOINT_SAMPLES {
                        let th = TAU * j as f64 / ENDPOINT_SAMPLES as f64;
                        pts.push([c[0] + rho * th.cos(), c[1] + rho * th.sin()]);
                    }
                }
                pts
            }
        }
    }
}

/// `v(t) = t^{1/(2k-1)} log ∫_O |p_t(x, y)| dy` against `-inf_{y ∈ O} l(x, y)`.
pub fn wf_set_estimate(
    symbol: &Symbol,
    k: u32,
    x: &[f64],
    region: Region,
    times: &[f64],
    cfg: &VaradhanConfig,
) -> Result<ScalingCurve> {
    validate_times(times)?;
    let dim = symbol.dim();
    if region.dim() != dim {
        return invalid("region and symbol dimensions differ");
    }
    if !(region.radius() > 0.0 && region.radius() < PI) {
        return invalid("region radius must lie in (0, π)");
    }
    let xp = point(dim, x)?;
    let symbol = with_cutoff_for(symbol, times, TRUNCATION_THRESHOLD)?;
    let nodes = region.quadrature();
    let values = times
        .par_iter()
        .map(|&t| {
            ensure_cutoff(&symbol, t, TRUNCATION_THRESHOLD)?;
            let mult = Multiplier::semigroup(&symbol, t);
            let mass: f64 = nodes
                .iter()
                .map(|(y, w)| {
                    let z: Vec<f64> = (0..dim).map(|c| y[c] - xp[c]).collect();
                    w * mult.kernel_value(&z).re.abs()
                })
                .sum();
            Ok(scaling_factor(k, t) * mass.ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let l = if region.contains(xp) {
        0.0
    } else {
        min_rate(hamiltonian_of(&symbol)?, xp, &region.endpoints(), &cfg.rate)?
    };
    Ok(ScalingCurve::assemble(k, times, &values, -l, cfg.c_slack, cfg.limit_tolerance))
}

/// Smooth cutoff equal to `amplitude` on the ball of radius `radius/2`
/// around `center` and to zero outside radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Self {
            center,
            radius,
            amplitude: 1.0,
        }
    }

    pub fn eval(&self, dim: usize, z: [f64; 2]) -> f64 {
        fn psi(u: f64) -> f64 {
            if u > 0.0 {
                (-1.0 / u).exp()
            } else {
                0.0
            }
        }
        let r = torus_distance(dim, self.center, z);
        let inner = psi(self.radius - r);
        let outer = psi(r - 0.5 * self.radius);
        if inner == 0.0 {
            return 0.0;
        }
        self.amplitude * inner / (inner + outer)
    }
}

/// Scaling curve of `∂^β P_t χ (x)` for one derivative multi-index `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedCurve {
    pub beta: [u32; 2],
    /// Fitted `r_β` with `‖∂^β P_t‖ ~ t^{-r_β}`.
    pub r: f64,
    pub curve: ScalingCurve,
}

const BUMP_RESOLUTION_1D: usize = 4096;
const BUMP_RESOLUTION_2D: usize = 256;

/// `t^{1/(2k-1)} log|∂^β P_t χ(x)|` for each `β` against
/// `-l(x, supp χ) + δ` with `δ = 0.05 l`, allowing the polynomial factor
/// `t^{-r_β}` through the slack `(r_β + C_slack) t^{1/(2k-1)} log(1/t)`.
/// `r_β` is fitted for `(L^{1/2k})^{|β|}` over `t ∈ [10^{-3}, 10^{-2}]`.
/// A bump with zero amplitude yields `-∞` at every time.
pub fn localized_estimate(
    symbol: &Symbol,
    k: u32,
    x: &[f64],
    bump: Bump,
    betas: &[[u32; 2]],
    times: &[f64],
    cfg: &VaradhanConfig,
) -> Result<Vec<LocalizedCurve>> {
    validate_times(times)?;
    let dim = symbol.dim();
    let xp = point(dim, x)?;
    if torus_distance(dim, xp, bump.center) <= bump.radius {
        return invalid("the bump support must exclude x");
    }
    let symbol = with_cutoff_for(symbol, times, TRUNCATION_THRESHOLD)?;
    let m = if dim == 1 { BUMP_RESOLUTION_1D } else { BUMP_RESOLUTION_2D };
    let chi = GridFunction::from_fn(dim, m, |z| bump.eval(dim, [z[0], if dim == 2 { z[1] } else { 0.0 }]))?;
    let spectrum = chi.spectrum();
    let half = (m / 2) as i64;

    let support = Region::ball(dim, bump.center, bump.radius);
    let l = min_rate(hamiltonian_of(&symbol)?, xp, &support.endpoints(), &cfg.rate)?;
    let delta = 0.05 * l;
    let fit_times: Vec<f64> = (0..6).map(|j| 1e-3 * 10f64.powf(j as f64 / 5.0)).collect();

    let i = Complex64::new(0.0, 1.0);
    betas
        .iter()
        .map(|&beta| {
            let order = beta[0] + beta[1];
            let r = if order == 0 {
                0.0
            } else {
                exponent_fit(&symbol, 1.0 / (2 * k) as f64, order, &fit_times)?.r
            };
            let values = times
                .par_iter()
                .map(|&t| {
                    ensure_cutoff(&symbol, t, TRUNCATION_THRESHOLD)?;
                    let mut sum = Complex64::new(0.0, 0.0);
                    for (xi, a) in symbol.grid().points().zip(symbol.values()) {
                        if xi.iter().take(dim).any(|v| v.abs() >= half) {
                            continue;
                        }
                        let idx = match dim {
                            1 => index_of_frequency(xi[0], m),
                            _ => index_of_frequency(xi[0], m) * m + index_of_frequency(xi[1], m),
                        };
                        let phase = xi[0] as f64 * xp[0] + xi[1] as f64 * xp[1];
                        let deriv = (i * xi[0] as f64).powu(beta[0]) * (i * xi[1] as f64).powu(beta[1]);
                        sum += spectrum[idx] * deriv * (-a * t).exp() * Complex64::from_polar(1.0, phase);
                    }
                    Ok(scaling_factor(k, t) * sum.re.abs().ln())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LocalizedCurve {
                beta,
                r,
                curve: ScalingCurve::assemble(
                    k,
                    times,
                    &values,
                    -l + delta,
                    r + cfg.c_slack,
                    cfg.limit_tolerance,
                ),
            })
        })
        .collect()
}
