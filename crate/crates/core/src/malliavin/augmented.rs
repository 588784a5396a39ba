//! Augmented semigroups on `T^d × ℝ^n` with fractional coupling
//! `α_s^j L^α ∂/∂u_j`, and the integration-by-parts identity they encode.
//!
//! Auxiliary Fourier modes are `e^{-iηu}`. All pieces of the generator are
//! Fourier multipliers and commute, so the time-ordered exponential is
//!
//! ```text
//! exp[-t a(ξ) - i a(ξ)^α Σ_j c_j(t) η_j - t Σ_j η_j^{2k}],   c_j(t) = ∫_0^t α_s^j ds.
//! ```
//!
//! The first `u_j`-moment of the auxiliary kernel is `i ∂_{η_j}` of the
//! multiplier at `η = 0`, i.e. the drift `c_j(t) a(ξ)^α`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::aux_kernel::AuxKernel;
use crate::error::{invalid, Error, Result};
use crate::fourier::{frequencies_of_flat, GridFunction};
use crate::numerics::adaptive_real;
use crate::spectral::{fractional_power, FrequencyGrid, Symbol};

/// Smooth coupling weight `s ↦ α_s`.
#[derive(Clone)]
pub enum CascadeWeight {
    Constant(f64),
    /// `s^p` with `p ≥ 0`.
    Power(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for CascadeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Power(p) => write!(f, "Power({p})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl PartialEq for CascadeWeight {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Constant(a), Self::Constant(b)) | (Self::Power(a), Self::Power(b)) => a == b,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl CascadeWeight {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Power(p) => {
                if *p == 0.0 {
                    1.0
                } else {
                    s.powf(*p)
                }
            }
            Self::Custom(f) => f(s),
        }
    }

    /// `∫_0^t α_s ds`, in closed form where available.
    pub fn integral(&self, t: f64) -> Result<f64> {
        match self {
            Self::Constant(c) => Ok(c * t),
            Self::Power(p) => Ok(t.powf(p + 1.0) / (p + 1.0)),
            Self::Custom(f) => adaptive_real(|s| f(s), 0.0, t, 1e-15, 1e-13),
        }
    }
}

/// `L + Σ_j α_s^j L^α ∂/∂u_j + Σ_j ∂^{2k}/∂u_j^{2k}` over a base symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedOperator {
    base: Symbol,
    alpha_frac: f64,
    r: f64,
    aux_k: u32,
    weights: Vec<CascadeWeight>,
}

impl AugmentedOperator {
    /// `n` auxiliary variables with the default weights `α_s^j = s^r`.
    pub fn new(base: Symbol, n: usize, alpha_frac: f64, r: f64, aux_k: u32) -> Result<Self> {
        Self::with_weights(base, alpha_frac, r, aux_k, vec![CascadeWeight::Power(r); n])
    }

    pub fn with_weights(
        base: Symbol,
        alpha_frac: f64,
        r: f64,
        aux_k: u32,
        weights: Vec<CascadeWeight>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return invalid("augmented operator needs at least one auxiliary variable");
        }
        if !(alpha_frac > 0.0 && alpha_frac < 1.0) {
            return invalid(format!("alpha_frac must lie in (0, 1), got {alpha_frac}"));
        }
        if !(r >= 0.0) {
            return invalid(format!("time exponent r must be nonnegative, got {r}"));
        }
        if aux_k == 0 {
            return invalid("auxiliary order parameter k must be at least 1");
        }
        if !base.nonnegative_real_part() {
            return invalid("base symbol must have nonnegative real part");
        }
        Ok(Self {
            base,
            alpha_frac,
            r,
            aux_k,
            weights,
        })
    }

    pub fn base(&self) -> &Symbol {
        &self.base
    }

    pub fn n_aux(&self) -> usize {
        self.weights.len()
    }

    pub fn alpha_frac(&self) -> f64 {
        self.alpha_frac
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn aux_k(&self) -> u32 {
        self.aux_k
    }

    pub fn weights(&self) -> &[CascadeWeight] {
        &self.weights
    }

    /// The same operator with the last auxiliary variable removed.
    pub fn truncated(&self) -> Option<Self> {
        (self.weights.len() > 1).then(|| Self {
            weights: self.weights[..self.weights.len() - 1].to_vec(),
            ..self.clone()
        })
    }

    /// Couplings `c_j(t) = ∫_0^t α_s^j ds`.
    pub fn couplings(&self, t: f64) -> Result<Vec<f64>> {
        self.weights.iter().map(|w| w.integral(t)).collect()
    }

    fn symbol_at(&self, xi: [f64; 2]) -> Result<Complex64> {
        let on_lattice = xi.iter().all(|v| v.fract() == 0.0);
        match on_lattice.then(|| self.base.at([xi[0] as i64, xi[1] as i64])).flatten() {
            Some(v) => Ok(v),
            None => self.base.eval_real(xi),
        }
    }
}

/// `exp[-t a(ξ) - i a(ξ)^α Σ_j c_j(t) η_j - t Σ_j η_j^{2k}]`.
pub fn augmented_multiplier(op: &AugmentedOperator, t: f64, xi: [f64; 2], eta: &[f64]) -> Result<Complex64> {
    if !(t > 0.0) {
        return invalid("augmented multiplier needs t > 0");
    }
    if eta.len() != op.n_aux() {
        return invalid(format!("expected {} auxiliary frequencies", op.n_aux()));
    }
    let a = op.symbol_at(xi)?;
    let a_frac = fractional_power(a, op.alpha_frac)?;
    let c = op.couplings(t)?;
    let i = Complex64::new(0.0, 1.0);
    let drift: f64 = c.iter().zip(eta).map(|(c, e)| c * e).sum();
    let aux: f64 = eta.iter().map(|e| e.powi(2 * op.aux_k as i32)).sum();
    Ok((-a * t - i * a_frac * drift - aux * t).exp())
}

/// `∂_{η_j}` of [`augmented_multiplier`], from the closed form.
pub fn augmented_multiplier_derivative(
    op: &AugmentedOperator,
    t: f64,
    xi: [f64; 2],
    eta: &[f64],
    j: usize,
) -> Result<Complex64> {
    if j >= op.n_aux() {
        return invalid("auxiliary index out of range");
    }
    Ok(augmented_multiplier(op, t, xi, eta)? * log_derivative(op, t, xi, eta, j)?)
}

/// `∂_{η_j} log` of the multiplier, which stays finite where the multiplier
/// itself underflows.
fn log_derivative(op: &AugmentedOperator, t: f64, xi: [f64; 2], eta: &[f64], j: usize) -> Result<Complex64> {
    let a_frac = fractional_power(op.symbol_at(xi)?, op.alpha_frac)?;
    let c = op.weights[j].integral(t)?;
    let k2 = 2 * op.aux_k as i32;
    let i = Complex64::new(0.0, 1.0);
    Ok(-i * a_frac * c - k2 as f64 * t * eta[j].powi(k2 - 1))
}

/// How the first `u`-moments of the auxiliary kernels are extracted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentPath {
    /// `i ∂_η` of the multiplier at `η = 0`.
    Analytic,
    /// Real-space quadrature over the window `[-U, U]` returned by
    /// [`AuxKernel::window`].
    Quadrature,
}

/// Both sides of the integration-by-parts identity on the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IbpCheck {
    pub lhs: GridFunction,
    pub rhs: GridFunction,
    /// `max|lhs - rhs| / (max|rhs| + ε_machine)`.
    pub rel_error: f64,
}

/// Spectrum of `f` as `(lattice point, coefficient)` pairs, rejecting
/// content outside the symbol's lattice or in the top band of the grid.
pub(crate) fn band_limited_spectrum(f: &GridFunction, grid: FrequencyGrid) -> Result<Vec<([i64; 2], Complex64)>> {
    let m = f.resolution();
    let spectrum = f.spectrum();
    let peak = spectrum.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    let limit = (grid.cutoff() as i64).min(m as i64 / 2 - 1);
    let mut tail = 0.0f64;
    let mut kept = Vec::new();
    for (idx, c) in spectrum.into_iter().enumerate() {
        let xi = frequencies_of_flat(f.dim(), m, idx);
        if FrequencyGrid::max_norm(xi) > limit {
            tail = tail.max(c.norm());
        } else if c.norm() > 0.0 {
            kept.push((xi, c));
        }
    }
    if tail > 1e-12 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::MomentDiverged { tail });
    }
    Ok(kept)
}

pub(crate) fn synthesize(dim: usize, m: usize, terms: &[([i64; 2], Complex64)]) -> Result<GridFunction> {
    let mut spectrum = vec![Complex64::new(0.0, 0.0); m.pow(dim as u32)];
    for (xi, c) in terms {
        let idx = match dim {
            1 => xi[0].rem_euclid(m as i64) as usize,
            _ => xi[0].rem_euclid(m as i64) as usize * m + xi[1].rem_euclid(m as i64) as usize,
        };
        spectrum[idx] += c;
    }
    let (g, residue) = GridFunction::from_spectrum(dim, m, spectrum)?;
    if residue > 1e-10 * (1.0 + g.sup_norm()) {
        return Err(Error::ComplexResidue { residue });
    }
    Ok(g)
}

/// First moments `m_j(ξ) = ∫ G(w - μ_j)(v_j + w) dw` with `μ_j = c_j a^α`.
fn moments(
    op: &AugmentedOperator,
    t: f64,
    xi: [f64; 2],
    v: &[f64],
    path: MomentPath,
    window: Option<f64>,
) -> Result<Vec<Complex64>> {
    let n = op.n_aux();
    let zeros = vec![0.0; n];
    let i = Complex64::new(0.0, 1.0);
    (0..n)
        .map(|j| match path {
            MomentPath::Analytic => {
                Ok(v[j] + i * log_derivative(op, t, xi, &zeros, j)?)
            }
            MomentPath::Quadrature => {
                let a_frac = fractional_power(op.symbol_at(xi)?, op.alpha_frac)?;
                if a_frac.im.abs() > 1e-12 * (1.0 + a_frac.norm()) {
                    return invalid("quadrature moments need a real symbol");
                }
                let mu = op.weights[j].integral(t)? * a_frac.re;
                let g = AuxKernel::new(t, op.aux_k)?;
                let u = window.expect("window chosen for the quadrature path");
                Ok(Complex64::new(g.truncated_moment(u, mu, v[j])?, 0.0))
            }
        })
        .collect()
}

/// `P̃_t[f ∏_j u_j](x, v)` on the grid: `Σ_ξ f̂ e^{iξx} e^{-ta} ∏_j m_j(ξ)`.
pub fn augmented_moment(
    op: &AugmentedOperator,
    f: &GridFunction,
    t: f64,
    v: &[f64],
    path: MomentPath,
) -> Result<GridFunction> {
    if !(t > 0.0) {
        return invalid("augmented semigroup needs t > 0");
    }
    if v.len() != op.n_aux() {
        return invalid(format!("expected {} auxiliary base values", op.n_aux()));
    }
    if f.dim() != op.base.dim() {
        return invalid("test function and base symbol dimensions differ");
    }
    let spectrum = band_limited_spectrum(f, op.base.grid())?;
    let window = match path {
        MomentPath::Analytic => None,
        MomentPath::Quadrature => {
            let c = op.couplings(t)?;
            let mut drift = 0.0f64;
            for (xi, _) in &spectrum {
                let a = fractional_power(op.symbol_at([xi[0] as f64, xi[1] as f64])?, op.alpha_frac)?;
                drift = drift.max(c.iter().fold(0.0f64, |acc, c| acc.max((c * a.norm()).abs())));
            }
            Some(AuxKernel::new(t, op.aux_k)?.window(drift)?)
        }
    };
    let terms = spectrum
        .iter()
        .map(|&(xi, c)| {
            let xf = [xi[0] as f64, xi[1] as f64];
            let base = (-op.symbol_at(xf)? * t).exp();
            let prod: Complex64 = moments(op, t, xf, v, path, window)?.into_iter().product();
            Ok((xi, c * base * prod))
        })
        .collect::<Result<Vec<_>>>()?;
    synthesize(f.dim(), f.resolution(), &terms)
}

/// `L^α f` on the grid.
pub fn fractional_apply(symbol: &Symbol, alpha: f64, f: &GridFunction) -> Result<GridFunction> {
    let spectrum = band_limited_spectrum(f, symbol.grid())?;
    let terms = spectrum
        .into_iter()
        .map(|(xi, c)| Ok((xi, c * fractional_power(symbol.at(xi).expect("in lattice"), alpha)?)))
        .collect::<Result<Vec<_>>>()?;
    synthesize(f.dim(), f.resolution(), &terms)
}

/// Checks
/// `P̃_t^{n+1}[f ∏_{i≤n} u_i · u_{n+1}](x, v, 0) = c_{n+1}(t) · P̃_t^n[L^α f ∏ u_i](x, v)`
/// where `op` carries the `n + 1` auxiliary variables and `v` the first `n`
/// base values. The left side uses `path` for its moments; the right side
/// always uses analytic moments.
pub fn ibp_check_with(
    op: &AugmentedOperator,
    f: &GridFunction,
    t: f64,
    v: &[f64],
    path: MomentPath,
) -> Result<IbpCheck> {
    let n = op.n_aux() - 1;
    if v.len() != n {
        return invalid(format!("expected {n} auxiliary base values"));
    }
    let mut v_full = v.to_vec();
    v_full.push(0.0);
    let lhs = augmented_moment(op, f, t, &v_full, path)?;
    let l_alpha_f = fractional_apply(&op.base, op.alpha_frac, f)?;
    let factor = op.weights[n].integral(t)?;
    let inner = match op.truncated() {
        Some(smaller) => augmented_moment(&smaller, &l_alpha_f, t, v, MomentPath::Analytic)?,
        // n = 0: P̃^0 is the base semigroup
        None => crate::semigroup::apply_semigroup(&op.base, t, &l_alpha_f)?,
    };
    let rhs = inner.map(|x| x * factor);
    let rel_error = lhs.max_abs_diff(&rhs) / (rhs.sup_norm() + f64::EPSILON);
    Ok(IbpCheck { lhs, rhs, rel_error })
}

/// [`ibp_check_with`] on the analytic moment path.
pub fn ibp_check(op: &AugmentedOperator, f: &GridFunction, t: f64, v: &[f64]) -> Result<IbpCheck> {
    ibp_check_with(op, f, t, v, MomentPath::Analytic)
}

/// `max|lhs_quadrature - lhs_analytic| / (max|lhs_analytic| + ε_machine)`.
pub fn moment_path_agreement(op: &AugmentedOperator, f: &GridFunction, t: f64, v: &[f64]) -> Result<f64> {
    let analytic = augmented_moment(op, f, t, v, MomentPath::Analytic)?;
    let quadrature = augmented_moment(op, f, t, v, MomentPath::Quadrature)?;
    Ok(analytic.max_abs_diff(&quadrature) / (analytic.sup_norm() + f64::EPSILON))
}
