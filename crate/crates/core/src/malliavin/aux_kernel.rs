//! Kernel of `e^{-t (-1)^k ∂_u^{2k}}` on the real line and its truncated
//! moments.
//!
//! `G_t(w) = (1/π) ∫_0^∞ cos(ηw) e^{-tη^{2k}} dη`. The antiderivatives
//!
//! ```text
//! Φ0(x) = ∫_0^x G = (1/π) ∫_0^∞ sin(ηx)/η · e^{-tη^{2k}} dη
//! Φ1(x) = ∫_0^x wG = (1/π) ∫_0^∞ (x sin(ηx)/η - 2 sin²(ηx/2)/η²) e^{-tη^{2k}} dη
//! ```
//!
//! give moments over any interval with a handful of oscillatory quadratures.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::numerics::{adaptive_gauss_kronrod, GaussLegendre};

/// Tail mass of `|G_t|` outside the auxiliary window that the domain
/// selection must reach.
pub const AUX_TAIL_TOLERANCE: f64 = 1e-10;

const ABS_TOL: f64 = 1e-14;
const REL_TOL: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 24;

/// Auxiliary heat kernel of order `2k` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxKernel {
    pub t: f64,
    pub k: u32,
}

impl AuxKernel {
    pub fn new(t: f64, k: u32) -> Result<Self> {
        if !(t > 0.0) || k == 0 {
            return invalid("auxiliary kernel needs t > 0 and k >= 1");
        }
        Ok(Self { t, k })
    }

    /// Natural length scale `t^{1/2k}`.
    pub fn scale(&self) -> f64 {
        self.t.powf(1.0 / (2 * self.k) as f64)
    }

    /// Frequency beyond which `e^{-tη^{2k}} < e^{-42}`.
    fn eta_max(&self) -> f64 {
        (42.0 / self.t).powf(1.0 / (2 * self.k) as f64)
    }

    fn damping(&self, eta: f64) -> f64 {
        (-self.t * eta.powi(2 * self.k as i32)).exp()
    }

    fn transform<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let top = self.eta_max();
        adaptive_gauss_kronrod(
            |eta| Complex64::new(f(eta) * self.damping(eta), 0.0),
            0.0,
            top,
            ABS_TOL,
            REL_TOL,
            20_000,
        )
        .map(|i| i.value.re / PI)
    }

    pub fn value(&self, w: f64) -> Result<f64> {
        self.transform(|eta| (eta * w).cos())
    }

    /// `∫_0^x G_t`.
    pub fn phi0(&self, x: f64) -> Result<f64> {
        self.transform(|eta| if eta == 0.0 { x } else { (eta * x).sin() / eta })
    }

    /// `∫_0^x w G_t(w) dw`.
    pub fn phi1(&self, x: f64) -> Result<f64> {
        self.transform(|eta| {
            if eta == 0.0 {
                return 0.5 * x * x;
            }
            let s = (0.5 * eta * x).sin();
            x * (eta * x).sin() / eta - 2.0 * s * s / (eta * eta)
        })
    }

    /// `∫_{-U}^{U} G_t(w - μ)(v + w) dw`.
    pub fn truncated_moment(&self, half_width: f64, mu: f64, v: f64) -> Result<f64> {
        let (lo, hi) = (-half_width - mu, half_width - mu);
        let mass = self.phi0(hi)? - self.phi0(lo)?;
        let first = self.phi1(hi)? - self.phi1(lo)?;
        Ok((v + mu) * mass + first)
    }

    /// `∫_{|w| > x} |G_t(w)| dw`, integrating `|G|` over `[x, 4x]` where the
    /// super-exponential envelope leaves nothing further out.
    pub fn tail_mass(&self, x: f64) -> Result<f64> {
        let panels = (3.0 * x / (0.25 * self.scale())).ceil().max(8.0) as usize;
        let gl = GaussLegendre::new(8);
        let h = 3.0 * x / panels as f64;
        let mut total = 0.0;
        for j in 0..panels {
            let a = x + j as f64 * h;
            for (w, weight) in gl.mapped(a, a + h) {
                total += weight * self.value(w)?.abs();
            }
        }
        Ok(2.0 * total)
    }

    /// Smallest `U = 12 t^{1/2k} · 2^j` such that the window `[-U, U]`
    /// covers every drift `|μ| ≤ drift` with `|G|` tail below
    /// [`AUX_TAIL_TOLERANCE`].
    pub fn window(&self, drift: f64) -> Result<f64> {
        let mut u = 12.0 * self.scale();
        for _ in 0..MAX_DOUBLINGS {
            if u > drift && self.tail_mass(u - drift)? < AUX_TAIL_TOLERANCE {
                return Ok(u);
            }
            u *= 2.0;
        }
        Err(Error::AuxDomainTooSmall {
            half_width: u,
            drift: f64::INFINITY,
        })
    }
}
