//! Heat kernels `p_t(x, y)` and semigroup actions, with the frequency cutoff
//! rule that keeps lattice truncation below a fixed threshold.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::multiplier::Multiplier;
use crate::error::{invalid, Error, Result};
use crate::fourier::{grid_point, GridFunction};
use crate::spectral::{FrequencyGrid, Symbol};

/// Default bound on `max_{|ξ|_∞ = N} |e^{-t a(ξ)}|`.
pub const TRUNCATION_THRESHOLD: f64 = 1e-16;

const MAX_CUTOFF: usize = 1 << 16;

/// `max |e^{-t a(ξ)}|` over the outer shell of the symbol's lattice.
pub fn truncation_diagnostic(symbol: &Symbol, t: f64) -> f64 {
    let grid = symbol.grid();
    (0..grid.len())
        .filter(|&i| grid.on_boundary(i))
        .map(|i| (-t * symbol.values()[i].re).exp())
        .fold(0.0, f64::max)
}

/// Largest `|m(ξ)|` on the shell `|ξ|_∞ = n`.
fn shell_max<F: Fn([f64; 2]) -> Result<f64>>(dim: usize, n: usize, log_magnitude: &F) -> Result<f64> {
    let n = n as i64;
    let mut best = f64::NEG_INFINITY;
    let mut visit = |p: [i64; 2]| -> Result<()> {
        best = best.max(log_magnitude([p[0] as f64, p[1] as f64])?);
        Ok(())
    };
    match dim {
        1 => {
            visit([n, 0])?;
            visit([-n, 0])?;
        }
        _ => {
            for j in -n..=n {
                visit([n, j])?;
                visit([-n, j])?;
                if j.abs() < n {
                    visit([j, n])?;
                    visit([j, -n])?;
                }
            }
        }
    }
    Ok(best.exp())
}

/// Smallest cutoff `N` whose outer shell satisfies `|m| < threshold`, where
/// `log_magnitude(ξ) = log |m(ξ)|` is available off the current lattice.
/// The shell maximum is assumed to decrease in `N` past the first success.
pub fn minimal_cutoff_for<F>(dim: usize, threshold: f64, log_magnitude: F) -> Result<usize>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let ok = |n: usize| shell_max(dim, n, &log_magnitude).map(|v| v < threshold);
    let mut hi = 1;
    while !ok(hi)? {
        hi *= 2;
        if hi > MAX_CUTOFF {
            return invalid(format!("no frequency cutoff up to {MAX_CUTOFF} meets the threshold"));
        }
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    // ok(lo) is false, ok(hi) is true
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest `N` with `max_{|ξ|_∞ = N} e^{-t Re a(ξ)} < threshold`.
///
/// Tabulated symbols are extrapolated from the fitted lower bound
/// `Re a ≥ C|ξ|^{m′}` of the outer half of their lattice.
pub fn minimal_cutoff(symbol: &Symbol, t: f64, threshold: f64) -> Result<usize> {
    if !(t > 0.0) {
        return invalid("cutoff rule needs t > 0");
    }
    if symbol.is_analytic() {
        return minimal_cutoff_for(symbol.dim(), threshold, |p| {
            Ok(-t * symbol.eval_real(p)?.re)
        });
    }
    let grid = symbol.grid();
    for n in 1..=grid.cutoff() {
        let shell = (0..grid.len())
            .filter(|&i| FrequencyGrid::max_norm(grid.point(i)) == n as i64)
            .map(|i| (-t * symbol.values()[i].re).exp())
            .fold(0.0, f64::max);
        if shell < threshold {
            return Ok(n);
        }
    }
    let order = symbol.ellipticity_order();
    let c = (0..grid.len())
        .filter(|&i| 2 * FrequencyGrid::max_norm(grid.point(i)) >= grid.cutoff() as i64)
        .map(|i| {
            symbol.values()[i].re / (FrequencyGrid::max_norm(grid.point(i)) as f64).powf(order)
        })
        .fold(f64::INFINITY, f64::min);
    if !(c > 0.0 && order > 0.0) {
        return invalid("tabulated symbol does not grow; no cutoff satisfies the threshold");
    }
    Ok(((-threshold.ln() / (t * c)).powf(1.0 / order).ceil() as usize).max(grid.cutoff() + 1))
}

/// Fails with `CutoffTooSmall` (carrying the minimal admissible `N`) when
/// the symbol's lattice is too small for time `t`.
pub fn ensure_cutoff(symbol: &Symbol, t: f64, threshold: f64) -> Result<f64> {
    let diagnostic = truncation_diagnostic(symbol, t);
    if diagnostic >= threshold {
        return Err(Error::CutoffTooSmall {
            cutoff: symbol.grid().cutoff(),
            diagnostic,
            threshold,
            suggested: minimal_cutoff(symbol, t, threshold)?,
        });
    }
    Ok(diagnostic)
}

/// The symbol retabulated on the smallest lattice (at least its own) that
/// passes the cutoff rule at every time in `times`.
pub fn with_cutoff_for(symbol: &Symbol, times: &[f64], threshold: f64) -> Result<Symbol> {
    let mut n = symbol.grid().cutoff();
    for &t in times {
        if truncation_diagnostic(symbol, t) >= threshold {
            n = n.max(minimal_cutoff(symbol, t, threshold)?);
        }
    }
    if n == symbol.grid().cutoff() {
        return Ok(symbol.clone());
    }
    symbol.retabulate(FrequencyGrid::new(symbol.dim(), n)?)
}

/// Heat kernel `p_t(x, y_j)` on the grid `y_j = 2πj/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    x: Vec<f64>,
    t: f64,
    m: usize,
    values: Vec<f64>,
    diagnostic: f64,
}

impl KernelField {
    pub fn base_point(&self) -> &[f64] {
        &self.x
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Truncation diagnostic of the lattice used.
    pub fn diagnostic(&self) -> f64 {
        self.diagnostic
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        grid_point(self.dim(), self.m, idx)
    }

    fn cell(&self) -> f64 {
        (2.0 * PI / self.m as f64).powi(self.dim() as i32)
    }

    /// `∫ p_t(x, y) dy`, exact (the zero mode) when `M > 2N`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    /// `∫ |p_t(x, y)| dy`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn as_grid_function(&self) -> Result<GridFunction> {
        GridFunction::new(self.dim(), self.m, self.values.clone())
    }

    /// Writes `y[,y_2],p_t` rows with key-value metadata comment lines.
    pub fn write_csv<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidInput(format!("csv output: {e}"));
        writeln!(writer, "# schema=1").map_err(io)?;
        writeln!(writer, "# t={}", self.t).map_err(io)?;
        writeln!(writer, "# x={:?}", self.x).map_err(io)?;
        writeln!(writer, "# truncation_diagnostic={:e}", self.diagnostic).map_err(io)?;
        let mut out = csv::Writer::from_writer(writer);
        let header: &[&str] = if self.dim() == 1 { &["y", "p_t"] } else { &["y_1", "y_2", "p_t"] };
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
        out.write_record(header).map_err(csv_err)?;
        for (j, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.point(j).iter().map(|c| c.to_string()).collect();
            row.push((v + 0.0).to_string());
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(io)
    }
}

/// `p_t(x, ·) = (2π)^{-d} Σ_ξ e^{-t a(ξ)} e^{iξ·(x - ·)}` on an `M`-point grid.
pub fn heat_kernel(symbol: &Symbol, t: f64, x: &[f64], m: usize) -> Result<KernelField> {
    heat_kernel_with_threshold(symbol, t, x, m, TRUNCATION_THRESHOLD)
}

pub fn heat_kernel_with_threshold(
    symbol: &Symbol,
    t: f64,
    x: &[f64],
    m: usize,
    threshold: f64,
) -> Result<KernelField> {
    if !(t > 0.0) {
        return invalid(format!("heat kernel needs t > 0, got {t}"));
    }
    if !symbol.nonnegative_real_part() {
        return invalid("heat kernel needs a symbol with nonnegative real part");
    }
    let diagnostic = ensure_cutoff(symbol, t, threshold)?;
    let values = Multiplier::semigroup(symbol, t).kernel(x, m)?;
    Ok(KernelField {
        x: x.to_vec(),
        t,
        m,
        values,
        diagnostic,
    })
}

/// `p_t(x, y)` at a single pair of points by direct summation.
pub fn kernel_value(symbol: &Symbol, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    kernel_derivative_value(symbol, t, x, y, [0, 0])
}

/// `∂_y^{β} p_t(x, y)` at a single pair of points: the multiplier picks up
/// `(-iξ)^{β}`.
pub fn kernel_derivative_value(
    symbol: &Symbol,
    t: f64,
    x: &[f64],
    y: &[f64],
    beta: [u32; 2],
) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("heat kernel needs t > 0, got {t}"));
    }
    ensure_cutoff(symbol, t, TRUNCATION_THRESHOLD)?;
    let dim = symbol.dim();
    if x.len() != dim || y.len() != dim {
        return invalid(format!("points must have {dim} coordinates"));
    }
    let i = Complex64::new(0.0, -1.0);
    let mult = Multiplier::semigroup(symbol, t)
        .weighted(|p| (i * p[0] as f64).powu(beta[0]) * (i * p[1] as f64).powu(beta[1]));
    let z: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let v = mult.kernel_value(&z);
    if v.im.abs() > super::multiplier::RESIDUE_TOLERANCE * (1.0 + v.re.abs()) {
        return Err(Error::ComplexResidue { residue: v.im.abs() });
    }
    Ok(v.re)
}

/// `e^{-tL} h` by multiplying the spectrum of `h` by `e^{-t a(ξ)}`.
pub fn apply_semigroup(symbol: &Symbol, t: f64, h: &GridFunction) -> Result<GridFunction> {
    if t < 0.0 {
        return invalid(format!("semigroup time must be nonnegative, got {t}"));
    }
    if t == 0.0 {
        return Ok(h.clone());
    }
    ensure_cutoff(symbol, t, TRUNCATION_THRESHOLD)?;
    Multiplier::semigroup(symbol, t).apply(h)
}
