//! Tabulated symbols on a frequency lattice.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::FrequencyGrid;
use super::operator::{eval_polynomial, Monomial, OperatorSpec};
use crate::error::{invalid, Result};

/// Relative tolerance for the `real_valued` and `even` flags.
const FLAG_TOLERANCE: f64 = 1e-10;

/// Step and box radius of the off-lattice sampling behind
/// `nonnegative_real_part`.
const REFINED_STEP: f64 = 0.125;
const REFINED_RADIUS: usize = 32;

/// How a symbol can be evaluated away from the lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Operator(OperatorSpec),
    /// `Q(iξ)` for a constant-coefficient differential operator.
    Polynomial(Vec<Monomial>),
    /// `factor · a(ξ)`.
    Scaled { inner: Box<SymbolExpr>, factor: f64 },
    /// `(1/ε) · a(εξ)`.
    Dilated { inner: Box<SymbolExpr>, eps: f64 },
    /// Lattice values only.
    Tabulated,
}

impl SymbolExpr {
    /// Value at a complex frequency, `None` for tabulated symbols.
    pub fn eval(&self, zeta: [Complex64; 2]) -> Option<Result<Complex64>> {
        match self {
            Self::Operator(spec) => Some(spec.eval(zeta)),
            Self::Polynomial(q) => Some(Ok(eval_polynomial(q, zeta))),
            Self::Scaled { inner, factor } => inner.eval(zeta).map(|v| v.map(|a| a * *factor)),
            Self::Dilated { inner, eps } => inner
                .eval([zeta[0] * *eps, zeta[1] * *eps])
                .map(|v| v.map(|a| a / *eps)),
            Self::Tabulated => None,
        }
    }

    pub fn operator(&self) -> Option<&OperatorSpec> {
        match self {
            Self::Operator(spec) => Some(spec),
            Self::Scaled { inner, .. } | Self::Dilated { inner, .. } => inner.operator(),
            Self::Polynomial(_) | Self::Tabulated => None,
        }
    }
}

/// Fourier multiplier `a(ξ)` tabulated on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
    order: f64,
    ellipticity_order: f64,
    real_valued: bool,
    even: bool,
    nonnegative_real_part: bool,
    expr: SymbolExpr,
}

/// Tabulates the symbol of `spec` on `grid` and sets the structural flags.
pub fn build_symbol(spec: &OperatorSpec, grid: FrequencyGrid) -> Result<Symbol> {
    spec.validate(grid.dim())?;
    let expr = SymbolExpr::Operator(spec.clone());
    let values = tabulate(&expr, grid)?;
    let refine = !spec.contains_levy();
    Symbol::assemble(
        grid,
        values,
        spec.order(),
        spec.ellipticity_order(),
        expr,
        refine,
    )
}

fn tabulate(expr: &SymbolExpr, grid: FrequencyGrid) -> Result<Vec<Complex64>> {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx);
            let zeta = [Complex64::new(p[0] as f64, 0.0), Complex64::new(p[1] as f64, 0.0)];
            expr.eval(zeta).expect("analytic expression")
        })
        .collect()
}

fn flag_close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= FLAG_TOLERANCE * (1.0 + a.norm().max(b.norm()))
}

impl Symbol {
    fn assemble(
        grid: FrequencyGrid,
        values: Vec<Complex64>,
        order: f64,
        ellipticity_order: f64,
        expr: SymbolExpr,
        refine: bool,
    ) -> Result<Self> {
        let real_valued = values
            .iter()
            .all(|v| v.im.abs() <= FLAG_TOLERANCE * (1.0 + v.norm()));
        let even = (0..values.len()).all(|i| flag_close(values[i], values[grid.negated(i)]));
        let mut nonnegative_real_part = values.iter().all(|v| v.re >= 0.0);
        if nonnegative_real_part && refine {
            nonnegative_real_part = refined_nonnegative(&expr, grid)?;
        }
        Ok(Self {
            grid,
            values,
            order,
            ellipticity_order,
            real_valued,
            even,
            nonnegative_real_part,
            expr,
        })
    }

    /// Symbol given only by lattice values, with declared orders.
    pub fn from_values(
        grid: FrequencyGrid,
        values: Vec<Complex64>,
        order: f64,
        ellipticity_order: f64,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} symbol values, got {}",
                grid.len(),
                values.len()
            ));
        }
        Self::assemble(grid, values, order, ellipticity_order, SymbolExpr::Tabulated, false)
    }

    /// Symbol `Q(iξ)` of a constant-coefficient differential operator; its
    /// order is the total degree.
    pub fn polynomial(grid: FrequencyGrid, q: &[Monomial]) -> Result<Self> {
        if grid.dim() == 1 && q.iter().any(|m| m.powers[1] != 0) {
            return invalid("polynomial uses a second coordinate on the circle");
        }
        let expr = SymbolExpr::Polynomial(q.to_vec());
        let values = tabulate(&expr, grid)?;
        let order = q.iter().map(|m| m.degree()).max().unwrap_or(0) as f64;
        Self::assemble(grid, values, order, order, expr, false)
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn ellipticity_order(&self) -> f64 {
        self.ellipticity_order
    }

    pub fn real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn even(&self) -> bool {
        self.even
    }

    pub fn nonnegative_real_part(&self) -> bool {
        self.nonnegative_real_part
    }

    pub fn expr(&self) -> &SymbolExpr {
        &self.expr
    }

    pub fn operator(&self) -> Option<&OperatorSpec> {
        self.expr.operator()
    }

    /// Value at lattice point `ξ`, if it lies in the grid.
    pub fn at(&self, xi: [i64; 2]) -> Option<Complex64> {
        self.grid.index_of(xi).map(|i| self.values[i])
    }

    /// Value at an arbitrary complex frequency. Lattice points of tabulated
    /// symbols are looked up; other points need an analytic expression.
    pub fn eval(&self, zeta: [Complex64; 2]) -> Result<Complex64> {
        match self.expr.eval(zeta) {
            Some(v) => v,
            None => {
                let on_lattice = zeta.iter().all(|z| z.im == 0.0 && z.re.fract() == 0.0);
                let xi = [zeta[0].re as i64, zeta[1].re as i64];
                match (on_lattice, self.at(xi)) {
                    (true, Some(v)) => Ok(v),
                    _ => invalid("tabulated symbol has no value off its lattice"),
                }
            }
        }
    }

    pub fn eval_real(&self, xi: [f64; 2]) -> Result<Complex64> {
        self.eval([Complex64::new(xi[0], 0.0), Complex64::new(xi[1], 0.0)])
    }

    /// Whether the symbol can be evaluated off the lattice.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.expr, SymbolExpr::Tabulated)
    }

    /// `factor · a(ξ)`.
    pub fn scaled(&self, factor: f64) -> Self {
        let expr = match &self.expr {
            SymbolExpr::Tabulated => SymbolExpr::Tabulated,
            other => SymbolExpr::Scaled {
                inner: Box::new(other.clone()),
                factor,
            },
        };
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            nonnegative_real_part: self.nonnegative_real_part && factor >= 0.0,
            expr,
            ..self.clone()
        }
    }

    /// `(1/ε) · a(εξ)`, re-evaluated from the analytic expression.
    pub fn dilated(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return invalid(format!("dilation factor must be positive, got {eps}"));
        }
        if !self.is_analytic() {
            return invalid("tabulated symbol cannot be dilated");
        }
        let expr = SymbolExpr::Dilated {
            inner: Box::new(self.expr.clone()),
            eps,
        };
        let values = tabulate(&expr, self.grid)?;
        Self::assemble(
            self.grid,
            values,
            self.order,
            self.ellipticity_order,
            expr,
            self.nonnegative_real_part && !self.operator().is_some_and(|s| s.contains_levy()),
        )
    }

    /// Same symbol on another lattice.
    pub fn retabulate(&self, grid: FrequencyGrid) -> Result<Self> {
        if grid == self.grid {
            return Ok(self.clone());
        }
        if grid.dim() != self.grid.dim() {
            return invalid("cannot retabulate across dimensions");
        }
        let values = if self.is_analytic() {
            tabulate(&self.expr, grid)?
        } else if grid.cutoff() <= self.grid.cutoff() {
            grid.points().map(|p| self.at(p).expect("sub-lattice")).collect()
        } else {
            return invalid(format!(
                "tabulated symbol known up to N={} cannot be extended to N={}",
                self.grid.cutoff(),
                grid.cutoff()
            ));
        };
        Ok(Self {
            grid,
            values,
            ..self.clone()
        })
    }

    /// Writes `xi_1[,xi_2],re_a,im_a` rows in lattice order after a
    /// `# schema=1` comment line.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# schema=1")
            .map_err(|e| crate::error::Error::InvalidInput(format!("csv output: {e}")))?;
        let io = |e: csv::Error| crate::error::Error::InvalidInput(format!("csv output: {e}"));
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["xi_1"];
        if self.dim() == 2 {
            header.push("xi_2");
        }
        header.extend(["re_a", "im_a"]);
        out.write_record(&header).map_err(io)?;
        for (idx, v) in self.values.iter().enumerate() {
            let p = self.grid.point(idx);
            let mut row = vec![p[0].to_string()];
            if self.dim() == 2 {
                row.push(p[1].to_string());
            }
            // `+ 0.0` prints negative zero as `0`
            row.push((v.re + 0.0).to_string());
            row.push((v.im + 0.0).to_string());
            out.write_record(&row).map_err(io)?;
        }
        out.flush()
            .map_err(|e| crate::error::Error::InvalidInput(format!("csv output: {e}")))
    }
}

/// `Re a ≥ 0` on a fine sampling of the box `|ξ_i| ≤ min(N, 32)`.
fn refined_nonnegative(expr: &SymbolExpr, grid: FrequencyGrid) -> Result<bool> {
    let radius = grid.cutoff().min(REFINED_RADIUS) as f64;
    let steps = (2.0 * radius / REFINED_STEP).round() as usize;
    let coord = |j: usize| -radius + j as f64 * REFINED_STEP;
    let points: Vec<[f64; 2]> = match grid.dim() {
        1 => (0..=steps).map(|j| [coord(j), 0.0]).collect(),
        _ => (0..=steps)
            .flat_map(|a| (0..=steps).map(move |b| [coord(a), coord(b)]))
            .collect(),
    };
    let negative = points
        .par_iter()
        .map(|p| {
            let zeta = [Complex64::new(p[0], 0.0), Complex64::new(p[1], 0.0)];
            expr.eval(zeta)
                .expect("analytic expression")
                .map(|v| v.re < -FLAG_TOLERANCE * (1.0 + v.norm()))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(!negative.into_iter().any(|n| n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_power_flags() {
        let s = build_symbol(&OperatorSpec::pure_power(2), FrequencyGrid::new(1, 8).unwrap()).unwrap();
        assert!(s.real_valued() && s.even() && s.nonnegative_real_part());
        assert_eq!(s.at([3, 0]).unwrap(), Complex64::new(81.0, 0.0));
    }

    #[test]
    fn perturbed_negative_between_lattice_points() {
        let spec = OperatorSpec::perturbed(OperatorSpec::pure_power(2), vec![Monomial::one_d(2, 1.0)]);
        let s = build_symbol(&spec, FrequencyGrid::new(1, 8).unwrap()).unwrap();
        assert_eq!(s.at([1, 0]).unwrap().norm(), 0.0);
        assert!(!s.nonnegative_real_part());
        let spec = OperatorSpec::perturbed(OperatorSpec::pure_power(2), vec![Monomial::one_d(2, -1.0)]);
        let s = build_symbol(&spec, FrequencyGrid::new(1, 8).unwrap()).unwrap();
        assert!(s.nonnegative_real_part());
        assert_eq!(s.at([1, 0]).unwrap(), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn odd_perturbation_is_not_even() {
        let spec = OperatorSpec::perturbed(OperatorSpec::pure_power(1), vec![Monomial::one_d(1, 1.0)]);
        let s = build_symbol(&spec, FrequencyGrid::new(1, 4).unwrap()).unwrap();
        assert!(!s.even());
        assert!(!s.real_valued());
        assert!(s.nonnegative_real_part());
    }

    #[test]
    fn fractional_of_negative_base_is_branch_cut() {
        let base = OperatorSpec::perturbed(OperatorSpec::pure_power(2), vec![Monomial::one_d(2, 1.0)]);
        let spec = OperatorSpec::fractional(base, 0.5);
        let err = build_symbol(&spec, FrequencyGrid::new(1, 4).unwrap()).unwrap_err();
        assert!(matches!(err, crate::error::Error::BranchCut { .. }));
    }

    #[test]
    fn scaling_dilation_and_retabulation() {
        let grid = FrequencyGrid::new(1, 6).unwrap();
        let s = build_symbol(&OperatorSpec::pure_power(1), grid).unwrap();
        assert_eq!(s.scaled(0.5).at([2, 0]).unwrap().re, 2.0);
        let d = s.dilated(0.5).unwrap();
        // (1/ε)(εξ)² = εξ²
        assert!((d.at([2, 0]).unwrap().re - 2.0).abs() < 1e-15);
        let wider = s.retabulate(FrequencyGrid::new(1, 10).unwrap()).unwrap();
        assert_eq!(wider.at([10, 0]).unwrap().re, 100.0);
        let tab = Symbol::from_values(grid, s.values().to_vec(), 2.0, 2.0).unwrap();
        assert!(tab.retabulate(FrequencyGrid::new(1, 10).unwrap()).is_err());
        assert_eq!(tab.retabulate(FrequencyGrid::new(1, 3).unwrap()).unwrap().values().len(), 7);
    }

    #[test]
    fn csv_dump_columns() {
        let s = build_symbol(&OperatorSpec::pure_power(1), FrequencyGrid::new(2, 1).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# schema=1");
        assert_eq!(lines.next().unwrap(), "xi_1,xi_2,re_a,im_a");
        assert_eq!(lines.next().unwrap(), "-1,-1,2,0");
        assert_eq!(text.lines().count(), 11);
    }
}
