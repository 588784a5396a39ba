//! Run configuration in sectioned key = value form (`[operator]`, `[grid]`,
//! `[experiment]`, `[output]`), read as TOML or, alternatively, JSON.

use std::path::PathBuf;

use nalgebra::DMatrix;
use nmhl_core::semigroup::{minimal_cutoff, TRUNCATION_THRESHOLD};
use nmhl_core::spectral::{
    build_symbol, FrequencyGrid, LevyDensity, Monomial, OperatorSpec, DEFAULT_LEVY_TOLERANCE,
};
use nmhl_core::varadhan::{C_SLACK, LIMIT_TOLERANCE};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Lattice used for experiments without a time list.
pub const DEFAULT_CUTOFF: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    #[default]
    Indicator,
    Bump,
}

/// Mirrors [`OperatorSpec`]; nested operators go in `[operator.base]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    PurePower {
        k: u32,
    },
    QuadraticForm {
        k: u32,
        /// Row-major `d^k × d^k` matrix.
        matrix: Vec<Vec<f64>>,
    },
    Levy {
        l: u32,
        alpha_levy: f64,
        #[serde(default = "unit")]
        support: f64,
        #[serde(default)]
        density: DensityKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Fractional {
        alpha_frac: f64,
        base: Box<OperatorConfig>,
    },
    Perturbed {
        base: Box<OperatorConfig>,
        q: Vec<MonomialConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    /// Exponents of `(iξ_1, iξ_2)`; a single entry on the circle.
    pub powers: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub dim: usize,
    /// Frequency cutoff `N`; filled by the cutoff rule when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// Spatial sample count `M` for kernel dumps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            cutoff: None,
            resolution: None,
        }
    }
}

/// Geometric list `start · factor^j`, `j < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricList {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl GeometricList {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.start * self.factor.powi(j as i32)).collect()
    }

    fn validate(&self, key: &str, min_count: usize, decreasing: bool) -> Result<(), CliError> {
        if !(self.start > 0.0 && self.start.is_finite()) {
            return Err(CliError::validation(format!("{key}.start"), "> 0"));
        }
        if decreasing && !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(CliError::validation(format!("{key}.factor"), "in (0, 1)"));
        }
        if !(self.factor > 0.0) {
            return Err(CliError::validation(format!("{key}.factor"), "> 0"));
        }
        if self.count < min_count {
            return Err(CliError::validation(format!("{key}.count"), format!("≥{min_count}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    /// Heat kernels `p_t(x, ·)` at each time.
    Kernel {
        #[serde(default = "kernel_times")]
        times: GeometricList,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<Vec<f64>>,
    },
    /// Integration-by-parts identity over a preset grid.
    Ibp {
        #[serde(default = "unit")]
        t: f64,
        #[serde(default = "ibp_alphas")]
        alphas: Vec<f64>,
        #[serde(default = "ibp_rs")]
        rs: Vec<f64>,
        #[serde(default = "ibp_ns")]
        ns: Vec<usize>,
        /// Shared auxiliary coordinate for the `n` extra variables.
        #[serde(default = "ibp_v")]
        v: f64,
        /// Order parameter of the auxiliary kernel; defaults to the
        /// operator's `k`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        aux_k: Option<u32>,
    },
    /// Rate function between endpoint pairs `[x.., y..]`.
    Rate {
        endpoints: Vec<Vec<f64>>,
        #[serde(default = "rate_segments")]
        segments: usize,
        #[serde(default = "rate_winding")]
        winding_max: i64,
        /// Momentum range of the tabulated Lagrangian on the circle.
        #[serde(default = "rate_p_max")]
        p_max: f64,
    },
    /// `t^{1/(2k-1)} log|p_t(x, y)|` against `-l(x, y)`; with `radius`,
    /// the set version over the ball of that radius around `y`.
    Varadhan {
        x: Vec<f64>,
        y: Vec<f64>,
        #[serde(default = "varadhan_times")]
        times: GeometricList,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u32>,
        #[serde(default = "c_slack")]
        c_slack: f64,
        #[serde(default = "limit_tolerance")]
        limit_tolerance: f64,
    },
    /// Exit-mass decay against its Chernoff constant, plus optional
    /// tilted-semigroup bounds.
    Exit {
        delta: f64,
        #[serde(default = "unit")]
        s: f64,
        #[serde(default = "exit_eps")]
        eps: GeometricList,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u32>,
        /// Relative tolerance between fitted and Chernoff constants.
        #[serde(default = "exit_tolerance")]
        tolerance: f64,
        #[serde(default)]
        tilts: Vec<f64>,
    },
    /// Summary of earlier runs' `report.toml` files.
    Report {
        #[serde(default)]
        inputs: Vec<PathBuf>,
    },
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Kernel { .. } => "kernel",
            Self::Ibp { .. } => "ibp",
            Self::Rate { .. } => "rate",
            Self::Varadhan { .. } => "varadhan",
            Self::Exit { .. } => "exit",
            Self::Report { .. } => "report",
        }
    }

    /// Smallest time at which the base symbol's lattice must resolve the
    /// kernel.
    fn smallest_time(&self) -> Option<f64> {
        let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
        match self {
            Self::Kernel { times, .. } | Self::Varadhan { times, .. } => Some(min(times.values())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub directory: PathBuf,
    /// Significant digits of floating-point CSV fields.
    #[serde(default = "precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: out_dir(),
            precision: precision(),
        }
    }
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn kernel_times() -> GeometricList {
    GeometricList {
        start: 1.0,
        factor: 0.1,
        count: 1,
    }
}
fn ibp_alphas() -> Vec<f64> {
    vec![0.25, 0.5]
}
fn ibp_rs() -> Vec<f64> {
    vec![0.0, 1.0]
}
fn ibp_ns() -> Vec<usize> {
    vec![0, 1]
}
fn ibp_v() -> f64 {
    0.7
}
fn rate_segments() -> usize {
    64
}
fn rate_winding() -> i64 {
    2
}
fn rate_p_max() -> f64 {
    20.0
}
fn varadhan_times() -> GeometricList {
    GeometricList {
        start: 1.0,
        factor: 10f64.powf(-0.5),
        count: 5,
    }
}
fn c_slack() -> f64 {
    C_SLACK
}
fn limit_tolerance() -> f64 {
    LIMIT_TOLERANCE
}
fn exit_eps() -> GeometricList {
    GeometricList {
        start: 0.1,
        factor: 10f64.powf(-0.25),
        count: 5,
    }
}
fn exit_tolerance() -> f64 {
    0.2
}
fn out_dir() -> PathBuf {
    PathBuf::from("nmhl-out")
}
fn precision() -> usize {
    12
}

impl OperatorConfig {
    pub fn to_spec(&self, dim: usize) -> Result<OperatorSpec, CliError> {
        Ok(match self {
            Self::PurePower { k } => OperatorSpec::PurePower { k: *k },
            Self::QuadraticForm { k, matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(CliError::validation("operator.matrix", "a square matrix"));
                }
                OperatorSpec::QuadraticForm {
                    k: *k,
                    matrix: DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
                }
            }
            Self::Levy {
                l,
                alpha_levy,
                support,
                density,
                tolerance,
            } => {
                let d = match density {
                    DensityKind::Indicator => LevyDensity::indicator(*support),
                    DensityKind::Bump => LevyDensity::bump(*support),
                };
                OperatorSpec::Levy {
                    l: *l,
                    alpha_levy: *alpha_levy,
                    density: d.with_tolerance(tolerance.unwrap_or(DEFAULT_LEVY_TOLERANCE)),
                }
            }
            Self::Fractional { alpha_frac, base } => OperatorSpec::fractional(base.to_spec(dim)?, *alpha_frac),
            Self::Perturbed { base, q } => {
                let terms = q
                    .iter()
                    .map(|m| match m.powers.as_slice() {
                        [p] => Ok(Monomial::new([*p, 0], m.coeff)),
                        [p, r] if dim == 2 => Ok(Monomial::new([*p, *r], m.coeff)),
                        _ => Err(CliError::validation("operator.q.powers", format!("{dim} exponent(s)"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                OperatorSpec::perturbed(base.to_spec(dim)?, terms)
            }
        })
    }

    fn validate(&self, key: &str) -> Result<(), CliError> {
        match self {
            Self::PurePower { k } | Self::QuadraticForm { k, .. } => {
                if *k < 1 {
                    return Err(CliError::validation(format!("{key}.k"), "≥1"));
                }
            }
            Self::Levy {
                l,
                alpha_levy,
                support,
                tolerance,
                ..
            } => {
                if *l < 1 {
                    return Err(CliError::validation(format!("{key}.l"), "≥1"));
                }
                if !(*alpha_levy > -1.0 && *alpha_levy < 0.0) {
                    return Err(CliError::validation(format!("{key}.alpha_levy"), "in (-1, 0)"));
                }
                if !(*support > 0.0) {
                    return Err(CliError::validation(format!("{key}.support"), "> 0"));
                }
                if tolerance.is_some_and(|t| !(t > 0.0)) {
                    return Err(CliError::validation(format!("{key}.tolerance"), "> 0"));
                }
            }
            Self::Fractional { alpha_frac, base } => {
                if !(*alpha_frac > 0.0 && *alpha_frac <= 1.0) {
                    return Err(CliError::validation(format!("{key}.alpha_frac"), "in (0, 1]"));
                }
                base.validate(&format!("{key}.base"))?;
            }
            Self::Perturbed { base, .. } => base.validate(&format!("{key}.base"))?,
        }
        Ok(())
    }

    fn fill_defaults(&mut self) {
        match self {
            Self::Levy { tolerance, .. } => {
                tolerance.get_or_insert(DEFAULT_LEVY_TOLERANCE);
            }
            Self::Fractional { base, .. } | Self::Perturbed { base, .. } => base.fill_defaults(),
            _ => {}
        }
    }

    /// Parameter `k` of a `2k`-th order operator, when it has one.
    pub fn half_order(&self) -> Option<u32> {
        match self {
            Self::PurePower { k } | Self::QuadraticForm { k, .. } => Some(*k),
            Self::Perturbed { base, .. } => base.half_order(),
            _ => None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if !(1..=2).contains(&g.dim) {
            return Err(CliError::validation("grid.dim", "1 or 2"));
        }
        if g.cutoff.is_some_and(|n| n < 1) {
            return Err(CliError::validation("grid.cutoff", "≥1"));
        }
        if g.resolution.is_some_and(|m| m < 2) {
            return Err(CliError::validation("grid.resolution", "≥2"));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(CliError::validation("output.precision", "1..=17"));
        }
        match (&self.operator, &self.experiment) {
            (_, ExperimentConfig::Report { .. }) => {}
            (None, _) => return Err(CliError::validation("operator", "an [operator] section")),
            (Some(op), _) => op.validate("operator")?,
        }
        let point = |key: &str, p: &[f64]| {
            if p.len() == g.dim && p.iter().all(|c| c.is_finite()) {
                Ok(())
            } else {
                Err(CliError::validation(key.to_string(), format!("{} finite coordinate(s)", g.dim)))
            }
        };
        match &self.experiment {
            ExperimentConfig::Kernel { times, x } => {
                times.validate("experiment.times", 1, false)?;
                if let Some(x) = x {
                    point("experiment.x", x)?;
                }
            }
            ExperimentConfig::Ibp {
                t, alphas, rs, ns, aux_k, ..
            } => {
                if !(*t > 0.0) {
                    return Err(CliError::validation("experiment.t", "> 0"));
                }
                if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
                    return Err(CliError::validation("experiment.alphas", "nonempty, each in (0, 1]"));
                }
                if rs.is_empty() || rs.iter().any(|r| !(*r >= 0.0)) {
                    return Err(CliError::validation("experiment.rs", "nonempty, each ≥ 0"));
                }
                if ns.is_empty() || ns.iter().any(|n| *n > 3) {
                    return Err(CliError::validation("experiment.ns", "nonempty, each in 0..=3"));
                }
                if aux_k.is_some_and(|k| k < 1) {
                    return Err(CliError::validation("experiment.aux_k", "≥1"));
                }
            }
            ExperimentConfig::Rate {
                endpoints,
                segments,
                winding_max,
                p_max,
            } => {
                if endpoints.is_empty() {
                    return Err(CliError::validation("experiment.endpoints", "at least one pair"));
                }
                for e in endpoints {
                    if e.len() != 2 * g.dim || e.iter().any(|c| !c.is_finite()) {
                        return Err(CliError::validation(
                            "experiment.endpoints",
                            format!("entries of {} finite coordinates [x.., y..]", 2 * g.dim),
                        ));
                    }
                }
                if *segments < 2 {
                    return Err(CliError::validation("experiment.segments", "≥2"));
                }
                if *winding_max < 0 {
                    return Err(CliError::validation("experiment.winding_max", "≥0"));
                }
                if !(*p_max > 0.0) {
                    return Err(CliError::validation("experiment.p_max", "> 0"));
                }
            }
            ExperimentConfig::Varadhan {
                x,
                y,
                times,
                radius,
                k,
                c_slack,
                limit_tolerance,
            } => {
                point("experiment.x", x)?;
                point("experiment.y", y)?;
                times.validate("experiment.times", 3, true)?;
                if radius.is_some_and(|r| !(r > 0.0 && r < std::f64::consts::PI)) {
                    return Err(CliError::validation("experiment.radius", "in (0, π)"));
                }
                if k.is_some_and(|k| k < 1) {
                    return Err(CliError::validation("experiment.k", "≥1"));
                }
                if !(*c_slack >= 0.0) {
                    return Err(CliError::validation("experiment.c_slack", "≥ 0"));
                }
                if !(*limit_tolerance >= 0.0) {
                    return Err(CliError::validation("experiment.limit_tolerance", "≥ 0"));
                }
            }
            ExperimentConfig::Exit {
                delta,
                s,
                eps,
                k,
                tolerance,
                tilts,
            } => {
                if !(*delta > 0.0 && *delta < std::f64::consts::PI) {
                    return Err(CliError::validation("experiment.delta", "in (0, π)"));
                }
                if !(*s > 0.0) {
                    return Err(CliError::validation("experiment.s", "> 0"));
                }
                eps.validate("experiment.eps", 2, true)?;
                if k.is_some_and(|k| k < 1) {
                    return Err(CliError::validation("experiment.k", "≥1"));
                }
                if !(*tolerance > 0.0) {
                    return Err(CliError::validation("experiment.tolerance", "> 0"));
                }
                if tilts.iter().any(|t| !t.is_finite()) {
                    return Err(CliError::validation("experiment.tilts", "finite values"));
                }
            }
            ExperimentConfig::Report { .. } => {}
        }
        Ok(())
    }

    /// Fills module defaults: the Lévy quadrature tolerance and the
    /// frequency cutoff from the cutoff rule at the smallest time.
    pub fn fill_defaults(&mut self) -> Result<(), CliError> {
        let Some(op) = self.operator.as_mut() else {
            return Ok(());
        };
        op.fill_defaults();
        if self.grid.cutoff.is_some() {
            return Ok(());
        }
        let n = match self.experiment.smallest_time() {
            Some(t) => {
                let spec = op.to_spec(self.grid.dim)?;
                let probe = FrequencyGrid::new(self.grid.dim, 1).map_err(CliError::core("cutoff rule"))?;
                let symbol = build_symbol(&spec, probe).map_err(CliError::core("operator"))?;
                minimal_cutoff(&symbol, t, TRUNCATION_THRESHOLD)
                    .map_err(CliError::core("cutoff rule"))?
                    .max(DEFAULT_CUTOFF)
            }
            None => DEFAULT_CUTOFF,
        };
        self.grid.cutoff = Some(n);
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize to TOML")
    }
}

/// Parses and validates a config; TOML unless the text starts with `{`.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_with(text, &[], None)
}

/// Parses a config, applies `key.path=value` overrides and, when `kind` is
/// given, requires or inserts an experiment of that kind.
pub fn parse_config_with(text: &str, overrides: &[String], kind: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = if overrides.is_empty() && (kind.is_none() || has_experiment(text)) {
        deserialize(text)?
    } else {
        let mut table = to_table(text)?;
        if let Some(kind) = kind {
            let exp = table
                .entry("experiment")
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            if let toml::Value::Table(t) = exp {
                t.entry("kind").or_insert_with(|| toml::Value::String(kind.to_string()));
            }
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let merged = toml::to_string(&table).expect("tables serialize");
        toml::from_str(&merged).map_err(|e| toml_error(&merged, e))?
    };
    if let Some(kind) = kind {
        if cfg.experiment.kind() != kind {
            return Err(CliError::validation("experiment.kind", format!("\"{kind}\" for this subcommand")));
        }
    }
    cfg.validate()?;
    cfg.fill_defaults()?;
    Ok(cfg)
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

fn has_experiment(text: &str) -> bool {
    to_table(text).map_or(true, |t| t.contains_key("experiment"))
}

fn deserialize(text: &str) -> Result<RunConfig, CliError> {
    if is_json(text) {
        serde_json::from_str(text).map_err(json_error)
    } else {
        toml::from_str(text).map_err(|e| toml_error(text, e))
    }
}

fn to_table(text: &str) -> Result<toml::Table, CliError> {
    if is_json(text) {
        let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
        match toml::Value::try_from(value) {
            Ok(toml::Value::Table(t)) => Ok(t),
            _ => Err(CliError::Parse {
                line: 1,
                column: 1,
                message: "JSON config must be an object without null values".into(),
            }),
        }
    } else {
        text.parse::<toml::Table>().map_err(|e| toml_error(text, e))
    }
}

/// `a.b.c=value`, with `value` read as a TOML literal and taken as a
/// string when it is not one.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let Some((key, raw)) = spec.split_once('=') else {
        return Err(CliError::validation("--override", "key=value"));
    };
    let key = key.trim();
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::validation("--override", "a dotted key such as operator.k"));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::validation(key.to_string(), "a path through tables")),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn toml_error(text: &str, e: toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
    CliError::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn json_error(e: serde_json::Error) -> CliError {
    CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
        assert_eq!(line_column("ab", 0), (1, 1));
    }

    #[test]
    fn geometric_list() {
        let g = GeometricList {
            start: 1.0,
            factor: 0.5,
            count: 3,
        };
        assert_eq!(g.values(), vec![1.0, 0.5, 0.25]);
    }
}
