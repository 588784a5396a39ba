//! Experiment execution, CSV output and the `report.toml` summary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nmhl_core::fourier::GridFunction;
use nmhl_core::large_deviations::{rate_function, Hamiltonian, Lagrangian, RateConfig};
use nmhl_core::malliavin::{ibp_check, moment_path_agreement, AugmentedOperator};
use nmhl_core::semigroup::{heat_kernel, quadrature_resolution};
use nmhl_core::spectral::{build_symbol, FrequencyGrid, Symbol};
use nmhl_core::varadhan::{
    exit_bound_check, tilted_bound_check, varadhan_curve, wf_set_estimate, Region, VaradhanConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OperatorConfig, RunConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.toml";
/// Pass threshold of the integration-by-parts residual.
pub const IBP_TOLERANCE: f64 = 1e-8;
/// Pass threshold of the disagreement between moment extraction paths.
pub const PATH_TOLERANCE: f64 = 1e-6;
/// Allowed deviation of a kernel's mass from one when `a(0) = 0`.
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Contents of `report.toml`: the verdict, measured constants, the files
/// written and the configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub experiment: String,
    pub pass: bool,
    pub version: String,
    pub schema: u32,
    pub files: Vec<String>,
    pub measured: BTreeMap<String, f64>,
    pub config: RunConfig,
}

impl ReportSummary {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::Parse {
            line: 0,
            column: 0,
            message: format!("{}: {}", path.display(), e.message()),
        })
    }
}

/// Files written so far, removed again if the run fails.
struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    precision: usize,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path, precision: usize) -> Result<Self, CliError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            precision,
            written: Vec::new(),
        })
    }

    fn num(&self, v: f64) -> String {
        format_float(v, self.precision)
    }

    fn csv(&mut self, name: &str, comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut buf = Vec::new();
        writeln!(buf, "# schema={SCHEMA_VERSION}").expect("in-memory write");
        for c in comments {
            writeln!(buf, "# {c}").expect("in-memory write");
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| CliError::Io {
                path: path.clone(),
                source: std::io::Error::other(e),
            };
            w.write_record(header).map_err(csv_err)?;
            for row in rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush().map_err(CliError::io(&path))?;
        }
        self.write(name, &buf)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        self.written.push(name.to_string());
        fs::write(&path, bytes).map_err(CliError::io(&path))
    }

    fn cleanup(&self) {
        for name in &self.written {
            let _ = fs::remove_file(self.dir.join(name));
        }
        if self.created_dir {
            // only succeeds when nothing else was put there
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// `precision` significant digits in scientific notation; `nan`, `inf`
/// and `-inf` otherwise.
pub fn format_float(v: f64, precision: usize) -> String {
    if v.is_finite() {
        format!("{:.*e}", precision.saturating_sub(1), v + 0.0)
    } else {
        v.to_string().to_lowercase()
    }
}

/// Runs the experiment, writes its CSVs and `report.toml` into the output
/// directory and returns the summary. On error every file written by this
/// run is removed.
pub fn run(cfg: &RunConfig) -> Result<ReportSummary, CliError> {
    let mut out = Outputs::new(&cfg.output.directory, cfg.output.precision)?;
    match execute(cfg, &mut out) {
        Ok((pass, measured)) => {
            let mut files = out.written.clone();
            files.push(REPORT_FILE.to_string());
            let summary = ReportSummary {
                experiment: cfg.experiment.kind().to_string(),
                pass,
                version: env!("CARGO_PKG_VERSION").to_string(),
                schema: SCHEMA_VERSION,
                files,
                measured,
                config: cfg.clone(),
            };
            let text = toml::to_string(&summary).expect("summaries serialize to TOML");
            if let Err(e) = out.write(REPORT_FILE, text.as_bytes()) {
                out.cleanup();
                return Err(e);
            }
            Ok(summary)
        }
        Err(e) => {
            out.cleanup();
            Err(e)
        }
    }
}

type Outcome = (bool, BTreeMap<String, f64>);

fn execute(cfg: &RunConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    if let ExperimentConfig::Report { inputs } = &cfg.experiment {
        return report(inputs, out);
    }
    let op = cfg.operator.as_ref().expect("validated: operator present");
    let dim = cfg.grid.dim;
    let spec = op.to_spec(dim)?;
    let cutoff = cfg.grid.cutoff.expect("filled: cutoff present");
    let grid = FrequencyGrid::new(dim, cutoff).map_err(CliError::core("frequency grid"))?;
    let symbol = build_symbol(&spec, grid).map_err(CliError::core("operator symbol"))?;

    match &cfg.experiment {
        ExperimentConfig::Kernel { times, x } => {
            let mut buf = Vec::new();
            symbol.write_csv(&mut buf).map_err(CliError::core("symbol dump"))?;
            out.write("symbol.csv", &buf)?;
            let x = x.clone().unwrap_or_else(|| vec![0.0; dim]);
            let m = cfg.grid.resolution.unwrap_or_else(|| quadrature_resolution(grid));
            kernel(&symbol, &times.values(), &x, m, out)
        }
        ExperimentConfig::Ibp {
            t,
            alphas,
            rs,
            ns,
            v,
            aux_k,
        } => {
            let aux_k = order_parameter(*aux_k, op, "experiment.aux_k")?;
            ibp(symbol, *t, alphas, rs, ns, *v, aux_k, out)
        }
        ExperimentConfig::Rate {
            endpoints,
            segments,
            winding_max,
            p_max,
        } => {
            let h = Hamiltonian::from_spec(&spec, dim).map_err(CliError::core("Hamiltonian"))?;
            let lagrangian = Lagrangian::from_hamiltonian(h, *p_max).map_err(CliError::core("Lagrangian"))?;
            let rc = RateConfig {
                segments: *segments,
                winding_max: *winding_max,
                ..RateConfig::default()
            };
            rate(dim, endpoints, &lagrangian, &rc, out)
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
            let k = order_parameter(*k, op, "experiment.k")?;
            let vc = VaradhanConfig {
                c_slack: *c_slack,
                limit_tolerance: *limit_tolerance,
                ..VaradhanConfig::default()
            };
            let times = times.values();
            let curve = match radius {
                Some(r) => {
                    let center = [y[0], if dim == 2 { y[1] } else { 0.0 }];
                    let region = Region::ball(dim, center, *r);
                    wf_set_estimate(&symbol, k, x, region, &times, &vc)
                }
                None => varadhan_curve(&symbol, k, x, y, &times, &vc),
            }
            .map_err(CliError::core("scaling curve"))?;
            let rows: Vec<Vec<String>> = curve
                .points
                .iter()
                .map(|p| {
                    vec![
                        out.num(p.t),
                        out.num(p.v),
                        out.num(curve.target),
                        out.num(p.slack),
                        p.pass.to_string(),
                    ]
                })
                .collect();
            let limit = curve.limit.unwrap_or(f64::NAN);
            let comments = [format!("k={k}"), format!("limit={}", out.num(limit))];
            out.csv("varadhan.csv", &comments, &["t", "v_t", "target", "slack", "pass"], &rows)?;
            let measured = BTreeMap::from([("limit".to_string(), limit), ("target".to_string(), curve.target)]);
            Ok((curve.pass, measured))
        }
        ExperimentConfig::Exit {
            delta,
            s,
            eps,
            k,
            tolerance,
            tilts,
        } => {
            let k = order_parameter(*k, op, "experiment.k")?;
            exit(&symbol, k, *delta, *s, &eps.values(), *tolerance, tilts, out)
        }
        ExperimentConfig::Report { .. } => unreachable!("handled above"),
    }
}

/// Explicit value, else the operator's `k`.
fn order_parameter(given: Option<u32>, op: &OperatorConfig, key: &str) -> Result<u32, CliError> {
    given
        .or_else(|| op.half_order())
        .ok_or_else(|| CliError::validation(key, "a value ≥1 for operators without an integer order"))
}

fn kernel(symbol: &Symbol, times: &[f64], x: &[f64], m: usize, out: &mut Outputs) -> Result<Outcome, CliError> {
    let conserves_mass = symbol.at([0, 0]).is_some_and(|a| a.norm() == 0.0);
    let mut pass = true;
    let mut measured = BTreeMap::new();
    for (j, &t) in times.iter().enumerate() {
        let field = heat_kernel(symbol, t, x, m).map_err(CliError::core(format!("kernel at t={t}")))?;
        let rows: Vec<Vec<String>> = (0..field.values().len())
            .map(|i| {
                let mut row: Vec<String> = field.point(i).iter().map(|c| out.num(*c)).collect();
                row.push(out.num(field.values()[i]));
                row
            })
            .collect();
        let header: &[&str] = if symbol.dim() == 1 { &["y", "p_t"] } else { &["y_1", "y_2", "p_t"] };
        let comments = [
            format!("t={}", out.num(t)),
            format!("x={}", x.iter().map(|c| out.num(*c)).collect::<Vec<_>>().join(";")),
            format!("truncation_diagnostic={}", out.num(field.diagnostic())),
        ];
        out.csv(&format!("kernel_t{j:02}.csv"), &comments, header, &rows)?;
        if conserves_mass {
            pass &= (field.mass() - 1.0).abs() < MASS_TOLERANCE;
        }
        measured.insert(format!("t{j:02}.mass"), field.mass());
        measured.insert(format!("t{j:02}.min"), field.min());
        measured.insert(format!("t{j:02}.l1_norm"), field.l1_norm());
    }
    Ok((pass, measured))
}

#[allow(clippy::too_many_arguments)]
fn ibp(
    base: Symbol,
    t: f64,
    alphas: &[f64],
    rs: &[f64],
    ns: &[usize],
    v: f64,
    aux_k: u32,
    out: &mut Outputs,
) -> Result<Outcome, CliError> {
    let dim = base.dim();
    let f = GridFunction::from_fn(dim, 32, |y| y[0].cos() + 0.3 * (2.0 * y[dim - 1]).sin() + 0.1)
        .map_err(CliError::core("test function"))?;
    let mut rows = Vec::new();
    let (mut worst_rel, mut worst_path) = (0.0f64, 0.0f64);
    for &alpha in alphas {
        for &r in rs {
            for &n in ns {
                let preset = format!("alpha={alpha};r={r};n={n}");
                let ctx = format!("ibp preset {preset}");
                let op = AugmentedOperator::new(base.clone(), n + 1, alpha, r, aux_k)
                    .map_err(CliError::core(ctx.clone()))?;
                let vs = vec![v; n];
                let check = ibp_check(&op, &f, t, &vs).map_err(CliError::core(ctx.clone()))?;
                let mut v_full = vs;
                v_full.push(0.0);
                let agreement = moment_path_agreement(&op, &f, t, &v_full).map_err(CliError::core(ctx))?;
                worst_rel = worst_rel.max(check.rel_error);
                worst_path = worst_path.max(agreement);
                rows.push(vec![
                    preset,
                    out.num(check.lhs.sup_norm()),
                    out.num(check.rhs.sup_norm()),
                    out.num(check.rel_error),
                    out.num(agreement),
                ]);
            }
        }
    }
    let comments = [format!("t={}", out.num(t)), "lhs and rhs are sup norms over the grid".to_string()];
    out.csv(
        "ibp.csv",
        &comments,
        &["preset", "lhs", "rhs", "rel_error", "path_agreement"],
        &rows,
    )?;
    let pass = worst_rel < IBP_TOLERANCE && worst_path < PATH_TOLERANCE;
    let measured = BTreeMap::from([
        ("max_rel_error".to_string(), worst_rel),
        ("max_path_agreement".to_string(), worst_path),
    ]);
    Ok((pass, measured))
}

fn rate(
    dim: usize,
    endpoints: &[Vec<f64>],
    lagrangian: &Lagrangian,
    rc: &RateConfig,
    out: &mut Outputs,
) -> Result<Outcome, CliError> {
    let pad = |p: &[f64]| [p[0], if dim == 2 { p[1] } else { 0.0 }];
    let mut rows = Vec::new();
    let mut measured = BTreeMap::new();
    for (j, e) in endpoints.iter().enumerate() {
        let (x, y) = (pad(&e[..dim]), pad(&e[dim..]));
        let r = rate_function(x, y, lagrangian, rc).map_err(CliError::core(format!("rate for endpoints {j}")))?;
        let mut row: Vec<String> = e.iter().map(|c| out.num(*c)).collect();
        row.push(out.num(r.value));
        row.extend(r.winding[..dim].iter().map(|w| w.to_string()));
        row.push(out.num(r.residual));
        rows.push(row);
        measured.insert(format!("l{j:02}"), r.value);
    }
    let header: &[&str] = if dim == 1 {
        &["x", "y", "l_value", "winding", "residual"]
    } else {
        &["x_1", "x_2", "y_1", "y_2", "l_value", "winding_1", "winding_2", "residual"]
    };
    let comments = [format!("segments={}", rc.segments), format!("winding_max={}", rc.winding_max)];
    out.csv("rate.csv", &comments, header, &rows)?;
    Ok((true, measured))
}

#[allow(clippy::too_many_arguments)]
fn exit(
    symbol: &Symbol,
    k: u32,
    delta: f64,
    s: f64,
    eps: &[f64],
    tolerance: f64,
    tilts: &[f64],
    out: &mut Outputs,
) -> Result<Outcome, CliError> {
    let fit = exit_bound_check(symbol, k, delta, s, eps).map_err(CliError::core("exit bound"))?;
    let rows: Vec<Vec<String>> = fit
        .eps
        .iter()
        .zip(&fit.log_mass)
        .map(|(e, m)| vec![out.num(*e), out.num(*m), out.num(fit.c)])
        .collect();
    let comments = [
        format!("delta={}", out.num(delta)),
        format!("s={}", out.num(s)),
        format!("chernoff_C={}", out.num(fit.chernoff_c)),
        format!("r_squared={}", out.num(fit.r_squared)),
    ];
    out.csv("exit.csv", &comments, &["eps", "log_mass", "fit_C"], &rows)?;
    let mut pass = (fit.c - fit.chernoff_c).abs() <= tolerance * fit.chernoff_c;
    let mut measured = BTreeMap::from([
        ("fit_C".to_string(), fit.c),
        ("chernoff_C".to_string(), fit.chernoff_c),
        ("r_squared".to_string(), fit.r_squared),
    ]);
    if !tilts.is_empty() {
        let mut rows = Vec::new();
        let mut tilt_pass = true;
        for &tilt in tilts {
            for &e in eps {
                let b = tilted_bound_check(symbol, k, [tilt, 0.0], s, e)
                    .map_err(CliError::core(format!("tilted bound at tilt {tilt}, eps {e}")))?;
                tilt_pass &= b.pass;
                rows.push(vec![
                    out.num(e),
                    out.num(tilt),
                    out.num(b.measured.ln()),
                    out.num(b.predicted.ln()),
                    b.pass.to_string(),
                ]);
            }
        }
        out.csv(
            "exit_tilt.csv",
            &["tilt along the first axis".to_string()],
            &["eps", "tilt", "log_measured", "log_predicted", "pass"],
            &rows,
        )?;
        measured.insert("tilts_pass".to_string(), if tilt_pass { 1.0 } else { 0.0 });
        pass &= tilt_pass;
    }
    Ok((pass, measured))
}

/// Aggregates `report.toml` files; without explicit inputs, every
/// subdirectory of the output directory that holds one.
fn report(inputs: &[PathBuf], out: &mut Outputs) -> Result<Outcome, CliError> {
    let dirs: Vec<PathBuf> = if inputs.is_empty() {
        let mut found: Vec<PathBuf> = fs::read_dir(&out.dir)
            .map_err(CliError::io(&out.dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(REPORT_FILE).is_file())
            .collect();
        found.sort();
        found
    } else {
        inputs.to_vec()
    };
    if dirs.is_empty() {
        return Err(CliError::validation("experiment.inputs", "directories containing report.toml"));
    }
    let mut rows = Vec::new();
    let mut measured = BTreeMap::new();
    let mut pass = true;
    for dir in &dirs {
        let summary = ReportSummary::read(&dir.join(REPORT_FILE))?;
        pass &= summary.pass;
        let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        for (key, value) in &summary.measured {
            measured.insert(format!("{name}.{key}"), *value);
        }
        rows.push(vec![name, summary.experiment, summary.pass.to_string()]);
    }
    out.csv("summary.csv", &[], &["input", "experiment", "pass"], &rows)?;
    Ok((pass, measured))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(1.0, 3), "1.00e0");
        assert_eq!(format_float(-0.0, 2), "0.0e0");
        assert_eq!(format_float(f64::NEG_INFINITY, 5), "-inf");
        assert_eq!(format_float(f64::NAN, 5), "nan");
    }
}
