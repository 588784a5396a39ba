//! Piecewise-linear paths on the torus, the action functional and the rate
//! function `l(x, y) = inf_φ ∫_0^1 L(φ, φ′) dt`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::hamiltonian::Hamiltonian;
use super::legendre::{legendre, LagrangianTable};
use crate::error::{invalid, Error, Result};

/// Nodes per side of the momentum tables built by
/// [`Lagrangian::from_hamiltonian`].
pub const DEFAULT_TABLE_POINTS: usize = 400;

/// Lagrangian `L(x, p)`.
#[derive(Clone)]
pub enum Lagrangian {
    /// x-independent, one-dimensional, interpolated.
    Table(LagrangianTable),
    /// x-independent, Legendre transform evaluated on demand.
    Exact(Hamiltonian),
    /// General `L(x, p)`; `x` is reduced to `[0, 2π)^d` before the call.
    Field {
        dim: usize,
        f: Arc<dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Table(t) => f.debug_tuple("Table").field(&t.p_max()).finish(),
            Self::Exact(h) => f.debug_tuple("Exact").field(h).finish(),
            Self::Field { dim, .. } => write!(f, "Field {{ dim: {dim} }}"),
        }
    }
}

impl Lagrangian {
    pub fn field(dim: usize, f: impl Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Field { dim, f: Arc::new(f) }
    }

    /// Table on `[-p_max, p_max]` in one dimension, on-demand transform
    /// otherwise.
    pub fn from_hamiltonian(h: Hamiltonian, p_max: f64) -> Result<Self> {
        Ok(match h.dim() {
            1 => Self::Table(LagrangianTable::build(h, p_max, DEFAULT_TABLE_POINTS)?),
            _ => Self::Exact(h),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Table(_) => 1,
            Self::Exact(h) => h.dim(),
            Self::Field { dim, .. } => *dim,
        }
    }

    pub fn is_autonomous(&self) -> bool {
        !matches!(self, Self::Field { .. })
    }

    pub fn eval(&self, x: [f64; 2], p: [f64; 2]) -> Result<f64> {
        match self {
            Self::Table(t) => t.eval(p[0]),
            Self::Exact(h) => legendre(h, p),
            Self::Field { f, .. } => Ok(f([x[0].rem_euclid(TAU), x[1].rem_euclid(TAU)], p)),
        }
    }
}

/// Path with `M + 1` nodes at times `i/M` in the universal cover `ℝ^d`;
/// the last node is `y + 2π w` for winding class `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPL {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    winding: [i64; 2],
}

impl PathPL {
    /// Constant-speed path from `x` to `y + 2π w`.
    pub fn straight(dim: usize, x: [f64; 2], y: [f64; 2], winding: [i64; 2], segments: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid("paths live on the circle or the 2-torus");
        }
        if segments < 2 {
            return invalid("a path needs at least 2 segments");
        }
        let end = lift(dim, y, winding);
        let nodes = (0..=segments)
            .map(|i| {
                let s = i as f64 / segments as f64;
                let mut node = [0.0; 2];
                for c in 0..dim {
                    node[c] = x[c] + s * (end[c] - x[c]);
                }
                node
            })
            .collect();
        Ok(Self { dim, nodes, winding })
    }

    /// Path through explicit nodes; the winding class is read off the last
    /// node relative to `y`.
    pub fn from_nodes(dim: usize, nodes: Vec<[f64; 2]>, winding: [i64; 2]) -> Result<Self> {
        if nodes.len() < 3 {
            return invalid("a path needs at least 3 nodes");
        }
        Ok(Self { dim, nodes, winding })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn winding(&self) -> [i64; 2] {
        self.winding
    }

    pub fn start(&self) -> [f64; 2] {
        self.nodes[0]
    }

    pub fn end(&self) -> [f64; 2] {
        *self.nodes.last().expect("nonempty path")
    }

    /// Velocity `M(φ_{i+1} - φ_i)` on segment `i`.
    pub fn velocity(&self, i: usize) -> [f64; 2] {
        let m = self.segments() as f64;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        [m * (b[0] - a[0]), m * (b[1] - a[1])]
    }
}

fn lift(dim: usize, y: [f64; 2], w: [i64; 2]) -> [f64; 2] {
    let mut end = y;
    for c in 0..dim {
        end[c] += TAU * w[c] as f64;
    }
    end
}

fn segment(path_nodes: &[[f64; 2]], i: usize, l: &Lagrangian) -> Result<f64> {
    let m = (path_nodes.len() - 1) as f64;
    let (a, b) = (path_nodes[i], path_nodes[i + 1]);
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let v = [m * (b[0] - a[0]), m * (b[1] - a[1])];
    Ok(l.eval(mid, v)? / m)
}

fn action_of(nodes: &[[f64; 2]], l: &Lagrangian) -> Result<f64> {
    (0..nodes.len() - 1).map(|i| segment(nodes, i, l)).sum()
}

/// `S(φ) = Σ_i L(midpoint_i, velocity_i)/M`, exact for x-independent `L`.
pub fn action(path: &PathPL, l: &Lagrangian) -> Result<f64> {
    if path.dim != l.dim() {
        return invalid("path and Lagrangian dimensions differ");
    }
    action_of(&path.nodes, l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    /// Number of segments `M`.
    pub segments: usize,
    /// Winding classes with `|w_i| ≤ winding_max` are searched.
    pub winding_max: i64,
    pub max_iterations: usize,
    /// First-order residual at which the descent stops.
    pub tolerance: f64,
    /// Residual above which an exhausted descent is an error.
    pub stall_tolerance: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            segments: 64,
            winding_max: 2,
            max_iterations: 5000,
            tolerance: 1e-8,
            stall_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub path: PathPL,
    pub value: f64,
    pub iterations: usize,
    /// `max_i |∂S/∂φ_i|` over interior nodes.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub value: f64,
    pub path: PathPL,
    pub winding: [i64; 2],
    pub classes_searched: usize,
    pub iterations: usize,
    pub residual: f64,
}

/// Central differences of the two segments touching each interior node,
/// with step `1e-6 (1 + |φ|)`.
fn gradient(nodes: &[[f64; 2]], dim: usize, l: &Lagrangian) -> Result<Vec<[f64; 2]>> {
    let m = nodes.len() - 1;
    let mut grad = vec![[0.0; 2]; m + 1];
    let mut work = nodes.to_vec();
    for i in 1..m {
        for c in 0..dim {
            let x = nodes[i][c];
            let h = 1e-6 * (1.0 + x.abs());
            work[i][c] = x + h;
            let plus = segment(&work, i - 1, l)? + segment(&work, i, l)?;
            work[i][c] = x - h;
            let minus = segment(&work, i - 1, l)? + segment(&work, i, l)?;
            work[i][c] = x;
            grad[i][c] = (plus - minus) / (2.0 * h);
        }
    }
    Ok(grad)
}

/// Solves `M·tridiag(-1, 2, -1) d = g` on the interior nodes, the discrete
/// `H¹` Riesz map that makes the descent step mesh independent.
fn precondition(grad: &[[f64; 2]], dim: usize) -> Vec<[f64; 2]> {
    let m = grad.len() - 1;
    let n = m - 1;
    let scale = m as f64;
    let mut out = vec![[0.0; 2]; m + 1];
    for c in 0..dim {
        let rhs: Vec<f64> = (1..m).map(|i| grad[i][c] / scale).collect();
        // Thomas algorithm for diagonal 2, off-diagonals -1
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = -0.5;
        dp[0] = rhs[0] / 2.0;
        for i in 1..n {
            let denom = 2.0 + cp[i - 1];
            cp[i] = -1.0 / denom;
            dp[i] = (rhs[i] + dp[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        for i in 0..n {
            out[i + 1][c] = x[i];
        }
    }
    out
}

fn residual_of(grad: &[[f64; 2]]) -> f64 {
    grad.iter().flatten().fold(0.0f64, |acc, g| acc.max(g.abs()))
}

/// Preconditioned gradient descent with Armijo backtracking from `initial`,
/// endpoints fixed.
pub fn minimize_action(initial: &PathPL, l: &Lagrangian, cfg: &RateConfig) -> Result<Minimized> {
    if initial.dim != l.dim() {
        return invalid("path and Lagrangian dimensions differ");
    }
    let dim = initial.dim;
    let mut nodes = initial.nodes.clone();
    let mut value = action_of(&nodes, l)?;
    let mut grad = gradient(&nodes, dim, l)?;
    let mut residual = residual_of(&grad);
    let mut step = 1.0f64;
    let mut iterations = 0;
    while residual > cfg.tolerance && iterations < cfg.max_iterations {
        iterations += 1;
        let dir = precondition(&grad, dim);
        let slope: f64 = grad.iter().zip(&dir).flat_map(|(g, d)| (0..dim).map(move |c| g[c] * d[c])).sum();
        let mut trial_step = (2.0 * step).min(1e3);
        let mut accepted = None;
        while trial_step > 1e-14 {
            let trial: Vec<[f64; 2]> = nodes
                .iter()
                .zip(&dir)
                .map(|(n, d)| [n[0] - trial_step * d[0], n[1] - trial_step * d[1]])
                .collect();
            let v = action_of(&trial, l)?;
            if v <= value - 1e-4 * trial_step * slope {
                accepted = Some((trial, v));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((trial, v)) = accepted else {
            break;
        };
        step = trial_step;
        nodes = trial;
        value = v;
        grad = gradient(&nodes, dim, l)?;
        residual = residual_of(&grad);
    }
    if residual > cfg.stall_tolerance {
        return Err(Error::OptimizerStalled { residual, iterations });
    }
    Ok(Minimized {
        path: PathPL {
            dim,
            nodes,
            winding: initial.winding,
        },
        value,
        iterations,
        residual,
    })
}

fn winding_classes(dim: usize, w_max: i64) -> Vec<[i64; 2]> {
    let range: Vec<i64> = (-w_max..=w_max).collect();
    match dim {
        1 => range.iter().map(|&w| [w, 0]).collect(),
        _ => range
            .iter()
            .flat_map(|&a| range.iter().map(move |&b| [a, b]))
            .collect(),
    }
}

/// `l(x, y)` by minimizing the action in every winding class with
/// `|w_i| ≤ winding_max`, each started from its straight line. Values within
/// `1e-12` are tied and resolved towards the smallest `|w|`, then
/// lexicographically.
pub fn rate_function(x: [f64; 2], y: [f64; 2], l: &Lagrangian, cfg: &RateConfig) -> Result<RateResult> {
    let dim = l.dim();
    if cfg.winding_max < 0 {
        return invalid("winding_max must be nonnegative");
    }
    let classes = winding_classes(dim, cfg.winding_max);
    let results = classes
        .par_iter()
        .map(|&w| minimize_action(&PathPL::straight(dim, x, y, w, cfg.segments)?, l, cfg))
        .collect::<Result<Vec<_>>>()?;
    let norm = |w: [i64; 2]| w[0] * w[0] + w[1] * w[1];
    let best = results
        .into_iter()
        .reduce(|a, b| {
            let (wa, wb) = (a.path.winding, b.path.winding);
            let b_wins = if (a.value - b.value).abs() <= 1e-12 {
                (norm(wb), wb) < (norm(wa), wa)
            } else {
                b.value < a.value
            };
            if b_wins {
                b
            } else {
                a
            }
        })
        .expect("at least one winding class");
    Ok(RateResult {
        value: best.value,
        winding: best.path.winding,
        path: best.path,
        classes_searched: classes.len(),
        iterations: best.iterations,
        residual: best.residual,
    })
}
