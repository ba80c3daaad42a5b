//! Discretization of the single-spin space: truncated quadrature meshes on
//! `[-L, L]` with integration weights and a three-point derivative stencil.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Quadrature scheme for the truncated spin space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    UniformTrapezoid,
    GaussLegendreComposite,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform_trapezoid" => Ok(Scheme::UniformTrapezoid),
            "gauss_legendre_composite" => Ok(Scheme::GaussLegendreComposite),
            other => Err(Error::Config(format!("unknown grid scheme `{other}`"))),
        }
    }
}

/// Truncated one-dimensional quadrature mesh.
///
/// Spins live on `[-L, L]`; `nodes` are strictly increasing, `weights` are the
/// quadrature weights (summing to `2L`), and every node carries a second-order
/// three-point differentiation stencil.
#[derive(Debug, Clone)]
pub struct Grid {
    l: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scheme: Scheme,
    /// Per-node derivative stencil: three (column, weight) pairs.
    stencil: Vec<[(usize, f64); 3]>,
    element_budget: usize,
}

pub const DEFAULT_ELEMENT_BUDGET: usize = 1 << 26;

pub fn build_grid(l: f64, m: usize, scheme: Scheme) -> Result<Arc<Grid>> {
    build_grid_with_budget(l, m, scheme, DEFAULT_ELEMENT_BUDGET)
}

pub fn build_grid_with_budget(
    l: f64,
    m: usize,
    scheme: Scheme,
    element_budget: usize,
) -> Result<Arc<Grid>> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Config(format!("grid half-width L must be positive, got {l}")));
    }
    let min_m = match scheme {
        Scheme::UniformTrapezoid => 2,
        Scheme::GaussLegendreComposite => 4,
    };
    if m < min_m {
        return Err(Error::Config(format!(
            "m = {m} is too small for scheme {scheme:?} (minimum {min_m})"
        )));
    }
    let (nodes, weights) = match scheme {
        Scheme::UniformTrapezoid => trapezoid_rule(l, m),
        Scheme::GaussLegendreComposite => composite_gauss(l, m),
    };
    let stencil = three_point_stencil(&nodes);
    Ok(Arc::new(Grid { l, nodes, weights, scheme, stencil, element_budget }))
}

fn trapezoid_rule(l: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * l / (m - 1) as f64;
    let nodes: Vec<f64> = (0..m).map(|i| -l + h * i as f64).collect();
    let mut weights = vec![h; m];
    weights[0] = 0.5 * h;
    weights[m - 1] = 0.5 * h;
    (nodes, weights)
}

/// Composite Gauss-Legendre: `[-L, L]` split into panels of at most 8 nodes.
fn composite_gauss(l: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let n_panels = m.div_ceil(8);
    let base = m / n_panels;
    let extra = m % n_panels;
    let width = 2.0 * l / n_panels as f64;
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for p in 0..n_panels {
        let order = if p < extra { base + 1 } else { base };
        let a = -l + width * p as f64;
        let b = a + width;
        let (xs, ws) = gauss_legendre(order);
        for (x, w) in xs.iter().zip(ws.iter()) {
            nodes.push(0.5 * (b - a) * x + 0.5 * (a + b));
            weights.push(0.5 * (b - a) * w);
        }
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        // nodes come out in descending order of x
        xs[n - 1 - k] = x;
        ws[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Second-order three-point differentiation weights: central (Lagrange) on
/// interior nodes, one-sided at the two boundary nodes. Exact on quadratics.
fn three_point_stencil(nodes: &[f64]) -> Vec<[(usize, f64); 3]> {
    let m = nodes.len();
    let mut st = Vec::with_capacity(m);
    if m == 2 {
        // degenerate two-node grid: first-order difference at both nodes
        let h = nodes[1] - nodes[0];
        let row = [(0, -1.0 / h), (1, 1.0 / h), (1, 0.0)];
        return vec![row, row];
    }
    for i in 0..m {
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == m - 1 {
            (m - 3, m - 2, m - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (xa, xb, xc) = (nodes[a], nodes[b], nodes[c]);
        let t = nodes[i];
        let wa = (2.0 * t - xb - xc) / ((xa - xb) * (xa - xc));
        let wb = (2.0 * t - xa - xc) / ((xb - xa) * (xb - xc));
        let wc = (2.0 * t - xa - xb) / ((xc - xa) * (xc - xb));
        st.push([(a, wa), (b, wb), (c, wc)]);
    }
    st
}

impl Grid {
    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn element_budget(&self) -> usize {
        self.element_budget
    }

    pub fn stencil(&self) -> &[[(usize, f64); 3]] {
        &self.stencil
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &n) in self.nodes.iter().enumerate() {
            let d = (n - x).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }

    /// Quadrature of a single-site value vector.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::Shape(format!(
                "integrand has {} values but the grid has {} nodes",
                f.len(),
                self.len()
            )));
        }
        Ok(f.iter().zip(self.weights.iter()).map(|(v, w)| v * w).sum())
    }

    /// Derivative of a single-site value vector via the stencil.
    pub fn differentiate(&self, f: &[f64]) -> Vec<f64> {
        self.stencil
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * f[j]).sum())
            .collect()
    }

    /// Dense differentiation matrix, used by the eigen route.
    pub fn stencil_matrix(&self) -> nalgebra::DMatrix<f64> {
        let m = self.len();
        let mut g = nalgebra::DMatrix::zeros(m, m);
        for (i, row) in self.stencil.iter().enumerate() {
            for &(j, w) in row {
                g[(i, j)] += w;
            }
        }
        g
    }
}
