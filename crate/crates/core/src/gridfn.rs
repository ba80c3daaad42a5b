//! Functions of finitely many spin coordinates, stored densely over the grid
//! nodes of a contiguous site interval.

use crate::error::{Error, Result};
use crate::grid::Grid;
use ndarray::{ArrayD, Axis, IxDyn};
use std::sync::Arc;

/// Contiguous interval of chain sites, 1-based and inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteInterval {
    pub lo: usize,
    pub hi: usize,
}

impl SiteInterval {
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo >= 1 && lo <= hi, "bad site interval [{lo}, {hi}]");
        SiteInterval { lo, hi }
    }

    pub fn single(site: usize) -> Self {
        Self::new(site, site)
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: usize) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }

    /// Tensor axis of a site within this interval.
    pub fn axis_of(&self, site: usize) -> usize {
        debug_assert!(self.contains(site));
        site - self.lo
    }

    pub fn hull(a: Option<SiteInterval>, b: Option<SiteInterval>) -> Option<SiteInterval> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(SiteInterval::new(a.lo.min(b.lo), a.hi.max(b.hi))),
        }
    }
}

/// A function of finitely many spin coordinates.
///
/// `support` is the contiguous site interval outside which the function is
/// constant in every coordinate; `None` means a globally constant function.
/// Values are stored densely: one entry per tuple of grid nodes over the
/// support. Operations that widen the support first check the configured
/// element budget and fail fast instead of thrashing.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    support: Option<SiteInterval>,
    values: ArrayD<f64>,
    nonneg: bool,
}

fn scalar(v: f64) -> ArrayD<f64> {
    ArrayD::from_elem(IxDyn(&[]), v)
}

impl GridFunction {
    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        GridFunction {
            grid: Arc::clone(grid),
            support: None,
            values: scalar(c),
            nonneg: c >= 0.0,
        }
    }

    /// Builds a function on `support` by evaluating `f` on every node tuple.
    pub fn from_fn<F>(grid: &Arc<Grid>, support: SiteInterval, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let m = grid.len();
        let k = support.len();
        check_budget(grid, k)?;
        let shape: Vec<usize> = vec![m; k];
        let nodes = grid.nodes();
        let mut out = ArrayD::zeros(IxDyn(&shape));
        let mut coords = vec![0.0; k];
        for (idx, v) in out.indexed_iter_mut() {
            for a in 0..k {
                coords[a] = nodes[idx[a]];
            }
            *v = f(&coords);
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite value at grid point {idx:?}")));
            }
        }
        Ok(Self::from_values(grid, support, out))
    }

    /// Wraps a precomputed value tensor.
    pub fn from_values(grid: &Arc<Grid>, support: SiteInterval, values: ArrayD<f64>) -> Self {
        debug_assert_eq!(values.ndim(), support.len());
        let nonneg = values.iter().all(|v| *v >= 0.0);
        GridFunction { grid: Arc::clone(grid), support: Some(support), values, nonneg }
    }

    /// The coordinate function `x -> x_site`.
    pub fn coordinate(grid: &Arc<Grid>, site: usize) -> Self {
        Self::from_fn(grid, SiteInterval::single(site), |c| c[0]).expect("single site fits budget")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn support(&self) -> Option<SiteInterval> {
        self.support
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.support.is_none()
    }

    /// For constant functions, the constant.
    pub fn constant_value(&self) -> Option<f64> {
        if self.support.is_none() {
            Some(self.values[IxDyn(&[])])
        } else {
            None
        }
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    /// Marks the function as nonnegative, clamping stray `-0.0`-scale noise.
    pub fn assert_nonneg(mut self, tol: f64) -> Result<Self> {
        for v in self.values.iter_mut() {
            if *v < 0.0 {
                if *v < -tol {
                    return Err(Error::Domain(format!("negative value {v} beyond -{tol}")));
                }
                *v = 0.0;
            }
        }
        self.nonneg = true;
        Ok(self)
    }

    /// Broadcasts onto a larger support interval.
    pub fn extend_to(&self, target: SiteInterval) -> Result<Self> {
        let m = self.grid.len();
        check_budget(&self.grid, target.len())?;
        match self.support {
            None => {
                let c = self.values[IxDyn(&[])];
                let shape: Vec<usize> = vec![m; target.len()];
                Ok(GridFunction {
                    grid: Arc::clone(&self.grid),
                    support: Some(target),
                    values: ArrayD::from_elem(IxDyn(&shape), c),
                    nonneg: self.nonneg,
                })
            }
            Some(s) => {
                assert!(target.lo <= s.lo && s.hi <= target.hi, "extend_to must grow the support");
                let left = s.lo - target.lo;
                let right = target.hi - s.hi;
                let mut with_ones: Vec<usize> = Vec::with_capacity(target.len());
                with_ones.extend(std::iter::repeat(1).take(left));
                with_ones.extend(std::iter::repeat(m).take(s.len()));
                with_ones.extend(std::iter::repeat(1).take(right));
                let reshaped = self
                    .values
                    .view()
                    .into_shape_with_order(IxDyn(&with_ones))
                    .expect("inserting unit axes preserves the element count");
                let full: Vec<usize> = vec![m; target.len()];
                let values = reshaped
                    .broadcast(IxDyn(&full))
                    .expect("unit axes broadcast to the grid size")
                    .to_owned();
                Ok(GridFunction {
                    grid: Arc::clone(&self.grid),
                    support: Some(target),
                    values,
                    nonneg: self.nonneg,
                })
            }
        }
    }

    /// Pointwise combination over the hull of the two supports.
    pub fn zip_with<F>(&self, other: &GridFunction, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        match SiteInterval::hull(self.support, other.support) {
            None => {
                let v = f(self.values[IxDyn(&[])], other.values[IxDyn(&[])]);
                Ok(GridFunction::constant(&self.grid, v))
            }
            Some(h) => {
                let a = self.extend_to(h)?;
                let b = other.extend_to(h)?;
                let mut values = a.values;
                values.zip_mut_with(&b.values, |x, &y| *x = f(*x, y));
                Ok(Self::from_values(&self.grid, h, values))
            }
        }
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        let values = self.values.mapv(|v| f(v));
        let nonneg = values.iter().all(|v| *v >= 0.0);
        GridFunction { grid: Arc::clone(&self.grid), support: self.support, values, nonneg }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `|f|^p` pointwise.
    pub fn abs_powf(&self, p: f64) -> Self {
        self.map(|v| v.abs().powf(p))
    }

    pub fn powf(&self, p: f64) -> Self {
        self.map(|v| v.powf(p))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, v| a.min(*v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v))
    }

    /// Max-norm of the difference, computed over the support hull.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.zip_with(other, |a, b| a - b)
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    /// Partial derivative in the `site` coordinate via the grid stencil.
    /// Functions constant in that coordinate differentiate to exactly zero.
    pub fn site_gradient(&self, site: usize) -> Self {
        let s = match self.support {
            Some(s) if s.contains(site) => s,
            _ => return GridFunction::constant(&self.grid, 0.0),
        };
        let ax = s.axis_of(site);
        let mut out = ArrayD::zeros(self.values.raw_dim());
        for (i, row) in self.grid.stencil().iter().enumerate() {
            let mut lane = out.index_axis_mut(Axis(ax), i);
            for &(j, w) in row {
                lane.scaled_add(w, &self.values.index_axis(Axis(ax), j));
            }
        }
        GridFunction {
            grid: Arc::clone(&self.grid),
            support: Some(s),
            values: out,
            nonneg: false,
        }
    }

    /// `sum_{i in sites} |d f / d x_i|^q` as a function on the same support.
    pub fn q_gradient_norm(&self, sites: &[usize], q: f64) -> Result<Self> {
        let mut acc = GridFunction::constant(&self.grid, 0.0);
        for &i in sites {
            let g = self.site_gradient(i).abs_powf(q);
            acc = acc.add(&g)?;
        }
        acc.nonneg = true;
        Ok(acc)
    }

    /// Slices the function at a fixed node index of one support coordinate.
    pub fn fix_site(&self, site: usize, node_index: usize) -> Self {
        let s = match self.support {
            Some(s) if s.contains(site) => s,
            _ => return self.clone(),
        };
        let ax = s.axis_of(site);
        let values = self.values.index_axis(Axis(ax), node_index).to_owned();
        if s.len() == 1 {
            let v = values[IxDyn(&[])];
            return GridFunction::constant(&self.grid, v);
        }
        // Keep the interval contiguous: an interior slice leaves the function
        // constant in the removed coordinate, so re-insert it as a unit axis
        // broadcast unless the site sits at an end of the support.
        if site == s.lo {
            GridFunction {
                grid: Arc::clone(&self.grid),
                support: Some(SiteInterval::new(s.lo + 1, s.hi)),
                nonneg: self.nonneg,
                values,
            }
        } else if site == s.hi {
            GridFunction {
                grid: Arc::clone(&self.grid),
                support: Some(SiteInterval::new(s.lo, s.hi - 1)),
                nonneg: self.nonneg,
                values,
            }
        } else {
            let m = self.grid.len();
            let mut with_one: Vec<usize> = values.shape().to_vec();
            with_one.insert(ax, 1);
            let full: Vec<usize> = vec![m; s.len()];
            let v = values
                .view()
                .into_shape_with_order(IxDyn(&with_one))
                .expect("unit axis insertion")
                .broadcast(IxDyn(&full))
                .expect("broadcast over removed axis")
                .to_owned();
            GridFunction {
                grid: Arc::clone(&self.grid),
                support: Some(s),
                nonneg: self.nonneg,
                values: v,
            }
        }
    }

    /// Shrinks the support to the minimal interval by dropping boundary
    /// coordinates the function is (exactly) constant in.
    pub fn shrink(&self) -> Self {
        let mut f = self.clone();
        loop {
            let s = match f.support {
                None => return f,
                Some(s) => s,
            };
            if axis_is_constant(&f.values, 0) {
                let values = f.values.index_axis(Axis(0), 0).to_owned();
                if s.len() == 1 {
                    let v = values[IxDyn(&[])];
                    return GridFunction {
                        grid: f.grid,
                        support: None,
                        values: scalar(v),
                        nonneg: f.nonneg,
                    };
                }
                f = GridFunction {
                    grid: f.grid,
                    support: Some(SiteInterval::new(s.lo + 1, s.hi)),
                    values,
                    nonneg: f.nonneg,
                };
                continue;
            }
            let last = s.len() - 1;
            if axis_is_constant(&f.values, last) {
                let values = f.values.index_axis(Axis(last), 0).to_owned();
                f = GridFunction {
                    grid: f.grid,
                    support: Some(SiteInterval::new(s.lo, s.hi - 1)),
                    values,
                    nonneg: f.nonneg,
                };
                continue;
            }
            return f;
        }
    }
}

fn axis_is_constant(values: &ArrayD<f64>, ax: usize) -> bool {
    let n = values.shape()[ax];
    if n <= 1 {
        return true;
    }
    let first = values.index_axis(Axis(ax), 0);
    (1..n).all(|k| values.index_axis(Axis(ax), k) == first)
}

pub(crate) fn check_budget(grid: &Grid, n_axes: usize) -> Result<()> {
    let budget = grid.element_budget();
    let mut needed: usize = 1;
    for _ in 0..n_axes {
        needed = match needed.checked_mul(grid.len()) {
            Some(v) if v <= budget => v,
            _ => {
                return Err(Error::Budget {
                    needed: grid.len().pow(n_axes as u32),
                    budget,
                })
            }
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_grid_with_budget, Scheme};

    fn grid(l: f64, m: usize) -> Arc<Grid> {
        build_grid(l, m, Scheme::UniformTrapezoid).unwrap()
    }

    #[test]
    fn linear_gradient_is_one() {
        let g = grid(2.0, 41);
        let f = GridFunction::coordinate(&g, 3);
        let df = f.site_gradient(3);
        for v in df.values().iter() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_gradient_is_zero() {
        let g = grid(2.0, 11);
        let f = GridFunction::constant(&g, 4.2);
        let df = f.site_gradient(1);
        assert_eq!(df.constant_value(), Some(0.0));
    }

    #[test]
    fn gradient_of_square() {
        let g = grid(2.0, 101);
        let f = GridFunction::from_fn(&g, SiteInterval::single(1), |c| c[0] * c[0]).unwrap();
        let df = f.site_gradient(1);
        for (i, x) in g.nodes().iter().enumerate() {
            let got = df.values()[IxDyn(&[i])];
            assert!((got - 2.0 * x).abs() < 1e-8, "node {i}: {got} vs {}", 2.0 * x);
        }
    }

    #[test]
    fn product_gradient_factorizes() {
        let g = grid(1.5, 61);
        let f = GridFunction::from_fn(&g, SiteInterval::new(2, 3), |c| {
            (c[0] * c[0]) * (1.0 + 0.5 * c[1])
        })
        .unwrap();
        let df = f.site_gradient(2);
        for (i, x) in g.nodes().iter().enumerate() {
            for (j, y) in g.nodes().iter().enumerate() {
                let expect = 2.0 * x * (1.0 + 0.5 * y);
                let got = df.values()[IxDyn(&[i, j])];
                assert!((got - expect).abs() < 2e-3, "{got} vs {expect}");
            }
        }
    }

    #[test]
    fn q_gradient_norm_examples() {
        let g = grid(2.0, 41);
        let f = GridFunction::from_fn(&g, SiteInterval::new(1, 2), |c| c[0] + c[1]).unwrap();
        let n = f.q_gradient_norm(&[1, 2], 2.0).unwrap();
        for v in n.values().iter() {
            assert!((v - 2.0).abs() < 1e-9);
        }
        let c = GridFunction::constant(&g, 7.0);
        let n = c.q_gradient_norm(&[1, 2, 3], 2.0).unwrap();
        assert_eq!(n.constant_value(), Some(0.0));
    }

    #[test]
    fn q_gradient_homogeneous() {
        let g = grid(2.0, 31);
        let f = GridFunction::from_fn(&g, SiteInterval::new(1, 2), |c| {
            c[0].sin() + c[1] * c[0]
        })
        .unwrap();
        let q = 1.7;
        let lam: f64 = 2.5;
        let a = f.scale(lam).q_gradient_norm(&[1, 2], q).unwrap();
        let b = f.q_gradient_norm(&[1, 2], q).unwrap().scale(lam.powf(q));
        assert!(a.max_abs_diff(&b) < 1e-12 * b.max_abs().max(1.0));
    }

    #[test]
    fn extend_and_shrink_round_trip() {
        let g = grid(1.0, 5);
        let f = GridFunction::from_fn(&g, SiteInterval::new(2, 2), |c| c[0].exp()).unwrap();
        let wide = f.extend_to(SiteInterval::new(1, 4)).unwrap();
        assert_eq!(wide.support(), Some(SiteInterval::new(1, 4)));
        let back = wide.shrink();
        assert_eq!(back.support(), Some(SiteInterval::new(2, 2)));
        assert!(back.max_abs_diff(&f) == 0.0);
    }

    #[test]
    fn budget_enforced() {
        let g = build_grid_with_budget(1.0, 10, Scheme::UniformTrapezoid, 1000).unwrap();
        let err = GridFunction::from_fn(&g, SiteInterval::new(1, 4), |_| 0.0);
        assert!(matches!(err, Err(Error::Budget { .. })));
    }

    #[test]
    fn zip_aligns_supports() {
        let g = grid(1.0, 4);
        let a = GridFunction::coordinate(&g, 1);
        let b = GridFunction::coordinate(&g, 3);
        let s = a.add(&b).unwrap();
        assert_eq!(s.support(), Some(SiteInterval::new(1, 3)));
        let got = s.values()[IxDyn(&[0, 2, 3])];
        assert!((got - (g.nodes()[0] + g.nodes()[3])).abs() < 1e-15);
    }
}
