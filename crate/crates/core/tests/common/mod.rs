//! Brute-force full-joint oracle shared by the integration suites.
//!
//! Every probability object is rebuilt here by direct summation over all
//! node tuples of the joint Boltzmann tensor, with the energy evaluated
//! through the model alone. Nothing is shared with the transfer-contraction
//! path this oracle exists to check.

use lsqlab::gibbs::DiscreteMeasure;
use lsqlab::grid::Grid;
use lsqlab::gridfn::{GridFunction, SiteInterval};
use lsqlab::model::LatticeModel;
use ndarray::{ArrayD, Axis, IxDyn};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub struct JointOracle {
    pub grid: Arc<Grid>,
    pub n: usize,
    /// normalized joint probability over all node tuples
    pub mass: ArrayD<f64>,
}

#[allow(dead_code)]
impl JointOracle {
    pub fn build(model: &LatticeModel, grid: &Arc<Grid>) -> Self {
        let n = model.n_sites();
        let m = grid.len();
        let sites: Vec<usize> = (1..=n).collect();
        let nodes = grid.nodes().to_vec();
        let weights = grid.weights().to_vec();
        let mut mass = ArrayD::<f64>::zeros(IxDyn(&vec![m; n]));
        let mut coords = vec![0.0; n];
        for (idx, v) in mass.indexed_iter_mut() {
            let mut wp = 1.0;
            for a in 0..n {
                coords[a] = nodes[idx[a]];
                wp *= weights[idx[a]];
            }
            let h = model
                .hamiltonian(&sites, &coords, &BTreeMap::new())
                .expect("full chain needs no interior boundary");
            *v = wp * (-h).exp();
        }
        let z = mass.sum();
        assert!(z > 0.0, "oracle mass degenerated");
        mass /= z;
        JointOracle { grid: Arc::clone(grid), n, mass }
    }

    pub fn full_interval(&self) -> SiteInterval {
        SiteInterval::new(1, self.n)
    }

    pub fn expect(&self, f: &GridFunction) -> f64 {
        if let Some(c) = f.constant_value() {
            return c;
        }
        let fe = f.extend_to(self.full_interval()).unwrap();
        (&self.mass * fe.values()).sum()
    }

    /// Conditional expectation over the sites in `s`, given everything else,
    /// broadcast back to the full joint shape.
    pub fn cond_expect_full(&self, f: &GridFunction, s: &BTreeSet<usize>) -> ArrayD<f64> {
        let m = self.grid.len();
        let fe = f.extend_to(self.full_interval()).unwrap();
        let mut num = &self.mass * fe.values();
        let mut den = self.mass.clone();
        let mut axes: Vec<usize> = s.iter().map(|site| site - 1).collect();
        axes.sort_unstable();
        for ax in axes.iter().rev() {
            num = num.sum_axis(Axis(*ax));
            den = den.sum_axis(Axis(*ax));
        }
        let cond = &num / &den;
        let mut with_ones: Vec<usize> = Vec::with_capacity(self.n);
        for site in 1..=self.n {
            with_ones.push(if s.contains(&site) { 1 } else { m });
        }
        cond.into_shape_with_order(IxDyn(&with_ones))
            .unwrap()
            .broadcast(IxDyn(&vec![m; self.n]))
            .unwrap()
            .to_owned()
    }

    /// Wraps the broadcast conditional as a grid function on the full chain.
    pub fn cond_expect_fn(&self, f: &GridFunction, s: &BTreeSet<usize>) -> GridFunction {
        GridFunction::from_values(&self.grid, self.full_interval(), self.cond_expect_full(f, s))
    }

    /// Max-norm disagreement between a library conditional and the oracle.
    pub fn cond_diff(&self, lib: &GridFunction, f: &GridFunction, s: &BTreeSet<usize>) -> f64 {
        let o = self.cond_expect_full(f, s);
        let le = lib.extend_to(self.full_interval()).unwrap();
        o.iter()
            .zip(le.values().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Marginal probability over a window by direct summation.
    pub fn marginal(&self, iv: SiteInterval) -> ArrayD<f64> {
        let mut t = self.mass.clone();
        // sum the right axes first so indices stay valid
        for site in (iv.hi + 1..=self.n).rev() {
            t = t.sum_axis(Axis(site - 1));
        }
        for site in (1..iv.lo).rev() {
            t = t.sum_axis(Axis(site - 1));
        }
        t
    }

    pub fn marginal_measure(&self, iv: SiteInterval) -> DiscreteMeasure {
        DiscreteMeasure::from_mass(&self.grid, iv, self.marginal(iv)).unwrap()
    }

    /// `(nu |f - nu f|^q)^{1/q}` by direct summation.
    pub fn lq_distance_to_mean(&self, f: &GridFunction, q: f64) -> f64 {
        let mean = self.expect(f);
        self.expect(&f.add_scalar(-mean).abs_powf(q)).max(0.0).powf(1.0 / q)
    }
}
