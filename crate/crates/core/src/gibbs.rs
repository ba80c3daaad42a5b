//! Discretized local specifications, the finite-chain Gibbs measure via
//! transfer contraction, conditional-expectation operators, and consistency
//! checks.
//!
//! Everything here is driven by one engine: a chain of per-site weight
//! vectors and per-edge kernels whose contractions yield normalizations,
//! marginals, and exact conditional expectations. Boltzmann factors span
//! hundreds of orders of magnitude for steep phases, so factors and messages
//! are kept max-normalized with their log scales tracked separately.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::gridfn::{check_budget, GridFunction, SiteInterval};
use crate::model::{EdgeConvention, LatticeModel};
use crate::tensor;
use ndarray::{Array1, Array2, ArrayD, IxDyn};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

/// A probability measure on the node tuples of a site interval. The mass
/// tensor incorporates the quadrature weights and sums to one.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    grid: Arc<Grid>,
    support: SiteInterval,
    mass: ArrayD<f64>,
}

impl DiscreteMeasure {
    pub fn from_mass(grid: &Arc<Grid>, support: SiteInterval, mass: ArrayD<f64>) -> Result<Self> {
        let total: f64 = mass.sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Degenerate(format!("measure mass sums to {total}")));
        }
        Ok(DiscreteMeasure { grid: Arc::clone(grid), support, mass: mass / total })
    }

    /// A single-site probability from unnormalized density values.
    pub fn from_density_values(grid: &Arc<Grid>, site: usize, density: &[f64]) -> Result<Self> {
        let mass: Vec<f64> = density
            .iter()
            .zip(grid.weights())
            .map(|(d, w)| d * w)
            .collect();
        Self::from_mass(
            grid,
            SiteInterval::single(site),
            ArrayD::from_shape_vec(IxDyn(&[grid.len()]), mass).expect("shape"),
        )
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn support(&self) -> SiteInterval {
        self.support
    }

    pub fn mass(&self) -> &ArrayD<f64> {
        &self.mass
    }

    pub fn sites(&self) -> Vec<usize> {
        self.support.sites().collect()
    }

    /// Density values against quadrature: mass divided by the weight product.
    pub fn density(&self) -> GridFunction {
        let w = self.grid.weights();
        let mut values = self.mass.clone();
        for (idx, v) in values.indexed_iter_mut() {
            let mut wp = 1.0;
            for a in 0..self.support.len() {
                wp *= w[idx[a]];
            }
            *v /= wp;
        }
        GridFunction::from_values(&self.grid, self.support, values)
    }

    /// Expectation of a grid function whose support lies inside the measure's.
    pub fn expect(&self, f: &GridFunction) -> Result<f64> {
        if let Some(c) = f.constant_value() {
            return Ok(c);
        }
        let fs = f.support().expect("non-constant function has support");
        if fs.lo < self.support.lo || fs.hi > self.support.hi {
            return Err(Error::Shape(format!(
                "function support [{}, {}] escapes the measure support [{}, {}]",
                fs.lo, fs.hi, self.support.lo, self.support.hi
            )));
        }
        let fe = f.extend_to(self.support)?;
        Ok((&self.mass * fe.values()).sum())
    }

    /// `mu(|f - mu f|^q)`.
    pub fn centered_moment(&self, f: &GridFunction, q: f64) -> Result<f64> {
        let mean = self.expect(f)?;
        self.expect(&f.add_scalar(-mean).abs_powf(q))
    }

    pub fn variance(&self, f: &GridFunction) -> Result<f64> {
        self.centered_moment(f, 2.0)
    }

    pub fn mean_site(&self, site: usize) -> Result<f64> {
        self.expect(&GridFunction::coordinate(&self.grid, site))
    }
}

enum Msg {
    None,
    Vec(Array1<f64>),
    Mat(Array2<f64>),
}

/// A finite chain of max-normalized site factors and edge kernels over
/// consecutive global sites.
pub(crate) struct FactorChain {
    grid: Arc<Grid>,
    sites: SiteInterval,
    psi: Vec<Array1<f64>>,
    tmat: Vec<Array2<f64>>,
    /// forward messages, normalized, including the site factor at their site
    fwd: Vec<Array1<f64>>,
    /// backward messages, normalized, including the site factor at their site
    bwd: Vec<Array1<f64>>,
    log_z: f64,
}

impl FactorChain {
    /// Builds the chain from log-domain factors. `log_psi[k]` must already
    /// contain the quadrature weight; `log_t[k]` couples local sites k, k+1.
    pub(crate) fn new(
        grid: &Arc<Grid>,
        sites: SiteInterval,
        log_psi: Vec<Array1<f64>>,
        log_t: Vec<Array2<f64>>,
    ) -> Result<Self> {
        let n = sites.len();
        assert_eq!(log_psi.len(), n);
        assert_eq!(log_t.len(), n - 1);
        let mut psi = Vec::with_capacity(n);
        let mut log_psi_scale = Vec::with_capacity(n);
        for lp in &log_psi {
            let mx = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !mx.is_finite() {
                return Err(Error::Degenerate(
                    "site factor vanished on the whole grid; enlarge L or rescale the phase".into(),
                ));
            }
            psi.push(lp.mapv(|v| (v - mx).exp()));
            log_psi_scale.push(mx);
        }
        let mut tmat = Vec::with_capacity(n.saturating_sub(1));
        let mut log_t_scale = Vec::with_capacity(n.saturating_sub(1));
        for lt in &log_t {
            let mx = lt.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !mx.is_finite() {
                return Err(Error::Degenerate("edge kernel vanished on the whole grid".into()));
            }
            tmat.push(lt.mapv(|v| (v - mx).exp()));
            log_t_scale.push(mx);
        }

        // forward / backward sweeps with per-step max rescaling
        let mut fwd = Vec::with_capacity(n);
        let mut fwd_scale = Vec::with_capacity(n);
        fwd.push(psi[0].clone());
        fwd_scale.push(log_psi_scale[0]);
        for k in 0..n - 1 {
            let prev = &fwd[k];
            let mut next = prev.dot(&tmat[k]);
            next *= &psi[k + 1];
            let mx = next.iter().cloned().fold(0.0, f64::max);
            if mx <= 0.0 || !mx.is_finite() {
                return Err(Error::Degenerate(format!(
                    "forward message vanished at local site {}", k + 1
                )));
            }
            next /= mx;
            fwd_scale.push(fwd_scale[k] + log_t_scale[k] + log_psi_scale[k + 1] + mx.ln());
            fwd.push(next);
        }
        let mut bwd = vec![Array1::zeros(0); n];
        let mut bwd_scale = vec![0.0; n];
        bwd[n - 1] = psi[n - 1].clone();
        bwd_scale[n - 1] = log_psi_scale[n - 1];
        for k in (0..n - 1).rev() {
            let mut prev = tmat[k].dot(&bwd[k + 1]);
            prev *= &psi[k];
            let mx = prev.iter().cloned().fold(0.0, f64::max);
            if mx <= 0.0 || !mx.is_finite() {
                return Err(Error::Degenerate(format!(
                    "backward message vanished at local site {k}"
                )));
            }
            prev /= mx;
            bwd_scale[k] = bwd_scale[k + 1] + log_t_scale[k] + log_psi_scale[k] + mx.ln();
            bwd[k] = prev;
        }
        let z_lin: f64 = fwd[n - 1].sum();
        if !(z_lin > 0.0) || !z_lin.is_finite() {
            return Err(Error::Degenerate(format!("normalization collapsed: {z_lin}")));
        }
        let log_z = z_lin.ln() + fwd_scale[n - 1];
        let _ = bwd_scale;
        Ok(FactorChain { grid: Arc::clone(grid), sites, psi, tmat, fwd, bwd, log_z })
    }

    pub(crate) fn sites(&self) -> SiteInterval {
        self.sites
    }

    pub(crate) fn log_z(&self) -> f64 {
        self.log_z
    }

    fn local(&self, site: usize) -> usize {
        debug_assert!(self.sites.contains(site));
        site - self.sites.lo
    }

    fn n(&self) -> usize {
        self.sites.len()
    }

    /// Joint probability mass over a contiguous site window.
    pub(crate) fn marginal_mass(&self, iv: SiteInterval) -> Result<ArrayD<f64>> {
        assert!(self.sites.lo <= iv.lo && iv.hi <= self.sites.hi, "window escapes the chain");
        check_budget(&self.grid, iv.len())?;
        let a = self.local(iv.lo);
        let b = self.local(iv.hi);
        let m = self.grid.len();
        let mut t = self.fwd[a]
            .clone()
            .into_shape_with_order(IxDyn(&[m]))
            .expect("vector reshape");
        for k in a..b {
            // t(.., x_k) -> t(.., x_k, x_{k+1}) with the edge kernel and the
            // next site factor attached
            let mut shape: Vec<usize> = t.shape().to_vec();
            shape.push(m);
            let mut next = ArrayD::<f64>::zeros(IxDyn(&shape));
            let last = t.ndim() - 1;
            for (j, mut lane) in next.axis_iter_mut(ndarray::Axis(last + 1)).enumerate() {
                // lane has the shape of t; fill with t * T[:, j] * psi_{k+1}[j]
                lane.assign(&t);
                let col = self.tmat[k].column(j);
                for (i, mut sub) in lane.axis_iter_mut(ndarray::Axis(last)).enumerate() {
                    sub.mapv_inplace(|v| v * col[i] * self.psi[k + 1][j]);
                }
            }
            t = next;
            let mx = t.iter().cloned().fold(0.0, f64::max);
            if mx > 0.0 {
                t /= mx;
            }
        }
        // attach what lies right of the window
        if b < self.n() - 1 {
            let tail = self.tmat[b].dot(&self.bwd[b + 1]);
            let last = t.ndim() - 1;
            tensor::scale_axis(&mut t, last, &tail);
        }
        let total = t.sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Degenerate(format!("window mass degenerated: {total}")));
        }
        Ok(t / total)
    }

    /// Exact conditional expectation over the sites in `s`, given everything
    /// else. Runs of consecutive conditioned sites are integrated against
    /// their conditional kernels; the result picks up dependence on the
    /// neighbours of each integrated run.
    pub(crate) fn cond_expect(&self, f: &GridFunction, s: &BTreeSet<usize>) -> Result<GridFunction> {
        let fsup = match f.support() {
            None => return Ok(f.clone()),
            Some(sup) => sup,
        };
        if fsup.lo < self.sites.lo || fsup.hi > self.sites.hi {
            return Err(Error::Shape(format!(
                "function support [{}, {}] escapes the chain [{}, {}]",
                fsup.lo, fsup.hi, self.sites.lo, self.sites.hi
            )));
        }
        let runs = consecutive_runs(s, self.sites);
        let active: Vec<(usize, usize)> = runs
            .into_iter()
            .filter(|&(lo, hi)| hi >= fsup.lo && lo <= fsup.hi)
            .collect();
        if active.is_empty() {
            return Ok(f.clone());
        }

        // extended interval: the function's support plus every boundary site
        // of an active run
        let mut elo = fsup.lo;
        let mut ehi = fsup.hi;
        for &(rlo, rhi) in &active {
            if rlo > self.sites.lo {
                elo = elo.min(rlo - 1);
            }
            if rhi < self.sites.hi {
                ehi = ehi.max(rhi + 1);
            }
        }
        let ext = SiteInterval::new(elo, ehi);
        let mut t = f.extend_to(ext)?.values().to_owned();
        let mut axis_sites: Vec<usize> = ext.sites().collect();

        for &(rlo, rhi) in &active {
            let a = rlo.max(fsup.lo);
            let b = rhi.min(fsup.hi);
            let la = self.local(a);
            let lb = self.local(b);
            let lrlo = self.local(rlo);
            let lrhi = self.local(rhi);

            let left = self.left_message(lrlo, la);
            let right = self.right_message(lrhi, lb);

            let pos = |axis_sites: &Vec<usize>, site: usize| -> usize {
                axis_sites.iter().position(|&x| x == site).expect("site has an axis")
            };

            match &left {
                Msg::None => {}
                Msg::Vec(v) => tensor::scale_axis(&mut t, pos(&axis_sites, a), v),
                Msg::Mat(mm) => {
                    tensor::mul_pair(&mut t, pos(&axis_sites, rlo - 1), pos(&axis_sites, a), mm)
                }
            }
            for site in a..=b {
                let k = self.local(site);
                let ax = pos(&axis_sites, site);
                tensor::scale_axis(&mut t, ax, &self.psi[k]);
                if site < b {
                    t = tensor::contract_pair(&t, ax, pos(&axis_sites, site + 1), &self.tmat[k]);
                    axis_sites.remove(ax);
                } else {
                    match &right {
                        Msg::None => {
                            t = tensor::sum_axis(&t, ax);
                            axis_sites.remove(ax);
                        }
                        Msg::Vec(v) => {
                            t = tensor::contract_axis(
                                &t,
                                ax,
                                &(v * 1.0),
                            );
                            axis_sites.remove(ax);
                        }
                        Msg::Mat(mm) => {
                            t = tensor::contract_pair(&t, ax, pos(&axis_sites, rhi + 1), mm);
                            axis_sites.remove(ax);
                        }
                    }
                }
            }

            // normalize by the same contraction applied to the constant one
            let den = self.run_normalizer(&left, &right, la, lb);
            if den.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::Degenerate(
                    "conditional kernel normalization vanished; enlarge L or rescale".into(),
                ));
            }
            match (&left, &right) {
                (Msg::Mat(_), Msg::Mat(_)) => {
                    tensor::div_pair(
                        &mut t,
                        pos(&axis_sites, rlo - 1),
                        pos(&axis_sites, rhi + 1),
                        &den,
                    );
                }
                (Msg::Mat(_), _) => {
                    let v = den.column(0).to_owned();
                    tensor::div_axis(&mut t, pos(&axis_sites, rlo - 1), &v);
                }
                (_, Msg::Mat(_)) => {
                    let v = den.row(0).to_owned();
                    tensor::div_axis(&mut t, pos(&axis_sites, rhi + 1), &v);
                }
                _ => {
                    t.mapv_inplace(|x| x / den[(0, 0)]);
                }
            }
        }

        Ok(rebuild(&self.grid, t, &axis_sites))
    }

    /// Everything in the run strictly left of local site `a`, as a factor on
    /// `x_a` (and the left boundary coordinate when the run has one).
    fn left_message(&self, run_lo: usize, a: usize) -> Msg {
        if run_lo == 0 {
            if a == run_lo {
                return Msg::None;
            }
            let mut v = self.psi[run_lo].clone();
            for i in run_lo..a {
                v = v.dot(&self.tmat[i]);
                if i + 1 < a {
                    v *= &self.psi[i + 1];
                }
                let mx = v.iter().cloned().fold(0.0, f64::max);
                if mx > 0.0 {
                    v /= mx;
                }
            }
            Msg::Vec(v)
        } else {
            let mut m = self.tmat[run_lo - 1].clone();
            for i in run_lo..a {
                for (j, mut col) in m.axis_iter_mut(ndarray::Axis(1)).enumerate() {
                    col.mapv_inplace(|x| x * self.psi[i][j]);
                }
                m = m.dot(&self.tmat[i]);
                let mx = m.iter().cloned().fold(0.0, f64::max);
                if mx > 0.0 {
                    m /= mx;
                }
            }
            Msg::Mat(m)
        }
    }

    /// Everything in the run strictly right of local site `b`.
    fn right_message(&self, run_hi: usize, b: usize) -> Msg {
        let n = self.n();
        if run_hi == n - 1 {
            if b == run_hi {
                return Msg::None;
            }
            let mut v = self.psi[run_hi].clone();
            for i in (b..run_hi).rev() {
                v = self.tmat[i].dot(&v);
                if i > b {
                    v *= &self.psi[i];
                }
                let mx = v.iter().cloned().fold(0.0, f64::max);
                if mx > 0.0 {
                    v /= mx;
                }
            }
            Msg::Vec(v)
        } else {
            let mut m = self.tmat[run_hi].clone();
            for i in (b..run_hi).rev() {
                for (i_row, mut row) in m.axis_iter_mut(ndarray::Axis(0)).enumerate() {
                    row.mapv_inplace(|x| x * self.psi[i + 1][i_row]);
                }
                m = self.tmat[i].dot(&m);
                let mx = m.iter().cloned().fold(0.0, f64::max);
                if mx > 0.0 {
                    m /= mx;
                }
            }
            Msg::Mat(m)
        }
    }

    /// Contraction of the run kernel against the constant one, indexed by
    /// whatever boundary coordinates the run has (unit axes otherwise).
    fn run_normalizer(&self, left: &Msg, right: &Msg, la: usize, lb: usize) -> Array2<f64> {
        let m = self.grid.len();
        let mut d: Array2<f64> = match left {
            Msg::Mat(mm) => mm.clone(),
            Msg::Vec(v) => {
                let mut row = Array2::zeros((1, m));
                row.row_mut(0).assign(v);
                row
            }
            Msg::None => Array2::ones((1, m)),
        };
        for i in la..=lb {
            for (j, mut col) in d.axis_iter_mut(ndarray::Axis(1)).enumerate() {
                col.mapv_inplace(|x| x * self.psi[i][j]);
            }
            if i < lb {
                d = d.dot(&self.tmat[i]);
            }
        }
        match right {
            Msg::Mat(mm) => d.dot(mm),
            Msg::Vec(v) => {
                let col = d.dot(v);
                let mut out = Array2::zeros((d.nrows(), 1));
                out.column_mut(0).assign(&col);
                out
            }
            Msg::None => {
                let col = d.sum_axis(ndarray::Axis(1));
                let mut out = Array2::zeros((d.nrows(), 1));
                out.column_mut(0).assign(&col);
                out
            }
        }
    }

    /// Expectation under the chain's own probability.
    pub(crate) fn expect(&self, f: &GridFunction) -> Result<f64> {
        if let Some(c) = f.constant_value() {
            return Ok(c);
        }
        let sup = f.support().expect("non-constant");
        let mass = self.marginal_mass(sup)?;
        let fe = f.extend_to(sup)?;
        Ok((&mass * fe.values()).sum())
    }
}

/// Maximal runs of consecutive sites of `s` clipped to the chain.
fn consecutive_runs(s: &BTreeSet<usize>, chain: SiteInterval) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut cur: Option<(usize, usize)> = None;
    for &site in s.iter().filter(|&&x| chain.contains(x)) {
        match cur {
            Some((lo, hi)) if site == hi + 1 => cur = Some((lo, site)),
            Some(done) => {
                runs.push(done);
                cur = Some((site, site));
            }
            None => cur = Some((site, site)),
        }
    }
    if let Some(done) = cur {
        runs.push(done);
    }
    runs
}

/// Re-wraps a contraction result (axes labelled by `axis_sites`, ascending)
/// into a grid function over the covering interval, broadcasting constant
/// coordinates back in, then shrinking to the minimal interval.
fn rebuild(grid: &Arc<Grid>, t: ArrayD<f64>, axis_sites: &[usize]) -> GridFunction {
    if axis_sites.is_empty() {
        let v = t[IxDyn(&[])];
        return GridFunction::constant(grid, v);
    }
    let lo = axis_sites[0];
    let hi = *axis_sites.last().unwrap();
    let iv = SiteInterval::new(lo, hi);
    let m = grid.len();
    if axis_sites.len() == iv.len() {
        return GridFunction::from_values(grid, iv, t).shrink();
    }
    let mut with_ones: Vec<usize> = Vec::with_capacity(iv.len());
    let mut have = axis_sites.iter().peekable();
    for site in iv.sites() {
        if have.peek() == Some(&&site) {
            with_ones.push(m);
            have.next();
        } else {
            with_ones.push(1);
        }
    }
    let full: Vec<usize> = vec![m; iv.len()];
    let values = t
        .view()
        .into_shape_with_order(IxDyn(&with_ones))
        .expect("unit axis insertion")
        .broadcast(IxDyn(&full))
        .expect("broadcast")
        .to_owned();
    GridFunction::from_values(grid, iv, values).shrink()
}

/// Builds the log-domain factors of the paper-form energy on a contiguous
/// volume: site factors carry the phase, quadrature weight, and one
/// from-inside term per exterior neighbour; edge factors carry the interior
/// interaction under the configured edge convention.
fn build_factors(
    model: &LatticeModel,
    grid: &Arc<Grid>,
    lambda: SiteInterval,
    omega: &BTreeMap<usize, f64>,
) -> Result<(Vec<Array1<f64>>, Vec<Array2<f64>>)> {
    let m = grid.len();
    let nodes = grid.nodes();
    let v = model.interaction();
    let n_chain = model.n_sites();
    if lambda.hi > n_chain {
        return Err(Error::Config(format!(
            "volume [{}, {}] escapes the chain of {} sites",
            lambda.lo, lambda.hi, n_chain
        )));
    }
    let mut log_psi = Vec::with_capacity(lambda.len());
    for site in lambda.sites() {
        let mut lp = Array1::zeros(m);
        for (a, &x) in nodes.iter().enumerate() {
            let mut e = model.phase().eval(x);
            for nb in [site as isize - 1, site as isize + 1] {
                if nb >= lambda.lo as isize && nb <= lambda.hi as isize {
                    continue; // interior edge, handled by the edge kernel
                }
                let jc = model.coupling(site, nb);
                if jc == 0.0 {
                    continue;
                }
                let val = exterior_value(model, nb, omega)?;
                if let Some(z) = val {
                    e += jc * v.eval(x, z);
                }
            }
            lp[a] = grid.weights()[a].ln() - e;
        }
        log_psi.push(lp);
    }
    let mut log_t = Vec::new();
    for site in lambda.lo..lambda.hi {
        let jf = model.coupling(site, site as isize + 1);
        let jb = model.coupling(site + 1, site as isize);
        let mut lt = Array2::zeros((m, m));
        for (a, &x) in nodes.iter().enumerate() {
            for (b, &y) in nodes.iter().enumerate() {
                let mut e = jf * v.eval(x, y);
                if model.edge_convention() == EdgeConvention::Directed {
                    e += jb * v.eval(y, x);
                }
                lt[(a, b)] = -e;
            }
        }
        log_t.push(lt);
    }
    Ok((log_psi, log_t))
}

fn exterior_value(
    model: &LatticeModel,
    j: isize,
    omega: &BTreeMap<usize, f64>,
) -> Result<Option<f64>> {
    if j >= 0 {
        if let Some(v) = omega.get(&(j as usize)) {
            return Ok(Some(*v));
        }
    }
    if j == 0 {
        return Ok(model.boundary().left.value());
    }
    if j == model.n_sites() as isize + 1 {
        return Ok(model.boundary().right.value());
    }
    Err(Error::Incomplete(format!(
        "volume needs a boundary value at site {j}"
    )))
}

/// The discretized measure `E^{Lambda, omega}` on a contiguous volume with an
/// explicit boundary, normalized by quadrature.
pub struct LocalSpecification {
    lambda: SiteInterval,
    omega: BTreeMap<usize, f64>,
    chain: FactorChain,
    density: GridFunction,
    log_z: f64,
}

impl LocalSpecification {
    pub fn lambda(&self) -> SiteInterval {
        self.lambda
    }

    pub fn omega(&self) -> &BTreeMap<usize, f64> {
        &self.omega
    }

    /// Normalization of the Boltzmann factor under quadrature.
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Normalized density values over the volume.
    pub fn density(&self) -> &GridFunction {
        &self.density
    }

    pub fn measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_mass(
            self.density.grid(),
            self.lambda,
            self.chain.marginal_mass(self.lambda)?,
        )
    }

    /// Integral of `f` against the specification. Coordinates of `f` outside
    /// the volume are pinned to the boundary first.
    pub fn expect(&self, f: &GridFunction) -> Result<f64> {
        let f = self.pin_exterior(f)?;
        self.chain.expect(&f)
    }

    /// Conditional expectation over `m_subset` inside the volume: the output
    /// still depends on the remaining volume coordinates.
    pub fn cond_expect(&self, f: &GridFunction, m_subset: &BTreeSet<usize>) -> Result<GridFunction> {
        for s in m_subset {
            if !self.lambda.contains(*s) {
                return Err(Error::Config(format!(
                    "conditioned site {s} lies outside the volume"
                )));
            }
        }
        let f = self.pin_exterior(f)?;
        self.chain.cond_expect(&f, m_subset)
    }

    /// Replaces coordinates outside the volume by their boundary values at
    /// the nearest grid node.
    fn pin_exterior(&self, f: &GridFunction) -> Result<GridFunction> {
        let Some(sup) = f.support() else { return Ok(f.clone()) };
        let mut out = f.clone();
        let grid = f.grid().clone();
        for site in sup.sites() {
            if self.lambda.contains(site) {
                continue;
            }
            let v = exterior_value_of(&self.omega, site)
                .ok_or_else(|| Error::Incomplete(format!(
                    "function depends on exterior site {site} with no boundary value"
                )))?;
            out = out.fix_site(site, grid.nearest_node(v));
        }
        Ok(out.shrink())
    }
}

fn exterior_value_of(omega: &BTreeMap<usize, f64>, site: usize) -> Option<f64> {
    omega.get(&site).copied()
}

/// Builds `E^{Lambda, omega}` for a contiguous volume.
pub fn local_spec(
    model: &LatticeModel,
    grid: &Arc<Grid>,
    lambda: SiteInterval,
    omega: &BTreeMap<usize, f64>,
) -> Result<LocalSpecification> {
    check_budget(grid, lambda.len())?;
    let (log_psi, log_t) = build_factors(model, grid, lambda, omega)?;
    let chain = FactorChain::new(grid, lambda, log_psi, log_t)?;
    let mass = chain.marginal_mass(lambda)?;
    let measure = DiscreteMeasure::from_mass(grid, lambda, mass)?;
    let density = measure.density();
    let log_z = chain.log_z();
    if !log_z.is_finite() {
        return Err(Error::Degenerate(format!(
            "normalization underflowed (log Z = {log_z}); enlarge L or rescale the phase"
        )));
    }
    Ok(LocalSpecification {
        lambda,
        omega: omega.clone(),
        chain,
        density,
        log_z,
    })
}

/// The finite-chain Gibbs measure: per-site weights and per-edge kernels,
/// contracted left and right so any short window marginal is cheap.
pub struct ChainMeasure {
    model: LatticeModel,
    grid: Arc<Grid>,
    chain: FactorChain,
    marginal_cache: Mutex<BTreeMap<(usize, usize), ArrayD<f64>>>,
}

/// Builds the chain measure for the whole chain with its configured end
/// boundary.
pub fn chain_measure(model: &LatticeModel, grid: &Arc<Grid>) -> Result<ChainMeasure> {
    let lambda = SiteInterval::new(1, model.n_sites());
    let (log_psi, log_t) = build_factors(model, grid, lambda, &BTreeMap::new())?;
    let chain = FactorChain::new(grid, lambda, log_psi, log_t)?;
    Ok(ChainMeasure {
        model: model.clone(),
        grid: Arc::clone(grid),
        chain,
        marginal_cache: Mutex::new(BTreeMap::new()),
    })
}

impl ChainMeasure {
    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites()
    }

    pub fn sites(&self) -> SiteInterval {
        self.chain.sites()
    }

    pub fn log_partition(&self) -> f64 {
        self.chain.log_z()
    }

    /// Expectation under the chain measure.
    pub fn expect(&self, f: &GridFunction) -> Result<f64> {
        self.chain.expect(f)
    }

    /// `(nu |f|^q)^{1/q}`.
    pub fn lq_norm(&self, f: &GridFunction, q: f64) -> Result<f64> {
        Ok(self.expect(&f.abs_powf(q))?.max(0.0).powf(1.0 / q))
    }

    /// Exact conditional expectation over a set of sites.
    pub fn cond_expect(&self, f: &GridFunction, sites: &BTreeSet<usize>) -> Result<GridFunction> {
        self.chain.cond_expect(f, sites)
    }

    /// Conditional expectation over a single site.
    pub fn cond_expect_site(&self, f: &GridFunction, site: usize) -> Result<GridFunction> {
        self.cond_expect(f, &BTreeSet::from([site]))
    }

    /// Marginal probability over a contiguous window, cached.
    pub fn marginal(&self, iv: SiteInterval) -> Result<DiscreteMeasure> {
        {
            let cache = self.marginal_cache.lock().expect("cache lock");
            if let Some(m) = cache.get(&(iv.lo, iv.hi)) {
                return DiscreteMeasure::from_mass(&self.grid, iv, m.clone());
            }
        }
        let mass = self.chain.marginal_mass(iv)?;
        let mut cache = self.marginal_cache.lock().expect("cache lock");
        cache.insert((iv.lo, iv.hi), mass.clone());
        DiscreteMeasure::from_mass(&self.grid, iv, mass)
    }

    /// The five-site window around `k`, clipped at the chain ends.
    pub fn window(&self, k: usize) -> SiteInterval {
        let lo = k.saturating_sub(2).max(1);
        let hi = (k + 2).min(self.n_sites());
        SiteInterval::new(lo, hi)
    }

    /// Marginal of the chain measure on the window around `k`.
    pub fn window_marginal(&self, k: usize) -> Result<DiscreteMeasure> {
        self.marginal(self.window(k))
    }

    /// Smallest marginal whose support covers the support of `f`.
    pub fn measure_covering(&self, f: &GridFunction) -> Result<DiscreteMeasure> {
        match f.support() {
            None => self.marginal(SiteInterval::single(1)),
            Some(s) => self.marginal(s),
        }
    }

    /// The complement of the window around `u` within the chain.
    pub fn window_complement(&self, u: usize) -> BTreeSet<usize> {
        let w = self.window(u);
        (1..=self.n_sites()).filter(|s| !w.contains(*s)).collect()
    }
}

/// Sup-norm consistency defect of conditioning: builds `E^{Lambda, omega}`,
/// conditions it on `m_subset`, and compares the iterated integral with the
/// direct one. The discrete construction makes this an identity up to
/// floating point.
pub fn dlr_residual(
    model: &LatticeModel,
    grid: &Arc<Grid>,
    lambda: SiteInterval,
    m_subset: &BTreeSet<usize>,
    f: &GridFunction,
    omega: &BTreeMap<usize, f64>,
) -> Result<f64> {
    let spec = local_spec(model, grid, lambda, omega)?;
    let inner = spec.cond_expect(f, m_subset)?;
    let lhs = spec.expect(&inner)?;
    let rhs = spec.expect(f)?;
    Ok((lhs - rhs).abs())
}
