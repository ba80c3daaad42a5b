//! Entropy, q-Dirichlet energy, L^q distances, covariance, exponential
//! moments, and Spectral-Gap-q / Log-Sobolev-q constant estimation for
//! discretized measures.
//!
//! Constants come in two flavours. For q = 2 the spectral gap has an eigen
//! characterization: the smallest nonzero eigenvalue of the weighted discrete
//! Dirichlet form against the variance form. Everything else is estimated
//! from below by normalized projected gradient ascent on the Rayleigh ratio,
//! started from a bank of seeds; the returned constant is certified by its
//! witness function.

use crate::error::{Error, Result};
use crate::gibbs::DiscreteMeasure;
use crate::grid::Grid;
use crate::gridfn::GridFunction;
use ndarray::{ArrayD, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// `mu(g log g) - mu(g) log mu(g)` with the `0 log 0 = 0` convention.
///
/// Returns 0 when `mu(g) = 0`. Entries of `g` below `-1e-14` are a domain
/// error; tiny negative noise is clamped.
pub fn entropy(mu: &DiscreteMeasure, g: &GridFunction) -> Result<f64> {
    let g = g.clone().assert_nonneg(1e-14)?;
    let mg = mu.expect(&g)?;
    if mg <= 0.0 {
        return Ok(0.0);
    }
    let glogg = g.map(|v| if v > 0.0 { v * v.ln() } else { 0.0 });
    Ok(mu.expect(&glogg)? - mg * mg.ln())
}

/// `mu(sum_{i in sites} |d f/d x_i|^q)`.
pub fn dirichlet_q(mu: &DiscreteMeasure, f: &GridFunction, sites: &[usize], q: f64) -> Result<f64> {
    mu.expect(&f.q_gradient_norm(sites, q)?)
}

/// `mu(f g) - mu(f) mu(g)`.
pub fn covariance(mu: &DiscreteMeasure, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    Ok(mu.expect(&f.mul(g)?)? - mu.expect(f)? * mu.expect(g)?)
}

/// `log mu(e^{s g})`, accumulated as a log-sum-exp so large exponents cannot
/// overflow. Callers receive the log-moment.
pub fn exp_moment(mu: &DiscreteMeasure, g: &GridFunction, s: f64) -> Result<f64> {
    if g.values().iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("exponential moment of a NaN integrand".into()));
    }
    let ge = g.extend_to(mu.support())?;
    let mut mx = f64::NEG_INFINITY;
    let mass = mu.mass();
    let gv = ge.values();
    for (p, gx) in mass.iter().zip(gv.iter()) {
        if *p > 0.0 {
            mx = mx.max(p.ln() + s * gx);
        }
    }
    if !mx.is_finite() {
        return Err(Error::Degenerate("empty support in exponential moment".into()));
    }
    let mut acc = 0.0;
    for (p, gx) in mass.iter().zip(gv.iter()) {
        if *p > 0.0 {
            acc += (p.ln() + s * gx - mx).exp();
        }
    }
    Ok(mx + acc.ln())
}

/// Which inequality an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InequalityKind {
    LogSobolevQ,
    SpectralGapQ,
}

impl InequalityKind {
    pub fn label(&self) -> &'static str {
        match self {
            InequalityKind::LogSobolevQ => "lsq",
            InequalityKind::SpectralGapQ => "sgq",
        }
    }
}

/// Route for the spectral-gap constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgMethod {
    Eigen,
    Ascent,
}

/// Ascent controls. The defaults keep runs deterministic at desk scale.
#[derive(Debug, Clone)]
pub struct AscentParams {
    pub step: f64,
    pub n_seeds: usize,
    pub max_iter: usize,
    /// relative ratio change below which a seed counts as converged
    pub rel_tol: f64,
    pub rng_seed: u64,
}

impl Default for AscentParams {
    fn default() -> Self {
        AscentParams { step: 0.1, n_seeds: 12, max_iter: 500, rel_tol: 1e-9, rng_seed: 17 }
    }
}

impl AscentParams {
    pub fn with_iters(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_seeds(mut self, n: usize) -> Self {
        self.n_seeds = n;
        self
    }
}

/// A certified lower estimate of an inequality constant.
///
/// `constant_lower` is always reproduced by re-evaluating the Rayleigh ratio
/// of `witness`; `constant_eigen` carries the eigen-route value when one
/// exists (spectral gap at q = 2).
#[derive(Debug, Clone)]
pub struct InequalityEstimate {
    pub kind: InequalityKind,
    pub q: f64,
    pub constant_lower: f64,
    pub witness: GridFunction,
    pub constant_eigen: Option<f64>,
    pub iterations: usize,
    pub seeds: usize,
    pub restarts: usize,
    pub converged: bool,
}

impl InequalityEstimate {
    /// One-line report record.
    pub fn report_record(&self) -> String {
        format!(
            "{{kind: {}, q: {:.6}, constant_lower: {:.9e}, eigen_value: {}, seeds: {}, iterations: {}, converged: {}}}",
            self.kind.label(),
            self.q,
            self.constant_lower,
            match self.constant_eigen {
                Some(v) => format!("{v:.9e}"),
                None => "none".to_string(),
            },
            self.seeds,
            self.iterations,
            self.converged,
        )
    }
}

/// Rayleigh ratio of the Log-Sobolev-q inequality for a given function.
pub fn lsq_ratio(mu: &DiscreteMeasure, f: &GridFunction, q: f64) -> Result<f64> {
    let ent = entropy(mu, &f.abs_powf(q))?;
    let dir = dirichlet_q(mu, f, &mu.sites(), q)?;
    if dir <= 0.0 {
        return Ok(f64::NAN);
    }
    Ok(ent / dir)
}

/// Rayleigh ratio of the Spectral-Gap-q inequality for a given function.
pub fn sgq_ratio(mu: &DiscreteMeasure, f: &GridFunction, q: f64) -> Result<f64> {
    let num = mu.centered_moment(f, q)?;
    let dir = dirichlet_q(mu, f, &mu.sites(), q)?;
    if dir <= 0.0 {
        return Ok(f64::NAN);
    }
    Ok(num / dir)
}

/// Lower estimate of the Log-Sobolev-q constant by seeded ascent.
pub fn ls_constant(mu: &DiscreteMeasure, q: f64, params: &AscentParams) -> Result<InequalityEstimate> {
    check_q(q)?;
    ascent_estimate(mu, q, InequalityKind::LogSobolevQ, params, None)
}

/// Spectral-Gap-q constant: eigen route (q = 2 only) or ascent lower bound.
pub fn sg_constant(
    mu: &DiscreteMeasure,
    q: f64,
    method: SgMethod,
    params: &AscentParams,
) -> Result<InequalityEstimate> {
    check_q(q)?;
    match method {
        SgMethod::Ascent => ascent_estimate(mu, q, InequalityKind::SpectralGapQ, params, None),
        SgMethod::Eigen => {
            if (q - 2.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "the eigen route needs q = 2, got q = {q}"
                )));
            }
            let (lambda1, witness) = sg2_eigen(mu)?;
            let eigen = 1.0 / lambda1;
            // certify the eigenvector through the ratio functional as well
            let mut est = ascent_estimate(
                mu,
                q,
                InequalityKind::SpectralGapQ,
                &params.clone().with_seeds(2).with_iters(params.max_iter.min(120)),
                Some(witness),
            )?;
            est.constant_eigen = Some(eigen);
            Ok(est)
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::Config(format!("q must lie in (1, 2], got {q}")));
    }
    Ok(())
}

/// Smallest nonzero eigenvalue of the conservative two-point Dirichlet form
/// against the variance form, plus the corresponding eigenfunction.
///
/// The two-point (finite-volume) form is used here instead of the wide
/// stencil: central differences annihilate the odd-even mode, which would
/// inject spurious near-zero eigenvalues at the bottom of the spectrum.
fn sg2_eigen(mu: &DiscreteMeasure) -> Result<(f64, GridFunction)> {
    let grid = mu.grid().clone();
    let m = grid.len();
    let k = mu.support().len();
    let dim: usize = mu.mass().len();
    if dim > 4000 {
        return Err(Error::Config(format!(
            "eigen route would need a dense {dim}x{dim} solve; use the ascent method"
        )));
    }
    let p: Vec<f64> = mu.mass().iter().cloned().collect();
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    // nodes carrying less than 1e-13 of the peak mass contribute nothing to
    // either quadratic form but make the whitened matrix stiff enough to
    // poison the bottom of the spectrum
    let keep_tol = pmax * 1e-13;
    let keep: Vec<usize> = (0..dim).filter(|&i| p[i] > keep_tol).collect();
    let keep_pos: std::collections::HashMap<usize, usize> =
        keep.iter().enumerate().map(|(a, &i)| (i, a)).collect();
    let nk = keep.len();
    if nk < 3 {
        return Err(Error::Degenerate("measure support too thin for the eigen route".into()));
    }

    // row-major strides of the mass tensor
    let mut strides = vec![1usize; k];
    for a in (0..k.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * m;
    }
    let w = grid.weights();
    let nodes = grid.nodes();

    let mut a_mat = nalgebra::DMatrix::<f64>::zeros(nk, nk);
    for ax in 0..k {
        let stride = strides[ax];
        let outer: usize = dim / m;
        for lane in 0..outer {
            let block = stride * m;
            let base = (lane / stride) * block + (lane % stride);
            for j in 0..m - 1 {
                let i0 = base + j * stride;
                let i1 = i0 + stride;
                let (Some(&r0), Some(&r1)) = (keep_pos.get(&i0), keep_pos.get(&i1)) else {
                    continue;
                };
                let h = nodes[j + 1] - nodes[j];
                let c = (p[i0] / w[j] + p[i1] / w[j + 1]) / (2.0 * h);
                a_mat[(r0, r0)] += c;
                a_mat[(r1, r1)] += c;
                a_mat[(r0, r1)] -= c;
                a_mat[(r1, r0)] -= c;
            }
        }
    }
    // symmetric whitening by the mass
    let sqrtp: Vec<f64> = keep.iter().map(|&i| p[i].sqrt()).collect();
    for r in 0..nk {
        for c in 0..nk {
            a_mat[(r, c)] /= sqrtp[r] * sqrtp[c];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(a_mat);
    let mut order: Vec<usize> = (0..nk).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // the constant mode is an exact null vector, so the gap eigenvalue is the
    // second-smallest; anything else at the bottom means degeneracy
    let idx1 = order[1];
    let lambda1 = eig.eigenvalues[idx1];
    if !(lambda1 > 0.0) || eig.eigenvalues[order[0]].abs() > 1e-6 * lambda1 {
        return Err(Error::Degenerate(format!(
            "bottom of the spectrum is not a clean null mode: {:.3e}, {:.3e}",
            eig.eigenvalues[order[0]],
            lambda1
        )));
    }

    // back-transform the eigenvector into function values
    let mut vals = vec![0.0; dim];
    for (a, &i) in keep.iter().enumerate() {
        vals[i] = eig.eigenvectors[(a, idx1)] / sqrtp[a];
    }
    let shape: Vec<usize> = vec![m; k];
    let values = ArrayD::from_shape_vec(ndarray::IxDyn(&shape), vals).expect("shape");
    let witness = GridFunction::from_values(&grid, mu.support(), values);
    Ok((lambda1, witness))
}

struct RayleighCtx<'a> {
    mu: &'a DiscreteMeasure,
    q: f64,
    kind: InequalityKind,
    axes: Vec<usize>,
    grid: &'a Grid,
}

impl<'a> RayleighCtx<'a> {
    fn new(mu: &'a DiscreteMeasure, q: f64, kind: InequalityKind) -> Self {
        let axes: Vec<usize> = (0..mu.support().len()).collect();
        RayleighCtx { mu, q, kind, axes, grid: mu.grid() }
    }

    fn dirichlet(&self, f: &ArrayD<f64>) -> (f64, Vec<ArrayD<f64>>) {
        let mut total = 0.0;
        let mut grads = Vec::with_capacity(self.axes.len());
        for &ax in &self.axes {
            let g = apply_stencil(self.grid, f, ax);
            total += (self.mu.mass() * &g.mapv(|v| v.abs().powf(self.q))).sum();
            grads.push(g);
        }
        (total, grads)
    }

    fn ratio(&self, f: &ArrayD<f64>) -> f64 {
        let (den, _) = self.dirichlet(f);
        if den <= 0.0 {
            return f64::NAN;
        }
        self.numerator(f) / den
    }

    fn numerator(&self, f: &ArrayD<f64>) -> f64 {
        let p = self.mu.mass();
        let q = self.q;
        match self.kind {
            InequalityKind::SpectralGapQ => {
                let mean = (p * f).sum();
                f.iter()
                    .zip(p.iter())
                    .map(|(v, pp)| pp * (v - mean).abs().powf(q))
                    .sum()
            }
            InequalityKind::LogSobolevQ => {
                let mut mg = 0.0;
                let mut glg = 0.0;
                for (v, pp) in f.iter().zip(p.iter()) {
                    let g = v.abs().powf(q);
                    mg += pp * g;
                    if g > 0.0 {
                        glg += pp * g * g.ln();
                    }
                }
                if mg <= 0.0 {
                    0.0
                } else {
                    glg - mg * mg.ln()
                }
            }
        }
    }

    /// Ratio together with its gradient in the function values.
    fn ratio_and_grad(&self, f: &ArrayD<f64>) -> (f64, ArrayD<f64>) {
        let p = self.mu.mass();
        let q = self.q;
        let (den, site_grads) = self.dirichlet(f);
        if den <= 0.0 {
            return (f64::NAN, ArrayD::zeros(f.raw_dim()));
        }
        let num = self.numerator(f);
        let ratio = num / den;

        let mut grad_num = ArrayD::zeros(f.raw_dim());
        match self.kind {
            InequalityKind::SpectralGapQ => {
                let mean = (p * f).sum();
                let s = f.mapv(|v| {
                    let d = v - mean;
                    d.signum() * d.abs().powf(q - 1.0)
                });
                let ps_sum = (p * &s).sum();
                ndarray::Zip::from(&mut grad_num)
                    .and(p)
                    .and(&s)
                    .for_each(|g, &pp, &sv| *g = q * pp * (sv - ps_sum));
            }
            InequalityKind::LogSobolevQ => {
                let mut mg = 0.0;
                for (v, pp) in f.iter().zip(p.iter()) {
                    mg += pp * v.abs().powf(q);
                }
                let lmg = if mg > 0.0 { mg.ln() } else { 0.0 };
                ndarray::Zip::from(&mut grad_num)
                    .and(p)
                    .and(f)
                    .for_each(|gr, &pp, &v| {
                        let g = v.abs().powf(q);
                        *gr = if g > 0.0 {
                            pp * (g.ln() - lmg) * q * v.signum() * v.abs().powf(q - 1.0)
                        } else {
                            0.0
                        };
                    });
            }
        }

        let mut grad_den = ArrayD::zeros(f.raw_dim());
        for (&ax, gax) in self.axes.iter().zip(site_grads.iter()) {
            let weighted = ndarray::Zip::from(gax)
                .and(p)
                .map_collect(|&gv, &pp| pp * q * gv.signum() * gv.abs().powf(q - 1.0));
            grad_den += &apply_stencil_adjoint(self.grid, &weighted, ax);
        }

        let grad = ndarray::Zip::from(&grad_num)
            .and(&grad_den)
            .map_collect(|&gn, &gd| (gn - ratio * gd) / den);
        (ratio, grad)
    }
}

/// `out[.., i, ..] = sum_j stencil[i][j] t[.., j, ..]` along `ax`.
fn apply_stencil(grid: &Grid, t: &ArrayD<f64>, ax: usize) -> ArrayD<f64> {
    let mut out = ArrayD::zeros(t.raw_dim());
    for (i, row) in grid.stencil().iter().enumerate() {
        let mut lane = out.index_axis_mut(Axis(ax), i);
        for &(j, w) in row {
            lane.scaled_add(w, &t.index_axis(Axis(ax), j));
        }
    }
    out
}

/// Adjoint of `apply_stencil`: `out[.., j, ..] += stencil[i][j] t[.., i, ..]`.
fn apply_stencil_adjoint(grid: &Grid, t: &ArrayD<f64>, ax: usize) -> ArrayD<f64> {
    let mut out = ArrayD::zeros(t.raw_dim());
    for (i, row) in grid.stencil().iter().enumerate() {
        let lane = t.index_axis(Axis(ax), i);
        for &(j, w) in row {
            out.index_axis_mut(Axis(ax), j).scaled_add(w, &lane);
        }
    }
    out
}

/// Seed bank: coordinates, odd polynomials (partial sums of the sinh series),
/// site sums, and seeded random smooth functions.
fn seed_bank(mu: &DiscreteMeasure, params: &AscentParams) -> Vec<ArrayD<f64>> {
    let grid = mu.grid().clone();
    let support = mu.support();
    let m = grid.len();
    let k = support.len();
    let shape: Vec<usize> = vec![m; k];
    let nodes = grid.nodes().to_vec();
    let mut seeds: Vec<ArrayD<f64>> = Vec::new();

    let fill = |f: &dyn Fn(&[f64]) -> f64| -> ArrayD<f64> {
        let mut t = ArrayD::zeros(ndarray::IxDyn(&shape));
        let mut coords = vec![0.0; k];
        for (idx, v) in t.indexed_iter_mut() {
            for a in 0..k {
                coords[a] = nodes[idx[a]];
            }
            *v = f(&coords);
        }
        t
    };

    let odd_series = |x: f64, terms: usize| -> f64 {
        // partial sums of x + x^3/3! + x^5/5! + ...
        let mut acc = 0.0;
        let mut term = x;
        let mut fact = 1.0;
        for n in 0..terms {
            acc += term / fact;
            term *= x * x;
            fact *= ((2 * n + 2) * (2 * n + 3)) as f64;
        }
        acc
    };

    for a in 0..k {
        seeds.push(fill(&|c: &[f64]| c[a]));
    }
    for a in 0..k {
        seeds.push(fill(&|c: &[f64]| odd_series(c[a], 4)));
    }
    for a in 0..k {
        seeds.push(fill(&|c: &[f64]| c[a].powi(3)));
    }
    if k > 1 {
        seeds.push(fill(&|c: &[f64]| c.iter().sum()));
        seeds.push(fill(&|c: &[f64]| {
            c.iter().enumerate().map(|(i, x)| if i % 2 == 0 { *x } else { -*x }).sum()
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    while seeds.len() < params.n_seeds {
        let coef: Vec<[f64; 3]> = (0..k)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.2..0.2),
                ]
            })
            .collect();
        seeds.push(fill(&|c: &[f64]| {
            c.iter()
                .zip(coef.iter())
                .map(|(x, co)| co[0] * x + co[1] * x * x + co[2] * x * x * x)
                .sum()
        }));
    }
    seeds.truncate(params.n_seeds);
    seeds
}

fn normalize(f: &mut ArrayD<f64>) {
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        f.mapv_inplace(|v| v / norm);
    }
}

/// One-pass binomial filter along every axis. Ascent directions are smoothed
/// with this before stepping: the wide difference stencil annihilates the
/// odd-even grid mode, so the raw discrete Rayleigh supremum is dominated by
/// unresolvable oscillations whose energy is bounded only by the tail mass.
/// Filtering the direction (gain zero at the alternating frequency) pins the
/// search to resolvable modes; the reported constant stays a certified lower
/// bound because every evaluation uses the unmodified functionals.
fn smooth_direction(t: &ArrayD<f64>) -> ArrayD<f64> {
    let mut cur = t.clone();
    for ax in 0..t.ndim() {
        let n = cur.shape()[ax];
        if n < 3 {
            continue;
        }
        let mut next = ArrayD::zeros(cur.raw_dim());
        for i in 0..n {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let mut lane = next.index_axis_mut(Axis(ax), i);
            lane.scaled_add(0.25, &cur.index_axis(Axis(ax), lo));
            lane.scaled_add(0.5, &cur.index_axis(Axis(ax), i));
            lane.scaled_add(0.25, &cur.index_axis(Axis(ax), hi));
        }
        cur = next;
    }
    cur
}

fn ascent_estimate(
    mu: &DiscreteMeasure,
    q: f64,
    kind: InequalityKind,
    params: &AscentParams,
    extra_seed: Option<GridFunction>,
) -> Result<InequalityEstimate> {
    let ctx = RayleighCtx::new(mu, q, kind);
    let mut seeds = seed_bank(mu, params);
    if let Some(s) = extra_seed {
        let se = s.extend_to(mu.support())?;
        seeds.insert(0, se.values().to_owned());
    }

    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_f: Option<ArrayD<f64>> = None;
    let mut total_iters = 0;
    let mut restarts = 0;
    let mut any_converged = false;

    for seed in &seeds {
        let mut f = seed.clone();
        normalize(&mut f);
        let (mut ratio, mut grad) = ctx.ratio_and_grad(&f);
        if !ratio.is_finite() {
            continue;
        }
        let mut step = params.step;
        let mut converged = false;
        for _ in 0..params.max_iter {
            total_iters += 1;
            let dir = smooth_direction(&grad);
            let gn = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn == 0.0 {
                converged = true;
                break;
            }
            let mut improved = false;
            let mut local = step;
            while local > 1e-13 {
                let mut cand = f.clone();
                cand.scaled_add(local / gn, &dir);
                normalize(&mut cand);
                let r = ctx.ratio(&cand);
                if r.is_finite() && r > ratio {
                    let rel = (r - ratio) / r.abs().max(1e-300);
                    f = cand;
                    ratio = r;
                    improved = true;
                    step = (local * 1.5).min(params.step * 10.0);
                    if rel < params.rel_tol {
                        converged = true;
                    }
                    break;
                }
                local *= 0.5;
            }
            if !improved || converged {
                converged = true;
                break;
            }
            let rg = ctx.ratio_and_grad(&f);
            ratio = rg.0;
            grad = rg.1;
        }
        if converged {
            any_converged = true;
        } else {
            restarts += 1;
        }
        if ratio > best_ratio {
            best_ratio = ratio;
            best_f = Some(f);
        }
    }

    let best_f = best_f.ok_or_else(|| {
        Error::Degenerate("every ascent seed produced a degenerate Rayleigh ratio".into())
    })?;
    let witness = GridFunction::from_values(mu.grid(), mu.support(), best_f);
    // the reported constant is the re-evaluated ratio of the stored witness
    let certified = match kind {
        InequalityKind::LogSobolevQ => lsq_ratio(mu, &witness, q)?,
        InequalityKind::SpectralGapQ => sgq_ratio(mu, &witness, q)?,
    };
    Ok(InequalityEstimate {
        kind,
        q,
        constant_lower: certified,
        witness,
        constant_eigen: None,
        iterations: total_iters,
        seeds: seeds.len(),
        restarts,
        converged: any_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{chain_measure, local_spec, DiscreteMeasure};
    use crate::grid::{build_grid, Scheme};
    use crate::gridfn::SiteInterval;
    use crate::model::{BoundaryCondition, Couplings, InteractionSpec, LatticeModel, PhaseSpec};
    use std::collections::BTreeMap;

    fn gaussian_measure(l: f64, m: usize) -> DiscreteMeasure {
        let grid = build_grid(l, m, Scheme::UniformTrapezoid).unwrap();
        let model = LatticeModel::new(
            1,
            2.0,
            PhaseSpec::custom(|x| 0.5 * x * x, |x| x),
            InteractionSpec::Quadratic,
            Couplings::Uniform(0.0),
            BoundaryCondition::free(),
        )
        .unwrap();
        local_spec(&model, &grid, SiteInterval::single(1), &BTreeMap::new())
            .unwrap()
            .measure()
            .unwrap()
    }

    #[test]
    fn entropy_of_constants_vanishes() {
        let mu = gaussian_measure(8.0, 100);
        let g = GridFunction::constant(mu.grid(), 3.0);
        assert_eq!(entropy(&mu, &g).unwrap(), 0.0);
    }

    #[test]
    fn entropy_two_point() {
        // uniform two-point measure, g = (2, 0): entropy is ln 2
        let grid = build_grid(1.0, 2, Scheme::UniformTrapezoid).unwrap();
        let mass = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&[2]), vec![0.5, 0.5]).unwrap();
        let mu = DiscreteMeasure::from_mass(&grid, SiteInterval::single(1), mass).unwrap();
        let g = GridFunction::from_values(
            &grid,
            SiteInterval::single(1),
            ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&[2]), vec![2.0, 0.0]).unwrap(),
        );
        let e = entropy(&mu, &g).unwrap();
        assert!((e - std::f64::consts::LN_2).abs() < 1e-12, "{e}");
    }

    #[test]
    fn entropy_is_one_homogeneous() {
        let mu = gaussian_measure(6.0, 80);
        let g = GridFunction::from_fn(mu.grid(), SiteInterval::single(1), |c| {
            (c[0] * 0.7).cosh()
        })
        .unwrap();
        let lam = 3.7;
        let a = entropy(&mu, &g.scale(lam)).unwrap();
        let b = lam * entropy(&mu, &g).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
    }

    #[test]
    fn entropy_nonneg() {
        let mu = gaussian_measure(6.0, 60);
        let g = GridFunction::from_fn(mu.grid(), SiteInterval::single(1), |c| {
            1.0 + 0.5 * (c[0]).sin()
        })
        .unwrap();
        assert!(entropy(&mu, &g).unwrap() > 0.0);
    }

    #[test]
    fn negative_entries_rejected() {
        let mu = gaussian_measure(6.0, 60);
        let g = GridFunction::from_fn(mu.grid(), SiteInterval::single(1), |c| c[0]).unwrap();
        assert!(entropy(&mu, &g).is_err());
    }

    #[test]
    fn dirichlet_gaussian_coordinate() {
        let mu = gaussian_measure(8.0, 400);
        let f = GridFunction::coordinate(mu.grid(), 1);
        let d = dirichlet_q(&mu, &f, &[1], 2.0).unwrap();
        assert!((d - 1.0).abs() < 1e-6, "{d}");
        let c = GridFunction::constant(mu.grid(), 5.0);
        assert_eq!(dirichlet_q(&mu, &c, &[1], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn dirichlet_scaling() {
        let mu = gaussian_measure(6.0, 80);
        let f = GridFunction::from_fn(mu.grid(), SiteInterval::single(1), |c| c[0].sin()).unwrap();
        let q = 1.6;
        let lam: f64 = 2.0;
        let a = dirichlet_q(&mu, &f.scale(lam), &[1], q).unwrap();
        let b = lam.powf(q) * dirichlet_q(&mu, &f, &[1], q).unwrap();
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn covariance_basics() {
        let mu = gaussian_measure(8.0, 200);
        let f = GridFunction::coordinate(mu.grid(), 1);
        let c = GridFunction::constant(mu.grid(), 2.0);
        assert!(covariance(&mu, &f, &c).unwrap().abs() < 1e-12);
        let var = covariance(&mu, &f, &f).unwrap();
        assert!(var >= 0.0);
        assert!((var - 1.0).abs() < 1e-6);
    }

    #[test]
    fn covariance_product_independence() {
        let grid = build_grid(7.0, 80, Scheme::UniformTrapezoid).unwrap();
        let model = LatticeModel::new(
            2,
            2.0,
            PhaseSpec::custom(|x| 0.5 * x * x, |x| x),
            InteractionSpec::Quadratic,
            Couplings::Uniform(0.0),
            BoundaryCondition::free(),
        )
        .unwrap();
        let nu = chain_measure(&model, &grid).unwrap();
        let mu = nu.marginal(SiteInterval::new(1, 2)).unwrap();
        let f = GridFunction::coordinate(&grid, 1);
        let g = GridFunction::coordinate(&grid, 2);
        assert!(covariance(&mu, &f, &g).unwrap().abs() < 1e-10);
    }

    #[test]
    fn exp_moment_examples() {
        let mu = gaussian_measure(8.0, 400);
        let g = GridFunction::coordinate(mu.grid(), 1);
        assert_eq!(exp_moment(&mu, &g, 0.0).unwrap(), 0.0);
        let c = GridFunction::constant(mu.grid(), 3.0);
        let lm = exp_moment(&mu, &c, 2.0).unwrap();
        assert!((lm - 6.0).abs() < 1e-12);
        // Gaussian generating function: log E e^{x} = 1/2
        let lm = exp_moment(&mu, &g, 1.0).unwrap();
        assert!((lm - 0.5).abs() < 1e-5, "{lm}");
    }

    #[test]
    fn sg2_eigen_gaussian_is_one() {
        let mu = gaussian_measure(8.0, 200);
        let est = sg_constant(&mu, 2.0, SgMethod::Eigen, &AscentParams::default()).unwrap();
        let ev = est.constant_eigen.unwrap();
        assert!((ev - 1.0).abs() < 5e-2, "{ev}");
        // the ascent certificate stays within discretization error of eigen
        assert!(est.constant_lower <= ev * (1.0 + 5e-2), "{} vs {ev}", est.constant_lower);
    }

    #[test]
    fn sg2_eigen_tensorizes() {
        let grid = build_grid(7.0, 31, Scheme::UniformTrapezoid).unwrap();
        let model = LatticeModel::new(
            2,
            2.0,
            PhaseSpec::custom(|x| 0.5 * x * x, |x| x),
            InteractionSpec::Quadratic,
            Couplings::Uniform(0.0),
            BoundaryCondition::free(),
        )
        .unwrap();
        let nu = chain_measure(&model, &grid).unwrap();
        let pair = nu.marginal(SiteInterval::new(1, 2)).unwrap();
        let single = nu.marginal(SiteInterval::single(1)).unwrap();
        let e2 = sg_constant(&pair, 2.0, SgMethod::Eigen, &AscentParams::default()).unwrap();
        let e1 = sg_constant(&single, 2.0, SgMethod::Eigen, &AscentParams::default()).unwrap();
        let (a, b) = (e2.constant_eigen.unwrap(), e1.constant_eigen.unwrap());
        assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
    }

    #[test]
    fn ls2_gaussian_near_two() {
        let mu = gaussian_measure(8.0, 200);
        let est = ls_constant(&mu, 2.0, &AscentParams::default()).unwrap();
        assert!(
            est.constant_lower >= 1.8 && est.constant_lower <= 2.0 + 1e-9,
            "LS2 estimate {}",
            est.constant_lower
        );
        // certification: the stored witness reproduces the constant
        let again = lsq_ratio(&mu, &est.witness, 2.0).unwrap();
        assert!((again - est.constant_lower).abs() <= 1e-8 * est.constant_lower.abs());
    }

    #[test]
    fn sg_from_ls_relation() {
        let mu = gaussian_measure(8.0, 120);
        let params = AscentParams::default();
        let sg = sg_constant(&mu, 2.0, SgMethod::Ascent, &params).unwrap();
        let ls = ls_constant(&mu, 2.0, &params).unwrap();
        let chat = 4.0 / std::f64::consts::LN_2;
        assert!(sg.constant_lower <= chat * ls.constant_lower + 1e-9);
    }

    #[test]
    fn ls_tensorization_estimate() {
        // deep truncation: with a shallow tail the unresolvable-mode sector
        // of the discrete ratio comes within floating-point reach of ascent
        let grid = build_grid(8.0, 41, Scheme::UniformTrapezoid).unwrap();
        let model = LatticeModel::new(
            2,
            2.0,
            PhaseSpec::custom(|x| 0.5 * x * x, |x| x),
            InteractionSpec::Quadratic,
            Couplings::Uniform(0.0),
            BoundaryCondition::free(),
        )
        .unwrap();
        let nu = chain_measure(&model, &grid).unwrap();
        let pair = nu.marginal(SiteInterval::new(1, 2)).unwrap();
        let single = nu.marginal(SiteInterval::single(1)).unwrap();
        let params = AscentParams::default();
        let e2 = ls_constant(&pair, 2.0, &params).unwrap();
        let e1 = ls_constant(&single, 2.0, &params).unwrap();
        let rel = (e2.constant_lower - e1.constant_lower).abs() / e1.constant_lower;
        assert!(rel < 0.05, "{} vs {}", e2.constant_lower, e1.constant_lower);
    }

    #[test]
    fn ratio_invariances() {
        let mu = gaussian_measure(6.0, 60);
        let f = GridFunction::from_fn(mu.grid(), SiteInterval::single(1), |c| {
            c[0] + 0.3 * c[0].powi(3)
        })
        .unwrap();
        let q = 2.0;
        let r0 = sgq_ratio(&mu, &f, q).unwrap();
        let r1 = sgq_ratio(&mu, &f.scale(4.0), q).unwrap();
        let r2 = sgq_ratio(&mu, &f.add_scalar(2.5), q).unwrap();
        assert!((r0 - r1).abs() < 1e-10 * r0);
        assert!((r0 - r2).abs() < 1e-10 * r0);
        let l0 = lsq_ratio(&mu, &f, q).unwrap();
        let l1 = lsq_ratio(&mu, &f.scale(3.0), q).unwrap();
        assert!((l0 - l1).abs() < 1e-9 * l0.abs());
    }
}
