//! Deterministic fixtures: seeded random smooth grid functions and the
//! standard admissible model family used by the diagnostics and tests.

use crate::error::Result;
use crate::grid::Grid;
use crate::gridfn::{GridFunction, SiteInterval};
use crate::model::{BoundaryCondition, Couplings, InteractionSpec, LatticeModel, PhaseSpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// The power-law family: phase `|x|^t`, interaction `|x - y|^r`.
pub fn power_model(
    n_sites: usize,
    q: f64,
    t: f64,
    r: f64,
    j: f64,
    boundary: BoundaryCondition,
) -> Result<LatticeModel> {
    LatticeModel::new(
        n_sites,
        q,
        PhaseSpec::power(t)?,
        InteractionSpec::power_difference(r)?,
        Couplings::Uniform(j),
        boundary,
    )
}

/// The admissible reference fixture: `t = 4, r = 2, q = 2`.
pub fn admissible_model(n_sites: usize, j: f64) -> Result<LatticeModel> {
    power_model(n_sites, 2.0, 4.0, 2.0, j, BoundaryCondition::free())
}

/// A standard-Gaussian single site (phase `x^2 / 2`, no interaction).
pub fn standard_gaussian_model() -> Result<LatticeModel> {
    LatticeModel::new(
        1,
        2.0,
        PhaseSpec::custom(|x| 0.5 * x * x, |x| x),
        InteractionSpec::Quadratic,
        Couplings::Uniform(0.0),
        BoundaryCondition::free(),
    )
}

/// Random smooth function: a low-degree polynomial in each coordinate plus
/// weak nearest-neighbour cross terms, scaled to unit sup-norm.
pub fn random_smooth(
    grid: &Arc<Grid>,
    support: SiteInterval,
    rng: &mut ChaCha8Rng,
) -> Result<GridFunction> {
    let k = support.len();
    let coef: Vec<[f64; 3]> = (0..k)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.25..0.25),
            ]
        })
        .collect();
    let cross: Vec<f64> = (0..k.saturating_sub(1)).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let offset: f64 = rng.gen_range(-0.5..0.5);
    let f = GridFunction::from_fn(grid, support, |c| {
        let mut v = offset;
        for (a, x) in c.iter().enumerate() {
            let [p1, p2, p3] = coef[a];
            v += p1 * x + p2 * x * x + p3 * x * x * x;
        }
        for (a, w) in cross.iter().enumerate() {
            v += w * c[a] * c[a + 1];
        }
        v
    })?;
    let peak = f.max_abs();
    Ok(if peak > 0.0 { f.scale(1.0 / peak) } else { f })
}

/// Random strictly positive smooth function, `exp` of a damped smooth field.
pub fn random_positive(
    grid: &Arc<Grid>,
    support: SiteInterval,
    rng: &mut ChaCha8Rng,
) -> Result<GridFunction> {
    let base = random_smooth(grid, support, rng)?;
    Ok(base.map(|v| (0.8 * v).exp()))
}
