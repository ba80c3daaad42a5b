//! Classical constants of the discretized standard Gaussian.
//!
//! The gap constant is 1 (eigen route and variational ascent agree) and the
//! entropy constant is 2, approached from below by ascent. Products of
//! identical sites keep the same constants, and the gap estimate always
//! stays below 4/ln 2 times the entropy estimate.
//!
//! Run:
//!   cargo run --release --example gaussian_constants

use lsqlab::fixtures::standard_gaussian_model;
use lsqlab::functionals::{ls_constant, lsq_ratio, sg_constant, AscentParams, SgMethod};
use lsqlab::gibbs::{chain_measure, local_spec};
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::gridfn::SiteInterval;
use lsqlab::model::{BoundaryCondition, Couplings, InteractionSpec, LatticeModel, PhaseSpec};
use std::collections::BTreeMap;

fn main() {
    let grid = build_grid(8.0, 200, Scheme::UniformTrapezoid).unwrap();
    let model = standard_gaussian_model().unwrap();
    let mu = local_spec(&model, &grid, SiteInterval::single(1), &BTreeMap::new())
        .unwrap()
        .measure()
        .unwrap();
    let params = AscentParams::default();

    println!("# Single standard-Gaussian site, L = 8, m = 200");
    let sg = sg_constant(&mu, 2.0, SgMethod::Eigen, &params).unwrap();
    println!("gap, eigen route:        {:.9}  (classical value 1)", sg.constant_eigen.unwrap());
    println!("gap, ascent certificate: {:.9}", sg.constant_lower);

    let ls = ls_constant(&mu, 2.0, &params).unwrap();
    println!("entropy, ascent:         {:.9}  (classical value 2)", ls.constant_lower);
    println!("witness re-evaluation:   {:.9}", lsq_ratio(&mu, &ls.witness, 2.0).unwrap());
    println!("{}", ls.report_record());

    let chat = 4.0 / std::f64::consts::LN_2;
    println!(
        "\ngap <= (4/ln 2) entropy: {:.4} <= {:.4}",
        sg.constant_lower,
        chat * ls.constant_lower
    );
    assert!(sg.constant_lower <= chat * ls.constant_lower + 1e-9);

    println!("\n# Product of two identical sites keeps the constants");
    let pgrid = build_grid(8.0, 41, Scheme::UniformTrapezoid).unwrap();
    let pmodel = LatticeModel::new(
        2,
        2.0,
        PhaseSpec::custom(|x| 0.5 * x * x, |x| x),
        InteractionSpec::Quadratic,
        Couplings::Uniform(0.0),
        BoundaryCondition::free(),
    )
    .unwrap();
    let nu = chain_measure(&pmodel, &pgrid).unwrap();
    let single = nu.marginal(SiteInterval::single(1)).unwrap();
    let pair = nu.marginal(SiteInterval::new(1, 2)).unwrap();
    let e1 = sg_constant(&single, 2.0, SgMethod::Eigen, &params).unwrap();
    let e2 = sg_constant(&pair, 2.0, SgMethod::Eigen, &params).unwrap();
    println!(
        "gap eigen: single site {:.9}, two-site product {:.9}",
        e1.constant_eigen.unwrap(),
        e2.constant_eigen.unwrap()
    );
    let l1 = ls_constant(&single, 2.0, &params).unwrap();
    let l2 = ls_constant(&pair, 2.0, &params).unwrap();
    println!(
        "entropy ascent: single site {:.6}, two-site product {:.6}",
        l1.constant_lower, l2.constant_lower
    );

    println!("\n# Sub-quadratic exponents: ascent lower bounds for q < 2");
    for q in [1.4, 1.7, 2.0] {
        let lsq = ls_constant(&mu, q, &params).unwrap();
        let sgq = sg_constant(&mu, q, SgMethod::Ascent, &params).unwrap();
        println!(
            "q = {q}: entropy >= {:.6} (converged {}), gap >= {:.6}",
            lsq.constant_lower, lsq.converged, sgq.constant_lower
        );
    }
}
