//! Discretization honesty sweeps: truncation, mesh, and chain-length ladders.
//!
//! Spins are unbounded but the grid is not; these ladders report how the
//! desk-scale estimates move as the truncation half-width, the node count,
//! and the chain length grow. Shrinking successive differences are the
//! empirical substitute for an a-priori truncation bound.
//!
//! Run:
//!   cargo run --release --example refinement_sweep

use lsqlab::fixtures::{admissible_model, standard_gaussian_model};
use lsqlab::functionals::{ls_constant, sg_constant, AscentParams, SgMethod};
use lsqlab::gibbs::{chain_measure, local_spec};
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::gridfn::SiteInterval;
use lsqlab::verify::check_h1;
use std::collections::BTreeMap;

fn gaussian_measure(l: f64, m: usize) -> lsqlab::gibbs::DiscreteMeasure {
    let grid = build_grid(l, m, Scheme::UniformTrapezoid).unwrap();
    let model = standard_gaussian_model().unwrap();
    local_spec(&model, &grid, SiteInterval::single(1), &BTreeMap::new())
        .unwrap()
        .measure()
        .unwrap()
}

fn main() {
    println!("# Truncation ladder: quadrature of exp(-x^2), exact value sqrt(pi)");
    println!("L\tvalue\terror");
    for l in [3.0, 4.0, 5.0, 6.0, 8.0] {
        let grid = build_grid(l, 200, Scheme::UniformTrapezoid).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|x| (-x * x).exp()).collect();
        let v = grid.integrate(&f).unwrap();
        println!("{l}\t{v:.12}\t{:+.3e}", v - std::f64::consts::PI.sqrt());
    }

    println!("\n# Mesh ladder: Gaussian gap constant by the eigen route");
    println!("m\tgap\terror");
    let params = AscentParams::default();
    for m in [50, 100, 200, 400] {
        let mu = gaussian_measure(8.0, m);
        let est = sg_constant(&mu, 2.0, SgMethod::Eigen, &params).unwrap();
        let v = est.constant_eigen.unwrap();
        println!("{m}\t{v:.9}\t{:+.3e}", v - 1.0);
    }

    println!("\n# Mesh ladder: Gaussian entropy constant by ascent");
    println!("m\tentropy constant");
    for m in [100, 200, 400] {
        let mu = gaussian_measure(8.0, m);
        let est = ls_constant(&mu, 2.0, &params).unwrap();
        println!("{m}\t{:.9}", est.constant_lower);
    }

    println!("\n# Chain-length ladder: window entropy constant of the admissible fixture");
    println!("N\twindow constant");
    let light = AscentParams { n_seeds: 6, max_iter: 150, ..Default::default() };
    let mut prev: Option<f64> = None;
    for n in [5usize, 7, 9] {
        let grid = build_grid(2.5, 6, Scheme::UniformTrapezoid).unwrap();
        let model = admissible_model(n, 0.05).unwrap();
        let nu = chain_measure(&model, &grid).unwrap();
        let (rep, _) = check_h1(&nu, (n + 1) / 2, &light).unwrap();
        let drift = prev.map(|p: f64| ((rep.constant - p) / p).abs());
        println!(
            "{n}\t{:.6e}{}",
            rep.constant,
            drift.map(|d| format!("  (relative drift {d:.3e})")).unwrap_or_default()
        );
        prev = Some(rep.constant);
    }
}
