//! The four standing checks on the admissible fixture.
//!
//! h0: single-site entropy constant over a boundary scan (uniformity trend);
//! h1: window entropy constant of the chain marginal;
//! h2: exponential moments of the interaction and its drift, with a
//!     truncation ladder as the divergence diagnostic;
//! h3: the configured coupling against the bisected feasibility bound.
//!
//! Run:
//!   cargo run --release --example hypothesis_checks

use lsqlab::constants::{derive_ledger, LedgerInputs};
use lsqlab::fixtures::admissible_model;
use lsqlab::functionals::AscentParams;
use lsqlab::gibbs::chain_measure;
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::verify::{check_h0, check_h1, check_h2, check_h2_ladder, check_h3};

fn main() {
    let n = 5;
    let k = 3;
    let eps = 0.05;
    let grid = build_grid(2.5, 8, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(n, 0.05).unwrap();
    let nu = chain_measure(&model, &grid).unwrap();
    let params = AscentParams { n_seeds: 6, max_iter: 150, ..Default::default() };

    eprintln!("scanning single-site boundaries...");
    let scan: Vec<(f64, f64)> = {
        let mut pts = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                pts.push((a as f64 * 0.5, b as f64 * 0.5));
            }
        }
        pts
    };
    let h0 = check_h0(&model, &grid, &scan, &params).unwrap();
    println!("# h0: single-site entropy constant over {} boundary pairs", scan.len());
    println!("max constant = {:.6e}; {}", h0.constant, h0.notes);

    eprintln!("estimating the window constant...");
    let (h1, est) = check_h1(&nu, k, &params).unwrap();
    println!("\n# h1: window entropy constant");
    println!("estimate = {:.6e} ({})", h1.constant, est.report_record());

    eprintln!("computing exponential moments...");
    let h2 = check_h2(&nu, k, eps).unwrap();
    println!("\n# h2: log-moments at eps = {eps}");
    for (label, v) in &h2.detail {
        println!("  {label:<18} {v:+.6e}");
    }
    println!("moment bound K = {:.6e}", h2.constant);
    let (ladder, slope) = check_h2_ladder(
        &model,
        2.5,
        8,
        Scheme::UniformTrapezoid,
        k,
        eps,
        &[1.0, 1.25, 1.5],
    )
    .unwrap();
    println!("truncation ladder (L, K):");
    for (l, kv) in &ladder {
        println!("  L = {l:.3}: K = {kv:.6e}");
    }
    println!("ladder slope {slope:+.4e} (strong growth would flag divergence)");

    let inputs = LedgerInputs {
        single_site_ls: h0.constant,
        window_ls: h1.constant,
        moment_bound: h2.constant.max(1e-12),
        moment_scale: eps,
        coupling: model.max_coupling(),
        q: model.q(),
        energy_decay: None,
        window_transfer: None,
    };
    let ledger = derive_ledger(&inputs).unwrap();
    let h3 = check_h3(&model, &ledger).unwrap();
    println!("\n# h3: coupling size against the feasibility bound");
    println!(
        "configured J = {:.3e}, bisected J* = {:.3e} -> {}",
        model.max_coupling(),
        h3.constant,
        if h3.passed == Some(true) { "pass" } else { "FAIL (couplings above the provable range)" }
    );
}
