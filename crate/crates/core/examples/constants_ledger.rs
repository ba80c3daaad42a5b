//! The explicit-constant ledger and the coupling feasibility boundary.
//!
//! Derives every closed-form constant of the contraction argument from a set
//! of hypothesis inputs, evaluates the five smallness conditions on the
//! coupling, bisects the largest feasible coupling, and charts how the two
//! contraction coefficients grow with it.
//!
//! Run:
//!   cargo run --release --example constants_ledger

use lsqlab::constants::{derive_ledger, feasibility_thresholds, LedgerInputs};

fn main() {
    let inputs = LedgerInputs {
        single_site_ls: 1.0,
        window_ls: 2.0,
        moment_bound: 1.0,
        moment_scale: 0.1,
        coupling: 1e-8,
        q: 2.0,
        energy_decay: None,
        window_transfer: None,
    };
    let ledger = derive_ledger(&inputs).unwrap();

    println!("# Ledger at c = 1, C = 2, K = 1, eps = 0.1, J = 1e-8, q = 2");
    println!("{:<10} {:>18}  formula", "name", "value");
    for (name, formula, value) in ledger.rows() {
        println!("{name:<10} {value:>18.9e}  {formula}");
    }
    println!();
    println!(
        "defaulted assemblies: energy decay = {}, window transfer = {}",
        ledger.energy_decay_defaulted, ledger.window_transfer_defaulted
    );

    let report = feasibility_thresholds(&ledger).unwrap();
    println!("\n# Smallness conditions at the configured coupling");
    for c in &report.conditions {
        println!(
            "  {:<24} {}  slack {:+.6e}",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.slack
        );
    }
    println!("largest feasible coupling J* = {:.10e}", report.j_star);

    println!("\n# Contraction coefficients along the coupling axis");
    println!("J\tD2\tC2\tfeasible");
    let j_star = report.j_star;
    for i in 0..12 {
        let j = j_star * (0.2 + 0.1 * i as f64);
        let mut sw = inputs.clone();
        sw.coupling = j;
        let l = derive_ledger(&sw).unwrap();
        println!("{j:.4e}\t{:.4e}\t{:.4e}\t{}", l.d2, l.big_c2, l.feasible);
    }

    // the zero-coupling artifact: the ratio branch of the final constant
    // diverges even though the inequality only improves
    let mut zero = inputs.clone();
    zero.coupling = 0.0;
    let l0 = derive_ledger(&zero).unwrap();
    println!(
        "\nzero-coupling limit: ratio branch = {:e}, plain branch = {:?}, reported = {:?}",
        l0.chain_ls_ratio_branch, l0.chain_ls_plain_branch, l0.chain_ls
    );
}
