//! Margin sweep of every dispatched proof inequality.
//!
//! Each inequality is evaluated on random positive functions localized in
//! the center window, with constants drawn from the ledger and the measured
//! window/moment inputs. The margin is rhs - lhs (nonnegative = satisfied);
//! the needed scale says how little of the constant block the instances
//! actually used.
//!
//! Run:
//!   cargo run --release --example lemma_margins

use lsqlab::constants::{derive_ledger, LedgerInputs};
use lsqlab::fixtures::{admissible_model, random_positive, random_smooth};
use lsqlab::functionals::AscentParams;
use lsqlab::gibbs::chain_measure;
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::verify::{check_h1, check_h2, lemma_outcome, InequalityId, MarginContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 9;
    let k = 5;
    let eps = 0.05;
    let grid = build_grid(2.5, 6, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(n, 0.05).unwrap();
    let nu = chain_measure(&model, &grid).unwrap();

    eprintln!("measuring window and moment constants...");
    let params = AscentParams { n_seeds: 6, max_iter: 150, ..Default::default() };
    let (h1, _) = check_h1(&nu, k, &params).unwrap();
    let h2 = check_h2(&nu, k, eps).unwrap();
    println!("measured window constant C = {:.4e}, moment bound K = {:.4e}", h1.constant, h2.constant);

    let inputs = LedgerInputs {
        single_site_ls: 1.0,
        window_ls: h1.constant,
        moment_bound: h2.constant.max(1e-12),
        moment_scale: eps,
        coupling: 0.05,
        q: 2.0,
        energy_decay: None,
        window_transfer: None,
    };
    let ctx = MarginContext {
        ledger: derive_ledger(&inputs).unwrap(),
        window_ls: h1.constant,
        eps,
        moment_bound: h2.constant.max(1e-12),
    };

    let window = nu.window(k);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    println!("\n{:<26} {:>14} {:>14}", "inequality", "worst margin", "needed scale");
    let mut failures = 0;
    for id in InequalityId::all() {
        let mut worst = f64::INFINITY;
        let mut needed = 0.0f64;
        for _ in 0..12 {
            let f = random_positive(&grid, window, &mut rng).unwrap();
            let u = random_smooth(&grid, window, &mut rng).unwrap();
            let out = lemma_outcome(&nu, &ctx, id, &f, k, Some(&u), None).unwrap();
            worst = worst.min(out.margin);
            needed = needed.max(out.needed_scale);
        }
        if worst < -1e-10 {
            failures += 1;
        }
        println!("{:<26} {worst:>+14.6e} {needed:>14.6e}", id.label());
    }
    println!(
        "\n{}",
        if failures == 0 {
            "all inequalities satisfied on every sampled instance".to_string()
        } else {
            format!("{failures} inequalities violated; see the margin rows above")
        }
    );
}
