//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured figure next to its pinned tolerance. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use common::JointOracle;
use lsqlab::constants::{
    derive_ledger, feasibility_thresholds, recursion_condition, recursion_oracle, tail_bound,
    LedgerInputs,
};
use lsqlab::fixtures::{admissible_model, random_positive, random_smooth, standard_gaussian_model};
use lsqlab::functionals::{ls_constant, sg_constant, AscentParams, SgMethod};
use lsqlab::gibbs::{chain_measure, dlr_residual, local_spec};
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::gridfn::{GridFunction, SiteInterval};
use lsqlab::model::admissible_example;
use lsqlab::sweep::{apply_p, entropy_telescope_residual, iterate_sweep, SweepOptions, SweepPartition};
use lsqlab::verify::{check_h1, check_h2, lemma_margin, InequalityId, MarginContext};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// 1. Closed-form constant calculus at (c = 1, q = 2).
#[test]
fn criterion_01_constant_calculus() {
    let inputs = LedgerInputs {
        single_site_ls: 1.0,
        window_ls: 2.0,
        moment_bound: 1.0,
        moment_scale: 0.1,
        coupling: 0.01,
        q: 2.0,
        energy_decay: None,
        window_transfer: None,
    };
    let ledger = derive_ledger(&inputs).unwrap();
    let chat_expected = 4.0 / std::f64::consts::LN_2;
    assert!((ledger.c_hat - chat_expected).abs() <= 1e-9, "{}", ledger.c_hat);
    assert!((ledger.c_hat - 5.770780163555856).abs() <= 1e-9);
    assert_eq!(ledger.c1, 256.0);
    assert_eq!(ledger.c0, 256.0);
    println!(
        "criterion 01 PASS: c_hat = {:.12} (4/ln 2 +- 1e-9), c1 = {}, c0 = {}",
        ledger.c_hat, ledger.c1, ledger.c0
    );
}

/// 2. Conditioning consistency on random volumes, subsets, and functions.
#[test]
fn criterion_02_dlr_identity() {
    let grid = build_grid(2.5, 8, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(5, 0.15).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 5;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let lo = rng.gen_range(1..=n - 1);
        let hi = rng.gen_range(lo + 1..=n);
        let lambda = SiteInterval::new(lo, hi);
        let mut subset = BTreeSet::new();
        while subset.is_empty() || subset.len() == lambda.len() {
            subset.clear();
            for s in lambda.sites() {
                if rng.gen_bool(0.5) {
                    subset.insert(s);
                }
            }
        }
        let f = random_smooth(&grid, lambda, &mut rng).unwrap();
        let mut omega = BTreeMap::new();
        if lo > 1 {
            omega.insert(lo - 1, rng.gen_range(-0.5..0.5));
        }
        if hi < n {
            omega.insert(hi + 1, rng.gen_range(-0.5..0.5));
        }
        let r = dlr_residual(&model, &grid, lambda, &subset, &f, &omega).unwrap();
        worst = worst.max(r);
    }
    assert!(worst <= 1e-10, "worst residual {worst}");
    println!("criterion 02 PASS: max conditioning residual {worst:.3e} <= 1e-10 over 50 cases");
}

/// 3. Entropy telescoping is an identity up to quadrature-consistency error.
#[test]
fn criterion_03_entropy_telescoping() {
    let grid = build_grid(2.5, 8, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(5, 0.15).unwrap();
    let nu = chain_measure(&model, &grid).unwrap();
    let part = SweepPartition::even_odd(5);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_positive(&grid, SiteInterval::new(1, 5), &mut rng).unwrap();
        let r = entropy_telescope_residual(&nu, &part, &f, 2.0).unwrap();
        worst = worst.max(r);
    }
    assert!(worst <= 1e-8, "worst relative residual {worst}");
    println!("criterion 03 PASS: max telescoping residual {worst:.3e} <= 1e-8 over 20 positive f");
}

/// 4. A product chain sweeps out in one step.
#[test]
fn criterion_04_product_exactness() {
    let grid = build_grid(2.5, 8, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(5, 0.0).unwrap();
    let nu = chain_measure(&model, &grid).unwrap();
    let part = SweepPartition::even_odd(5);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_smooth(&grid, SiteInterval::new(1, 5), &mut rng).unwrap();
        let pf = apply_p(&nu, &part, &f).unwrap();
        let nuf = nu.expect(&f).unwrap();
        worst = worst.max(pf.add_scalar(-nuf).max_abs());
    }
    assert!(worst <= 1e-10, "worst one-sweep defect {worst}");
    println!("criterion 04 PASS: max |Pf - nu f| = {worst:.3e} <= 1e-10 at zero coupling");
}

/// 5. Everything agrees with the brute-force joint-summation oracle.
#[test]
fn criterion_05_brute_force_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for (n, m, j) in [(3usize, 8usize, 0.2), (4, 6, 0.15), (4, 8, 0.1)] {
        let grid = build_grid(2.5, m, Scheme::UniformTrapezoid).unwrap();
        let model = admissible_model(n, j).unwrap();
        let oracle = JointOracle::build(&model, &grid);
        let nu = chain_measure(&model, &grid).unwrap();

        for lo in 1..=n {
            for hi in lo..=n {
                let iv = SiteInterval::new(lo, hi);
                let ours = nu.marginal(iv).unwrap();
                let theirs = oracle.marginal(iv);
                for (a, b) in ours.mass().iter().zip(theirs.iter()) {
                    worst = worst.max((a - b).abs());
                }
            }
        }

        let f = random_smooth(&grid, SiteInterval::new(1, n), &mut rng).unwrap();
        let part = SweepPartition::even_odd(n);
        let g0: BTreeSet<usize> = part.gamma0().iter().copied().collect();
        let g1: BTreeSet<usize> = part.gamma1().iter().copied().collect();
        for s in [
            BTreeSet::from([1]),
            BTreeSet::from([2]),
            BTreeSet::from([1, 3]),
            g0.clone(),
            (1..=n).collect(),
        ] {
            let ours = nu.cond_expect(&f, &s).unwrap();
            worst = worst.max(oracle.cond_diff(&ours, &f, &s));
        }

        let pf = apply_p(&nu, &part, &f).unwrap();
        let inner = oracle.cond_expect_fn(&f, &g0);
        let theirs = oracle.cond_expect_full(&inner, &g1);
        let pe = pf.extend_to(SiteInterval::new(1, n)).unwrap();
        for (a, b) in theirs.iter().zip(pe.values().iter()) {
            worst = worst.max((a - b).abs());
        }

        // proof quantities at the chain center
        let k = (n + 1) / 2;
        let fpos = random_positive(&grid, SiteInterval::new(1, n), &mut rng).unwrap();
        let pair = lsqlab::verify::neighbour_pair(&nu, k);
        let h_lib = lsqlab::verify::centered_part(&nu, &fpos, k).unwrap();
        let h_or = fpos
            .extend_to(SiteInterval::new(1, n))
            .unwrap()
            .sub(&oracle.cond_expect_fn(&fpos, &pair))
            .unwrap();
        worst = worst.max(h_lib.max_abs_diff(&h_or));
    }
    assert!(worst <= 1e-10, "worst oracle disagreement {worst}");
    println!("criterion 05 PASS: max disagreement with the joint oracle {worst:.3e} <= 1e-10");
}

/// 6. Sweeping-out converges geometrically on the admissible fixture, and the
/// fitted rate shrinks when the coupling is halved.
#[test]
fn criterion_06_sweep_convergence() {
    let run = |j: f64, n_max: usize| {
        let grid = build_grid(2.5, 10, Scheme::UniformTrapezoid).unwrap();
        let model = admissible_model(6, j).unwrap();
        let nu = chain_measure(&model, &grid).unwrap();
        let part = SweepPartition::even_odd(6);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let f = random_smooth(&grid, SiteInterval::new(1, 6), &mut rng).unwrap();
        let opts = SweepOptions { n_max, tol: 0.0, q: 2.0, record_iterates: false };
        iterate_sweep(&nu, &part, &f, &opts).unwrap()
    };
    let trace = run(0.05, 7);
    assert!(trace.distances.len() >= 8, "need at least 8 iterates");
    for w in trace.distances.windows(2) {
        assert!(w[1] < w[0], "distances must strictly decrease: {:?}", trace.distances);
    }
    assert!(trace.fitted_rate < 1.0);
    // regression band around the first verified run (rate ~ 1.25e-2)
    assert!(
        trace.fitted_rate > 0.006 && trace.fitted_rate < 0.03,
        "rate {} left the recorded band",
        trace.fitted_rate
    );
    let halved = run(0.025, 5);
    assert!(
        halved.fitted_rate < trace.fitted_rate,
        "halving the coupling must shrink the rate: {} vs {}",
        halved.fitted_rate,
        trace.fitted_rate
    );
    println!(
        "criterion 06 PASS: 8 strictly decreasing distances, rate {:.4e} < 1; halved coupling rate {:.4e}",
        trace.fitted_rate, halved.fitted_rate
    );
}

/// 7. The geometric tail bound dominates the recursion fixed point.
#[test]
fn criterion_07_tail_bound_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut tested = 0;
    let mut min_margin = f64::INFINITY;
    while tested < 50 {
        let q = rng.gen_range(1.2..2.0);
        let j: f64 = rng.gen_range(0.05..0.6);
        let k_prime = rng.gen_range(0.1..1.5);
        if !recursion_condition(j, q, k_prime) || 2.0 * j.powf(q) * k_prime >= 0.9 {
            continue;
        }
        let len = rng.gen_range(3..8);
        let g: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..5.0)).collect();
        let p = recursion_oracle(&g, j, q, k_prime, 40, 0.0).unwrap();
        let bound = tail_bound(&g, j, q, k_prime, None).unwrap();
        min_margin = min_margin.min(bound - p[0]);
        assert!(bound >= p[0] - 1e-12, "violation: bound {bound} < oracle {}", p[0]);
        tested += 1;
    }
    println!(
        "criterion 07 PASS: tail bound dominates the recursion oracle on 50 instances (min margin {min_margin:.3e})"
    );
}

/// 8. Every dispatched inequality holds with ledger constants and measured
/// window/moment inputs, over 20 random instances each.
#[test]
fn criterion_08_lemma_margins() {
    let grid = build_grid(2.5, 6, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(9, 0.05).unwrap();
    let nu = chain_measure(&model, &grid).unwrap();
    let k = 5;
    let eps = 0.05;

    let params = AscentParams { max_iter: 200, n_seeds: 8, rng_seed: 808, ..Default::default() };
    let (h1, _) = check_h1(&nu, k, &params).unwrap();
    let h2 = check_h2(&nu, k, eps).unwrap();
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
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut report = Vec::new();
    for id in InequalityId::all() {
        let mut worst = f64::INFINITY;
        for _ in 0..20 {
            let f = random_positive(&grid, window, &mut rng).unwrap();
            let u = random_smooth(&grid, window, &mut rng).unwrap();
            let m = lemma_margin(&nu, &ctx, id, &f, k, Some(&u), None).unwrap();
            worst = worst.min(m);
        }
        assert!(worst >= -1e-10, "{} margin {worst}", id.label());
        report.push(format!("{}={:.2e}", id.label(), worst));
    }
    println!(
        "criterion 08 PASS: all inequality margins >= -1e-10 over 20 instances each ({})",
        report.join(", ")
    );
}

/// 9. The discretized standard Gaussian reproduces its classical constants,
/// and the gap estimate never exceeds 4/ln 2 times the entropy estimate.
#[test]
fn criterion_09_functional_inequality_oracles() {
    let grid = build_grid(8.0, 200, Scheme::UniformTrapezoid).unwrap();
    let model = standard_gaussian_model().unwrap();
    let mu = local_spec(&model, &grid, SiteInterval::single(1), &BTreeMap::new())
        .unwrap()
        .measure()
        .unwrap();
    let params = AscentParams::default();

    let sg = sg_constant(&mu, 2.0, SgMethod::Eigen, &params).unwrap();
    let eigen = sg.constant_eigen.unwrap();
    assert!((eigen - 1.0).abs() <= 0.05, "gap eigen value {eigen}");

    let ls = ls_constant(&mu, 2.0, &params).unwrap();
    assert!(
        ls.constant_lower >= 1.8 && ls.constant_lower <= 2.0 + 1e-9,
        "entropy constant {}",
        ls.constant_lower
    );

    let chat = 4.0 / std::f64::consts::LN_2;
    let mut fixtures = vec![(sg.constant_lower, ls.constant_lower, "gaussian")];

    // the admissible single site and window, on a lighter ascent budget
    let light = AscentParams { n_seeds: 6, max_iter: 150, ..AscentParams::default() };
    let qgrid = build_grid(2.5, 24, Scheme::UniformTrapezoid).unwrap();
    let qmodel = admissible_model(5, 0.1).unwrap();
    let spec = local_spec(&qmodel, &qgrid, SiteInterval::single(3), &BTreeMap::from([(2, 0.0), (4, 0.0)]))
        .unwrap()
        .measure()
        .unwrap();
    let sg_q = sg_constant(&spec, 2.0, SgMethod::Ascent, &light).unwrap();
    let ls_q = ls_constant(&spec, 2.0, &light).unwrap();
    fixtures.push((sg_q.constant_lower, ls_q.constant_lower, "single-site"));

    let wgrid = build_grid(2.5, 6, Scheme::UniformTrapezoid).unwrap();
    let nu = chain_measure(&qmodel, &wgrid).unwrap();
    let win = nu.window_marginal(3).unwrap();
    let sg_w = sg_constant(&win, 2.0, SgMethod::Ascent, &light).unwrap();
    let ls_w = ls_constant(&win, 2.0, &light).unwrap();
    fixtures.push((sg_w.constant_lower, ls_w.constant_lower, "window"));

    for (s, l, name) in &fixtures {
        assert!(s <= &(chat * l + 1e-9), "{name}: sg {s} > (4/ln2) ls {l}");
    }
    println!(
        "criterion 09 PASS: gap eigen {eigen:.4} (1 +- 5%), entropy ascent {:.4} in [1.8, 2.0]; sg <= (4/ln 2) ls on {} fixtures",
        ls.constant_lower,
        fixtures.len()
    );
}

/// 10. Feasibility bisection brackets the boundary and the contraction
/// coefficients grow monotonically in the coupling.
#[test]
fn criterion_10_feasibility_thresholds() {
    let base = LedgerInputs {
        single_site_ls: 1.0,
        window_ls: 2.0,
        moment_bound: 1.0,
        moment_scale: 0.1,
        coupling: 1e-8,
        q: 2.0,
        energy_decay: None,
        window_transfer: None,
    };
    let ledger = derive_ledger(&base).unwrap();
    let report = feasibility_thresholds(&ledger).unwrap();
    assert!(report.all_pass);
    let j_star = report.j_star;

    let all_pass_at = |j: f64| {
        let mut inputs = base.clone();
        inputs.coupling = j;
        let l = derive_ledger(&inputs).unwrap();
        feasibility_thresholds(&l).unwrap().all_pass
    };
    assert!(all_pass_at(j_star * (1.0 - 1e-6)), "just below the threshold must pass");
    assert!(!all_pass_at(j_star * (1.0 + 1e-3)), "just above the threshold must fail");

    let mut prev_d2 = -1.0;
    let mut prev_c2 = -1.0;
    let mut j = 0.0;
    while j < 0.999 {
        let mut inputs = base.clone();
        inputs.coupling = j;
        let l = derive_ledger(&inputs).unwrap();
        if j > 0.0 {
            assert!(l.d2 > prev_d2 && l.big_c2 > prev_c2, "monotonicity broke at J = {j}");
        }
        prev_d2 = l.d2;
        prev_c2 = l.big_c2;
        j += 1e-3;
    }
    println!(
        "criterion 10 PASS: J* = {j_star:.6e} brackets the feasibility boundary; D2, C2 monotone on the 1e-3 grid"
    );
}

/// 11. The admissibility predicate reproduces the example-family table.
#[test]
fn criterion_11_admissibility_predicate() {
    assert!(admissible_example(4.0, 2.0, 2.0));
    assert!(!admissible_example(2.0, 2.0, 2.0));
    assert!(!admissible_example(1.5, 1.0, 2.0));
    // t >= q/(q-1) = 3 and max{r, (r-1)q} = 1.5 < 3
    assert!(admissible_example(3.0, 1.5, 1.5));
    println!("criterion 11 PASS: admissibility truth table matches the example family");
}
