//! Consistency of the discretized conditional kernels.
//!
//! On the finite chain, conditioning a volume on a sub-volume and averaging
//! must reproduce the plain average (the tower property), window marginals
//! must agree after partial integration, and conditioning must never expand
//! the sup-norm. All of these are exact identities of the construction, so
//! the residuals here sit at floating-point level.
//!
//! Run:
//!   cargo run --release --example dlr_consistency

use lsqlab::fixtures::{admissible_model, random_smooth};
use lsqlab::gibbs::{chain_measure, dlr_residual};
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::gridfn::SiteInterval;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

fn main() {
    let n = 5;
    let grid = build_grid(2.5, 8, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(n, 0.15).unwrap();
    let nu = chain_measure(&model, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    println!("# Tower residuals |E^V E^M f - E^V f| on random (V, M, f)");
    println!("case\tvolume\tsubset\tresidual");
    let mut worst: f64 = 0.0;
    for case in 0..15 {
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
        println!("{case}\t[{lo},{hi}]\t{subset:?}\t{r:.3e}");
    }
    println!("worst tower residual: {worst:.3e}");

    println!("\n# Marginal consistency: integrating out the last coordinate");
    for len in 2..=n {
        let big = nu.marginal(SiteInterval::new(1, len)).unwrap();
        let small = nu.marginal(SiteInterval::new(1, len - 1)).unwrap();
        let reduced = big.mass().sum_axis(ndarray::Axis(len - 1));
        let defect = reduced
            .iter()
            .zip(small.mass().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("window [1,{len}] -> [1,{}]: defect {defect:.3e}", len - 1);
    }

    println!("\n# Conditioning is a sup-norm contraction");
    let f = random_smooth(&grid, SiteInterval::new(1, n), &mut rng).unwrap();
    for s in [BTreeSet::from([2]), BTreeSet::from([1, 3]), BTreeSet::from([2, 4])] {
        let g = nu.cond_expect(&f, &s).unwrap();
        println!(
            "|f|_inf = {:.6}, |E f|_inf = {:.6} over {s:?}",
            f.max_abs(),
            g.max_abs()
        );
        assert!(g.max_abs() <= f.max_abs() + 1e-12);
    }
}
