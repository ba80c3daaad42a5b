//! Transfer-contraction path against the brute-force joint-summation oracle
//! on small chains: marginals, conditionals, block sweeps, and the
//! proof-chain quantities all have to agree to near machine precision.

mod common;

use common::JointOracle;
use lsqlab::fixtures::{admissible_model, random_positive, random_smooth};
use lsqlab::gibbs::{chain_measure, local_spec};
use lsqlab::grid::{build_grid, Scheme};
use lsqlab::gridfn::{GridFunction, SiteInterval};
use lsqlab::model::{BoundaryCondition, Couplings, InteractionSpec, LatticeModel, PhaseSpec};
use lsqlab::sweep::{apply_p, block_expectation, SweepPartition};
use lsqlab::verify;
use ndarray::IxDyn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

const TOL: f64 = 1e-12;

fn fixtures() -> Vec<(LatticeModel, std::sync::Arc<lsqlab::grid::Grid>)> {
    let mut out = Vec::new();
    for (n, m, j) in [(3usize, 8usize, 0.15), (4, 6, 0.2), (4, 8, 0.1), (2, 7, 0.3)] {
        let grid = build_grid(2.5, m, Scheme::UniformTrapezoid).unwrap();
        out.push((admissible_model(n, j).unwrap(), grid));
    }
    // a gaussian-like model with a fixed right boundary
    let grid = build_grid(3.0, 6, Scheme::UniformTrapezoid).unwrap();
    let model = LatticeModel::new(
        4,
        2.0,
        PhaseSpec::custom(|x| x * x, |x| 2.0 * x),
        InteractionSpec::power_difference(2.0).unwrap(),
        Couplings::Uniform(0.12),
        BoundaryCondition::fixed(-1.0, 0.5),
    )
    .unwrap();
    out.push((model, grid));
    out
}

#[test]
fn marginals_match_joint_summation() {
    for (model, grid) in fixtures() {
        let oracle = JointOracle::build(&model, &grid);
        let nu = chain_measure(&model, &grid).unwrap();
        let n = model.n_sites();
        for lo in 1..=n {
            for hi in lo..=n {
                let iv = SiteInterval::new(lo, hi);
                let ours = nu.marginal(iv).unwrap();
                let theirs = oracle.marginal(iv);
                for (a, b) in ours.mass().iter().zip(theirs.iter()) {
                    assert!((a - b).abs() < TOL, "marginal [{lo},{hi}] off by {}", (a - b).abs());
                }
            }
        }
    }
}

#[test]
fn conditionals_match_joint_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (model, grid) in fixtures() {
        let oracle = JointOracle::build(&model, &grid);
        let nu = chain_measure(&model, &grid).unwrap();
        let n = model.n_sites();
        let f = random_smooth(&grid, SiteInterval::new(1, n), &mut rng).unwrap();
        let mut subsets: Vec<BTreeSet<usize>> = vec![
            BTreeSet::from([1]),
            BTreeSet::from([n]),
            (1..=n).collect(),
        ];
        if n >= 3 {
            subsets.push(BTreeSet::from([2]));
            subsets.push(BTreeSet::from([1, 3]));
            subsets.push(BTreeSet::from([1, 2]));
            subsets.push((2..=n).collect());
        }
        if n >= 4 {
            subsets.push(BTreeSet::from([2, 3]));
            subsets.push(BTreeSet::from([1, 4]));
            subsets.push(BTreeSet::from([1, 2, 4]));
        }
        for s in subsets {
            let ours = nu.cond_expect(&f, &s).unwrap();
            let diff = oracle.cond_diff(&ours, &f, &s);
            assert!(diff < TOL, "conditional over {s:?} off by {diff}");
        }
        // expectation
        let e = nu.expect(&f).unwrap();
        assert!((e - oracle.expect(&f)).abs() < TOL);
    }
}

#[test]
fn block_sweep_matches_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (model, grid) in fixtures() {
        let n = model.n_sites();
        let oracle = JointOracle::build(&model, &grid);
        let nu = chain_measure(&model, &grid).unwrap();
        let part = SweepPartition::even_odd(n);
        let f = random_smooth(&grid, SiteInterval::new(1, n), &mut rng).unwrap();

        let g0: BTreeSet<usize> = part.gamma0().iter().copied().collect();
        let g1: BTreeSet<usize> = part.gamma1().iter().copied().collect();
        let ours0 = block_expectation(&nu, part.gamma0(), &f).unwrap();
        let diff0 = oracle.cond_diff(&ours0, &f, &g0);
        assert!(diff0 < TOL, "even block off by {diff0}");

        let ours = apply_p(&nu, &part, &f).unwrap();
        let inner = oracle.cond_expect_fn(&f, &g0);
        let theirs = oracle.cond_expect_full(&inner, &g1);
        let oe = ours.extend_to(SiteInterval::new(1, n)).unwrap();
        let diff = theirs
            .iter()
            .zip(oe.values().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < TOL, "sweep off by {diff}");
    }
}

#[test]
fn local_spec_matches_direct_density() {
    // single-site specification against direct quadrature of the energy
    let grid = build_grid(2.5, 8, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(3, 0.2).unwrap();
    let omega = BTreeMap::from([(1, 0.8), (3, -0.4)]);
    let spec = local_spec(&model, &grid, SiteInterval::new(2, 2), &omega).unwrap();
    let mut direct: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            let h = model.hamiltonian(&[2], &[x], &omega).unwrap();
            (-h).exp()
        })
        .collect();
    let z: f64 = grid
        .weights()
        .iter()
        .zip(direct.iter())
        .map(|(w, d)| w * d)
        .sum();
    for d in direct.iter_mut() {
        *d /= z;
    }
    assert!((spec.z() - z).abs() < 1e-12 * z);
    for (i, d) in direct.iter().enumerate() {
        let got = spec.density().values()[IxDyn(&[i])];
        assert!((got - d).abs() < 1e-12 * d.max(1e-30), "node {i}");
    }
}

#[test]
fn proof_quantities_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (n, m, k) in [(4usize, 6usize, 2usize), (4, 6, 3), (3, 8, 2)] {
        let grid = build_grid(2.5, m, Scheme::UniformTrapezoid).unwrap();
        let model = admissible_model(n, 0.15).unwrap();
        let oracle = JointOracle::build(&model, &grid);
        let nu = chain_measure(&model, &grid).unwrap();
        let f = random_positive(&grid, SiteInterval::new(1, n), &mut rng).unwrap();
        let q = 2.0;

        // centered part through the oracle
        let pair = verify::neighbour_pair(&nu, k);
        let h_lib = verify::centered_part(&nu, &f, k).unwrap();
        let h_or = f
            .extend_to(SiteInterval::new(1, n))
            .unwrap()
            .sub(&oracle.cond_expect_fn(&f, &pair))
            .unwrap();
        assert!(h_lib.max_abs_diff(&h_or) < TOL);

        // window energy through the oracle
        let u = k;
        let window = nu.window(u);
        let outside: BTreeSet<usize> = (1..=n).filter(|s| !window.contains(*s)).collect();
        let hq = h_or.abs_powf(q);
        let e_or = if outside.is_empty() {
            hq.clone()
        } else {
            oracle.cond_expect_fn(&hq, &outside)
        };
        let root = e_or.abs_powf(1.0 / q);
        let sites: Vec<usize> = window.sites().collect();
        let q_or = oracle.expect(&root.q_gradient_norm(&sites, q).unwrap());
        let q_lib = verify::window_energy(&nu, &f, u, k, q).unwrap();
        assert!(
            (q_lib - q_or).abs() < 1e-10 * q_or.abs().max(1.0),
            "window energy {q_lib} vs {q_or}"
        );

        // normalized covariance through the oracle
        let fq = f.abs_powf(q);
        let w = verify::drift(&nu, k).unwrap();
        let e_fq = oracle.cond_expect_fn(&fq, &pair);
        let e_w = oracle.cond_expect_fn(&w, &pair);
        let e_fqw = oracle.cond_expect_fn(&fq.mul(&w).unwrap(), &pair);
        let cov = e_fqw.sub(&e_fq.mul(&e_w).unwrap()).unwrap();
        let p = q / (q - 1.0);
        let a_or = oracle.expect(&e_fq.powf(-q / p).mul(&cov.abs_powf(q)).unwrap());
        let a_lib = verify::normalized_covariance(&nu, &f, k, q).unwrap();
        assert!(
            (a_lib - a_or).abs() < 1e-10 * a_or.abs().max(1.0),
            "normalized covariance {a_lib} vs {a_or}"
        );
    }
}

#[test]
fn dlr_residual_matches_oracle_tower() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let grid = build_grid(2.5, 6, Scheme::UniformTrapezoid).unwrap();
    let model = admissible_model(4, 0.2).unwrap();
    let oracle = JointOracle::build(&model, &grid);
    let nu = chain_measure(&model, &grid).unwrap();
    let f = random_smooth(&grid, SiteInterval::new(1, 4), &mut rng).unwrap();
    let subset = BTreeSet::from([2]);

    let r = lsqlab::gibbs::dlr_residual(
        &model,
        &grid,
        SiteInterval::new(1, 4),
        &subset,
        &f,
        &BTreeMap::new(),
    )
    .unwrap();
    assert!(r < TOL, "{r}");

    // and the oracle agrees that conditioning then averaging is averaging
    let inner = oracle.cond_expect_fn(&f, &subset);
    let lhs = oracle.expect(&inner);
    let rhs = oracle.expect(&f);
    assert!((lhs - rhs).abs() < TOL);
    // both sides agree with the library expectation
    assert!((rhs - nu.expect(&f).unwrap()).abs() < TOL);
}
