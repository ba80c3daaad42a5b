//! The geometric tail bound against the brute-force recursion oracle.
//!
//! The window-energy recursion couples each level to its neighbours four
//! steps away. Under the smallness condition on the coupling, the base level
//! is bounded by a geometric series over the driving sequence; the oracle
//! computes the maximal solution of the truncated recursion directly and the
//! bound has to dominate it.
//!
//! Run:
//!   cargo run --release --example tail_bound_oracle

use lsqlab::constants::{recursion_condition, recursion_oracle, tail_bound};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    println!("# Hand-checkable instances");
    let b = tail_bound(&[1.0, 0.0, 0.0], 0.5, 2.0, 1.0, None).unwrap();
    println!("unit mass at the base, J = 1/2, q = 2: bound = {b:.12} (= 4/3)");
    let p = recursion_oracle(&[1.0, 0.0, 0.0], 0.5, 2.0, 1.0, 30, 0.0).unwrap();
    println!("oracle fixed point: P(4) = {:.12}", p[0]);

    let p = recursion_oracle(&[1.0, 2.0, 0.5], 0.0, 2.0, 5.0, 8, 0.0).unwrap();
    println!("zero coupling decouples the recursion: P = {:?}", &p[..3]);

    println!("\n# Random admissible instances");
    println!("q\tJ\tK'\toracle P(4)\tbound\tmargin");
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut done = 0;
    let mut min_margin = f64::INFINITY;
    while done < 25 {
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
        let margin = bound - p[0];
        min_margin = min_margin.min(margin);
        println!("{q:.3}\t{j:.3}\t{k_prime:.3}\t{:.6e}\t{bound:.6e}\t{margin:+.3e}", p[0]);
        assert!(margin >= -1e-12, "dominance failed");
        done += 1;
    }
    println!("\nminimum margin over {done} instances: {min_margin:+.6e}");

    println!("\n# Eventually-constant driving sequences use the geometric remainder");
    let b0 = tail_bound(&[2.0, 1.0, 1.0], 0.4, 1.8, 0.8, None).unwrap();
    let b1 = tail_bound(&[2.0, 1.0, 1.0], 0.4, 1.8, 0.8, Some(1.0)).unwrap();
    println!("truncated: {b0:.6e}, with constant tail 1.0: {b1:.6e}");
}
