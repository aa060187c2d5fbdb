#![allow(dead_code)]

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rand::Rng;

/// Transport LP over all `4^d` coupling entries with Hamming cost.
pub fn lp_wasserstein(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| lp.add_var((x ^ y).count_ones() as f64, (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for x in 0..n {
        let mut e = LinearExpr::empty();
        for y in 0..n {
            e.add(vars[x][y], 1.0);
        }
        lp.add_constraint(e, ComparisonOp::Eq, p[x]);
    }
    // one column constraint is implied by the others
    for y in 0..n - 1 {
        let mut e = LinearExpr::empty();
        for x in 0..n {
            e.add(vars[x][y], 1.0);
        }
        lp.add_constraint(e, ComparisonOp::Eq, q[y]);
    }
    lp.solve().expect("transport LP is feasible").objective()
}

pub fn random_law<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(2)).collect();
    let z: f64 = v.iter().sum();
    v.into_iter().map(|x| x / z).collect()
}
