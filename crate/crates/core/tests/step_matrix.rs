//! Empirical one-step laws of the step simulators against the dense rows.

use hyperlangevin::kernels::{kernel_matrix, Sampler, Stepper};
use hyperlangevin::models::TargetModel;
use hyperlangevin::scores::{ScoreField, ScoreKind};
use hyperlangevin::simulate::chain_rng;
use hyperlangevin::BitState;

const N: usize = 200_000;

fn check(m: &TargetModel, sampler: Sampler, kind: ScoreKind, eta: f64, start: usize, seed: u64) {
    let d = m.dim();
    let s = ScoreField::tabulated(kind, m).unwrap();
    let t = kernel_matrix(sampler, m, Some(&s), eta).unwrap();
    let mut st = Stepper::new(sampler, m, Some(&s), eta).unwrap();
    let mut rng = chain_rng(seed, 0);
    let x = BitState::state_of(start as u64, d).unwrap();
    let mut counts = vec![0usize; 1 << d];
    for _ in 0..N {
        counts[st.step(&x, &mut rng).next.index_of().unwrap()] += 1;
    }
    for (y, &c) in counts.iter().enumerate() {
        let p = t.get(start, y);
        let got = c as f64 / N as f64;
        let se = (p * (1.0 - p) / N as f64).sqrt();
        assert!(
            (got - p).abs() <= 5.0 * se + 1e-12,
            "{sampler} {kind} {m:?} η={eta} x={start} y={y}: {got} vs {p} (se {se:.2e})"
        );
    }
}

#[test]
fn one_step_laws_match_rows() {
    let models = [
        TargetModel::ising_grid(2, 2, 0.4, 0.1, false).unwrap(),
        TargetModel::bits_mixture(0.5, 3).unwrap(),
        TargetModel::curie_weiss(0.3, 0.5, 4).unwrap(),
    ];
    let mut seed = 0;
    for m in &models {
        for sampler in [Sampler::Gibbs, Sampler::Dula, Sampler::Dmala, Sampler::Dups, Sampler::Dmaps] {
            for kind in [ScoreKind::Stein, ScoreKind::Glauber] {
                if sampler == Sampler::Gibbs && kind == ScoreKind::Glauber {
                    continue;
                }
                for (eta, start) in [(0.7, 0), (1.2, 5)] {
                    seed += 1;
                    check(m, sampler, kind, eta, start % (1 << m.dim()), seed);
                }
            }
        }
    }
}
