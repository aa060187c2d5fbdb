//! Long-run chain estimators against exact small-`d` laws.

use hyperlangevin::analysis::stationary;
use hyperlangevin::kernels::{dula_matrix, kernel_matrix, Sampler};
use hyperlangevin::models::TargetModel;
use hyperlangevin::scores::{ScoreField, ScoreKind};
use hyperlangevin::simulate::{run_chain, ChainConfig};

/// With a constant score DULA factorizes over coordinates, so each marginal
/// of the d = 50 chain follows the d = 1 kernel. Its standard error uses the
/// two-state autocorrelation `λ = 1 - a - b`.
#[test]
fn dula_marginals_on_large_product_target() {
    let (beta, eta, steps) = (0.3, 0.3, 1_000_000u64);
    let one = TargetModel::independent_bits(beta, 1).unwrap();
    let t1 = dula_matrix(&one, &ScoreField::tabulated(ScoreKind::Stein, &one).unwrap(), eta).unwrap();
    let want = stationary(&t1).unwrap().values()[1];
    let lambda = 1.0 - t1.get(0, 1) - t1.get(1, 0);

    let m = TargetModel::independent_bits(beta, 50).unwrap();
    let mut cfg = ChainConfig::new(Sampler::Dula, m, Some(ScoreKind::Stein), eta);
    cfg.steps = steps;
    cfg.burn_in = 20_000;
    cfg.seed = 31;
    let st = &run_chain(&cfg).unwrap().chains[0];
    let n = st.samples as f64;
    let se = (want * (1.0 - want) / n * (1.0 + lambda) / (1.0 - lambda)).sqrt();
    let mean = st.marginals.iter().sum::<f64>() / 50.0;
    assert!((mean - want).abs() <= 3.0 * se / 50f64.sqrt(), "{mean} vs {want}");
    for &v in &st.marginals {
        assert!((v - want).abs() <= 4.0 * se, "{v} vs {want} (se {se})");
    }
    // close to the continuous-time answer σ(2β)
    assert!((want - 1.0 / (1.0 + (-2.0 * beta).exp())).abs() < 1e-3);
}

/// Long-run state frequencies of every sampler match the exact stationary law
/// within 4 binomial standard errors of the thinned sample count.
#[test]
fn state_frequencies_match_stationary_laws() {
    let models = [
        TargetModel::bits_mixture(0.6, 3).unwrap(),
        TargetModel::curie_weiss(0.3, 0.5, 4).unwrap(),
    ];
    for m in models {
        for sampler in [Sampler::Gibbs, Sampler::Dula, Sampler::Dmala, Sampler::Dups, Sampler::Dmaps] {
            let eta = 0.9;
            let s = ScoreField::tabulated(ScoreKind::Stein, &m).unwrap();
            let t = kernel_matrix(sampler, &m, Some(&s), eta).unwrap();
            let pi = stationary(&t).unwrap();
            let spec = hyperlangevin::analysis::spectral_summary_with(&t, &pi).unwrap();
            let thin = (5.0 * spec.t_rel).ceil() as u64;
            let mut cfg = ChainConfig::new(sampler, m, Some(ScoreKind::Stein), eta);
            cfg.steps = 400_000;
            cfg.burn_in = 20 * thin;
            cfg.thinning = thin;
            cfg.state_counts = true;
            cfg.seed = 77;
            let st = &run_chain(&cfg).unwrap().chains[0];
            let counts = st.state_counts.as_ref().unwrap();
            let n = st.samples as f64;
            for (c, &p) in counts.iter().zip(pi.values()) {
                let se = (p * (1.0 - p) / n).sqrt();
                assert!((*c as f64 / n - p).abs() <= 4.0 * se, "{sampler} {}: {c}/{n} vs {p}", m.label());
            }
        }
    }
}
