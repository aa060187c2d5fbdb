mod common;

use hyperlangevin::analysis::{wasserstein_hamming, wasserstein_slices};
use hyperlangevin::models::DistVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn flow_matches_transport_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for d in 1..=4 {
        for _ in 0..25 {
            let p = common::random_law(1 << d, &mut rng);
            let q = common::random_law(1 << d, &mut rng);
            let flow = wasserstein_slices(&p, &q, d).unwrap();
            let lp = common::lp_wasserstein(&p, &q);
            assert!((flow - lp).abs() < 1e-9, "d={d}: flow {flow} lp {lp}");
        }
    }
}

#[test]
fn sparse_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let mut p = common::random_law(8, &mut rng);
        let mut q = common::random_law(8, &mut rng);
        for k in 0..4 {
            p[k] = 0.0;
            q[7 - k] = 0.0;
        }
        let (zp, zq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        p.iter_mut().for_each(|v| *v /= zp);
        q.iter_mut().for_each(|v| *v /= zq);
        let a = wasserstein_hamming(&DistVector::new(p.clone()).unwrap(), &DistVector::new(q.clone()).unwrap()).unwrap();
        assert!((a - common::lp_wasserstein(&p, &q)).abs() < 1e-9);
    }
}
