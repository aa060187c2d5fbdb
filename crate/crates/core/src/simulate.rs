//! Seeded Monte Carlo chains with streaming estimators.
//!
//! Randomness: ChaCha8 seeded from the 64-bit `seed`, with chain `c` on
//! stream `c` of that key, so chains are independent and each chain's
//! output depends only on `(seed, c)`, not on scheduling.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{Sampler, Stepper};
use crate::models::TargetModel;
use crate::scores::{ScoreField, ScoreKind};
use crate::statespace::{BitState, SIM_DIM_CAP};
use crate::DENSE_DIM_CAP;

#[derive(Debug, Clone, Serialize)]
pub struct ChainConfig {
    pub sampler: Sampler,
    pub model: TargetModel,
    /// Ignored by Gibbs.
    pub score: Option<ScoreKind>,
    pub eta: f64,
    pub steps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub chains: usize,
    pub seed: u64,
    /// Keep a full state-count table of the retained samples (small `d` only).
    pub state_counts: bool,
    /// Record the first `dump_limit` retained samples of each chain.
    pub dump_limit: usize,
}

impl ChainConfig {
    pub fn new(sampler: Sampler, model: TargetModel, score: Option<ScoreKind>, eta: f64) -> Self {
        ChainConfig {
            sampler,
            model,
            score,
            eta,
            steps: 10_000,
            burn_in: 1_000,
            thinning: 1,
            chains: 1,
            seed: 0,
            state_counts: false,
            dump_limit: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.steps <= self.burn_in {
            return bad(format!(
                "steps ({}) must exceed burn-in ({})",
                self.steps, self.burn_in
            ));
        }
        if self.thinning == 0 {
            return bad("thinning must be >= 1".into());
        }
        if self.chains == 0 {
            return bad("chains must be >= 1".into());
        }
        if !self.sampler.has_step() {
            return bad(format!("sampler {} cannot be simulated", self.sampler));
        }
        if self.sampler.uses_score() && self.score.is_none() {
            return bad(format!("sampler {} needs a score", self.sampler));
        }
        let d = self.model.dim();
        Error::check_cap("run_chain", d, SIM_DIM_CAP)?;
        if self.state_counts {
            Error::check_cap("state counts", d, DENSE_DIM_CAP)?;
        }
        // surfaces step-size errors (e.g. the damped Gibbs constraint) up front
        let s = self.score.map(|k| ScoreField::new(k, &self.model));
        Stepper::new(self.sampler, &self.model, s.as_ref(), self.eta)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DumpRow {
    pub step: u64,
    pub state_hex: String,
    pub magnetization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub chain: usize,
    /// Number of retained samples.
    pub samples: u64,
    pub mean_magnetization: f64,
    /// `P(x_i = +1)` estimates.
    pub marginals: Vec<f64>,
    /// Counts of `#{i : x_i = +1}`, bins `0..=d`.
    pub histogram: Vec<u64>,
    /// Accepted fraction of post-burn-in steps (1 for unadjusted samplers).
    pub acceptance: f64,
    pub state_counts: Option<Vec<u64>>,
    pub dump: Vec<DumpRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub chains: Vec<ChainStats>,
    pub wall_seconds: f64,
    pub steps_per_second: f64,
}

/// Runs `cfg.chains` independent chains in parallel.
pub fn run_chain(cfg: &ChainConfig) -> Result<SimResult> {
    cfg.validate()?;
    let d = cfg.model.dim();
    let score = match cfg.score {
        Some(k) if cfg.sampler.uses_score() => Some(if d <= DENSE_DIM_CAP {
            ScoreField::tabulated(k, &cfg.model)?
        } else {
            ScoreField::new(k, &cfg.model)
        }),
        _ => None,
    };
    let start = Instant::now();
    let chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| one_chain(cfg, score.as_ref(), c))
        .collect::<Result<Vec<_>>>()?;
    let wall = start.elapsed().as_secs_f64();
    let total = cfg.steps as f64 * cfg.chains as f64;
    Ok(SimResult {
        chains,
        wall_seconds: wall,
        steps_per_second: if wall > 0.0 { total / wall } else { f64::INFINITY },
    })
}

/// Generator for chain `c` under `seed`.
pub fn chain_rng(seed: u64, c: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(c as u64);
    rng
}

fn one_chain(cfg: &ChainConfig, score: Option<&ScoreField>, c: usize) -> Result<ChainStats> {
    let d = cfg.model.dim();
    let mut rng = chain_rng(cfg.seed, c);
    let mut stepper = Stepper::new(cfg.sampler, &cfg.model, score, cfg.eta)?;
    let mut x = BitState::all_minus(d);
    for i in 0..d {
        if rng.gen::<bool>() {
            x.flip_mut(i);
        }
    }
    let mut plus = vec![0u64; d];
    let mut histogram = vec![0u64; d + 1];
    let mut counts = cfg.state_counts.then(|| vec![0u64; 1 << d]);
    let mut dump = Vec::new();
    let mut mag_sum = 0.0;
    let mut samples = 0u64;
    let mut accepted = 0u64;
    for step in 1..=cfg.steps {
        let out = stepper.step(&x, &mut rng);
        x = out.next;
        if step <= cfg.burn_in {
            continue;
        }
        accepted += out.accepted as u64;
        if (step - cfg.burn_in) % cfg.thinning != 0 {
            continue;
        }
        samples += 1;
        let k = x.count_plus();
        histogram[k] += 1;
        mag_sum += x.magnetization();
        for (w, word) in x.words().iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                plus[w * 64 + bits.trailing_zeros() as usize] += 1;
                bits &= bits - 1;
            }
        }
        if let Some(c) = counts.as_mut() {
            c[x.words()[0] as usize] += 1;
        }
        if dump.len() < cfg.dump_limit {
            dump.push(DumpRow {
                step,
                state_hex: x.to_hex(),
                magnetization: x.magnetization(),
            });
        }
    }
    let ns = samples as f64;
    Ok(ChainStats {
        chain: c,
        samples,
        mean_magnetization: mag_sum / ns,
        marginals: plus.iter().map(|&v| v as f64 / ns).collect(),
        histogram,
        acceptance: accepted as f64 / (cfg.steps - cfg.burn_in) as f64,
        state_counts: counts,
        dump,
    })
}
