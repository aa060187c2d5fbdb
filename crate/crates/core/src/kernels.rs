//! The samplers as single stochastic steps and as exact dense transition
//! matrices, plus the continuous-time generators they discretize.
//!
//! Every flip probability is evaluated as `σ(-2/η - c)` with the stable
//! sigmoid; at `η = 0.05` the factor `e^{-2/η}` is about `4e-18`, so forming
//! and normalizing exponentials directly loses everything.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{normalize_log_weights, sigmoid};
use crate::models::TargetModel;
use crate::scores::{ScoreField, ScoreKind};
use crate::statespace::{spin_of_index, BitState};
use crate::DENSE_DIM_CAP;

/// Dense DMAPS construction is `O(8^d)`; past this it stops being interactive.
pub const DMAPS_DIM_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Gibbs,
    Dula,
    Dmala,
    Dups,
    Dmaps,
    Prox,
}

impl Sampler {
    pub const ALL: [Sampler; 6] = [
        Sampler::Gibbs,
        Sampler::Dula,
        Sampler::Dmala,
        Sampler::Dups,
        Sampler::Dmaps,
        Sampler::Prox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sampler::Gibbs => "gibbs",
            Sampler::Dula => "dula",
            Sampler::Dmala => "dmala",
            Sampler::Dups => "dups",
            Sampler::Dmaps => "dmaps",
            Sampler::Prox => "prox",
        }
    }

    /// Gibbs and the exact proximal kernel work from `log p` directly.
    pub fn uses_score(self) -> bool {
        !matches!(self, Sampler::Gibbs | Sampler::Prox)
    }

    pub fn is_metropolis(self) -> bool {
        matches!(self, Sampler::Dmala | Sampler::Dmaps)
    }

    /// Whether a single-step simulator exists (the proximal kernel is matrix-only).
    pub fn has_step(self) -> bool {
        self != Sampler::Prox
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Sampler::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown sampler `{s}` (expected gibbs | dula | dmala | dups | dmaps | prox)"
                ))
            })
    }
}

/// Dense row-stochastic `2^d x 2^d` matrix, row = current state.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    dim: usize,
    entries: Vec<f64>,
    pub eta: f64,
    pub sampler: Option<Sampler>,
    pub score: Option<ScoreKind>,
}

impl KernelMatrix {
    /// Wraps arbitrary entries, e.g. a hand-built test kernel.
    pub fn from_entries(dim: usize, entries: Vec<f64>, eta: f64) -> Result<Self> {
        Error::check_cap("KernelMatrix", dim, DENSE_DIM_CAP)?;
        let n = 1usize << dim;
        if entries.len() != n * n {
            return Err(Error::Contract(format!(
                "expected {} entries for d = {dim}, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(KernelMatrix {
            dim,
            entries,
            eta,
            sampler: None,
            score: None,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let n = 1usize << dim;
        let mut e = vec![0.0; n * n];
        for k in 0..n {
            e[k * n + k] = 1.0;
        }
        Self::from_entries(dim, e, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states `2^d`.
    pub fn n(&self) -> usize {
        1 << self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n() + to]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.entries[k * n..(k + 1) * n]
    }

    /// `max_x |Σ_y t(y|x) - 1|`.
    pub fn max_row_sum_error(&self) -> f64 {
        self.entries
            .chunks(self.n())
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest row-wise L1 distance to another kernel.
    pub fn max_row_l1(&self, other: &KernelMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Contract("kernel dimensions differ".into()));
        }
        let n = self.n();
        Ok(self
            .entries
            .chunks(n)
            .zip(other.entries.chunks(n))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(0.0, f64::max))
    }

    fn tagged(mut self, sampler: Sampler, score: Option<ScoreKind>) -> Self {
        self.sampler = Some(sampler);
        self.score = score;
        self
    }
}

/// Dense rate matrix with zero row sums.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        1 << self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n() + to]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.entries[k * n..(k + 1) * n]
    }

    /// Builds `Q` from per-(state, coordinate) flip rates.
    fn from_rates(dim: usize, rate: impl Fn(usize, usize) -> f64 + Sync) -> Result<Self> {
        Error::check_cap("generator", dim, DENSE_DIM_CAP)?;
        let n = 1usize << dim;
        let mut entries = vec![0.0; n * n];
        entries.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
            let mut out = 0.0;
            for i in 0..dim {
                let r = rate(k, i);
                row[k ^ (1 << i)] = r;
                out += r;
            }
            row[k] = -out;
        });
        Ok(GeneratorMatrix { dim, entries })
    }
}

/// Result of one transition. Unadjusted kernels always accept and
/// `next == proposal`; two-stage kernels also report the auxiliary `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: BitState,
    pub accepted: bool,
    pub proposal: BitState,
    pub auxiliary: Option<BitState>,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && !eta.is_nan() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("step size eta must be > 0, got {eta}")))
    }
}

/// `e^{-2/η}`, the per-step Glauber rate multiplier.
pub fn gibbs_damping(eta: f64) -> f64 {
    (-2.0 / eta).exp()
}

fn check_gibbs(eta: f64, dim: usize) -> Result<f64> {
    check_eta(eta)?;
    let c = gibbs_damping(eta);
    if c * dim as f64 > 1.0 {
        return Err(Error::Parameter(format!(
            "damped Gibbs needs e^(-2/eta) <= 1/d; eta = {eta} gives {c:.6} > 1/{dim}"
        )));
    }
    Ok(c)
}

fn check_score(m: &TargetModel, s: &ScoreField) -> Result<()> {
    if s.model() != m {
        return Err(Error::Contract(
            "score field was built for a different model".into(),
        ));
    }
    Ok(())
}

/// Reusable single-step simulator with scratch buffers, shared by the
/// `*_step` functions and the chain runner.
pub struct Stepper<'a> {
    sampler: Sampler,
    model: &'a TargetModel,
    score: Option<&'a ScoreField>,
    eta: f64,
    gibbs_c: f64,
    s_buf: Vec<f64>,
    s_rev: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        sampler: Sampler,
        model: &'a TargetModel,
        score: Option<&'a ScoreField>,
        eta: f64,
    ) -> Result<Self> {
        check_eta(eta)?;
        let d = model.dim();
        let mut gibbs_c = 0.0;
        match sampler {
            Sampler::Gibbs => gibbs_c = check_gibbs(eta, d)?,
            Sampler::Prox => {
                return Err(Error::Parameter(
                    "the exact proximal kernel has no step simulator".into(),
                ))
            }
            _ => match score {
                Some(s) => check_score(model, s)?,
                None => {
                    return Err(Error::Parameter(format!(
                        "sampler {sampler} needs a score field"
                    )))
                }
            },
        }
        Ok(Stepper {
            sampler,
            model,
            score,
            eta,
            gibbs_c,
            s_buf: vec![0.0; if sampler.uses_score() { d } else { 0 }],
            s_rev: vec![0.0; if sampler == Sampler::Dmala { d } else { 0 }],
        })
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler
    }

    pub fn step<R: Rng + ?Sized>(&mut self, x: &BitState, rng: &mut R) -> StepOutcome {
        match self.sampler {
            Sampler::Gibbs => self.gibbs(x, rng),
            Sampler::Dula => {
                let y = self.dula_proposal(x, rng);
                StepOutcome {
                    next: y.clone(),
                    accepted: true,
                    proposal: y,
                    auxiliary: None,
                }
            }
            Sampler::Dmala => self.dmala(x, rng),
            Sampler::Dups => {
                let z = self.stage_one(x, rng);
                let y = self.stage_two(&z, rng);
                StepOutcome {
                    next: y.clone(),
                    accepted: true,
                    proposal: y,
                    auxiliary: Some(z),
                }
            }
            Sampler::Dmaps => self.dmaps(x, rng),
            Sampler::Prox => unreachable!("rejected in Stepper::new"),
        }
    }

    fn gibbs<R: Rng + ?Sized>(&mut self, x: &BitState, rng: &mut R) -> StepOutcome {
        let d = x.dim();
        let i = rng.gen_range(0..d);
        // t(x^i|x) = c σ(-2 x_i δ_i) and -2 x_i δ_i is the flip log-ratio
        let p = d as f64 * self.gibbs_c * sigmoid(self.model.flip_log_ratio(x, i));
        let mut y = x.clone();
        if rng.gen::<f64>() < p {
            y.flip_mut(i);
        }
        StepOutcome {
            next: y.clone(),
            accepted: true,
            proposal: y,
            auxiliary: None,
        }
    }

    fn dula_proposal<R: Rng + ?Sized>(&mut self, x: &BitState, rng: &mut R) -> BitState {
        let s = self.score.expect("score checked in new");
        s.eval_into(x, &mut self.s_buf);
        let a = -2.0 / self.eta;
        let mut y = x.clone();
        for (i, &si) in self.s_buf.iter().enumerate() {
            if rng.gen::<f64>() < sigmoid(a - x.spin(i) * si) {
                y.flip_mut(i);
            }
        }
        y
    }

    /// `z ~ u(·|x)`: every coordinate flips with probability `σ(-2/η)`.
    fn stage_one<R: Rng + ?Sized>(&mut self, x: &BitState, rng: &mut R) -> BitState {
        let p = sigmoid(-2.0 / self.eta);
        let mut z = x.clone();
        for i in 0..x.dim() {
            if rng.gen::<f64>() < p {
                z.flip_mut(i);
            }
        }
        z
    }

    /// `x' ~ v̂(·|z)`; leaves `s(z)` in `s_buf`.
    fn stage_two<R: Rng + ?Sized>(&mut self, z: &BitState, rng: &mut R) -> BitState {
        let s = self.score.expect("score checked in new");
        s.eval_into(z, &mut self.s_buf);
        let a = -2.0 / self.eta;
        let mut y = z.clone();
        for (i, &si) in self.s_buf.iter().enumerate() {
            if rng.gen::<f64>() < sigmoid(a - 2.0 * z.spin(i) * si) {
                y.flip_mut(i);
            }
        }
        y
    }

    fn dmala<R: Rng + ?Sized>(&mut self, x: &BitState, rng: &mut R) -> StepOutcome {
        let y = self.dula_proposal(x, rng);
        let s = self.score.expect("score checked in new");
        s.eval_into(&y, &mut self.s_rev);
        let a = -2.0 / self.eta;
        // log t(y|x) - log t(x|y), one factor per coordinate
        let mut log_ratio = 0.0;
        for i in 0..x.dim() {
            let fwd = a - x.spin(i) * self.s_buf[i];
            let rev = a - y.spin(i) * self.s_rev[i];
            if x.is_plus(i) != y.is_plus(i) {
                log_ratio += log_sig(fwd) - log_sig(rev);
            } else {
                log_ratio += log_sig(-fwd) - log_sig(-rev);
            }
        }
        let log_a = self.model.log_weight(&y) - self.model.log_weight(x) - log_ratio;
        self.metropolis(x, y, None, log_a, rng)
    }

    fn dmaps<R: Rng + ?Sized>(&mut self, x: &BitState, rng: &mut R) -> StepOutcome {
        let z = self.stage_one(x, rng);
        let y = self.stage_two(&z, rng);
        let mut lin = 0.0;
        for i in 0..x.dim() {
            if x.is_plus(i) != y.is_plus(i) {
                lin += 2.0 * x.spin(i) * self.s_buf[i];
            }
        }
        let log_a = self.model.log_weight(&y) - self.model.log_weight(x) + lin;
        self.metropolis(x, y, Some(z), log_a, rng)
    }

    fn metropolis<R: Rng + ?Sized>(
        &self,
        x: &BitState,
        y: BitState,
        z: Option<BitState>,
        log_a: f64,
        rng: &mut R,
    ) -> StepOutcome {
        let accepted = log_a >= 0.0 || rng.gen::<f64>() < log_a.exp();
        StepOutcome {
            next: if accepted { y.clone() } else { x.clone() },
            accepted,
            proposal: y,
            auxiliary: z,
        }
    }
}

#[inline]
fn log_sig(t: f64) -> f64 {
    crate::math::log_sigmoid(t)
}

pub fn gibbs_step<R: Rng + ?Sized>(
    m: &TargetModel,
    x: &BitState,
    eta: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(Stepper::new(Sampler::Gibbs, m, None, eta)?.step(x, rng))
}

pub fn dula_step<R: Rng + ?Sized>(
    m: &TargetModel,
    s: &ScoreField,
    x: &BitState,
    eta: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(Stepper::new(Sampler::Dula, m, Some(s), eta)?.step(x, rng))
}

pub fn dmala_step<R: Rng + ?Sized>(
    m: &TargetModel,
    s: &ScoreField,
    x: &BitState,
    eta: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(Stepper::new(Sampler::Dmala, m, Some(s), eta)?.step(x, rng))
}

pub fn dups_step<R: Rng + ?Sized>(
    m: &TargetModel,
    s: &ScoreField,
    x: &BitState,
    eta: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(Stepper::new(Sampler::Dups, m, Some(s), eta)?.step(x, rng))
}

pub fn dmaps_step<R: Rng + ?Sized>(
    m: &TargetModel,
    s: &ScoreField,
    x: &BitState,
    eta: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(Stepper::new(Sampler::Dmaps, m, Some(s), eta)?.step(x, rng))
}

/// Fills `out[y] = Π_i (y_i ≠ c_i ? q_i : 1 - q_i)` for all `2^d` states `y`.
fn product_row(center: usize, flip: &[f64], out: &mut [f64]) {
    out[0] = 1.0;
    for (i, &q) in flip.iter().enumerate() {
        let half = 1usize << i;
        let (p_minus, p_plus) = if (center >> i) & 1 == 1 {
            (q, 1.0 - q)
        } else {
            (1.0 - q, q)
        };
        for k in 0..half {
            let v = out[k];
            out[k] = v * p_minus;
            out[k + half] = v * p_plus;
        }
    }
}

/// Row-major matrix with each row a product law around its own index.
fn product_matrix(dim: usize, flip_of: impl Fn(usize, &mut [f64]) + Sync) -> Vec<f64> {
    let n = 1usize << dim;
    let mut e = vec![0.0; n * n];
    e.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let mut q = vec![0.0; dim];
        flip_of(k, &mut q);
        product_row(k, &q, row);
    });
    e
}

/// Left-multiplies a row-major `n x n` matrix by `u(z|x)`, the
/// `σ(-2/η)` independent-flip kernel, one coordinate at a time (`O(n² d)`).
fn apply_stage_one(dim: usize, eta: f64, m: &mut [f64]) {
    let n = 1usize << dim;
    let a = sigmoid(-2.0 / eta);
    let b = sigmoid(2.0 / eta);
    for i in 0..dim {
        let half = (1usize << i) * n;
        m.par_chunks_mut(2 * half).for_each(|block| {
            let (r0, r1) = block.split_at_mut(half);
            for (p, q) in r0.iter_mut().zip(r1.iter_mut()) {
                let (u, v) = (*p, *q);
                *p = b * u + a * v;
                *q = a * u + b * v;
            }
        });
    }
}

fn dense_prelude(m: &TargetModel, s: Option<&ScoreField>, eta: f64) -> Result<usize> {
    check_eta(eta)?;
    let d = m.dim();
    Error::check_cap("dense kernel", d, DENSE_DIM_CAP)?;
    if let Some(s) = s {
        check_score(m, s)?;
    }
    Ok(d)
}

/// Damped Gibbs: `t(x^i|x) = e^{-2/η} σ(-2 x_i δ_i)`, remaining mass stays.
pub fn gibbs_matrix(m: &TargetModel, eta: f64) -> Result<KernelMatrix> {
    let d = dense_prelude(m, None, eta)?;
    let c = check_gibbs(eta, d)?;
    let n = 1usize << d;
    let lw = m.log_weight_table()?;
    let mut e = vec![0.0; n * n];
    e.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let mut out = 0.0;
        for i in 0..d {
            let y = k ^ (1 << i);
            let p = c * sigmoid(lw[y] - lw[k]);
            row[y] = p;
            out += p;
        }
        row[k] = 1.0 - out;
    });
    Ok(KernelMatrix::from_entries(d, e, eta)?.tagged(Sampler::Gibbs, None))
}

/// DULA: independent flips with probability `σ(-2/η - x_i s(x)_i)`.
pub fn dula_matrix(m: &TargetModel, s: &ScoreField, eta: f64) -> Result<KernelMatrix> {
    let d = dense_prelude(m, Some(s), eta)?;
    let s = s.ensure_table("dula_matrix")?;
    let a = -2.0 / eta;
    let e = product_matrix(d, |k, q| {
        for (i, (qi, si)) in q.iter_mut().zip(s.row(k)).enumerate() {
            *qi = sigmoid(a - spin_of_index(k, i) * si);
        }
    });
    Ok(KernelMatrix::from_entries(d, e, eta)?.tagged(Sampler::Dula, Some(s.kind())))
}

/// DMALA: the DULA proposal with Metropolis correction,
/// `t(y|x) = min{t_DULA(y|x), p(y)/p(x) · t_DULA(x|y)}` off the diagonal.
pub fn dmala_matrix(m: &TargetModel, s: &ScoreField, eta: f64) -> Result<KernelMatrix> {
    let d = dense_prelude(m, Some(s), eta)?;
    let prop = dula_matrix(m, s, eta)?;
    let lw = m.log_weight_table()?;
    let n = 1usize << d;
    let mut e = vec![0.0; n * n];
    e.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let mut moved = 0.0;
        for y in 0..n {
            if y == k {
                continue;
            }
            let fwd = prop.get(k, y);
            let rev = (lw[y] - lw[k]).exp() * prop.get(y, k);
            let v = fwd.min(rev);
            row[y] = v;
            moved += v;
        }
        row[k] = 1.0 - moved;
    });
    Ok(KernelMatrix::from_entries(d, e, eta)?.tagged(Sampler::Dmala, Some(s.kind())))
}

/// Row-major table of `v̂(y|z)`: independent flips of `z` with probability
/// `σ(-2/η - 2 z_i s(z)_i)`.
pub(crate) fn stage_two_table(s: &ScoreField, eta: f64) -> Result<Vec<f64>> {
    let s = s.ensure_table("stage_two_table")?;
    let a = -2.0 / eta;
    Ok(product_matrix(s.dim(), |k, q| {
        for (i, (qi, si)) in q.iter_mut().zip(s.row(k)).enumerate() {
            *qi = sigmoid(a - 2.0 * spin_of_index(k, i) * si);
        }
    }))
}

/// Stage-one law `u(z|x)` as a function of the Hamming distance.
pub(crate) fn stage_one_by_distance(dim: usize, eta: f64) -> Vec<f64> {
    let a = sigmoid(-2.0 / eta);
    let b = sigmoid(2.0 / eta);
    (0..=dim)
        .map(|h| a.powi(h as i32) * b.powi((dim - h) as i32))
        .collect()
}

/// DUPS: `u · v̂`.
pub fn dups_matrix(m: &TargetModel, s: &ScoreField, eta: f64) -> Result<KernelMatrix> {
    let d = dense_prelude(m, Some(s), eta)?;
    let mut e = stage_two_table(s, eta)?;
    apply_stage_one(d, eta, &mut e);
    Ok(KernelMatrix::from_entries(d, e, eta)?.tagged(Sampler::Dups, Some(s.kind())))
}

/// DMAPS: exact sum over the auxiliary state,
/// `t(y|x) = Σ_z u(z|x) v̂(y|z) A_z(y|x)` for `y ≠ x`, rejections on the diagonal,
/// with `A_z(y|x) = min{1, p(y)/p(x) · exp((x - y)ᵀ s(z))}`.
pub fn dmaps_matrix(m: &TargetModel, s: &ScoreField, eta: f64) -> Result<KernelMatrix> {
    Error::check_cap("dmaps_matrix", m.dim(), DMAPS_DIM_CAP)?;
    let d = dense_prelude(m, Some(s), eta)?;
    let n = 1usize << d;
    let vhat = stage_two_table(s, eta)?;
    let g = acceptance_potential(m, s)?;
    let u = stage_one_by_distance(d, eta);
    let mut e = vec![0.0; n * n];
    e.par_chunks_mut(n).enumerate().for_each(|(x, row)| {
        for z in 0..n {
            let w = u[(x ^ z).count_ones() as usize];
            let vz = &vhat[z * n..(z + 1) * n];
            let gz = &g[z * n..(z + 1) * n];
            let gx = gz[x];
            for y in 0..n {
                let diff = gz[y] - gx;
                let acc = if diff >= 0.0 { 1.0 } else { diff.exp() };
                row[y] += w * vz[y] * acc;
            }
        }
        let moved: f64 = row.iter().enumerate().filter(|&(y, _)| y != x).map(|(_, v)| v).sum();
        row[x] = 1.0 - moved;
    });
    Ok(KernelMatrix::from_entries(d, e, eta)?.tagged(Sampler::Dmaps, Some(s.kind())))
}

/// `g[z][y] = log p(y) - yᵀ s(z)`, so that `log A_z(y|x) = min{0, g[z][y] - g[z][x]}`.
pub(crate) fn acceptance_potential(m: &TargetModel, s: &ScoreField) -> Result<Vec<f64>> {
    let s = s.ensure_table("acceptance_potential")?;
    let d = m.dim();
    let n = 1usize << d;
    let lw = m.log_weight_table()?;
    let mut g = vec![0.0; n * n];
    g.par_chunks_mut(n).enumerate().for_each(|(z, gz)| {
        let sz = s.row(z);
        for (y, v) in gz.iter_mut().enumerate() {
            let dot: f64 = (0..d).map(|i| spin_of_index(y, i) * sz[i]).sum();
            *v = lw[y] - dot;
        }
    });
    Ok(g)
}

/// Exact Gibbs-proximal kernel `Σ_z u(z|x) v(y|z)` with
/// `v(y|z) ∝ p(y) exp(zᵀy/η)`.
pub fn prox_exact_matrix(m: &TargetModel, eta: f64) -> Result<KernelMatrix> {
    let d = dense_prelude(m, None, eta)?;
    let n = 1usize << d;
    let lw = m.log_weight_table()?;
    let mut e = vec![0.0; n * n];
    e.par_chunks_mut(n).enumerate().for_each(|(z, row)| {
        let logs: Vec<f64> = (0..n)
            .map(|y| lw[y] + (d as f64 - 2.0 * (y ^ z).count_ones() as f64) / eta)
            .collect();
        row.copy_from_slice(&normalize_log_weights(&logs));
    });
    apply_stage_one(d, eta, &mut e);
    Ok(KernelMatrix::from_entries(d, e, eta)?.tagged(Sampler::Prox, None))
}

/// Dispatches on the sampler id; `s` is ignored by Gibbs and the proximal kernel.
pub fn kernel_matrix(
    sampler: Sampler,
    m: &TargetModel,
    s: Option<&ScoreField>,
    eta: f64,
) -> Result<KernelMatrix> {
    let need = || {
        s.ok_or_else(|| Error::Parameter(format!("sampler {sampler} needs a score field")))
    };
    match sampler {
        Sampler::Gibbs => gibbs_matrix(m, eta),
        Sampler::Prox => prox_exact_matrix(m, eta),
        Sampler::Dula => dula_matrix(m, need()?, eta),
        Sampler::Dmala => dmala_matrix(m, need()?, eta),
        Sampler::Dups => dups_matrix(m, need()?, eta),
        Sampler::Dmaps => dmaps_matrix(m, need()?, eta),
    }
}

/// Glauber dynamics: rate `σ(-2 x_i δ_i)` for flipping coordinate `i`.
pub fn glauber_generator(m: &TargetModel) -> Result<GeneratorMatrix> {
    Error::check_cap("glauber_generator", m.dim(), DENSE_DIM_CAP)?;
    let lw = m.log_weight_table()?;
    GeneratorMatrix::from_rates(m.dim(), |k, i| sigmoid(lw[k ^ (1 << i)] - lw[k]))
}

/// Continuous-time limit of DULA: rate `exp(-x_i s(x)_i)`.
pub fn dula_generator(s: &ScoreField) -> Result<GeneratorMatrix> {
    let s = s.ensure_table("dula_generator")?;
    GeneratorMatrix::from_rates(s.dim(), |k, i| {
        (-spin_of_index(k, i) * s.row(k)[i]).exp()
    })
}

/// Continuous-time limit of DUPS: rate `1 + exp(-2 x_i s(x)_i)`.
pub fn dups_generator(s: &ScoreField) -> Result<GeneratorMatrix> {
    let s = s.ensure_table("dups_generator")?;
    GeneratorMatrix::from_rates(s.dim(), |k, i| {
        1.0 + (-2.0 * spin_of_index(k, i) * s.row(k)[i]).exp()
    })
}
