//! Continuous-time single-flip jump processes and the one-step discretization
//! residual `‖t - (I + hQ)‖` with `h = e^{-2/η}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{GeneratorMatrix, KernelMatrix};
use crate::math::sigmoid;
use crate::models::TargetModel;
use crate::statespace::BitState;
use crate::DENSE_DIM_CAP;

/// Piecewise-constant path: `states[k]` holds on `[times[k], times[k+1])`,
/// the last state until `horizon`. `times[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BitState>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn jumps(&self) -> usize {
        self.states.len() - 1
    }

    /// Time-weighted fraction spent in each state, indexed canonically.
    pub fn occupation(&self) -> Result<Vec<f64>> {
        let d = self.states[0].dim();
        Error::check_cap("occupation", d, DENSE_DIM_CAP)?;
        let mut occ = vec![0.0; 1 << d];
        for (k, x) in self.states.iter().enumerate() {
            let end = self.times.get(k + 1).copied().unwrap_or(self.horizon);
            occ[x.index_of()?] += end - self.times[k];
        }
        occ.iter_mut().for_each(|v| *v /= self.horizon);
        Ok(occ)
    }
}

/// Standard exponential variate by inversion; `1 - U` lies in `(0, 1]`.
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

/// Gillespie simulation of the process flipping coordinate `i` at rate
/// `rate(x, i)`, up to time `horizon`.
pub fn ctmc_simulate<F, R>(rate: F, x0: &BitState, horizon: f64, rng: &mut R) -> Result<Trajectory>
where
    F: Fn(&BitState, usize) -> f64,
    R: Rng + ?Sized,
{
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    let d = x0.dim();
    let mut x = x0.clone();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut rates = vec![0.0; d];
    loop {
        let mut total = 0.0;
        for (i, r) in rates.iter_mut().enumerate() {
            *r = rate(&x, i);
            if !(*r >= 0.0 && r.is_finite()) {
                return Err(Error::Parameter(format!("rate {r} at coordinate {i} is not a finite nonnegative number")));
            }
            total += *r;
        }
        if total == 0.0 {
            break;
        }
        t += exp1(rng) / total;
        if t >= horizon {
            break;
        }
        let mut target = rng.gen::<f64>() * total;
        let mut pick = d - 1;
        for (i, &r) in rates.iter().enumerate() {
            if target < r {
                pick = i;
                break;
            }
            target -= r;
        }
        // guard against the round-off case where `pick` landed on a zero rate
        while rates[pick] == 0.0 {
            pick -= 1;
        }
        x.flip_mut(pick);
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory {
        times,
        states,
        horizon,
    })
}

/// Glauber dynamics rates `σ(-2 x_i δ_i) = σ(log p(x^i) - log p(x))`.
pub fn glauber_rates(m: &TargetModel) -> impl Fn(&BitState, usize) -> f64 + '_ {
    move |x, i| sigmoid(m.flip_log_ratio(x, i))
}

/// `max_x Σ_y |t(y|x) - (δ_xy + h Q_xy)|` with `h = e^{-2/t.eta}`.
pub fn discretization_residual(t: &KernelMatrix, q: &GeneratorMatrix) -> Result<f64> {
    if t.dim() != q.dim() {
        return Err(Error::Contract(format!(
            "kernel has d = {}, generator has d = {}",
            t.dim(),
            q.dim()
        )));
    }
    let h = (-2.0 / t.eta).exp();
    let n = t.n();
    Ok((0..n)
        .map(|x| {
            t.row(x)
                .iter()
                .zip(q.row(x))
                .enumerate()
                .map(|(y, (a, r))| {
                    let id = if x == y { 1.0 } else { 0.0 };
                    (a - id - h * r).abs()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}
