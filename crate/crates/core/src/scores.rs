//! Score families and their regularity constants.
//!
//! * Glauber score: `δ log p(x)_i = ½ log p(+1, x_{-i}) - ½ log p(-1, x_{-i})`.
//! * Gibbs score: `s(x)_i = x_i log(1 + exp(2 x_i δ log p(x)_i))`.
//! * Stein score: gradient of a fixed smooth continuation of `log p`:
//!   bits `β 1`, mixture `β tanh(β Σx) 1`, Ising `J Σ_{j~i} x_j + h`,
//!   Curie-Weiss `2β(Σx - b) 1`. These continuations are a modelling choice;
//!   other continuations give other Stein scores.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::softplus;
use crate::models::TargetModel;
use crate::statespace::BitState;
use crate::DENSE_DIM_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Stein,
    Gibbs,
    Glauber,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [ScoreKind::Stein, ScoreKind::Gibbs, ScoreKind::Glauber];

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Stein => "stein",
            ScoreKind::Gibbs => "gibbs",
            ScoreKind::Glauber => "glauber",
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stein" => Ok(ScoreKind::Stein),
            "gibbs" => Ok(ScoreKind::Gibbs),
            "glauber" => Ok(ScoreKind::Glauber),
            other => Err(Error::Parameter(format!(
                "unknown score `{other}` (expected stein | gibbs | glauber)"
            ))),
        }
    }
}

/// Writes the Glauber score of `x` into `out`.
pub fn glauber_score_into(m: &TargetModel, x: &BitState, out: &mut [f64]) {
    let sum = x.sum();
    for (i, o) in out.iter_mut().enumerate() {
        *o = -0.5 * x.spin(i) * m.flip_log_ratio_with_sum(x, i, sum);
    }
}

pub fn glauber_score(m: &TargetModel, x: &BitState) -> Vec<f64> {
    let mut out = vec![0.0; m.dim()];
    glauber_score_into(m, x, &mut out);
    out
}

/// Gibbs transform of a Glauber component at coordinate value `xi`.
#[inline]
pub fn gibbs_from_glauber(xi: f64, delta: f64) -> f64 {
    xi * softplus(2.0 * xi * delta)
}

pub fn gibbs_score_into(m: &TargetModel, x: &BitState, out: &mut [f64]) {
    glauber_score_into(m, x, out);
    for (i, o) in out.iter_mut().enumerate() {
        *o = gibbs_from_glauber(x.spin(i), *o);
    }
}

pub fn gibbs_score(m: &TargetModel, x: &BitState) -> Vec<f64> {
    let mut out = vec![0.0; m.dim()];
    gibbs_score_into(m, x, &mut out);
    out
}

pub fn stein_score_into(m: &TargetModel, x: &BitState, out: &mut [f64]) {
    match *m {
        TargetModel::IndependentBits { beta, .. } => out.fill(beta),
        TargetModel::BitsMixture { beta, .. } => out.fill(beta * (beta * x.sum() as f64).tanh()),
        TargetModel::IsingGrid {
            rows,
            cols,
            j,
            h,
            periodic,
        } => {
            for (i, o) in out.iter_mut().enumerate() {
                let field: f64 = TargetModel::ising_neighbors(rows, cols, periodic, i)
                    .iter()
                    .map(|&k| x.spin(k))
                    .sum();
                *o = j * field + h;
            }
        }
        TargetModel::CurieWeiss { beta, b, .. } => out.fill(2.0 * beta * (x.sum() as f64 - b)),
    }
}

pub fn stein_score(m: &TargetModel, x: &BitState) -> Vec<f64> {
    let mut out = vec![0.0; m.dim()];
    stein_score_into(m, x, &mut out);
    out
}

pub fn score_into(kind: ScoreKind, m: &TargetModel, x: &BitState, out: &mut [f64]) {
    match kind {
        ScoreKind::Stein => stein_score_into(m, x, out),
        ScoreKind::Gibbs => gibbs_score_into(m, x, out),
        ScoreKind::Glauber => glauber_score_into(m, x, out),
    }
}

/// A score function bound to a model, optionally tabulated over all states.
#[derive(Debug, Clone)]
pub struct ScoreField {
    kind: ScoreKind,
    model: TargetModel,
    table: Option<Vec<f64>>,
}

impl ScoreField {
    /// Untabulated field evaluated on demand; works at any simulation dimension.
    pub fn new(kind: ScoreKind, model: &TargetModel) -> Self {
        ScoreField {
            kind,
            model: *model,
            table: None,
        }
    }

    /// Field with a precomputed `2^d x d` table.
    pub fn tabulated(kind: ScoreKind, model: &TargetModel) -> Result<Self> {
        let d = model.dim();
        Error::check_cap("score table", d, DENSE_DIM_CAP)?;
        let mut table = vec![0.0; d << d];
        table.par_chunks_mut(d).enumerate().for_each(|(k, row)| {
            score_into(kind, model, &BitState::from_index_unchecked(k, d), row);
        });
        Ok(ScoreField {
            kind,
            model: *model,
            table: Some(table),
        })
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn model(&self) -> &TargetModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }

    /// Tabulated score of the state with index `k`.
    ///
    /// # Panics
    /// If the field is not tabulated.
    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        let d = self.dim();
        let t = self.table.as_ref().expect("score field is not tabulated");
        &t[k * d..(k + 1) * d]
    }

    pub fn eval_into(&self, x: &BitState, out: &mut [f64]) {
        match &self.table {
            Some(_) => out.copy_from_slice(self.row(x.words()[0] as usize)),
            None => score_into(self.kind, &self.model, x, out),
        }
    }

    pub fn eval(&self, x: &BitState) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    pub(crate) fn ensure_table(&self, routine: &'static str) -> Result<std::borrow::Cow<'_, ScoreField>> {
        Error::check_cap(routine, self.dim(), DENSE_DIM_CAP)?;
        if self.is_tabulated() {
            Ok(std::borrow::Cow::Borrowed(self))
        } else {
            Ok(std::borrow::Cow::Owned(Self::tabulated(self.kind, &self.model)?))
        }
    }
}

/// Regularity constants of a score field.
///
/// `beta2` is the cross-coordinate Lipschitz constant: the largest change of
/// `s(x)_i` per unit of `‖x - y‖₁` over pairs with `x_i = y_i`. `beta2_full`
/// also counts a component's change under a flip of its own coordinate. The
/// two agree for the Glauber score (which never depends on its own
/// coordinate) and for the Stein scores here; the Gibbs score jumps by at
/// least `2 log 2` on its own coordinate, so its `beta2_full >= log 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaConstants {
    pub beta1: f64,
    pub beta2: f64,
    pub beta2_full: f64,
}

/// `β1 = max ‖s(x)‖_∞` and the `β2` constants, scanning single-flip pairs only.
///
/// Along a flip path from `x` to `y` every step changes `‖·‖₁` by 2, so the
/// ratio `‖s(x) - s(y)‖_∞ / ‖x - y‖₁` is bounded by its maximum over edges.
pub fn beta_constants(s: &ScoreField) -> Result<BetaConstants> {
    let s = s.ensure_table("beta_constants")?;
    let d = s.dim();
    let n = 1usize << d;
    let (beta1, beta2, beta2_full) = (0..n)
        .into_par_iter()
        .map(|k| {
            let sx = s.row(k);
            let b1 = sx.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut cross = 0.0f64;
            let mut full = 0.0f64;
            for j in 0..d {
                let sy = s.row(k ^ (1 << j));
                for i in 0..d {
                    let diff = (sx[i] - sy[i]).abs() / 2.0;
                    full = full.max(diff);
                    if i != j {
                        cross = cross.max(diff);
                    }
                }
            }
            (b1, cross, full)
        })
        .reduce(
            || (0.0, 0.0, 0.0),
            |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)),
        );
    Ok(BetaConstants {
        beta1,
        beta2,
        beta2_full,
    })
}

/// Exhaustive all-pairs evaluation of the same constants, `O(4^d d)`.
pub fn beta_constants_all_pairs(s: &ScoreField) -> Result<BetaConstants> {
    Error::check_cap("beta_constants_all_pairs", s.dim(), 5)?;
    let s = s.ensure_table("beta_constants_all_pairs")?;
    let d = s.dim();
    let n = 1usize << d;
    let mut beta1 = 0.0f64;
    let mut beta2 = 0.0f64;
    let mut beta2_full = 0.0f64;
    for a in 0..n {
        beta1 = s.row(a).iter().fold(beta1, |m, v| m.max(v.abs()));
        for b in 0..n {
            if a == b {
                continue;
            }
            let l1 = 2.0 * (a ^ b).count_ones() as f64;
            for i in 0..d {
                let diff = (s.row(a)[i] - s.row(b)[i]).abs() / l1;
                beta2_full = beta2_full.max(diff);
                if (a ^ b) >> i & 1 == 0 {
                    beta2 = beta2.max(diff);
                }
            }
        }
    }
    Ok(BetaConstants {
        beta1,
        beta2,
        beta2_full,
    })
}

/// `min_{x,i} x_i s(x)_i`.
pub fn min_alignment(s: &ScoreField) -> Result<f64> {
    let s = s.ensure_table("min_alignment")?;
    let d = s.dim();
    Ok((0..1usize << d)
        .into_par_iter()
        .map(|k| {
            let x = BitState::from_index_unchecked(k, d);
            s.row(k)
                .iter()
                .enumerate()
                .map(|(i, v)| x.spin(i) * v)
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models(d: usize) -> Vec<TargetModel> {
        vec![
            TargetModel::independent_bits(0.3, d).unwrap(),
            TargetModel::bits_mixture(0.5, d).unwrap(),
            TargetModel::ising_grid(1, d, 0.4, 0.1, false).unwrap(),
            TargetModel::curie_weiss(0.2, 0.5, d).unwrap(),
        ]
    }

    /// Glauber score straight from the definition.
    fn glauber_by_definition(m: &TargetModel, x: &BitState) -> Vec<f64> {
        (0..m.dim())
            .map(|i| {
                let mut plus = x.clone();
                plus.set(i, true);
                let mut minus = x.clone();
                minus.set(i, false);
                0.5 * m.log_weight(&plus) - 0.5 * m.log_weight(&minus)
            })
            .collect()
    }

    #[test]
    fn glauber_matches_definition() {
        for d in 1..=7 {
            for m in models(d) {
                for k in 0..1usize << d {
                    let x = BitState::from_index_unchecked(k, d);
                    let a = glauber_score(&m, &x);
                    let b = glauber_by_definition(&m, &x);
                    for i in 0..d {
                        assert!((a[i] - b[i]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn glauber_closed_forms() {
        let x = BitState::from_spins(&[1, -1, -1, 1, 1]);
        let bits = TargetModel::independent_bits(0.7, 5).unwrap();
        assert!(glauber_score(&bits, &x).iter().all(|v| (v - 0.7).abs() < 1e-15));

        let cw = TargetModel::curie_weiss(0.3, 0.4, 5).unwrap();
        let g = glauber_score(&cw, &x);
        for i in 0..5 {
            let rest = x.sum() as f64 - x.spin(i);
            assert!((g[i] - 2.0 * 0.3 * (rest - 0.4)).abs() < 1e-12);
        }

        let ising = TargetModel::ising_grid(2, 3, 0.4, 0.1, false).unwrap();
        let y = BitState::from_spins(&[1, -1, 1, 1, 1, -1]);
        let g = glauber_score(&ising, &y);
        let st = stein_score(&ising, &y);
        for i in 0..6 {
            let field: f64 = TargetModel::ising_neighbors(2, 3, false, i)
                .iter()
                .map(|&k| y.spin(k))
                .sum();
            assert!((g[i] - (0.4 * field + 0.1)).abs() < 1e-12);
            assert!((g[i] - st[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn glauber_component_ignores_own_coordinate() {
        for m in models(5) {
            for k in 0..32 {
                let x = BitState::from_index_unchecked(k, 5);
                let g = glauber_score(&m, &x);
                for i in 0..5 {
                    let gf = glauber_score(&m, &x.flip(i).unwrap());
                    assert!((g[i] - gf[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gibbs_score_examples() {
        let uniform = TargetModel::independent_bits(0.0, 3).unwrap();
        let x = BitState::from_spins(&[1, -1, 1]);
        let g = gibbs_score(&uniform, &x);
        for i in 0..3 {
            assert!((g[i] - x.spin(i) * 2f64.ln()).abs() < 1e-15);
        }
        let beta = 0.6;
        let bits = TargetModel::independent_bits(beta, 3).unwrap();
        let g = gibbs_score(&bits, &x);
        for i in 0..3 {
            let xi = x.spin(i);
            assert!((g[i] - xi * (1.0 + (2.0 * xi * beta).exp()).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn gibbs_score_is_aligned() {
        for d in 1..=8 {
            for m in models(d) {
                let s = ScoreField::tabulated(ScoreKind::Gibbs, &m).unwrap();
                assert!(min_alignment(&s).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn stein_examples() {
        let m = TargetModel::bits_mixture(0.5, 2).unwrap();
        let s = stein_score(&m, &BitState::all_plus(2));
        assert!(s.iter().all(|v| (v - 0.5 * 1f64.tanh()).abs() < 1e-15));
        let bits = TargetModel::independent_bits(-0.2, 4).unwrap();
        let x = BitState::from_spins(&[1, 1, -1, 1]);
        assert_eq!(stein_score(&bits, &x), glauber_score(&bits, &x));
    }

    #[test]
    fn stein_minus_glauber_finite_for_mixture_and_curie_weiss() {
        for m in [
            TargetModel::bits_mixture(0.5, 6).unwrap(),
            TargetModel::curie_weiss(0.2, 0.0, 6).unwrap(),
        ] {
            let mut worst = 0.0f64;
            for k in 0..64 {
                let x = BitState::from_index_unchecked(k, 6);
                let a = stein_score(&m, &x);
                let b = glauber_score(&m, &x);
                for i in 0..6 {
                    worst = worst.max((a[i] - b[i]).abs());
                }
            }
            assert!(worst.is_finite() && worst > 0.0);
        }
    }

    #[test]
    fn beta_constants_examples() {
        let beta = -0.4;
        let bits = TargetModel::independent_bits(beta, 4).unwrap();
        let c = beta_constants(&ScoreField::tabulated(ScoreKind::Glauber, &bits).unwrap()).unwrap();
        assert!((c.beta1 - 0.4).abs() < 1e-15);
        assert_eq!(c.beta2, 0.0);
        assert_eq!(c.beta2_full, 0.0);

        let c = beta_constants(&ScoreField::tabulated(ScoreKind::Gibbs, &bits).unwrap()).unwrap();
        assert!((c.beta1 - (1.0 + (0.8f64).exp()).ln()).abs() < 1e-14);
        assert_eq!(c.beta2, 0.0);
        assert!(c.beta2_full >= 2f64.ln() - 1e-15);

        for j in [0.3, -0.7] {
            let ising = TargetModel::ising_grid(2, 2, j, 0.2, false).unwrap();
            let s = ScoreField::tabulated(ScoreKind::Glauber, &ising).unwrap();
            let c = beta_constants(&s).unwrap();
            let all = beta_constants_all_pairs(&s).unwrap();
            assert!((c.beta2 - j.abs()).abs() < 1e-14);
            assert!((all.beta2 - j.abs()).abs() < 1e-14);
            assert!((c.beta2_full - j.abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn adjacent_beta2_equals_all_pairs() {
        for d in 1..=5 {
            let mut ms = models(d);
            ms.push(TargetModel::ising_grid(1, d, -0.5, 0.3, true).unwrap());
            for m in ms {
                for kind in ScoreKind::ALL {
                    let s = ScoreField::tabulated(kind, &m).unwrap();
                    let a = beta_constants(&s).unwrap();
                    let b = beta_constants_all_pairs(&s).unwrap();
                    assert!((a.beta1 - b.beta1).abs() < 1e-14);
                    assert!((a.beta2 - b.beta2).abs() < 1e-14, "{m:?} {kind}");
                    assert!((a.beta2_full - b.beta2_full).abs() < 1e-14, "{m:?} {kind}");
                }
            }
        }
    }

    #[test]
    fn tabulated_and_on_demand_agree() {
        let m = TargetModel::ising_grid(2, 3, 0.4, 0.1, true).unwrap();
        for kind in ScoreKind::ALL {
            let t = ScoreField::tabulated(kind, &m).unwrap();
            let f = ScoreField::new(kind, &m);
            for k in 0..64 {
                let x = BitState::from_index_unchecked(k, 6);
                assert_eq!(t.eval(&x), f.eval(&x));
            }
        }
    }

    #[test]
    fn parse_score_kind() {
        assert_eq!("Glauber".parse::<ScoreKind>().unwrap(), ScoreKind::Glauber);
        assert!("langevin".parse::<ScoreKind>().is_err());
    }
}
