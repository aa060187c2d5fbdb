//! Target distributions on the hypercube, as unnormalized log-densities.
//!
//! | kind | `log p(x) + const` |
//! |------|--------------------|
//! | `IndependentBits(β)` | `β Σ x_i` |
//! | `BitsMixture(β)` | `log(½e^{βΣx} + ½e^{-βΣx})` |
//! | `IsingGrid(J, h)` | `J Σ_{grid edges} x_i x_j + h Σ x_i` |
//! | `CurieWeiss(β, b)` | `β (Σ x_i - b)^2` |
//!
//! The Ising grid uses free boundaries unless `periodic` is set. Periodic
//! wrapping only adds an edge when it joins two distinct sites that are not
//! already neighbours, so a side of length 1 or 2 wraps to nothing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::math::{log_add_exp, normalize_log_weights};
use crate::statespace::{BitState, SIM_DIM_CAP};
use crate::DENSE_DIM_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetModel {
    IndependentBits {
        beta: f64,
        dim: usize,
    },
    BitsMixture {
        beta: f64,
        dim: usize,
    },
    IsingGrid {
        rows: usize,
        cols: usize,
        j: f64,
        h: f64,
        periodic: bool,
    },
    CurieWeiss {
        beta: f64,
        b: f64,
        dim: usize,
    },
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    Error::check_cap("model", dim, SIM_DIM_CAP)
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {v}")))
    }
}

impl TargetModel {
    pub fn independent_bits(beta: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        check_finite("beta", beta)?;
        Ok(TargetModel::IndependentBits { beta, dim })
    }

    pub fn bits_mixture(beta: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        check_finite("beta", beta)?;
        Ok(TargetModel::BitsMixture { beta, dim })
    }

    pub fn ising_grid(rows: usize, cols: usize, j: f64, h: f64, periodic: bool) -> Result<Self> {
        check_dim(rows.saturating_mul(cols))?;
        check_finite("J", j)?;
        check_finite("h", h)?;
        Ok(TargetModel::IsingGrid {
            rows,
            cols,
            j,
            h,
            periodic,
        })
    }

    pub fn curie_weiss(beta: f64, b: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        check_finite("beta", beta)?;
        check_finite("b", b)?;
        Ok(TargetModel::CurieWeiss { beta, b, dim })
    }

    pub fn dim(&self) -> usize {
        match *self {
            TargetModel::IndependentBits { dim, .. }
            | TargetModel::BitsMixture { dim, .. }
            | TargetModel::CurieWeiss { dim, .. } => dim,
            TargetModel::IsingGrid { rows, cols, .. } => rows * cols,
        }
    }

    /// Short CLI name of the model family.
    pub fn kind_name(&self) -> &'static str {
        match self {
            TargetModel::IndependentBits { .. } => "bits",
            TargetModel::BitsMixture { .. } => "mixture",
            TargetModel::IsingGrid { .. } => "ising",
            TargetModel::CurieWeiss { .. } => "curieweiss",
        }
    }

    /// Human-readable parameter summary, e.g. `ising(3x3,J=0.4,h=0.1,free)`.
    pub fn label(&self) -> String {
        match *self {
            TargetModel::IndependentBits { beta, dim } => format!("bits(beta={beta},d={dim})"),
            TargetModel::BitsMixture { beta, dim } => format!("mixture(beta={beta},d={dim})"),
            TargetModel::IsingGrid {
                rows,
                cols,
                j,
                h,
                periodic,
            } => format!(
                "ising({rows}x{cols},J={j},h={h},{})",
                if periodic { "periodic" } else { "free" }
            ),
            TargetModel::CurieWeiss { beta, b, dim } => {
                format!("curieweiss(beta={beta},b={b},d={dim})")
            }
        }
    }

    /// Grid neighbours of site `i` (row-major numbering), without duplicates.
    pub fn ising_neighbors(rows: usize, cols: usize, periodic: bool, i: usize) -> SmallVec<[usize; 4]> {
        let (r, c) = (i / cols, i % cols);
        let mut out: SmallVec<[usize; 4]> = SmallVec::new();
        let mut push = |k: usize| {
            if k != i && !out.contains(&k) {
                out.push(k);
            }
        };
        if c + 1 < cols {
            push(i + 1);
        } else if periodic {
            push(r * cols);
        }
        if c > 0 {
            push(i - 1);
        } else if periodic {
            push(r * cols + cols - 1);
        }
        if r + 1 < rows {
            push(i + cols);
        } else if periodic {
            push(c);
        }
        if r > 0 {
            push(i - cols);
        } else if periodic {
            push((rows - 1) * cols + c);
        }
        out
    }

    /// Sum of neighbour spins `Σ_{j~i} x_j` on an Ising grid.
    fn ising_local_field(rows: usize, cols: usize, periodic: bool, x: &BitState, i: usize) -> f64 {
        Self::ising_neighbors(rows, cols, periodic, i)
            .iter()
            .map(|&k| x.spin(k))
            .sum()
    }

    /// Unnormalized log-density.
    pub fn log_weight(&self, x: &BitState) -> f64 {
        debug_assert_eq!(x.dim(), self.dim());
        match *self {
            TargetModel::IndependentBits { beta, .. } => beta * x.sum() as f64,
            TargetModel::BitsMixture { beta, .. } => {
                let s = beta * x.sum() as f64;
                log_add_exp(s, -s) - std::f64::consts::LN_2
            }
            TargetModel::IsingGrid {
                rows,
                cols,
                j,
                h,
                periodic,
            } => {
                let mut pair = 0.0;
                for i in 0..rows * cols {
                    let xi = x.spin(i);
                    for k in Self::ising_neighbors(rows, cols, periodic, i) {
                        if k > i {
                            pair += xi * x.spin(k);
                        }
                    }
                }
                j * pair + h * x.sum() as f64
            }
            TargetModel::CurieWeiss { beta, b, .. } => {
                let m = x.sum() as f64 - b;
                beta * m * m
            }
        }
    }

    /// `log p(flip(x, i)) - log p(x)` in closed form.
    pub fn flip_log_ratio(&self, x: &BitState, i: usize) -> f64 {
        self.flip_log_ratio_with_sum(x, i, x.sum())
    }

    /// As [`flip_log_ratio`](Self::flip_log_ratio) with `Σ x` supplied by the caller,
    /// so that a full score vector costs `O(d)` instead of `O(d^2)`.
    pub fn flip_log_ratio_with_sum(&self, x: &BitState, i: usize, sum: i64) -> f64 {
        let xi = x.spin(i);
        match *self {
            TargetModel::IndependentBits { beta, .. } => -2.0 * beta * xi,
            TargetModel::BitsMixture { beta, .. } => {
                let s = beta * sum as f64;
                let s2 = beta * (sum as f64 - 2.0 * xi);
                log_add_exp(s2, -s2) - log_add_exp(s, -s)
            }
            TargetModel::IsingGrid {
                rows,
                cols,
                j,
                h,
                periodic,
            } => -2.0 * xi * (j * Self::ising_local_field(rows, cols, periodic, x, i) + h),
            TargetModel::CurieWeiss { beta, b, .. } => {
                let m = sum as f64 - b;
                let m2 = m - 2.0 * xi;
                beta * (m2 * m2 - m * m)
            }
        }
    }

    /// Log-weights of every state, indexed canonically.
    pub fn log_weight_table(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        Error::check_cap("log_weight_table", d, DENSE_DIM_CAP)?;
        Ok((0..1usize << d)
            .into_par_iter()
            .map(|k| self.log_weight(&BitState::from_index_unchecked(k, d)))
            .collect())
    }
}

/// A probability vector over the `2^d` states, indexed canonically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistVector {
    values: Vec<f64>,
}

impl DistVector {
    /// Validates nonnegativity and unit mass (within `1e-12`); `values.len()`
    /// must be a power of two.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::Contract(format!(
                "distribution length {} is not a power of two",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Contract(format!("negative or NaN probability {v}")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("probabilities sum to {total}")));
        }
        Ok(DistVector { values })
    }

    /// Wraps without validation; for vectors produced by this crate's solvers.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        DistVector { values }
    }

    pub fn uniform(dim: usize) -> Self {
        let n = 1usize << dim;
        DistVector {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(k: usize, dim: usize) -> Self {
        let mut values = vec![0.0; 1usize << dim];
        values[k] = 1.0;
        DistVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }
}

impl std::ops::Index<usize> for DistVector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

/// The normalized target `p(x) ∝ exp(log_weight(x))`.
pub fn exact_target(m: &TargetModel) -> Result<DistVector> {
    let lw = m.log_weight_table()?;
    Ok(DistVector::from_raw(normalize_log_weights(&lw)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sigmoid;

    fn all_models(d: usize) -> Vec<TargetModel> {
        vec![
            TargetModel::independent_bits(0.37, d).unwrap(),
            TargetModel::bits_mixture(0.61, d).unwrap(),
            TargetModel::ising_grid(1, d, 0.4, -0.2, false).unwrap(),
            TargetModel::curie_weiss(0.3, 0.7, d).unwrap(),
        ]
    }

    #[test]
    fn log_weight_examples() {
        let x = BitState::all_plus(3);
        let m = TargetModel::independent_bits(0.5, 3).unwrap();
        assert!((m.log_weight(&x) - 1.5).abs() < 1e-15);
        let m = TargetModel::curie_weiss(1.0, 0.0, 3).unwrap();
        assert!((m.log_weight(&x) - 9.0).abs() < 1e-15);
        let m = TargetModel::ising_grid(2, 2, 1.0, 0.0, false).unwrap();
        assert!((m.log_weight(&BitState::all_plus(4)) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn ising_edge_counts() {
        // 3x3 free grid has 12 edges, periodic 3x3 torus has 18.
        let all = BitState::all_plus(9);
        let free = TargetModel::ising_grid(3, 3, 1.0, 0.0, false).unwrap();
        let torus = TargetModel::ising_grid(3, 3, 1.0, 0.0, true).unwrap();
        assert_eq!(free.log_weight(&all), 12.0);
        assert_eq!(torus.log_weight(&all), 18.0);
        // A 2x2 torus has no extra edges.
        let t22 = TargetModel::ising_grid(2, 2, 1.0, 0.0, true).unwrap();
        assert_eq!(t22.log_weight(&BitState::all_plus(4)), 4.0);
        for i in 0..9 {
            assert_eq!(TargetModel::ising_neighbors(3, 3, true, i).len(), 4);
        }
    }

    #[test]
    fn flip_log_ratio_matches_log_weight_difference() {
        for d in 1..=6 {
            let mut ms = all_models(d);
            ms.push(TargetModel::ising_grid(2, 3, -0.3, 0.25, true).unwrap());
            for m in ms {
                let d = m.dim();
                for k in 0..1usize << d {
                    let x = BitState::from_index_unchecked(k, d);
                    for i in 0..d {
                        let y = x.flip(i).unwrap();
                        let direct = m.log_weight(&y) - m.log_weight(&x);
                        assert!(
                            (m.flip_log_ratio(&x, i) - direct).abs() < 1e-12,
                            "{m:?} k={k} i={i}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_parameters_give_uniform() {
        for m in [
            TargetModel::independent_bits(0.0, 4).unwrap(),
            TargetModel::bits_mixture(0.0, 4).unwrap(),
            TargetModel::ising_grid(2, 2, 0.0, 0.0, false).unwrap(),
            TargetModel::curie_weiss(0.0, 0.3, 4).unwrap(),
        ] {
            let p = exact_target(&m).unwrap();
            for &v in p.values() {
                assert!((v - 1.0 / 16.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_state_bits() {
        let beta = 0.8;
        let p = exact_target(&TargetModel::independent_bits(beta, 1).unwrap()).unwrap();
        assert!((p[0] - sigmoid(-2.0 * beta)).abs() < 1e-15);
        assert!((p[1] - sigmoid(2.0 * beta)).abs() < 1e-15);
    }

    #[test]
    fn mixture_is_symmetric_average_of_bits() {
        for d in 1..=8 {
            let beta = 0.45;
            let mix = exact_target(&TargetModel::bits_mixture(beta, d).unwrap()).unwrap();
            let bits = exact_target(&TargetModel::independent_bits(beta, d).unwrap()).unwrap();
            let n = 1usize << d;
            for k in 0..n {
                assert!((mix[k] - mix[n - 1 - k]).abs() < 1e-15);
                let avg = 0.5 * bits[k] + 0.5 * bits[n - 1 - k];
                assert!((mix[k] - avg).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ising_without_coupling_is_independent_bits() {
        let ising = exact_target(&TargetModel::ising_grid(2, 3, 0.0, 0.3, true).unwrap()).unwrap();
        let bits = exact_target(&TargetModel::independent_bits(0.3, 6).unwrap()).unwrap();
        for k in 0..64 {
            assert_eq!(ising[k], bits[k]);
        }
    }

    #[test]
    fn curie_weiss_depends_only_on_sum() {
        let m = TargetModel::curie_weiss(1.0, 0.5, 9).unwrap();
        let x = BitState::from_spins(&[1, -1, -1, 1, 1, -1, 1, -1, -1]);
        let spins = x.spins();
        let lw = m.log_weight(&x);
        for shift in 1..9 {
            let mut rotated = spins.clone();
            rotated.rotate_left(shift);
            rotated.swap(0, shift % 9);
            assert_eq!(m.log_weight(&BitState::from_spins(&rotated)), lw);
        }
    }

    #[test]
    fn large_curie_weiss_normalizes() {
        // The all-plus weight is e^81 before normalization.
        let p = exact_target(&TargetModel::curie_weiss(1.0, 0.0, 9).unwrap()).unwrap();
        let total: f64 = p.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(p.values().iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn exact_target_cap() {
        let m = TargetModel::independent_bits(0.1, DENSE_DIM_CAP + 1).unwrap();
        assert!(matches!(exact_target(&m), Err(Error::Capability { .. })));
    }

    #[test]
    fn dist_vector_validation() {
        assert!(DistVector::new(vec![0.5, 0.5]).is_ok());
        assert!(DistVector::new(vec![0.5, 0.6]).is_err());
        assert!(DistVector::new(vec![1.5, -0.5]).is_err());
        assert!(DistVector::new(vec![0.2, 0.2, 0.6]).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TargetModel::independent_bits(f64::NAN, 3).is_err());
        assert!(TargetModel::bits_mixture(0.1, 0).is_err());
        assert!(TargetModel::ising_grid(0, 3, 0.1, 0.0, false).is_err());
    }
}
