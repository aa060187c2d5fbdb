//! Discrete Langevin-type samplers on the binary hypercube `{-1,+1}^d`.
//!
//! The crate provides five samplers (damped Gibbs, DULA, DMALA, DUPS, DMAPS)
//! plus the exact Gibbs-proximal kernel, three score families (Stein, Gibbs,
//! Glauber) and four target models. At small dimension every sampler can be
//! materialized as a dense `2^d x 2^d` transition matrix, which the
//! [`analysis`] module inspects exactly: stationary laws, spectra, optimal
//! transport distances and contraction certificates.
//!
//! ```
//! use hyperlangevin::{models::TargetModel, scores::{ScoreField, ScoreKind}, kernels, analysis};
//!
//! let model = TargetModel::independent_bits(0.5, 3).unwrap();
//! let score = ScoreField::tabulated(ScoreKind::Stein, &model).unwrap();
//! let t = kernels::dups_matrix(&model, &score, 0.5).unwrap();
//! let pi = analysis::stationary(&t).unwrap();
//! let p = hyperlangevin::models::exact_target(&model).unwrap();
//! assert!(analysis::tv_distance(&pi, &p) < 1e-12);
//! ```

pub mod analysis;
pub mod ctmc;
pub mod error;
pub mod kernels;
pub mod math;
pub mod models;
pub mod scores;
pub mod simulate;
pub mod statespace;

pub use error::{Error, Result};
pub use statespace::BitState;

/// Largest dimension for which `2^d`-sized vectors and dense matrices are built.
pub const DENSE_DIM_CAP: usize = 12;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
