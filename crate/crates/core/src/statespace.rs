//! Points of the hypercube `{-1,+1}^d`, packed one bit per coordinate.
//!
//! Bit `i` is set iff coordinate `x_i = +1`; coordinate 0 is the least
//! significant bit of the first word. For `d <= INDEX_DIM_CAP` the packed word
//! doubles as the canonical state index, so the all-(-1) state has index 0 and
//! the all-(+1) state has index `2^d - 1`.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest dimension with a canonical integer index (fits a 32-bit-safe usize).
pub const INDEX_DIM_CAP: usize = 30;

/// Largest dimension supported for simulation paths.
pub const SIM_DIM_CAP: usize = 1 << 20;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitState {
    dim: usize,
    words: SmallVec<[u64; 2]>,
}

/// Number of coordinates in which two states differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HammingDistance(pub usize);

impl HammingDistance {
    pub fn value(self) -> usize {
        self.0
    }
}

fn n_words(dim: usize) -> usize {
    dim.div_ceil(WORD).max(1)
}

impl BitState {
    /// The all-(-1) state.
    pub fn all_minus(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= SIM_DIM_CAP, "dimension {dim} unsupported");
        BitState {
            dim,
            words: SmallVec::from_elem(0, n_words(dim)),
        }
    }

    /// The all-(+1) state.
    pub fn all_plus(dim: usize) -> Self {
        let mut s = Self::all_minus(dim);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.mask_tail();
        s
    }

    pub fn from_spins(spins: &[i8]) -> Self {
        let mut s = Self::all_minus(spins.len());
        for (i, &v) in spins.iter().enumerate() {
            assert!(v == 1 || v == -1, "spin must be +-1, got {v}");
            if v == 1 {
                s.set(i, true);
            }
        }
        s
    }

    /// State with canonical index `k` in dimension `d`.
    pub fn state_of(k: u64, dim: usize) -> Result<Self> {
        if dim == 0 || dim > INDEX_DIM_CAP {
            return Err(Error::capability("state_of", dim, INDEX_DIM_CAP));
        }
        let bound = 1u64 << dim;
        if k >= bound {
            return Err(Error::Range {
                what: "state index",
                value: k,
                bound,
            });
        }
        Ok(Self::from_index_unchecked(k as usize, dim))
    }

    /// Fast path for exact-analysis loops; `k < 2^dim` and `dim <= 64` are the
    /// caller's responsibility.
    #[inline]
    pub fn from_index_unchecked(k: usize, dim: usize) -> Self {
        debug_assert!(dim <= WORD);
        let mut words = SmallVec::new();
        words.push(k as u64);
        BitState { dim, words }
    }

    /// Canonical integer index.
    pub fn index_of(&self) -> Result<usize> {
        if self.dim > INDEX_DIM_CAP {
            return Err(Error::capability("index_of", self.dim, INDEX_DIM_CAP));
        }
        Ok(self.words[0] as usize)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `true` iff `x_i = +1`.
    #[inline]
    pub fn is_plus(&self, i: usize) -> bool {
        debug_assert!(i < self.dim);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    /// Coordinate `x_i` as `+1.0` or `-1.0`.
    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        if self.is_plus(i) {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, plus: bool) {
        let bit = 1u64 << (i % WORD);
        if plus {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    /// Negates coordinate `i` in place.
    #[inline]
    pub fn flip_mut(&mut self, i: usize) {
        debug_assert!(i < self.dim);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Copy of `self` with coordinate `i` negated.
    pub fn flip(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::Range {
                what: "coordinate",
                value: i as u64,
                bound: self.dim as u64,
            });
        }
        let mut out = self.clone();
        out.flip_mut(i);
        Ok(out)
    }

    /// All single-flip neighbours in coordinate order.
    pub fn neighbors(&self) -> Vec<BitState> {
        (0..self.dim)
            .map(|i| {
                let mut y = self.clone();
                y.flip_mut(i);
                y
            })
            .collect()
    }

    /// Number of `+1` coordinates.
    pub fn count_plus(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `sum_i x_i`.
    pub fn sum(&self) -> i64 {
        2 * self.count_plus() as i64 - self.dim as i64
    }

    /// `sum_i x_i / d`.
    pub fn magnetization(&self) -> f64 {
        self.sum() as f64 / self.dim as f64
    }

    /// Packed words as a big-endian hexadecimal string.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in self.words.iter().rev() {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.dim)
            .map(|i| if self.is_plus(i) { 1 } else { -1 })
            .collect()
    }

    fn mask_tail(&mut self) {
        let r = self.dim % WORD;
        if r != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << r) - 1;
        }
    }
}

impl fmt::Debug for BitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim <= 64 {
            let s: String = (0..self.dim)
                .map(|i| if self.is_plus(i) { '+' } else { '-' })
                .collect();
            write!(f, "BitState({s})")
        } else {
            write!(f, "BitState(d={}, 0x{})", self.dim, self.to_hex())
        }
    }
}

/// Hamming distance between two states of the same dimension.
///
/// # Panics
/// If the dimensions differ.
pub fn hamming(x: &BitState, y: &BitState) -> HammingDistance {
    assert_eq!(x.dim, y.dim, "hamming: dimension mismatch");
    HammingDistance(
        x.words
            .iter()
            .zip(y.words.iter())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum(),
    )
}

/// Spin of coordinate `i` for the state with index `k`.
#[inline]
pub fn spin_of_index(k: usize, i: usize) -> f64 {
    if (k >> i) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `sum_i x_i` for the state with index `k` in dimension `d`.
#[inline]
pub fn sum_of_index(k: usize, dim: usize) -> i64 {
    2 * k.count_ones() as i64 - dim as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_conventions() {
        assert_eq!(BitState::all_minus(3).index_of().unwrap(), 0);
        assert_eq!(BitState::all_plus(3).index_of().unwrap(), 7);
        assert_eq!(BitState::from_spins(&[1, -1]).index_of().unwrap(), 1);
    }

    #[test]
    fn bijection_exhaustive() {
        for d in 1..=12 {
            for k in 0..(1u64 << d) {
                let x = BitState::state_of(k, d).unwrap();
                assert_eq!(x.index_of().unwrap() as u64, k);
            }
        }
    }

    #[test]
    fn state_of_rejects_out_of_range() {
        assert!(matches!(
            BitState::state_of(8, 3),
            Err(Error::Range { value: 8, bound: 8, .. })
        ));
        assert!(matches!(
            BitState::state_of(0, 31),
            Err(Error::Capability { .. })
        ));
    }

    #[test]
    fn hamming_examples() {
        let x = BitState::from_spins(&[1, 1, 1]);
        let y = BitState::from_spins(&[1, -1, 1]);
        assert_eq!(hamming(&x, &x).value(), 0);
        assert_eq!(hamming(&x, &y).value(), 1);
        assert_eq!(
            hamming(&BitState::all_plus(5), &BitState::all_minus(5)).value(),
            5
        );
    }

    #[test]
    fn hamming_is_popcount_of_xor() {
        for d in 1..=8usize {
            for a in 0..(1u64 << d) {
                for b in 0..(1u64 << d) {
                    let x = BitState::state_of(a, d).unwrap();
                    let y = BitState::state_of(b, d).unwrap();
                    assert_eq!(hamming(&x, &y).value(), (a ^ b).count_ones() as usize);
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn hamming_dimension_mismatch_panics() {
        hamming(&BitState::all_plus(3), &BitState::all_plus(4));
    }

    #[test]
    fn flip_and_neighbors() {
        let x = BitState::from_spins(&[1, -1, 1, 1]);
        for i in 0..4 {
            let y = x.flip(i).unwrap();
            assert_eq!(hamming(&x, &y).value(), 1);
            assert_eq!(y.flip(i).unwrap(), x);
        }
        assert!(x.flip(4).is_err());
        let nb = x.neighbors();
        assert_eq!(nb.len(), 4);
        for (i, a) in nb.iter().enumerate() {
            assert_eq!(*a, x.flip(i).unwrap());
            for b in &nb[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn wide_states() {
        let d = 200;
        let mut x = BitState::all_minus(d);
        x.flip_mut(150);
        assert!(x.is_plus(150));
        assert_eq!(x.sum(), 2 - d as i64);
        assert_eq!(x.count_plus(), 1);
        assert_eq!(BitState::all_plus(d).count_plus(), d);
        assert!(x.index_of().is_err());
    }
}
