//! Ultrafilters on the algebra of ultimately periodic sets.
//!
//! A principal ultrafilter at `n` contains exactly the sets containing `n`.
//! The free ultrafilter is a *generic point*: a coherent sequence of
//! residues `r_k mod k!` with `r_{k+1} ≡ r_k (mod k!)`. A set with tail
//! period `p` belongs to it iff `r_k mod p` is one of the set's tail
//! residues, where `k` is the least index with `p | k!`. Finite exceptions
//! never matter, so every finite set is rejected and every cofinite set is
//! accepted.
//!
//! The residue path is written in factorial base,
//! `r_k = d_1·1! + d_2·2! + ... + d_{k-1}·(k-1)!` with `0 <= d_j <= j`, and
//! the digits are drawn from the seed by
//! `d_j = splitmix64(seed XOR j·0xD1B54A32D192ED03) mod (j + 1)`.
//! Digits are a pure function of `(seed, j)`, so the path needs no shared
//! state and concurrent queries always agree.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::upset::UpSet;

/// A family of sets that claims to be an ultrafilter.
pub trait SetFilter {
    fn contains(&self, s: &UpSet) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum UltrafilterOracle {
    /// All sets containing `at`: a dictatorship of voter `at`.
    Principal { at: u64 },
    /// The free ultrafilter of the generic point drawn from `seed`.
    Generic { seed: u64 },
}

impl UltrafilterOracle {
    pub fn is_free(&self) -> bool {
        matches!(self, UltrafilterOracle::Generic { .. })
    }

    pub fn generic_point(&self) -> Option<GenericPoint> {
        match *self {
            UltrafilterOracle::Generic { seed } => Some(GenericPoint::new(seed)),
            UltrafilterOracle::Principal { .. } => None,
        }
    }
}

impl SetFilter for UltrafilterOracle {
    fn contains(&self, s: &UpSet) -> bool {
        match *self {
            UltrafilterOracle::Principal { at } => s.member(at),
            UltrafilterOracle::Generic { seed } => GenericPoint::new(seed).contains(s),
        }
    }
}

/// `contains(u, s)`.
pub fn contains(u: &UltrafilterOracle, s: &UpSet) -> bool {
    u.contains(s)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenericPoint {
    seed: u64,
}

impl GenericPoint {
    pub fn new(seed: u64) -> Self {
        GenericPoint { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Factorial-base digit `d_j ∈ [0, j]`, for `j >= 1`.
    pub fn digit(&self, j: u64) -> u64 {
        splitmix64(self.seed ^ j.wrapping_mul(0xD1B5_4A32_D192_ED03)) % (j + 1)
    }

    /// Least `k` with `modulus | k!`.
    pub fn depth_for(modulus: u64) -> u64 {
        assert!(modulus > 0);
        let mut k = 1u64;
        let mut fact_mod = 1 % modulus;
        while fact_mod != 0 {
            k += 1;
            fact_mod = ((fact_mod as u128 * k as u128) % modulus as u128) as u64;
        }
        k
    }

    /// `r_k mod modulus` for `k` = [`depth_for`](Self::depth_for)`(modulus)`.
    /// Any deeper `r_k` gives the same answer.
    pub fn residue_mod(&self, modulus: u64) -> u64 {
        let k = Self::depth_for(modulus);
        let m = modulus as u128;
        let mut fact = 1u128 % m;
        let mut acc = 0u128;
        for j in 1..k {
            fact = fact * j as u128 % m;
            acc = (acc + self.digit(j) as u128 * fact) % m;
        }
        acc as u64
    }

    /// `r_k`, the point's residue modulo `k!`.
    pub fn residue_path(&self, k: u64) -> BigUint {
        assert!(k >= 1, "residue path starts at k = 1");
        let mut fact = BigUint::from(1u32);
        let mut acc = BigUint::from(0u32);
        for j in 1..k {
            fact *= j;
            acc += &fact * self.digit(j);
        }
        acc
    }

    /// Tail-only membership for any (not necessarily canonical) periodic
    /// description `n mod period ∈ residues`.
    pub fn accepts_tail(&self, period: u64, residues: &[u64]) -> bool {
        let r = self.residue_mod(period);
        residues.iter().any(|&x| x % period == r)
    }
}

impl SetFilter for GenericPoint {
    fn contains(&self, s: &UpSet) -> bool {
        s.tail_contains(self.residue_mod(s.period()))
    }
}

/// `r_k` as an integer together with `k!`.
pub fn residue_path(u: &GenericPoint, k: u64) -> (BigUint, BigUint) {
    let mut fact = BigUint::from(1u32);
    for j in 2..=k {
        fact *= j;
    }
    (u.residue_path(k), fact)
}
