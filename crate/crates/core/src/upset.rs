//! Ultimately periodic subsets of the naturals.
//!
//! A set is stored in canonical form `(N, p, R, E)`: for `n >= N`,
//! `n ∈ S` iff `n mod p ∈ R`; for `n < N`, membership is that periodic rule
//! flipped exactly on the exception set `E ⊆ [0, N)`. Canonical means `p` is
//! the minimal period of the tail and `N` is minimal, so two values are
//! structurally equal iff they denote the same set.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SpecError;

/// Periods above this are refused; Boolean operations multiply periods.
pub const MAX_PERIOD: u64 = 1 << 22;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UpSet {
    threshold: u64,
    period: u64,
    residues: Vec<u64>,
    exceptions: Vec<u64>,
}

impl UpSet {
    /// Builds and canonicalizes `(threshold, period, residues, exceptions)`.
    pub fn new(
        threshold: u64,
        period: u64,
        residues: impl IntoIterator<Item = u64>,
        exceptions: impl IntoIterator<Item = u64>,
    ) -> Result<UpSet, SpecError> {
        let err = |m: String| Err(SpecError::UpSet(m));
        if period == 0 {
            return err("period must be positive".into());
        }
        if period > MAX_PERIOD {
            return err(format!("period {period} exceeds {MAX_PERIOD}"));
        }
        let mut pattern = vec![false; period as usize];
        for r in residues {
            if r >= period {
                return err(format!("residue {r} is not below period {period}"));
            }
            pattern[r as usize] = true;
        }
        let mut flips = Vec::new();
        for e in exceptions {
            if e >= threshold {
                return err(format!("exception {e} is not below threshold {threshold}"));
            }
            flips.push(e);
        }
        flips.sort_unstable();
        flips.dedup();
        Ok(UpSet::from_rule(threshold, period, |n| {
            pattern[(n % period) as usize] ^ (n < threshold && flips.binary_search(&n).is_ok())
        }))
    }

    /// Canonical form of the set whose membership is `rule(n)`, given that
    /// `rule` is `period`-periodic on `[threshold, ∞)`.
    pub fn from_rule(threshold: u64, period: u64, rule: impl Fn(u64) -> bool) -> UpSet {
        assert!(period > 0 && period <= MAX_PERIOD, "period {period} out of range");
        let p = period as usize;
        let offset = threshold % period;
        let mut pattern = vec![false; p];
        for (r, slot) in pattern.iter_mut().enumerate() {
            let shift = (r as u64 + period - offset) % period;
            *slot = rule(threshold + shift);
        }
        let q = minimal_period(&pattern);
        let residues: Vec<u64> = (0..q as u64).filter(|&r| pattern[r as usize]).collect();
        let tail = |n: u64| pattern[(n % q as u64) as usize];
        let exceptions: Vec<u64> = (0..threshold).filter(|&n| rule(n) != tail(n)).collect();
        UpSet {
            threshold: exceptions.last().map_or(0, |&e| e + 1),
            period: q as u64,
            residues,
            exceptions,
        }
    }

    /// Re-derives the canonical form; canonical inputs come back unchanged.
    pub fn canonicalize(&self) -> UpSet {
        UpSet::from_rule(self.threshold, self.period, |n| self.member(n))
    }

    pub fn empty() -> UpSet {
        UpSet::from_rule(0, 1, |_| false)
    }

    pub fn naturals() -> UpSet {
        UpSet::from_rule(0, 1, |_| true)
    }

    pub fn finite(elements: impl IntoIterator<Item = u64>) -> UpSet {
        let mut v: Vec<u64> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        let threshold = v.last().map_or(0, |&m| m + 1);
        UpSet::from_rule(threshold, 1, |n| v.binary_search(&n).is_ok())
    }

    /// Everything except `excluded`.
    pub fn cofinite(excluded: impl IntoIterator<Item = u64>) -> UpSet {
        UpSet::finite(excluded).complement()
    }

    /// `{n : n ≡ residue (mod modulus)}`.
    pub fn residue_class(residue: u64, modulus: u64) -> UpSet {
        UpSet::from_rule(0, modulus, |n| n % modulus == residue % modulus)
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn exceptions(&self) -> &[u64] {
        &self.exceptions
    }

    /// Whether residue `r` (mod the period) belongs to the periodic tail.
    pub fn tail_contains(&self, r: u64) -> bool {
        self.residues.binary_search(&(r % self.period)).is_ok()
    }

    pub fn member(&self, n: u64) -> bool {
        let periodic = self.tail_contains(n);
        if n < self.threshold {
            periodic ^ self.exceptions.binary_search(&n).is_ok()
        } else {
            periodic
        }
    }

    fn combine(&self, other: &UpSet, op: impl Fn(bool, bool) -> bool) -> UpSet {
        let threshold = self.threshold.max(other.threshold);
        let period = self.period.lcm(&other.period);
        UpSet::from_rule(threshold, period, |n| op(self.member(n), other.member(n)))
    }

    pub fn complement(&self) -> UpSet {
        UpSet::from_rule(self.threshold, self.period, |n| !self.member(n))
    }

    pub fn union(&self, other: &UpSet) -> UpSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn inter(&self, other: &UpSet) -> UpSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &UpSet) -> UpSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &UpSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty() && self.exceptions.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn is_cofinite(&self) -> bool {
        self.residues.len() as u64 == self.period
    }

    /// Length of a prefix on which agreement of two sets forces equality.
    pub fn witness_bound(&self, other: &UpSet) -> u64 {
        2 * (self.threshold + other.threshold) + 2 * self.period.lcm(&other.period)
    }
}

/// Smallest `q` dividing `pattern.len()` with `pattern[i] == pattern[i % q]`.
fn minimal_period(pattern: &[bool]) -> usize {
    let p = pattern.len();
    (1..=p)
        .filter(|q| p.is_multiple_of(*q))
        .find(|&q| (q..p).all(|i| pattern[i] == pattern[i % q]))
        .unwrap_or(p)
}

fn write_set(f: &mut fmt::Formatter<'_>, xs: &[u64]) -> fmt::Result {
    f.write_str("{")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("}")
}

impl fmt::Display for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UP({}; {}; ", self.threshold, self.period)?;
        write_set(f, &self.residues)?;
        f.write_str("; ")?;
        write_set(f, &self.exceptions)?;
        f.write_str(")")
    }
}

impl fmt::Debug for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for UpSet {
    type Err = SpecError;

    /// Parses `UP(N; p; {r, ...}; {e, ...})`, canonicalizing the result.
    fn from_str(s: &str) -> Result<Self, SpecError> {
        let bad = || SpecError::UpSet(format!("cannot parse {s:?}"));
        let body = s
            .trim()
            .strip_prefix("UP(")
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(bad)?;
        let parts: Vec<&str> = body.split(';').map(str::trim).collect();
        let [n, p, rs, es] = parts.as_slice() else {
            return Err(bad());
        };
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let list = |t: &str| -> Result<Vec<u64>, SpecError> {
            let inner = t.strip_prefix('{').and_then(|x| x.strip_suffix('}')).ok_or_else(bad)?;
            inner
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(num)
                .collect()
        };
        UpSet::new(num(n)?, num(p)?, list(rs)?, list(es)?)
    }
}

impl Serialize for UpSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UpSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
