use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combin::{binomial_u64, rank_subset, unrank_subset};
use crate::error::{Error, Result};

/// A complete truth assignment: bit `i` holds the value of variable `V_{i+1}`
/// (0 = false, 1 = true).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub bits: u64,
    pub n: u32,
}

impl Assignment {
    pub fn new(bits: u64, n: u32) -> Result<Self> {
        if n > 64 || (n < 64 && bits >> n != 0) {
            return Err(Error::usage(format!(
                "assignment {bits:#x} does not fit in {n} bits"
            )));
        }
        Ok(Assignment { bits, n })
    }

    /// Parse from the variable values `V_1 .. V_n`.
    pub fn from_values(values: &[bool]) -> Self {
        let bits = values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &v)| acc | ((v as u64) << i));
        Assignment {
            bits,
            n: values.len() as u32,
        }
    }

    pub fn value(&self, var: u32) -> bool {
        self.bits >> var & 1 == 1
    }

    /// Number of true variables, `|s|`.
    pub fn ones(&self) -> u32 {
        self.bits.count_ones()
    }
}

/// Hamming distance `d(r, s) = |r| + |s| - 2|r AND s|`.
pub fn hamming(r: Assignment, s: Assignment) -> Result<u32> {
    if r.n != s.n {
        return Err(Error::usage(format!("width mismatch: {} vs {}", r.n, s.n)));
    }
    Ok(r.ones() + s.ones() - 2 * (r.bits & s.bits).count_ones())
}

/// A disjunction of `k` literals over distinct variables.
///
/// Variables are kept ascending; bit `i` of `negated` flags the literal on
/// `vars[i]`. The only assignments falsifying the clause are those giving
/// each variable the value of its negation flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause {
    vars: Vec<u32>,
    negated: u32,
}

impl Clause {
    pub fn new(mut literals: Vec<(u32, bool)>, n: u32) -> Result<Self> {
        literals.sort_unstable_by_key(|l| l.0);
        if literals.is_empty() || literals.len() > 31 {
            return Err(Error::usage(format!(
                "clause width {} unsupported",
                literals.len()
            )));
        }
        if literals.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::usage("clause repeats a variable"));
        }
        if let Some(&(v, _)) = literals.last() {
            if v >= n {
                return Err(Error::usage(format!(
                    "variable index {v} out of range for n = {n}"
                )));
            }
        }
        let negated = literals
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &(_, neg))| acc | ((neg as u32) << i));
        let vars = literals.into_iter().map(|l| l.0).collect();
        Ok(Clause { vars, negated })
    }

    pub fn k(&self) -> u32 {
        self.vars.len() as u32
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn is_negated(&self, i: usize) -> bool {
        self.negated >> i & 1 == 1
    }

    pub fn negation_mask(&self) -> u32 {
        self.negated
    }

    pub fn literals(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, self.is_negated(i)))
    }

    /// `(mask, pattern)` such that `s` conflicts iff `s & mask == pattern`.
    pub fn conflict_pattern(&self) -> (u64, u64) {
        self.literals().fold((0u64, 0u64), |(mask, pat), (v, neg)| {
            (mask | 1 << v, pat | (neg as u64) << v)
        })
    }

    pub fn conflicts_with(&self, s: u64) -> bool {
        let (mask, pat) = self.conflict_pattern();
        s & mask == pat
    }

    /// Canonical index in `0..C(n,k) 2^k`: subset rank times `2^k` plus the
    /// negation mask.
    pub fn rank(&self, n: u32) -> u64 {
        (rank_subset(n, &self.vars) << self.k()) | self.negated as u64
    }

    pub fn from_rank(n: u32, k: u32, rank: u64) -> Self {
        let mut vars = Vec::with_capacity(k as usize);
        unrank_subset(n, k, rank >> k, &mut vars);
        Clause {
            vars,
            negated: (rank & ((1 << k) - 1)) as u32,
        }
    }

    /// The single clause on `vars` that `s` falsifies.
    pub fn conflicting_with(vars: Vec<u32>, s: u64) -> Self {
        let negated = vars
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &v)| acc | ((s >> v & 1) as u32) << i);
        Clause { vars, negated }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, neg)) in self.literals().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            if neg {
                write!(f, "(NOT V{})", v + 1)?;
            } else {
                write!(f, "V{}", v + 1)?;
            }
        }
        Ok(())
    }
}

/// Number of possible k-clauses over `n` variables, `C(n,k) 2^k`.
pub fn clause_pool_size(n: u32, k: u32) -> u64 {
    binomial_u64(n as u64, k as u64) << k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falsifying_pattern() {
        // V1 OR V2 OR (NOT V3) against V1..V4 = F,F,T,T
        let c = Clause::new(vec![(0, false), (1, false), (2, true)], 4).unwrap();
        let s = Assignment::from_values(&[false, false, true, true]);
        assert!(c.conflicts_with(s.bits));
        assert_eq!(c.to_string(), "V1 OR V2 OR (NOT V3)");
    }

    #[test]
    fn each_clause_conflicts_with_2_pow_n_minus_k() {
        let n = 6;
        for r in 0..clause_pool_size(n, 3) {
            let c = Clause::from_rank(n, 3, r);
            assert_eq!(c.rank(n), r);
            let hits = (0..1u64 << n).filter(|&s| c.conflicts_with(s)).count();
            assert_eq!(hits, 1 << (n - 3));
        }
    }

    #[test]
    fn rejects_malformed_clauses() {
        assert!(Clause::new(vec![(0, false), (0, true)], 3).is_err());
        assert!(Clause::new(vec![(3, false)], 3).is_err());
        assert!(Clause::new(vec![], 3).is_err());
    }

    #[test]
    fn hamming_examples() {
        let r = Assignment::new(0b011, 3).unwrap();
        let s = Assignment::new(0b110, 3).unwrap();
        assert_eq!(hamming(r, s).unwrap(), 2);
        assert_eq!(hamming(r, r).unwrap(), 0);
        assert!(hamming(r, Assignment::new(0, 4).unwrap()).is_err());
        assert!(Assignment::new(8, 3).is_err());
    }

    #[test]
    fn conflicting_clause_construction() {
        let c = Clause::conflicting_with(vec![0, 2, 3], 0b1010);
        assert!(c.conflicts_with(0b1010));
        assert!(!c.conflicts_with(0b1011));
    }
}
