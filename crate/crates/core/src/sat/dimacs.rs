//! DIMACS CNF and JSON problem files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::clause::Clause;
use super::ensemble::EnsembleKind;
use super::problem::SatProblem;
use crate::error::{Error, Result};

/// DIMACS text: `p cnf n m` header, 1-indexed signed literals, `0` terminators.
pub fn to_dimacs(problem: &SatProblem, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "c {line}");
        }
    }
    let _ = writeln!(out, "p cnf {} {}", problem.n(), problem.m());
    for clause in problem.clauses() {
        for (v, neg) in clause.literals() {
            let lit = v as i64 + 1;
            let _ = write!(out, "{} ", if neg { -lit } else { lit });
        }
        out.push_str("0\n");
    }
    out
}

pub fn from_dimacs(text: &str) -> Result<SatProblem> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<(u32, bool)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(Error::Parse(format!(
                    "line {}: bad header `{line}`",
                    lineno + 1
                )));
            }
            let n = fields[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable count `{}`", fields[2])))?;
            let m = fields[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad clause count `{}`", fields[3])))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| Error::Parse("clause before `p cnf` header".into()))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad literal `{tok}`", lineno + 1)))?;
            if lit == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current), n)?);
            } else {
                current.push((lit.unsigned_abs() as u32 - 1, lit < 0));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| Error::Parse("missing `p cnf` header".into()))?;
    if !current.is_empty() {
        return Err(Error::Parse("last clause is not 0-terminated".into()));
    }
    if clauses.len() != m {
        return Err(Error::Parse(format!(
            "header declares {m} clauses, found {}",
            clauses.len()
        )));
    }
    let k = clauses.first().map(Clause::k).unwrap_or(1);
    SatProblem::new(n, k, clauses)
}

/// JSON form of an instance together with the ensemble it was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: u32,
    pub k: u32,
    pub m: usize,
    pub seed: u64,
    pub ensemble: EnsembleKind,
    /// DIMACS-style signed 1-indexed literals.
    pub clauses: Vec<Vec<i64>>,
}

impl ProblemFile {
    pub fn new(problem: &SatProblem, ensemble: EnsembleKind, seed: u64) -> Self {
        let clauses = problem
            .clauses()
            .iter()
            .map(|c| {
                c.literals()
                    .map(|(v, neg)| if neg { -(v as i64 + 1) } else { v as i64 + 1 })
                    .collect()
            })
            .collect();
        ProblemFile {
            n: problem.n(),
            k: problem.k(),
            m: problem.m(),
            seed,
            ensemble,
            clauses,
        }
    }

    pub fn to_problem(&self) -> Result<SatProblem> {
        let clauses = self
            .clauses
            .iter()
            .map(|lits| {
                if lits.iter().any(|&l| l == 0) {
                    return Err(Error::Parse("literal 0 inside clause".into()));
                }
                Clause::new(
                    lits.iter()
                        .map(|&l| (l.unsigned_abs() as u32 - 1, l < 0))
                        .collect(),
                    self.n,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        if clauses.len() != self.m {
            return Err(Error::Parse(format!(
                "m = {} but {} clauses listed",
                self.m,
                clauses.len()
            )));
        }
        SatProblem::new(self.n, self.k, clauses)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sat::{sample_problem, EnsembleSpec};

    #[test]
    fn dimacs_round_trip() {
        let spec = EnsembleSpec::random(20, 3, 80, 7);
        let p = sample_problem(&spec, &mut rng::from_seed(7)).unwrap();
        let text = to_dimacs(&p, Some("random 3-SAT"));
        assert!(text.lines().any(|l| l == "p cnf 20 80"));
        assert_eq!(from_dimacs(&text).unwrap(), p);
        let json = serde_json::to_string(&ProblemFile::new(&p, spec.kind, 7)).unwrap();
        let back: ProblemFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_problem().unwrap(), p);
    }

    #[test]
    fn dimacs_errors() {
        assert!(from_dimacs("1 2 0\n").is_err());
        assert!(from_dimacs("p cnf 3 2\n1 2 0\n").is_err());
        assert!(from_dimacs("p cnf 3 1\n1 -2\n").is_err());
        assert!(from_dimacs("p cnf 3 1\n1 x 0\n").is_err());
    }
}
