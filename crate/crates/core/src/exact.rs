//! Exact ensemble average of the success probability for random k-SAT.
//!
//! Averaging `Psoln` over all `C(M, m)` problems reduces to a sum over the
//! sizes `(w, x, y, z)` of the four groups of variables that distinguish a
//! solution `r` from two assignments `s`, `s'`, and over the numbers `b`, `b'`
//! of clauses conflicting only with `s` or only with `s'`:
//!
//! ```text
//! E[Psoln] = sum_{x,y,z} multinomial(n; w,x,y,z) u_{y+z} conj(u_{x+y})
//!            sum_{b,b'} exp(i pi rho (b - b')) N(x,y,z; b,b') / C(M, m)
//! ```

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::{binomial, binomial_u64, LnFactorials};
use crate::error::{Error, Result};
use crate::sat::clause_pool_size;

/// Sizes of the variable groups: `w` agree in `r, s, s'`; `x` agree in `r, s`
/// only; `y` agree in `s, s'` only; `z` agree in `r, s'` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSizes {
    pub w: u32,
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl GroupSizes {
    pub fn new(n: u32, x: u32, y: u32, z: u32) -> Result<Self> {
        let used = x as u64 + y as u64 + z as u64;
        if used > n as u64 {
            return Err(Error::usage(format!("x + y + z = {used} exceeds n = {n}")));
        }
        Ok(GroupSizes {
            w: n - x - y - z,
            x,
            y,
            z,
        })
    }

    pub fn n(&self) -> u32 {
        self.w + self.x + self.y + self.z
    }

    /// `d(r, s)`
    pub fn dist_rs(&self) -> u32 {
        self.y + self.z
    }

    /// `d(r, s')`
    pub fn dist_rs_prime(&self) -> u32 {
        self.x + self.y
    }
}

/// Clauses not conflicting with `r`, split by their conflicts with `s`, `s'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseGroupCounts {
    /// All possible clauses, `C(n,k) 2^k`.
    pub total: u64,
    pub both: u64,
    pub s_only: u64,
    pub s_prime_only: u64,
    /// Conflicting with both `s` and `s'`, or with neither.
    pub other: u64,
}

/// Inclusion-exclusion counts for the grouping `g`.
pub fn clause_group_counts(n: u32, k: u32, g: GroupSizes) -> ClauseGroupCounts {
    assert!(k <= n && g.n() == n, "inconsistent sizes");
    let c = |a: u32| binomial_u64(a as u64, k as u64);
    let per = c(n);
    let both = c(g.w + g.y) - c(g.w);
    let s_only = per - c(g.w + g.x) - both;
    let s_prime_only = per - c(g.w + g.z) - both;
    let other = per * ((1 << k) - 1) - s_only - s_prime_only;
    ClauseGroupCounts {
        total: clause_pool_size(n, k),
        both,
        s_only,
        s_prime_only,
        other,
    }
}

/// Problems with `r` a solution and exactly `b` (`b'`) clauses conflicting
/// only with `s` (`s'`): `C(N_s, b) C(N_s', b') C(N_other, m - b - b')`.
/// Out-of-range selections give 0; overflow past u128 is a capacity error.
pub fn n_problems_constrained(
    counts: &ClauseGroupCounts,
    m: usize,
    b: usize,
    b_prime: usize,
) -> Result<u128> {
    if b + b_prime > m {
        return Ok(0);
    }
    let overflow = || Error::capacity("problem count exceeds 128 bits");
    let a = binomial(counts.s_only, b as u64).ok_or_else(overflow)?;
    let c = binomial(counts.s_prime_only, b_prime as u64).ok_or_else(overflow)?;
    let d = binomial(counts.other, (m - b - b_prime) as u64).ok_or_else(overflow)?;
    a.checked_mul(c)
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(overflow)
}

/// Work limit for [`exact_mean_psoln`]: group triples times `(b, b')` pairs.
pub const EXACT_WORK_BUDGET: f64 = 4e9;

/// Below this total problem count the inner sums use exact integers.
const EXACT_INTEGER_LIMIT: u128 = 1_000_000_000_000_000_000;

/// Inner sums more than this many nats below their maximum are dropped.
const TRUNCATION_NATS: f64 = 45.0;

/// Which problems the average runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Normalization {
    /// Random ensemble, summed over every candidate solution `r`.
    Random,
    /// Probability of reaching one fixed `r`, averaged over problems it solves.
    FixedSolution,
}

/// Contribution of one `(x, y, z)` group triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleTerm {
    pub x: u32,
    pub y: u32,
    pub z: u32,
    /// `ln` of multinomial times `|u_{y+z} u_{x+y}|`.
    pub ln_outer: f64,
    /// Inner `(b, b')` sum divided by the problem count.
    pub inner: Complex64,
    pub contribution: Complex64,
}

/// `ln|u_d|` and the unit phase of `u_d = cos^(n-d)(pi tau/2) (-i sin(pi tau/2))^d`.
fn mixing_table(n: u32, tau: f64) -> Vec<(f64, Complex64)> {
    let half = PI * tau / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let ln_pow = |base: f64, p: u32| {
        if p == 0 {
            0.0
        } else {
            p as f64 * base.abs().ln()
        }
    };
    let step = Complex64::new(0.0, -s.signum());
    (0..=n)
        .map(|d| {
            let sign = if c < 0.0 && (n - d) % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            (ln_pow(c, n - d) + ln_pow(s, d), step.powu(d) * sign)
        })
        .collect()
}

struct Setup {
    n: u32,
    k: u32,
    m: usize,
    rho: f64,
    mixing: Vec<(f64, Complex64)>,
    lf: LnFactorials,
    ln_problems: f64,
    exact_problems: Option<u128>,
    norm: Normalization,
}

impl Setup {
    fn new(n: u32, k: u32, m: usize, rho: f64, tau: f64, norm: Normalization) -> Result<Self> {
        if n == 0 || k == 0 || k > n || n > 64 || k > 16 {
            return Err(Error::usage(format!("invalid sizes n = {n}, k = {k}")));
        }
        if !rho.is_finite() || !tau.is_finite() {
            return Err(Error::domain("phase parameters must be finite"));
        }
        let total = clause_pool_size(n, k);
        let per = binomial_u64(n as u64, k as u64);
        let pool = match norm {
            Normalization::Random => total,
            Normalization::FixedSolution => total - per,
        };
        if m as u64 > pool {
            return Err(Error::capacity(format!(
                "m = {m} exceeds the {pool} admissible clauses"
            )));
        }
        let triples = (n as f64 + 1.0) * (n as f64 + 2.0) * (n as f64 + 3.0) / 6.0;
        let work = triples * (m as f64 + 1.0) * (m as f64 + 2.0) / 2.0;
        if work > EXACT_WORK_BUDGET {
            return Err(Error::capacity(format!(
                "exact average for n = {n}, m = {m} needs ~{work:.1e} terms (budget {EXACT_WORK_BUDGET:.0e})"
            )));
        }
        let lf = LnFactorials::new(total as usize);
        let exact_problems = binomial(pool, m as u64).filter(|&c| c < EXACT_INTEGER_LIMIT);
        Ok(Setup {
            n,
            k,
            m,
            rho,
            mixing: mixing_table(n, tau),
            ln_problems: lf.ln_binomial(pool as usize, m),
            lf,
            exact_problems,
            norm,
        })
    }

    fn ln_multinomial(&self, g: GroupSizes) -> f64 {
        let f = |v: u32| self.lf.ln_fact(v as usize);
        f(self.n) - f(g.w) - f(g.x) - f(g.y) - f(g.z)
    }

    fn exact_multinomial(&self, g: GroupSizes) -> u128 {
        let b = |a: u32, c: u32| binomial(a as u64, c as u64).unwrap();
        b(self.n, g.w) * b(self.n - g.w, g.x) * b(self.n - g.w - g.x, g.y)
    }

    /// Inner sum over `(b, b')` divided by the problem count.
    fn inner(&self, counts: &ClauseGroupCounts) -> Complex64 {
        let m = self.m;
        let bmax = m.min(counts.s_only as usize);
        let bpmax = m.min(counts.s_prime_only as usize);
        let other = counts.other as usize;
        // weights grouped by b - b', offset by m
        let mut by_diff = vec![0.0f64; 2 * m + 1];
        if let Some(total) = self.exact_problems {
            let mut exact = vec![0u128; 2 * m + 1];
            for b in 0..=bmax {
                for bp in 0..=bpmax.min(m - b) {
                    if m - b - bp > other {
                        continue;
                    }
                    exact[m + b - bp] +=
                        n_problems_constrained(counts, m, b, bp).expect("bounded by C(M, m)");
                }
            }
            for (w, e) in by_diff.iter_mut().zip(&exact) {
                *w = *e as f64 / total as f64;
            }
        } else {
            let lc = |top: usize, len: usize| -> Vec<f64> {
                (0..=len).map(|j| self.lf.ln_binomial(top, j)).collect()
            };
            let ls = lc(counts.s_only as usize, bmax);
            let lsp = lc(counts.s_prime_only as usize, bpmax);
            let lo = lc(other, m);
            let mut max = f64::NEG_INFINITY;
            for b in 0..=bmax {
                for bp in 0..=bpmax.min(m - b) {
                    max = max.max(ls[b] + lsp[bp] + lo[m - b - bp]);
                }
            }
            if max == f64::NEG_INFINITY {
                return Complex64::new(0.0, 0.0);
            }
            let floor = max - TRUNCATION_NATS;
            for b in 0..=bmax {
                for bp in 0..=bpmax.min(m - b) {
                    let lw = ls[b] + lsp[bp] + lo[m - b - bp];
                    if lw > floor {
                        by_diff[m + b - bp] += (lw - max).exp();
                    }
                }
            }
            let scale = (max - self.ln_problems).exp();
            by_diff.iter_mut().for_each(|w| *w *= scale);
        }
        let mut acc = KahanComplex::default();
        for (i, &w) in by_diff.iter().enumerate() {
            if w != 0.0 {
                let diff = i as f64 - m as f64;
                acc.add(Complex64::from_polar(w, PI * self.rho * diff));
            }
        }
        acc.sum()
    }

    fn term(&self, x: u32, y: u32, z: u32) -> TripleTerm {
        let g = GroupSizes {
            w: self.n - x - y - z,
            x,
            y,
            z,
        };
        let (la, pa) = self.mixing[g.dist_rs() as usize];
        let (lb, pb) = self.mixing[g.dist_rs_prime() as usize];
        let mut ln_outer = la + lb;
        let zero = Complex64::new(0.0, 0.0);
        if ln_outer == f64::NEG_INFINITY {
            return TripleTerm {
                x,
                y,
                z,
                ln_outer,
                inner: zero,
                contribution: zero,
            };
        }
        let inner = self.inner(&clause_group_counts(self.n, self.k, g));
        let phase = pa * pb.conj();
        let contribution = if self.exact_problems.is_some() && self.n <= 40 {
            ln_outer += self.ln_multinomial(g);
            phase * inner * (la + lb).exp() * self.exact_multinomial(g) as f64
        } else {
            ln_outer += self.ln_multinomial(g);
            phase * inner * ln_outer.exp()
        };
        let contribution = match self.norm {
            Normalization::Random => contribution,
            Normalization::FixedSolution => contribution * (-(self.n as f64) * LN_2).exp(),
        };
        TripleTerm {
            x,
            y,
            z,
            ln_outer,
            inner,
            contribution,
        }
    }

    fn triples(&self) -> Vec<(u32, u32, u32)> {
        let n = self.n;
        let mut out = Vec::new();
        for x in 0..=n {
            for y in 0..=n - x {
                for z in 0..=n - x - y {
                    out.push((x, y, z));
                }
            }
        }
        out
    }

    fn evaluate(&self) -> Result<f64> {
        // per-x partial sums are formed sequentially, then combined pairwise,
        // so the result does not depend on the worker count
        let partials: Vec<Complex64> = (0..=self.n)
            .into_par_iter()
            .map(|x| {
                let mut acc = KahanComplex::default();
                for y in 0..=self.n - x {
                    for z in 0..=self.n - x - y {
                        acc.add(self.term(x, y, z).contribution);
                    }
                }
                acc.sum()
            })
            .collect();
        let total = pairwise_sum(&partials);
        if total.im.abs() > 1e-6 || !total.re.is_finite() {
            return Err(Error::NumericalIntegrity(format!(
                "ensemble average has imaginary residue {:.3e} (real part {})",
                total.im, total.re
            )));
        }
        if total.re < -1e-9 || total.re > 1.0 + 1e-9 {
            return Err(Error::NumericalIntegrity(format!(
                "ensemble average {} outside [0, 1]",
                total.re
            )));
        }
        Ok(total.re.clamp(0.0, 1.0))
    }
}

#[derive(Default)]
struct KahanComplex {
    sum: Complex64,
    comp: Complex64,
}

impl KahanComplex {
    fn add(&mut self, v: Complex64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn sum(&self) -> Complex64 {
        self.sum
    }
}

fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        len => {
            let (a, b) = v.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `E[Psoln]` over the random k-SAT ensemble with `m` distinct clauses.
pub fn exact_mean_psoln(n: u32, k: u32, m: usize, rho: f64, tau: f64) -> Result<f64> {
    Setup::new(n, k, m, rho, tau, Normalization::Random)?.evaluate()
}

/// Probability of measuring a prespecified solution, averaged over the
/// problems it solves. Bounds the prespecified-ensemble `E[Psoln]` from below.
pub fn exact_prespecified_bound(n: u32, k: u32, m: usize, rho: f64, tau: f64) -> Result<f64> {
    Setup::new(n, k, m, rho, tau, Normalization::FixedSolution)?.evaluate()
}

/// Per-triple terms of [`exact_mean_psoln`], in `(x, y, z)` lexicographic order.
pub fn exact_mean_terms(n: u32, k: u32, m: usize, rho: f64, tau: f64) -> Result<Vec<TripleTerm>> {
    let setup = Setup::new(n, k, m, rho, tau, Normalization::Random)?;
    Ok(setup
        .triples()
        .into_par_iter()
        .map(|(x, y, z)| setup.term(x, y, z))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_counts() {
        let g = GroupSizes::new(3, 1, 1, 1).unwrap();
        assert_eq!(g.w, 0);
        let c = clause_group_counts(3, 2, g);
        assert_eq!(
            (c.total, c.both, c.s_only, c.s_prime_only, c.other),
            (12, 0, 3, 3, 3)
        );
        assert_eq!(n_problems_constrained(&c, 3, 1, 2).unwrap(), 9);
        assert_eq!(n_problems_constrained(&c, 3, 0, 0).unwrap(), 1);
        assert_eq!(n_problems_constrained(&c, 3, 2, 2).unwrap(), 0);
        assert_eq!(n_problems_constrained(&c, 3, 4, 0).unwrap(), 0);
    }

    #[test]
    fn identical_assignments() {
        let c = clause_group_counts(7, 3, GroupSizes::new(7, 0, 0, 0).unwrap());
        assert_eq!((c.both, c.s_only, c.s_prime_only), (0, 0, 0));
        assert_eq!(c.other, 35 * 7);
    }

    #[test]
    fn empty_problems_without_mixing() {
        assert!((exact_mean_psoln(6, 3, 0, 0.4, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixing_table_matches_closed_form() {
        use crate::sim::mixing_coefficient;
        for &tau in &[0.0, 0.2, 0.5, 1.0, -0.3] {
            for (d, (ln, ph)) in mixing_table(6, tau).into_iter().enumerate() {
                let u = mixing_coefficient(6, tau, d as u32);
                assert!((ph * ln.exp() - u).norm() < 1e-14, "tau {tau} d {d}");
            }
        }
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            exact_mean_psoln(64, 3, 2000, 0.2, 0.3),
            Err(Error::Capacity(_))
        ));
        assert!(exact_mean_psoln(3, 2, 13, 0.2, 0.3).is_err());
        assert!(GroupSizes::new(3, 2, 2, 0).is_err());
    }

    #[test]
    fn exact_and_log_paths_agree() {
        // n=8, k=3, m=5: C(448, 5) is below the integer limit
        let setup = Setup::new(8, 3, 5, 0.31, 0.27, Normalization::Random).unwrap();
        assert!(setup.exact_problems.is_some());
        let mut logpath = Setup::new(8, 3, 5, 0.31, 0.27, Normalization::Random).unwrap();
        logpath.exact_problems = None;
        let a = setup.evaluate().unwrap();
        let b = logpath.evaluate().unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}
