//! Search over sets of variable-value pairs.
//!
//! With `n` variables there are `2n` pairs, so a set is a `2n`-bit string:
//! bit `2i` means "V_{i+1} = false" is in the set and bit `2i + 1` means
//! "V_{i+1} = true" is. A variable is uniquely assigned when exactly one of
//! its two bits is set. Conflicts are counted among uniquely assigned
//! variables only, and a solution is a set assigning every variable once
//! with no conflicts.
//!
//! The search starts from the uniform superposition over all `4^n` sets,
//! applies `P_ss = exp(i pi rho (c(s) - m/2^k)) exp(i pi sigma q(s))` and then
//! mixes with `W T W` over `2n` bits, `T` keyed to set size. `T` may also
//! carry a phase per doubly assigned variable.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::sat::SatProblem;

/// Largest variable count for the `4^n`-amplitude state.
pub const MAX_PARTIAL_VARS: u32 = 13;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PartialOptions {
    /// Extra mixing phase `exp(i pi tau_duplicate)` per doubly assigned variable.
    pub tau_duplicate: f64,
}

#[derive(Debug, Clone)]
pub struct PartialOutcome {
    pub state: StateVector,
    pub p_solution: f64,
}

fn unique_count(set: u64, _n: u32) -> u32 {
    let lo = set & 0x5555_5555_5555_5555;
    let hi = (set >> 1) & 0x5555_5555_5555_5555;
    (lo ^ hi).count_ones()
}

/// Conflict count for every set, by scattering each clause's falsifying
/// pair-pattern over all sets containing it.
fn partial_conflicts(problem: &SatProblem) -> Vec<u32> {
    let bits = 2 * problem.n();
    let full = (1u64 << bits) - 1;
    let mut table = vec![0u32; 1usize << bits];
    for clause in problem.clauses() {
        let (mut mask, mut pat) = (0u64, 0u64);
        for (v, neg) in clause.literals() {
            mask |= 0b11 << (2 * v);
            // falsified when the variable holds exactly the value `neg`
            pat |= (if neg { 0b10 } else { 0b01 }) << (2 * v);
        }
        let free = full & !mask;
        let mut t = 0u64;
        loop {
            table[(t | pat) as usize] += 1;
            t = t.wrapping_sub(free) & free;
            if t == 0 {
                break;
            }
        }
    }
    table
}

/// Per-variable 4x4 mixer `W2 diag(t) W2` on the pair of bits of one variable.
fn pair_mixer(tau: f64, tau_duplicate: f64) -> [[Complex64; 4]; 4] {
    let t: Vec<Complex64> = (0..4u32)
        .map(|p| {
            let dup = if p == 0b11 { tau_duplicate } else { 0.0 };
            Complex64::from_polar(1.0, PI * (tau * p.count_ones() as f64 + dup))
        })
        .collect();
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (s, v) in row.iter_mut().enumerate() {
            // (W2)_{r,j} (W2)_{j,s} = (-1)^{|r&j| + |j&s|} / 4
            *v = (0..4usize)
                .map(|j| {
                    let sign = if ((r & j).count_ones() + (j & s).count_ones()) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    t[j] * (sign / 4.0)
                })
                .sum();
        }
    }
    out
}

fn apply_pair_operator(amps: &mut [Complex64], var: u32, op: &[[Complex64; 4]; 4]) {
    let stride = 1usize << (2 * var);
    for block in amps.chunks_mut(4 * stride) {
        for i in 0..stride {
            let v = [
                block[i],
                block[i + stride],
                block[i + 2 * stride],
                block[i + 3 * stride],
            ];
            for (r, row) in op.iter().enumerate() {
                block[i + r * stride] =
                    row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
            }
        }
    }
}

pub fn run_partial(problem: &SatProblem, rho: f64, tau: f64, sigma: f64) -> Result<PartialOutcome> {
    run_partial_with(problem, rho, tau, sigma, PartialOptions::default())
}

pub fn run_partial_with(
    problem: &SatProblem,
    rho: f64,
    tau: f64,
    sigma: f64,
    options: PartialOptions,
) -> Result<PartialOutcome> {
    let n = problem.n();
    if n > MAX_PARTIAL_VARS {
        return Err(Error::capacity(format!(
            "partial-assignment search needs n <= {MAX_PARTIAL_VARS}, got {n}"
        )));
    }
    let bits = 2 * n;
    let conflicts = partial_conflicts(problem);
    let cbar = problem.mean_conflicts();
    let mut state = StateVector::uniform(bits)?;
    for (set, a) in state.amplitudes_mut().iter_mut().enumerate() {
        let q = unique_count(set as u64, n) as f64;
        let c = conflicts[set] as f64;
        *a *= Complex64::from_polar(1.0, PI * (rho * (c - cbar) + sigma * q));
    }
    let op = pair_mixer(tau, options.tau_duplicate);
    let amps = state.amplitudes_mut();
    for var in 0..n {
        apply_pair_operator(amps, var, &op);
    }
    let global = Complex64::from_polar(1.0, -PI * tau * n as f64);
    amps.iter_mut().for_each(|a| *a *= global);

    let p_solution = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|&(set, _)| unique_count(set as u64, n) == n && conflicts[set] == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(PartialOutcome { state, p_solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sat::{sample_problem, EnsembleSpec};
    use crate::sim::mixing::apply_mixing;

    #[test]
    fn single_variable_no_clauses() {
        let p = SatProblem::new(1, 1, vec![]).unwrap();
        let out = run_partial(&p, 0.0, 0.0, 0.0).unwrap();
        assert!((out.p_solution - 0.5).abs() < 1e-15);
    }

    #[test]
    fn counts_solution_sets_without_phases() {
        let mut r = rng::from_seed(8);
        for _ in 0..5 {
            let p = sample_problem(&EnsembleSpec::random(5, 2, 6, 0), &mut r).unwrap();
            let out = run_partial(&p, 0.0, 0.0, 0.0).unwrap();
            let expect = p.count_solutions().unwrap() as f64 / 4f64.powi(5);
            assert!((out.p_solution - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn preserves_norm() {
        let mut r = rng::from_seed(1);
        for _ in 0..5 {
            let p = sample_problem(&EnsembleSpec::random(4, 3, 6, 0), &mut r).unwrap();
            let out = run_partial_with(&p, 0.3, 0.27, 0.4, PartialOptions { tau_duplicate: 0.2 })
                .unwrap();
            assert!((out.state.norm_sqr() - 1.0).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&out.p_solution));
        }
        let big = SatProblem::new(14, 3, vec![]).unwrap();
        assert!(matches!(
            run_partial(&big, 0.1, 0.1, 0.1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn size_keyed_mixing_equals_bitwise_mixing() {
        // without the duplicate phase the pair mixer is two independent bit mixers
        let input: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut a = StateVector::from_amplitudes(input.clone()).unwrap();
        apply_mixing(&mut a, 0.37);
        let mut b = input;
        let op = pair_mixer(0.37, 0.0);
        for var in 0..3 {
            apply_pair_operator(&mut b, var, &op);
        }
        let global = Complex64::from_polar(1.0, -PI * 0.37 * 3.0);
        for (x, y) in a.amplitudes().iter().zip(&b) {
            assert!((x - y * global).norm() < 1e-13);
        }
    }

    #[test]
    fn partial_conflicts_only_for_unique_vars() {
        // clause V1 OR V2 over n=2: falsified by V1=F, V2=F uniquely assigned
        let c = crate::sat::Clause::new(vec![(0, false), (1, false)], 2).unwrap();
        let p = SatProblem::new(2, 2, vec![c]).unwrap();
        let t = partial_conflicts(&p);
        assert_eq!(t[0b0101], 1);
        assert_eq!(t[0b0111], 0); // V1 doubly assigned
        assert_eq!(t[0b0100], 0); // V1 unassigned
        assert_eq!(t[0b1010], 0);
        assert_eq!(unique_count(0b0111, 2), 1);
    }
}
