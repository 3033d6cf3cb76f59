use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mixing::apply_mixing;
use super::schedule::PhaseSchedule;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::sat::SatProblem;

/// A problem prepared for repeated simulation: the conflict count of every
/// assignment is tabulated once.
#[derive(Debug, Clone)]
pub struct Simulator {
    n: u32,
    m: usize,
    mean_conflicts: f64,
    conflicts: Vec<u32>,
    solutions: u64,
}

impl Simulator {
    pub fn new(problem: &SatProblem) -> Result<Self> {
        StateVector::check_qubits(problem.n())?;
        let conflicts = problem.conflict_table()?;
        let solutions = conflicts.iter().filter(|&&c| c == 0).count() as u64;
        Ok(Simulator {
            n: problem.n(),
            m: problem.m(),
            mean_conflicts: problem.mean_conflicts(),
            conflicts,
            solutions,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn solution_count(&self) -> u64 {
        self.solutions
    }

    pub fn conflicts(&self) -> &[u32] {
        &self.conflicts
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.n() != self.n {
            return Err(Error::usage(format!(
                "state has {} qubits, problem has {} variables",
                state.n(),
                self.n
            )));
        }
        Ok(())
    }

    /// Multiply each amplitude by `exp(i pi rho (c(s) - m/2^k))`.
    pub fn apply_conflict_phase(&self, state: &mut StateVector, rho: f64) -> Result<()> {
        self.check(state)?;
        let phases: Vec<Complex64> = (0..=self.m)
            .map(|c| Complex64::from_polar(1.0, PI * rho * (c as f64 - self.mean_conflicts)))
            .collect();
        state
            .amplitudes_mut()
            .par_iter_mut()
            .with_min_len(4096)
            .zip(self.conflicts.par_iter().with_min_len(4096))
            .for_each(|(a, &c)| *a *= phases[c as usize]);
        Ok(())
    }

    /// Start from the uniform state and apply phase then mixing once per step.
    pub fn run(&self, schedule: &PhaseSchedule) -> Result<StateVector> {
        schedule.validate()?;
        let mut state = StateVector::uniform(self.n)?;
        for step in &schedule.steps {
            self.apply_conflict_phase(&mut state, step.rho)?;
            apply_mixing(&mut state, step.tau);
        }
        Ok(state)
    }

    /// Probability of measuring a zero-conflict assignment.
    pub fn p_solution(&self, state: &StateVector) -> Result<f64> {
        self.check(state)?;
        Ok(state
            .amplitudes()
            .iter()
            .zip(&self.conflicts)
            .filter(|(_, &c)| c == 0)
            .map(|(a, _)| a.norm_sqr())
            .sum())
    }

    pub fn run_p_solution(&self, schedule: &PhaseSchedule) -> Result<f64> {
        let state = self.run(schedule)?;
        self.p_solution(&state)
    }
}

pub fn apply_conflict_phase(state: &mut StateVector, problem: &SatProblem, rho: f64) -> Result<()> {
    Simulator::new(problem)?.apply_conflict_phase(state, rho)
}

/// Final state `phi = U_j P_j ... U_1 P_1 psi`.
pub fn run(problem: &SatProblem, schedule: &PhaseSchedule) -> Result<StateVector> {
    Simulator::new(problem)?.run(schedule)
}

pub fn p_solution(state: &StateVector, problem: &SatProblem) -> Result<f64> {
    Simulator::new(problem)?.p_solution(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sat::{sample_problem, Assignment, Clause, EnsembleSpec};
    use crate::sim::mixing::mixing_coefficient;

    fn one_sat() -> SatProblem {
        SatProblem::new(
            2,
            1,
            vec![
                Clause::new(vec![(0, true)], 2).unwrap(),
                Clause::new(vec![(1, true)], 2).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_problem_without_mixing_is_certain() {
        let p = SatProblem::new(6, 3, vec![]).unwrap();
        let sim = Simulator::new(&p).unwrap();
        let s = sim.run(&PhaseSchedule::single(0.7, 0.0)).unwrap();
        assert!((sim.p_solution(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| (a.norm_sqr() - 1.0 / 64.0).abs() < 1e-14));
    }

    #[test]
    fn zero_rho_is_identity_phase() {
        let p = one_sat();
        let mut s = StateVector::uniform(2).unwrap();
        apply_conflict_phase(&mut s, &p, 0.0).unwrap();
        assert_eq!(s, StateVector::uniform(2).unwrap());
    }

    #[test]
    fn solution_phase() {
        let p = one_sat();
        let mut s = StateVector::uniform(2).unwrap();
        apply_conflict_phase(&mut s, &p, 0.3).unwrap();
        let expect = Complex64::from_polar(0.5, -PI * 0.3 * 1.0);
        assert!((s.amplitudes()[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn one_sat_quarter_turn_phases_find_solution() {
        // p_c = i^c and t_h = i^h, i.e. rho = tau = 1/2
        let p = one_sat();
        let s = run(&p, &PhaseSchedule::single(0.5, 0.5)).unwrap();
        assert!((p_solution(&s, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.probability(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integer_rho_gives_signs() {
        let mut r = rng::from_seed(3);
        let p = sample_problem(&EnsembleSpec::random(8, 3, 16, 0), &mut r).unwrap();
        let mut s = StateVector::uniform(8).unwrap();
        apply_conflict_phase(&mut s, &p, 2.0).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let c = p
                .conflicts(Assignment {
                    bits: i as u64,
                    n: 8,
                })
                .unwrap() as f64;
            let expect = Complex64::from_polar(1.0 / 16.0, PI * 2.0 * (c - 2.0));
            assert!((a - expect).norm() < 1e-14);
            assert!((a.re.abs() - 1.0 / 16.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_step_matches_direct_double_sum() {
        let mut r = rng::from_seed(9);
        for n in 2..=6u32 {
            let p = sample_problem(&EnsembleSpec::random(n, 2, n as usize + 2, 0), &mut r).unwrap();
            let (rho, tau) = (0.31, 0.27);
            let s = run(&p, &PhaseSchedule::single(rho, tau)).unwrap();
            let len = 1usize << n;
            let cbar = p.mean_conflicts();
            for rr in 0..len {
                let phi: Complex64 = (0..len)
                    .map(|ss| {
                        let d = ((rr ^ ss) as u64).count_ones();
                        let c = p.conflicts(Assignment { bits: ss as u64, n }).unwrap() as f64;
                        mixing_coefficient(n, tau, d)
                            * Complex64::from_polar(1.0, PI * rho * (c - cbar))
                    })
                    .sum::<Complex64>()
                    / (n as f64 / 2.0).exp2();
                assert!((phi - s.amplitudes()[rr]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn two_steps_compose() {
        let mut r = rng::from_seed(4);
        let p = sample_problem(&EnsembleSpec::random(7, 3, 12, 0), &mut r).unwrap();
        let sim = Simulator::new(&p).unwrap();
        let two = sim
            .run(
                &PhaseSchedule::from_steps(vec![
                    super::super::schedule::Step { rho: 0.2, tau: 0.3 },
                    super::super::schedule::Step { rho: 0.4, tau: 0.1 },
                ])
                .unwrap(),
            )
            .unwrap();
        let mut manual = sim.run(&PhaseSchedule::single(0.2, 0.3)).unwrap();
        sim.apply_conflict_phase(&mut manual, 0.4).unwrap();
        apply_mixing(&mut manual, 0.1);
        assert!(two
            .amplitudes()
            .iter()
            .zip(manual.amplitudes())
            .all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn insoluble_problem_has_zero_probability() {
        let p = sample_problem(&EnsembleSpec::random(3, 2, 12, 0), &mut rng::from_seed(0)).unwrap();
        let s = run(&p, &PhaseSchedule::single(0.3, 0.3)).unwrap();
        assert_eq!(p_solution(&s, &p).unwrap(), 0.0);
    }

    #[test]
    fn uniform_state_gives_solution_fraction() {
        let p = sample_problem(&EnsembleSpec::random(8, 3, 20, 0), &mut rng::from_seed(2)).unwrap();
        let s = StateVector::uniform(8).unwrap();
        let expect = p.count_solutions().unwrap() as f64 / 256.0;
        assert!((p_solution(&s, &p).unwrap() - expect).abs() < 1e-14);
    }
}
