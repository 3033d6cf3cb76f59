//! k-SAT problems, assignments and the problem ensembles.

mod clause;
mod dimacs;
mod ensemble;
mod problem;

pub use clause::{clause_pool_size, hamming, Assignment, Clause};
pub use dimacs::{from_dimacs, to_dimacs, ProblemFile};
pub use ensemble::{
    conflict_moments, enumerate_problems, sample_problem, solution_fraction,
    solution_fraction_asymptotic, ConflictMoments, EnsembleKind, EnsembleSpec, ProblemIter,
    MAX_ENUMERATED_PROBLEMS,
};
pub use problem::{SatProblem, MAX_ENUMERATION_VARS};
