use std::collections::HashMap;

use qsk_core::exact::exact_mean_psoln;
use qsk_core::rng;
use qsk_core::sat::{
    conflict_moments, enumerate_problems, sample_problem, EnsembleSpec, SatProblem,
};
use qsk_core::sim::{monte_carlo_mean, PhaseSchedule, Simulator};

#[test]
fn sampling_is_uniform_over_problems() {
    let spec = EnsembleSpec::random(3, 2, 3, 2024);
    let all: Vec<SatProblem> = enumerate_problems(3, 2, 3).unwrap().collect();
    assert_eq!(all.len(), 220);
    let index: HashMap<SatProblem, usize> =
        all.into_iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut counts = vec![0u64; 220];
    let mut r = rng::from_seed(spec.seed);
    let draws = 100_000u64;
    for _ in 0..draws {
        counts[index[&sample_problem(&spec, &mut r).unwrap()]] += 1;
    }
    assert!(counts.iter().all(|&c| c > 0));
    let expected = draws as f64 / 220.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 219 degrees of freedom; the 0.999 quantile is about 294
    assert!(chi2 < 294.0, "chi2 = {chi2}");
}

#[test]
fn monte_carlo_tracks_exact_average() {
    let schedule = PhaseSchedule::single(0.3, 0.25);
    let stats =
        monte_carlo_mean(&EnsembleSpec::random(6, 3, 8, 5), &schedule, 4000, false).unwrap();
    let exact = exact_mean_psoln(6, 3, 8, 0.3, 0.25).unwrap();
    assert!(
        (stats.mean - exact).abs() < 3.0 * stats.std_error,
        "{} +- {} vs {exact}",
        stats.mean,
        stats.std_error
    );
}

#[test]
fn conflict_variance_sample_matches_exact_formula() {
    let (n, m) = (10, 40);
    let spec = EnsembleSpec::random(n, 3, m, 8);
    let mut r = rng::from_seed(8);
    let v: Vec<f64> = (0..2000)
        .map(|_| sample_problem(&spec, &mut r).unwrap().conflict_variance())
        .collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let se = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
        / (v.len() as f64 - 1.0)
        / v.len() as f64)
        .sqrt();
    let exact = conflict_moments(n, 3, m).unwrap().expected_variance;
    assert!((mean - exact).abs() < 3.0 * se, "{mean} +- {se} vs {exact}");
}

/// Maximizes `f` on `[lo, hi]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) > f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn phase_errors_cost_second_order() {
    let spec = EnsembleSpec::random(10, 3, 30, 31);
    let mut r = rng::from_seed(31);
    let mut fitted = 0;
    while fitted < 5 {
        let p = sample_problem(&spec, &mut r).unwrap();
        let sim = Simulator::new(&p).unwrap();
        if sim.solution_count() == 0 {
            continue;
        }
        let tau = 0.28;
        let f = |rho: f64| {
            sim.run_p_solution(&PhaseSchedule::single(rho, tau))
                .unwrap()
        };
        let best = golden_max(&f, 0.05, 0.6);
        if !(best > 0.06 && best < 0.59) {
            continue;
        }
        let top = f(best);
        // fit drop(eps) = c eps^q over eps in {0.01, 0.005, 0.0025}
        let drops: Vec<f64> = [0.01, 0.005, 0.0025]
            .iter()
            .map(|&e| top - 0.5 * (f(best + e) + f(best - e)))
            .collect();
        assert!(drops.iter().all(|&d| d > 0.0), "{drops:?}");
        let q1 = (drops[0] / drops[1]).log2();
        let q2 = (drops[1] / drops[2]).log2();
        assert!(
            (q1 - 2.0).abs() < 0.05 && (q2 - 2.0).abs() < 0.05,
            "orders {q1} {q2}"
        );
        // one-sided error is also second order at the optimum
        let one = [0.01, 0.005].map(|e| top - f(best + e));
        assert!(((one[0] / one[1]).log2() - 2.0).abs() < 0.2);
        fitted += 1;
    }
}
