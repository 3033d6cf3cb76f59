use num_complex::Complex64;
use qsk_core::asymptotics::{decay_rate, scaled_counts, ScaledPoint};
use qsk_core::exact::{clause_group_counts, exact_mean_psoln, GroupSizes};

#[test]
fn finite_counts_approach_scaled_counts() {
    // fractions (x, y, z) = (1/6, 1/3, 1/6)
    let p = ScaledPoint::new(
        Complex64::new(1.0 / 6.0, 0.0),
        Complex64::new(1.0 / 3.0, 0.0),
        Complex64::new(1.0 / 6.0, 0.0),
    );
    let s = scaled_counts(3, &p);
    let mut errs = Vec::new();
    for n in [30u32, 60, 120] {
        let g = GroupSizes::new(n, n / 6, n / 3, n / 6).unwrap();
        let c = clause_group_counts(n, 3, g);
        let m = c.total as f64;
        let e = [
            (c.both as f64 / m - s.both.re).abs(),
            (c.s_only as f64 / m - s.s_only.re).abs(),
            (c.s_prime_only as f64 / m - s.s_prime_only.re).abs(),
            (c.other as f64 / m - s.other.re).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        errs.push(e * n as f64);
    }
    // n times the error settles to a constant
    assert!(
        errs[2] < 1.0 && (errs[1] - errs[2]).abs() < 0.1 * errs[2].max(1e-3),
        "{errs:?}"
    );
}

#[test]
fn exact_slopes_approach_rate() {
    let (rho, tau) = (0.2912, 0.2599);
    let a = decay_rate(3, 2.0, rho, tau).unwrap().a;
    let e20 = exact_mean_psoln(20, 3, 40, rho, tau).unwrap();
    let e30 = exact_mean_psoln(30, 3, 60, rho, tau).unwrap();
    let slope = -(e30.ln() - e20.ln()) / 10.0;
    assert!((slope - a).abs() < 0.01, "{slope} vs {a}");
}

#[test]
fn no_conflict_phase_gives_random_selection() {
    // with rho = 0 the inner sum is the constant 1 - 2^-k
    let mu = 2.0;
    let target = -mu * (7.0f64 / 8.0).ln();
    for tau in [0.3, 0.1, 0.01, 0.001] {
        let r = decay_rate(3, mu, 0.0, tau).unwrap();
        assert!((r.a - target).abs() < 1e-12, "tau {tau}: {}", r.a);
    }
    // and small rho stays close
    let r = decay_rate(3, mu, 0.01, 0.05).unwrap();
    assert!((r.a - target).abs() < 0.01);
}
