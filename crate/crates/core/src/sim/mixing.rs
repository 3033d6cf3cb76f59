//! The mixing operator `U = W T W` with `T_rr = exp(i pi tau (|r| - n/2))`.
//!
//! `U` depends on `r, s` only through their Hamming distance `d`, with entries
//! `u_d = cos^n(pi tau / 2) tan^d(pi tau / 2) (-i)^d`. Because the diagonal
//! phase factorizes over bits, `U` is a global phase times the same 2x2
//! operator applied to every qubit.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::state::StateVector;
use super::walsh::apply_bit_operator;
use crate::combin::binomial;

/// Closed-form coefficient `u_d`, written as `cos^(n-d) (-i sin)^d` so that
/// `tau = 1` (where tan diverges) stays finite.
pub fn mixing_coefficient(n: u32, tau: f64, d: u32) -> Complex64 {
    let half = PI * tau / 2.0;
    let c = Complex64::new(half.cos(), 0.0);
    let s = Complex64::new(0.0, -half.sin());
    c.powu(n - d) * s.powu(d)
}

/// `u_d = 2^-n sum_z sum_h (-1)^z C(d,z) C(n-d,h-z) t_h` for an arbitrary
/// table `t_0 .. t_n` of diagonal phases.
pub fn mixing_coefficient_direct(n: u32, t: &[Complex64], d: u32) -> Complex64 {
    assert_eq!(t.len(), n as usize + 1, "phase table needs n + 1 entries");
    let mut sum = Complex64::new(0.0, 0.0);
    for z in 0..=d {
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        let cz = binomial(d as u64, z as u64).unwrap() as f64;
        for h in z..=(n - d + z) {
            let ch = binomial((n - d) as u64, (h - z) as u64).unwrap() as f64;
            sum += t[h as usize] * (sign * cz * ch);
        }
    }
    sum / (n as f64).exp2()
}

/// Diagonal phases `t_h = exp(i pi tau (h - n/2))` for `h = 0..=n`.
pub fn linear_phase_table(n: u32, tau: f64) -> Vec<Complex64> {
    (0..=n)
        .map(|h| Complex64::from_polar(1.0, PI * tau * (h as f64 - n as f64 / 2.0)))
        .collect()
}

/// Single-qubit factor `W1 diag(1, e^{i pi tau}) W1`.
pub(crate) fn bit_mixer(tau: f64) -> [[Complex64; 2]; 2] {
    let e = Complex64::from_polar(1.0, PI * tau);
    let one = Complex64::new(1.0, 0.0);
    let plus = (one + e) * 0.5;
    let minus = (one - e) * 0.5;
    [[plus, minus], [minus, plus]]
}

/// Apply `U` in place: `n` single-qubit mixers and the global phase
/// `exp(-i pi tau n / 2)`.
pub fn apply_mixing(state: &mut StateVector, tau: f64) {
    let n = state.n();
    let global = Complex64::from_polar(1.0, -PI * tau * n as f64 / 2.0);
    let mut op = bit_mixer(tau);
    // fold the global phase into the first qubit's operator
    for row in op.iter_mut() {
        for v in row.iter_mut() {
            *v *= global;
        }
    }
    let plain = bit_mixer(tau);
    let amps = state.amplitudes_mut();
    for bit in 0..n {
        apply_bit_operator(amps, bit, if bit == 0 { op } else { plain });
    }
}
