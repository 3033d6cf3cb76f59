use num_complex::Complex64;
use rayon::prelude::*;

use super::state::StateVector;

const PAR_THRESHOLD: usize = 1 << 14;

/// Apply a 2x2 operator `[[a, b], [c, d]]` to qubit `bit` of `amps`.
pub(crate) fn apply_bit_operator(amps: &mut [Complex64], bit: u32, op: [[Complex64; 2]; 2]) {
    let half = 1usize << bit;
    let butterfly = move |lo: &mut [Complex64], hi: &mut [Complex64]| {
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            let (u, v) = (*x, *y);
            *x = op[0][0] * u + op[0][1] * v;
            *y = op[1][0] * u + op[1][1] * v;
        }
    };
    if amps.len() < PAR_THRESHOLD {
        for block in amps.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            butterfly(lo, hi);
        }
    } else if amps.len() / (2 * half) >= 64 {
        amps.par_chunks_mut(2 * half).for_each(|block| {
            let (lo, hi) = block.split_at_mut(half);
            butterfly(lo, hi);
        });
    } else {
        for block in amps.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            lo.par_chunks_mut(4096)
                .zip(hi.par_chunks_mut(4096))
                .for_each(|(l, h)| butterfly(l, h));
        }
    }
}

/// Normalized Walsh-Hadamard transform, `W_rs = 2^(-n/2) (-1)^|r AND s|`,
/// in place by radix-2 butterflies. `W` is its own inverse.
pub fn fast_walsh(state: &mut StateVector) {
    let n = state.n();
    let amps = state.amplitudes_mut();
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for bit in 0..n {
        apply_bit_operator(amps, bit, [[h, h], [h, -h]]);
    }
}
