use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exponent::{det3, solve3, Exponent, ExponentKind, ScaledPoint};
use crate::error::{Error, Result};

/// Newton iteration limit per solve.
pub const MAX_NEWTON_ITERATIONS: usize = 200;
/// Gradient norm accepted as stationary.
pub const STATIONARY_TOLERANCE: f64 = 1e-10;
/// Central-difference step for the Hessian, reduced near small group fractions.
pub const HESSIAN_STEP: f64 = 1e-5;

/// Steepest-descent evaluation of `E[Psoln] ~ prefactor exp(-n A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayResult {
    pub a: f64,
    pub prefactor: f64,
    pub det_hessian: Complex64,
    pub point: ScaledPoint,
    pub residual: f64,
    pub converged: bool,
    /// `Im F` at the point.
    pub exponent_imag: f64,
}

fn max_norm(g: &[Complex64; 3]) -> f64 {
    g.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// A step must not carry any group fraction across the negative real axis,
/// where the principal logarithm jumps.
fn admissible(from: &ScaledPoint, to: &ScaledPoint) -> bool {
    let a = [from.w(), from.x, from.y, from.z];
    let b = [to.w(), to.x, to.y, to.z];
    a.iter().zip(&b).all(|(u, v)| {
        v.re.is_finite()
            && v.im.is_finite()
            && (v.re > 0.0 || (u.im > 0.0) == (v.im > 0.0) || (u.re > 0.0 && v.re > 0.0))
    })
}

/// Gradient in `(Re x, Im x, y)` with `z = conj(x)`.
fn reduced_gradient(g: &[Complex64; 3]) -> [f64; 3] {
    [
        (g[0] + g[2]).re,
        (Complex64::i() * (g[0] - g[2])).re,
        g[1].re,
    ]
}

fn reduced_jacobian(e: &Exponent, p: &ScaledPoint) -> Result<[[f64; 3]; 3]> {
    let h = e.hessian_analytic(p)?;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let dirs = [[one, zero, one], [i, zero, -i], [zero, one, zero]];
    let mut jac = [[0.0; 3]; 3];
    for (col, d) in dirs.iter().enumerate() {
        let mut dg = [zero; 3];
        for r in 0..3 {
            dg[r] = h[r][0] * d[0] + h[r][1] * d[1] + h[r][2] * d[2];
        }
        let red = reduced_gradient(&dg);
        for r in 0..3 {
            jac[r][col] = red[r];
        }
    }
    Ok(jac)
}

struct Trace {
    trajectory: Vec<[f64; 3]>,
    last_residual: f64,
}

/// Damped Newton in the reduced real coordinates.
fn newton_reduced(
    e: &Exponent,
    start: ScaledPoint,
    trace: &mut Trace,
) -> Result<Option<ScaledPoint>> {
    let mut v = start.reduced();
    let point = |v: [f64; 3]| ScaledPoint::symmetric(v[0], v[1], v[2]);
    let mut g = match e.gradient(&point(v)) {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let res = max_norm(&g);
        trace.last_residual = res;
        trace.trajectory.push(v);
        if res < STATIONARY_TOLERANCE {
            return Ok(Some(point(v)));
        }
        let jac = reduced_jacobian(e, &point(v))?;
        let rg = reduced_gradient(&g);
        let Some(step) = solve3(jac, rg.map(|x| -x), f64::abs) else {
            return Ok(None);
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [
                v[0] + lambda * step[0],
                v[1] + lambda * step[1],
                v[2] + lambda * step[2],
            ];
            let tp = point(trial);
            if admissible(&point(v), &tp) {
                if let Ok(tg) = e.gradient(&tp) {
                    if max_norm(&tg) < res * (1.0 - 1e-4 * lambda)
                        || (lambda < 1e-3 && max_norm(&tg) < res)
                    {
                        v = trial;
                        g = tg;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // accept a tiny step anyway when already near round-off
            if res < 1e3 * STATIONARY_TOLERANCE {
                return Ok(Some(point(v)));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

/// Damped Newton on the unreduced complex gradient.
fn newton_complex(
    e: &Exponent,
    start: ScaledPoint,
    trace: &mut Trace,
) -> Result<Option<ScaledPoint>> {
    let mut p = start;
    let mut g = match e.gradient(&p) {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let res = max_norm(&g);
        trace.last_residual = res;
        trace.trajectory.push(p.reduced());
        if res < STATIONARY_TOLERANCE {
            return Ok(Some(p));
        }
        let h = e.hessian_analytic(&p)?;
        let Some(step) = solve3(h, g.map(|x| -x), |c: Complex64| c.norm()) else {
            return Ok(None);
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let a = p.as_array();
            let tp = ScaledPoint::from_array([0, 1, 2].map(|j| a[j] + step[j] * lambda));
            if admissible(&p, &tp) {
                if let Ok(tg) = e.gradient(&tp) {
                    if max_norm(&tg) < res * (1.0 - 1e-4 * lambda) {
                        p = tp;
                        g = tg;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok(None);
        }
    }
    Ok(None)
}

fn solve_from(e: &Exponent, start: ScaledPoint, trace: &mut Trace) -> Result<Option<ScaledPoint>> {
    if let Some(p) = newton_reduced(e, start, trace)? {
        return Ok(Some(p));
    }
    newton_complex(e, start, trace)
}

/// Continuation in `mu` from the clause-free stationary point.
fn homotopy(e: &Exponent, trace: &mut Trace) -> Result<Option<ScaledPoint>> {
    let target = e.mu;
    let mut point = e.mixing_point();
    if target == 0.0 {
        return Ok(Some(point));
    }
    let mut mu = 0.0;
    let mut step = (target / 8.0).min(0.05);
    while mu < target {
        let next = (mu + step).min(target);
        let stage = e.with_params(next, e.rho, e.tau)?;
        match solve_from(&stage, point, trace)? {
            Some(p) => {
                point = p;
                mu = next;
                step = (step * 1.5).min(next * 0.25).max(step);
            }
            None => {
                step /= 4.0;
                if step < 1e-9 * target.max(1.0) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(point))
}

/// Locates the relevant stationary point of `F`.
///
/// Newton starts from `guess` if given; otherwise (or if that fails) the
/// point is followed by continuation in `mu` from the clause-free limit.
pub fn find_stationary_point(e: &Exponent, guess: Option<ScaledPoint>) -> Result<ScaledPoint> {
    let mut trace = Trace {
        trajectory: Vec::new(),
        last_residual: f64::INFINITY,
    };
    if let Some(g) = guess {
        if g.w().re > 0.0 && g.y.re > 0.0 {
            if let Some(p) = solve_from(e, g, &mut trace)? {
                return Ok(p);
            }
        }
    }
    if let Some(p) = homotopy(e, &mut trace)? {
        return Ok(p);
    }
    let tail = trace.trajectory.len().saturating_sub(MAX_NEWTON_ITERATIONS);
    Err(Error::Convergence {
        iterations: trace.trajectory.len(),
        residual: trace.last_residual,
        context: format!(
            "stationary point for k = {}, mu = {}, rho = {}, tau = {}",
            e.k, e.mu, e.rho, e.tau
        ),
        trajectory: trace.trajectory.split_off(tail),
    })
}

/// Decay rate and saddle prefactor for `(k, mu, rho, tau)`.
pub fn decay_rate(k: u32, mu: f64, rho: f64, tau: f64) -> Result<DecayResult> {
    decay_rate_with(&Exponent::new(k, mu, rho, tau, ExponentKind::Random)?, None)
}

/// [`decay_rate`] for any exponent, with an optional Newton seed.
pub fn decay_rate_with(e: &Exponent, guess: Option<ScaledPoint>) -> Result<DecayResult> {
    let point = find_stationary_point(e, guess)?;
    let f = e.value(&point)?;
    let g = e.gradient(&point)?;
    let residual = max_norm(&g);
    let smallest = [point.w(), point.x, point.y, point.z]
        .iter()
        .map(|g| g.norm())
        .fold(f64::INFINITY, f64::min);
    let hess = e.hessian(&point, HESSIAN_STEP.min(1e-2 * smallest))?;
    let det = det3(&hess);
    let prod = point.w() * point.x * point.y * point.z * det;
    let pref = (-1.0 / prod).sqrt();
    let converged = residual < STATIONARY_TOLERANCE && f.im.abs() < 1e-9;
    Ok(DecayResult {
        a: -f.re,
        prefactor: pref.re,
        det_hessian: det,
        point,
        residual,
        converged,
        exponent_imag: f.im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let r = decay_rate(3, 4.0, 0.218, 0.286).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.a - 0.280).abs() < 1e-3, "{}", r.a);
        assert!((r.det_hessian.re + 478.5).abs() < 1.0, "{}", r.det_hessian);
        assert!((r.prefactor - 0.98).abs() < 0.02);
        assert!((r.point.w().re - 0.710).abs() < 1e-3);
        assert!((r.point.x.re - 0.101).abs() < 1e-3 && (r.point.x.im - 0.158).abs() < 1e-3);
        assert!((r.point.y.re - 0.088).abs() < 1e-3);
        assert!(r.point.asymmetry() < 1e-10);
    }

    #[test]
    fn seeded_solve_agrees() {
        let e = Exponent::new(3, 4.0, 0.218, 0.286, ExponentKind::Random).unwrap();
        let seed = ScaledPoint::symmetric(0.1, 0.16, 0.09);
        let a = decay_rate_with(&e, Some(seed)).unwrap();
        let b = decay_rate_with(&e, None).unwrap();
        assert!((a.a - b.a).abs() < 1e-10);
    }

    #[test]
    fn local_root() {
        let e = Exponent::new(3, 4.0, 0.218, 0.286, ExponentKind::Random).unwrap();
        let p = find_stationary_point(&e, None).unwrap();
        let base = max_norm(&e.gradient(&p).unwrap());
        let arr = p.as_array();
        for j in 0..3 {
            for d in [Complex64::new(1e-4, 0.0), Complex64::new(0.0, 1e-4)] {
                let mut q = arr;
                q[j] += d;
                assert!(max_norm(&e.gradient(&ScaledPoint::from_array(q)).unwrap()) > base);
            }
        }
    }

    #[test]
    fn conjugate_parameters() {
        let a = decay_rate(3, 3.0, 0.25, 0.27).unwrap();
        let b = decay_rate(3, 3.0, -0.25, -0.27).unwrap();
        assert!((a.a - b.a).abs() < 1e-9, "{} vs {}", a.a, b.a);
    }
}
