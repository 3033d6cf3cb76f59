use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponent::{Exponent, ExponentKind, ScaledPoint};
use super::saddle::{decay_rate_with, DecayResult};
use crate::error::{Error, Result};

/// Best `(rho, tau)` found for one `mu`. Like any local search over a
/// nonconvex surface the result may be a local minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub k: u32,
    pub mu: f64,
    pub rho: f64,
    pub tau: f64,
    pub result: DecayResult,
    pub evaluations: usize,
}

/// Starting point carried between neighboring `mu` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub rho: f64,
    pub tau: f64,
    pub point: Option<ScaledPoint>,
}

impl From<&Optimum> for Seed {
    fn from(o: &Optimum) -> Self {
        Seed {
            rho: o.rho,
            tau: o.tau,
            point: Some(o.result.point),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub kind: ExponentKind,
    /// Grid points per axis for the coarse scan.
    pub grid: usize,
    /// Nelder-Mead runs started from the best grid points.
    pub restarts: usize,
    pub max_evaluations: usize,
    pub tolerance: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            kind: ExponentKind::Random,
            grid: 21,
            restarts: 3,
            max_evaluations: 2000,
            tolerance: 1e-10,
        }
    }
}

const TAU_MIN: f64 = 1e-4;
const TAU_MAX: f64 = 1.0 - 1e-4;

fn in_box(rho: f64, tau: f64) -> bool {
    (-1.0..=1.0).contains(&rho) && (TAU_MIN..=TAU_MAX).contains(&tau)
}

fn evaluate(
    k: u32,
    mu: f64,
    kind: ExponentKind,
    rho: f64,
    tau: f64,
    guess: Option<ScaledPoint>,
) -> Option<DecayResult> {
    if !in_box(rho, tau) {
        return None;
    }
    let e = Exponent::new(k, mu, rho, tau, kind).ok()?;
    let r = decay_rate_with(&e, guess).ok()?;
    (r.converged && r.a.is_finite() && r.a >= -1e-12).then_some(r)
}

struct Simplex {
    verts: Vec<([f64; 2], f64, Option<DecayResult>)>,
}

/// Nelder-Mead over `(rho, tau)`; infeasible points score `+inf`.
fn nelder_mead(
    k: u32,
    mu: f64,
    opts: &OptimizeOptions,
    start: [f64; 2],
    guess: Option<ScaledPoint>,
    evals: &mut usize,
) -> Option<([f64; 2], DecayResult)> {
    let mut best_point = guess;
    let count = std::cell::Cell::new(0usize);
    let f = |v: [f64; 2], best: &mut Option<ScaledPoint>| -> (f64, Option<DecayResult>) {
        count.set(count.get() + 1);
        match evaluate(k, mu, opts.kind, v[0], v[1], *best) {
            Some(r) => (r.a, Some(r)),
            None => (f64::INFINITY, None),
        }
    };
    let steps = [0.05, 0.03];
    let mut s = Simplex { verts: Vec::new() };
    for i in 0..3 {
        let mut v = start;
        if i > 0 {
            let d = steps[i - 1];
            v[i - 1] += if in_box(v[0] + d, v[1] + d) { d } else { -d };
        }
        let (fv, r) = f(v, &mut best_point);
        s.verts.push((v, fv, r));
    }
    while count.get() < opts.max_evaluations {
        s.verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(r) = s.verts[0].2 {
            best_point = Some(r.point);
        }
        let (b, w) = (s.verts[0].1, s.verts[2].1);
        let size = (1..3)
            .map(|i| {
                (s.verts[i].0[0] - s.verts[0].0[0])
                    .abs()
                    .max((s.verts[i].0[1] - s.verts[0].0[1]).abs())
            })
            .fold(0.0, f64::max);
        if b.is_finite()
            && w.is_finite()
            && (w - b).abs() <= opts.tolerance * b.abs().max(1e-12)
            && size < 1e-9
        {
            break;
        }
        if size < 1e-13 {
            break;
        }
        let c = [
            (s.verts[0].0[0] + s.verts[1].0[0]) / 2.0,
            (s.verts[0].0[1] + s.verts[1].0[1]) / 2.0,
        ];
        let along = |t: f64| {
            [
                c[0] + t * (s.verts[2].0[0] - c[0]),
                c[1] + t * (s.verts[2].0[1] - c[1]),
            ]
        };
        let xr = along(-1.0);
        let (fr, rr) = f(xr, &mut best_point);
        if fr < s.verts[0].1 {
            let xe = along(-2.0);
            let (fe, re) = f(xe, &mut best_point);
            s.verts[2] = if fe < fr { (xe, fe, re) } else { (xr, fr, rr) };
        } else if fr < s.verts[1].1 {
            s.verts[2] = (xr, fr, rr);
        } else {
            let xc = if fr < s.verts[2].1 {
                along(-0.5)
            } else {
                along(0.5)
            };
            let (fc, rc) = f(xc, &mut best_point);
            if fc < fr.min(s.verts[2].1) {
                s.verts[2] = (xc, fc, rc);
            } else {
                let x0 = s.verts[0].0;
                for i in 1..3 {
                    let v = [
                        (x0[0] + s.verts[i].0[0]) / 2.0,
                        (x0[1] + s.verts[i].0[1]) / 2.0,
                    ];
                    let (fv, r) = f(v, &mut best_point);
                    s.verts[i] = (v, fv, r);
                }
            }
        }
    }
    *evals += count.get();
    s.verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (v, _, r) = s.verts[0];
    r.map(|r| (v, r))
}

/// Grid of decay rates over the admissible box, row-major in `rho`.
pub fn rate_grid(
    k: u32,
    mu: f64,
    kind: ExponentKind,
    points: usize,
) -> Vec<(f64, f64, Option<f64>)> {
    let points = points.max(2);
    let cells: Vec<(f64, f64)> = (0..points)
        .flat_map(|i| {
            (0..points).map(move |j| {
                let rho = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
                let tau = TAU_MIN + (TAU_MAX - TAU_MIN) * j as f64 / (points - 1) as f64;
                (rho, tau)
            })
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(rho, tau)| (rho, tau, evaluate(k, mu, kind, rho, tau, None).map(|r| r.a)))
        .collect()
}

/// Minimizes the decay rate over `rho in [-1, 1]`, `tau in (0, 1)`.
pub fn optimize_parameters(k: u32, mu: f64, seed: Option<Seed>) -> Result<Optimum> {
    optimize_parameters_with(k, mu, seed, &OptimizeOptions::default())
}

pub fn optimize_parameters_with(
    k: u32,
    mu: f64,
    seed: Option<Seed>,
    opts: &OptimizeOptions,
) -> Result<Optimum> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("mu must be positive, got {mu}")));
    }
    let grid = rate_grid(k, mu, opts.kind, opts.grid);
    let mut evaluations = grid.len();
    let mut ranked: Vec<(f64, f64, f64)> = grid
        .iter()
        .filter_map(|&(r, t, a)| a.map(|a| (r, t, a)))
        .collect();
    ranked.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut starts: Vec<([f64; 2], Option<ScaledPoint>)> = Vec::new();
    if let Some(s) = seed {
        starts.push(([s.rho, s.tau], s.point));
    }
    starts.extend(
        ranked
            .iter()
            .take(opts.restarts)
            .map(|&(r, t, _)| ([r, t], None)),
    );
    if starts.is_empty() {
        let failed = grid.iter().filter(|g| g.2.is_none()).count();
        return Err(Error::Convergence {
            iterations: evaluations,
            residual: f64::INFINITY,
            context: format!(
                "no admissible start for k = {k}, mu = {mu}: {failed} of {} grid points failed",
                grid.len()
            ),
            trajectory: Vec::new(),
        });
    }
    let runs: Vec<(Option<([f64; 2], DecayResult)>, usize)> = starts
        .into_par_iter()
        .map(|(v, guess)| {
            let mut n = 0;
            let r = nelder_mead(k, mu, opts, v, guess, &mut n);
            (r, n)
        })
        .collect();
    evaluations += runs.iter().map(|r| r.1).sum::<usize>();
    let best = runs
        .into_iter()
        .filter_map(|r| r.0)
        .min_by(|a, b| a.1.a.total_cmp(&b.1.a))
        .ok_or_else(|| Error::Convergence {
            iterations: evaluations,
            residual: f64::INFINITY,
            context: format!("all Nelder-Mead runs failed for k = {k}, mu = {mu}"),
            trajectory: Vec::new(),
        })?;
    Ok(Optimum {
        k,
        mu,
        rho: best.0[0],
        tau: best.0[1],
        result: best.1,
        evaluations,
    })
}

/// Optimizes each `mu` in order, seeding each from the previous optimum.
pub fn sweep_mu(k: u32, mus: &[f64], opts: &OptimizeOptions) -> Result<Vec<Optimum>> {
    let mut out: Vec<Optimum> = Vec::with_capacity(mus.len());
    for &mu in mus {
        let seed = out.last().map(Seed::from);
        out.push(optimize_parameters_with(k, mu, seed, opts)?);
    }
    Ok(out)
}

/// Clause ratio in `[lo, hi]` where the optimized rate meets the unstructured
/// search rate, found by bisection to `tol`.
pub fn unstructured_crossing(k: u32, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let opts = OptimizeOptions::default();
    let gap = |mu: f64, seed: Option<Seed>| -> Result<(f64, Seed)> {
        let o = optimize_parameters_with(k, mu, seed, &opts)?;
        Ok((
            o.result.a - super::limits::reference_rates(k, mu)?.unstructured,
            Seed::from(&o),
        ))
    };
    let (g_lo, seed) = gap(lo, None)?;
    let (g_hi, _) = gap(hi, Some(seed))?;
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::domain(format!(
            "no crossing bracketed in [{lo}, {hi}] (gaps {g_lo:.3e}, {g_hi:.3e})"
        )));
    }
    let (mut lo, mut hi, mut seed) = (lo, hi, Some(seed));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (g, s) = gap(mid, seed)?;
        seed = Some(s);
        if g.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_row_mu4() {
        let o = optimize_parameters(3, 4.0, None).unwrap();
        assert!(
            (o.tau - 0.286).abs() < 5e-3 && (o.rho - 0.218).abs() < 5e-3,
            "{o:?}"
        );
        assert!((o.result.a - 0.280).abs() < 3e-3);
    }

    #[test]
    fn crossing_is_bracketed() {
        let mu = unstructured_crossing(3, 3.0, 4.5, 1e-3).unwrap();
        assert!(mu > 3.0 && mu < 4.5);
        assert!(unstructured_crossing(3, 1.0, 2.0, 1e-2).is_err());
    }

    #[test]
    fn first_order_conditions() {
        let o = optimize_parameters(3, 2.0, None).unwrap();
        let h = 1e-5;
        let a = |r: f64, t: f64| {
            evaluate(3, 2.0, ExponentKind::Random, r, t, Some(o.result.point))
                .unwrap()
                .a
        };
        let dr = (a(o.rho + h, o.tau) - a(o.rho - h, o.tau)) / (2.0 * h);
        let dt = (a(o.rho, o.tau + h) - a(o.rho, o.tau - h)) / (2.0 * h);
        assert!(dr.abs() < 1e-6 && dt.abs() < 1e-6, "{dr} {dt}");
    }
}
