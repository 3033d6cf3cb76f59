use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use qsk_core::asymptotics::{
    decay_rate_with, optimize_parameters_with, reference_rates, strong_limit, sweep_mu, weak_limit,
    Exponent, ExponentKind, OptimizeOptions, Optimum, ScaledPoint, Seed,
};
use qsk_core::baselines::{soluble_cost_records, summarize_psoln};
use qsk_core::exact::{exact_mean_psoln, exact_mean_terms, exact_prespecified_bound};
use qsk_core::rng;
use qsk_core::sat::{
    from_dimacs, sample_problem, solution_fraction, to_dimacs, Assignment, EnsembleKind,
    EnsembleSpec, ProblemFile, SatProblem,
};
use qsk_core::sim::{run_partial, LinearRule, PhaseSchedule, Simulator};
use qsk_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::*;
use crate::with_path;

type Summary = Option<Value>;

pub fn execute(config: &Command, out: &mut dyn Write) -> Result<Summary> {
    match config {
        Command::Gen(a) => gen(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Exact(a) => exact(a, out),
        Command::Decay(a) => decay(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Limits(a) => limits(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Replay(_) => Err(Error::usage("replay is handled by the driver")),
    }
}

fn spec_of(
    n: u32,
    k: u32,
    m: usize,
    seed: u64,
    kind: EnsembleArg,
    solution: u64,
) -> Result<EnsembleSpec> {
    let spec = match kind {
        EnsembleArg::Random => EnsembleSpec::random(n, k, m, seed),
        EnsembleArg::Prespecified => {
            EnsembleSpec::prespecified(Assignment::new(solution, n)?, k, m, seed)
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn ensemble_spec(e: &EnsembleArgs) -> Result<EnsembleSpec> {
    spec_of(e.n, e.k, e.m, e.seed, e.ensemble, e.solution)
}

fn schedule_of(s: &ScheduleArgs) -> Result<PhaseSchedule> {
    let schedule = match s.steps {
        Some(steps) => {
            let (Some(rho_a), Some(tau_a)) = (s.rho_a, s.tau_a) else {
                return Err(Error::usage("--steps needs --rho-a and --tau-a"));
            };
            PhaseSchedule::linear(LinearRule {
                rho_a,
                rho_b: s.rho_b,
                tau_a,
                tau_b: s.tau_b,
                steps,
            })?
        }
        None => {
            let (Some(rho), Some(tau)) = (s.rho, s.tau) else {
                return Err(Error::usage(
                    "give --rho and --tau (or --steps with the linear rule)",
                ));
            };
            PhaseSchedule::single(rho, tau)
        }
    };
    schedule.validate()?;
    Ok(schedule)
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().has_headers(true).from_writer(out)
}

fn write_rows<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<()> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(v: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn gen(a: &GenArgs, out: &mut dyn Write) -> Result<Summary> {
    let spec = ensemble_spec(&a.ensemble)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| with_path(e, &a.out_dir))?;
    let mut written = Vec::new();
    for i in 0..a.count {
        let problem = sample_problem(&spec, &mut rng::stream(spec.seed, i as u64))?;
        if let EnsembleKind::Prespecified { solution } = spec.kind {
            if !problem.is_solution(Assignment::new(solution, spec.n)?)? {
                return Err(Error::NumericalIntegrity(format!(
                    "instance {i} does not admit the stored solution"
                )));
            }
        }
        let stem = format!(
            "ksat-n{}-k{}-m{}-s{}-{:04}",
            spec.n, spec.k, spec.m, spec.seed, i
        );
        let (path, text) = match a.format {
            ProblemFormat::Dimacs => {
                let comment = format!(
                    "seed {} instance {i} ensemble {}",
                    spec.seed,
                    kind_name(spec.kind)
                );
                (
                    a.out_dir.join(stem + ".cnf"),
                    to_dimacs(&problem, Some(&comment)),
                )
            }
            ProblemFormat::Json => {
                let file = ProblemFile::new(&problem, spec.kind, spec.seed);
                (
                    a.out_dir.join(stem + ".json"),
                    serde_json::to_string_pretty(&file)? + "\n",
                )
            }
        };
        fs::write(&path, text).map_err(|e| with_path(e, &path))?;
        writeln!(out, "{}", path.display())?;
        written.push(path);
    }
    Ok(Some(json!({ "files": written })))
}

fn kind_name(kind: EnsembleKind) -> String {
    match kind {
        EnsembleKind::Random => "random".into(),
        EnsembleKind::Prespecified { solution } => format!("prespecified solution {solution}"),
    }
}

fn read_problem(path: &Path) -> Result<SatProblem> {
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    if path.extension().is_some_and(|e| e == "json") {
        let file: ProblemFile = serde_json::from_str(&text)?;
        file.to_problem()
    } else {
        from_dimacs(&text)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SimRow {
    instance: usize,
    n: u32,
    m: usize,
    solutions: u64,
    draws: u64,
    p_solution: f64,
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<Summary> {
    let schedule = schedule_of(&a.schedule)?;
    // (instance, problem, draws)
    let problems: Vec<(usize, SatProblem, u64)> = if !a.inputs.is_empty() {
        a.inputs
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((i, read_problem(p)?, 1)))
            .collect::<Result<_>>()?
    } else {
        let (Some(n), Some(m)) = (a.n, a.m) else {
            return Err(Error::usage("give --input files or --n and --m"));
        };
        let spec = spec_of(n, a.k, m, a.seed, a.ensemble, a.solution)?;
        // same stream layout as the Monte-Carlo estimator
        const BLOCK: u64 = 1 << 20;
        (0..a.samples)
            .into_par_iter()
            .map(|i| {
                for attempt in 0..BLOCK {
                    let stream = if a.soluble_only {
                        i as u64 * BLOCK + attempt
                    } else {
                        i as u64
                    };
                    let p = sample_problem(&spec, &mut rng::stream(spec.seed, stream))?;
                    if a.soluble_only && p.count_solutions()? == 0 {
                        continue;
                    }
                    return Ok((i, p, attempt + 1));
                }
                Err(Error::capacity("no soluble instance found"))
            })
            .collect::<Result<_>>()?
    };
    if problems.is_empty() {
        return Err(Error::usage("no instances to simulate"));
    }
    let rows: Vec<(SimRow, Option<Vec<u8>>)> = problems
        .par_iter()
        .map(|(i, p, draws)| {
            let dump = a.dump_state.is_some() && *i == 0;
            let mut bytes = Vec::new();
            let (p_solution, solutions) = if let Some(sigma) = a.sigma {
                if schedule.len() != 1 {
                    return Err(Error::usage(
                        "partial-assignment search takes a single (rho, tau) step",
                    ));
                }
                let s = schedule.steps[0];
                let o = run_partial(p, s.rho, s.tau, sigma)?;
                if dump {
                    o.state.write_le(&mut bytes)?;
                }
                (o.p_solution, p.count_solutions()?)
            } else {
                let sim = Simulator::new(p)?;
                let state = sim.run(&schedule)?;
                if dump {
                    state.write_le(&mut bytes)?;
                }
                (sim.p_solution(&state)?, sim.solution_count())
            };
            let row = SimRow {
                instance: *i,
                n: p.n(),
                m: p.m(),
                solutions,
                draws: *draws,
                p_solution,
            };
            Ok((row, dump.then_some(bytes)))
        })
        .collect::<Result<_>>()?;
    if let Some(path) = &a.dump_state {
        if let Some(bytes) = rows.iter().find_map(|r| r.1.as_ref()) {
            fs::write(path, bytes).map_err(|e| with_path(e, path))?;
        }
    }
    let rows: Vec<SimRow> = rows.into_iter().map(|r| r.0).collect();
    let p: Vec<f64> = rows.iter().map(|r| r.p_solution).collect();
    let count = p.len() as f64;
    let mean = p.iter().sum::<f64>() / count;
    let var = if p.len() > 1 {
        p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let mut summary =
        json!({ "instances": p.len(), "mean_p_solution": mean, "std_error": (var / count).sqrt() });
    if p.iter().all(|&v| v > 0.0) {
        summary["aggregates"] = serde_json::to_value(summarize_psoln(&p)?)?;
    }
    match a.format {
        TableFormat::Csv => write_rows(&rows, out)?,
        TableFormat::Json => write_json(&json!({ "rows": rows, "summary": summary }), out)?,
    }
    Ok(Some(summary))
}

fn exact(a: &ExactArgs, out: &mut dyn Write) -> Result<Summary> {
    let value = if a.prespecified_bound {
        exact_prespecified_bound(a.n, a.k, a.m, a.rho, a.tau)?
    } else {
        exact_mean_psoln(a.n, a.k, a.m, a.rho, a.tau)?
    };
    let fraction = solution_fraction(a.n, a.k, a.m, EnsembleKind::Random)?;
    let report = json!({
        "n": a.n, "k": a.k, "m": a.m, "rho": a.rho, "tau": a.tau,
        "quantity": if a.prespecified_bound { "prespecified_solution_probability" } else { "mean_p_solution" },
        "value": value,
        "solution_fraction": fraction,
    });
    if let Some(path) = &a.dump_terms {
        let terms = exact_mean_terms(a.n, a.k, a.m, a.rho, a.tau)?;
        let file = File::create(path).map_err(|e| with_path(e, path))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record([
            "x",
            "y",
            "z",
            "ln_outer",
            "inner_re",
            "inner_im",
            "contribution_re",
            "contribution_im",
        ])
        .map_err(std::io::Error::from)?;
        for t in terms {
            w.write_record([
                t.x.to_string(),
                t.y.to_string(),
                t.z.to_string(),
                t.ln_outer.to_string(),
                t.inner.re.to_string(),
                t.inner.im.to_string(),
                t.contribution.re.to_string(),
                t.contribution.im.to_string(),
            ])
            .map_err(std::io::Error::from)?;
        }
        w.flush()?;
    }
    write_json(&report, out)?;
    Ok(Some(report))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DecayRow {
    k: u32,
    mu: f64,
    rho: f64,
    tau: f64,
    a: f64,
    prefactor: f64,
    det_re: f64,
    det_im: f64,
    x_re: f64,
    x_im: f64,
    y: f64,
    w: f64,
    residual: f64,
    converged: bool,
}

fn decay(a: &DecayArgs, out: &mut dyn Write) -> Result<Summary> {
    let mut rows = Vec::new();
    let mut guess: Option<ScaledPoint> = None;
    for mu in a.mu.values()? {
        let e = Exponent::new(a.k, mu, a.rho, a.tau, a.exponent.into())?;
        let r = decay_rate_with(&e, guess)?;
        guess = Some(r.point);
        rows.push(DecayRow {
            k: a.k,
            mu,
            rho: a.rho,
            tau: a.tau,
            a: r.a,
            prefactor: r.prefactor,
            det_re: r.det_hessian.re,
            det_im: r.det_hessian.im,
            x_re: r.point.x.re,
            x_im: r.point.x.im,
            y: r.point.y.re,
            w: r.point.w().re,
            residual: r.residual,
            converged: r.converged,
        });
    }
    write_rows(&rows, out)?;
    Ok(None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OptimumRow {
    k: u32,
    mu: f64,
    tau: f64,
    rho: f64,
    a: f64,
    prefactor: f64,
    random_selection: f64,
    unstructured: f64,
    markov_bound: f64,
    evaluations: usize,
    exponent: ExponentKind,
}

fn optimum_row(o: &Optimum, exponent: ExponentKind) -> Result<OptimumRow> {
    let r = reference_rates(o.k, o.mu)?;
    Ok(OptimumRow {
        exponent,
        k: o.k,
        mu: o.mu,
        tau: o.tau,
        rho: o.rho,
        a: o.result.a,
        prefactor: o.result.prefactor,
        random_selection: r.random_selection,
        unstructured: r.unstructured,
        markov_bound: r.markov_bound,
        evaluations: o.evaluations,
    })
}

fn optimize(a: &OptimizeArgs, out: &mut dyn Write) -> Result<Summary> {
    let opts = OptimizeOptions {
        kind: a.exponent.into(),
        grid: a.grid,
        ..Default::default()
    };
    let optima = sweep_mu(a.k, &a.mu.values()?, &opts)?;
    let rows = optima
        .iter()
        .map(|o| optimum_row(o, opts.kind))
        .collect::<Result<Vec<_>>>()?;
    write_rows(&rows, out)?;
    Ok(None)
}

fn limits(a: &LimitsArgs, out: &mut dyn Write) -> Result<Summary> {
    let weak = weak_limit(a.k)?;
    let mut strong = Vec::new();
    for &mu in &a.strong_mu {
        let s = strong_limit(a.k, mu)?;
        let e = Exponent::new(a.k, mu, s.rho, s.tau, ExponentKind::PrespecifiedBound)?;
        let r = decay_rate_with(&e, None)?;
        strong.push(json!({
            "mu": mu,
            "closed_form": s,
            "bound_rate": r.a,
            "bound_prefactor": r.prefactor,
            "rate_ratio": r.a / s.a,
            "prefactor_ratio": r.prefactor / s.prefactor,
        }));
    }
    let report = json!({ "k": a.k, "weak": weak, "strong": strong });
    write_json(&report, out)?;
    Ok(Some(report))
}

fn compare(a: &CompareArgs, out: &mut dyn Write) -> Result<Summary> {
    let spec = ensemble_spec(&a.ensemble)?;
    let schedule = schedule_of(&a.schedule)?;
    let records = soluble_cost_records(&spec, &schedule, a.count, a.gsat_trials)?;
    write_rows(&records, out)?;
    let p: Vec<f64> = records.iter().map(|r| r.p_quantum).collect();
    let mean = |f: fn(&qsk_core::baselines::CostRecord) -> f64| {
        records.iter().map(f).sum::<f64>() / records.len() as f64
    };
    Ok(Some(json!({
        "p_quantum": summarize_psoln(&p)?,
        "mean_cost_quantum_aa": mean(|r| r.cost_quantum_aa),
        "mean_cost_gsat_aa": mean(|r| r.cost_gsat_aa),
        "mean_cost_gsat_classical": mean(|r| r.cost_gsat_classical),
        "mean_cost_unstructured": mean(|r| r.cost_unstructured),
    })))
}

/// Log-log slope between `rows[i]` and the row nearest a decade away.
fn decade_slope(rows: &[OptimumRow], from_start: bool) -> Option<f64> {
    let (anchor, target) = if from_start {
        let a = rows.first()?;
        (a, a.mu * 10.0)
    } else {
        let a = rows.last()?;
        (a, a.mu / 10.0)
    };
    let other = rows.iter().filter(|r| r.mu != anchor.mu).min_by(|x, y| {
        (x.mu.ln() - target.ln())
            .abs()
            .total_cmp(&(y.mu.ln() - target.ln()).abs())
    })?;
    (anchor.a > 0.0 && other.a > 0.0)
        .then(|| (other.a.ln() - anchor.a.ln()) / (other.mu.ln() - anchor.mu.ln()))
}

/// One checkpointed sweep point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct SweepPoint {
    exponent: ExponentKind,
    optimum: Optimum,
}

fn sweep_point(
    k: u32,
    mu: f64,
    which: SweepExponent,
    seeds: &mut [Option<Seed>; 2],
) -> Result<SweepPoint> {
    let kinds: &[(usize, ExponentKind)] = match which {
        SweepExponent::Random => &[(0, ExponentKind::Random)],
        SweepExponent::PrespecifiedBound => &[(1, ExponentKind::PrespecifiedBound)],
        SweepExponent::Envelope => &[
            (0, ExponentKind::Random),
            (1, ExponentKind::PrespecifiedBound),
        ],
    };
    let mut best: Option<SweepPoint> = None;
    let mut last_err = None;
    for &(slot, kind) in kinds {
        let opts = OptimizeOptions {
            kind,
            ..Default::default()
        };
        match optimize_parameters_with(k, mu, seeds[slot], &opts) {
            Ok(o) => {
                seeds[slot] = Some(Seed::from(&o));
                if best.is_none_or(|b| o.result.a < b.optimum.result.a) {
                    best = Some(SweepPoint {
                        exponent: kind,
                        optimum: o,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one exponent tried"))
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<Summary> {
    let mus = a.mu.values()?;
    let mut done: Vec<SweepPoint> = Vec::new();
    if let (true, Some(path)) = (a.resume, &a.checkpoint) {
        if path.exists() {
            let f = File::open(path).map_err(|e| with_path(e, path))?;
            for line in BufReader::new(f).lines() {
                let line = line?;
                if !line.trim().is_empty() {
                    done.push(serde_json::from_str(&line)?);
                }
            }
        }
    } else if let Some(path) = &a.checkpoint {
        File::create(path).map_err(|e| with_path(e, path))?;
    }
    let mut ckpt = match &a.checkpoint {
        Some(p) => Some(
            OpenOptions::new()
                .append(true)
                .create(true)
                .open(p)
                .map_err(|e| with_path(e, p))?,
        ),
        None => None,
    };
    let mut points = Vec::with_capacity(mus.len());
    let mut seeds: [Option<Seed>; 2] = [None, None];
    for &mu in &mus {
        let found = done
            .iter()
            .find(|p| p.optimum.mu.to_bits() == mu.to_bits() && p.optimum.k == a.k);
        let p = match found {
            Some(p) => *p,
            None => {
                let p = sweep_point(a.k, mu, a.exponent, &mut seeds)?;
                if let Some(f) = ckpt.as_mut() {
                    writeln!(f, "{}", serde_json::to_string(&p)?)?;
                    f.flush()?;
                }
                p
            }
        };
        let slot = if p.exponent == ExponentKind::Random {
            0
        } else {
            1
        };
        seeds[slot] = Some(Seed::from(&p.optimum));
        points.push(p);
    }
    let rows = points
        .iter()
        .map(|p| optimum_row(&p.optimum, p.exponent))
        .collect::<Result<Vec<_>>>()?;
    write_rows(&rows, out)?;
    Ok(Some(json!({
        "points": rows.len(),
        "slope_low": decade_slope(&rows, true),
        "slope_high": decade_slope(&rows, false),
    })))
}
