use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyharmonic::analysis::{
    alpha_removability_check, beta_vanishing_check, comparison_property_check, estimate_charges, exp_integrability_check,
    verify_log_example, AsymptoticFit,
};
use polyharmonic::calculus::integrate_values;
use polyharmonic::greens::{exp_integrability_threshold, martinazzi_constant};
use polyharmonic::iteration::{
    alpha_witness, barrier_phi, monotone_solve, supersolution, supersolution_radius, IterationStatus, ProblemSpec,
};
use polyharmonic::nonlinearity::{classify_growth, validate_hypotheses, Nonlinearity, Weight};
use polyharmonic::{navier_solve, ChargeVector, Grading, NavierOptions, NavierSolution, RadialField, RadialGrid};
use serde_json::{json, Value};

use crate::config::{read_columns, AlphaChoice, Command, ExperimentConfig, GridGrading};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const SOLUTION_FILE: &str = "solution.csv";

/// Result of a run whose report was written. `exit_code` is nonzero when the
/// run itself failed in a way the report describes.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
    pub files: Vec<PathBuf>,
}

struct Body {
    exit_code: i32,
    fields: Value,
    csv: Option<Vec<Vec<(&'static str, f64)>>>,
    /// Lines for stderr.
    notes: Vec<String>,
}

impl Body {
    fn ok(fields: Value) -> Self {
        Self { exit_code: 0, fields, csv: None, notes: Vec::new() }
    }
}

/// Executes the configured command and writes its artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let body = match cfg.command {
        Command::Solve => solve(cfg)?,
        Command::Classify => classify(cfg)?,
        Command::Charges => charges(cfg)?,
        Command::VerifyExample => verify_example(cfg)?,
        Command::CheckEstimates => check_estimates(cfg)?,
        Command::PropertySuite => property_suite(cfg)?,
    };
    for line in &body.notes {
        eprintln!("{line}");
    }
    fs::create_dir_all(&cfg.out_dir).map_err(|e| io_error(&cfg.out_dir, e))?;
    let mut files = Vec::new();
    if let (Some(rows), true) = (&body.csv, cfg.write_csv) {
        let path = cfg.out_dir.join(SOLUTION_FILE);
        write_csv(&path, rows)?;
        files.push(path);
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command.name(),
        "config": cfg,
        "exit_code": body.exit_code,
        "result": body.fields,
    });
    let path = cfg.out_dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    files.push(path);
    Ok(Outcome { exit_code: body.exit_code, report, files })
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, rows: &[Vec<(&'static str, f64)>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let err = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| *k)).map_err(err)?;
    }
    for row in rows {
        // Display prints the shortest decimal that parses back to the same f64
        w.write_record(row.iter().map(|(_, v)| v.to_string())).map_err(err)?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn unit_grid(cfg: &ExperimentConfig) -> Result<Arc<RadialGrid>, CliError> {
    Ok(Arc::new(RadialGrid::geometric_with_cutoff(2 * cfg.m, 1.0, cfg.grid.n, cfg.grid.epsilon)?))
}

fn problem_grid(cfg: &ExperimentConfig, radius: f64) -> Result<Arc<RadialGrid>, CliError> {
    let dim = 2 * cfg.m;
    let grid = match cfg.grid.grading {
        GridGrading::Geometric => RadialGrid::geometric_with_cutoff(dim, radius, cfg.grid.n, cfg.grid.epsilon)?,
        GridGrading::Uniform => RadialGrid::build(dim, radius, cfg.grid.n, Grading::Uniform)?,
    };
    Ok(Arc::new(grid))
}

fn f_of(cfg: &ExperimentConfig) -> &Nonlinearity {
    cfg.f.as_ref().expect("validated config carries f")
}

fn weight_of(cfg: &ExperimentConfig) -> &Weight {
    cfg.weight.as_ref().expect("validated config carries a weight")
}

fn fit_json(fit: Result<AsymptoticFit, polyharmonic::Error>) -> Value {
    match fit {
        Ok(fit) => json!({ "alpha": fit.alpha(), "beta": fit.beta(), "fit": fit }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

struct BarrierChoice {
    gamma: f64,
    c: f64,
    alpha: f64,
}

/// Picks `(γ, C_γ)` and the charge. A fractional charge is taken relative to
/// the barrier mass at `γ = 1` unless `barrier.gamma` is set.
fn choose_barrier(cfg: &ExperimentConfig, f: &Nonlinearity, phi: &NavierSolution) -> Result<BarrierChoice, CliError> {
    let witness_c = |gamma: f64| -> Result<f64, CliError> {
        cfg.barrier_c.or_else(|| f.exp_witness(gamma)).ok_or_else(|| {
            CliError::Hypothesis(format!("no constant C with f(t) <= C e^({gamma} t)"))
        })
    };
    match (cfg.alpha, cfg.barrier_gamma) {
        (AlphaChoice::Absolute(alpha), Some(gamma)) => Ok(BarrierChoice { gamma, c: witness_c(gamma)?, alpha }),
        (AlphaChoice::Absolute(alpha), None) => {
            let w = alpha_witness(f, phi, alpha)?;
            Ok(BarrierChoice { gamma: w.gamma, c: cfg.barrier_c.unwrap_or(w.c), alpha })
        }
        (AlphaChoice::Fraction(q), gamma) => {
            let gamma = match gamma {
                Some(g) => g,
                None if f.exp_witness(1.0).is_some() => 1.0,
                None => alpha_witness(f, phi, 0.0)?.gamma,
            };
            let c = witness_c(gamma)?;
            let mass = supersolution(gamma, c, phi)?.origin_mass();
            Ok(BarrierChoice { gamma, c, alpha: q * mass })
        }
    }
}

fn solve(cfg: &ExperimentConfig) -> Result<Body, CliError> {
    let (f, weight) = (f_of(cfg), weight_of(cfg));
    let hypotheses = validate_hypotheses(f, weight, cfg.m);
    if let Some(fail) = hypotheses.first_failure() {
        return Ok(Body {
            exit_code: 3,
            notes: vec![format!("hypothesis {} failed: {}", fail.name, fail.witness)],
            fields: json!({ "hypotheses": hypotheses, "converged": false }),
            csv: None,
        });
    }
    let phi = barrier_phi(weight, cfg.m, unit_grid(cfg)?)?;
    let choice = choose_barrier(cfg, f, &phi)?;
    let barrier = supersolution(choice.gamma, choice.c, &phi)?;
    let (max_radius, _) = supersolution_radius(choice.gamma, choice.c, phi.u())?;
    let radius = match cfg.grid.radius {
        Some(r) if r > max_radius => {
            return Err(CliError::Hypothesis(format!(
                "grid.radius = {r} exceeds the supersolution radius {max_radius}"
            )))
        }
        Some(r) => r,
        None => max_radius,
    };
    let problem = ProblemSpec::new(cfg.m, problem_grid(cfg, radius)?, weight.clone(), f.clone(), choice.alpha)?;
    let rep = monotone_solve(&problem, &barrier, &cfg.iteration)?;

    let u = rep.u();
    let neg = rep.neg_laplacian();
    let nodes = u.grid().nodes();
    let rows: Vec<Vec<(&'static str, f64)>> = (0..nodes.len())
        .map(|i| {
            let r = nodes[i];
            vec![
                ("r", r),
                ("u", u.value(i)),
                ("neg_laplacian_u", neg.value(i)),
                ("barrier_u", barrier.u().eval(r).unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    // fitted on nodal values alone, exactly what a re-ingested dump sees
    let fit = fit_json(estimate_charges(&u.flattened(), cfg.charges_window));
    let exit_code = match rep.status {
        IterationStatus::Converged => 0,
        IterationStatus::MaxIter | IterationStatus::Diverged => 4,
    };
    let mut notes = Vec::new();
    if exit_code != 0 {
        notes.push(format!("iteration stopped with status {:?} after {} steps", rep.status, rep.iterations));
    }
    Ok(Body {
        exit_code,
        fields: json!({
            "hypotheses": hypotheses,
            "converged": rep.converged(),
            "iteration": rep,
            "alpha": choice.alpha,
            "barrier": {
                "gamma": choice.gamma,
                "c": choice.c,
                "origin_mass": barrier.origin_mass(),
                "supersolution_radius": max_radius,
            },
            "grid": { "radius": radius, "nodes": nodes.len(), "inner_cutoff": nodes[0] },
            "charges": fit,
        }),
        csv: Some(rows),
        notes,
    })
}

fn classify(cfg: &ExperimentConfig) -> Result<Body, CliError> {
    let f = f_of(cfg);
    let growth = classify_growth(f, cfg.t_max)?;
    let hypotheses = cfg.weight.as_ref().map(|w| validate_hypotheses(f, w, cfg.m));
    let alpha_verdict = if growth.super_exponential {
        "alpha must be 0: the singularity is removable"
    } else {
        "alpha may be positive"
    };
    let beta_verdict = if growth.superquadratic {
        "beta must be 0"
    } else {
        "beta may be nonzero"
    };
    Ok(Body::ok(json!({
        "class": growth.class(),
        "growth": growth,
        "alpha_verdict": alpha_verdict,
        "beta_verdict": beta_verdict,
        "hypotheses": hypotheses,
    })))
}

fn charges(cfg: &ExperimentConfig) -> Result<Body, CliError> {
    let path = cfg.charges_input.as_ref().expect("validated config carries charges.input");
    let cols = read_columns(path, 2)?;
    let grid = Arc::new(RadialGrid::from_nodes(2 * cfg.m, cols[0].clone())?);
    let u = RadialField::regular(grid, cols[1].clone())?;
    let fit = estimate_charges(&u, cfg.charges_window)?;
    Ok(Body::ok(json!({
        "input": path,
        "alpha": fit.alpha(),
        "beta": fit.beta(),
        "fit": fit,
    })))
}

fn verify_example(cfg: &ExperimentConfig) -> Result<Body, CliError> {
    let (lo, hi) = cfg.example_range;
    let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, hi, cfg.grid.n, lo)?);
    let ex = verify_log_example(cfg.mu, &grid)?;
    Ok(Body::ok(json!({
        "b1": ex.b1,
        "b2": ex.b2,
        "b3": ex.b3,
        "residual": ex.max_rel_residual,
        "example": ex,
    })))
}

fn check_estimates(cfg: &ExperimentConfig) -> Result<Body, CliError> {
    let (f, weight) = (f_of(cfg), weight_of(cfg));
    let grid = unit_grid(cfg)?;
    // unit-mass bump of width rho
    let bump = RadialField::from_fn(grid.clone(), |r| (-(r / cfg.rho).powi(2)).exp())?;
    let mass = integrate_values(&grid, &bump.values())?.value;
    let rhs = bump.scaled(1.0 / mass);
    let h = navier_solve(cfg.m, &rhs, &ChargeVector::zeros(cfg.m), &NavierOptions::default())?.into_u();
    let exp_checks = cfg
        .deltas
        .iter()
        .map(|d| {
            let c = exp_integrability_check(&h, 1.0, d * PI * PI, cfg.m)?;
            Ok(json!({ "delta_over_pi2": d, "check": c }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let alpha = match cfg.alpha {
        AlphaChoice::Absolute(a) => a,
        AlphaChoice::Fraction(q) => q * martinazzi_constant(cfg.m),
    };
    Ok(Body::ok(json!({
        "threshold": exp_integrability_threshold(cfg.m),
        "martinazzi_constant": martinazzi_constant(cfg.m),
        "exp_integrability": exp_checks,
        "beta_check": beta_vanishing_check(f, weight, cfg.beta, &grid)?,
        "alpha_check": alpha_removability_check(f, weight, alpha, &grid)?,
        "alpha": alpha,
        "beta": cfg.beta,
    })))
}

fn property_suite(cfg: &ExperimentConfig) -> Result<Body, CliError> {
    let grid = unit_grid(cfg)?;
    let rep = comparison_property_check(cfg.trials, &grid, cfg.seed)?;
    let notes: Vec<String> = rep
        .failures
        .iter()
        .map(|t| format!("trial {} failed: seed {} level {} node {} value {}", t.trial, t.seed, t.level, t.node, t.value))
        .collect();
    let exit_code = if rep.failures.is_empty() { 0 } else { 5 };
    Ok(Body { exit_code, fields: json!({ "passed": rep.failures.is_empty(), "suite": rep }), csv: None, notes })
}
