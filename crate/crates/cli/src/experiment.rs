use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use riesz_teig::problems::{fdem_problem, truth_profile, FdemConfig, ProblemName};
use riesz_teig::{
    assemble_gram, build_basis, discrepancy_kappa, error_norms, kappa_best, lcurve_corner, lcurve_points,
    noisy_system_data, spectral_factorize, ConditionEstimate, CornerMethod, CutoffPolicy, Error,
    ErrorMetric, GramFactorization, GridEvaluator, IntegrationConfig, Lcurve, ParamSelectionReport, ProblemSpec,
    Reference, RieszBasis, TeigSweep,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, Selector};
use crate::error::{CliError, CliResult};
use crate::output::{csv_table, delta_tag, ensure_dir, slug, write_json, write_text};

/// Wall-clock seconds per pipeline phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimings {
    pub basis: f64,
    pub gram: f64,
    pub factorize: f64,
    pub grid: f64,
    pub solve: f64,
    pub select: f64,
}

fn seconds_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Problem, basis, factorization and evaluation grid for one `(problem, n)`;
/// shared by every noise level and seed.
pub struct Prepared {
    pub problem: ProblemName,
    pub n: usize,
    pub spec: Arc<ProblemSpec>,
    pub basis: RieszBasis,
    pub fac: GramFactorization,
    pub evaluator: GridEvaluator,
    pub truth: Vec<f64>,
    pub timings: PhaseTimings,
}

pub fn build_problem(problem: ProblemName, n: usize, z0: Option<f64>) -> CliResult<ProblemSpec> {
    Ok(match (problem, z0) {
        (ProblemName::Fdem(t), Some(z0)) => fdem_problem(&FdemConfig::new(n).with_depth(z0), truth_profile(t)?)?,
        _ => problem.build(n)?,
    })
}

pub fn prepare(
    problem: ProblemName,
    n: usize,
    z0: Option<f64>,
    grid_points: usize,
    cfg: &IntegrationConfig,
) -> CliResult<Prepared> {
    let spec = Arc::new(build_problem(problem, n, z0)?);
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let basis = build_basis(spec.clone(), cfg)?;
    timings.basis = seconds_since(t);

    let t = Instant::now();
    let gram = assemble_gram(&basis)?;
    timings.gram = seconds_since(t);

    let t = Instant::now();
    let fac = spectral_factorize(gram, CutoffPolicy::default())?;
    timings.factorize = seconds_since(t);
    if fac.cutoff() == 0 {
        return Err(Error::DegenerateProblem("Gram matrix has no positive eigenvalues".into()).into());
    }

    let t = Instant::now();
    let grid = spec.interval().uniform_grid(grid_points);
    let evaluator = GridEvaluator::new(&basis, &grid)?;
    let truth = match spec.truth() {
        Some(truth) => grid.iter().map(|&x| truth.eval(x)).collect(),
        None => return Err(CliError::user(format!("problem {problem} has no reference solution"))),
    };
    timings.grid = seconds_since(t);

    Ok(Prepared {
        problem,
        n,
        spec,
        basis,
        fac,
        evaluator,
        truth,
        timings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRequest {
    pub delta: f64,
    pub seed: u64,
    pub tau: f64,
    pub selector: Selector,
}

/// One reconstructed solution and its errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    /// `full` (κ = N), `best`, `discrepancy` or `lcurve`.
    pub name: String,
    pub kappa: usize,
    pub max_error: f64,
    pub l2_error: f64,
    /// `‖G c − g‖₂` from the eigenvector tail.
    pub residual: f64,
    pub w_norm: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub problem: String,
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub tau: f64,
    pub selector: String,
    pub functionals: usize,
    pub cutoff: usize,
    pub condition: ConditionEstimate,
    pub noise_norm: f64,
    pub grid_points: usize,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub selection: ParamSelectionReport,
    pub solutions: Vec<SolutionSummary>,
    /// Right-hand side of the Gram system the coefficients solve.
    pub rhs: Vec<f64>,
}

impl CellSummary {
    pub fn solution(&self, name: &str) -> Option<&SolutionSummary> {
        self.solutions.iter().find(|s| s.name == name)
    }
}

pub struct CellOutcome {
    pub summary: CellSummary,
    pub grid: Vec<f64>,
    pub truth: Vec<f64>,
    /// Grid values per solution, in the order of `summary.solutions`.
    pub values: Vec<Vec<f64>>,
    pub lcurve: Option<Lcurve>,
    pub timings: PhaseTimings,
}

impl CellOutcome {
    pub fn values_of(&self, name: &str) -> Option<&[f64]> {
        let k = self.summary.solutions.iter().position(|s| s.name == name)?;
        Some(&self.values[k])
    }
}

/// Solves one `(δ, seed)` cell on a prepared problem.
pub fn solve_cell(p: &Prepared, req: &CellRequest, cfg: &IntegrationConfig) -> CliResult<CellOutcome> {
    let mut timings = p.timings;
    let t = Instant::now();
    let (data, noise_norm) = if req.delta > 0.0 {
        let (g, model) = noisy_system_data(&p.spec, req.delta, req.seed, p.problem.noise_target(), cfg)?;
        (g, model.realized_norm)
    } else {
        (p.spec.shifted_exact_data(cfg)?, 0.0)
    };
    let sweep = TeigSweep::new(&p.fac, &data, *p.spec.boundary())?;
    timings.solve = seconds_since(t);

    let t = Instant::now();
    let mut notes = Vec::new();
    let mut report = ParamSelectionReport::new(p.fac.cutoff(), req.tau);
    let mut picks: Vec<(&str, usize)> = vec![("full", p.fac.cutoff())];
    if req.selector.best() {
        let best = kappa_best(
            &sweep,
            Reference::Grid {
                evaluator: &p.evaluator,
                truth: &p.truth,
                interval: p.spec.interval(),
            },
            ErrorMetric::GridL2,
        )?;
        report.record_best(&best);
        picks.push(("best", best.kappa));
    }
    if req.selector.discrepancy() {
        if noise_norm > 0.0 {
            let d = discrepancy_kappa(&sweep, noise_norm, req.tau)?;
            if !d.satisfied {
                notes.push(format!("discrepancy bound not met for any κ ≤ {}; using κ = N", d.kappa));
            }
            picks.push(("discrepancy", d.kappa));
            report.record_discrepancy(d);
        } else {
            notes.push("noise-free data: discrepancy principle not applicable".into());
        }
    }
    let mut lcurve = None;
    if req.selector.lcurve() {
        match lcurve_points(&sweep).and_then(|c| lcurve_corner(&c.points, CornerMethod::Pruning).map(|k| (c, k))) {
            Ok((curve, corner)) => {
                if corner.degenerate {
                    notes.push("L-curve has no convex corner; using its last point".into());
                }
                picks.push(("lcurve", corner.kappa));
                lcurve = Some(curve.clone());
                report.record_lcurve(curve, corner);
            }
            Err(e @ Error::InsufficientCurve { .. }) => notes.push(format!("L-curve skipped: {e}")),
            Err(e) => return Err(e.into()),
        }
    }
    timings.select = seconds_since(t);

    let t = Instant::now();
    let mut solutions = Vec::with_capacity(picks.len());
    let mut values = Vec::with_capacity(picks.len());
    for (name, kappa) in picks {
        let c = sweep.coefficients(kappa)?;
        let v = p.evaluator.eval(&c)?;
        let err = error_norms(&v, &p.truth, p.spec.interval());
        solutions.push(SolutionSummary {
            name: name.to_string(),
            kappa,
            max_error: err.max,
            l2_error: err.l2,
            residual: sweep.residual(kappa)?,
            w_norm: sweep.w_norm(kappa)?,
            coefficients: c.as_slice().to_vec(),
        });
        values.push(v);
    }
    timings.solve += seconds_since(t);

    let summary = CellSummary {
        problem: p.problem.to_string(),
        n: p.n,
        delta: req.delta,
        seed: req.seed,
        tau: req.tau,
        selector: req.selector.to_string(),
        functionals: p.fac.dim(),
        cutoff: p.fac.cutoff(),
        condition: p.fac.condition(),
        noise_norm,
        grid_points: p.evaluator.grid().len(),
        warnings: p.spec.warnings().to_vec(),
        notes,
        selection: report,
        solutions,
        rhs: data.values().to_vec(),
    };
    Ok(CellOutcome {
        summary,
        grid: p.evaluator.grid().to_vec(),
        truth: p.truth.clone(),
        values,
        lcurve,
        timings,
    })
}

/// Residual recomputed as `‖G c − g‖₂` from a summary's own coefficients.
pub fn recomputed_residual(fac: &GramFactorization, summary: &CellSummary, solution: &SolutionSummary) -> f64 {
    let g = fac.gram();
    let c = &solution.coefficients;
    summary
        .rhs
        .iter()
        .enumerate()
        .map(|(i, rhs)| {
            let gc: f64 = c.iter().enumerate().map(|(j, cj)| g[(i, j)] * cj).sum();
            (gc - rhs).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

pub fn cell_stem(summary: &CellSummary) -> String {
    format!(
        "{}_n{}_delta{}_seed{}",
        slug(&summary.problem),
        summary.n,
        delta_tag(summary.delta),
        summary.seed
    )
}

/// Writes a cell's files into `dir`; returns their names.
pub fn write_cell(
    dir: &Path,
    outcome: &CellOutcome,
    cfg: &ExperimentConfig,
) -> CliResult<Vec<String>> {
    let stem = cell_stem(&outcome.summary);
    let mut files = Vec::new();
    if cfg.formats.csv {
        let mut headers = vec!["t", "exact"];
        let mut columns: Vec<&[f64]> = vec![&outcome.grid, &outcome.truth];
        for (s, v) in outcome.summary.solutions.iter().zip(&outcome.values) {
            headers.push(&s.name);
            columns.push(v);
        }
        let name = format!("{stem}_solution.csv");
        write_text(&dir.join(&name), &csv_table(&headers, &columns)?)?;
        files.push(name);
        if let Some(curve) = &outcome.lcurve {
            let kappa: Vec<f64> = curve.points.iter().map(|p| p.kappa as f64).collect();
            let r: Vec<f64> = curve.points.iter().map(|p| p.log_residual).collect();
            let w: Vec<f64> = curve.points.iter().map(|p| p.log_norm).collect();
            let name = format!("{stem}_lcurve.csv");
            write_text(
                &dir.join(&name),
                &csv_table(&["kappa", "log10_residual", "log10_w_norm"], &[&kappa, &r, &w])?,
            )?;
            files.push(name);
        }
    }
    if cfg.formats.json {
        let name = format!("{stem}_summary.json");
        write_json(&dir.join(&name), &outcome.summary)?;
        files.push(name);
    }
    if cfg.timing {
        let name = format!("{stem}_timing.json");
        write_json(&dir.join(&name), &outcome.timings)?;
        files.push(name);
    }
    Ok(files)
}

/// Everything a finished experiment produced.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub cells: Vec<CellSummary>,
    pub files: Vec<String>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    cfg.validate()?;
    let problem = cfg.problem_name()?;
    let tau = cfg.tau()?;
    let dir = cfg.resolved_output_dir();
    ensure_dir(&dir)?;
    let icfg = IntegrationConfig::default();

    let deltas = cfg.delta.to_vec();
    let seeds = cfg.seed.to_vec();
    let cells: Vec<(f64, u64)> = deltas.iter().flat_map(|&d| seeds.iter().map(move |&s| (d, s))).collect();

    let per_n: Vec<CliResult<Vec<(CellSummary, Vec<String>)>>> = cfg
        .n
        .to_vec()
        .into_par_iter()
        .map(|n| {
            let prepared = prepare(problem, n, cfg.problem.z0, cfg.grid_points, &icfg)?;
            cells
                .par_iter()
                .map(|&(delta, seed)| {
                    let req = CellRequest {
                        delta,
                        seed,
                        tau,
                        selector: cfg.selector,
                    };
                    let outcome = solve_cell(&prepared, &req, &icfg)?;
                    let files = write_cell(&dir, &outcome, cfg)?;
                    Ok((outcome.summary, files))
                })
                .collect()
        })
        .collect();

    let mut report = ExperimentReport {
        output_dir: dir.clone(),
        cells: Vec::new(),
        files: Vec::new(),
    };
    for group in per_n {
        for (summary, files) in group? {
            report.cells.push(summary);
            report.files.extend(files);
        }
    }
    // The echo describes the experiment, not where it was written.
    let echo = ExperimentConfig {
        output_dir: None,
        ..cfg.clone()
    };
    write_json(&dir.join("config.json"), &echo)?;
    report.files.push("config.json".into());
    Ok(report)
}
