use std::path::Path;
use std::sync::Arc;

use riesz_teig::problems::ProblemName;
use riesz_teig::{assemble_gram, build_basis, spectral_factorize, ConditionEstimate, CutoffPolicy, IntegrationConfig};
use serde::Serialize;

use crate::error::CliResult;
use crate::experiment::build_problem;
use crate::output::{ensure_dir, float, slug, write_json, write_text};

/// Spectrum written next to the Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramDump {
    pub problem: String,
    pub n: usize,
    pub functionals: usize,
    pub nodes: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub cutoff: usize,
    pub condition: ConditionEstimate,
    pub reconstruction_error: f64,
}

/// Writes `{problem}_n{n}_gram.csv` (one matrix row per line) and
/// `{problem}_n{n}_spectrum.json`.
pub fn dump_gram(problem: ProblemName, n: usize, z0: Option<f64>, dir: &Path) -> CliResult<GramDump> {
    ensure_dir(dir)?;
    let spec = Arc::new(build_problem(problem, n, z0)?);
    let basis = build_basis(spec.clone(), &IntegrationConfig::default())?;
    let fac = spectral_factorize(assemble_gram(&basis)?, CutoffPolicy::default())?;
    let g = fac.gram();
    let m = g.nrows();

    let mut csv = (0..m).map(|j| format!("c{j}")).collect::<Vec<_>>().join(",");
    csv.push('\n');
    for i in 0..m {
        let row: Vec<String> = (0..m).map(|j| float(g[(i, j)])).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let stem = format!("{}_n{n}", slug(&problem.to_string()));
    write_text(&dir.join(format!("{stem}_gram.csv")), &csv)?;

    let dump = GramDump {
        problem: problem.to_string(),
        n,
        functionals: m,
        nodes: spec.equations().iter().map(|e| e.nodes().to_vec()).collect(),
        eigenvalues: fac.eigenvalues().as_slice().to_vec(),
        cutoff: fac.cutoff(),
        condition: fac.condition(),
        reconstruction_error: fac.reconstruction_error(),
    };
    write_json(&dir.join(format!("{stem}_spectrum.json")), &dump)?;
    Ok(dump)
}
