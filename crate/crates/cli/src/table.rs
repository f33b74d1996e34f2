use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use riesz_teig::problems::{galerkin_baseline, ProblemName};
use riesz_teig::{IntegrationConfig, Interval};
use serde::Serialize;

use crate::config::Selector;
use crate::error::CliResult;
use crate::experiment::{prepare, solve_cell, CellRequest};
use crate::output::{ensure_dir, float, write_text};

/// Problem sizes of the comparison table.
pub const TABLE1_SIZES: [usize; 3] = [6, 10, 20];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub galerkin_error: f64,
    pub riesz_error: f64,
    pub galerkin_rank_deficient: bool,
}

/// Max-norm errors on `[0, π]` of the box-function Galerkin solution of the
/// second artificial equation and of the unregularized (`κ = N`) Riesz
/// solution of the full second test problem, both from noise-free data.
pub fn table1_rows(sizes: &[usize], grid_points: usize) -> CliResult<Vec<Table1Row>> {
    let icfg = IntegrationConfig::default();
    let grid = Interval::new(0.0, PI)?.uniform_grid(grid_points);
    sizes
        .iter()
        .map(|&n| {
            let galerkin = galerkin_baseline(n)?.solve()?;
            let prepared = prepare(ProblemName::Tp2, n, None, grid_points, &icfg)?;
            let req = CellRequest {
                delta: 0.0,
                seed: 0,
                tau: ProblemName::Tp2.default_tau(),
                selector: Selector::Best,
            };
            let cell = solve_cell(&prepared, &req, &icfg)?;
            let full = cell.summary.solution("full").expect("full solution is always reported");
            Ok(Table1Row {
                n,
                galerkin_error: galerkin.max_error(f64::sin, &grid),
                riesz_error: full.max_error,
                galerkin_rank_deficient: galerkin.rank_deficient,
            })
        })
        .collect()
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("n,galerkin_error,riesz_error\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.n, float(r.galerkin_error), float(r.riesz_error));
    }
    out
}

/// Writes `table1.csv` into `dir`.
pub fn table1(dir: &Path, grid_points: usize) -> CliResult<Vec<Table1Row>> {
    ensure_dir(dir)?;
    let rows = table1_rows(&TABLE1_SIZES, grid_points)?;
    write_text(&dir.join("table1.csv"), &table1_csv(&rows))?;
    Ok(rows)
}
