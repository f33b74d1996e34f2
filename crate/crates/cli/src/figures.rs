//! Data behind each figure: solution and error grids plus the chosen
//! truncation indices, one CSV/JSON pair per panel. No rendering.

use std::collections::HashMap;
use std::path::Path;

use riesz_teig::problems::ProblemName;
use riesz_teig::{IntegrationConfig, TruthName};
use serde::Serialize;

use crate::config::Selector;
use crate::error::{CliError, CliResult};
use crate::experiment::{prepare, solve_cell, CellRequest, Prepared};
use crate::output::{csv_table, delta_tag, ensure_dir, write_json, write_text};

pub const FIGURE_NAMES: [&str; 15] = [
    "fig2", "fig3", "fig3-left", "fig3-right", "fig4", "fig4-left", "fig4-right", "fig7", "fig7-left",
    "fig7-right", "fig8", "fig8-left", "fig8-right", "fig9", "fig12",
];

const NOISE_LEVELS: [f64; 3] = [1e-8, 1e-4, 1e-2];
const SIZES: [usize; 3] = [5, 10, 20];

/// One curve of a panel: a solution of `problem` at size `n`, noise `delta`,
/// truncated by `series` (`full`, `best`, `discrepancy`, `lcurve`).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub n: usize,
    pub delta: f64,
    pub series: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    pub id: String,
    pub problem: ProblemName,
    pub curves: Vec<CurveSpec>,
    pub note: Option<&'static str>,
}

fn sweep_n(id: &str, problem: ProblemName, delta: f64, series: &'static str) -> PanelSpec {
    PanelSpec {
        id: id.into(),
        problem,
        curves: SIZES.iter().map(|&n| CurveSpec { n, delta, series }).collect(),
        note: None,
    }
}

fn sweep_delta(id: &str, problem: ProblemName, n: usize) -> PanelSpec {
    PanelSpec {
        id: id.into(),
        problem,
        curves: NOISE_LEVELS
            .iter()
            .map(|&delta| CurveSpec { n, delta, series: "best" })
            .collect(),
        note: None,
    }
}

fn compare_selectors(id: &str, problem: ProblemName, n: usize, delta: f64) -> PanelSpec {
    PanelSpec {
        id: id.into(),
        problem,
        curves: ["best", "discrepancy", "lcurve"]
            .into_iter()
            .map(|series| CurveSpec { n, delta, series })
            .collect(),
        note: None,
    }
}

/// Panels making up figure `name`.
pub fn figure_panels(name: &str) -> CliResult<Vec<PanelSpec>> {
    let sigma1 = ProblemName::Fdem(TruthName::Sigma1);
    let panels = match name {
        "fig2" => vec![sweep_n("fig2", ProblemName::Tp1, 0.0, "full")],
        "fig3-left" => vec![sweep_n("fig3-left", ProblemName::Tp1, 1e-4, "full")],
        "fig3-right" => vec![sweep_n("fig3-right", ProblemName::Tp1, 1e-4, "best")],
        "fig4-left" => vec![sweep_delta("fig4-left", ProblemName::Tp1, 10)],
        "fig4-right" => vec![compare_selectors("fig4-right", ProblemName::Tp1, 20, 1e-4)],
        "fig7-left" => vec![sweep_delta("fig7-left", sigma1, 10)],
        "fig7-right" => vec![sweep_n("fig7-right", sigma1, 1e-2, "best")],
        "fig8-left" => vec![sweep_delta("fig8-left", ProblemName::Fdem(TruthName::Sigma2), 10)],
        "fig8-right" => vec![sweep_delta("fig8-right", ProblemName::Fdem(TruthName::Sigma3), 10)],
        "fig12" => vec![compare_selectors("fig12", sigma1, 10, 1e-4)],
        "fig9" => vec![PanelSpec {
            id: "fig9".into(),
            problem: sigma1,
            curves: [1e-4, 1e-2]
                .into_iter()
                .map(|delta| CurveSpec { n: 20, delta, series: "best" })
                .collect(),
            note: Some(
                "only the Riesz reconstructions are emitted; the linear-spline collocation comparator is not implemented",
            ),
        }],
        "fig3" | "fig4" | "fig7" | "fig8" => {
            let mut out = figure_panels(&format!("{name}-left"))?;
            out.extend(figure_panels(&format!("{name}-right"))?);
            out
        }
        other => {
            return Err(CliError::user(format!(
                "unknown figure '{other}' (expected one of {})",
                FIGURE_NAMES.join(", ")
            )))
        }
    };
    Ok(panels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveReport {
    pub column: String,
    pub n: usize,
    pub delta: f64,
    pub series: String,
    pub kappa: Option<usize>,
    pub cutoff: usize,
    pub max_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelReport {
    pub id: String,
    pub problem: String,
    pub seed: u64,
    pub tau: f64,
    pub curves: Vec<CurveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn column_name(panel: &PanelSpec, c: &CurveSpec) -> String {
    let ns = panel.curves.iter().any(|o| o.n != c.n);
    let deltas = panel.curves.iter().any(|o| o.delta != c.delta);
    let mut parts = Vec::new();
    if ns {
        parts.push(format!("n{}", c.n));
    }
    if deltas {
        parts.push(format!("delta{}", delta_tag(c.delta)));
    }
    if panel.curves.iter().any(|o| o.series != c.series) || parts.is_empty() {
        parts.push(c.series.to_string());
    }
    parts.join("_")
}

/// Computes and writes `{id}.csv` (solutions), `{id}_error.csv` (absolute
/// errors) and `{id}.json` (indices and errors) for every panel of `name`.
pub fn figure_data(name: &str, dir: &Path, seed: u64, grid_points: usize) -> CliResult<Vec<PanelReport>> {
    let panels = figure_panels(name)?;
    ensure_dir(dir)?;
    let icfg = IntegrationConfig::default();
    let mut cache: HashMap<(String, usize), Prepared> = HashMap::new();
    let mut reports = Vec::new();
    for panel in &panels {
        let tau = panel.problem.default_tau();
        let mut headers = vec!["t".to_string(), "exact".to_string()];
        let mut solutions: Vec<Vec<f64>> = Vec::new();
        let mut errors: Vec<Vec<f64>> = Vec::new();
        let mut curves = Vec::new();
        let mut grid = Vec::new();
        let mut truth = Vec::new();
        for c in &panel.curves {
            let key = (panel.problem.to_string(), c.n);
            if !cache.contains_key(&key) {
                cache.insert(key.clone(), prepare(panel.problem, c.n, None, grid_points, &icfg)?);
            }
            let prepared = &cache[&key];
            let req = CellRequest {
                delta: c.delta,
                seed,
                tau,
                selector: Selector::All,
            };
            let cell = solve_cell(prepared, &req, &icfg)?;
            grid = cell.grid.clone();
            truth = cell.truth.clone();
            let column = column_name(panel, c);
            let solution = cell.summary.solution(c.series);
            let values = cell
                .values_of(c.series)
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| vec![f64::NAN; grid.len()]);
            errors.push(values.iter().zip(&truth).map(|(v, t)| (v - t).abs()).collect());
            solutions.push(values);
            curves.push(CurveReport {
                column: column.clone(),
                n: c.n,
                delta: c.delta,
                series: c.series.to_string(),
                kappa: solution.map(|s| s.kappa),
                cutoff: cell.summary.cutoff,
                max_error: solution.map(|s| s.max_error),
                l2_error: solution.map(|s| s.l2_error),
                notes: cell.summary.notes.clone(),
            });
            headers.push(column);
        }

        let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
        let mut columns: Vec<&[f64]> = vec![&grid, &truth];
        columns.extend(solutions.iter().map(Vec::as_slice));
        write_text(&dir.join(format!("{}.csv", panel.id)), &csv_table(&header_refs, &columns)?)?;

        let mut error_headers = vec!["t"];
        error_headers.extend(header_refs[2..].iter().copied());
        let mut error_columns: Vec<&[f64]> = vec![&grid];
        error_columns.extend(errors.iter().map(Vec::as_slice));
        write_text(
            &dir.join(format!("{}_error.csv", panel.id)),
            &csv_table(&error_headers, &error_columns)?,
        )?;

        let report = PanelReport {
            id: panel.id.clone(),
            problem: panel.problem.to_string(),
            seed,
            tau,
            curves,
            note: panel.note.map(str::to_string),
        };
        write_json(&dir.join(format!("{}.json", panel.id)), &report)?;
        reports.push(report);
    }
    Ok(reports)
}
