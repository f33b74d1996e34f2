//! Batch experiments for the `riesz-teig` solver: configurable solve runs,
//! the Galerkin comparison table, figure data and Gram matrix dumps. Every
//! output except the optional timing files is byte-identical across runs
//! with the same configuration and seed.

pub mod config;
pub mod dump;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod output;
pub mod table;

pub use config::{ExperimentConfig, Formats, OneOrMany, ProblemConfig, Selector, OUTPUT_DIR_ENV};
pub use dump::{dump_gram, GramDump};
pub use error::{CliError, CliResult};
pub use experiment::{
    prepare, recomputed_residual, run_experiment, solve_cell, CellOutcome, CellRequest, CellSummary,
    ExperimentReport, Prepared, SolutionSummary,
};
pub use figures::{figure_data, figure_panels, PanelReport, FIGURE_NAMES};
pub use table::{table1, table1_rows, Table1Row, TABLE1_SIZES};
