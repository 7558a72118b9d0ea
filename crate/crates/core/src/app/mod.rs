//! Command-line front end: configuration, figure pipelines and file output.

mod cli;
mod config;
mod figures;
mod output;

pub use cli::{cli_main, cli_run};
pub use config::{parse_refinement, ConfigPatch, Grid, OutputFormat, RunConfig};
pub use figures::{
    run_all, run_fig1, run_fig2, run_fig3, run_fig4, run_fig5, run_figure, write_dataset, write_manifest, Session,
};
pub use output::{format_g, render_svg, FigureDataset};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{location}: {msg}")]
    Config { location: String, msg: String },
    #[error("{context}: {msg}")]
    Solver { context: String, msg: String },
    #[error("i/o: {0}")]
    Io(String),
    #[error("plot: {0}")]
    Render(String),
}

/// Attach the parameters being computed to a library error.
pub(crate) trait Context<T> {
    fn ctx(self, context: impl FnOnce() -> String) -> Result<T, AppError>;
}

impl<T, E: std::fmt::Display> Context<T> for Result<T, E> {
    fn ctx(self, context: impl FnOnce() -> String) -> Result<T, AppError> {
        self.map_err(|e| AppError::Solver { context: context(), msg: e.to_string() })
    }
}
