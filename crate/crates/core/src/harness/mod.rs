//! Experiment harness: configs, parallel runs, output tables and the
//! acceptance suite.

mod acceptance;
mod config;
mod experiment;
mod figures;

pub use acceptance::{
    affine_rate_schedule, random_monotone_affine, run_acceptance_suite, run_acceptance_with, run_criterion,
    select_criteria, AcceptanceReport, CriterionReport, DEFAULT_SEED,
};
pub use config::{canonical_digest, default_schedule, ExperimentConfig, InitSpec, ProblemSpec};
pub use experiment::{run_experiment, DivergenceEntry, ExperimentResult, Manifest};
pub use figures::{emit_figure_table, run_figure, Figure, FigureConfig};
