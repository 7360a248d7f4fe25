use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, ExperimentResult};
use crate::analysis::AggregateCurve;
use crate::error::{Error, Result};
use crate::solvers::SolverKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Planar EG vs DSEG iterate traces.
    Fig1,
    /// DSEG convergence curves for several exponent pairs.
    Fig3,
    /// OG optimistic vs residual iterates.
    Fig5,
    /// DSEG against SHGD and anchored descent.
    Fig6,
}

impl Figure {
    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig3 => "fig3",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig3" => Ok(Figure::Fig3),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            other => Err(Error::Config(format!("unknown figure '{other}' (expected fig1|fig3|fig5|fig6)"))),
        }
    }
}

/// A figure config: several experiments, or a single one.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FigureConfig {
    Many {
        experiments: Vec<ExperimentConfig>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    One(Box<ExperimentConfig>),
}

impl FigureConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("experiments").is_some() {
            #[derive(Deserialize)]
            struct Many {
                experiments: Vec<serde_json::Value>,
                #[serde(default)]
                output: Option<PathBuf>,
            }
            let many: Many = serde_json::from_value(value)?;
            let experiments = many
                .experiments
                .iter()
                .map(|v| ExperimentConfig::from_json(&v.to_string()))
                .collect::<Result<Vec<_>>>()?;
            Ok(FigureConfig::Many {
                experiments,
                output: many.output,
            })
        } else {
            Ok(FigureConfig::One(Box::new(ExperimentConfig::from_json(&text)?)))
        }
    }

    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        match self {
            FigureConfig::Many { experiments, .. } => experiments.clone(),
            FigureConfig::One(c) => vec![(**c).clone()],
        }
    }

    pub fn output(&self) -> Option<PathBuf> {
        match self {
            FigureConfig::Many { output, .. } => output.clone(),
            FigureConfig::One(c) => c.output.clone(),
        }
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_curve(dir: &Path, file: String, curve: Option<&AggregateCurve>, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(file);
    let writer = BufWriter::new(fs::File::create(&path)?);
    match curve {
        Some(c) => c.write_csv(writer)?,
        None => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(["n", "mean", "sd", "runs"])?;
            w.flush()?;
        }
    }
    written.push(path);
    Ok(())
}

fn emit_fig1(results: &[ExperimentResult], dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    if results.is_empty() {
        return Err(Error::MissingExperiment(
            "fig1 needs planar experiments (e.g. EG with γ_n = 1/n^0.6 and DSEG with 1/n^0.1, 1/n^0.9) recorded with record_points = true".into(),
        ));
    }
    for r in results {
        if r.trajectories.iter().any(|t| t.records.iter().any(|rec| rec.point.as_ref().is_none_or(|p| p.len() != 2))) {
            return Err(Error::MissingExperiment(format!(
                "fig1 needs 2-d iterate snapshots; rerun '{}' on the planar problem with record_points = true",
                r.config.name
            )));
        }
        let path = dir.join(format!("fig1_{}.csv", sanitize(&r.config.name)));
        let mut w = csv::Writer::from_writer(BufWriter::new(fs::File::create(&path)?));
        w.write_record(["n", "theta", "phi"])?;
        if let Some(t) = r.trajectories.first() {
            for rec in &t.records {
                let p = rec.point.as_ref().expect("checked above");
                w.write_record([rec.n.to_string(), p[0].to_string(), p[1].to_string()])?;
            }
        }
        w.flush()?;
        written.push(path);
    }
    Ok(())
}

/// Writes the CSV tables of `figure` into `dir`.
pub fn emit_figure_table(results: &[ExperimentResult], figure: Figure, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match figure {
        Figure::Fig1 => emit_fig1(results, dir, &mut written)?,
        Figure::Fig3 => {
            if results.is_empty() {
                return Err(Error::MissingExperiment(
                    "fig3 needs DSEG experiments, one per exponent pair (r_γ, r_η)".into(),
                ));
            }
            for r in results {
                write_curve(dir, format!("fig3_{}.csv", sanitize(&r.config.name)), r.aggregate.as_ref(), &mut written)?;
            }
        }
        Figure::Fig5 => {
            let og: Vec<&ExperimentResult> = results.iter().filter(|r| r.solver() == SolverKind::Og).collect();
            if og.is_empty() {
                return Err(Error::MissingExperiment(
                    "fig5 needs OG experiments, one per exponent setting".into(),
                ));
            }
            for r in og {
                let name = sanitize(&r.config.name);
                write_curve(dir, format!("fig5_{name}_optimistic.csv"), r.aggregate.as_ref(), &mut written)?;
                write_curve(dir, format!("fig5_{name}_residual.csv"), r.residual_aggregate.as_ref(), &mut written)?;
            }
        }
        Figure::Fig6 => {
            let wanted = [SolverKind::Dseg, SolverKind::Shgd, SolverKind::Anchored];
            let missing: Vec<&str> = wanted
                .iter()
                .filter(|k| !results.iter().any(|r| r.solver() == **k))
                .map(|k| k.as_str())
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingExperiment(format!(
                    "fig6 needs one experiment each for dseg, shgd and anchored; missing: {}",
                    missing.join(", ")
                )));
            }
            for kind in wanted {
                let r = results.iter().find(|r| r.solver() == kind).expect("checked above");
                write_curve(dir, format!("fig6_{kind}.csv"), r.aggregate.as_ref(), &mut written)?;
            }
        }
    }
    Ok(written)
}

/// Runs every experiment of a figure config and writes its tables.
pub fn run_figure(config: &FigureConfig, figure: Figure, dir: &Path, workers: Option<usize>) -> Result<Vec<PathBuf>> {
    let results = config
        .experiments()
        .iter()
        .map(|c| run_experiment(c, workers))
        .collect::<Result<Vec<_>>>()?;
    emit_figure_table(&results, figure, dir)
}
