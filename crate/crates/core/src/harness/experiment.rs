use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{canonical_digest, ExperimentConfig};
use crate::analysis::{
    aggregate_runs, fit_loglog_slope, predict_rate_constants, AggregateCurve, LogLogFit, Metric, TheoremSelector,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::problems::ProblemInstance;
use crate::rng::RunStreams;
use crate::solvers::{run_partial, RunOptions, SolverKind, SolverSpec};

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub digest: String,
    pub problem_digest: String,
    pub metric: Metric,
    /// One per run, in run-id order.
    pub trajectories: Vec<Trajectory>,
    /// Over the runs that did not diverge.
    pub aggregate: Option<AggregateCurve>,
    /// OG residual-iterate curve.
    pub residual_aggregate: Option<AggregateCurve>,
    pub fit: Option<LogLogFit>,
    pub wall_clock_seconds: f64,
    pub oracle_calls: u64,
    pub diverged_runs: Vec<u64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceEntry {
    pub run_id: u64,
    pub iteration: u64,
    pub norm: f64,
}

/// JSON manifest written next to the CSV outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_digest: String,
    pub problem_digest: String,
    pub config: ExperimentConfig,
    pub metric: Metric,
    pub sd_convention: String,
    pub runs: u64,
    pub horizon: u64,
    pub divergences: Vec<DivergenceEntry>,
    pub oracle_calls: u64,
    pub wall_clock_seconds: f64,
    pub fit: Option<LogLogFit>,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

fn uses_exploration(kind: SolverKind) -> bool {
    matches!(kind, SolverKind::Dseg | SolverKind::Eg | SolverKind::Og | SolverKind::Dspeg)
}

/// Applies the `γ₁ ≤ a/L` rule; returns notes for the manifest.
fn enforce_lipschitz_rule(config: &ExperimentConfig, problem: &ProblemInstance, spec: &mut SolverSpec) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    if !uses_exploration(spec.kind) {
        return Ok(notes);
    }
    if !config.enforce_step_bound {
        notes.push("γ₁ ≤ a/L not enforced".into());
        return Ok(notes);
    }
    let a = config.lipschitz_fraction;
    let l = problem.lipschitz();
    if l.is_nan() || l <= 0.0 {
        return Ok(notes);
    }
    let limit = a / l;
    let g1 = spec.schedule.max_exploration();
    let holds = g1 <= limit * (1.0 + 1e-12);
    match problem.lipschitz_radius() {
        None if !holds && !config.clamp_gamma => {
            return Err(Error::ContractViolation(format!(
                "γ₁ = {g1} exceeds a/L = {limit} (a = {a}, L = {l}); set clamp_gamma to rescale"
            )));
        }
        Some(radius) => notes.push(format!(
            "L = {l} bounds the field on the ball of radius {radius}; γ₁ ≤ a/L holds: {holds}"
        )),
        None => {}
    }
    if !holds && config.clamp_gamma {
        spec.schedule.clamp_exploration(limit)?;
        notes.push(format!("γ₁ clamped from {g1} to a/L = {limit}"));
    }
    Ok(notes)
}

fn rate_notes(config: &ExperimentConfig, problem: &ProblemInstance, spec: &SolverSpec) -> Vec<String> {
    let mut notes = Vec::new();
    if spec.kind != SolverKind::Dseg || problem.error_bound() <= 0.0 {
        return notes;
    }
    let Some(sigma_sq) = config.oracle.total_variance(problem) else {
        return notes;
    };
    let (explore, update) = (spec.schedule.exploration(), spec.schedule.update());
    let affine = problem.constant_jacobian().is_some() && explore.exponent() == 0.0 && update.exponent() == 1.0;
    let selector = if affine { TheoremSelector::Affine } else { TheoremSelector::General };
    if let Ok(prediction) =
        predict_rate_constants(problem, explore.scale(), update.scale(), sigma_sq, config.lipschitz_fraction, selector)
    {
        if let Ok(report) = prediction.decay(update.exponent(), update.offset(), explore.scale(), update.scale()) {
            notes.push(format!(
                "predicted decay exponent {} ({}); conditions: {}",
                report.exponent,
                if report.conditions_hold { "conditions hold" } else { "conditions fail" },
                report.conditions.join("; ")
            ));
        }
    }
    notes
}

/// Runs every configured run, in parallel on `workers` threads (all cores
/// when `None`). Results depend only on the config, not on `workers`.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentResult> {
    config.validate_shape()?;
    let problem = config.problem.build()?;
    config.oracle.validate(&problem)?;
    let mut spec = config.solver_spec()?;
    let mut notes = enforce_lipschitz_rule(config, &problem, &mut spec)?;
    notes.extend(rate_notes(config, &problem, &spec));
    let init = config.init.build(problem.dim())?;
    let metric = config.metric_for(&problem);
    let digest = config.digest();
    let problem_digest = canonical_digest(&serde_json::to_value(problem.to_document())?);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let started = Instant::now();
    let trajectories: Vec<Trajectory> = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|run_id| {
                let options = RunOptions {
                    cadence: config.cadence.clone(),
                    record_points: config.record_points,
                    lipschitz_fraction: None,
                    run_id,
                    fingerprint: digest.clone(),
                };
                let streams = RunStreams::for_run(config.base_seed, run_id);
                run_partial(&spec, &problem, &config.oracle, &init, config.horizon, streams, &options)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let wall_clock_seconds = started.elapsed().as_secs_f64();

    let diverged_runs: Vec<u64> = trajectories
        .iter()
        .filter(|t| t.divergence.is_some())
        .map(|t| t.run_id)
        .collect();
    let settled: Vec<Trajectory> = trajectories.iter().filter(|t| t.divergence.is_none()).cloned().collect();
    let aggregate = if settled.is_empty() { None } else { Some(aggregate_runs(&settled, metric)?) };
    let residual_aggregate = if spec.kind == SolverKind::Og && !settled.is_empty() {
        let companion = if problem.supports_distance() {
            Metric::ResidualIterateDistSq
        } else {
            Metric::ResidualIterateResidualSq
        };
        aggregate_runs(&settled, companion).ok()
    } else {
        None
    };
    let fit = match (config.fit_window, &aggregate) {
        (Some([lo, hi]), Some(curve)) => match fit_loglog_slope(&curve.mean_series(), lo, hi) {
            Ok(fit) => Some(fit),
            Err(e) => {
                notes.push(format!("slope fit over [{lo}, {hi}] failed: {e}"));
                None
            }
        },
        _ => None,
    };
    if !diverged_runs.is_empty() {
        notes.push(format!("{} of {} runs diverged", diverged_runs.len(), config.runs));
    }
    let oracle_calls = trajectories.iter().map(|t| t.oracle_calls).sum();

    Ok(ExperimentResult {
        config: config.clone(),
        digest,
        problem_digest,
        metric,
        trajectories,
        aggregate,
        residual_aggregate,
        fit,
        wall_clock_seconds,
        oracle_calls,
        diverged_runs,
        notes,
    })
}

fn create_csv(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentResult {
    pub fn solver(&self) -> SolverKind {
        self.config.solver
    }

    /// Per-run records, one row per `(run_id, n)`.
    pub fn write_trajectories_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "run_id",
            "n",
            "dist_sq",
            "residual_sq",
            "iterate_norm",
            "residual_iterate_dist_sq",
            "residual_iterate_residual_sq",
        ])?;
        for t in &self.trajectories {
            for r in &t.records {
                w.write_record([
                    t.run_id.to_string(),
                    r.n.to_string(),
                    opt(r.dist_sq),
                    r.residual_sq.to_string(),
                    r.iterate_norm.to_string(),
                    opt(r.residual_iterate.and_then(|m| m.dist_sq)),
                    opt(r.residual_iterate.map(|m| m.residual_sq)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn manifest(&self, files: Vec<String>) -> Manifest {
        Manifest {
            name: self.config.name.clone(),
            config_digest: self.digest.clone(),
            problem_digest: self.problem_digest.clone(),
            config: self.config.clone(),
            metric: self.metric,
            sd_convention: "population".into(),
            runs: self.config.runs,
            horizon: self.config.horizon,
            divergences: self
                .trajectories
                .iter()
                .filter_map(|t| {
                    t.divergence.map(|d| DivergenceEntry {
                        run_id: t.run_id,
                        iteration: d.iteration,
                        norm: d.norm,
                    })
                })
                .collect(),
            oracle_calls: self.oracle_calls,
            wall_clock_seconds: self.wall_clock_seconds,
            fit: self.fit,
            notes: self.notes.clone(),
            files,
        }
    }

    /// Writes `aggregate.csv`, `trajectories.csv`, `residual_iterate.csv`
    /// (OG only) and `manifest.json` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let header_only = AggregateCurve {
            metric: self.metric,
            n: Vec::new(),
            mean: Vec::new(),
            sd: Vec::new(),
            runs: 0,
        };
        let path = dir.join("aggregate.csv");
        self.aggregate.as_ref().unwrap_or(&header_only).write_csv(create_csv(&path)?)?;
        written.push(path);
        if let Some(curve) = &self.residual_aggregate {
            let path = dir.join("residual_iterate.csv");
            curve.write_csv(create_csv(&path)?)?;
            written.push(path);
        }
        let path = dir.join("trajectories.csv");
        self.write_trajectories_csv(create_csv(&path)?)?;
        written.push(path);

        let files = written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect();
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&self.manifest(files))?)?;
        written.push(path);
        Ok(written)
    }
}
