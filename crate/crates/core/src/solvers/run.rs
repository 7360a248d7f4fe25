use serde::{Deserialize, Serialize};

use super::{
    anchored_step, dseg_step, dspeg_step, og_step, residual_iterate, shgd_step, AnchoredParams, ShgdEstimator,
    SolverKind, SolverState, StepReport,
};
use crate::analysis::{Divergence, MetricRecord, PointMetrics, Trajectory};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::problems::{ProblemInstance, Vector};
use crate::rng::RunStreams;
use crate::schedules::SchedulePair;

/// Runs abort once `‖X_n‖` exceeds this.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub schedule: SchedulePair,
    #[serde(default)]
    pub anchored: AnchoredParams,
    #[serde(default)]
    pub shgd: ShgdEstimator,
}

impl SolverSpec {
    pub fn new(kind: SolverKind, schedule: SchedulePair) -> Self {
        Self {
            kind,
            schedule,
            anchored: AnchoredParams::default(),
            shgd: ShgdEstimator::default(),
        }
    }

    /// Advances `state` by one step of this solver.
    ///
    /// `eg` runs both stages with the exploration schedule, `shgd` uses the
    /// update schedule and `anchored` ignores the schedule.
    pub fn step<O: Oracle + ?Sized>(
        &self,
        state: &SolverState,
        problem: &ProblemInstance,
        oracle: &O,
        streams: &RunStreams,
    ) -> Result<StepReport> {
        let (gamma, eta) = self.schedule.at(state.step_index);
        match self.kind {
            SolverKind::Dseg => dseg_step(state, problem, oracle, gamma, eta, streams),
            SolverKind::Eg => dseg_step(state, problem, oracle, gamma, gamma, streams),
            SolverKind::Og => og_step(state, problem, oracle, gamma, eta, streams),
            SolverKind::Dspeg => dspeg_step(state, problem, oracle, gamma, eta, streams),
            SolverKind::Shgd => shgd_step(state, problem, oracle, eta, self.shgd, streams),
            SolverKind::Anchored => anchored_step(state, problem, oracle, &self.anchored, streams),
        }
    }

    fn uses_exploration(&self) -> bool {
        matches!(
            self.kind,
            SolverKind::Dseg | SolverKind::Eg | SolverKind::Og | SolverKind::Dspeg
        )
    }
}

/// Which iterations get a [`MetricRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Cadence {
    /// `1, 1 + stride, 1 + 2·stride, …` and the last iterate.
    Every { stride: u64 },
    /// Every iterate up to `dense_until`, then `per_decade` log-spaced points
    /// per decade, and the last iterate.
    Geometric { dense_until: u64, per_decade: u32 },
    Explicit { indices: Vec<u64> },
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence::Geometric {
            dense_until: 100,
            per_decade: 30,
        }
    }
}

impl Cadence {
    /// Sorted record indices within `[1, last]`.
    pub fn indices(&self, last: u64) -> Vec<u64> {
        let mut out: Vec<u64> = match self {
            Cadence::Every { stride } => {
                let stride = (*stride).max(1);
                let mut v: Vec<u64> = (0..).map(|k| 1 + k * stride).take_while(|&n| n <= last).collect();
                v.push(last);
                v
            }
            Cadence::Geometric { dense_until, per_decade } => {
                let dense = (*dense_until).max(1).min(last);
                let mut v: Vec<u64> = (1..=dense).collect();
                let per_decade = f64::from((*per_decade).max(1));
                let mut k = 1u32;
                loop {
                    let n = (dense as f64 * 10f64.powf(f64::from(k) / per_decade)).round() as u64;
                    if n > last {
                        break;
                    }
                    v.push(n);
                    k += 1;
                }
                v.push(last);
                v
            }
            Cadence::Explicit { indices } => indices.iter().copied().filter(|&n| n >= 1 && n <= last).collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub cadence: Cadence,
    /// Keep a copy of the iterate in every record.
    pub record_points: bool,
    /// Enforce `γ₁ ≤ a/L` when `L` is a global constant.
    pub lipschitz_fraction: Option<f64>,
    pub run_id: u64,
    pub fingerprint: String,
}

fn measure(problem: &ProblemInstance, kind: SolverKind, state: &SolverState, record_points: bool) -> Result<MetricRecord> {
    let point_metrics = |x: &Vector| -> Result<PointMetrics> {
        let dist_sq = if problem.supports_distance() {
            Some(problem.distance_to_solution(x)?.powi(2))
        } else {
            None
        };
        Ok(PointMetrics {
            dist_sq,
            residual_sq: problem.evaluate_field(x)?.norm_squared(),
        })
    };
    let base = point_metrics(&state.iterate)?;
    let companion = match (kind, residual_iterate(state)) {
        (SolverKind::Og, Ok(z)) => Some(point_metrics(&z)?),
        _ => None,
    };
    Ok(MetricRecord {
        n: state.step_index,
        dist_sq: base.dist_sq,
        residual_sq: base.residual_sq,
        iterate_norm: state.iterate.norm(),
        residual_iterate: companion,
        point: record_points.then(|| state.iterate.iter().copied().collect()),
    })
}

fn check_preconditions(spec: &SolverSpec, problem: &ProblemInstance, init: &Vector, horizon: u64, options: &RunOptions) -> Result<()> {
    problem.check_dim(init)?;
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least one step".into()));
    }
    if spec.kind == SolverKind::Anchored {
        spec.anchored.validate()?;
    }
    if let Some(a) = options.lipschitz_fraction {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Config(format!("Lipschitz fraction must lie in (0, 1), got {a}")));
        }
        let lipschitz = problem.lipschitz();
        let global = problem.lipschitz_radius().is_none();
        if spec.uses_exploration() && global && lipschitz > 0.0 {
            let limit = a / lipschitz;
            let g1 = spec.schedule.max_exploration();
            if g1 > limit * (1.0 + 1e-12) {
                return Err(Error::ContractViolation(format!(
                    "γ₁ = {g1} exceeds a/L = {limit} (a = {a}, L = {lipschitz})"
                )));
            }
        }
    }
    Ok(())
}

/// Runs `horizon` steps from `init`, stopping early on divergence.
///
/// The initial point is `X₁`, so a full run records indices up to
/// `horizon + 1`. A divergent run keeps its records so far and reports where
/// it blew up.
pub fn run_partial<O: Oracle + ?Sized>(
    spec: &SolverSpec,
    problem: &ProblemInstance,
    oracle: &O,
    init: &Vector,
    horizon: u64,
    streams: RunStreams,
    options: &RunOptions,
) -> Result<Trajectory> {
    check_preconditions(spec, problem, init, horizon, options)?;
    let last = horizon + 1;
    let targets = options.cadence.indices(last);
    let mut next_target = targets.iter().copied().peekable();
    let mut records = Vec::with_capacity(targets.len());
    let mut state = SolverState::initial(spec.kind, init.clone());
    let mut oracle_calls = 0u64;
    let mut divergence = None;

    loop {
        if next_target.peek() == Some(&state.step_index) {
            records.push(measure(problem, spec.kind, &state, options.record_points)?);
            next_target.next();
        }
        if state.step_index >= last {
            break;
        }
        let report = spec.step(&state, problem, oracle, &streams)?;
        oracle_calls += u64::from(report.oracle_calls);
        state = report.new_state;
        let norm = state.iterate.norm();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            divergence = Some(Divergence {
                iteration: state.step_index,
                norm,
            });
            break;
        }
    }

    Ok(Trajectory {
        run_id: options.run_id,
        seed: streams.seed(),
        fingerprint: options.fingerprint.clone(),
        records,
        oracle_calls,
        divergence,
    })
}

/// Like [`run_partial`] but turns divergence into [`Error::Diverged`].
pub fn run<O: Oracle + ?Sized>(
    spec: &SolverSpec,
    problem: &ProblemInstance,
    oracle: &O,
    init: &Vector,
    horizon: u64,
    streams: RunStreams,
    options: &RunOptions,
) -> Result<Trajectory> {
    let trajectory = run_partial(spec, problem, oracle, init, horizon, streams, options)?;
    match trajectory.divergence {
        Some(Divergence { iteration, norm }) => Err(Error::Diverged { iteration, norm }),
        None => Ok(trajectory),
    }
}
