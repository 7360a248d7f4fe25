use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::Metric;
use crate::error::{Error, Result};
use crate::oracle::OracleModel;
use crate::problems::{self, BilinearLaw, ProblemDocument, ProblemInstance, ProblemKind, Vector};
use crate::schedules::{SchedulePair, ScheduleSpec};
use crate::solvers::{AnchoredParams, Cadence, ShgdEstimator, SolverKind, SolverSpec};

/// Problem family and size, or a pinned instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Planar,
    Bilinear {
        #[serde(default = "default_dim_half")]
        dim_half: usize,
        #[serde(default)]
        instance_seed: u64,
        #[serde(default = "default_law")]
        law: BilinearLaw,
    },
    StronglyConvexConcave {
        #[serde(default = "default_dim_half")]
        dim_half: usize,
        #[serde(default)]
        instance_seed: u64,
    },
    GaussianGan {
        #[serde(default = "default_gan_dim")]
        dim: usize,
        #[serde(default = "default_batch")]
        batch_size: usize,
        #[serde(default)]
        instance_seed: u64,
    },
    Instance {
        document: ProblemDocument,
    },
}

fn default_dim_half() -> usize {
    50
}

fn default_law() -> BilinearLaw {
    BilinearLaw::Gaussian
}

fn default_gan_dim() -> usize {
    10
}

fn default_batch() -> usize {
    128
}

impl ProblemSpec {
    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            ProblemSpec::Planar => Ok(problems::make_planar()),
            ProblemSpec::Bilinear {
                dim_half,
                instance_seed,
                law,
            } => problems::make_bilinear_with_law(*dim_half, *law, *instance_seed),
            ProblemSpec::StronglyConvexConcave { dim_half, instance_seed } => {
                problems::make_strongly_convex_concave(*dim_half, *instance_seed)
            }
            ProblemSpec::GaussianGan {
                dim,
                batch_size,
                instance_seed,
            } => problems::make_gaussian_gan(*dim, *batch_size, *instance_seed),
            ProblemSpec::Instance { document } => ProblemInstance::from_document(document),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::Planar => ProblemKind::Planar,
            ProblemSpec::Bilinear { .. } => ProblemKind::Affine,
            ProblemSpec::StronglyConvexConcave { .. } => ProblemKind::StronglyConvexConcave,
            ProblemSpec::GaussianGan { .. } => ProblemKind::GaussianGan,
            ProblemSpec::Instance { document } => match document {
                ProblemDocument::Planar => ProblemKind::Planar,
                ProblemDocument::Affine { .. } | ProblemDocument::Bilinear { .. } => ProblemKind::Affine,
                ProblemDocument::StronglyConvexConcave { .. } => ProblemKind::StronglyConvexConcave,
                ProblemDocument::GaussianGan { .. } => ProblemKind::GaussianGan,
            },
        }
    }
}

/// Starting point shared by every run of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Point { values: Vec<f64> },
    /// `scale · N(0, I)` drawn once from `seed`.
    Gaussian { scale: f64, seed: u64 },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Gaussian { scale: 1.0, seed: 0 }
    }
}

impl InitSpec {
    pub fn build(&self, dim: usize) -> Result<Vector> {
        match self {
            InitSpec::Point { values } => {
                if values.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: values.len(),
                    });
                }
                Ok(Vector::from_column_slice(values))
            }
            InitSpec::Gaussian { scale, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(Vector::from_fn(dim, |_, _| {
                    scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                }))
            }
        }
    }
}

/// Default stepsize parameters `(γ₁, η₁, b)` for DSEG-type and OG-type
/// solvers, with the `(1/3, 2/3)` exponent pair.
pub fn default_schedule(problem: ProblemKind, solver: SolverKind) -> ScheduleSpec {
    let optimistic = matches!(solver, SolverKind::Og | SolverKind::Dspeg);
    let (gamma1, eta1, offset_b) = match (problem, optimistic) {
        (ProblemKind::Affine, false) => (1.0, 0.1, 19.0),
        (ProblemKind::Affine, true) => (0.5, 0.05, 19.0),
        (ProblemKind::StronglyConvexConcave, _) => (0.1, 0.05, 19.0),
        (ProblemKind::GaussianGan, false) => (0.5, 0.05, 49.0),
        (ProblemKind::GaussianGan, true) => (0.05, 0.025, 99.0),
        (ProblemKind::Planar, _) => {
            return ScheduleSpec {
                gamma1: 1.0,
                eta1: 1.0,
                offset_b: 0.0,
                r_gamma: 0.1,
                r_eta: 0.9,
            }
        }
    };
    let (r_gamma, r_eta) = if solver == SolverKind::Eg { (1.0 / 3.0, 1.0 / 3.0) } else { (1.0 / 3.0, 2.0 / 3.0) };
    let eta1 = if solver == SolverKind::Eg { gamma1 } else { eta1 };
    ScheduleSpec {
        gamma1,
        eta1,
        offset_b,
        r_gamma,
        r_eta,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemSpec,
    #[serde(default = "default_oracle")]
    pub oracle: OracleModel,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    /// Defaults to [`default_schedule`].
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub anchored: AnchoredParams,
    #[serde(default)]
    pub shgd: ShgdEstimator,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub cadence: Cadence,
    #[serde(default)]
    pub init: InitSpec,
    /// `a` in `γ_n ≤ a/L`.
    #[serde(default = "default_lipschitz_fraction")]
    pub lipschitz_fraction: f64,
    /// Shrink `γ₁` to `a/L` instead of rejecting the config.
    #[serde(default)]
    pub clamp_gamma: bool,
    /// Reject or clamp configs with `γ₁ > a/L`. Off for counterexample runs.
    #[serde(default = "default_true")]
    pub enforce_step_bound: bool,
    #[serde(default)]
    pub record_points: bool,
    #[serde(default)]
    pub fit_window: Option<[u64; 2]>,
    /// Defaults to `dist_sq` when the solution set is known, `residual_sq` otherwise.
    #[serde(default)]
    pub metric: Option<Metric>,
    /// Output directory; not part of the digest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_oracle() -> OracleModel {
    OracleModel::isotropic(0.5)
}

fn default_solver() -> SolverKind {
    SolverKind::Dseg
}

fn default_horizon() -> u64 {
    100_000
}

fn default_runs() -> u64 {
    10
}

fn default_true() -> bool {
    true
}

fn default_lipschitz_fraction() -> f64 {
    0.9
}

impl ExperimentConfig {
    /// Config with every default applied.
    pub fn new(name: impl Into<String>, problem: ProblemSpec) -> Self {
        Self {
            name: name.into(),
            problem,
            oracle: default_oracle(),
            solver: default_solver(),
            schedule: None,
            anchored: AnchoredParams::default(),
            shgd: ShgdEstimator::default(),
            horizon: default_horizon(),
            runs: default_runs(),
            base_seed: 0,
            cadence: Cadence::default(),
            init: InitSpec::default(),
            lipschitz_fraction: default_lipschitz_fraction(),
            clamp_gamma: false,
            enforce_step_bound: true,
            record_points: false,
            fit_window: None,
            metric: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut config: Self = serde_json::from_str(text)?;
        config.resolve_defaults();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn resolve_defaults(&mut self) {
        if self.schedule.is_none() {
            self.schedule = Some(default_schedule(self.problem.kind(), self.solver));
        }
    }

    pub fn schedule_spec(&self) -> ScheduleSpec {
        self.schedule
            .unwrap_or_else(|| default_schedule(self.problem.kind(), self.solver))
    }

    pub fn schedule_pair(&self) -> Result<SchedulePair> {
        self.schedule_spec().to_pair()
    }

    pub fn solver_spec(&self) -> Result<SolverSpec> {
        Ok(SolverSpec {
            kind: self.solver,
            schedule: self.schedule_pair()?,
            anchored: self.anchored,
            shgd: self.shgd,
        })
    }

    pub fn metric_for(&self, problem: &ProblemInstance) -> Metric {
        self.metric.unwrap_or(if problem.supports_distance() {
            Metric::DistSq
        } else {
            Metric::ResidualSq
        })
    }

    /// Checks everything that does not need the problem instance.
    pub fn validate_shape(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(self.lipschitz_fraction > 0.0 && self.lipschitz_fraction < 1.0) {
            return Err(Error::Config(format!(
                "lipschitz_fraction must lie in (0, 1), got {}",
                self.lipschitz_fraction
            )));
        }
        if let Some([lo, hi]) = self.fit_window {
            if lo == 0 || hi <= lo {
                return Err(Error::Config(format!("fit window [{lo}, {hi}] is empty")));
            }
        }
        self.solver_spec()?;
        if self.solver == SolverKind::Anchored {
            self.anchored.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form with defaults applied; the output
    /// directory is excluded.
    pub fn digest(&self) -> String {
        let mut resolved = self.clone();
        resolved.resolve_defaults();
        resolved.output = None;
        let value = serde_json::to_value(&resolved).expect("configs serialize");
        canonical_digest(&value)
    }
}

/// SHA-256 hex digest of a JSON value with object keys in sorted order.
pub fn canonical_digest(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(&sort_keys(value)).expect("JSON values serialize");
    let hash = Sha256::digest(canonical.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

fn sort_keys(value: &serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k.clone(), sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}
