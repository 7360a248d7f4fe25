//! Stochastic first-order oracles.
//!
//! An oracle returns `V̂ = V(x) + U` with zero-mean noise `U`. The additive
//! Gaussian kinds draw `U` coordinate-wise with standard deviation
//! `σ + ς·dist(x, X*)`, so `E‖U‖² = d_noisy (σ + ς·dist)²`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{ProblemInstance, ProblemKind, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Exact,
    AdditiveGaussianIsotropic,
    /// Noise on the minimizer block only; the maximizer block is exact.
    AdditiveGaussianFirstBlockOnly,
    /// Minibatch estimate of the Gaussian GAN field.
    MinibatchGan,
}

#[derive(Clone, Debug)]
pub struct OracleSample {
    pub feedback: Vector,
    /// Standard normal variates drawn for this sample.
    pub draws_consumed: u64,
}

/// Anything the solvers can query for feedback.
pub trait Oracle {
    fn sample(&self, problem: &ProblemInstance, point: &Vector, rng: &mut ChaCha8Rng) -> Result<OracleSample>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleModel {
    pub noise_kind: NoiseKind,
    /// Per-coordinate standard deviation of the additive noise.
    #[serde(default)]
    pub sigma: f64,
    /// State-dependent part of the standard deviation.
    #[serde(default)]
    pub varcontrol: f64,
}

impl OracleModel {
    pub fn exact() -> Self {
        Self {
            noise_kind: NoiseKind::Exact,
            sigma: 0.0,
            varcontrol: 0.0,
        }
    }

    pub fn isotropic(sigma: f64) -> Self {
        Self {
            noise_kind: NoiseKind::AdditiveGaussianIsotropic,
            sigma,
            varcontrol: 0.0,
        }
    }

    pub fn first_block(sigma: f64) -> Self {
        Self {
            noise_kind: NoiseKind::AdditiveGaussianFirstBlockOnly,
            sigma,
            varcontrol: 0.0,
        }
    }

    pub fn minibatch_gan() -> Self {
        Self {
            noise_kind: NoiseKind::MinibatchGan,
            sigma: 0.0,
            varcontrol: 0.0,
        }
    }

    pub fn with_varcontrol(mut self, varcontrol: f64) -> Self {
        self.varcontrol = varcontrol;
        self
    }

    pub fn validate(&self, problem: &ProblemInstance) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be finite and non-negative, got {}", self.sigma)));
        }
        if !(self.varcontrol >= 0.0 && self.varcontrol.is_finite()) {
            return Err(Error::Config(format!(
                "varcontrol must be finite and non-negative, got {}",
                self.varcontrol
            )));
        }
        if self.noise_kind == NoiseKind::MinibatchGan && problem.kind() != ProblemKind::GaussianGan {
            return Err(Error::Config(format!(
                "minibatch GAN noise needs a Gaussian GAN problem, got {}",
                problem.kind()
            )));
        }
        if self.varcontrol > 0.0 && !problem.supports_distance() {
            return Err(Error::Config(
                "state-dependent noise needs a problem with a known solution set".into(),
            ));
        }
        Ok(())
    }

    /// Number of coordinates that receive additive noise.
    pub fn noisy_coordinates(&self, problem: &ProblemInstance) -> usize {
        match self.noise_kind {
            NoiseKind::Exact => 0,
            NoiseKind::AdditiveGaussianIsotropic => problem.dim(),
            NoiseKind::AdditiveGaussianFirstBlockOnly => problem.first_block(),
            NoiseKind::MinibatchGan => problem.dim(),
        }
    }

    /// Bound on `E‖U‖²` at the solution set (`σ²` of the variance-control
    /// assumption). `None` for minibatch noise, whose variance is state-dependent.
    pub fn total_variance(&self, problem: &ProblemInstance) -> Option<f64> {
        match self.noise_kind {
            NoiseKind::MinibatchGan => None,
            _ => Some(self.noisy_coordinates(problem) as f64 * self.sigma * self.sigma),
        }
    }

    /// `ς` of the variance-control assumption in total-norm units.
    pub fn total_varcontrol(&self, problem: &ProblemInstance) -> f64 {
        (self.noisy_coordinates(problem) as f64).sqrt() * self.varcontrol
    }

    fn noise_scale(&self, problem: &ProblemInstance, point: &Vector) -> Result<f64> {
        if self.varcontrol == 0.0 {
            return Ok(self.sigma);
        }
        Ok(self.sigma + self.varcontrol * problem.distance_to_solution(point)?)
    }
}

impl Oracle for OracleModel {
    fn sample(&self, problem: &ProblemInstance, point: &Vector, rng: &mut ChaCha8Rng) -> Result<OracleSample> {
        problem.check_dim(point)?;
        match self.noise_kind {
            NoiseKind::Exact => Ok(OracleSample {
                feedback: problem.field_unchecked(point),
                draws_consumed: 0,
            }),
            NoiseKind::AdditiveGaussianIsotropic | NoiseKind::AdditiveGaussianFirstBlockOnly => {
                let mut feedback = problem.field_unchecked(point);
                let noisy = self.noisy_coordinates(problem);
                let scale = self.noise_scale(problem, point)?;
                for v in feedback.iter_mut().take(noisy) {
                    *v += scale * rng.sample::<f64, _>(StandardNormal);
                }
                Ok(OracleSample {
                    feedback,
                    draws_consumed: noisy as u64,
                })
            }
            NoiseKind::MinibatchGan => {
                let gan = problem.gan().ok_or_else(|| {
                    Error::Config(format!(
                        "minibatch GAN noise needs a Gaussian GAN problem, got {}",
                        problem.kind()
                    ))
                })?;
                let feedback = gan.minibatch_field(point, rng);
                Ok(OracleSample {
                    feedback,
                    draws_consumed: (2 * gan.batch_size() * gan.dim()) as u64,
                })
            }
        }
    }
}
