//! One-step update rules.
//!
//! Each step is a pure transition `(state, oracle draws) ↦ state`. The oracle
//! draws of step `n` come from the `(n, phase)` slots of the run's
//! [`RunStreams`], so replaying a step reproduces it exactly.

mod run;

pub use run::{run, run_partial, Cadence, RunOptions, SolverSpec, DIVERGENCE_NORM};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::problems::{ProblemInstance, Vector};
use crate::rng::{Phase, RunStreams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Double-stepsize extragradient.
    Dseg,
    /// Extragradient with one schedule for both steps.
    Eg,
    /// Generalized optimistic gradient.
    Og,
    /// Double-stepsize past extragradient.
    Dspeg,
    /// Stochastic Hamiltonian gradient descent.
    Shgd,
    /// Gradient descent with a vanishing pull towards the initial point.
    Anchored,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Dseg,
        SolverKind::Eg,
        SolverKind::Og,
        SolverKind::Dspeg,
        SolverKind::Shgd,
        SolverKind::Anchored,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Dseg => "dseg",
            SolverKind::Eg => "eg",
            SolverKind::Og => "og",
            SolverKind::Dspeg => "dspeg",
            SolverKind::Shgd => "shgd",
            SolverKind::Anchored => "anchored",
        }
    }

    /// Oracle calls per step.
    pub fn oracle_calls(self) -> u32 {
        match self {
            SolverKind::Dseg | SolverKind::Eg | SolverKind::Shgd => 2,
            SolverKind::Og | SolverKind::Dspeg | SolverKind::Anchored => 1,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver '{s}' (expected dseg|eg|og|dspeg|shgd|anchored)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    /// Base state `X_n`.
    pub iterate: Vector,
    /// `V̂_{n−1}` for OG, `V̂_{n−1/2}` for DSPEG. Read as zero when absent.
    pub last_feedback: Option<Vector>,
    /// `γ_{n−1}`, needed for the OG residual iterate.
    pub last_gamma: Option<f64>,
    /// `X₁` for anchored gradient descent.
    pub anchor: Option<Vector>,
    pub step_index: u64,
}

impl SolverState {
    pub fn new(iterate: Vector) -> Self {
        Self {
            iterate,
            last_feedback: None,
            last_gamma: None,
            anchor: None,
            step_index: 1,
        }
    }

    /// Initial state for `kind`; records the anchor for anchored descent.
    pub fn initial(kind: SolverKind, iterate: Vector) -> Self {
        let mut state = Self::new(iterate);
        if kind == SolverKind::Anchored {
            state.anchor = Some(state.iterate.clone());
        }
        state
    }

    fn advance(&self, iterate: Vector) -> Self {
        Self {
            iterate,
            last_feedback: None,
            last_gamma: None,
            anchor: self.anchor.clone(),
            step_index: self.step_index + 1,
        }
    }

    fn previous_feedback(&self) -> Vector {
        self.last_feedback
            .clone()
            .unwrap_or_else(|| Vector::zeros(self.iterate.len()))
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub new_state: SolverState,
    /// `X_{n+1/2}` for two-stage methods.
    pub leading_point: Option<Vector>,
    pub oracle_calls: u32,
}

fn check_stepsize(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::ContractViolation(format!("{name} must be positive and finite, got {value}")))
    }
}

/// `X_{n+1/2} = X_n − γ_n V̂_n`, `X_{n+1} = X_n − η_n V̂_{n+1/2}`.
pub fn dseg_step<O: Oracle + ?Sized>(
    state: &SolverState,
    problem: &ProblemInstance,
    oracle: &O,
    gamma: f64,
    eta: f64,
    streams: &RunStreams,
) -> Result<StepReport> {
    check_stepsize("gamma", gamma)?;
    check_stepsize("eta", eta)?;
    if eta > gamma {
        return Err(Error::ContractViolation(format!(
            "update stepsize {eta} exceeds exploration stepsize {gamma}"
        )));
    }
    let n = state.step_index;
    let x = &state.iterate;
    let explore = oracle.sample(problem, x, &mut streams.stream(n, Phase::Explore))?;
    let leading = x - explore.feedback * gamma;
    let update = oracle.sample(problem, &leading, &mut streams.stream(n, Phase::Update))?;
    let next = x - update.feedback * eta;
    Ok(StepReport {
        new_state: state.advance(next),
        leading_point: Some(leading),
        oracle_calls: 2,
    })
}

/// `X_{n+1} = X_n − η_n V̂_n − γ_n (V̂_n − V̂_{n−1})` with `V̂₀ = 0`.
pub fn og_step<O: Oracle + ?Sized>(
    state: &SolverState,
    problem: &ProblemInstance,
    oracle: &O,
    gamma: f64,
    eta: f64,
    streams: &RunStreams,
) -> Result<StepReport> {
    check_stepsize("gamma", gamma)?;
    check_stepsize("eta", eta)?;
    let n = state.step_index;
    let x = &state.iterate;
    let sample = oracle.sample(problem, x, &mut streams.stream(n, Phase::Explore))?;
    let previous = state.previous_feedback();
    let next = x - &sample.feedback * (eta + gamma) + previous * gamma;
    let mut new_state = state.advance(next);
    new_state.last_feedback = Some(sample.feedback);
    new_state.last_gamma = Some(gamma);
    Ok(StepReport {
        new_state,
        leading_point: None,
        oracle_calls: 1,
    })
}

/// OG residual iterate `X_n + γ_{n−1} V̂_{n−1}`.
pub fn residual_iterate(state: &SolverState) -> Result<Vector> {
    match (&state.last_feedback, state.last_gamma) {
        (Some(v), Some(g)) if state.step_index > 1 => Ok(&state.iterate + v * g),
        _ => Err(Error::NoHistory),
    }
}

/// `X_{n+1/2} = X_n − γ_n V̂_{n−1/2}`, `X_{n+1} = X_n − η_n V̂_{n+1/2}` with `V̂_{1/2} = 0`.
pub fn dspeg_step<O: Oracle + ?Sized>(
    state: &SolverState,
    problem: &ProblemInstance,
    oracle: &O,
    gamma: f64,
    eta: f64,
    streams: &RunStreams,
) -> Result<StepReport> {
    check_stepsize("gamma", gamma)?;
    check_stepsize("eta", eta)?;
    let n = state.step_index;
    let x = &state.iterate;
    let leading = x - state.previous_feedback() * gamma;
    let sample = oracle.sample(problem, &leading, &mut streams.stream(n, Phase::Explore))?;
    let next = x - &sample.feedback * eta;
    let mut new_state = state.advance(next);
    new_state.last_feedback = Some(sample.feedback);
    new_state.last_gamma = Some(gamma);
    Ok(StepReport {
        new_state,
        leading_point: Some(leading),
        oracle_calls: 1,
    })
}

/// How SHGD turns its two oracle samples into a direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShgdEstimator {
    /// `Jᵀ V̂⁽¹⁾`.
    #[default]
    FirstSample,
    /// `Jᵀ (V̂⁽¹⁾ + V̂⁽²⁾) / 2`.
    Averaged,
}

/// `X_{n+1} = X_n − η_n Jᵀ V̂`, an unbiased step on `½‖V‖²` for constant `J`.
pub fn shgd_step<O: Oracle + ?Sized>(
    state: &SolverState,
    problem: &ProblemInstance,
    oracle: &O,
    eta: f64,
    estimator: ShgdEstimator,
    streams: &RunStreams,
) -> Result<StepReport> {
    check_stepsize("eta", eta)?;
    let jacobian = problem
        .constant_jacobian()
        .ok_or(Error::ConstantJacobianRequired("stochastic Hamiltonian gradient descent"))?;
    let n = state.step_index;
    let x = &state.iterate;
    let first = oracle.sample(problem, x, &mut streams.stream(n, Phase::Explore))?;
    let second = oracle.sample(problem, x, &mut streams.stream(n, Phase::Extra))?;
    let feedback = match estimator {
        ShgdEstimator::FirstSample => first.feedback,
        ShgdEstimator::Averaged => (first.feedback + second.feedback) * 0.5,
    };
    let direction = jacobian.tr_mul(&feedback);
    Ok(StepReport {
        new_state: state.advance(x - direction * eta),
        leading_point: None,
        oracle_calls: 2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchoredParams {
    pub gamma: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for AnchoredParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            beta: 0.7,
            kappa: 0.9,
        }
    }
}

impl AnchoredParams {
    pub fn validate(&self) -> Result<()> {
        let open_half = |v: f64| v > 0.5 && v < 1.0;
        if !open_half(self.beta) || !open_half(self.kappa) {
            return Err(Error::Config(format!(
                "anchored descent needs beta, kappa in (1/2, 1), got {} and {}",
                self.beta, self.kappa
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("anchoring strength must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// `X_{n+1} = X_n − ((1−β)/n^β) V̂_n + ((1−β)γ/n^κ)(X₁ − X_n)`.
pub fn anchored_step<O: Oracle + ?Sized>(
    state: &SolverState,
    problem: &ProblemInstance,
    oracle: &O,
    params: &AnchoredParams,
    streams: &RunStreams,
) -> Result<StepReport> {
    params.validate()?;
    let anchor = state
        .anchor
        .as_ref()
        .ok_or_else(|| Error::ContractViolation("anchored descent needs the initial point recorded".into()))?;
    let n = state.step_index;
    let nf = n as f64;
    let x = &state.iterate;
    let sample = oracle.sample(problem, x, &mut streams.stream(n, Phase::Explore))?;
    let step = (1.0 - params.beta) / nf.powf(params.beta);
    let pull = (1.0 - params.beta) * params.gamma / nf.powf(params.kappa);
    let next = x - sample.feedback * step + (anchor - x) * pull;
    Ok(StepReport {
        new_state: state.advance(next),
        leading_point: None,
        oracle_calls: 1,
    })
}

#[cfg(test)]
mod tests;
