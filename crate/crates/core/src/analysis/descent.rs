//! Monte-Carlo check of the one-step DSEG descent inequality
//!
//! ```text
//! E‖X₊ − x*‖² ≤ (1 + Cς²)‖X − x*‖² − 2η E⟨V(X½), X½ − x*⟩
//!              − γη(1 − γ²L² − 8γης²)‖V(X)‖² + Cσ²
//! C = 4γ²ηL + 2γ³ηL² + 4η² + 16γ²η²ς²
//! ```
//!
//! Both expectations are estimated from the same simulated steps, so the
//! check works on the paired difference `‖X₊ − x*‖² + 2η⟨V(X½), X½ − x*⟩`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::OracleModel;
use crate::problems::{ProblemInstance, Vector};
use crate::rng::RunStreams;
use crate::solvers::{dseg_step, SolverState};

/// Samples per parallel work unit. Blocks are reduced in index order.
pub const DESCENT_BLOCK: usize = 4096;

const STANDARD_ERRORS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentCheck {
    pub lhs_estimate: f64,
    pub rhs_estimate: f64,
    /// `rhs − lhs`; negative values are within tolerance while
    /// `−margin ≤ 4 · standard_error`.
    pub margin: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub passes: bool,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
    lhs_sum: f64,
    inner_sum: f64,
}

impl Moments {
    fn push(&mut self, lhs: f64, inner: f64, eta: f64) {
        let d = lhs + 2.0 * eta * inner;
        self.count += 1.0;
        let delta = d - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (d - self.mean);
        self.lhs_sum += lhs;
        self.inner_sum += inner;
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
            lhs_sum: self.lhs_sum + other.lhs_sum,
            inner_sum: self.inner_sum + other.inner_sum,
        }
    }
}

/// `σ²` and `ς²` in total-norm units bounding `E‖U‖² ≤ σ² + ς² dist²`.
fn variance_bounds(problem: &ProblemInstance, oracle: &OracleModel) -> Result<(f64, f64)> {
    let sigma_sq = oracle
        .total_variance(problem)
        .ok_or_else(|| Error::UnsupportedMetric("descent check needs additive noise".into()))?;
    let varcontrol_sq = oracle.total_varcontrol(problem).powi(2);
    // (σ + ς·d)² ≤ 2σ² + 2ς²d² when both parts are present.
    if sigma_sq > 0.0 && varcontrol_sq > 0.0 {
        Ok((2.0 * sigma_sq, 2.0 * varcontrol_sq))
    } else {
        Ok((sigma_sq, varcontrol_sq))
    }
}

/// Estimates both sides of the descent inequality at `point` from
/// `mc_samples` independent DSEG steps.
pub fn check_descent_lemma(
    problem: &ProblemInstance,
    oracle: &OracleModel,
    point: &Vector,
    gamma: f64,
    eta: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<DescentCheck> {
    oracle.validate(problem)?;
    problem.check_dim(point)?;
    if mc_samples == 0 {
        return Err(Error::InsufficientData("descent check needs at least one sample".into()));
    }
    let l = problem.lipschitz();
    if gamma * l >= 1.0 {
        return Err(Error::ContractViolation(format!("γL = {} must stay below 1", gamma * l)));
    }
    let (sigma_sq, varcontrol_sq) = variance_bounds(problem, oracle)?;
    let anchor = problem.project_to_solution(point)?;
    let dist_sq = (point - &anchor).norm_squared();
    let field_sq = problem.evaluate_field(point)?.norm_squared();

    let c = 4.0 * gamma * gamma * eta * l
        + 2.0 * gamma.powi(3) * eta * l * l
        + 4.0 * eta * eta
        + 16.0 * gamma * gamma * eta * eta * varcontrol_sq;
    let deterministic = (1.0 + c * varcontrol_sq) * dist_sq
        - gamma * eta * (1.0 - gamma * gamma * l * l - 8.0 * gamma * eta * varcontrol_sq) * field_sq
        + c * sigma_sq;

    let streams = RunStreams::new(seed);
    let blocks = mc_samples.div_ceil(DESCENT_BLOCK);
    let partials: Vec<Result<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            let start = b * DESCENT_BLOCK;
            let end = (start + DESCENT_BLOCK).min(mc_samples);
            let mut state = SolverState::new(point.clone());
            for i in start..end {
                state.step_index = i as u64 + 1;
                let report = dseg_step(&state, problem, oracle, gamma, eta, &streams)?;
                let leading = report.leading_point.expect("DSEG reports its leading point");
                let lhs = (&report.new_state.iterate - &anchor).norm_squared();
                let inner = problem.evaluate_field(&leading)?.dot(&(&leading - &anchor));
                m.push(lhs, inner, eta);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in partials {
        total = total.merge(p?);
    }

    let n = total.count;
    let variance = if n > 1.0 { (total.m2 / (n - 1.0)).max(0.0) } else { 0.0 };
    let standard_error = (variance / n).sqrt();
    let lhs_estimate = total.lhs_sum / n;
    let rhs_estimate = deterministic - 2.0 * eta * total.inner_sum / n;
    let slack = STANDARD_ERRORS * standard_error + 1e-12 * deterministic.abs().max(1.0);
    Ok(DescentCheck {
        lhs_estimate,
        rhs_estimate,
        margin: deterministic - total.mean,
        standard_error,
        samples: mc_samples,
        passes: total.mean <= deterministic + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_bilinear, make_planar};

    #[test]
    fn deterministic_case_has_no_monte_carlo_error() {
        let p = make_planar();
        let c = check_descent_lemma(&p, &OracleModel::exact(), &Vector::from_column_slice(&[1.0, 0.0]), 0.3, 0.1, 100, 0)
            .unwrap();
        assert!(c.passes);
        assert!(c.standard_error < 1e-12);
        assert!(c.margin >= -1e-12);
    }

    #[test]
    fn at_the_solution_only_noise_remains() {
        let p = make_planar();
        let o = OracleModel::first_block(0.5);
        let c = check_descent_lemma(&p, &o, &Vector::zeros(2), 0.3, 0.1, 20_000, 4).unwrap();
        assert!(c.passes);
        let cn = 4.0 * 0.09 * 0.1 + 2.0 * 0.027 * 0.1 + 4.0 * 0.01;
        assert!((c.rhs_estimate - cn * 0.25).abs() < 1e-3 + 4.0 * c.standard_error);
        assert!(c.lhs_estimate <= cn * 0.25 + 4.0 * c.standard_error);
    }

    #[test]
    fn planar_example_passes() {
        let p = make_planar();
        let o = OracleModel::first_block(0.5);
        let c = check_descent_lemma(&p, &o, &Vector::from_column_slice(&[1.0, 0.0]), 0.3, 0.1, 200_000, 1).unwrap();
        assert!(c.passes, "{c:?}");
    }

    #[test]
    fn reduction_is_deterministic() {
        let p = make_bilinear(3, 2).unwrap();
        let o = OracleModel::isotropic(0.2).with_varcontrol(0.1);
        let x = Vector::from_element(6, 0.5);
        let a = check_descent_lemma(&p, &o, &x, 0.2, 0.1, 10_000, 9).unwrap();
        let b = check_descent_lemma(&p, &o, &x, 0.2, 0.1, 10_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.passes, "{a:?}");
    }

    #[test]
    fn rejects_large_exploration_step() {
        let p = make_planar();
        let err = check_descent_lemma(&p, &OracleModel::exact(), &Vector::zeros(2), 1.0, 0.1, 10, 0).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }
}
