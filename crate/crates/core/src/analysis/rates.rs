use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemInstance;

/// Which family of constants to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremSelector {
    /// Lipschitz, variationally stable fields with an error bound.
    General,
    /// Affine fields.
    Affine,
}

/// Constant-stepsize bound `E dist² ≤ (1 − Λ)^{n−1} dist₁² + M/Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub selector: TheoremSelector,
    pub m_const: f64,
    pub lambda_const: f64,
    pub predicted_floor: f64,
    /// Polynomial decay exponent; zero in the constant-stepsize regime.
    pub predicted_exponent: f64,
}

/// Polynomial rate for decreasing stepsizes, with its side conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub exponent: f64,
    pub conditions_hold: bool,
    pub conditions: Vec<String>,
}

/// Constants for DSEG with scales `γ`, `η` and total noise variance `σ²`.
pub fn predict_rate_constants(
    problem: &ProblemInstance,
    gamma: f64,
    eta: f64,
    sigma_sq: f64,
    a: f64,
    selector: TheoremSelector,
) -> Result<RatePrediction> {
    let tau = problem.error_bound();
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::ErrorBoundUnknown);
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Config(format!("a must lie in (0, 1), got {a}")));
    }
    if !(gamma > 0.0 && eta > 0.0 && sigma_sq >= 0.0) {
        return Err(Error::Config(format!(
            "need γ, η > 0 and σ² ≥ 0, got {gamma}, {eta}, {sigma_sq}"
        )));
    }
    let l = problem.lipschitz();
    if gamma * l > a * (1.0 + 1e-12) {
        return Err(Error::ContractViolation(format!("γ = {gamma} exceeds a/L = {}", a / l)));
    }
    let m_const = match selector {
        TheoremSelector::General => {
            (2.0 * gamma * gamma * eta * l + gamma.powi(3) * eta * l * l + eta * eta) * sigma_sq
        }
        TheoremSelector::Affine => eta * eta * (1.0 + a * a) * sigma_sq,
    };
    let lambda_const = gamma * eta * tau * tau * (1.0 - a * a);
    Ok(RatePrediction {
        selector,
        m_const,
        lambda_const,
        predicted_floor: m_const / lambda_const,
        predicted_exponent: 0.0,
    })
}

impl RatePrediction {
    /// Rate when the update stepsize decays like `1/(n + b)^{r_η}`.
    ///
    /// General fields pair `r_η ∈ (1/2, 1)` with `r_γ = 1 − r_η`; affine
    /// fields use constant `γ` and `r_η = 1`.
    pub fn decay(&self, update_exponent: f64, offset: f64, gamma: f64, eta: f64) -> Result<DecayReport> {
        match self.selector {
            TheoremSelector::General => {
                if !(update_exponent > 0.5 && update_exponent < 1.0) {
                    return Err(Error::Config(format!(
                        "update exponent must lie in (1/2, 1), got {update_exponent}"
                    )));
                }
                let rho = (1.0 - update_exponent).min(2.0 * update_exponent - 1.0);
                let holds = self.lambda_const > rho;
                Ok(DecayReport {
                    exponent: rho,
                    conditions_hold: holds,
                    conditions: vec![format!(
                        "γητ²(1−a²) = {} > ρ = {rho}: {holds}",
                        self.lambda_const
                    )],
                })
            }
            TheoremSelector::Affine => {
                if (update_exponent - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "the affine rate needs update exponent 1, got {update_exponent}"
                    )));
                }
                let strong = self.lambda_const > 1.0;
                let offset_ok = offset > eta / gamma;
                Ok(DecayReport {
                    exponent: 1.0,
                    conditions_hold: strong && offset_ok,
                    conditions: vec![
                        format!("γητ²(1−a²) = {} > 1: {strong}", self.lambda_const),
                        format!("b = {offset} > η/γ = {}: {offset_ok}", eta / gamma),
                    ],
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_affine, make_planar};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn planar_affine_constants() {
        let p = make_planar();
        let r = predict_rate_constants(&p, 0.45, 0.1, 0.25, 0.9, TheoremSelector::Affine).unwrap();
        assert_abs_diff_eq!(r.lambda_const, 0.00855, epsilon = 1e-15);
        assert_abs_diff_eq!(r.m_const, 0.004525, epsilon = 1e-15);
        assert_abs_diff_eq!(r.predicted_floor, 0.004525 / 0.00855, epsilon = 1e-12);
        assert!((r.predicted_floor - 0.5292).abs() < 1e-4);
    }

    #[test]
    fn general_constants() {
        let p = make_planar();
        let (g, e, s) = (0.5, 0.2, 0.3);
        let r = predict_rate_constants(&p, g, e, s, 0.9, TheoremSelector::General).unwrap();
        assert_abs_diff_eq!(r.m_const, (2.0 * 0.25 * 0.2 + 0.125 * 0.2 + 0.04) * 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r.lambda_const, 0.5 * 0.2 * 0.19, epsilon = 1e-15);
    }

    #[test]
    fn floor_vanishes_without_noise_and_is_linear_in_eta() {
        let p = make_planar();
        let r = predict_rate_constants(&p, 0.45, 0.1, 0.0, 0.9, TheoremSelector::Affine).unwrap();
        assert_eq!(r.predicted_floor, 0.0);
        for eta in [1e-1, 1e-2, 1e-3, 1e-4] {
            let r = predict_rate_constants(&p, 0.45, eta, 0.25, 0.9, TheoremSelector::Affine).unwrap();
            let expected = eta * (1.0 + 0.81) * 0.25 / (0.45 * 0.19);
            assert_abs_diff_eq!(r.predicted_floor, expected, epsilon = 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn errors() {
        let zero = make_affine(DMatrix::zeros(2, 2), DVector::zeros(2)).unwrap();
        assert!(matches!(
            predict_rate_constants(&zero, 0.1, 0.1, 0.25, 0.9, TheoremSelector::Affine),
            Err(Error::ErrorBoundUnknown)
        ));
        let p = make_planar();
        assert!(predict_rate_constants(&p, 0.95, 0.1, 0.25, 0.9, TheoremSelector::Affine).is_err());
        assert!(predict_rate_constants(&p, 0.5, 0.1, 0.25, 1.0, TheoremSelector::Affine).is_err());
    }

    #[test]
    fn decay_reports() {
        let p = make_planar();
        let r = predict_rate_constants(&p, 0.9, 0.5, 0.25, 0.9, TheoremSelector::General).unwrap();
        let d = r.decay(2.0 / 3.0, 19.0, 0.9, 0.5).unwrap();
        assert_abs_diff_eq!(d.exponent, 1.0 / 3.0, epsilon = 1e-15);
        assert!(!d.conditions_hold);
        assert!(r.decay(0.4, 19.0, 0.9, 0.5).is_err());

        let r = predict_rate_constants(&p, 0.9, 30.0, 0.25, 0.9, TheoremSelector::Affine).unwrap();
        let d = r.decay(1.0, 40.0, 0.9, 30.0).unwrap();
        assert!(d.conditions_hold, "{:?}", d.conditions);
        assert!(!r.decay(1.0, 19.0, 0.9, 30.0).unwrap().conditions_hold);
    }
}
