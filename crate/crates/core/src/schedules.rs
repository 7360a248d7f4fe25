//! Power-law stepsize policies `c / (n + b)^r` and the admissibility region
//! of double-stepsize schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing exponents against the region boundaries.
const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepsizePolicy {
    scale: f64,
    offset: f64,
    exponent: f64,
}

impl StepsizePolicy {
    pub fn new(scale: f64, offset: f64, exponent: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("stepsize scale must be positive, got {scale}")));
        }
        if !(offset >= 0.0 && offset.is_finite()) {
            return Err(Error::Config(format!("stepsize offset must be non-negative, got {offset}")));
        }
        if !(0.0..=1.0).contains(&exponent) {
            return Err(Error::Config(format!("stepsize exponent must lie in [0, 1], got {exponent}")));
        }
        Ok(Self { scale, offset, exponent })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(value, 0.0, 0.0)
    }

    /// Policy whose first value is `first_value`: `scale = first_value·(1 + b)^r`.
    pub fn from_initial(first_value: f64, offset: f64, exponent: f64) -> Result<Self> {
        Self::new(first_value * (1.0 + offset).powf(exponent), offset, exponent)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Stepsize at iteration `n ≥ 1`.
    pub fn value(&self, n: u64) -> f64 {
        debug_assert!(n >= 1, "stepsizes are indexed from 1");
        if self.exponent == 0.0 {
            return self.scale;
        }
        self.scale / (n as f64 + self.offset).powf(self.exponent)
    }
}

/// Exploration (`γ_n`) and update (`η_n`) schedules with `γ_n ≥ η_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePair {
    exploration: StepsizePolicy,
    update: StepsizePolicy,
}

impl SchedulePair {
    pub fn new(exploration: StepsizePolicy, update: StepsizePolicy) -> Result<Self> {
        if update.exponent + BOUNDARY_EPS < exploration.exponent {
            return Err(Error::ContractViolation(format!(
                "update exponent {} is below exploration exponent {}: eventually η_n > γ_n",
                update.exponent, exploration.exponent
            )));
        }
        for k in 0..=9 {
            let n = 10u64.pow(k);
            let (g, e) = (exploration.value(n), update.value(n));
            if e > g * (1.0 + BOUNDARY_EPS) {
                return Err(Error::ContractViolation(format!(
                    "update stepsize exceeds exploration stepsize at n = {n}: η_n = {e} > γ_n = {g}"
                )));
            }
        }
        Ok(Self { exploration, update })
    }

    /// Vanilla extragradient: one schedule for both steps.
    pub fn single(policy: StepsizePolicy) -> Self {
        Self {
            exploration: policy,
            update: policy,
        }
    }

    pub fn constant(gamma: f64, eta: f64) -> Result<Self> {
        Self::new(StepsizePolicy::constant(gamma)?, StepsizePolicy::constant(eta)?)
    }

    pub fn exploration(&self) -> &StepsizePolicy {
        &self.exploration
    }

    pub fn update(&self) -> &StepsizePolicy {
        &self.update
    }

    /// `(γ_n, η_n)`.
    pub fn at(&self, n: u64) -> (f64, f64) {
        (self.exploration.value(n), self.update.value(n))
    }

    pub fn classify(&self) -> Assumption4Report {
        classify_assumption4(self.exploration.exponent, self.update.exponent)
    }

    /// Largest exploration stepsize over the run; policies are non-increasing.
    pub fn max_exploration(&self) -> f64 {
        self.exploration.value(1)
    }

    /// Rescales the exploration schedule so that `γ₁ ≤ limit`, shrinking the
    /// update schedule too if it would overtake the exploration one.
    /// Returns whether anything changed.
    pub fn clamp_exploration(&mut self, limit: f64) -> Result<bool> {
        let g1 = self.exploration.value(1);
        if g1 <= limit {
            return Ok(false);
        }
        self.exploration.scale *= limit / g1;
        let g1 = self.exploration.value(1);
        let e1 = self.update.value(1);
        if e1 > g1 {
            let same_shape =
                self.update.offset == self.exploration.offset && self.update.exponent == self.exploration.exponent;
            if same_shape {
                self.update.scale = self.exploration.scale;
            } else {
                self.update.scale *= g1 / e1;
                if self.update.value(1) > g1 {
                    self.update.scale *= 1.0 - f64::EPSILON;
                }
            }
        }
        *self = Self::new(self.exploration, self.update)?;
        Ok(true)
    }
}

/// The four ways an exponent pair can fall outside the admissible region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption4Condition {
    /// `Σ γ_n η_n = ∞` fails (`r_γ + r_η > 1`).
    SumProductDiverges,
    /// `Σ η_n² < ∞` fails (`2 r_η ≤ 1`).
    UpdateSquareSummable,
    /// `Σ γ_n² η_n < ∞` fails (`2 r_γ + r_η ≤ 1`).
    ExploreSqUpdateSummable,
    /// `r_η < r_γ`: the update schedule would overtake the exploration one.
    OrderingViolated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption4Report {
    pub admissible: bool,
    pub violated_conditions: Vec<Assumption4Condition>,
}

/// Admissibility of `γ_n ∝ n^{-r_γ}`, `η_n ∝ n^{-r_η}`.
///
/// The region is `r_γ + r_η ≤ 1`, `2r_η > 1`, `2r_γ + r_η > 1` together with
/// `r_η ≥ r_γ`. Strict inequalities met with equality are inadmissible.
pub fn classify_assumption4(r_gamma: f64, r_eta: f64) -> Assumption4Report {
    let mut violated = Vec::new();
    if r_gamma + r_eta > 1.0 + BOUNDARY_EPS {
        violated.push(Assumption4Condition::SumProductDiverges);
    }
    if 2.0 * r_eta <= 1.0 + BOUNDARY_EPS {
        violated.push(Assumption4Condition::UpdateSquareSummable);
    }
    if 2.0 * r_gamma + r_eta <= 1.0 + BOUNDARY_EPS {
        violated.push(Assumption4Condition::ExploreSqUpdateSummable);
    }
    if r_eta + BOUNDARY_EPS < r_gamma {
        violated.push(Assumption4Condition::OrderingViolated);
    }
    Assumption4Report {
        admissible: violated.is_empty(),
        violated_conditions: violated,
    }
}

/// Exponent `ρ̃` of the update schedule that gives the best general rate.
pub const OPTIMAL_UPDATE_EXPONENT: f64 = 2.0 / 3.0;

/// `γ_n = γ/(n+b)^{1/3}`, `η_n = η/(n+b)^{2/3}`.
pub fn theorem2_optimal_pair(gamma_scale: f64, eta_scale: f64, offset: f64) -> Result<SchedulePair> {
    SchedulePair::new(
        StepsizePolicy::new(gamma_scale, offset, 1.0 - OPTIMAL_UPDATE_EXPONENT)?,
        StepsizePolicy::new(eta_scale, offset, OPTIMAL_UPDATE_EXPONENT)?,
    )
}

/// Schedule description: first values plus shared offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub gamma1: f64,
    pub eta1: f64,
    #[serde(default)]
    pub offset_b: f64,
    #[serde(default)]
    pub r_gamma: f64,
    #[serde(default)]
    pub r_eta: f64,
}

impl ScheduleSpec {
    pub fn to_pair(&self) -> Result<SchedulePair> {
        SchedulePair::new(
            StepsizePolicy::from_initial(self.gamma1, self.offset_b, self.r_gamma)?,
            StepsizePolicy::from_initial(self.eta1, self.offset_b, self.r_eta)?,
        )
    }
}

/// Convergence verdicts from direct partial sums of `n^{-p}`.
pub mod series {
    /// Ratio of the last two decade increments of `Σ_{n ≤ n_max} n^{-p}` for
    /// each exponent in `exponents`. A ratio below one indicates convergence.
    ///
    /// `n_max` must be a power of ten of at least 100.
    pub fn decade_ratios(exponents: &[f64], n_max: u64) -> Vec<f64> {
        let hi_start = n_max / 10;
        let lo_start = hi_start / 10;
        let mut lo = vec![0.0f64; exponents.len()];
        let mut hi = vec![0.0f64; exponents.len()];
        for n in (lo_start + 1)..=n_max {
            let ln = (n as f64).ln();
            let target = if n > hi_start { &mut hi } else { &mut lo };
            for (acc, &p) in target.iter_mut().zip(exponents) {
                *acc += (-p * ln).exp();
            }
        }
        hi.iter().zip(&lo).map(|(h, l)| h / l).collect()
    }

    /// `true` when the partial sums of `n^{-p}` look convergent.
    pub fn looks_convergent(ratio: f64) -> bool {
        ratio < 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn value_examples() {
        assert_eq!(StepsizePolicy::new(2.0, 0.0, 1.0).unwrap().value(4), 0.5);
        let c = StepsizePolicy::new(0.7, 3.0, 0.0).unwrap();
        assert!([1, 10, 1000, u64::MAX / 2].iter().all(|&n| c.value(n) == 0.7));
        assert_relative_eq!(StepsizePolicy::new(1.0, 19.0, 1.0).unwrap().value(1), 0.05, max_relative = 1e-15);
    }

    #[test]
    fn from_initial_examples() {
        let p = StepsizePolicy::from_initial(1.0, 19.0, 0.5).unwrap();
        assert_relative_eq!(p.value(1), 1.0, max_relative = 1e-15);
        assert_eq!(StepsizePolicy::from_initial(0.3, 19.0, 0.0).unwrap().scale(), 0.3);
        let p = StepsizePolicy::from_initial(0.1, 19.0, 0.9).unwrap();
        assert_relative_eq!(p.value(1), 0.1, max_relative = 1e-15);
        // 0.1 · (20/100)^0.9
        assert_relative_eq!(p.value(81), 0.1 * 0.2f64.powf(0.9), max_relative = 1e-14);
        assert!((p.value(81) - 0.023492).abs() < 5e-7);
    }

    #[test]
    fn invalid_policies_are_rejected() {
        assert!(StepsizePolicy::new(0.0, 0.0, 0.5).is_err());
        assert!(StepsizePolicy::new(1.0, -1.0, 0.5).is_err());
        assert!(StepsizePolicy::new(1.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn classification_examples() {
        assert!(classify_assumption4(1.0 / 3.0, 2.0 / 3.0).admissible);
        assert!(classify_assumption4(0.1, 0.9).admissible);
        for r in [0.0, 0.25, 0.5, 0.5 + 1e-9, 0.75, 1.0] {
            assert!(!classify_assumption4(r, r).admissible, "r = {r}");
        }
        let report = classify_assumption4(0.6, 0.3);
        assert!(report.violated_conditions.contains(&Assumption4Condition::OrderingViolated));
        assert!(report.violated_conditions.contains(&Assumption4Condition::UpdateSquareSummable));
    }

    #[test]
    fn boundaries_follow_strictness() {
        // r_γ + r_η = 1 is admissible; 2r_η = 1 and 2r_γ + r_η = 1 are not.
        assert!(classify_assumption4(0.4, 0.6).admissible);
        assert_eq!(
            classify_assumption4(0.3, 0.5).violated_conditions,
            vec![Assumption4Condition::UpdateSquareSummable]
        );
        assert_eq!(
            classify_assumption4(0.25, 0.5).violated_conditions,
            vec![
                Assumption4Condition::UpdateSquareSummable,
                Assumption4Condition::ExploreSqUpdateSummable
            ]
        );
        assert_eq!(
            classify_assumption4(0.0, 1.0).violated_conditions,
            vec![Assumption4Condition::ExploreSqUpdateSummable]
        );
        assert_eq!(
            classify_assumption4(0.3, 0.8).violated_conditions,
            vec![Assumption4Condition::SumProductDiverges]
        );
    }

    #[test]
    fn optimal_pair() {
        let pair = theorem2_optimal_pair(1.0, 0.5, 19.0).unwrap();
        assert_relative_eq!(pair.exploration().exponent(), 1.0 / 3.0);
        assert_relative_eq!(pair.update().exponent(), 2.0 / 3.0);
        assert!(pair.classify().admissible);
        for n in [1u64, 7, 100, 12345] {
            let (g, e) = pair.at(n);
            assert_relative_eq!(g * e, 0.5 / (n as f64 + 19.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn pair_ordering_is_enforced() {
        let g = StepsizePolicy::new(1.0, 0.0, 0.5).unwrap();
        let e = StepsizePolicy::new(1.0, 0.0, 0.2).unwrap();
        assert!(matches!(SchedulePair::new(g, e), Err(Error::ContractViolation(_))));
        assert!(SchedulePair::constant(0.1, 0.2).is_err());
        assert!(SchedulePair::constant(0.2, 0.2).is_ok());
    }

    #[test]
    fn clamping_preserves_order() {
        let mut pair = ScheduleSpec {
            gamma1: 1.0,
            eta1: 0.95,
            offset_b: 19.0,
            r_gamma: 0.0,
            r_eta: 1.0,
        }
        .to_pair()
        .unwrap();
        assert!(pair.clamp_exploration(0.9).unwrap());
        let (g, e) = pair.at(1);
        assert_relative_eq!(g, 0.9, max_relative = 1e-14);
        assert!(e <= g);
        assert!(!pair.clamp_exploration(2.0).unwrap());

        for limit in [0.9, 0.4678925587279788, 1.0 / 3.0] {
            let mut equal = ScheduleSpec {
                gamma1: 1.0,
                eta1: 1.0,
                offset_b: 49.0,
                r_gamma: 1.0 / 3.0,
                r_eta: 1.0 / 3.0,
            }
            .to_pair()
            .unwrap();
            assert!(equal.clamp_exploration(limit).unwrap());
            assert_eq!(equal.at(7).0, equal.at(7).1);
        }
    }

    #[test]
    fn series_probe_separates_convergent_exponents() {
        let ratios = series::decade_ratios(&[0.5, 0.95, 1.05, 2.0], 100_000);
        let verdicts: Vec<bool> = ratios.iter().map(|&r| series::looks_convergent(r)).collect();
        assert_eq!(verdicts, vec![false, false, true, true]);
    }

    proptest! {
        #[test]
        fn values_positive_and_non_increasing(
            scale in 1e-3f64..10.0, offset in 0.0f64..100.0, exponent in 0.0f64..=1.0, n in 1u64..1_000_000,
        ) {
            let p = StepsizePolicy::new(scale, offset, exponent).unwrap();
            prop_assert!(p.value(n) > 0.0);
            prop_assert!(p.value(n + 1) <= p.value(n));
        }

        #[test]
        fn from_initial_round_trip(first in 1e-4f64..10.0, offset in 0.0f64..1000.0, exponent in 0.0f64..=1.0) {
            let p = StepsizePolicy::from_initial(first, offset, exponent).unwrap();
            prop_assert!((p.value(1) - first).abs() <= 1e-15 * first);
        }

        #[test]
        fn admissible_pairs_have_non_decreasing_ratio(
            r_eta in 0.501f64..=1.0, u in 0.0f64..=1.0, g in 0.1f64..2.0, b in 0.0f64..50.0,
        ) {
            // Map u onto the admissible band of r_γ for this r_η.
            let lo = (1.0 - r_eta) / 2.0 + 1e-3;
            let hi = r_eta.min(1.0 - r_eta);
            prop_assume!(hi > lo);
            let r_gamma = lo + u * (hi - lo);
            prop_assert!(classify_assumption4(r_gamma, r_eta).admissible);
            let pair = SchedulePair::new(
                StepsizePolicy::new(g, b, r_gamma).unwrap(),
                StepsizePolicy::new(g * 0.5, b, r_eta).unwrap(),
            ).unwrap();
            let mut last = 0.0;
            for n in [1u64, 2, 5, 10, 100, 1000, 100_000, 10_000_000] {
                let (gn, en) = pair.at(n);
                let ratio = gn / en;
                prop_assert!(ratio >= last * (1.0 - 1e-12));
                last = ratio;
            }
        }
    }
}
