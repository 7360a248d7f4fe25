use std::cell::{Cell, RefCell};

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::oracle::{OracleModel, OracleSample};
use crate::problems::{make_affine, make_bilinear, make_planar, make_strongly_convex_concave};
use crate::schedules::{SchedulePair, StepsizePolicy};

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

fn streams() -> RunStreams {
    RunStreams::new(11)
}

struct Counting<O> {
    inner: O,
    calls: Cell<u32>,
}

impl<O: Oracle> Oracle for Counting<O> {
    fn sample(&self, problem: &ProblemInstance, point: &Vector, rng: &mut ChaCha8Rng) -> Result<OracleSample> {
        self.calls.set(self.calls.get() + 1);
        self.inner.sample(problem, point, rng)
    }
}

/// Returns the exact field plus a pre-recorded noise vector per call.
struct Replay {
    noise: Vec<Vector>,
    cursor: Cell<usize>,
    seen: RefCell<Vec<Vector>>,
}

impl Replay {
    fn new(noise: Vec<Vector>) -> Self {
        Self {
            noise,
            cursor: Cell::new(0),
            seen: RefCell::new(Vec::new()),
        }
    }
}

impl Oracle for Replay {
    fn sample(&self, problem: &ProblemInstance, point: &Vector, _rng: &mut ChaCha8Rng) -> Result<OracleSample> {
        let k = self.cursor.get();
        self.cursor.set(k + 1);
        self.seen.borrow_mut().push(point.clone());
        Ok(OracleSample {
            feedback: problem.evaluate_field(point)? + &self.noise[k],
            draws_consumed: 0,
        })
    }
}

#[test]
fn dseg_planar_examples() {
    let p = make_planar();
    let exact = OracleModel::exact();
    let s = SolverState::new(v(&[1.0, 0.0]));

    let r = dseg_step(&s, &p, &exact, 0.1, 0.1, &streams()).unwrap();
    let lead = r.leading_point.unwrap();
    assert_abs_diff_eq!(lead[0], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(lead[1], 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate[0], 0.99, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate.norm_squared(), 0.9901, epsilon = 1e-12);

    let r = dseg_step(&s, &p, &exact, 0.5, 0.1, &streams()).unwrap();
    assert_abs_diff_eq!(r.new_state.iterate[0], 0.95, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate.norm_squared(), 0.9125, epsilon = 1e-12);
    assert_eq!(r.new_state.step_index, 2);
}

#[test]
fn dseg_rejects_update_above_exploration() {
    let p = make_planar();
    let s = SolverState::new(v(&[1.0, 0.0]));
    let err = dseg_step(&s, &p, &OracleModel::exact(), 0.1, 0.2, &streams()).unwrap_err();
    assert!(matches!(err, Error::ContractViolation(_)));
}

#[test]
fn steps_fix_solutions() {
    let p = make_bilinear(5, 3).unwrap();
    let exact = OracleModel::exact();
    let zero = Vector::zeros(10);
    let st = streams();
    let s = SolverState::initial(SolverKind::Anchored, zero.clone());
    for r in [
        dseg_step(&s, &p, &exact, 0.3, 0.1, &st).unwrap(),
        og_step(&s, &p, &exact, 0.3, 0.1, &st).unwrap(),
        dspeg_step(&s, &p, &exact, 0.3, 0.1, &st).unwrap(),
        shgd_step(&s, &p, &exact, 0.1, ShgdEstimator::FirstSample, &st).unwrap(),
        anchored_step(&s, &p, &exact, &AnchoredParams::default(), &st).unwrap(),
    ] {
        assert_eq!(r.new_state.iterate, zero);
    }
}

#[test]
fn og_and_residual_iterate_examples() {
    let p = make_planar();
    let s = SolverState::new(v(&[1.0, 0.0]));
    assert!(matches!(residual_iterate(&s), Err(Error::NoHistory)));
    let r = og_step(&s, &p, &OracleModel::exact(), 0.5, 0.1, &streams()).unwrap();
    assert_abs_diff_eq!(r.new_state.iterate[0], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.6, epsilon = 1e-15);
    let z = residual_iterate(&r.new_state).unwrap();
    assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(z[1], 0.1, epsilon = 1e-15);
}

#[test]
fn og_with_stationary_feedback_is_a_gradient_step() {
    let p = make_planar();
    let mut s = SolverState::new(v(&[1.0, 0.0]));
    s.step_index = 4;
    s.last_feedback = Some(v(&[0.0, -1.0]));
    s.last_gamma = Some(0.5);
    let r = og_step(&s, &p, &OracleModel::exact(), 0.5, 0.1, &streams()).unwrap();
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.1, epsilon = 1e-15);
}

#[test]
fn residual_iterate_with_zero_gamma_is_the_iterate() {
    let mut s = SolverState::new(v(&[0.3, -2.0]));
    s.step_index = 3;
    s.last_feedback = Some(v(&[5.0, 5.0]));
    s.last_gamma = Some(0.0);
    assert_eq!(residual_iterate(&s).unwrap(), s.iterate);
}

#[test]
fn dspeg_example() {
    let p = make_planar();
    let s = SolverState::new(v(&[1.0, 0.0]));
    let r = dspeg_step(&s, &p, &OracleModel::exact(), 0.5, 0.1, &streams()).unwrap();
    assert_eq!(r.leading_point.unwrap().as_slice(), &[1.0, 0.0]);
    assert_eq!(r.new_state.last_feedback.as_ref().unwrap().as_slice(), &[0.0, -1.0]);
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.1, epsilon = 1e-15);
}

#[test]
fn dspeg_with_current_feedback_matches_extragradient() {
    let p = make_planar();
    let x = v(&[0.7, -0.4]);
    let mut s = SolverState::new(x.clone());
    s.last_feedback = Some(p.evaluate_field(&x).unwrap());
    let exact = OracleModel::exact();
    let a = dspeg_step(&s, &p, &exact, 0.2, 0.2, &streams()).unwrap();
    let b = dseg_step(&SolverState::new(x), &p, &exact, 0.2, 0.2, &streams()).unwrap();
    assert_eq!(a.leading_point, b.leading_point);
    assert_eq!(a.new_state.iterate, b.new_state.iterate);
}

#[test]
fn shgd_planar_example_and_affine_only() {
    let p = make_planar();
    let s = SolverState::new(v(&[1.0, 0.0]));
    let r = shgd_step(&s, &p, &OracleModel::exact(), 0.1, ShgdEstimator::FirstSample, &streams()).unwrap();
    assert_abs_diff_eq!(r.new_state.iterate[0], 0.9, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.0, epsilon = 1e-15);

    let scc = make_strongly_convex_concave(2, 1).unwrap();
    let err = shgd_step(
        &SolverState::new(Vector::zeros(4)),
        &scc,
        &OracleModel::exact(),
        0.1,
        ShgdEstimator::FirstSample,
        &streams(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::ConstantJacobianRequired(_)));
}

#[test]
fn shgd_direction_is_the_hamiltonian_gradient() {
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -2.0, 0.5, 1.0, 0.0, -1.0, 0.2]);
    let offset = v(&[0.3, -0.1, 0.7]);
    let p = make_affine(m, offset).unwrap();
    let hamiltonian = |x: &Vector| 0.5 * p.evaluate_field(x).unwrap().norm_squared();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eta = 0.01;
    for _ in 0..10 {
        let x = Vector::from_fn(3, |_, _| rand::Rng::random_range(&mut rng, -2.0..2.0));
        let r = shgd_step(&SolverState::new(x.clone()), &p, &OracleModel::exact(), eta, ShgdEstimator::Averaged, &streams())
            .unwrap();
        let direction = (&x - &r.new_state.iterate) / eta;
        let h = 1e-5;
        for i in 0..3 {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (hamiltonian(&up) - hamiltonian(&down)) / (2.0 * h);
            assert_abs_diff_eq!(direction[i], fd, epsilon = 1e-6);
        }
    }
}

#[test]
fn anchored_example() {
    let p = make_planar();
    let s = SolverState::initial(SolverKind::Anchored, v(&[1.0, 0.0]));
    let r = anchored_step(&s, &p, &OracleModel::exact(), &AnchoredParams::default(), &streams()).unwrap();
    assert_abs_diff_eq!(r.new_state.iterate[0], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.new_state.iterate[1], 0.3, epsilon = 1e-15);
    assert_eq!(r.new_state.anchor, s.anchor);

    let bad = AnchoredParams {
        beta: 0.5,
        ..AnchoredParams::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn oracle_calls_match_the_advertised_counts() {
    let p = make_bilinear(3, 2).unwrap();
    let schedule = SchedulePair::constant(0.2, 0.1).unwrap();
    for kind in SolverKind::ALL {
        let counting = Counting {
            inner: OracleModel::isotropic(0.1),
            calls: Cell::new(0),
        };
        let spec = SolverSpec::new(kind, schedule);
        let mut state = SolverState::initial(kind, Vector::from_element(6, 0.5));
        for _ in 0..7 {
            let r = spec.step(&state, &p, &counting, &streams()).unwrap();
            assert_eq!(r.oracle_calls, kind.oracle_calls());
            state = r.new_state;
        }
        assert_eq!(counting.calls.get(), 7 * kind.oracle_calls(), "{kind}");
    }
}

#[test]
fn eg_is_dseg_with_equal_stepsizes() {
    let p = make_bilinear(4, 9).unwrap();
    let oracle = OracleModel::isotropic(0.3);
    let policy = StepsizePolicy::new(0.5, 3.0, 0.4).unwrap();
    let eg = SolverSpec::new(SolverKind::Eg, SchedulePair::single(policy));
    let dseg = SolverSpec::new(SolverKind::Dseg, SchedulePair::single(policy));
    let init = Vector::from_element(8, 1.0);
    let opts = RunOptions {
        cadence: Cadence::Every { stride: 1 },
        record_points: true,
        ..RunOptions::default()
    };
    let a = run(&eg, &p, &oracle, &init, 200, RunStreams::new(4), &opts).unwrap();
    let b = run(&dseg, &p, &oracle, &init, 200, RunStreams::new(4), &opts).unwrap();
    assert_eq!(a.records, b.records);
}

#[test]
fn planar_dseg_contraction_factor() {
    let p = make_planar();
    let exact = OracleModel::exact();
    let mut s = SolverState::new(v(&[0.4, -1.3]));
    let (g, e) = (0.7, 0.2);
    let factor = (1.0 - g * e) * (1.0 - g * e) + e * e;
    for _ in 0..20 {
        let before = s.iterate.norm_squared();
        s = dseg_step(&s, &p, &exact, g, e, &streams()).unwrap().new_state;
        assert_abs_diff_eq!(s.iterate.norm_squared() / before, factor, epsilon = 1e-12);
    }
}

#[test]
fn og_and_dspeg_agree_on_replayed_noise() {
    // With constant γ, OG's X_n is DSPEG's X_{n+1/2} and OG's residual
    // iterate is DSPEG's base X_n, given the same feedback sequence.
    let p = make_bilinear(3, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noise: Vec<Vector> = (0..100)
        .map(|_| Vector::from_fn(6, |_, _| rand::Rng::random_range(&mut rng, -0.5..0.5)))
        .collect();
    let (g, e) = (0.3, 0.1);
    let og_oracle = Replay::new(noise.clone());
    let dspeg_oracle = Replay::new(noise);
    let x1 = Vector::from_fn(6, |i, _| (i as f64 - 2.5) * 0.4);
    let st = streams();

    let mut og = SolverState::new(x1.clone());
    let mut dspeg = SolverState::new(x1);
    for k in 0..100 {
        let r_og = og_step(&og, &p, &og_oracle, g, e, &st).unwrap();
        let r_dspeg = dspeg_step(&dspeg, &p, &dspeg_oracle, g, e, &st).unwrap();
        let queried_og = &og_oracle.seen.borrow()[k];
        let queried_dspeg = &dspeg_oracle.seen.borrow()[k];
        assert!((queried_og - queried_dspeg).amax() <= 1e-12, "step {k}");
        og = r_og.new_state;
        dspeg = r_dspeg.new_state;
        let residual = residual_iterate(&og).unwrap();
        assert!((residual - &dspeg.iterate).amax() <= 1e-12, "step {k}");
    }
}

#[test]
fn run_records_and_determinism() {
    let p = make_planar();
    let spec = SolverSpec::new(SolverKind::Eg, SchedulePair::constant(0.1, 0.1).unwrap());
    let opts = RunOptions {
        cadence: Cadence::Every { stride: 1 },
        ..RunOptions::default()
    };
    let t = run(&spec, &p, &OracleModel::exact(), &v(&[1.0, 0.0]), 50, RunStreams::new(1), &opts).unwrap();
    assert_eq!(t.records.len(), 51);
    assert_eq!(t.oracle_calls, 100);
    let factor: f64 = 1.0 - 0.01 + 0.0001;
    for r in &t.records {
        let expected = factor.powi(r.n as i32 - 1);
        assert_abs_diff_eq!(r.dist_sq.unwrap(), expected, epsilon = 1e-12);
    }

    let noisy = OracleModel::first_block(0.5);
    let a = run(&spec, &p, &noisy, &v(&[1.0, 0.0]), 300, RunStreams::new(9), &opts).unwrap();
    let b = run(&spec, &p, &noisy, &v(&[1.0, 0.0]), 300, RunStreams::new(9), &opts).unwrap();
    let c = run(&spec, &p, &noisy, &v(&[1.0, 0.0]), 300, RunStreams::new(10), &opts).unwrap();
    assert_eq!(a.records, b.records);
    assert_ne!(a.records, c.records);
}

#[test]
fn horizon_one_is_one_step() {
    let p = make_planar();
    let spec = SolverSpec::new(SolverKind::Dseg, SchedulePair::constant(0.5, 0.1).unwrap());
    let t = run(&spec, &p, &OracleModel::exact(), &v(&[1.0, 0.0]), 1, RunStreams::new(0), &RunOptions {
        record_points: true,
        ..RunOptions::default()
    })
    .unwrap();
    assert_eq!(t.records.len(), 2);
    let last = t.records[1].point.as_ref().unwrap();
    assert_abs_diff_eq!(last[0], 0.95, epsilon = 1e-15);
    assert_abs_diff_eq!(last[1], 0.1, epsilon = 1e-15);
}

#[test]
fn run_enforces_preconditions_and_reports_divergence() {
    let p = make_planar();
    let exact = OracleModel::exact();
    let init = v(&[1.0, 0.0]);
    let big = SolverSpec::new(SolverKind::Dseg, SchedulePair::constant(1.0, 0.5).unwrap());
    let opts = RunOptions {
        lipschitz_fraction: Some(0.9),
        ..RunOptions::default()
    };
    assert!(matches!(
        run(&big, &p, &exact, &init, 10, RunStreams::new(0), &opts),
        Err(Error::ContractViolation(_))
    ));
    assert!(matches!(
        run(&big, &p, &exact, &init, 0, RunStreams::new(0), &RunOptions::default()),
        Err(Error::Config(_))
    ));

    // Extragradient on a rotation expands by 1 − γ² + γ⁴ per step.
    let og = SolverSpec::new(SolverKind::Eg, SchedulePair::constant(2.0, 2.0).unwrap());
    let err = run(&og, &p, &exact, &init, 100_000, RunStreams::new(0), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Diverged { .. }));
    let partial = run_partial(&og, &p, &exact, &init, 100_000, RunStreams::new(0), &RunOptions::default()).unwrap();
    let div = partial.divergence.unwrap();
    assert!(div.norm > DIVERGENCE_NORM);
    assert!(div.iteration < 1000);
}

#[test]
fn og_records_carry_residual_iterates() {
    let p = make_planar();
    let spec = SolverSpec::new(SolverKind::Og, SchedulePair::constant(0.5, 0.1).unwrap());
    let t = run(&spec, &p, &OracleModel::exact(), &v(&[1.0, 0.0]), 3, RunStreams::new(0), &RunOptions {
        cadence: Cadence::Every { stride: 1 },
        ..RunOptions::default()
    })
    .unwrap();
    assert!(t.records[0].residual_iterate.is_none());
    let second = t.records[1].residual_iterate.unwrap();
    assert_abs_diff_eq!(second.dist_sq.unwrap(), 1.01, epsilon = 1e-12);
}

#[test]
fn cadence_indices() {
    assert_eq!(Cadence::Every { stride: 3 }.indices(8), vec![1, 4, 7, 8]);
    assert_eq!(Cadence::Explicit { indices: vec![9, 2, 2, 0, 5] }.indices(6), vec![2, 5]);
    let g = Cadence::default().indices(100_001);
    assert_eq!(&g[..3], &[1, 2, 3]);
    assert_eq!(*g.last().unwrap(), 100_001);
    assert!(g.contains(&1000) && g.contains(&10_000) && g.contains(&100_000));
    assert!(g.len() < 100 + 3 * 30 + 2);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn solver_names_round_trip() {
    for k in SolverKind::ALL {
        assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
    }
    assert!("sgd".parse::<SolverKind>().is_err());
}

proptest! {
    #[test]
    fn eg_planar_energy_is_a_power(gamma in 0.01f64..0.9, steps in 1u64..40) {
        let p = make_planar();
        let spec = SolverSpec::new(SolverKind::Eg, SchedulePair::constant(gamma, gamma).unwrap());
        let t = run(&spec, &p, &OracleModel::exact(), &v(&[1.0, 0.0]), steps, RunStreams::new(0), &RunOptions::default()).unwrap();
        let last = t.records.last().unwrap();
        let factor = 1.0 - gamma * gamma + gamma.powi(4);
        prop_assert!((last.dist_sq.unwrap() - factor.powi(steps as i32)).abs() <= 1e-12);
    }
}
