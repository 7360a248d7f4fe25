use std::fs;
use std::path::PathBuf;

use dseg_core::harness::{run_experiment, ExperimentConfig, FigureConfig};
use dseg_core::solvers::SolverKind;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_parse_and_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let figure = FigureConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        for config in figure.experiments() {
            config.validate_shape().unwrap_or_else(|e| panic!("{}: {e}", config.name));
            config.problem.build().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 10);
}

#[test]
fn digest_ignores_key_order_and_output() {
    let a = ExperimentConfig::from_json(
        r#"{"name":"x","problem":{"kind":"bilinear","dim_half":4,"instance_seed":3},"runs":2,"horizon":10}"#,
    )
    .unwrap();
    let b = ExperimentConfig::from_json(
        r#"{"horizon":10,"output":"elsewhere","runs":2,"problem":{"instance_seed":3,"dim_half":4,"kind":"bilinear"},"name":"x"}"#,
    )
    .unwrap();
    assert_eq!(a.digest(), b.digest());
    let mut c = a.clone();
    c.horizon = 11;
    assert_ne!(a.digest(), c.digest());
}

#[test]
fn oracle_budget_and_repeatability() {
    for (solver, per_step) in [(SolverKind::Dseg, 2), (SolverKind::Og, 1), (SolverKind::Shgd, 2)] {
        let mut config = ExperimentConfig::from_json(
            r#"{"problem":{"kind":"bilinear","dim_half":5,"instance_seed":9},"runs":3,"horizon":250,"clamp_gamma":true}"#,
        )
        .unwrap();
        config.solver = solver;
        if solver == SolverKind::Shgd {
            config.schedule = Some(dseg_core::schedules::ScheduleSpec {
                gamma1: 0.1,
                eta1: 0.1,
                offset_b: 19.0,
                r_gamma: 1.0,
                r_eta: 1.0,
            });
        }
        let first = run_experiment(&config, Some(2)).unwrap();
        let second = run_experiment(&config, Some(3)).unwrap();
        assert_eq!(first.oracle_calls, 3 * 250 * per_step, "{solver}");
        let (mut x, mut y) = (Vec::new(), Vec::new());
        first.write_trajectories_csv(&mut x).unwrap();
        second.write_trajectories_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }
}
