use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InitSpec, ProblemSpec};
use super::experiment::{run_experiment, ExperimentResult};
use crate::analysis::{
    check_descent_lemma, energy_recursion_dseg, energy_recursion_eg, predict_rate_constants, TheoremSelector,
};
use crate::error::{Error, Result};
use crate::oracle::OracleModel;
use crate::problems::{self, BilinearLaw, ProblemInstance};
use crate::schedules::{classify_assumption4, series, Assumption4Condition, ScheduleSpec};
use crate::solvers::{Cadence, SolverKind};
use crate::Vector;

/// Base seed of every acceptance run.
pub const DEFAULT_SEED: u64 = 2021;

const SUITES: [(&str, &[u8]); 7] = [
    ("recursion", &[1, 2]),
    ("rates", &[3, 4, 5]),
    ("descent", &[6]),
    ("og", &[7]),
    ("fields", &[8]),
    ("determinism", &[9]),
    ("region", &[10]),
];

const NAMES: [&str; 10] = [
    "EG non-convergence on Planar",
    "DSEG convergence on Planar",
    "affine O(1/n) rate on bilinear",
    "O(1/n^(1/3)) upper bound on bilinear",
    "constant-stepsize noise floor",
    "descent inequality",
    "OG residual vs optimistic iterate",
    "analytic fields vs finite differences",
    "determinism across worker counts",
    "stepsize exponent region",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    /// One human-readable line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: measured {:.6e}, threshold {:.6e}; {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Criterion ids selected by a suite name, a criterion number, or a comma
/// separated list of either. Empty or `all` selects everything.
pub fn select_criteria(selector: Option<&str>) -> Result<Vec<u8>> {
    let selector = selector.map(str::trim).unwrap_or("");
    if selector.is_empty() || selector == "all" {
        return Ok((1..=10).collect());
    }
    let mut ids = Vec::new();
    for part in selector.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((_, suite)) = SUITES.iter().find(|(name, _)| *name == part) {
            ids.extend_from_slice(suite);
        } else {
            match part.parse::<u8>() {
                Ok(id) if (1..=10).contains(&id) => ids.push(id),
                _ => {
                    let names: Vec<&str> = SUITES.iter().map(|(n, _)| *n).collect();
                    return Err(Error::Config(format!(
                        "unknown suite '{part}' (expected all, {}, or 1..10)",
                        names.join(", ")
                    )));
                }
            }
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

/// Runs the selected criteria and, when `out` is given, writes
/// `acceptance.json` there.
pub fn run_acceptance_suite(selector: Option<&str>, out: Option<&Path>) -> Result<AcceptanceReport> {
    run_acceptance_with(selector, out, None, |_| {})
}

/// As [`run_acceptance_suite`] with an explicit worker count and a callback
/// invoked after each criterion.
pub fn run_acceptance_with(
    selector: Option<&str>,
    out: Option<&Path>,
    workers: Option<usize>,
    mut on_result: impl FnMut(&CriterionReport),
) -> Result<AcceptanceReport> {
    let ids = select_criteria(selector)?;
    let mut criteria = Vec::with_capacity(ids.len());
    for id in ids {
        let report = run_criterion(id, workers)?;
        on_result(&report);
        criteria.push(report);
    }
    let report = AcceptanceReport {
        seed: DEFAULT_SEED,
        criteria,
    };
    if let Some(dir) = out {
        report.write_json(&dir.join("acceptance.json"))?;
    }
    Ok(report)
}

/// Runs one criterion.
pub fn run_criterion(id: u8, workers: Option<usize>) -> Result<CriterionReport> {
    let (measured, threshold, passed, detail) = match id {
        1 => prop1_eg(workers)?,
        2 => prop1_dseg(workers)?,
        3 => affine_rate(workers)?,
        4 => general_rate(workers)?,
        5 => noise_floor(workers)?,
        6 => descent()?,
        7 => og_residual(workers)?,
        8 => fields()?,
        9 => determinism()?,
        10 => region(),
        other => return Err(Error::Config(format!("no criterion {other}"))),
    };
    Ok(CriterionReport {
        id,
        name: NAMES[id as usize - 1].into(),
        measured,
        threshold,
        passed,
        detail,
    })
}

type Outcome = (f64, f64, bool, String);

const PLANAR_SIGMA_SQ: f64 = 0.25;
const PROP1_HORIZON: u64 = 100_000;

fn planar_config(name: &str, solver: SolverKind, schedule: ScheduleSpec, runs: u64, horizon: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, ProblemSpec::Planar);
    c.solver = solver;
    c.schedule = Some(schedule);
    c.oracle = OracleModel::first_block(PLANAR_SIGMA_SQ.sqrt());
    c.runs = runs;
    c.horizon = horizon;
    c.base_seed = DEFAULT_SEED;
    c.init = InitSpec::Point { values: vec![1.0, 0.0] };
    c
}

/// Mean and standard error at `n` of the aggregated metric.
fn mean_and_se(result: &ExperimentResult, n: u64) -> Result<(f64, f64)> {
    let curve = result
        .aggregate
        .as_ref()
        .ok_or_else(|| Error::InsufficientData(format!("every run of '{}' diverged", result.config.name)))?;
    let (mean, sd) = curve
        .value_at(n)
        .ok_or_else(|| Error::InsufficientData(format!("no record at n = {n}")))?;
    let runs = curve.runs as f64;
    Ok((mean, sd / (runs - 1.0).max(1.0).sqrt()))
}

fn prop1_eg(workers: Option<usize>) -> Result<Outcome> {
    let schedule = ScheduleSpec {
        gamma1: 1.0,
        eta1: 1.0,
        offset_b: 0.0,
        r_gamma: 0.6,
        r_eta: 0.6,
    };
    let mut c = planar_config("prop1-eg", SolverKind::Eg, schedule, 100, PROP1_HORIZON - 1);
    c.enforce_step_bound = false;
    c.cadence = Cadence::Explicit { indices: vec![PROP1_HORIZON] };
    let result = run_experiment(&c, workers)?;
    let (mean, se) = mean_and_se(&result, PROP1_HORIZON)?;
    let expected = *energy_recursion_eg(|n| (n as f64).powf(-0.6), PLANAR_SIGMA_SQ, 1.0, PROP1_HORIZON)?
        .last()
        .expect("non-empty");
    let rel = (mean - expected).abs() / expected;
    let floor = 0.5 * PLANAR_SIGMA_SQ;
    Ok((
        mean,
        floor,
        mean >= floor && rel <= 0.1,
        format!("recursion {expected:.6}, relative error {rel:.4} (limit 0.1), standard error {se:.2e}"),
    ))
}

fn prop1_dseg(workers: Option<usize>) -> Result<Outcome> {
    let schedule = ScheduleSpec {
        gamma1: 1.0,
        eta1: 1.0,
        offset_b: 0.0,
        r_gamma: 0.1,
        r_eta: 0.9,
    };
    let mut c = planar_config("prop1-dseg", SolverKind::Dseg, schedule, 100, PROP1_HORIZON - 1);
    c.enforce_step_bound = false;
    c.cadence = Cadence::Explicit { indices: vec![PROP1_HORIZON] };
    let result = run_experiment(&c, workers)?;
    let (mean, se) = mean_and_se(&result, PROP1_HORIZON)?;
    let expected = *energy_recursion_dseg(
        |n| (n as f64).powf(-0.1),
        |n| (n as f64).powf(-0.9),
        PLANAR_SIGMA_SQ,
        1.0,
        PROP1_HORIZON,
    )?
    .last()
    .expect("non-empty");
    let gap = (mean - expected).abs();
    Ok((
        mean,
        0.05,
        mean <= 0.05 && gap <= 3.0 * se,
        format!("recursion {expected:.6}, |mean − recursion| = {gap:.2e} vs 3·SE = {:.2e}", 3.0 * se),
    ))
}

const RATE_HORIZON: u64 = 1_000_000;
const RATE_WINDOW: [u64; 2] = [10_000, 1_000_000];
const LIPSCHITZ_FRACTION: f64 = 0.9;

fn rate_problem() -> ProblemSpec {
    ProblemSpec::Bilinear {
        dim_half: 50,
        instance_seed: DEFAULT_SEED,
        law: BilinearLaw::UniformSpectrum { low: 0.5, high: 1.0 },
    }
}

fn rate_config(name: &str, schedule: ScheduleSpec) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, rate_problem());
    c.schedule = Some(schedule);
    c.oracle = OracleModel::isotropic(0.5);
    c.runs = 10;
    c.horizon = RATE_HORIZON;
    c.base_seed = DEFAULT_SEED;
    c.fit_window = Some(RATE_WINDOW);
    c.lipschitz_fraction = LIPSCHITZ_FRACTION;
    c
}

fn fitted_slope(result: &ExperimentResult) -> Result<(f64, f64)> {
    let fit = result.fit.ok_or_else(|| {
        Error::InsufficientData(format!("no slope for '{}': {}", result.config.name, result.notes.join("; ")))
    })?;
    Ok((fit.slope, fit.r_squared))
}

/// Constant `γ`, `η_n = η/(n + b)` with `η > 1/(τ²γ(1 − a²))` and `b > η/γ`.
pub fn affine_rate_schedule(problem: &ProblemInstance) -> ScheduleSpec {
    let a = LIPSCHITZ_FRACTION;
    let gamma = (a / problem.lipschitz()).min(1.0);
    let tau = problem.error_bound();
    let eta = 1.1 / (tau * tau * gamma * (1.0 - a * a));
    let offset_b = (eta / gamma).floor().max(18.0) + 1.0;
    ScheduleSpec {
        gamma1: gamma,
        eta1: eta / (1.0 + offset_b),
        offset_b,
        r_gamma: 0.0,
        r_eta: 1.0,
    }
}

fn affine_rate(workers: Option<usize>) -> Result<Outcome> {
    let problem = rate_problem().build()?;
    let schedule = affine_rate_schedule(&problem);
    let result = run_experiment(&rate_config("affine-rate", schedule), workers)?;
    let (slope, r2) = fitted_slope(&result)?;
    Ok((
        slope,
        -0.8,
        slope <= -0.8,
        format!(
            "γ = {:.4}, η = {:.4}, b = {}, τ = {:.4}, r² = {r2:.4}",
            schedule.gamma1,
            schedule.eta1 * (1.0 + schedule.offset_b),
            schedule.offset_b,
            problem.error_bound()
        ),
    ))
}

fn general_rate(workers: Option<usize>) -> Result<Outcome> {
    let problem = rate_problem().build()?;
    let schedule = ScheduleSpec {
        gamma1: (LIPSCHITZ_FRACTION / problem.lipschitz()).min(1.0),
        eta1: 0.1,
        offset_b: 19.0,
        r_gamma: 1.0 / 3.0,
        r_eta: 2.0 / 3.0,
    };
    let result = run_experiment(&rate_config("general-rate", schedule), workers)?;
    let (slope, r2) = fitted_slope(&result)?;
    Ok((
        slope,
        -0.25,
        slope <= -0.25,
        format!("γ₁ = {:.4}, η₁ = 0.1, b = 19, r² = {r2:.4}", schedule.gamma1),
    ))
}

fn noise_floor(workers: Option<usize>) -> Result<Outcome> {
    let (gamma, eta) = (0.45, 0.1);
    let schedule = ScheduleSpec {
        gamma1: gamma,
        eta1: eta,
        offset_b: 0.0,
        r_gamma: 0.0,
        r_eta: 0.0,
    };
    let c = planar_config("noise-floor", SolverKind::Dseg, schedule, 10, PROP1_HORIZON);
    let problem = c.problem.build()?;
    let prediction =
        predict_rate_constants(&problem, gamma, eta, PLANAR_SIGMA_SQ, LIPSCHITZ_FRACTION, TheoremSelector::Affine)?;
    let result = run_experiment(&c, workers)?;
    let curve = result
        .aggregate
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("every noise-floor run diverged".into()))?;
    let settled = curve.window_mean(PROP1_HORIZON / 10, PROP1_HORIZON + 1)?;
    let threshold = 2.0 * prediction.predicted_floor;
    Ok((
        settled,
        threshold,
        settled <= threshold,
        format!("predicted floor M/Λ = {:.4}", prediction.predicted_floor),
    ))
}

const DESCENT_SAMPLES: usize = 1_000_000;
const DESCENT_CONFIGS_PER_PROBLEM: usize = 25;

/// Monotone affine field `Mx − Mu` with `M` = PSD part + skew part.
pub fn random_monotone_affine(dim: usize, seed: u64) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let g = normal(dim, dim / 2);
    let s = normal(dim, dim);
    let u = normal(dim, 1);
    let matrix = (&g * g.transpose()) / dim as f64 + (&s - s.transpose()) / (2.0 * (dim as f64).sqrt());
    let offset = -(&matrix * u.column(0));
    problems::make_affine(matrix, offset)
}

fn descent() -> Result<Outcome> {
    let mut instances = vec![("planar".to_string(), problems::make_planar())];
    for k in 0..3u64 {
        instances.push((format!("affine-{k}"), random_monotone_affine(4, DEFAULT_SEED + k)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0usize;
    for (name, problem) in &instances {
        let l = problem.lipschitz();
        for _ in 0..DESCENT_CONFIGS_PER_PROBLEM {
            let point = Vector::from_fn(problem.dim(), |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
            let gamma = rng.random_range(0.05..=LIPSCHITZ_FRACTION) / l;
            let eta = gamma * rng.random_range(0.05..=1.0);
            let sigma = rng.random_range(0.0..=1.0);
            let seed = rng.random::<u64>();
            let check = check_descent_lemma(problem, &OracleModel::isotropic(sigma), &point, gamma, eta, DESCENT_SAMPLES, seed)?;
            let excess = if check.standard_error > 0.0 { -check.margin / check.standard_error } else { -check.margin.signum() };
            worst = worst.max(excess);
            if !check.passes {
                failures.push(format!("{name} γ={gamma:.3} η={eta:.3} σ={sigma:.3}"));
            }
            checked += 1;
        }
    }
    let detail = if failures.is_empty() {
        format!("{checked} configurations, worst (lhs − rhs)/SE = {worst:.2}")
    } else {
        format!("failures: {}", failures.join(", "))
    };
    Ok((failures.len() as f64, 0.0, failures.is_empty(), detail))
}

fn og_residual(workers: Option<usize>) -> Result<Outcome> {
    let schedule = ScheduleSpec {
        gamma1: 0.5,
        eta1: 0.05,
        offset_b: 19.0,
        r_gamma: 0.0,
        r_eta: 1.0,
    };
    let mut c = planar_config("og-residual", SolverKind::Og, schedule, 10, PROP1_HORIZON - 1);
    c.cadence = Cadence::Explicit { indices: vec![PROP1_HORIZON] };
    let result = run_experiment(&c, workers)?;
    let (optimistic, _) = mean_and_se(&result, PROP1_HORIZON)?;
    let residual = result
        .residual_aggregate
        .as_ref()
        .and_then(|curve| curve.value_at(PROP1_HORIZON))
        .map(|(mean, _)| mean)
        .ok_or_else(|| Error::InsufficientData("no residual-iterate record".into()))?;
    let ratio = residual / optimistic;
    Ok((
        ratio,
        0.1,
        ratio <= 0.1,
        format!("residual {residual:.4e}, optimistic {optimistic:.4e}"),
    ))
}

const FIELD_POINTS: usize = 100;

fn max_field_error(problem: &ProblemInstance, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..FIELD_POINTS {
        let point = Vector::from_fn(problem.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let analytic = problem.evaluate_field(&point)?;
        let numeric = problems::finite_difference_field(problem, &point, 1e-5)?;
        let err = (&analytic - &numeric).norm() / analytic.norm().max(1e-12);
        worst = worst.max(err);
    }
    Ok(worst)
}

fn fields() -> Result<Outcome> {
    let scc = max_field_error(&problems::make_strongly_convex_concave(50, DEFAULT_SEED)?, DEFAULT_SEED)?;
    let gan = max_field_error(&problems::make_gaussian_gan(10, 128, DEFAULT_SEED)?, DEFAULT_SEED + 1)?;
    let worst = scc.max(gan);
    Ok((
        worst,
        1e-4,
        worst < 1e-4,
        format!("strongly convex-concave {scc:.2e}, Gaussian GAN {gan:.2e}, {FIELD_POINTS} points each"),
    ))
}

fn determinism_configs() -> Vec<ExperimentConfig> {
    let eg = ScheduleSpec {
        gamma1: 1.0,
        eta1: 1.0,
        offset_b: 0.0,
        r_gamma: 0.6,
        r_eta: 0.6,
    };
    let mut planar = planar_config("determinism-planar", SolverKind::Eg, eg, 16, 5_000);
    planar.enforce_step_bound = false;
    let og = ScheduleSpec {
        gamma1: 0.5,
        eta1: 0.05,
        offset_b: 19.0,
        r_gamma: 0.0,
        r_eta: 1.0,
    };
    let og = planar_config("determinism-og", SolverKind::Og, og, 16, 5_000);
    let mut bilinear = ExperimentConfig::new(
        "determinism-bilinear",
        ProblemSpec::Bilinear {
            dim_half: 10,
            instance_seed: DEFAULT_SEED,
            law: BilinearLaw::Gaussian,
        },
    );
    bilinear.runs = 12;
    bilinear.horizon = 2_000;
    bilinear.base_seed = DEFAULT_SEED;
    bilinear.clamp_gamma = true;
    vec![planar, og, bilinear]
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Result<Outcome> {
    let root = std::env::temp_dir().join(format!("dseg-determinism-{}", std::process::id()));
    let mut compared = 0usize;
    let mut differing = Vec::new();
    for config in determinism_configs() {
        let mut dirs = Vec::new();
        for workers in [1usize, 8] {
            let dir = root.join(format!("{}-{workers}", config.name));
            run_experiment(&config, Some(workers))?.write_outputs(&dir)?;
            dirs.push(dir);
        }
        let (one, eight) = (csv_files(&dirs[0])?, csv_files(&dirs[1])?);
        if one.len() != eight.len() {
            differing.push(format!("{}: file sets differ", config.name));
            continue;
        }
        for (a, b) in one.iter().zip(&eight) {
            compared += 1;
            if fs::read(a)? != fs::read(b)? {
                differing.push(format!("{}/{}", config.name, a.file_name().unwrap_or_default().to_string_lossy()));
            }
        }
    }
    let _ = fs::remove_dir_all(&root);
    let detail = if differing.is_empty() {
        format!("{compared} CSV files byte-identical between 1 and 8 workers")
    } else {
        format!("differing: {}", differing.join(", "))
    };
    Ok((differing.len() as f64, 0.0, differing.is_empty(), detail))
}

const GRID_STEP: f64 = 0.05;
const BOUNDARY_CLEARANCE: f64 = 0.02;
const PROBE_HORIZON: u64 = 1_000_000;

/// Distance from `(r_γ, r_η)` to the nearest boundary line of the region.
fn boundary_distance(rg: f64, re: f64) -> f64 {
    [
        (rg + re - 1.0).abs() / 2f64.sqrt(),
        (2.0 * re - 1.0).abs() / 2.0,
        (2.0 * rg + re - 1.0).abs() / 5f64.sqrt(),
        (re - rg).abs() / 2f64.sqrt(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn region() -> Outcome {
    let grid: Vec<(f64, f64)> = (0..=20)
        .flat_map(|i| (0..=20).map(move |j| (i as f64 * GRID_STEP, j as f64 * GRID_STEP)))
        .filter(|&(rg, re)| boundary_distance(rg, re) > BOUNDARY_CLEARANCE)
        .collect();
    let mut exponents: Vec<f64> = grid
        .iter()
        .flat_map(|&(rg, re)| [rg + re, 2.0 * re, 2.0 * rg + re])
        .map(|p| (p * 1e6).round() / 1e6)
        .collect();
    exponents.sort_by(f64::total_cmp);
    exponents.dedup();
    let ratios = series::decade_ratios(&exponents, PROBE_HORIZON);
    let convergent = |p: f64| {
        let key = (p * 1e6).round() / 1e6;
        let idx = exponents.binary_search_by(|e| e.total_cmp(&key)).expect("exponent probed");
        series::looks_convergent(ratios[idx])
    };
    let n = PROBE_HORIZON as f64;
    let mut disagreements = Vec::new();
    for &(rg, re) in &grid {
        let mut probed = Vec::new();
        if convergent(rg + re) {
            probed.push(Assumption4Condition::SumProductDiverges);
        }
        if !convergent(2.0 * re) {
            probed.push(Assumption4Condition::UpdateSquareSummable);
        }
        if !convergent(2.0 * rg + re) {
            probed.push(Assumption4Condition::ExploreSqUpdateSummable);
        }
        // γ_n/η_n = n^{r_η − r_γ} must not shrink.
        if n.powf(re - rg) < 1.0 {
            probed.push(Assumption4Condition::OrderingViolated);
        }
        let report = classify_assumption4(rg, re);
        if report.violated_conditions != probed || report.admissible != probed.is_empty() {
            disagreements.push(format!("({rg:.2}, {re:.2})"));
        }
    }
    let admissible = grid.iter().filter(|&&(rg, re)| classify_assumption4(rg, re).admissible).count();
    let detail = if disagreements.is_empty() {
        format!("{} grid points probed to n = {PROBE_HORIZON}, {admissible} admissible", grid.len())
    } else {
        format!("disagreements at {}", disagreements.join(", "))
    };
    (disagreements.len() as f64, 0.0, disagreements.is_empty(), detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(select_criteria(None).unwrap(), (1..=10).collect::<Vec<u8>>());
        assert_eq!(select_criteria(Some("")).unwrap().len(), 10);
        assert_eq!(select_criteria(Some("recursion")).unwrap(), vec![1, 2]);
        assert_eq!(select_criteria(Some("rates")).unwrap(), vec![3, 4, 5]);
        assert_eq!(select_criteria(Some("10, og,7")).unwrap(), vec![7, 10]);
        assert!(select_criteria(Some("bogus")).is_err());
        assert!(select_criteria(Some("11")).is_err());
    }

    #[test]
    fn region_and_fields_pass() {
        let (measured, _, passed, detail) = region();
        assert!(passed, "{detail}");
        assert_eq!(measured, 0.0);
        assert!(fields().unwrap().2);
    }

    #[test]
    fn boundary_distance_examples() {
        assert_eq!(boundary_distance(0.25, 0.5), 0.0);
        assert!((boundary_distance(0.2, 0.7) - 0.1 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn affine_schedule_satisfies_its_conditions() {
        let problem = rate_problem().build().unwrap();
        let s = affine_rate_schedule(&problem);
        let eta = s.eta1 * (1.0 + s.offset_b);
        let tau = problem.error_bound();
        assert!(eta * tau * tau * s.gamma1 * (1.0 - 0.81) > 1.0);
        assert!(s.offset_b > eta / s.gamma1 && s.offset_b >= 19.0);
        assert!(s.eta1 <= s.gamma1);
    }

    #[test]
    fn monotone_affine_instances_are_monotone() {
        for seed in 0..3 {
            let p = random_monotone_affine(4, seed).unwrap();
            let m = p.constant_jacobian().unwrap();
            let sym = (m + m.transpose()) * 0.5;
            assert!(sym.symmetric_eigenvalues().min() >= -1e-12);
        }
    }
}
