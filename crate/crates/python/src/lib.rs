//! Python bindings for `dseg-core`.

use dseg_core::analysis::{self, Metric, TheoremSelector};
use dseg_core::harness::{self, ExperimentConfig};
use dseg_core::oracle::OracleModel;
use dseg_core::problems::{self, BilinearLaw};
use dseg_core::rng::RunStreams;
use dseg_core::schedules::{self, ScheduleSpec};
use dseg_core::solvers::{self, Cadence, RunOptions, SolverKind, SolverSpec};
use dseg_core::{ProblemInstance, Vector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: dseg_core::Error) -> PyErr {
    match e {
        dseg_core::Error::Io(_) | dseg_core::Error::Diverged { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(values: Vec<f64>) -> Vector {
    Vector::from_vec(values)
}

/// A saddle-point problem instance.
#[pyclass(name = "Problem", module = "dseg", frozen)]
struct PyProblem {
    inner: ProblemInstance,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn planar() -> Self {
        Self {
            inner: problems::make_planar(),
        }
    }

    /// Random bilinear game. With `spectrum=(low, high)` the singular values
    /// are uniform in that range; otherwise the coupling is Gaussian.
    #[staticmethod]
    #[pyo3(signature = (dim_half, seed, spectrum=None))]
    fn bilinear(dim_half: usize, seed: u64, spectrum: Option<(f64, f64)>) -> PyResult<Self> {
        let law = match spectrum {
            Some((low, high)) => BilinearLaw::UniformSpectrum { low, high },
            None => BilinearLaw::Gaussian,
        };
        let inner = problems::make_bilinear_with_law(dim_half, law, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn strongly_convex_concave(dim_half: usize, seed: u64) -> PyResult<Self> {
        let inner = problems::make_strongly_convex_concave(dim_half, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, seed, batch_size=128))]
    fn gaussian_gan(dim: usize, seed: u64, batch_size: usize) -> PyResult<Self> {
        let inner = problems::make_gaussian_gan(dim, batch_size, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }

    #[getter]
    fn error_bound(&self) -> f64 {
        self.inner.error_bound()
    }

    fn field(&self, point: Vec<f64>) -> PyResult<Vec<f64>> {
        let v = self.inner.evaluate_field(&vector(point)).map_err(to_py)?;
        Ok(v.as_slice().to_vec())
    }

    fn value(&self, point: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&vector(point)).map_err(to_py)
    }

    fn distance_to_solution(&self, point: Vec<f64>) -> PyResult<f64> {
        self.inner.distance_to_solution(&vector(point)).map_err(to_py)
    }

    #[pyo3(signature = (point, step=1e-5))]
    fn finite_difference_field(&self, point: Vec<f64>, step: f64) -> PyResult<Vec<f64>> {
        let v = problems::finite_difference_field(&self.inner, &vector(point), step).map_err(to_py)?;
        Ok(v.as_slice().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Problem(kind={}, dim={})", self.inner.kind(), self.inner.dim())
    }
}

/// Stochastic first-order oracle model.
#[pyclass(name = "Oracle", module = "dseg", frozen)]
struct PyOracle {
    inner: OracleModel,
}

#[pymethods]
impl PyOracle {
    #[staticmethod]
    fn exact() -> Self {
        Self {
            inner: OracleModel::exact(),
        }
    }

    #[staticmethod]
    fn isotropic(sigma: f64) -> Self {
        Self {
            inner: OracleModel::isotropic(sigma),
        }
    }

    #[staticmethod]
    fn first_block(sigma: f64) -> Self {
        Self {
            inner: OracleModel::first_block(sigma),
        }
    }

    #[staticmethod]
    fn minibatch_gan() -> Self {
        Self {
            inner: OracleModel::minibatch_gan(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Oracle({:?}, sigma={})", self.inner.noise_kind, self.inner.sigma)
    }
}

/// `γ_n = γ₁((1+b)/(n+b))^{r_γ}`, `η_n = η₁((1+b)/(n+b))^{r_η}`.
#[pyclass(name = "Schedule", module = "dseg", frozen)]
struct PySchedule {
    inner: ScheduleSpec,
}

#[pymethods]
impl PySchedule {
    #[new]
    #[pyo3(signature = (gamma1, eta1, offset_b=0.0, r_gamma=0.0, r_eta=0.0))]
    fn new(gamma1: f64, eta1: f64, offset_b: f64, r_gamma: f64, r_eta: f64) -> PyResult<Self> {
        let inner = ScheduleSpec {
            gamma1,
            eta1,
            offset_b,
            r_gamma,
            r_eta,
        };
        inner.to_pair().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// `(γ_n, η_n)`.
    fn at(&self, n: u64) -> (f64, f64) {
        self.inner.to_pair().expect("validated on construction").at(n)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "Schedule(gamma1={}, eta1={}, offset_b={}, r_gamma={}, r_eta={})",
            s.gamma1, s.eta1, s.offset_b, s.r_gamma, s.r_eta
        )
    }
}

/// Runs one seeded trajectory; returns `{"n", "dist_sq", "residual_sq",
/// "oracle_calls", "diverged_at"}`.
#[pyfunction]
#[pyo3(signature = (problem, solver, schedule, oracle, init, horizon, seed=0, stride=1))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    solver: &str,
    schedule: &PySchedule,
    oracle: &PyOracle,
    init: Vec<f64>,
    horizon: u64,
    seed: u64,
    stride: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind: SolverKind = solver.parse().map_err(to_py)?;
    let spec = SolverSpec::new(kind, schedule.inner.to_pair().map_err(to_py)?);
    let options = RunOptions {
        cadence: Cadence::Every { stride },
        ..RunOptions::default()
    };
    let init = vector(init);
    let trajectory = py
        .detach(|| {
            solvers::run_partial(&spec, &problem.inner, &oracle.inner, &init, horizon, RunStreams::new(seed), &options)
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("n", trajectory.indices())?;
    out.set_item(
        "dist_sq",
        trajectory.records.iter().map(|r| r.dist_sq).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "residual_sq",
        trajectory.records.iter().map(|r| r.residual_sq).collect::<Vec<_>>(),
    )?;
    out.set_item("oracle_calls", trajectory.oracle_calls)?;
    out.set_item("diverged_at", trajectory.divergence.map(|d| d.iteration))?;
    Ok(out)
}

/// `(admissible, [violated condition names])`.
#[pyfunction]
fn classify_assumption4(r_gamma: f64, r_eta: f64) -> (bool, Vec<String>) {
    let report = schedules::classify_assumption4(r_gamma, r_eta);
    let names = report.violated_conditions.iter().map(|c| format!("{c:?}")).collect();
    (report.admissible, names)
}

/// Expected planar EG energies `[E₁, …, E_N]` for `γ_n = scale/n^exponent`.
#[pyfunction]
fn energy_recursion_eg(gamma_scale: f64, gamma_exponent: f64, sigma_sq: f64, e1: f64, n_max: u64) -> PyResult<Vec<f64>> {
    analysis::energy_recursion_eg(|n| gamma_scale * (n as f64).powf(-gamma_exponent), sigma_sq, e1, n_max).map_err(to_py)
}

/// Expected planar DSEG energies for `γ_n = γ/n^{r_γ}`, `η_n = η/n^{r_η}`.
#[pyfunction]
fn energy_recursion_dseg(
    gamma: (f64, f64),
    eta: (f64, f64),
    sigma_sq: f64,
    e1: f64,
    n_max: u64,
) -> PyResult<Vec<f64>> {
    analysis::energy_recursion_dseg(
        |n| gamma.0 * (n as f64).powf(-gamma.1),
        |n| eta.0 * (n as f64).powf(-eta.1),
        sigma_sq,
        e1,
        n_max,
    )
    .map_err(to_py)
}

/// `(slope, intercept, r_squared)` of `ln value` against `ln n` on `[n_lo, n_hi]`.
#[pyfunction]
fn fit_loglog_slope(n: Vec<u64>, values: Vec<f64>, n_lo: u64, n_hi: u64) -> PyResult<(f64, f64, f64)> {
    if n.len() != values.len() {
        return Err(PyValueError::new_err("n and values differ in length"));
    }
    let series: Vec<(u64, f64)> = n.into_iter().zip(values).collect();
    let fit = analysis::fit_loglog_slope(&series, n_lo, n_hi).map_err(to_py)?;
    Ok((fit.slope, fit.intercept, fit.r_squared))
}

/// `{"m", "lambda", "floor"}` for `selector` in `general | affine`.
#[pyfunction]
#[pyo3(signature = (problem, gamma, eta, sigma_sq, a=0.9, selector="general"))]
fn predict_rate_constants<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    gamma: f64,
    eta: f64,
    sigma_sq: f64,
    a: f64,
    selector: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let selector = match selector {
        "general" => TheoremSelector::General,
        "affine" => TheoremSelector::Affine,
        other => return Err(PyValueError::new_err(format!("unknown selector '{other}'"))),
    };
    let p = analysis::predict_rate_constants(&problem.inner, gamma, eta, sigma_sq, a, selector).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("m", p.m_const)?;
    out.set_item("lambda", p.lambda_const)?;
    out.set_item("floor", p.predicted_floor)?;
    Ok(out)
}

/// Runs an experiment from its JSON config. Writes the CSV tables and
/// manifest when `out` is given. Returns the aggregate curve and summary.
#[pyfunction]
#[pyo3(signature = (config_json, workers=None, out=None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_json: &str,
    workers: Option<usize>,
    out: Option<std::path::PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let result = py
        .detach(|| {
            let result = harness::run_experiment(&config, workers)?;
            if let Some(dir) = &out {
                result.write_outputs(dir)?;
            }
            Ok::<_, dseg_core::Error>(result)
        })
        .map_err(to_py)?;
    let dict = PyDict::new(py);
    dict.set_item("digest", &result.digest)?;
    dict.set_item("metric", result.metric.as_str())?;
    if let Some(curve) = &result.aggregate {
        dict.set_item("n", &curve.n)?;
        dict.set_item("mean", &curve.mean)?;
        dict.set_item("sd", &curve.sd)?;
        dict.set_item("runs", curve.runs)?;
    }
    dict.set_item("slope", result.fit.map(|f| f.slope))?;
    dict.set_item("oracle_calls", result.oracle_calls)?;
    dict.set_item("diverged_runs", &result.diverged_runs)?;
    dict.set_item("notes", &result.notes)?;
    Ok(dict)
}

/// Runs acceptance criteria; returns one dict per criterion.
#[pyfunction]
#[pyo3(signature = (suite=None))]
fn run_acceptance<'py>(py: Python<'py>, suite: Option<&str>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let report = py
        .detach(|| harness::run_acceptance_suite(suite, None))
        .map_err(to_py)?;
    report
        .criteria
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("id", c.id)?;
            d.set_item("name", &c.name)?;
            d.set_item("measured", c.measured)?;
            d.set_item("threshold", c.threshold)?;
            d.set_item("passed", c.passed)?;
            d.set_item("detail", &c.detail)?;
            Ok(d)
        })
        .collect()
}

/// Names of the supported metrics.
#[pyfunction]
fn metrics() -> Vec<&'static str> {
    [
        Metric::DistSq,
        Metric::ResidualSq,
        Metric::IterateNormSq,
        Metric::ResidualIterateDistSq,
        Metric::ResidualIterateResidualSq,
    ]
    .iter()
    .map(|m| m.as_str())
    .collect()
}

#[pymodule]
fn dseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyOracle>()?;
    m.add_class::<PySchedule>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(classify_assumption4, m)?)?;
    m.add_function(wrap_pyfunction!(energy_recursion_eg, m)?)?;
    m.add_function(wrap_pyfunction!(energy_recursion_dseg, m)?)?;
    m.add_function(wrap_pyfunction!(fit_loglog_slope, m)?)?;
    m.add_function(wrap_pyfunction!(predict_rate_constants, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_acceptance, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add("SOLVERS", SolverKind::ALL.iter().map(|k| k.as_str()).collect::<Vec<_>>())?;
    Ok(())
}
