//! Python bindings for the junction asymptotics library.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use junction_asym::composite::{error_norms, AsymptoticSolution, ErrorReport, Ingredients as CoreIngredients};
use junction_asym::cross_section::{flux_identity_check, log_potential};
use junction_asym::experiments::{self, ExperimentConfig, LoadedConfig};
use junction_asym::geometry::{Alpha, CrossSection, LateralBc, Shape};
use junction_asym::reference_axisym::{solve_reference, MeshControls, ReferenceSolution};
use junction_asym::Error;

fn core_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Config(_) | Error::Geometry(_) | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_alpha(alpha: u8) -> PyResult<Alpha> {
    Alpha::try_from(alpha).map_err(PyValueError::new_err)
}

/// Experiment configuration: junction geometry, sources and pipeline settings.
#[pyclass(module = "junction_asym_py")]
#[derive(Clone)]
struct Config {
    inner: ExperimentConfig,
    path: Option<PathBuf>,
}

#[pymethods]
impl Config {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ExperimentConfig::from_toml(text).map_err(core_err)?, path: None })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let loaded = LoadedConfig::load(&path).map_err(core_err)?;
        Ok(Self { inner: loaded.config, path: Some(path) })
    }

    /// Unit disk plate with one centred disk rod and a constant plate source.
    #[staticmethod]
    #[pyo3(signature = (alpha=1, h=0.05, dirichlet_lateral=false))]
    fn standard(alpha: u8, h: f64, dirichlet_lateral: bool) -> PyResult<Self> {
        let lateral = if dirichlet_lateral { LateralBc::Dirichlet } else { LateralBc::Neumann };
        let inner = ExperimentConfig {
            junction: experiments::standard_config(parse_alpha(alpha)?, lateral, h),
            pipeline: Default::default(),
            reference: Default::default(),
            sweep: Default::default(),
            probe: Default::default(),
            experiments: Vec::new(),
            targets: Vec::new(),
        };
        Ok(Self { inner, path: None })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.junction.h
    }

    #[setter]
    fn set_h(&mut self, h: f64) -> PyResult<()> {
        if !(h > 0.0 && h < 1.0) {
            return Err(PyValueError::new_err(format!("h = {h} is outside (0, 1)")));
        }
        self.inner.junction.h = h;
        Ok(())
    }

    #[getter]
    fn path(&self) -> Option<PathBuf> {
        self.path.clone()
    }

    #[getter]
    fn alpha(&self) -> u8 {
        u8::from(self.inner.junction.alpha)
    }

    #[getter]
    fn n_rods(&self) -> usize {
        self.inner.junction.n_rods()
    }

    #[getter]
    fn regime(&self) -> &'static str {
        junction_asym::composite::CompositeRegime::of(&self.inner.junction).name()
    }

    #[getter]
    fn experiments(&self) -> Vec<String> {
        self.inner.experiments.iter().map(|e| e.as_str().to_owned()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Config(alpha={}, h={}, rods={}, regime={})", self.alpha(), self.h(), self.n_rods(), self.regime())
    }
}

/// h-independent ingredients: Green functions, capacities and layer data.
#[pyclass(module = "junction_asym_py", frozen)]
struct Ingredients {
    inner: Arc<CoreIngredients>,
}

#[pymethods]
impl Ingredients {
    #[new]
    fn new(py: Python<'_>, config: &Config) -> PyResult<Self> {
        let cfg = config.inner.clone();
        let inner = py.allow_threads(|| CoreIngredients::compute(&cfg.junction, &cfg.options())).map_err(core_err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[getter]
    fn n_rods(&self) -> usize {
        self.inner.n_rods()
    }

    #[getter]
    fn regime(&self) -> &'static str {
        self.inner.regime.name()
    }

    /// Matching coefficients at h as a dict, or None in the homogeneous Dirichlet regime.
    fn coefficients<'py>(&self, py: Python<'py>, h: f64) -> PyResult<Option<Bound<'py, PyDict>>> {
        let Some(c) = self.inner.coefficients(h).map_err(core_err)? else {
            return Ok(None);
        };
        let d = PyDict::new_bound(py);
        d.set_item("ln_h", c.ln_h)?;
        d.set_item("a0", c.a0)?;
        d.set_item("a0_undetermined", c.a0_undetermined)?;
        d.set_item("a", c.a.clone())?;
        d.set_item("b", c.b.clone())?;
        d.set_item("m", c.m)?;
        d.set_item("small_a0", c.small_a0)?;
        d.set_item("h0", c.h0)?;
        Ok(Some(d))
    }

    fn solution(&self, py: Python<'_>, h: f64) -> PyResult<Solution> {
        let ing = self.inner.clone();
        let inner = py.allow_threads(|| ing.solution(h)).map_err(core_err)?;
        Ok(Solution { inner })
    }
}

/// Composite approximation at a fixed h.
#[pyclass(module = "junction_asym_py", frozen)]
struct Solution {
    inner: AsymptoticSolution,
}

#[pymethods]
impl Solution {
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn regime(&self) -> &'static str {
        self.inner.regime.name()
    }

    /// Value and part name at a point, or None outside the junction.
    fn evaluate(&self, x: f64, y: f64, z: f64) -> PyResult<Option<(f64, String)>> {
        let v = self.inner.evaluate([x, y, z]).map_err(core_err)?;
        Ok(v.map(|(u, part)| (u, part.to_string())))
    }

    /// Rows (x, y, z, value, part) on an n-point probe grid per direction.
    fn probe_grid(&self, py: Python<'_>, n: usize) -> PyResult<Vec<(f64, f64, f64, f64, String)>> {
        let rows = py.allow_threads(|| self.inner.probe_grid(n)).map_err(core_err)?;
        Ok(rows.into_iter().map(|r| (r.x, r.y, r.z, r.value, r.part.to_string())).collect())
    }

    /// Error norms against an axisymmetric reference solution.
    fn errors<'py>(&self, py: Python<'py>, reference: &Reference) -> PyResult<Bound<'py, PyDict>> {
        let report = py.allow_threads(|| error_norms(&self.inner, &reference.inner)).map_err(core_err)?;
        report_dict(py, &report)
    }
}

fn report_dict<'py>(py: Python<'py>, report: &ErrorReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    for name in ErrorReport::csv_header() {
        if let Some(v) = report.column(name) {
            d.set_item(name, v)?;
        }
    }
    d.set_item("regime", report.regime.name())?;
    d.set_item("plate_limit_target", report.plate_limit_target)?;
    Ok(d)
}

/// Axisymmetric finite-element solution of a one-rod junction.
#[pyclass(module = "junction_asym_py", frozen)]
struct Reference {
    inner: ReferenceSolution,
}

#[pymethods]
impl Reference {
    #[new]
    #[pyo3(signature = (config, level=2))]
    fn new(py: Python<'_>, config: &Config, level: u32) -> PyResult<Self> {
        let cfg = config.inner.junction.clone();
        let inner =
            py.allow_threads(|| solve_reference(&cfg, &MeshControls::default().refined(level))).map_err(core_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn dofs(&self) -> usize {
        self.inner.dofs
    }

    fn plate_mean(&self) -> f64 {
        self.inner.plate_mean()
    }

    /// Value at cylindrical coordinates (r, z).
    fn evaluate(&self, r: f64, z: f64) -> PyResult<f64> {
        self.inner.tee.field.evaluate([r, z]).map_err(core_err)
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }
}

/// Logarithmic capacity and boundary flux (ideally 1) of a cross-section.
///
/// `radius` gives a disk, `vertices` a counter-clockwise polygon.
#[pyfunction]
#[pyo3(signature = (radius=None, vertices=None))]
fn capacity(radius: Option<f64>, vertices: Option<Vec<[f64; 2]>>) -> PyResult<(f64, f64)> {
    let shape = match (radius, vertices) {
        (Some(r), None) => Shape::Disk { radius: r },
        (None, Some(v)) => Shape::Polygon { vertices: v },
        _ => return Err(PyValueError::new_err("give exactly one of radius and vertices")),
    };
    let section = CrossSection { shape, gamma: 1.0, length: 1.0 };
    section.check().map_err(PyValueError::new_err)?;
    let pot = log_potential(&section).map_err(core_err)?;
    Ok((pot.c_log, flux_identity_check(&pot)))
}

/// Least-squares slope of log error against log h, with its 95% half-width.
#[pyfunction]
fn fit_rate<'py>(py: Python<'py>, pairs: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let f = experiments::fit_rate(&pairs).map_err(core_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("slope", f.slope)?;
    d.set_item("intercept", f.intercept)?;
    d.set_item("residual", f.residual)?;
    d.set_item("slope_ci95", f.slope_ci95)?;
    Ok(d)
}

/// Runs every experiment of a configuration file; returns
/// (experiment, passed, check lines) per experiment.
#[pyfunction]
#[pyo3(signature = (path, out=None))]
fn run_config(py: Python<'_>, path: PathBuf, out: Option<PathBuf>) -> PyResult<Vec<(String, bool, Vec<String>)>> {
    let cfg = Arc::new(LoadedConfig::load(&path).map_err(core_err)?);
    let reports = py.allow_threads(|| experiments::run_config(cfg, out.as_deref().map(Path::new))).map_err(core_err)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.experiment.as_str().to_owned(), r.passed(), r.checks.iter().map(|c| c.to_string()).collect()))
        .collect())
}

#[pymodule]
fn junction_asym_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Ingredients>()?;
    m.add_class::<Solution>()?;
    m.add_class::<Reference>()?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
