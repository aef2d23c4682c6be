//! Python bindings: kernels, cubes, grid marginals and packings as classes,
//! everything else as functions returning plain Python values.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use rieszlab::analysis::{self, FitModel};
use rieszlab::decomposition::{self, FgSplitOptions, PackingOptions};
use rieszlab::jellium::{self, MinimizeOptions};
use rieszlab::kernel::{self, PointConfiguration, UniformMeasure};
use rieszlab::lattice::{self, Lattice, LatticeMethod};
use rieszlab::transport::{self, PiecewiseDensity};
use serde::Serialize;

fn err(e: rieszlab::Error) -> PyErr {
    match e {
        rieszlab::Error::Parameter { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for rieszlab::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Serializes through JSON into dicts and lists.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn config(d: usize, points: Vec<Vec<f64>>) -> PyResult<PointConfiguration> {
    PointConfiguration::new(d, points).py_err()
}

#[pyclass(name = "RieszKernel", frozen, from_py_object)]
#[derive(Clone)]
struct PyKernel(kernel::RieszKernel);

#[pymethods]
impl PyKernel {
    #[new]
    fn new(s: f64, d: usize) -> PyResult<Self> {
        Ok(Self(kernel::RieszKernel::new(s, d).py_err()?))
    }

    #[getter]
    fn s(&self) -> f64 {
        self.0.s
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d
    }

    fn is_coulomb(&self) -> bool {
        self.0.is_coulomb()
    }

    fn __call__(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&x, &y).py_err()
    }

    fn __repr__(&self) -> String {
        format!("RieszKernel(s={}, d={})", self.0.s, self.0.d)
    }
}

#[pyclass(name = "CubeDomain", frozen, from_py_object)]
#[derive(Clone)]
struct PyCube(kernel::CubeDomain);

#[pymethods]
impl PyCube {
    #[new]
    fn new(center: Vec<f64>, side: f64) -> PyResult<Self> {
        Ok(Self(kernel::CubeDomain::new(center, side).py_err()?))
    }

    /// [0, side]^d.
    #[staticmethod]
    fn anchored(d: usize, side: f64) -> PyResult<Self> {
        Ok(Self(kernel::CubeDomain::anchored(d, side).py_err()?))
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.0.center.clone()
    }

    #[getter]
    fn side(&self) -> f64 {
        self.0.side
    }

    fn volume(&self) -> f64 {
        self.0.volume()
    }

    fn __repr__(&self) -> String {
        format!("CubeDomain(center={:?}, side={})", self.0.center, self.0.side)
    }
}

#[pyclass(name = "GridMarginal", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrid(transport::GridMarginal);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (sites, weights, cell=None))]
    fn new(sites: Vec<Vec<f64>>, weights: Vec<f64>, cell: Option<f64>) -> PyResult<Self> {
        Ok(Self(transport::GridMarginal::new(sites, weights, cell).py_err()?))
    }

    #[staticmethod]
    fn uniform_interval(a: f64, b: f64, m: usize) -> PyResult<Self> {
        Ok(Self(transport::GridMarginal::uniform_interval(a, b, m).py_err()?))
    }

    #[staticmethod]
    fn uniform_cube(cube: &PyCube, per_side: usize) -> PyResult<Self> {
        Ok(Self(transport::GridMarginal::uniform_cube(&cube.0, per_side).py_err()?))
    }

    #[getter]
    fn sites(&self) -> Vec<Vec<f64>> {
        self.0.sites.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }

    fn dilate(&self, alpha: f64) -> PyResult<Self> {
        Ok(Self(self.0.dilate(alpha).py_err()?))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "BallPacking", frozen)]
struct PyPacking(decomposition::BallPacking);

#[pymethods]
impl PyPacking {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(decomposition::BallPacking::from_json(text).py_err()?))
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().py_err()
    }

    fn counts(&self) -> Vec<usize> {
        self.0.counts()
    }

    /// Recomputed certificate as a dict.
    fn verify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.verify())
    }

    #[getter]
    fn centers(&self) -> Vec<Vec<f64>> {
        self.0.centers.clone()
    }

    #[getter]
    fn radii(&self) -> Vec<f64> {
        self.0.radii.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn e_jel(py: Python<'_>, k: &PyKernel, domain: &PyCube, points: Vec<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let cfg = config(k.0.d, points)?;
    to_py(py, &jellium::e_jel(&k.0, &domain.0, &cfg).py_err()?)
}

/// E_UEG against the unit-density background on `domain`.
#[pyfunction]
fn e_ueg(py: Python<'_>, k: &PyKernel, domain: &PyCube, points: Vec<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let cfg = config(k.0.d, points)?;
    let mu = UniformMeasure::unit(domain.0.clone());
    to_py(py, &jellium::e_ueg(&k.0, &mu, &cfg).py_err()?)
}

#[pyfunction]
fn jel_ueg_gap(k: &PyKernel, domain: &PyCube, points: Vec<Vec<f64>>) -> PyResult<f64> {
    let cfg = config(k.0.d, points)?;
    jellium::jel_ueg_gap(&k.0, &UniformMeasure::unit(domain.0.clone()), &cfg).py_err()
}

#[pyfunction]
fn e_jel_gradient(k: &PyKernel, domain: &PyCube, points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let cfg = config(k.0.d, points)?;
    jellium::e_jel_gradient(&k.0, &domain.0, &cfg).py_err()
}

/// Returns a dict with `energy`, `points`, `converged` and `gradient_norm`.
#[pyfunction]
#[pyo3(signature = (k, domain, n, seed, restarts=8, max_iterations=3000))]
fn minimize_jellium(
    py: Python<'_>,
    k: &PyKernel,
    domain: &PyCube,
    n: usize,
    seed: u64,
    restarts: usize,
    max_iterations: usize,
) -> PyResult<Py<PyAny>> {
    let opts = MinimizeOptions { seed, restarts, max_iterations, ..Default::default() };
    let r = py.detach(|| jellium::minimize_jellium(&k.0, &domain.0, n, &opts)).py_err()?;
    to_py(py, &r)
}

#[pyfunction]
fn jellium_lower_bound(k: &PyKernel, n: usize) -> f64 {
    jellium::jellium_lower_bound(&k.0, n)
}

/// Lattice constant; `lattice` is a name ("bcc", "fcc", "triangular", "zd")
/// and `method` is "ewald", "windowed" or None for the default.
#[pyfunction]
#[pyo3(signature = (k, lattice, method=None))]
fn lattice_constant(py: Python<'_>, k: &PyKernel, lattice: &str, method: Option<&str>) -> PyResult<Py<PyAny>> {
    let l = Lattice::by_name(lattice, k.0.d).py_err()?;
    let method = match method {
        None => None,
        Some("ewald") => Some(LatticeMethod::Ewald),
        Some("windowed") => Some(LatticeMethod::Windowed),
        Some(other) => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    let c = py.detach(|| lattice::periodic_energy_per_point(&k.0, &l, method, &[])).py_err()?;
    to_py(py, &c)
}

/// Exact N-marginal optimum on a grid marginal, as a dict with `cost`,
/// `plan` and `certificate`.
#[pyfunction]
fn mmot(py: Python<'_>, k: &PyKernel, marginal: &PyGrid, n: usize) -> PyResult<Py<PyAny>> {
    let sol = py.detach(|| transport::mmot_bruteforce(&k.0, &marginal.0, n)).py_err()?;
    to_py(py, &sol)
}

#[pyfunction]
fn exchange_correlation(k: &PyKernel, marginal: &PyGrid, n: usize, cost: f64) -> PyResult<f64> {
    transport::exc(&k.0, &marginal.0, n, cost).py_err()
}

/// Monotone-coupling cost for a piecewise-constant density on `breaks`.
#[pyfunction]
fn monotone_1d(s: f64, breaks: Vec<f64>, values: Vec<f64>, n: usize) -> PyResult<f64> {
    let k = kernel::RieszKernel::new(s, 1).py_err()?;
    let rho = PiecewiseDensity::new(breaks, values).py_err()?;
    transport::monotone_1d(&k, &rho, n).py_err()
}

#[pyfunction]
#[pyo3(signature = (cube, ladder, seed, seed_budget=8))]
fn swiss_cheese(py: Python<'_>, cube: &PyCube, ladder: Vec<f64>, seed: u64, seed_budget: usize) -> PyResult<PyPacking> {
    let opts = PackingOptions { seed, seed_budget };
    Ok(PyPacking(py.detach(|| decomposition::swiss_cheese(&cube.0, &ladder, &opts)).py_err()?))
}

#[pyfunction]
#[pyo3(signature = (k, points, packing, seed, samples=2000, kappa=0.5))]
fn fg_split(
    py: Python<'_>,
    k: &PyKernel,
    points: Vec<Vec<f64>>,
    packing: &PyPacking,
    seed: u64,
    samples: usize,
    kappa: f64,
) -> PyResult<Py<PyAny>> {
    let cfg = config(k.0.d, points)?;
    let opts = FgSplitOptions { kappa, samples, seed, c_const: None };
    let r = py.detach(|| decomposition::fg_energy_split(&k.0, &cfg, &packing.0, &opts)).py_err()?;
    to_py(py, &r)
}

/// Fit C + a N^{-1/d} (+ b N^{-2/d} with four or more points).
#[pyfunction]
fn extrapolate_constant(py: Python<'_>, series: Vec<(f64, f64)>, d: usize) -> PyResult<Py<PyAny>> {
    let model = FitModel::surface_for(d, series.len());
    to_py(py, &analysis::extrapolate_constant(&series, &model).py_err()?)
}

#[pymodule]
#[pyo3(name = "rieszlab")]
fn rieszlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_class::<PyCube>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPacking>()?;
    m.add_function(wrap_pyfunction!(e_jel, m)?)?;
    m.add_function(wrap_pyfunction!(e_ueg, m)?)?;
    m.add_function(wrap_pyfunction!(jel_ueg_gap, m)?)?;
    m.add_function(wrap_pyfunction!(e_jel_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_jellium, m)?)?;
    m.add_function(wrap_pyfunction!(jellium_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_constant, m)?)?;
    m.add_function(wrap_pyfunction!(mmot, m)?)?;
    m.add_function(wrap_pyfunction!(exchange_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(monotone_1d, m)?)?;
    m.add_function(wrap_pyfunction!(swiss_cheese, m)?)?;
    m.add_function(wrap_pyfunction!(fg_split, m)?)?;
    m.add_function(wrap_pyfunction!(extrapolate_constant, m)?)?;
    Ok(())
}
