//! Python bindings. Structured results cross the boundary as dicts built from the
//! library's serde output.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use skewlab::attractor::{self, GraphRepr, PullbackOptions};
use skewlab::nonautonomous::{convergence_certificate, iterate_pair, MapSequence};
use skewlab::{catalog, fiber, BasePoint, Error, SkewSystem, SystemConfig};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config { .. } | Error::Representation(_) | Error::Registry(_) | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// kappa(u, v) = |v - u| / min(u, v) for positive u, v.
#[pyfunction]
fn kappa(u: f64, v: f64) -> PyResult<f64> {
    fiber::kappa(u, v).map_err(py_err)
}

/// Names of the bundled systems.
#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    catalog::entries().into_iter().map(|e| e.name).collect()
}

/// A skew-product system built from a JSON config or a catalog entry.
#[pyclass(module = "skewlab_py", name = "System")]
struct PySystem {
    config: SystemConfig,
    sys: SkewSystem,
}

impl PySystem {
    fn point(&self, theta: Option<&str>) -> PyResult<BasePoint> {
        match theta {
            Some(t) => self.sys.base().parse_point(t).map_err(py_err),
            None => Ok(self.sys.base().sample_points(1, self.config.analysis.seed).remove(0)),
        }
    }
}

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let config = SystemConfig::from_json(text).map_err(py_err)?;
        let sys = config.build().map_err(py_err)?;
        Ok(Self { config, sys })
    }

    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        let config = (catalog::lookup(name).map_err(py_err)?.config)();
        let sys = config.build().map_err(py_err)?;
        Ok(Self { config, sys })
    }

    fn to_json(&self) -> String {
        self.config.to_json()
    }

    #[getter]
    fn name(&self) -> String {
        self.sys.name().to_string()
    }

    #[getter]
    fn endpoint(&self) -> f64 {
        self.sys.endpoint()
    }

    #[getter]
    fn classification(&self) -> String {
        serde_json::to_value(self.sys.declared())
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    }

    #[getter]
    fn invertible(&self) -> bool {
        self.sys.base().is_invertible()
    }

    /// Evaluate the fiber map over theta at x.
    fn fiber(&self, theta: &str, x: f64) -> PyResult<f64> {
        let p = self.point(Some(theta))?;
        Ok(self.sys.apply(&p, x))
    }

    /// n steps of the skew product; returns (theta_key, x).
    fn iterate(&self, theta: &str, x: f64, n: usize) -> PyResult<(String, f64)> {
        let p = self.point(Some(theta))?;
        let (q, y) = self.sys.iterate(&p, x, n).map_err(py_err)?;
        Ok((self.sys.base().key(&q), y))
    }

    #[pyo3(signature = (theta=None, grid=None))]
    fn certify<'py>(&self, py: Python<'py>, theta: Option<&str>, grid: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let p = self.point(theta)?;
        let cert = fiber::certify(&self.sys.fiber_map(&p), grid.unwrap_or(self.config.analysis.grid_size)).map_err(py_err)?;
        to_dict(py, &cert)
    }

    #[pyo3(signature = (samples=None, grid=2048))]
    fn classify<'py>(&self, py: Python<'py>, samples: Option<usize>, grid: usize) -> PyResult<Bound<'py, PyAny>> {
        let report = skewlab::classify(&self.sys, samples.unwrap_or(self.config.analysis.samples), grid);
        to_dict(py, &report)
    }

    /// Trace of two fiber orbits over theta. With `beta` and `eps` the dict also
    /// carries a convergence report.
    #[pyo3(signature = (theta, x0, y0, steps=50, beta=None, eps=None))]
    fn orbit_pair<'py>(
        &self,
        py: Python<'py>,
        theta: &str,
        x0: f64,
        y0: f64,
        steps: usize,
        beta: Option<f64>,
        eps: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let p = self.point(Some(theta))?;
        let seq = MapSequence::along_orbit(&self.sys, &p, steps).map_err(py_err)?;
        let trace = iterate_pair(&seq, x0, y0, steps).map_err(py_err)?;
        let out = to_dict(py, &trace)?;
        if let (Some(beta), Some(eps)) = (beta, eps) {
            let report = convergence_certificate(&trace, beta, eps, self.config.analysis.tolerance).map_err(py_err)?;
            out.cast::<PyDict>()?.set_item("convergence", to_dict(py, &report)?)?;
        }
        Ok(out)
    }

    /// Pullback values phi_1..phi_n at theta.
    #[pyo3(signature = (theta, depth=1000, stop=Some(1e-12)))]
    fn pullback(&self, py: Python<'_>, theta: &str, depth: usize, stop: Option<f64>) -> PyResult<Vec<f64>> {
        let p = self.point(Some(theta))?;
        let s = py.detach(|| attractor::pullback_phi(&self.sys, &p, depth, stop)).map_err(py_err)?;
        Ok(s.values)
    }

    /// Pullback graph on a uniform circle grid; returns (values, summary).
    #[pyo3(signature = (nodes=4096, depth=1000, stop=Some(1e-12)))]
    fn pullback_grid<'py>(
        &self,
        py: Python<'py>,
        nodes: usize,
        depth: usize,
        stop: Option<f64>,
    ) -> PyResult<(Vec<f64>, Bound<'py, PyAny>)> {
        let opts = PullbackOptions { depth, stop };
        let (graph, summary) = py.detach(|| attractor::pullback_grid(&self.sys, nodes, &opts)).map_err(py_err)?;
        let values = match graph.repr {
            GraphRepr::Grid(v) => v,
            _ => unreachable!("grid pullback yields a grid"),
        };
        Ok((values, to_dict(py, &summary)?))
    }
}

#[pymodule]
fn skewlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_class::<PySystem>()?;
    Ok(())
}
