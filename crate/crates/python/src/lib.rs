//! Python bindings: rotor setup, integration, diagnostics and the Lie bracket.
//!
//! Matrices cross the boundary as lists of rows, states as lists of floats.

use geomint::dense::{self, Matrix, SymplecticForm};
use geomint::integrators::{self, LinearSystem, Method};
use geomint::lie::{self, AlgebraSpec, LieElement, MatrixAlgebra, MatrixOrder};
use geomint::rotor::{self, RotorParams};
use geomint::Error;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::StepFailed { .. } | Error::Singular { .. } | Error::NoConvergence => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(to_py)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(to_py)
}

fn parse_algebra(name: &str) -> PyResult<MatrixAlgebra> {
    serde_json::from_value(serde_json::Value::String(name.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown algebra '{name}'")))
}

/// Rotor data `(m, k, omega, eps, x0)`.
#[pyclass(name = "RotorParams", skip_from_py_object)]
#[derive(Clone)]
struct PyRotorParams {
    inner: RotorParams,
}

#[pymethods]
impl PyRotorParams {
    #[new]
    #[pyo3(signature = (m=1.0, k=1.0, omega=1.02, eps=0.1, x0=[0.0; 4]))]
    fn new(m: f64, k: f64, omega: f64, eps: f64, x0: [f64; 4]) -> PyResult<Self> {
        let inner = RotorParams {
            m,
            k_stiff: k,
            omega,
            eps,
            x0,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.m
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k_stiff
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }

    #[getter]
    fn x0(&self) -> [f64; 4] {
        self.inner.x0
    }

    fn natural_frequency(&self) -> f64 {
        self.inner.natural_frequency()
    }

    fn exact_envelope(&self) -> PyResult<f64> {
        self.inner.exact_envelope().map_err(to_py)
    }

    fn beat_period(&self) -> f64 {
        self.inner.beat_period()
    }

    /// Closed-form state `(q1, q2, p1, p2)` at time `t`.
    fn closed_form(&self, t: f64) -> PyResult<[f64; 4]> {
        rotor::closed_form_solution(&self.inner, t).map_err(to_py)
    }

    fn system(&self) -> PyResult<PyLinearSystem> {
        Ok(PyLinearSystem {
            inner: rotor::build_rotor(&self.inner).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "RotorParams(m={}, k={}, omega={}, eps={}, x0={:?})",
            p.m, p.k_stiff, p.omega, p.eps, p.x0
        )
    }
}

/// `ẋ = A(t)x + f(t)` with a declared matrix algebra.
#[pyclass(name = "LinearSystem", skip_from_py_object)]
#[derive(Clone)]
struct PyLinearSystem {
    inner: LinearSystem,
}

#[pymethods]
impl PyLinearSystem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serialisable system")
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega()
    }

    /// The element `(A, f, 1)` of the extended field.
    fn element(&self) -> PyLieElement {
        PyLieElement {
            inner: self.inner.element(),
        }
    }

    /// Step `method` from `t0` to `t_end`; returns `(times, states)`.
    fn integrate(
        &self,
        method_name: &str,
        x0: Vec<f64>,
        t0: f64,
        t_end: f64,
        h: f64,
    ) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let tr = integrators::integrate(method(method_name)?, &self.inner, &x0, t0, t_end, h)
            .map_err(to_py)?;
        Ok((tr.times, tr.states))
    }

    /// Exact flow from `(x, t)` over a span `s`.
    fn exact(&self, x: Vec<f64>, t: f64, s: f64) -> PyResult<Vec<f64>> {
        let st = integrators::ExtState::new(x, t);
        Ok(integrators::exact_reference(&self.inner, &st, s).map_err(to_py)?.x)
    }

    fn transfer_matrix(&self, method_name: &str, t: f64, h: f64) -> PyResult<Vec<Vec<f64>>> {
        Ok(integrators::transfer_matrix(method(method_name)?, &self.inner, t, h)
            .map_err(to_py)?
            .to_rows())
    }

    /// Errors per step size and the fitted log-log slope.
    fn convergence_order<'py>(
        &self,
        py: Python<'py>,
        method_name: &str,
        x0: Vec<f64>,
        t0: f64,
        t_end: f64,
        h_list: Vec<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = integrators::convergence_order(method(method_name)?, &self.inner, &x0, t0, t_end, &h_list)
            .map_err(to_py)?;
        let out = PyDict::new(py);
        let errors = PyDict::new(py);
        for p in &r.points {
            errors.set_item(p.h, p.error)?;
        }
        out.set_item("errors", errors)?;
        out.set_item("slope", r.slope)?;
        Ok(out)
    }
}

/// Triple `(A, f, alpha)` of the affine periodic field algebra.
#[pyclass(name = "LieElement", skip_from_py_object)]
#[derive(Clone)]
struct PyLieElement {
    inner: LieElement,
}

#[pymethods]
impl PyLieElement {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serialisable element")
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Field value `(A(t)x + f(t), α)` at `(x, t)`.
    fn eval_field(&self, x: Vec<f64>, t: f64) -> PyResult<(Vec<f64>, f64)> {
        self.inner.eval_field(&x, t).map_err(to_py)
    }

    fn bracket(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        Ok(Self {
            inner: lie::bracket(&self.inner, &other.inner).map_err(to_py)?,
        })
    }

    fn __sub__(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        Ok(Self {
            inner: LieElement::combine(1.0, &self.inner, -1.0, &other.inner).map_err(to_py)?,
        })
    }
}

#[pyfunction]
fn jacobi_defect(x: PyRef<'_, PyLieElement>, y: PyRef<'_, PyLieElement>, z: PyRef<'_, PyLieElement>) -> PyResult<f64> {
    lie::jacobi_defect(&x.inner, &y.inner, &z.inner).map_err(to_py)
}

/// Dimension of the constant-matrix sub-algebra with forcing order `k`.
#[pyfunction]
#[pyo3(signature = (n, k, algebra="symplectic"))]
fn algebra_dimension(n: usize, k: usize, algebra: &str) -> PyResult<usize> {
    let spec = AlgebraSpec {
        algebra: parse_algebra(algebra)?,
        n,
        omega: 1.0,
        vector_order: k,
        matrix_order: MatrixOrder::Bounded(0),
    };
    lie::dimension(&spec).map_err(to_py)
}

#[pyfunction]
fn spectral_radius(m: Vec<Vec<f64>>) -> PyResult<f64> {
    dense::spectral_radius(&matrix(m)?).map_err(to_py)
}

/// `‖MᵀJM − J‖` with the canonical `J` of matching size.
#[pyfunction]
fn symplectic_defect(m: Vec<Vec<f64>>) -> PyResult<f64> {
    let m = matrix(m)?;
    let j = SymplecticForm::canonical(m.rows()).map_err(to_py)?;
    dense::symplectic_defect(&m, &j).map_err(to_py)
}

#[pyfunction]
fn expm(m: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(dense::expm(&matrix(m)?).map_err(to_py)?.to_rows())
}

#[pymodule(name = "geomint")]
fn geomint_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRotorParams>()?;
    m.add_class::<PyLinearSystem>()?;
    m.add_class::<PyLieElement>()?;
    m.add_function(wrap_pyfunction!(jacobi_defect, m)?)?;
    m.add_function(wrap_pyfunction!(algebra_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add_function(wrap_pyfunction!(symplectic_defect, m)?)?;
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add("METHODS", Method::ALL.map(Method::name).to_vec())?;
    Ok(())
}
