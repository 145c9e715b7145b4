//! Python bindings: model parameters, spectra, classical limit, quenches
//! and the truncation-convergence harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use esqpt::classical::{
    critical_data as classical_critical_data, order_parameter as classical_order_parameter, phase_space_volume as classical_volume,
    ClassicalModel, MonteCarloOptions,
};
use esqpt::cli::truncation_convergence;
use esqpt::models::{build_hamiltonian, ModelKind, ModelParams, Parity};
use esqpt::quench::{critical_quench as core_critical_quench, run_quench, QuenchSetup, TimeConvention};
use esqpt::spectra::{self, BandwidthRule, Observable};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_kind(kind: &str) -> PyResult<ModelKind> {
    kind.parse().map_err(value_error)
}

/// Parameters of one model instance.
#[pyclass(name = "Model", module = "pyesqpt", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    params: ModelParams,
}

#[pymethods]
impl PyModel {
    /// `kind` is "su11", "jc" or "dicke"; `size` is M (4j for the SU(2)
    /// models). `parity` is +1, -1 or None (both) and applies to Dicke.
    #[new]
    #[pyo3(signature = (kind, size, coupling, n_trunc = 40, parity = Some(1)))]
    fn new(kind: &str, size: u32, coupling: f64, n_trunc: usize, parity: Option<i64>) -> PyResult<Self> {
        let kind = parse_kind(kind)?;
        let mut params = ModelParams::default_for(kind, size, coupling, n_trunc).map_err(value_error)?;
        if kind == ModelKind::Dicke {
            params.parity = parity.map(Parity::from_sign).transpose().map_err(value_error)?;
        }
        params.validate().map_err(value_error)?;
        Ok(Self { params })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.params.kind.name()
    }

    #[getter]
    fn size(&self) -> u32 {
        self.params.size
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.params.lambda
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.params.omega
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.params.omega0
    }

    #[getter]
    fn n_trunc(&self) -> usize {
        self.params.n_trunc
    }

    #[getter]
    fn dim(&self) -> PyResult<usize> {
        Ok(build_hamiltonian(&self.params, false).map_err(value_error)?.dim())
    }

    fn with_coupling(&self, coupling: f64) -> Self {
        Self {
            params: self.params.with_lambda(coupling),
        }
    }

    fn with_frequencies(&self, omega: f64, omega0: f64) -> Self {
        Self {
            params: self.params.with_frequencies(omega, omega0),
        }
    }

    fn with_n_trunc(&self, n_trunc: usize) -> Self {
        Self {
            params: self.params.with_n_trunc(n_trunc),
        }
    }

    /// Dense Hamiltonian as a list of rows.
    #[pyo3(signature = (scaled = false))]
    fn hamiltonian(&self, scaled: bool) -> PyResult<Vec<Vec<f64>>> {
        let h = build_hamiltonian(&self.params, scaled).map_err(value_error)?;
        Ok(h.to_dense().rows().into_iter().map(|r| r.to_vec()).collect())
    }

    /// Eigenvalues (and eigenvectors when `vectors` is true).
    #[pyo3(signature = (vectors = false))]
    fn spectrum(&self, vectors: bool) -> PyResult<PySpectrum> {
        let h = build_hamiltonian(&self.params, false).map_err(value_error)?;
        let inner = if vectors { spectra::diagonalize(&h) } else { spectra::eigenvalues(&h) }.map_err(value_error)?;
        Ok(PySpectrum { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(kind='{}', size={}, coupling={}, omega={}, omega0={})",
            self.params.kind.name(),
            self.params.size,
            self.params.lambda,
            self.params.omega,
            self.params.omega0
        )
    }
}

/// Eigenvalues and optional eigenvectors of one model instance.
#[pyclass(name = "Spectrum", module = "pyesqpt")]
struct PySpectrum {
    inner: spectra::Spectrum,
}

#[pymethods]
impl PySpectrum {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Energies E_i, or E_i/M when `scaled` is true.
    #[pyo3(signature = (scaled = true))]
    fn energies(&self, scaled: bool) -> Vec<f64> {
        self.inner.energies_in(scaled)
    }

    fn eigenvector(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner
            .eigenvector(index)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| PyValueError::new_err("no eigenvector: index out of range or vectors not computed"))
    }

    /// Smoothed level density as (grid, values).
    #[pyo3(signature = (scaled = true, window = 11, grid_points = 4001))]
    fn density(&self, scaled: bool, window: usize, grid_points: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let rule = BandwidthRule {
            window,
            grid_points,
            ..BandwidthRule::default()
        };
        let curve = spectra::smoothed_level_density(&self.inner, &rule, scaled).map_err(value_error)?;
        Ok((curve.grid, curve.values))
    }

    /// (scaled energy, expectation) pairs; `observable` is "Na_over_M" or
    /// "J0_over_j". Needs eigenvectors.
    #[pyo3(signature = (observable = None))]
    fn expectation_values(&self, observable: Option<&str>) -> PyResult<Vec<(f64, f64)>> {
        let obs = match observable {
            Some(o) => o.parse().map_err(value_error)?,
            None => Observable::default_for(self.inner.params().kind),
        };
        spectra::expectation_values(&self.inner, obs).map_err(value_error)
    }
}

/// Scaled levels ℰ_i(λ) as one list per coupling.
#[pyfunction]
fn level_dynamics(model: &PyModel, couplings: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let table = spectra::level_dynamics(&model.params, &couplings).map_err(value_error)?;
    Ok((0..table.lambdas.len())
        .map(|l| (0..table.levels()).map(|i| table.scaled(l, i)).collect())
        .collect())
}

fn classical_model(kind: &str, coupling: f64) -> PyResult<ClassicalModel> {
    Ok(ClassicalModel::standard(parse_kind(kind)?, coupling))
}

/// (λ_c0, ℰ_c) of a model with its standard frequencies.
#[pyfunction]
fn critical_data(kind: &str) -> PyResult<(f64, f64)> {
    let d = classical_critical_data(&classical_model(kind, 1.0)?);
    Ok((d.lambda_c0, d.energy_c))
}

#[pyfunction]
fn order_parameter(kind: &str, g: f64) -> PyResult<f64> {
    classical_order_parameter(&classical_model(kind, 1.0)?, g).map_err(value_error)
}

/// Ω(ℰ) and its statistical error.
#[pyfunction]
#[pyo3(signature = (kind, coupling, energy, samples = 2_000_000, seed = 0))]
fn phase_space_volume(kind: &str, coupling: f64, energy: f64, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let mc = MonteCarloOptions {
        samples,
        seed,
        ..MonteCarloOptions::default()
    };
    let v = classical_volume(&classical_model(kind, coupling)?, energy, &mc).map_err(value_error)?;
    Ok((v.value, v.stderr))
}

/// Quench from eigenstate `initial_index` of `model` to coupling `coupling2`.
#[pyfunction]
#[pyo3(signature = (model, coupling2, times, scaled_time = true, initial_index = 0))]
fn quench<'py>(
    py: Python<'py>,
    model: &PyModel,
    coupling2: f64,
    times: Vec<f64>,
    scaled_time: bool,
    initial_index: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let time = if scaled_time { TimeConvention::Scaled } else { TimeConvention::Unscaled };
    let setup = QuenchSetup::new(model.params, coupling2)
        .with_initial_index(initial_index)
        .with_times(times, time);
    let r = run_quench(&setup).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("overlaps", r.overlaps.clone())?;
    d.set_item("energies", r.scaled_energies2())?;
    d.set_item("survival", r.survival.clone())?;
    d.set_item("initial_energy", r.initial_energy)?;
    d.set_item("slope", r.slope)?;
    d.set_item("mean_energy", r.mean_energy)?;
    d.set_item("completeness", r.completeness)?;
    d.set_item("inverse_participation", r.inverse_participation())?;
    Ok(d)
}

/// Coupling jump that centers the post-quench energy on ℰ_c.
#[pyfunction]
#[pyo3(signature = (model, initial_index = 0))]
fn critical_quench<'py>(py: Python<'py>, model: &PyModel, initial_index: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = core_critical_quench(&model.params, initial_index).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("lambda1", c.lambda1)?;
    d.set_item("delta_c", c.delta_c)?;
    d.set_item("lambda2", c.lambda2)?;
    d.set_item("energy1", c.energy1)?;
    d.set_item("slope", c.slope)?;
    d.set_item("energy_c", c.energy_c)?;
    d.set_item("mean_energy2", c.mean_energy2)?;
    d.set_item("at_boundary", c.at_boundary)?;
    Ok(d)
}

/// Dicke cutoff scan; returns (drifts, chosen n_trunc or None).
#[pyfunction]
#[pyo3(signature = (model, schedule, energy_max, tol = 1e-6, energy_min = None))]
fn converge(
    model: &PyModel,
    schedule: Vec<usize>,
    energy_max: f64,
    tol: f64,
    energy_min: Option<f64>,
) -> PyResult<(Vec<f64>, Option<usize>)> {
    let r = truncation_convergence(&model.params, &schedule, energy_min, energy_max, tol).map_err(value_error)?;
    Ok((r.drifts(), r.chosen))
}

#[pymodule]
fn pyesqpt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModel>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(level_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(critical_data, m)?)?;
    m.add_function(wrap_pyfunction!(order_parameter, m)?)?;
    m.add_function(wrap_pyfunction!(phase_space_volume, m)?)?;
    m.add_function(wrap_pyfunction!(quench, m)?)?;
    m.add_function(wrap_pyfunction!(critical_quench, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    Ok(())
}
