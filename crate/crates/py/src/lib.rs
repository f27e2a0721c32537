//! Python bindings for the qbm-core library: Hamiltonians, ansätze, exact
//! thermal states, analytic gradients/Hessians, the shot-based gradient
//! estimator, the SGD trainer, and the sampling oracles.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qbm_core::error::Error;
use qbm_core::{circuit, sampling, sgd, thermal};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::InvalidArgument(_) | Error::DimensionMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// H = Σ_k α_k·s_k·P_k parsed from the "<coefficient> <pauli-word>" format.
#[pyclass(frozen)]
struct Hamiltonian {
    inner: qbm_core::WeightedPauliSum,
}

#[pymethods]
impl Hamiltonian {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Hamiltonian {
            inner: qbm_core::WeightedPauliSum::parse(text).map_err(to_py_err)?,
        })
    }

    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    fn one_norm(&self) -> f64 {
        self.inner.one_norm()
    }

    /// (signed_coefficient, pauli_word) pairs.
    fn terms(&self) -> Vec<(f64, String)> {
        self.inner
            .terms()
            .iter()
            .map(|t| (t.signed_coefficient(), t.string.to_string()))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Hamiltonian(n_qubits={}, terms={}, one_norm={})",
            self.inner.n_qubits(),
            self.inner.num_terms(),
            self.inner.one_norm()
        )
    }
}

/// Trial-Hamiltonian ansatz: one Pauli word per line.
#[pyclass(frozen)]
struct Ansatz {
    inner: thermal::Ansatz,
}

#[pymethods]
impl Ansatz {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Ansatz {
            inner: thermal::Ansatz::parse(text).map_err(to_py_err)?,
        })
    }

    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn num_parameters(&self) -> usize {
        self.inner.num_parameters()
    }

    fn generators(&self) -> Vec<String> {
        self.inner.generators().iter().map(|g| g.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Ansatz(n_qubits={}, num_parameters={})",
            self.inner.n_qubits(),
            self.inner.num_parameters()
        )
    }
}

/// Exact thermal state ρ(θ) = e^{-G(θ)}/Z(θ).
#[pyclass(frozen)]
struct ThermalState {
    inner: thermal::ThermalState,
}

#[pymethods]
impl ThermalState {
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn theta(&self) -> Vec<f64> {
        self.inner.theta().to_vec()
    }

    fn log_partition(&self) -> f64 {
        self.inner.log_partition()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().iter().cloned().collect()
    }

    /// Dense density matrix as a nested list of complex numbers.
    fn rho(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.rho();
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "ThermalState(n_qubits={}, theta={:?})",
            self.inner.n_qubits(),
            self.inner.theta()
        )
    }
}

#[pyfunction]
fn thermal_state(ansatz: &Ansatz, theta: Vec<f64>) -> PyResult<ThermalState> {
    Ok(ThermalState {
        inner: thermal::thermal_state(&ansatz.inner, &theta).map_err(to_py_err)?,
    })
}

/// f(θ) = Tr[Hρ(θ)].
#[pyfunction]
fn objective(hamiltonian: &Hamiltonian, state: &ThermalState) -> PyResult<f64> {
    thermal::objective(&hamiltonian.inner, &state.inner).map_err(to_py_err)
}

#[pyfunction]
fn analytic_gradient(
    hamiltonian: &Hamiltonian,
    ansatz: &Ansatz,
    state: &ThermalState,
) -> PyResult<Vec<f64>> {
    thermal::analytic_gradient(&hamiltonian.inner, &ansatz.inner, &state.inner).map_err(to_py_err)
}

#[pyfunction]
fn analytic_hessian(
    hamiltonian: &Hamiltonian,
    ansatz: &Ansatz,
    state: &ThermalState,
) -> PyResult<Vec<Vec<f64>>> {
    let h = thermal::analytic_hessian(&hamiltonian.inner, &ansatz.inner, &state.inner)
        .map_err(to_py_err)?;
    Ok((0..h.nrows())
        .map(|r| (0..h.ncols()).map(|c| h[(r, c)]).collect())
        .collect())
}

/// ℓ = 2√2·J^{3/4}·‖α‖₁^{1/2}.
#[pyfunction]
fn smoothness_constant(ansatz: &Ansatz, alpha_one_norm: f64) -> f64 {
    thermal::smoothness_constant(&ansatz.inner, alpha_one_norm)
}

/// The high-peak-tent density p(t).
#[pyfunction]
fn pdf(t: f64) -> f64 {
    sampling::pdf(t)
}

/// Quadrature of ∫p(t)e^{-iωt}dt; equals tanh(ω/2)/(ω/2).
#[pyfunction]
fn fourier_oracle(omega: f64) -> PyResult<f64> {
    sampling::fourier_oracle(omega).map_err(to_py_err)
}

#[pyfunction]
fn abs_t_mean_oracle() -> PyResult<f64> {
    sampling::abs_t_mean_oracle().map_err(to_py_err)
}

/// Draw `count` samples of t ~ p(t) with the table sampler.
#[pyfunction]
#[pyo3(signature = (count, seed, t_max=15.0, grid_size=65536))]
fn sample_t(count: usize, seed: u64, t_max: f64, grid_size: usize) -> PyResult<Vec<f64>> {
    let sampler = sampling::HighPeakTentSampler::build(t_max, grid_size).map_err(to_py_err)?;
    let mut rng = circuit::derived_stream(seed, 0, 0, 0);
    Ok((0..count).map(|_| sampler.sample_t(&mut rng)).collect())
}

/// One seeded run of the shot-based gradient estimator.
#[pyclass(frozen)]
struct GradientEstimate {
    #[pyo3(get)]
    components: Vec<f64>,
    #[pyo3(get)]
    first_term: Vec<f64>,
    #[pyo3(get)]
    second_term: Vec<f64>,
    #[pyo3(get)]
    standard_errors: Vec<f64>,
    #[pyo3(get)]
    preparations: u64,
}

#[pyfunction]
#[pyo3(signature = (hamiltonian, ansatz, state, epsilon, seed, fixed_shots=None))]
fn qbge(
    hamiltonian: &Hamiltonian,
    ansatz: &Ansatz,
    state: &ThermalState,
    epsilon: f64,
    seed: u64,
    fixed_shots: Option<u64>,
) -> PyResult<GradientEstimate> {
    let (eps_i, delta_i) = sgd::sub_estimator_targets(
        epsilon,
        ansatz.inner.num_parameters(),
        hamiltonian.inner.one_norm(),
    )
    .map_err(to_py_err)?;
    let mut cfg =
        circuit::EstimatorConfig::new(eps_i, eps_i, delta_i, delta_i, seed).map_err(to_py_err)?;
    cfg.fixed_shots = fixed_shots;
    let sampler = sampling::HighPeakTentSampler::build(
        sampling::DEFAULT_T_MAX,
        sampling::DEFAULT_GRID_SIZE,
    )
    .map_err(to_py_err)?;
    let est = circuit::qbge(
        &hamiltonian.inner,
        &ansatz.inner,
        &state.inner,
        &cfg,
        &sampler,
        0,
    )
    .map_err(to_py_err)?;
    let standard_errors = (0..est.components.len())
        .map(|j| est.standard_error(j))
        .collect();
    Ok(GradientEstimate {
        components: est.components,
        first_term: est.first_term,
        second_term: est.second_term,
        standard_errors,
        preparations: est.preparations,
    })
}

/// Trainer result in columnar form plus the summary scalars.
#[pyclass(frozen)]
struct TrainResult {
    #[pyo3(get)]
    thetas: Vec<Vec<f64>>,
    #[pyo3(get)]
    f_values: Vec<f64>,
    #[pyo3(get)]
    grad_norms: Vec<f64>,
    #[pyo3(get)]
    theta_final: Vec<f64>,
    #[pyo3(get)]
    energy_final: f64,
    #[pyo3(get)]
    energy_final_estimate: f64,
    #[pyo3(get)]
    energy_min_trajectory: f64,
    #[pyo3(get)]
    min_grad_norm: f64,
    #[pyo3(get)]
    total_preparations: u64,
    #[pyo3(get)]
    eta: f64,
    #[pyo3(get)]
    ell: f64,
    #[pyo3(get)]
    iterations_run: u64,
}

#[pyfunction]
#[pyo3(signature = (hamiltonian, ansatz, epsilon, seed=0, shots=None, max_iterations=None, delta=None, theta0=None))]
#[allow(clippy::too_many_arguments)]
fn train(
    hamiltonian: &Hamiltonian,
    ansatz: &Ansatz,
    epsilon: f64,
    seed: u64,
    shots: Option<&Bound<'_, PyAny>>,
    max_iterations: Option<u64>,
    delta: Option<f64>,
    theta0: Option<Vec<f64>>,
) -> PyResult<TrainResult> {
    // shots: None or "auto" (Hoeffding counts), "exact" (analytic gradient),
    // or an integer per sub-estimator
    let shot_mode = match shots {
        None => sgd::ShotMode::HoeffdingExact,
        Some(any) => {
            if let Ok(s) = any.extract::<String>() {
                match s.as_str() {
                    "auto" => sgd::ShotMode::HoeffdingExact,
                    "exact" => sgd::ShotMode::Analytic,
                    other => {
                        return Err(PyValueError::new_err(format!(
                            "shots must be 'auto', 'exact', or an integer, got '{other}'"
                        )))
                    }
                }
            } else {
                sgd::ShotMode::Fixed(any.extract::<u64>()?)
            }
        }
    };
    let cfg = sgd::TrainConfig {
        epsilon,
        delta_bound: delta,
        max_iterations_override: max_iterations,
        seed,
        shot_mode,
        theta0,
    };
    let out = sgd::qbm_gse(&hamiltonian.inner, &ansatz.inner, &cfg).map_err(to_py_err)?;
    Ok(TrainResult {
        thetas: out.records.iter().map(|r| r.theta.clone()).collect(),
        f_values: out.records.iter().map(|r| r.f_analytic).collect(),
        grad_norms: out.records.iter().map(|r| r.grad_analytic_norm).collect(),
        theta_final: out.summary.theta_final,
        energy_final: out.summary.energy_final,
        energy_final_estimate: out.summary.energy_final_estimate,
        energy_min_trajectory: out.summary.energy_min_trajectory,
        min_grad_norm: out.summary.min_grad_norm,
        total_preparations: out.summary.total_preparations,
        eta: out.summary.hyper.eta,
        ell: out.summary.hyper.ell,
        iterations_run: out.summary.iterations_run,
    })
}

/// N = 2J·⌈12ℓΔ/ε²⌉·⌈8J‖α‖₁²·ln(16J‖α‖₁²/ε²)/ε²⌉.
#[pyfunction]
fn sample_complexity(
    epsilon: f64,
    num_parameters: u64,
    alpha_one_norm: f64,
    ell: f64,
    delta: f64,
) -> PyResult<u128> {
    sgd::sample_complexity(epsilon, num_parameters, alpha_one_norm, ell, delta).map_err(to_py_err)
}

#[pymodule]
fn qbm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Hamiltonian>()?;
    m.add_class::<Ansatz>()?;
    m.add_class::<ThermalState>()?;
    m.add_class::<GradientEstimate>()?;
    m.add_class::<TrainResult>()?;
    m.add_function(wrap_pyfunction!(thermal_state, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(smoothness_constant, m)?)?;
    m.add_function(wrap_pyfunction!(pdf, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(abs_t_mean_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(sample_t, m)?)?;
    m.add_function(wrap_pyfunction!(qbge, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(sample_complexity, m)?)?;
    Ok(())
}
