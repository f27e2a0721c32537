//! The stochastic-gradient trainer for ground-state energy estimation:
//! hyperparameter derivation (η = 1/ℓ, M = ⌈12Δℓ/ε²⌉, sub-estimator
//! precisions), the training loop with per-iteration trajectory records,
//! shot-based energy measurement, and the total sample-complexity formula.

use crate::circuit::{derived_stream, qbge, EstimatorConfig};
use crate::error::{Error, Result};
use crate::pauli::{expectation, WeightedPauliSum};
use crate::sampling::{sample_term_index, HighPeakTentSampler, DEFAULT_GRID_SIZE, DEFAULT_T_MAX};
use crate::thermal::{
    analytic_gradient, objective, smoothness_constant, thermal_state, Ansatz,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How the gradient estimate is produced at each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotMode {
    /// N₁, N₂ from the Hoeffding formulas at the derived (ε_i, δ_i).
    HoeffdingExact,
    /// Fixed shot count per sub-estimator.
    Fixed(u64),
    /// Estimator noise disabled: updates use the analytic gradient and
    /// consume no state preparations.
    Analytic,
}

/// Trainer configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Target stationarity ε ∈ (0, 1).
    pub epsilon: f64,
    /// Δ ≥ f(θ₀) - inf f; `None` derives the certified default bound.
    pub delta_bound: Option<f64>,
    /// Cap on the iteration count; below the formula's M the theoretical
    /// guarantee is void (flagged in the summary).
    pub max_iterations_override: Option<u64>,
    pub seed: u64,
    pub shot_mode: ShotMode,
    /// Fixed initial point; `None` draws each θ_j uniformly from [-0.5, 0.5].
    pub theta0: Option<Vec<f64>>,
}

/// Everything step 1 of the trainer derives from (ε, Δ, J, ‖α‖₁).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub ell: f64,
    pub eta: f64,
    /// M = ⌈12Δℓ/ε²⌉.
    pub iterations: u64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub n1: u64,
    pub n2: u64,
}

/// Sub-estimator targets ε₁ = ε₂ = ε/(2√(2J)) and δ₁ = δ₂ = ε²/(8J‖α‖₁²),
/// chosen so the stochastic-gradient variance stays below ε²/2.
pub fn sub_estimator_targets(
    epsilon: f64,
    num_parameters: usize,
    alpha_one_norm: f64,
) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let jn = num_parameters as f64;
    let eps_i = epsilon / (2.0 * (2.0 * jn).sqrt());
    let delta_i = epsilon * epsilon / (8.0 * jn * alpha_one_norm * alpha_one_norm);
    if delta_i.is_nan() || delta_i >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "derived failure probability {delta_i} is not below 1; \
             epsilon {epsilon} is too large for J = {jn}, ‖α‖₁ = {alpha_one_norm}"
        )));
    }
    Ok((eps_i, delta_i))
}

/// η = 1/ℓ, M = ⌈12Δℓ/ε²⌉, ε₁ = ε₂ = ε/(2√(2J)), δ₁ = δ₂ = ε²/(8J‖α‖₁²),
/// and the Hoeffding shot counts at those targets.
pub fn derive_hyperparameters(
    h: &WeightedPauliSum,
    ansatz: &Ansatz,
    epsilon: f64,
    delta: f64,
) -> Result<Hyperparameters> {
    if delta.is_nan() || delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delta bound must be positive and finite, got {delta}"
        )));
    }
    let norm = h.one_norm();
    let (eps_i, delta_i) = sub_estimator_targets(epsilon, ansatz.num_parameters(), norm)?;
    let ell = smoothness_constant(ansatz, norm);
    let eta = 1.0 / ell;
    let iterations = (12.0 * delta * ell / (epsilon * epsilon)).ceil() as u64;
    let shots = EstimatorConfig::hoeffding_shots(eps_i, delta_i, norm);
    Ok(Hyperparameters {
        ell,
        eta,
        iterations,
        epsilon1: eps_i,
        epsilon2: eps_i,
        delta1: delta_i,
        delta2: delta_i,
        n1: shots,
        n2: shots,
    })
}

/// Certified upper bound on Δ = f(θ₀) - inf f: since inf f ≥ -‖H‖ ≥ -‖α‖₁,
/// return f(θ₀) + ‖α‖₁.
pub fn default_delta(h: &WeightedPauliSum, ansatz: &Ansatz, theta0: &[f64]) -> Result<f64> {
    let f0 = objective(h, &thermal_state(ansatz, theta0)?)?;
    Ok(f0 + h.one_norm())
}

/// One trajectory row. `f_analytic` and `grad_analytic_norm` are exact
/// diagnostics the quantum algorithm cannot see; they come for free from the
/// exact backend and are the quantities the convergence guarantee bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub iteration: u64,
    pub theta: Vec<f64>,
    pub f_analytic: f64,
    pub grad_analytic_norm: f64,
    pub grad_estimate: Vec<f64>,
    /// Cumulative thermal-state preparations after this iteration.
    pub preparations_used: u64,
}

/// End-of-run summary. Both output conventions are reported: the energy at
/// θ_M and the minimum over the recorded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub hyper: Hyperparameters,
    pub delta_used: f64,
    pub delta_is_default: bool,
    pub iterations_run: u64,
    /// True when the cap cut the run below the formula's M, voiding the
    /// theoretical guarantee.
    pub capped_below_formula: bool,
    pub theta_final: Vec<f64>,
    /// Analytic f(θ_M).
    pub energy_final: f64,
    /// Shot-based estimate of f(θ_M) (exact in analytic mode).
    pub energy_final_estimate: f64,
    /// min over m of f(θ_m), θ₀ through θ_M inclusive.
    pub energy_min_trajectory: f64,
    /// min over m of the analytic ‖∇f(θ_m)‖, θ₀ through θ_M inclusive.
    pub min_grad_norm: f64,
    pub total_preparations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub records: Vec<TrainRecord>,
    pub summary: TrainSummary,
}

/// Run the trainer: θ_{m+1} = θ_m - η·ḡ(θ_m) for M iterations, recording the
/// analytic objective and gradient norm at every iterate.
pub fn qbm_gse(h: &WeightedPauliSum, ansatz: &Ansatz, cfg: &TrainConfig) -> Result<TrainOutput> {
    let jn = ansatz.num_parameters();
    let theta0 = match &cfg.theta0 {
        Some(t) => {
            if t.len() != jn {
                return Err(Error::DimensionMismatch(format!(
                    "theta0 has {} entries but the ansatz has {jn} parameters",
                    t.len()
                )));
            }
            t.clone()
        }
        None => {
            let mut rng = derived_stream(cfg.seed, 0, 0, 2);
            (0..jn).map(|_| rng.gen_range(-0.5..0.5)).collect()
        }
    };
    let delta_is_default = cfg.delta_bound.is_none();
    let delta_used = match cfg.delta_bound {
        Some(d) => d,
        None => default_delta(h, ansatz, &theta0)?,
    };
    let hyper = derive_hyperparameters(h, ansatz, cfg.epsilon, delta_used)?;

    let est_cfg = EstimatorConfig {
        epsilon1: hyper.epsilon1,
        epsilon2: hyper.epsilon2,
        delta1: hyper.delta1,
        delta2: hyper.delta2,
        seed: cfg.seed,
        fixed_shots: match cfg.shot_mode {
            ShotMode::Fixed(c) => Some(c),
            _ => None,
        },
    };
    let iterations = match cfg.max_iterations_override {
        Some(cap) => cap.min(hyper.iterations),
        None => hyper.iterations,
    };
    let capped_below_formula = iterations < hyper.iterations;

    let sampler = match cfg.shot_mode {
        ShotMode::Analytic => None,
        _ => Some(HighPeakTentSampler::build(DEFAULT_T_MAX, DEFAULT_GRID_SIZE)?),
    };

    let mut theta = theta0;
    let mut records = Vec::with_capacity(iterations as usize + 1);
    let mut preparations = 0u64;
    let mut min_f = f64::INFINITY;
    let mut min_grad = f64::INFINITY;
    for m in 0..iterations {
        let state = thermal_state(ansatz, &theta)?;
        let f = objective(h, &state)?;
        let grad = analytic_gradient(h, ansatz, &state)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        min_f = min_f.min(f);
        min_grad = min_grad.min(grad_norm);

        let estimate = match cfg.shot_mode {
            ShotMode::Analytic => grad.clone(),
            _ => {
                let est = qbge(h, ansatz, &state, &est_cfg, sampler.as_ref().unwrap(), m)?;
                preparations += est.preparations;
                est.components
            }
        };
        records.push(TrainRecord {
            iteration: m,
            theta: theta.clone(),
            f_analytic: f,
            grad_analytic_norm: grad_norm,
            grad_estimate: estimate.clone(),
            preparations_used: preparations,
        });

        for (tj, gj) in theta.iter_mut().zip(estimate.iter()) {
            *tj -= hyper.eta * gj;
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite parameter after iteration {m}: {theta:?}"
            )));
        }
    }

    let final_state = thermal_state(ansatz, &theta)?;
    let energy_final = objective(h, &final_state)?;
    let final_grad = analytic_gradient(h, ansatz, &final_state)?;
    let final_grad_norm = final_grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    min_f = min_f.min(energy_final);
    min_grad = min_grad.min(final_grad_norm);

    let energy_final_estimate = match cfg.shot_mode {
        ShotMode::Analytic => energy_final,
        ShotMode::Fixed(c) => {
            let mut rng = derived_stream(cfg.seed, iterations, 0, 3);
            preparations += c;
            measure_energy(h, &final_state, Some(c), &mut rng)?
        }
        ShotMode::HoeffdingExact => {
            let mut rng = derived_stream(cfg.seed, iterations, 0, 3);
            preparations += hyper.n2;
            measure_energy(h, &final_state, Some(hyper.n2), &mut rng)?
        }
    };

    Ok(TrainOutput {
        summary: TrainSummary {
            hyper,
            delta_used,
            delta_is_default,
            iterations_run: iterations,
            capped_below_formula,
            theta_final: theta,
            energy_final,
            energy_final_estimate,
            energy_min_trajectory: min_f,
            min_grad_norm: min_grad,
            total_preparations: preparations,
        },
        records,
    })
}

/// Shot-based estimate of Tr[Hρ]: sample k ~ α_k/‖α‖₁, measure the ±1 Pauli
/// outcome of P_k under ρ, average ‖α‖₁·sign_k·outcome. `shots = None` is the
/// exact sentinel (returns the analytic objective).
pub fn measure_energy<R: Rng + ?Sized>(
    h: &WeightedPauliSum,
    state: &crate::thermal::ThermalState,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<f64> {
    let Some(shots) = shots else {
        return expectation(&h.dense()?, state.rho());
    };
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let alpha = h.alpha();
    let norm = h.one_norm();
    let expectations: Vec<f64> = h
        .terms()
        .iter()
        .map(|t| expectation(&t.string.dense()?, state.rho()))
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    for _ in 0..shots {
        let k = sample_term_index(&alpha, rng)?;
        let p_plus = 0.5 * (1.0 + expectations[k]);
        let outcome: f64 = if rng.gen::<f64>() < p_plus { 1.0 } else { -1.0 };
        sum += norm * h.terms()[k].sign * outcome;
    }
    Ok(sum / shots as f64)
}

/// Total preparation count of the trainer at target ε:
/// N = 2J·⌈12ℓΔ/ε²⌉·⌈8J‖α‖₁²·ln(16J‖α‖₁²/ε²)/ε²⌉, exact in integers.
pub fn sample_complexity(
    epsilon: f64,
    num_parameters: u64,
    alpha_one_norm: f64,
    ell: f64,
    delta: f64,
) -> Result<u128> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let j = num_parameters as f64;
    let a2 = alpha_one_norm * alpha_one_norm;
    let iteration_factor = (12.0 * ell * delta / (epsilon * epsilon)).ceil() as u128;
    let shot_factor =
        (8.0 * j * a2 * (16.0 * j * a2 / (epsilon * epsilon)).ln() / (epsilon * epsilon)).ceil()
            as u128;
    Ok(2 * num_parameters as u128 * iteration_factor * shot_factor)
}
