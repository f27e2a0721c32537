//! Distribution-exact simulation of the Hadamard-test primitive and the
//! shot-based gradient estimators.
//!
//! Outcome probabilities are computed from dense algebra and Bernoulli
//! sampled rather than simulating statevector collapse: the statistics are
//! identical and the exact truth values stay available for the 5σ tests.
//! A parsed negative Hamiltonian coefficient contributes its sign to the
//! shot value, never to the sampling weights α.

use crate::error::{Error, Result};
use crate::pauli::{check_same_dim, CMatrix, WeightedPauliSum};
use crate::sampling::{sample_term_index, HighPeakTentSampler};
use crate::thermal::{Ansatz, ThermalState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Precision and failure-probability targets plus the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Master seed; per-(iteration, component, sub-estimator) streams are
    /// split off deterministically.
    pub seed: u64,
    /// Explicit shot count overriding the Hoeffding formula for both
    /// sub-estimators (statistical tests at controlled budgets).
    pub fixed_shots: Option<u64>,
}

impl EstimatorConfig {
    pub fn new(epsilon1: f64, epsilon2: f64, delta1: f64, delta2: f64, seed: u64) -> Result<Self> {
        let cfg = EstimatorConfig {
            epsilon1,
            epsilon2,
            delta1,
            delta2,
            seed,
            fixed_shots: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon1.is_nan() || self.epsilon1 <= 0.0 || self.epsilon2.is_nan() || self.epsilon2 <= 0.0 {
            return Err(Error::InvalidArgument(
                "estimator precisions must be positive".into(),
            ));
        }
        let delta_ok = |d: f64| d > 0.0 && d < 1.0;
        if !delta_ok(self.delta1) || !delta_ok(self.delta2) {
            return Err(Error::InvalidArgument(
                "failure probabilities must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// N = ⌈2‖α‖₁²·ln(2/δ)/ε²⌉, at least 1.
    pub fn hoeffding_shots(epsilon: f64, delta: f64, alpha_one_norm: f64) -> u64 {
        let n = (2.0 * alpha_one_norm * alpha_one_norm * (2.0 / delta).ln() / (epsilon * epsilon))
            .ceil();
        (n as u64).max(1)
    }

    pub fn shots_first(&self, alpha_one_norm: f64) -> u64 {
        self.fixed_shots
            .unwrap_or_else(|| Self::hoeffding_shots(self.epsilon1, self.delta1, alpha_one_norm))
    }

    pub fn shots_second(&self, alpha_one_norm: f64) -> u64 {
        self.fixed_shots
            .unwrap_or_else(|| Self::hoeffding_shots(self.epsilon2, self.delta2, alpha_one_norm))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based stream split: one independent ChaCha stream per
/// (iteration, component, sub-estimator) triple under a single master seed.
pub fn derived_stream(master: u64, iteration: u64, component: u64, sub: u64) -> ChaCha8Rng {
    let mut s = splitmix(master);
    for coord in [iteration, component, sub] {
        s = splitmix(s ^ coord.wrapping_mul(0xd6e8_feb8_6659_fd93));
    }
    ChaCha8Rng::seed_from_u64(s)
}

fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|a| m[(a, a)]).sum()
}

fn check_unitary(u: &CMatrix, label: &str) -> Result<()> {
    let dim = u.nrows();
    let gap = (u.adjoint() * u - CMatrix::identity(dim, dim)).norm();
    if gap > 1e-9 * (dim as f64).sqrt() {
        return Err(Error::Numerical(format!(
            "{label} is not unitary: ‖U†U - I‖ = {gap:e}"
        )));
    }
    Ok(())
}

/// Probability of outcome 0 in the Hadamard test with branch unitaries
/// u0, u1 on state ρ: (2 + Tr[(u1†u0 + u0†u1)ρ])/4.
pub fn hadamard_test_p0(u0: &CMatrix, u1: &CMatrix, rho: &CMatrix) -> Result<f64> {
    check_same_dim(u0, rho)?;
    check_same_dim(u1, rho)?;
    check_unitary(u0, "u0")?;
    check_unitary(u1, "u1")?;
    let overlap = trace(&(u1.adjoint() * u0 * rho)).re;
    let p0 = 0.25 * (2.0 + 2.0 * overlap);
    if !(-1e-9..=1.0 + 1e-9).contains(&p0) {
        return Err(Error::Numerical(format!(
            "Hadamard-test probability {p0} outside [0, 1]"
        )));
    }
    Ok(p0.clamp(0.0, 1.0))
}

/// Branch unitaries of the first-term circuit: u0 = e^{-iG(θ)t} and
/// u1 = P_k·e^{-iG(θ)t}·G_j, with P_k the unsigned Pauli of term k
/// (the term sign multiplies the shot value instead).
pub fn conjugation_unitaries(
    state: &ThermalState,
    ansatz: &Ansatz,
    h: &WeightedPauliSum,
    j: usize,
    k: usize,
    t: f64,
) -> Result<(CMatrix, CMatrix)> {
    let term = h.terms().get(k).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "Hamiltonian term index {k} out of range (K = {})",
            h.num_terms()
        ))
    })?;
    let gj = ansatz.generator_dense(j)?;
    let u0 = state.evolution(t);
    let u1 = term.string.dense()? * &u0 * gj;
    Ok((u0, u1))
}

/// Exact outcome probabilities for the estimator circuits, precomputed in
/// the eigenbasis of G(θ).
///
/// For each (k, j) pair, Re Tr[P_k·e^{-iGt}·G_j·e^{iGt}·ρ] = Re Σ c·e^{iωt}
/// over eigenvalue gaps ω, so one table lookup plus a sin/cos pass prices a
/// shot at any sampled t.
pub struct ShotOracle {
    pair_tables: Vec<Vec<(Complex64, f64)>>,
    term_expectations: Vec<f64>,
    generator_expectations: Vec<f64>,
    alpha: Vec<f64>,
    signs: Vec<f64>,
    one_norm: f64,
    num_params: usize,
}

impl ShotOracle {
    pub fn build(h: &WeightedPauliSum, ansatz: &Ansatz, state: &ThermalState) -> Result<Self> {
        check_same_dim(&h.dense()?, state.rho())?;
        if ansatz.n_qubits() != state.n_qubits() {
            return Err(Error::DimensionMismatch(
                "ansatz and state qubit counts differ".into(),
            ));
        }
        let dim = state.dim();
        let probs = state.probs();
        let terms_tilde: Vec<CMatrix> = h
            .terms()
            .iter()
            .map(|t| Ok(state.to_eigenbasis(&t.string.dense()?)))
            .collect::<Result<_>>()?;
        let gens_tilde: Vec<CMatrix> = (0..ansatz.num_parameters())
            .map(|j| Ok(state.to_eigenbasis(&ansatz.generator_dense(j)?)))
            .collect::<Result<_>>()?;

        let lambda = state.eigenvalues();
        let mut pair_tables = Vec::with_capacity(h.num_terms() * ansatz.num_parameters());
        for pk in &terms_tilde {
            for gj in &gens_tilde {
                let mut table = Vec::new();
                for a in 0..dim {
                    for b in 0..dim {
                        let c = pk[(a, b)] * gj[(b, a)] * Complex64::new(probs[a], 0.0);
                        if c.norm_sqr() > 1e-40 {
                            table.push((c, lambda[a] - lambda[b]));
                        }
                    }
                }
                pair_tables.push(table);
            }
        }

        let term_expectations = terms_tilde
            .iter()
            .map(|pk| (0..dim).map(|a| pk[(a, a)].re * probs[a]).sum())
            .collect();
        let generator_expectations = gens_tilde
            .iter()
            .map(|gj| (0..dim).map(|a| gj[(a, a)].re * probs[a]).sum())
            .collect();

        Ok(ShotOracle {
            pair_tables,
            term_expectations,
            generator_expectations,
            alpha: h.alpha(),
            signs: h.terms().iter().map(|t| t.sign).collect(),
            one_norm: h.one_norm(),
            num_params: ansatz.num_parameters(),
        })
    }

    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    /// Re Tr[P_k·e^{-iGt}·G_j·e^{iGt}·ρ].
    pub fn conjugated_overlap(&self, j: usize, k: usize, t: f64) -> f64 {
        let mut re = 0.0;
        for &(c, omega) in &self.pair_tables[k * self.num_params + j] {
            let (sin, cos) = (omega * t).sin_cos();
            re += c.re * cos - c.im * sin;
        }
        re
    }

    /// ⟨P_k⟩ under ρ(θ) (unsigned Pauli).
    pub fn term_expectation(&self, k: usize) -> f64 {
        self.term_expectations[k]
    }

    /// ⟨G_j⟩ under ρ(θ).
    pub fn generator_expectation(&self, j: usize) -> f64 {
        self.generator_expectations[j]
    }
}

/// Mean plus per-shot population variance of one sub-estimator run.
#[derive(Debug, Clone, Copy)]
struct TermStats {
    mean: f64,
    shot_variance: f64,
    shots: u64,
}

fn run_first_term<R: Rng + ?Sized>(
    oracle: &ShotOracle,
    j: usize,
    shots: u64,
    sampler: &HighPeakTentSampler,
    rng: &mut R,
) -> Result<TermStats> {
    let norm = oracle.one_norm;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..shots {
        let k = sample_term_index(&oracle.alpha, rng)?;
        let t = sampler.sample_t(rng);
        let x = oracle.conjugated_overlap(j, k, t);
        if x.abs() > 1.0 + 1e-9 {
            return Err(Error::Numerical(format!(
                "overlap {x} outside [-1, 1] in first-term estimator"
            )));
        }
        let p0 = 0.5 * (1.0 + x.clamp(-1.0, 1.0));
        let b_is_zero = rng.gen::<f64>() < p0;
        let y = norm * oracle.signs[k] * if b_is_zero { -1.0 } else { 1.0 };
        sum += y;
        sumsq += y * y;
    }
    let mean = sum / shots as f64;
    Ok(TermStats {
        mean,
        shot_variance: (sumsq / shots as f64 - mean * mean).max(0.0),
        shots,
    })
}

fn run_second_term<R: Rng + ?Sized>(
    oracle: &ShotOracle,
    j: usize,
    shots: u64,
    rng: &mut R,
) -> Result<TermStats> {
    let norm = oracle.one_norm;
    let e_gj = oracle.generator_expectation(j);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..shots {
        let k = sample_term_index(&oracle.alpha, rng)?;
        let p_h = 0.5 * (1.0 + oracle.term_expectation(k));
        let p_g = 0.5 * (1.0 + e_gj);
        let m_h: f64 = if rng.gen::<f64>() < p_h { 1.0 } else { -1.0 };
        let m_g: f64 = if rng.gen::<f64>() < p_g { 1.0 } else { -1.0 };
        let y = norm * oracle.signs[k] * m_h * m_g;
        sum += y;
        sumsq += y * y;
    }
    let mean = sum / shots as f64;
    Ok(TermStats {
        mean,
        shot_variance: (sumsq / shots as f64 - mean * mean).max(0.0),
        shots,
    })
}

/// Ȳ⁽¹⁾: unbiased estimate of -½·Tr[{H, Φ_θ(G_j)}ρ(θ)] from `shots_first`
/// simulated Hadamard-test shots after sampling (k, t).
pub fn estimate_first_term<R: Rng + ?Sized>(
    h: &WeightedPauliSum,
    ansatz: &Ansatz,
    state: &ThermalState,
    j: usize,
    cfg: &EstimatorConfig,
    sampler: &HighPeakTentSampler,
    rng: &mut R,
) -> Result<f64> {
    cfg.validate()?;
    let oracle = ShotOracle::build(h, ansatz, state)?;
    let shots = cfg.shots_first(h.one_norm());
    Ok(run_first_term(&oracle, j, shots, sampler, rng)?.mean)
}

/// Ȳ⁽²⁾: unbiased estimate of ⟨H⟩⟨G_j⟩ from paired ±1 Pauli measurements on
/// two independent preparations per shot.
pub fn estimate_second_term<R: Rng + ?Sized>(
    h: &WeightedPauliSum,
    ansatz: &Ansatz,
    state: &ThermalState,
    j: usize,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<f64> {
    cfg.validate()?;
    let oracle = ShotOracle::build(h, ansatz, state)?;
    let shots = cfg.shots_second(h.one_norm());
    Ok(run_second_term(&oracle, j, shots, rng)?.mean)
}

/// Full gradient estimate with per-component shot statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    /// ḡ_j = Ȳ⁽¹⁾_j + Ȳ⁽²⁾_j; every entry lies in [-2‖α‖₁, 2‖α‖₁].
    pub components: Vec<f64>,
    pub first_term: Vec<f64>,
    pub second_term: Vec<f64>,
    pub shots_first: Vec<u64>,
    pub shots_second: Vec<u64>,
    /// Variance of each component estimate: s₁²/N₁ + s₂²/N₂.
    pub sample_variance: Vec<f64>,
    /// Thermal-state preparations consumed; each second-term shot uses two.
    pub preparations: u64,
}

impl GradientEstimate {
    pub fn standard_error(&self, j: usize) -> f64 {
        self.sample_variance[j].sqrt()
    }
}

/// The quantum Boltzmann gradient estimator: runs both sub-estimators for
/// every component j, on streams split per (iteration, component, sub).
pub fn qbge(
    h: &WeightedPauliSum,
    ansatz: &Ansatz,
    state: &ThermalState,
    cfg: &EstimatorConfig,
    sampler: &HighPeakTentSampler,
    iteration: u64,
) -> Result<GradientEstimate> {
    cfg.validate()?;
    let oracle = ShotOracle::build(h, ansatz, state)?;
    let norm = h.one_norm();
    let n1 = cfg.shots_first(norm);
    let n2 = cfg.shots_second(norm);
    let jn = ansatz.num_parameters();

    let mut out = GradientEstimate {
        components: Vec::with_capacity(jn),
        first_term: Vec::with_capacity(jn),
        second_term: Vec::with_capacity(jn),
        shots_first: Vec::with_capacity(jn),
        shots_second: Vec::with_capacity(jn),
        sample_variance: Vec::with_capacity(jn),
        preparations: 0,
    };
    for j in 0..jn {
        let mut rng1 = derived_stream(cfg.seed, iteration, j as u64, 0);
        let s1 = run_first_term(&oracle, j, n1, sampler, &mut rng1)?;
        let mut rng2 = derived_stream(cfg.seed, iteration, j as u64, 1);
        let s2 = run_second_term(&oracle, j, n2, &mut rng2)?;
        out.components.push(s1.mean + s2.mean);
        out.first_term.push(s1.mean);
        out.second_term.push(s2.mean);
        out.shots_first.push(s1.shots);
        out.shots_second.push(s2.shots);
        out.sample_variance
            .push(s1.shot_variance / s1.shots as f64 + s2.shot_variance / s2.shots as f64);
        out.preparations += s1.shots + 2 * s2.shots;
    }
    Ok(out)
}
