//! Parameterized thermal states ρ(θ) = e^{-G(θ)}/Z(θ), the belief-propagation
//! channel Φ_θ, the energy objective f(θ) = Tr[Hρ(θ)], its analytic gradient
//! and Hessian, and the smoothness constant of the gradient.
//!
//! Everything here is exact dense algebra in the eigenbasis of G(θ). The
//! channel acts entrywise in that basis as the spectral filter
//! κ(ω) = tanh(ω/2)/(ω/2) on eigenvalue gaps ω = λ_a - λ_b, which is the
//! Fourier transform of the high-peak-tent density integrated against the
//! conjugation e^{-iGt}·e^{iGt}.

use crate::error::{Error, Result};
use crate::pauli::{check_same_dim, expectation, CMatrix, PauliString, WeightedPauliSum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Trial-Hamiltonian ansatz: G(θ) = Σ_j θ_j·G_j with Pauli-string generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    generators: Vec<PauliString>,
    n: usize,
}

impl Ansatz {
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let n = match generators.first() {
            Some(g) => g.n_qubits(),
            None => return Err(Error::Parse("ansatz has no generators".into())),
        };
        if let Some(bad) = generators.iter().find(|g| g.n_qubits() != n) {
            return Err(Error::DimensionMismatch(format!(
                "generator '{bad}' acts on {} qubits, expected {n}",
                bad.n_qubits()
            )));
        }
        Ok(Ansatz { generators, n })
    }

    /// Parse the ansatz text format: one Pauli word per line, `#` comments and
    /// blank lines ignored; line order fixes the parameter index j.
    pub fn parse(text: &str) -> Result<Self> {
        let mut generators = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => raw[..pos].trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if line.split_whitespace().count() != 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected a single Pauli word, got '{line}'",
                    lineno + 1
                )));
            }
            generators.push(PauliString::parse(line)?);
        }
        Ansatz::new(generators)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of parameters J.
    pub fn num_parameters(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn generator_dense(&self, j: usize) -> Result<CMatrix> {
        self.generators
            .get(j)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "generator index {j} out of range (J = {})",
                    self.generators.len()
                ))
            })?
            .dense()
    }
}

/// G(θ) = Σ_j θ_j·dense(G_j).
pub fn build_generator(ansatz: &Ansatz, theta: &[f64]) -> Result<CMatrix> {
    if theta.len() != ansatz.num_parameters() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries but the ansatz has {} parameters",
            theta.len(),
            ansatz.num_parameters()
        )));
    }
    let dim = 1usize << ansatz.n;
    let mut g = CMatrix::zeros(dim, dim);
    for (j, &t) in theta.iter().enumerate() {
        g += ansatz.generator_dense(j)? * Complex64::new(t, 0.0);
    }
    Ok(g)
}

/// Eigendecomposition of G(θ) together with the derived density matrix.
///
/// Immutable after construction; safe to share across estimator workers.
#[derive(Debug, Clone)]
pub struct ThermalState {
    n: usize,
    theta: Vec<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    log_partition: f64,
    probs: Vec<f64>,
    rho: CMatrix,
}

/// Relative residual allowed for the eigendecomposition, ‖GV - VΛ‖ ≤ tol·‖G‖.
const EIG_RESIDUAL_TOL: f64 = 1e-9;

/// Exact thermal state of G(θ). Eigenvalues are shifted by λ_min before
/// exponentiation so the state stays finite for large ‖θ‖₁.
pub fn thermal_state(ansatz: &Ansatz, theta: &[f64]) -> Result<ThermalState> {
    let g = build_generator(ansatz, theta)?;
    let dim = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let lambda = eig.eigenvalues;
    let v = eig.eigenvectors;

    let g_norm = g.norm();
    if g_norm > 0.0 {
        let lam_c = CMatrix::from_diagonal(&lambda.map(|x| Complex64::new(x, 0.0)));
        let residual = (&g * &v - &v * &lam_c).norm();
        if residual > EIG_RESIDUAL_TOL * g_norm {
            return Err(Error::Numerical(format!(
                "eigendecomposition residual {residual:e} exceeds {EIG_RESIDUAL_TOL:e}·‖G‖"
            )));
        }
    }

    let lambda_min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = lambda.iter().map(|&l| (-(l - lambda_min)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let log_partition = z_shifted.ln() - lambda_min;
    let probs: Vec<f64> = weights.iter().map(|w| w / z_shifted).collect();

    let mut rho = CMatrix::zeros(dim, dim);
    for (a, &p) in probs.iter().enumerate() {
        let col = v.column(a);
        for r in 0..dim {
            for c in 0..dim {
                rho[(r, c)] += col[r] * col[c].conj() * Complex64::new(p, 0.0);
            }
        }
    }

    Ok(ThermalState {
        n: ansatz.n_qubits(),
        theta: theta.to_vec(),
        eigenvalues: lambda,
        eigenvectors: v,
        log_partition,
        probs,
        rho,
    })
}

impl ThermalState {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Eigenvalues of G(θ), unshifted.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// ln Z(θ).
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Boltzmann weights e^{-λ_a}/Z in eigenbasis order; sums to 1.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    /// V†·x·V.
    pub fn to_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * x * &self.eigenvectors
    }

    /// V·x·V†.
    pub fn from_eigenbasis(&self, x: &CMatrix) -> CMatrix {
        &self.eigenvectors * x * self.eigenvectors.adjoint()
    }

    /// e^{-iG(θ)t} = V·diag(e^{-iλt})·V†.
    pub fn evolution(&self, t: f64) -> CMatrix {
        let phases = self
            .eigenvalues
            .map(|l| Complex64::from_polar(1.0, -l * t));
        self.from_eigenbasis(&CMatrix::from_diagonal(&phases))
    }
}

/// Spectral filter κ(ω) = tanh(ω/2)/(ω/2), κ(0) = 1.
pub fn kappa(omega: f64) -> f64 {
    if omega.abs() < 1e-12 {
        1.0 - omega * omega / 12.0
    } else {
        (0.5 * omega).tanh() / (0.5 * omega)
    }
}

/// dκ/dω; series below |ω| = 1e-4 where the direct form cancels.
fn kappa_prime(omega: f64) -> f64 {
    if omega.abs() < 1e-4 {
        let x = 0.5 * omega;
        -x / 3.0 + 4.0 * x * x * x / 15.0
    } else {
        let x = 0.5 * omega;
        let sech2 = 1.0 / (x.cosh() * x.cosh());
        0.5 * (x * sech2 - x.tanh()) / (x * x)
    }
}

/// Divided difference Ψ(ω, d) = [κ(ω - d) - κ(ω)]/d with its d → 0 limit.
fn kappa_divided(omega: f64, d: f64) -> f64 {
    if d.abs() < 1e-5 {
        -kappa_prime(omega - 0.5 * d)
    } else {
        (kappa(omega - d) - kappa(omega)) / d
    }
}

/// Belief-propagation channel: in the eigenbasis of G(θ) the (a,b) entry of
/// x is multiplied by κ(λ_a - λ_b).
pub fn apply_phi(state: &ThermalState, x: &CMatrix) -> Result<CMatrix> {
    check_same_dim(x, state.rho())?;
    let mut xt = state.to_eigenbasis(x);
    let lambda = state.eigenvalues();
    for a in 0..xt.nrows() {
        for b in 0..xt.ncols() {
            xt[(a, b)] *= Complex64::new(kappa(lambda[a] - lambda[b]), 0.0);
        }
    }
    Ok(state.from_eigenbasis(&xt))
}

/// f(θ) = Tr[Hρ(θ)]; always within ±one_norm(h).
pub fn objective(h: &WeightedPauliSum, state: &ThermalState) -> Result<f64> {
    expectation(&h.dense()?, state.rho())
}

fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|a| m[(a, a)]).sum()
}

/// ∂_j f = -½·Tr[{H, Φ_θ(G_j)}ρ] + Tr[Hρ]·Tr[G_jρ], for all j.
pub fn analytic_gradient(
    h: &WeightedPauliSum,
    ansatz: &Ansatz,
    state: &ThermalState,
) -> Result<Vec<f64>> {
    let hd = h.dense()?;
    check_same_dim(&hd, state.rho())?;
    let e_h = expectation(&hd, state.rho())?;
    let mut grad = Vec::with_capacity(ansatz.num_parameters());
    for j in 0..ansatz.num_parameters() {
        let gj = ansatz.generator_dense(j)?;
        let tj = apply_phi(state, &gj)?;
        // Tr[{H,T}ρ] = 2·Re Tr[HTρ] for Hermitian H, T, ρ
        let first = -trace(&(&hd * &tj * state.rho())).re;
        let e_gj = expectation(&gj, state.rho())?;
        grad.push(first + e_h * e_gj);
    }
    Ok(grad)
}

/// ∂_kΦ_θ(G_j), evaluated in the eigenbasis.
///
/// The Duhamel u-integral is done in closed form per eigenvalue triple
/// (a, c, b), leaving divided differences Ψ of the filter κ:
///
///   [∂_kΦ(G_j)]_{ab} = Σ_c  G̃j_{ac}·G̃k_{cb}·Ψ(ω_ab, ω_cb)
///                          - G̃k_{ac}·G̃j_{cb}·Ψ(ω_ab, ω_ac)
///
/// with ω_xy = λ_x - λ_y and tildes denoting the eigenbasis of G(θ).
pub fn phi_parameter_derivative(
    state: &ThermalState,
    ansatz: &Ansatz,
    j: usize,
    k: usize,
) -> Result<CMatrix> {
    let gj = state.to_eigenbasis(&ansatz.generator_dense(j)?);
    let gk = state.to_eigenbasis(&ansatz.generator_dense(k)?);
    let lambda = state.eigenvalues();
    let dim = state.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let omega_ab = lambda[a] - lambda[b];
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                let psi_cb = kappa_divided(omega_ab, lambda[c] - lambda[b]);
                let psi_ac = kappa_divided(omega_ab, lambda[a] - lambda[c]);
                acc += gj[(a, c)] * gk[(c, b)] * Complex64::new(psi_cb, 0.0)
                    - gk[(a, c)] * gj[(c, b)] * Complex64::new(psi_ac, 0.0);
            }
            out[(a, b)] = acc;
        }
    }
    Ok(state.from_eigenbasis(&out))
}

/// Hessian of f(θ): entry (k, j) from the six-term expression
///
///   -½Tr[{H, ∂_kΦ(G_j)}ρ] + ¼Tr[{H, Φ(G_j)}{ρ, Φ(G_k)}]
///   - ½Tr[{H, Φ(G_j)}ρ]·⟨G_k⟩ - ½Tr[{H, Φ(G_k)}ρ]·⟨G_j⟩
///   - ½Tr[{G_j, Φ(G_k)}ρ]·⟨H⟩ + 2⟨H⟩⟨G_k⟩⟨G_j⟩.
pub fn analytic_hessian(
    h: &WeightedPauliSum,
    ansatz: &Ansatz,
    state: &ThermalState,
) -> Result<DMatrix<f64>> {
    let jn = ansatz.num_parameters();
    let hd = h.dense()?;
    check_same_dim(&hd, state.rho())?;
    let rho = state.rho();
    let e_h = expectation(&hd, rho)?;

    let mut g_dense = Vec::with_capacity(jn);
    let mut t_phi = Vec::with_capacity(jn);
    let mut e_g = Vec::with_capacity(jn);
    let mut half_brace = Vec::with_capacity(jn); // -½Tr[{H, Φ(G_j)}ρ]
    for j in 0..jn {
        let gj = ansatz.generator_dense(j)?;
        let tj = apply_phi(state, &gj)?;
        e_g.push(expectation(&gj, rho)?);
        half_brace.push(-trace(&(&hd * &tj * rho)).re);
        g_dense.push(gj);
        t_phi.push(tj);
    }

    let mut hess = DMatrix::<f64>::zeros(jn, jn);
    for k in 0..jn {
        let brace_rho_tk = rho * &t_phi[k] + &t_phi[k] * rho;
        for j in 0..jn {
            let d = phi_parameter_derivative(state, ansatz, j, k)?;
            let h1 = -0.5 * (trace(&(&hd * &d * rho)) + trace(&(&d * &hd * rho))).re;
            let brace_h_tj = &hd * &t_phi[j] + &t_phi[j] * &hd;
            let h2 = 0.25 * trace(&(&brace_h_tj * &brace_rho_tk)).re;
            let h3 = half_brace[j] * e_g[k];
            let h4 = half_brace[k] * e_g[j];
            let h5 = -trace(&(&g_dense[j] * &t_phi[k] * rho)).re * e_h;
            let h6 = 2.0 * e_h * e_g[k] * e_g[j];
            hess[(k, j)] = h1 + h2 + h3 + h4 + h5 + h6;
        }
    }
    Ok(hess)
}

/// Smoothness constant ℓ = 2√2·J^{3/4}·‖α‖₁^{1/2}·max_j ‖G_j‖ of the gradient;
/// Pauli-string generators have unit norm, so the max factor is 1.
pub fn smoothness_constant(ansatz: &Ansatz, alpha_one_norm: f64) -> f64 {
    let j = ansatz.num_parameters() as f64;
    2.0 * std::f64::consts::SQRT_2 * j.powf(0.75) * alpha_one_norm.sqrt()
}
