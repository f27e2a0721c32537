//! Pauli-string operators and weighted Pauli sums, realized as dense matrices.
//!
//! A `PauliString` is a tensor product of single-qubit Paulis (I, X, Y, Z);
//! a `WeightedPauliSum` is H = Σ_k α_k·s_k·P_k with α_k > 0 and s_k = ±1.
//! Negative input coefficients are normalized at parse time: the magnitude is
//! kept as the sampling weight α_k and the sign s_k travels with the term, so
//! the categorical distribution α_k/‖α‖₁ stays well defined.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest qubit count for which dense 2ⁿ×2ⁿ matrices are materialized.
pub const MAX_QUBITS: usize = 12;

pub type CMatrix = DMatrix<Complex64>;

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    fn from_char(c: char) -> Result<Axis> {
        match c {
            'I' => Ok(Axis::I),
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            other => Err(Error::Parse(format!(
                "invalid Pauli axis letter '{other}' (expected I, X, Y, or Z)"
            ))),
        }
    }

    fn as_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    /// The 2×2 matrix of this axis.
    fn matrix(self) -> CMatrix {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Axis::I => CMatrix::from_row_slice(2, 2, &[one, z, z, one]),
            Axis::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            Axis::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Axis::Z => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        }
    }
}

/// A tensor product of single-qubit Paulis over `n` qubits.
///
/// The leftmost letter acts on the most significant qubit of the basis-state
/// index, so `dense()` output is bit-stable across runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    axes: Vec<Axis>,
}

impl PauliString {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(PauliString { axes })
    }

    /// Parse an axis-letter word such as `"XZIY"`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let axes = text.chars().map(Axis::from_char).collect::<Result<_>>()?;
        Ok(PauliString { axes })
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|a| *a == Axis::I)
    }

    /// Dense 2ⁿ×2ⁿ realization as the Kronecker product of the axis matrices.
    pub fn dense(&self) -> Result<CMatrix> {
        let n = self.n_qubits();
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
        }
        let mut m = self.axes[0].matrix();
        for axis in &self.axes[1..] {
            m = m.kronecker(&axis.matrix());
        }
        Ok(m)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

/// One term of a weighted Pauli sum: `sign · coefficient · string`.
///
/// `coefficient` is strictly positive; a negative input coefficient is stored
/// as `sign = -1`. The sign multiplies the shot outcome wherever this term
/// enters an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub sign: f64,
    pub string: PauliString,
}

impl Term {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() || coefficient == 0.0 {
            return Err(Error::Parse(format!(
                "term coefficient must be finite and nonzero, got {coefficient}"
            )));
        }
        Ok(Term {
            coefficient: coefficient.abs(),
            sign: if coefficient < 0.0 { -1.0 } else { 1.0 },
            string,
        })
    }

    /// The signed coefficient `sign · coefficient`.
    pub fn signed_coefficient(&self) -> f64 {
        self.sign * self.coefficient
    }
}

/// H = Σ_k α_k·s_k·P_k with all α_k > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPauliSum {
    terms: Vec<Term>,
    n: usize,
}

impl WeightedPauliSum {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let n = match terms.first() {
            Some(t) => t.string.n_qubits(),
            None => return Err(Error::Parse("Hamiltonian has no terms".into())),
        };
        if let Some(bad) = terms.iter().find(|t| t.string.n_qubits() != n) {
            return Err(Error::DimensionMismatch(format!(
                "term '{}' acts on {} qubits, expected {}",
                bad.string,
                bad.string.n_qubits(),
                n
            )));
        }
        Ok(WeightedPauliSum { terms, n })
    }

    /// Parse the Hamiltonian text format: one `<coefficient> <pauli-word>`
    /// per line, `#` comments, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff_str = fields.next().unwrap();
            let word = fields.next().ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: expected '<coefficient> <pauli-word>', got '{line}'",
                    lineno + 1
                ))
            })?;
            if fields.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: trailing fields after '{coeff_str} {word}'",
                    lineno + 1
                )));
            }
            let coefficient: f64 = coeff_str.parse().map_err(|_| {
                Error::Parse(format!("line {}: bad coefficient '{coeff_str}'", lineno + 1))
            })?;
            terms.push(Term::new(coefficient, PauliString::parse(word)?)?);
        }
        WeightedPauliSum::new(terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// ‖α‖₁ = Σ_k α_k; upper-bounds the operator norm of the sum.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    /// The α vector (all entries strictly positive).
    pub fn alpha(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// Dense realization Σ_k s_k·α_k·dense(P_k).
    pub fn dense(&self) -> Result<CMatrix> {
        let dim = 1usize << self.n.min(MAX_QUBITS);
        if self.n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n: self.n,
                max: MAX_QUBITS,
            });
        }
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            m += t.string.dense()? * Complex64::new(t.signed_coefficient(), 0.0);
        }
        Ok(m)
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}

pub(crate) fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Tr[observable · state] for a Hermitian observable and a density matrix.
///
/// The imaginary residual (≲1e-10 for well-formed inputs) is discarded.
pub fn expectation(observable: &CMatrix, state: &CMatrix) -> Result<f64> {
    check_same_dim(observable, state)?;
    let mut tr = Complex64::new(0.0, 0.0);
    for a in 0..observable.nrows() {
        for b in 0..observable.ncols() {
            tr += observable[(a, b)] * state[(b, a)];
        }
    }
    Ok(tr.re)
}
