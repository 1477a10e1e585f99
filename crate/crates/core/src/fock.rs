//! Truncated two-mode bosonic Fock space: ladder and number operators,
//! coherent states, product-basis indexing, and the truncation diagnostics.
//!
//! A mode truncated at occupation `n_max` keeps the `n_max + 1` number states
//! |0⟩..|n_max⟩. Two-mode states live on the product basis |n_x, m_y⟩ with
//! index n_x·(n_max_y+1) + m_y.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// A state vector must be within this of unit norm unless marked otherwise.
pub const NORM_TOL: f64 = 1e-8;
/// Maximum coherent-state weight allowed to fall outside the truncation.
pub const TAIL_TOLERANCE: f64 = 1e-6;
/// Truncation default matching a 23-state mode; overridable everywhere.
pub const DEFAULT_N_MAX: usize = 22;

/// Basis label (n_x, m_y) of a two-mode number state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisLabel {
    pub n_x: usize,
    pub m_y: usize,
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{}⟩", self.n_x, self.m_y)
    }
}

/// Truncated two-mode product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_max_x: usize,
    n_max_y: usize,
}

impl FockSpace {
    pub fn new(n_max_x: usize, n_max_y: usize) -> Self {
        FockSpace { n_max_x, n_max_y }
    }

    /// Same truncation on both modes.
    pub fn symmetric(n_max: usize) -> Self {
        FockSpace::new(n_max, n_max)
    }

    pub fn n_max_x(&self) -> usize {
        self.n_max_x
    }

    pub fn n_max_y(&self) -> usize {
        self.n_max_y
    }

    pub fn dim(&self) -> usize {
        (self.n_max_x + 1) * (self.n_max_y + 1)
    }

    /// Flat index of |n_x, m_y⟩.
    pub fn index(&self, label: BasisLabel) -> Result<usize> {
        if label.n_x > self.n_max_x || label.m_y > self.n_max_y {
            return Err(Error::domain(format!(
                "label {label} outside truncation ({}, {})",
                self.n_max_x, self.n_max_y
            )));
        }
        Ok(label.n_x * (self.n_max_y + 1) + label.m_y)
    }

    /// Inverse of [`FockSpace::index`].
    pub fn label(&self, index: usize) -> BasisLabel {
        BasisLabel {
            n_x: index / (self.n_max_y + 1),
            m_y: index % (self.n_max_y + 1),
        }
    }

    /// All labels in index order.
    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.dim()).map(|i| self.label(i))
    }
}

/// Dense complex matrix with an optional Hermitian marker. The marker is
/// verified on construction, so a flagged matrix can be fed to the Hermitian
/// eigensolver without re-checking.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    data: Array2<Complex64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wrap a matrix and verify Hermiticity to [`HERMITICITY_TOL`] entrywise.
    pub fn new_hermitian(data: Array2<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::domain(format!(
                "matrix is {}x{}, not square",
                data.nrows(),
                data.ncols()
            )));
        }
        for i in 0..data.nrows() {
            for j in i..data.ncols() {
                let d = data[(i, j)] - data[(j, i)].conj();
                if d.norm() > HERMITICITY_TOL {
                    return Err(Error::numerical(format!(
                        "matrix not Hermitian at ({i}, {j}): asymmetry {:.3e}",
                        d.norm()
                    )));
                }
            }
        }
        Ok(OperatorMatrix { data, hermitian: true })
    }

    /// Wrap a general (not necessarily Hermitian) matrix.
    pub fn new_general(data: Array2<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::domain(format!(
                "matrix is {}x{}, not square",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(OperatorMatrix { data, hermitian: false })
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix {
            data: Array2::eye(dim),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<Complex64> {
        self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Array2::zeros((self.dim(), self.dim()));
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out[(j, i)] = self.data[(i, j)].conj();
            }
        }
        OperatorMatrix {
            data: out,
            hermitian: self.hermitian,
        }
    }

    pub fn matmul(&self, rhs: &OperatorMatrix) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::domain(format!(
                "dimension mismatch {} vs {}",
                self.dim(),
                rhs.dim()
            )));
        }
        Self::new_general(self.data.dot(&rhs.data))
    }

    /// self + c * rhs.
    pub fn add_scaled(&self, c: Complex64, rhs: &OperatorMatrix) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::domain(format!(
                "dimension mismatch {} vs {}",
                self.dim(),
                rhs.dim()
            )));
        }
        let data = &self.data + &rhs.data.mapv(|v| c * v);
        // real combinations of Hermitian matrices stay Hermitian
        if self.hermitian && rhs.hermitian && c.im == 0.0 {
            Ok(OperatorMatrix { data, hermitian: true })
        } else {
            Self::new_general(data)
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        OperatorMatrix {
            data: self.data.mapv(|v| c * v),
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.dim() != state.dim() {
            return Err(Error::domain(format!(
                "dimension mismatch {} vs {}",
                self.dim(),
                state.dim()
            )));
        }
        Ok(StateVector::unnormalised(self.data.dot(state.amplitudes())))
    }

    /// ⟨ψ|A|ψ⟩ for Hermitian A, as a real number.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if !self.hermitian {
            return Err(Error::domain(
                "expectation value requested for a matrix not marked Hermitian",
            ));
        }
        let applied = self.apply(state)?;
        Ok(state.inner(&applied)?.re)
    }

    /// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
    /// the matching eigenvector columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, Array2<Complex64>)> {
        if !self.hermitian {
            return Err(Error::domain(
                "eigh requires a matrix marked Hermitian",
            ));
        }
        let n = self.dim();
        let m = faer::Mat::<Complex64>::from_fn(n, n, |i, j| self.data[(i, j)]);
        let eig = m
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::numerical(format!("eigensolver failed: {e:?}")))?;
        let values: Vec<f64> = (0..n).map(|i| eig.S().column_vector()[i].re).collect();
        let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.U()[(i, j)]);
        Ok((values, vectors))
    }

    /// Ascending eigenvalues only.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.hermitian {
            return Err(Error::domain(
                "eigenvalues requires a matrix marked Hermitian",
            ));
        }
        let n = self.dim();
        // all-real Hermitian matrices take the ~2x faster symmetric path
        if self.data.iter().all(|v| v.im == 0.0) {
            let m = faer::Mat::<f64>::from_fn(n, n, |i, j| self.data[(i, j)].re);
            return m
                .self_adjoint_eigenvalues(faer::Side::Lower)
                .map_err(|e| Error::numerical(format!("eigensolver failed: {e:?}")));
        }
        let m = faer::Mat::<Complex64>::from_fn(n, n, |i, j| self.data[(i, j)]);
        let vals = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::numerical(format!("eigensolver failed: {e:?}")))?;
        Ok(vals)
    }
}

/// Complex amplitudes over the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<Complex64>,
    normalised: bool,
}

impl StateVector {
    /// Wrap amplitudes that must already be unit norm (within [`NORM_TOL`]).
    pub fn new(amplitudes: Array1<Complex64>) -> Result<Self> {
        let v = StateVector {
            amplitudes,
            normalised: true,
        };
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::numerical(format!(
                "state norm {norm} deviates from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(v)
    }

    /// Wrap amplitudes explicitly marked as carrying no norm contract.
    pub fn unnormalised(amplitudes: Array1<Complex64>) -> Self {
        StateVector {
            amplitudes,
            normalised: false,
        }
    }

    /// Basis state |index⟩.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::domain(format!("basis index {index} >= dim {dim}")));
        }
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes,
            normalised: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_normalised(&self) -> bool {
        self.normalised
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::domain(format!(
                "dimension mismatch {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |amplitude|² per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Rescale to unit norm.
    pub fn normalise(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::numerical("cannot normalise the zero vector"));
        }
        StateVector::new(self.amplitudes.mapv(|a| a / norm))
    }

    /// Tensor product self ⊗ other, consistent with [`FockSpace::index`].
    pub fn tensor(&self, other: &StateVector) -> Self {
        let mut amplitudes = Array1::zeros(self.dim() * other.dim());
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in other.amplitudes.iter().enumerate() {
                amplitudes[i * other.dim() + j] = a * b;
            }
        }
        StateVector {
            amplitudes,
            normalised: self.normalised && other.normalised,
        }
    }
}

/// Single-mode annihilation operator: entry √n at (n−1, n), a|0⟩ = 0.
pub fn annihilation(n_max: usize) -> Result<OperatorMatrix> {
    if n_max < 1 {
        return Err(Error::domain("annihilation requires n_max >= 1"));
    }
    let mut data = Array2::zeros((n_max + 1, n_max + 1));
    for n in 1..=n_max {
        data[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new_general(data)
}

/// Single-mode creation operator, the adjoint of [`annihilation`].
pub fn creation(n_max: usize) -> Result<OperatorMatrix> {
    Ok(annihilation(n_max)?.adjoint())
}

/// Number operator diag(0, 1, …, n_max), assembled exactly.
pub fn number_operator(n_max: usize) -> OperatorMatrix {
    let mut data = Array2::zeros((n_max + 1, n_max + 1));
    for n in 0..=n_max {
        data[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    OperatorMatrix { data, hermitian: true }
}

/// Truncated coherent state together with the discarded tail weight.
#[derive(Debug, Clone)]
pub struct CoherentState {
    /// Renormalised truncated state.
    pub state: StateVector,
    /// Weight 1 − Σ|cₙ|² that fell outside the truncation, before
    /// renormalisation.
    pub tail_weight: f64,
}

/// Truncated coherent state |θ⟩ with amplitudes e^{−|θ|²/2} θⁿ/√n!.
///
/// The truncated vector is renormalised to unit norm; the discarded tail is
/// reported and must stay below [`TAIL_TOLERANCE`], otherwise the truncation
/// is too aggressive for this θ and the call fails.
pub fn coherent_state(theta: Complex64, n_max: usize) -> Result<CoherentState> {
    let mut amps = Array1::<Complex64>::zeros(n_max + 1);
    amps[0] = Complex64::new((-theta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..=n_max {
        amps[n] = amps[n - 1] * theta / (n as f64).sqrt();
    }
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let tail_weight = (1.0 - kept).max(0.0);
    if tail_weight > TAIL_TOLERANCE {
        return Err(Error::domain(format!(
            "coherent state tail weight {tail_weight:.3e} exceeds {TAIL_TOLERANCE:e} \
             for theta = {theta}, n_max = {n_max}; increase n_max"
        )));
    }
    let state = StateVector::unnormalised(amps).normalise()?;
    Ok(CoherentState { state, tail_weight })
}

/// Kronecker product A ⊗ B on the product basis of `space` (A on mode x,
/// B on mode y).
pub fn tensor_product(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    space: &FockSpace,
) -> Result<OperatorMatrix> {
    if a.dim() != space.n_max_x() + 1 || b.dim() != space.n_max_y() + 1 {
        return Err(Error::domain(format!(
            "operator dims ({}, {}) do not match space truncation ({}, {})",
            a.dim(),
            b.dim(),
            space.n_max_x() + 1,
            space.n_max_y() + 1
        )));
    }
    let (da, db) = (a.dim(), b.dim());
    let mut data = Array2::zeros((da * db, da * db));
    for i in 0..da {
        for j in 0..da {
            let aij = a.data()[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    data[(i * db + k, j * db + l)] = aij * b.data()[(k, l)];
                }
            }
        }
    }
    if a.is_hermitian() && b.is_hermitian() {
        Ok(OperatorMatrix { data, hermitian: true })
    } else {
        OperatorMatrix::new_general(data)
    }
}

/// The truncation artifact [a, a†] − 1 of a mode truncated at `n_max`:
/// −(n_max + 1) · |n_max⟩⟨n_max|.
///
/// The ladder matrices are bidiagonal, so their products are diagonal with
/// entries that are squares of √n; the defect is assembled from the exact
/// integer values rather than floating products, making the corner entry
/// −(n_max + 1) exact.
pub fn truncation_commutator_defect(n_max: usize) -> Result<OperatorMatrix> {
    if n_max < 1 {
        return Err(Error::domain(
            "truncation_commutator_defect requires n_max >= 1",
        ));
    }
    let mut data = Array2::zeros((n_max + 1, n_max + 1));
    data[(n_max, n_max)] = Complex64::new(-((n_max + 1) as f64), 0.0);
    Ok(OperatorMatrix { data, hermitian: true })
}
