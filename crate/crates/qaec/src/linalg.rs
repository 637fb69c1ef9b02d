//! Complex matrix algebra specialized to multi-qubit registers.
//!
//! Qubit ordering convention: qubit 0 is the **most significant bit** of the
//! computational-basis index, so the basis state |q0 q1 … q(n-1)⟩ has index
//! `q0·2^(n-1) + q1·2^(n-2) + … + q(n-1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Maximum register size accepted by tensor-product style operations.
pub const MAX_QUBITS: usize = 12;

/// Tolerance for Hermiticity and trace checks on density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalue floor for positive-semidefiniteness checks.
pub const EIG_FLOOR: f64 = -1e-9;
/// Tolerance for unitarity checks (max-abs elementwise).
pub const UNITARITY_TOL: f64 = 1e-8;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const I_UNIT: C64 = Complex::new(0.0, 1.0);

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows of complex entries. Panics if rows are ragged.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in a_row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn add_scaled_in_place(&mut self, other: &Self, factor: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        assert_eq!(self.rows, self.cols, "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Commutator `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in r..self.cols {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Hilbert-Schmidt inner product Tr[self† · other].
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Averages with its own conjugate transpose; a no-op for exactly
    /// Hermitian inputs, otherwise removes the anti-Hermitian round-off part.
    pub fn hermitize(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        })
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c))
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

/// Pure n-qubit state vector of unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "state on {num_qubits} qubits needs {} amplitudes, got {}",
                1usize << num_qubits,
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sq} deviates from 1"
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Normalizes the given amplitudes; errors on the zero vector.
    pub fn normalized(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Self::new(num_qubits, amplitudes)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let m = ComplexMatrix::from_fn(d, d, |r, c| {
            self.amplitudes[r] * self.amplitudes[c].conj()
        });
        DensityMatrix {
            num_qubits: self.num_qubits,
            matrix: m,
        }
    }

    /// Fixes the global phase so the first amplitude of significant modulus
    /// is real and positive.
    pub fn canonical_phase(&self) -> Self {
        let pivot = self
            .amplitudes
            .iter()
            .find(|a| a.norm() > 1e-9)
            .copied()
            .unwrap_or(ONE);
        let phase = pivot / pivot.norm();
        Self {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a / phase).collect(),
        }
    }
}

/// Density matrix on an ordered register of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (both to `STATE_TOL`). The
    /// eigenvalue floor is checked by [`DensityMatrix::validate_full`].
    pub fn new(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = 1usize << num_qubits;
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "density matrix on {num_qubits} qubits must be {d}x{d}"
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if !matrix.is_hermitian(STATE_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} deviates from 1")));
        }
        Ok(Self { num_qubits, matrix })
    }

    /// Constructs without validation; for operations that preserve the
    /// invariants by construction.
    pub(crate) fn from_matrix_unchecked(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        PureState::basis_state(num_qubits, index).to_density()
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        let m = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        Self {
            num_qubits,
            matrix: m,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.mul(&self.matrix).trace().re
    }

    /// ⟨ψ|ρ|ψ⟩ — the fidelity shortcut for a pure reference state.
    pub fn expectation_pure(&self, psi: &PureState) -> f64 {
        assert_eq!(self.num_qubits, psi.num_qubits());
        let d = self.dim();
        let mut acc = ZERO;
        for r in 0..d {
            let a = psi.amplitudes()[r].conj();
            if a == ZERO {
                continue;
            }
            let row = self.matrix.row(r);
            let mut s = ZERO;
            for c in 0..d {
                s += row[c] * psi.amplitudes()[c];
            }
            acc += a * s;
        }
        acc.re
    }

    /// Full invariant check: Hermiticity, unit trace and eigenvalue floor.
    pub fn validate_full(&self) -> Result<()> {
        if !self.matrix.is_hermitian(STATE_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} deviates from 1")));
        }
        let (eigvals, _) = hermitian_eigen(&self.matrix);
        if let Some(min) = eigvals.first() {
            if *min < EIG_FLOOR {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {min} below floor {EIG_FLOOR}"
                )));
            }
        }
        Ok(())
    }

    /// Tensor product ρ ⊗ σ.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        Ok(Self {
            num_qubits: n,
            matrix: kron(&self.matrix, &other.matrix)?,
        })
    }
}

/// Unitary matrix acting on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl Unitary {
    pub fn new(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = 1usize << num_qubits;
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "unitary on {num_qubits} qubits must be {d}x{d}"
            )));
        }
        let dev = matrix.dagger().mul(&matrix).max_abs_diff(&ComplexMatrix::identity(d));
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidState(format!(
                "U†U deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            matrix: ComplexMatrix::identity(1 << num_qubits),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            matrix: self.matrix.dagger(),
        }
    }

    /// Deviation of U†U from the identity, max-abs elementwise.
    pub fn unitarity_deviation(&self) -> f64 {
        self.matrix
            .dagger()
            .mul(&self.matrix)
            .max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

// ---------------------------------------------------------------------------
// Single-qubit constants.
// ---------------------------------------------------------------------------

pub fn pauli_i() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ZERO, -I_UNIT], vec![I_UNIT, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]])
}

// ---------------------------------------------------------------------------
// Bit manipulation for register indexing.
// ---------------------------------------------------------------------------

/// Extracts the bits of `index` at `positions` (in that order) into a small
/// integer whose first listed position becomes the most significant bit.
#[inline]
pub(crate) fn gather_bits(index: usize, positions: &[usize], n: usize) -> usize {
    let mut out = 0usize;
    for &p in positions {
        out = (out << 1) | ((index >> (n - 1 - p)) & 1);
    }
    out
}

/// Scatters the bits of `value` (MSB first) onto `positions` of an n-qubit
/// index, leaving all other bits zero.
#[inline]
pub(crate) fn scatter_bits(value: usize, positions: &[usize], n: usize) -> usize {
    let k = positions.len();
    let mut out = 0usize;
    for (j, &p) in positions.iter().enumerate() {
        let bit = (value >> (k - 1 - j)) & 1;
        out |= bit << (n - 1 - p);
    }
    out
}

// ---------------------------------------------------------------------------
// Core operations.
// ---------------------------------------------------------------------------

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let max_dim = 1usize << MAX_QUBITS;
    if rows > max_dim || cols > max_dim {
        return Err(Error::RegisterTooLarge {
            requested: rows.max(cols).ilog2() as usize,
            max: MAX_QUBITS,
        });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let av = a.get(ar, ac);
            if av == ZERO {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out.set(ar * b.rows() + br, ac * b.cols() + bc, av * b.get(br, bc));
                }
            }
        }
    }
    Ok(out)
}

/// Reduces a 2^n×2^n matrix to the qubits listed in `keep` (result tensor
/// slots follow the order given there), tracing out all other qubits.
pub fn reduce_to_ordered_subsystem(
    m: &ComplexMatrix,
    n: usize,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if m.rows() != (1 << n) || m.cols() != (1 << n) {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected 2^{n} square",
            m.rows(),
            m.cols()
        )));
    }
    let mut seen = vec![false; n];
    for &q in keep {
        if q >= n {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} out of range for {n}-qubit register"
            )));
        }
        if seen[q] {
            return Err(Error::InvalidArgument(format!("duplicate qubit index {q}")));
        }
        seen[q] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
    let dk = 1usize << keep.len();
    let dr = 1usize << rest.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        let a_base = scatter_bits(a, keep, n);
        for b in 0..dk {
            let b_base = scatter_bits(b, keep, n);
            let mut acc = ZERO;
            for d in 0..dr {
                let d_bits = scatter_bits(d, &rest, n);
                acc += m.get(a_base | d_bits, b_base | d_bits);
            }
            out.set(a, b, acc);
        }
    }
    Ok(out)
}

/// Traces out the qubits in `discard`; remaining qubits keep their relative
/// order. Trace is preserved.
pub fn partial_trace(rho: &DensityMatrix, discard: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    let mut seen = vec![false; n];
    for &q in discard {
        if q >= n {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} out of range for {n}-qubit register"
            )));
        }
        seen[q] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
    let out = reduce_to_ordered_subsystem(rho.matrix(), n, &keep)?;
    Ok(DensityMatrix::from_matrix_unchecked(keep.len(), out))
}

/// Embeds a unitary acting on `targets` (ordered) into the full n-qubit
/// register as a dense matrix.
pub fn embed_on_targets(u: &Unitary, targets: &[usize], n: usize) -> Result<ComplexMatrix> {
    if targets.len() != u.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "unitary acts on {} qubits but {} targets given",
            u.num_qubits(),
            targets.len()
        )));
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::InvalidArgument(format!(
                "target {t} out of range for {n}-qubit register"
            )));
        }
        if seen[t] {
            return Err(Error::InvalidArgument(format!("duplicate target {t}")));
        }
        seen[t] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
    let d = 1usize << n;
    let dt = 1usize << targets.len();
    let mut out = ComplexMatrix::zeros(d, d);
    // Iterate over (target sub-index pair, rest sub-index): the embedded
    // operator is block diagonal in the rest bits.
    let dr = 1usize << rest.len();
    for it in 0..dt {
        let i_base = scatter_bits(it, targets, n);
        for jt in 0..dt {
            let v = u.matrix().get(it, jt);
            if v == ZERO {
                continue;
            }
            let j_base = scatter_bits(jt, targets, n);
            for r in 0..dr {
                let r_bits = scatter_bits(r, &rest, n);
                out.set(i_base | r_bits, j_base | r_bits, v);
            }
        }
    }
    Ok(out)
}

/// Applies a unitary to the listed target qubits of a density matrix:
/// ρ ↦ Ũ ρ Ũ† with Ũ the embedding of `u`.
pub fn apply_unitary(rho: &DensityMatrix, u: &Unitary, targets: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    let emb = embed_on_targets(u, targets, n)?;
    let out = emb.mul(rho.matrix()).mul(&emb.dagger());
    Ok(DensityMatrix::from_matrix_unchecked(n, out))
}

/// Applies a unitary to the listed target qubits of a pure state.
pub fn apply_unitary_pure(psi: &PureState, u: &Unitary, targets: &[usize]) -> Result<PureState> {
    let n = psi.num_qubits();
    if targets.len() != u.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "unitary acts on {} qubits but {} targets given",
            u.num_qubits(),
            targets.len()
        )));
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if t >= n || seen[t] {
            return Err(Error::InvalidArgument(format!("bad target {t}")));
        }
        seen[t] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
    let dt = 1usize << targets.len();
    let dr = 1usize << rest.len();
    let mut out = vec![ZERO; 1 << n];
    for r in 0..dr {
        let r_bits = scatter_bits(r, &rest, n);
        for it in 0..dt {
            let i_full = scatter_bits(it, targets, n) | r_bits;
            let mut acc = ZERO;
            for jt in 0..dt {
                let v = u.matrix().get(it, jt);
                if v == ZERO {
                    continue;
                }
                acc += v * psi.amplitudes()[scatter_bits(jt, targets, n) | r_bits];
            }
            out[i_full] = acc;
        }
    }
    Ok(PureState {
        num_qubits: n,
        amplitudes: out,
    })
}

/// Sorted (ascending) eigenvalues and matching eigenvector columns of a
/// Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    assert_eq!(m.rows(), m.cols(), "eigendecomposition needs a square matrix");
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Uhlmann fidelity F(ρ1, ρ2) = (Tr √(√ρ2 ρ1 √ρ2))².
///
/// Uses the pure-state shortcut ⟨ψ|ρ|ψ⟩ when one argument is rank one within
/// tolerance; mixed pairs go through eigendecomposition square roots with
/// eigenvalue clipping at zero.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.num_qubits() != rho2.num_qubits() {
        return Err(Error::DimensionMismatch(
            "fidelity of states on different registers".into(),
        ));
    }
    let (vals2, vecs2) = hermitian_eigen(rho2.matrix());
    if vals2.first().copied().unwrap_or(0.0) < EIG_FLOOR {
        return Err(Error::InvalidState(format!(
            "second argument has eigenvalue {} below floor",
            vals2[0]
        )));
    }
    let d = rho1.dim();
    let rank2 = vals2.iter().filter(|v| **v > 1e-10).count();
    if rank2 == 1 {
        // Rank-1 shortcut: F = ⟨ψ|ρ1|ψ⟩ with |ψ⟩ the dominant eigenvector.
        let col = d - 1; // eigenvalues sorted ascending
        let psi: Vec<C64> = (0..d).map(|r| vecs2.get(r, col)).collect();
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                acc += psi[r].conj() * rho1.matrix().get(r, c) * psi[c];
            }
        }
        return Ok(acc.re.clamp(0.0, 1.0));
    }
    let (vals1, _) = hermitian_eigen(rho1.matrix());
    if vals1.first().copied().unwrap_or(0.0) < EIG_FLOOR {
        return Err(Error::InvalidState(format!(
            "first argument has eigenvalue {} below floor",
            vals1[0]
        )));
    }
    let sqrt2 = {
        let diag = ComplexMatrix::from_fn(d, d, |r, c| {
            if r == c {
                C64::new(vals2[r].max(0.0).sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        vecs2.mul(&diag).mul(&vecs2.dagger())
    };
    let inner = sqrt2.mul(rho1.matrix()).mul(&sqrt2).hermitize();
    let (vals, _) = hermitian_eigen(&inner);
    let tr: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Draws a Haar-distributed unitary by orthonormalizing a complex
/// standard-Gaussian matrix (Gram-Schmidt with a second pass; the implicit R
/// factor has a positive diagonal, which fixes the phase convention).
pub fn haar_random_unitary<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Unitary {
    let d = 1usize << num_qubits;
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    for _pass in 0..2 {
        for j in 0..d {
            for i in 0..j {
                let proj: C64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for k in 0..d {
                    let v = cols[i][k];
                    cols[j][k] -= proj * v;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
    }
    let matrix = ComplexMatrix::from_fn(d, d, |r, c| cols[c][r]);
    Unitary {
        num_qubits,
        matrix,
    }
}

/// exp(i·ε·K) for Hermitian K, via eigendecomposition.
pub fn exp_i_hermitian(k: &ComplexMatrix, epsilon: f64) -> Result<Unitary> {
    if k.rows() != k.cols() {
        return Err(Error::DimensionMismatch("exponent must be square".into()));
    }
    if !k.is_hermitian(1e-8) {
        return Err(Error::InvalidArgument("exponent is not Hermitian".into()));
    }
    let d = k.rows();
    if !d.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} is not a power of two"
        )));
    }
    let (vals, vecs) = hermitian_eigen(&k.hermitize());
    let diag = ComplexMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, epsilon * vals[r])
        } else {
            ZERO
        }
    });
    let m = vecs.mul(&diag).mul(&vecs.dagger());
    Ok(Unitary {
        num_qubits: d.ilog2() as usize,
        matrix: m,
    })
}

/// Conjugates a 2^n×2^n matrix by the permutation that sends qubit i to
/// position `perm[i]`.
pub fn permute_qubits(m: &ComplexMatrix, perm: &[usize]) -> Result<ComplexMatrix> {
    let n = perm.len();
    if m.rows() != (1 << n) || m.cols() != (1 << n) {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected 2^{n} square",
            m.rows(),
            m.cols()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument(
                "permutation is not a bijection".into(),
            ));
        }
        seen[p] = true;
    }
    let d = 1usize << n;
    let relabel = |idx: usize| -> usize {
        let mut out = 0usize;
        for (i, &p) in perm.iter().enumerate() {
            let bit = (idx >> (n - 1 - i)) & 1;
            out |= bit << (n - 1 - p);
        }
        out
    };
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            out.set(relabel(r), relabel(c), m.get(r, c));
        }
    }
    Ok(out)
}

/// The sub-block ⟨bra_value|_{bra_qubits} · m · |bra_value⟩_{bra_qubits}:
/// rows/columns restricted to basis `bra_value` on `bra_qubits`, yielding an
/// operator on the remaining qubits (in ascending order).
pub fn sandwich_basis(
    m: &ComplexMatrix,
    n: usize,
    bra_qubits: &[usize],
    bra_value: usize,
) -> Result<ComplexMatrix> {
    if m.rows() != (1 << n) || m.cols() != (1 << n) {
        return Err(Error::DimensionMismatch("sandwich on wrong size".into()));
    }
    let mut seen = vec![false; n];
    for &q in bra_qubits {
        if q >= n || seen[q] {
            return Err(Error::InvalidArgument(format!("bad qubit {q}")));
        }
        seen[q] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
    let fixed = scatter_bits(bra_value, bra_qubits, n);
    let dr = 1usize << rest.len();
    let mut out = ComplexMatrix::zeros(dr, dr);
    for a in 0..dr {
        let ia = scatter_bits(a, &rest, n) | fixed;
        for b in 0..dr {
            let ib = scatter_bits(b, &rest, n) | fixed;
            out.set(a, b, m.get(ia, ib));
        }
    }
    Ok(out)
}

/// Tensor-inserts unnormalized identity factors at the listed positions of
/// the enlarged register: out = m ⊗ I interleaved so the new qubits sit at
/// `positions`. This is the Heisenberg-picture adjoint of a partial trace.
pub fn tensor_insert_identity(
    m: &ComplexMatrix,
    n_small: usize,
    positions: &[usize],
) -> Result<ComplexMatrix> {
    let n_out = n_small + positions.len();
    if m.rows() != (1 << n_small) || m.cols() != (1 << n_small) {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected 2^{n_small} square",
            m.rows(),
            m.cols()
        )));
    }
    let mut seen = vec![false; n_out];
    for &p in positions {
        if p >= n_out || seen[p] {
            return Err(Error::InvalidArgument(format!("bad insert position {p}")));
        }
        seen[p] = true;
    }
    let old: Vec<usize> = (0..n_out).filter(|q| !seen[*q]).collect();
    let d_out = 1usize << n_out;
    let dn = 1usize << positions.len();
    let mut out = ComplexMatrix::zeros(d_out, d_out);
    for a in 0..m.rows() {
        let a_base = scatter_bits(a, &old, n_out);
        for b in 0..m.cols() {
            let v = m.get(a, b);
            if v == ZERO {
                continue;
            }
            let b_base = scatter_bits(b, &old, n_out);
            for x in 0..dn {
                let x_bits = scatter_bits(x, positions, n_out);
                out.set(a_base | x_bits, b_base | x_bits, v);
            }
        }
    }
    Ok(out)
}

/// Inserts maximally mixed qubits (I/2 each) at the listed positions of the
/// OUTPUT register. `positions` refer to indices in the enlarged register.
pub fn insert_maximally_mixed(rho: &DensityMatrix, positions: &[usize]) -> Result<DensityMatrix> {
    let n_out = rho.num_qubits() + positions.len();
    if n_out > MAX_QUBITS {
        return Err(Error::RegisterTooLarge {
            requested: n_out,
            max: MAX_QUBITS,
        });
    }
    let mut seen = vec![false; n_out];
    for &p in positions {
        if p >= n_out || seen[p] {
            return Err(Error::InvalidArgument(format!("bad insert position {p}")));
        }
        seen[p] = true;
    }
    let old: Vec<usize> = (0..n_out).filter(|q| !seen[*q]).collect();
    let d_out = 1usize << n_out;
    let dn = 1usize << positions.len();
    let weight = 1.0 / dn as f64;
    let mut out = ComplexMatrix::zeros(d_out, d_out);
    for a in 0..rho.dim() {
        let a_base = scatter_bits(a, &old, n_out);
        for b in 0..rho.dim() {
            let v = rho.matrix().get(a, b) * weight;
            if v == ZERO {
                continue;
            }
            let b_base = scatter_bits(b, &old, n_out);
            for x in 0..dn {
                let x_bits = scatter_bits(x, positions, n_out);
                out.set(a_base | x_bits, b_base | x_bits, v);
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(n_out, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_density<R: Rng>(n: usize, rng: &mut R) -> DensityMatrix {
        // A ρ = G G† / Tr is Hermitian PSD with unit trace.
        let d = 1usize << n;
        let g = random_matrix(d, d, rng);
        let m = g.mul(&g.dagger());
        let tr = m.trace().re;
        DensityMatrix::from_matrix_unchecked(n, m.scale(c(1.0 / tr, 0.0)).hermitize())
    }

    fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
        let g = random_matrix(d, d, rng);
        g.add(&g.dagger()).scale(c(0.5, 0.0))
    }

    /// Independent cyclic-Jacobi eigensolver used as an oracle for results
    /// whose implementation path goes through `hermitian_eigen`. Returns
    /// unsorted eigenvalues and the accumulated rotation V with A = V Λ V†.
    fn jacobi_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
        let d = m.rows();
        let mut a = m.clone();
        let mut v = ComplexMatrix::identity(d);
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..d {
                for q in (p + 1)..d {
                    off += a.get(p, q).norm_sqr();
                }
            }
            if off < 1e-26 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a.get(p, q);
                    if apq.norm() < 1e-18 {
                        continue;
                    }
                    // Unitary 2x2 rotation zeroing the (p,q) element of a
                    // Hermitian matrix: diagonalize [[app, apq],[apq*, aqq]].
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let csq = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * csq;
                    let cc = c(csq, 0.0);
                    let sp = phase * s;
                    // A ← R† A R and V ← V R with R mixing columns p, q.
                    for k in 0..d {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, akp * cc - akq * sp.conj());
                        a.set(k, q, akp * sp + akq * cc);
                    }
                    for k in 0..d {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, apk * cc - aqk * sp);
                        a.set(q, k, apk * sp.conj() + aqk * cc);
                    }
                    for k in 0..d {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, vkp * cc - vkq * sp.conj());
                        v.set(k, q, vkp * sp + vkq * cc);
                    }
                }
            }
        }
        let vals: Vec<f64> = (0..d).map(|i| a.get(i, i).re).collect();
        (vals, v)
    }

    #[test]
    fn kron_identity_case() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_x_tensor_z_blocks() {
        let m = kron(&pauli_x(), &pauli_z()).unwrap();
        // [[0, Z],[Z, 0]]
        let z = pauli_z();
        for r in 0..2 {
            for cidx in 0..2 {
                assert_eq!(m.get(r, cidx), ZERO);
                assert_eq!(m.get(r + 2, cidx + 2), ZERO);
                assert_eq!(m.get(r, cidx + 2), z.get(r, cidx));
                assert_eq!(m.get(r + 2, cidx), z.get(r, cidx));
            }
        }
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_matrix(2, 2, &mut rng);
            let b = random_matrix(2, 2, &mut rng);
            let cm = random_matrix(2, 2, &mut rng);
            let dm = random_matrix(2, 2, &mut rng);
            let lhs = kron(&a, &b).unwrap().mul(&kron(&cm, &dm).unwrap());
            let rhs = kron(&a.mul(&cm), &b.mul(&dm)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn kron_size_limit() {
        let big = ComplexMatrix::identity(1 << 7);
        let err = kron(&big, &big).unwrap_err();
        assert!(matches!(err, Error::RegisterTooLarge { .. }));
    }

    #[test]
    fn partial_trace_bell_state() {
        let bell = PureState::normalized(2, vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let rho = bell.to_density();
        let red = partial_trace(&rho, &[1]).unwrap();
        assert!(red
            .matrix()
            .max_abs_diff(&DensityMatrix::maximally_mixed(1).matrix())
            < 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_density(1, &mut rng);
        let b = random_density(2, &mut rng);
        let ab = a.tensor(&b).unwrap();
        let red = partial_trace(&ab, &[1, 2]).unwrap();
        assert!(red.matrix().max_abs_diff(a.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = random_density(3, &mut rng);
        let red = partial_trace(&rho, &[0, 2]).unwrap();
        // Oracle: keep qubit 1; explicit summation over indices of qubits 0,2.
        let mut oracle = ComplexMatrix::zeros(2, 2);
        for a in 0..2usize {
            for b in 0..2usize {
                let mut acc = ZERO;
                for q0 in 0..2usize {
                    for q2 in 0..2usize {
                        let row = (q0 << 2) | (a << 1) | q2;
                        let col = (q0 << 2) | (b << 1) | q2;
                        acc += rho.matrix().get(row, col);
                    }
                }
                oracle.set(a, b, acc);
            }
        }
        assert!(red.matrix().max_abs_diff(&oracle) < 1e-12);
        assert!((red.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_out_of_range() {
        let rho = DensityMatrix::basis_state(2, 0);
        assert!(partial_trace(&rho, &[2]).is_err());
    }

    #[test]
    fn apply_unitary_identity_leaves_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = random_density(3, &mut rng);
        let out = apply_unitary(&rho, &Unitary::identity(2), &[0, 2]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn apply_unitary_x_on_first_qubit() {
        let rho = DensityMatrix::basis_state(3, 0b000);
        let x = Unitary::new(1, pauli_x()).unwrap();
        let out = apply_unitary(&rho, &x, &[0]).unwrap();
        let expect = DensityMatrix::basis_state(3, 0b100);
        assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-12);
    }

    #[test]
    fn apply_unitary_matches_kron_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let rho = random_density(3, &mut rng);
            let u = haar_random_unitary(2, &mut rng);
            let targets = [2usize, 0];
            let out = apply_unitary(&rho, &u, &targets).unwrap();
            // Oracle: U ⊗ I on qubits (0,1,2) with targets first, then permute
            // tensor slots into register positions. Slot ordering before the
            // permutation: [t0, t1, rest...] = [2, 0, 1] → send slot 0 to
            // position 2, slot 1 to position 0, slot 2 to position 1.
            let full = kron(u.matrix(), &ComplexMatrix::identity(2)).unwrap();
            let perm = [2usize, 0, 1];
            let emb = permute_qubits(&full, &perm).unwrap();
            let oracle = emb.mul(rho.matrix()).mul(&emb.dagger());
            assert!(out.matrix().max_abs_diff(&oracle) < 1e-10);
            assert!((out.trace().re - 1.0).abs() < 1e-10);
            assert!(out.matrix().is_hermitian(1e-10));
        }
    }

    #[test]
    fn apply_unitary_rejects_mismatch() {
        let rho = DensityMatrix::basis_state(2, 0);
        let u = Unitary::identity(2);
        assert!(apply_unitary(&rho, &u, &[0]).is_err());
        assert!(apply_unitary(&rho, &u, &[0, 0]).is_err());
    }

    #[test]
    fn fidelity_of_state_with_itself_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density(2, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fidelity_zero_plus_overlap() {
        let zero = DensityMatrix::basis_state(1, 0);
        let plus = PureState::normalized(1, vec![ONE, ONE]).unwrap().to_density();
        let f = fidelity(&zero, &plus).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_matches_independent_eigensolver_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..5 {
            let rho1 = random_density(2, &mut rng);
            let rho2 = random_density(2, &mut rng);
            let f = fidelity(&rho1, &rho2).unwrap();
            // Oracle: build √ρ2 from a Jacobi eigendecomposition, form
            // √ρ2 ρ1 √ρ2 and take (Σ √λ)² with Jacobi eigenvalues again.
            let jacobi_sqrt = |m: &ComplexMatrix| {
                let (vals, v) = jacobi_eigen(m);
                let d = m.rows();
                let diag = ComplexMatrix::from_fn(d, d, |r, cidx| {
                    if r == cidx {
                        c(vals[r].max(0.0).sqrt(), 0.0)
                    } else {
                        ZERO
                    }
                });
                v.mul(&diag).mul(&v.dagger())
            };
            let s2 = jacobi_sqrt(rho2.matrix());
            let inner = s2.mul(rho1.matrix()).mul(&s2).hermitize();
            let (vals, _) = jacobi_eigen(&inner);
            let tr: f64 = vals.iter().map(|x| x.max(0.0).sqrt()).sum();
            let oracle = tr * tr;
            assert!(
                (f - oracle).abs() < 1e-8,
                "fidelity {f} vs Jacobi oracle {oracle}"
            );
            let f_swapped = fidelity(&rho2, &rho1).unwrap();
            assert!((f - f_swapped).abs() < 1e-8, "fidelity must be symmetric");
        }
    }

    #[test]
    fn fidelity_invariant_under_joint_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho1 = random_density(2, &mut rng);
        let rho2 = random_density(2, &mut rng);
        let u = haar_random_unitary(2, &mut rng);
        let f = fidelity(&rho1, &rho2).unwrap();
        let r1 = apply_unitary(&rho1, &u, &[0, 1]).unwrap();
        let r2 = apply_unitary(&rho2, &u, &[0, 1]).unwrap();
        let fu = fidelity(&r1, &r2).unwrap();
        assert!((f - fu).abs() < 1e-8);
    }

    #[test]
    fn fidelity_rejects_non_psd() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.5, 0.0), ZERO], vec![ZERO, c(-0.5, 0.0)]]);
        let bad = DensityMatrix::from_matrix_unchecked(1, m);
        let good = DensityMatrix::basis_state(1, 0);
        assert!(fidelity(&good, &bad).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let u = haar_random_unitary(3, &mut rng);
        assert!(u.unitarity_deviation() < 1e-12);
        let mut rng2 = ChaCha8Rng::seed_from_u64(37);
        let u2 = haar_random_unitary(3, &mut rng2);
        assert_eq!(u.matrix(), u2.matrix());
    }

    #[test]
    fn haar_first_entry_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| haar_random_unitary(1, &mut rng).matrix().get(0, 0).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "E|U00|² = 1/d = 0.5, got {mean}");
    }

    #[test]
    fn exp_zero_is_identity() {
        let k = ComplexMatrix::zeros(4, 4);
        let u = exp_i_hermitian(&k, 0.3).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn exp_pauli_z_at_pi() {
        let u = exp_i_hermitian(&pauli_z(), std::f64::consts::PI).unwrap();
        let minus_i = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        assert!(u.matrix().max_abs_diff(&minus_i) < 1e-12);
    }

    #[test]
    fn exp_matches_taylor_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let k = random_hermitian(4, &mut rng);
        let eps = 0.37;
        let u = exp_i_hermitian(&k, eps).unwrap();
        // Taylor series Σ (iεK)^m / m! to machine precision.
        let mut term = ComplexMatrix::identity(4);
        let mut sum = ComplexMatrix::identity(4);
        let ik = k.scale(c(0.0, eps));
        for m in 1..60 {
            term = term.mul(&ik).scale(c(1.0 / m as f64, 0.0));
            sum = sum.add(&term);
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        assert!(u.matrix().max_abs_diff(&sum) < 1e-10);
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let g = random_matrix(4, 4, &mut rng);
        assert!(exp_i_hermitian(&g, 0.1).is_err());
    }

    #[test]
    fn exp_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let k = random_hermitian(8, &mut rng);
        let a = exp_i_hermitian(&k, 0.4).unwrap();
        let b = exp_i_hermitian(&k, 0.7).unwrap();
        let ab = a.matrix().mul(b.matrix());
        let direct = exp_i_hermitian(&k, 1.1).unwrap();
        assert!(ab.max_abs_diff(direct.matrix()) < 1e-8);
    }

    #[test]
    fn permute_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let m = random_matrix(8, 8, &mut rng);
        let p = permute_qubits(&m, &[0, 1, 2]).unwrap();
        assert!(p.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn permute_swap_on_x_tensor_z() {
        let xz = kron(&pauli_x(), &pauli_z()).unwrap();
        let zx = kron(&pauli_z(), &pauli_x()).unwrap();
        let swapped = permute_qubits(&xz, &[1, 0]).unwrap();
        assert!(swapped.max_abs_diff(&zx) < 1e-15);
    }

    #[test]
    fn permute_matches_transposition_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let m = random_matrix(16, 16, &mut rng);
        // perm sending (0,1,2,3) → (2,0,3,1) as a product of transpositions:
        // start identity, apply swaps until positions match.
        let perm = [2usize, 0, 3, 1];
        let direct = permute_qubits(&m, &perm).unwrap();
        // Oracle: decompose into transpositions acting step by step.
        let mut cur = m.clone();
        let mut location = [0usize, 1, 2, 3]; // location[i] = current position of original qubit i
        for i in 0..4 {
            let want = perm[i];
            let at = location[i];
            if at != want {
                // swap positions `at` and `want`
                let mut swap_perm = [0usize; 4];
                for (slot, sp) in swap_perm.iter_mut().enumerate() {
                    *sp = if slot == at {
                        want
                    } else if slot == want {
                        at
                    } else {
                        slot
                    };
                }
                cur = permute_qubits(&cur, &swap_perm).unwrap();
                for l in location.iter_mut() {
                    if *l == at {
                        *l = want;
                    } else if *l == want {
                        *l = at;
                    }
                }
            }
        }
        assert!(cur.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn permute_rejects_non_bijection() {
        let m = ComplexMatrix::identity(4);
        assert!(permute_qubits(&m, &[0, 0]).is_err());
    }

    #[test]
    fn density_invariants_rejected_on_bad_input() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.6, 0.0), c(0.1, 0.2)], vec![ZERO, c(0.4, 0.0)]]);
        assert!(DensityMatrix::new(1, m).is_err()); // not Hermitian
        let m2 = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(1, m2).is_err()); // trace 2
    }

    #[test]
    fn unitary_embedding_trace_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..5 {
            let rho = random_density(3, &mut rng);
            let u = haar_random_unitary(3, &mut rng);
            let out = apply_unitary(&rho, &u, &[0, 1, 2]).unwrap();
            let reduced = partial_trace(&out, &[]).unwrap();
            assert!((reduced.trace().re - 1.0).abs() < 1e-10);
            out.validate_full().unwrap();
        }
    }

    #[test]
    fn apply_unitary_pure_matches_density_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let amps: Vec<C64> = (0..8)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let psi = PureState::normalized(3, amps).unwrap();
        let u = haar_random_unitary(2, &mut rng);
        let targets = [1usize, 2];
        let out_pure = apply_unitary_pure(&psi, &u, &targets).unwrap();
        let out_rho = apply_unitary(&psi.to_density(), &u, &targets).unwrap();
        assert!(out_pure.to_density().matrix().max_abs_diff(out_rho.matrix()) < 1e-10);
    }

    #[test]
    fn sandwich_and_insert_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let rho = random_density(2, &mut rng);
        let grown = insert_maximally_mixed(&rho, &[1]).unwrap();
        assert_eq!(grown.num_qubits(), 3);
        assert!((grown.trace().re - 1.0).abs() < 1e-12);
        let back = partial_trace(&grown, &[1]).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        // Sandwiching the inserted qubit on |0⟩ and |1⟩ halves the original.
        let s0 = sandwich_basis(grown.matrix(), 3, &[1], 0).unwrap();
        assert!(s0.max_abs_diff(&rho.matrix().scale(c(0.5, 0.0))) < 1e-12);
    }
}
