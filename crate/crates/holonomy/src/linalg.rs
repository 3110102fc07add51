//! Dense complex linear algebra substrate: states, operators, matrix
//! exponentials, null-space extraction and subspace overlap unitaries.
//!
//! Everything here is small (4x4 for one ion, 16x16 for two), so all
//! operations are plain dense LAPACK calls. Types are immutable values after
//! construction and safe to share across threads.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default relative tolerance used to decide whether an eigenvalue belongs to
/// the kernel. Well below every gap/norm ratio appearing in the simulations.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// Smallest singular value of an overlap matrix accepted by the Wilson-line
/// step; below this the discretization stepped across a subspace
/// discontinuity.
pub const MIN_OVERLAP_SINGULAR_VALUE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not hermitian: max |M - M^dag| entry = {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("time step must be finite and positive, got {dt}")]
    InvalidTimeStep { dt: f64 },
    #[error("tolerance must be positive, got {tol}")]
    InvalidTolerance { tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("basis is not orthonormal: max Gram defect = {defect:.3e}")]
    NotOrthonormal { defect: f64 },
    #[error(
        "singular subspace overlap: smallest singular value {min_singular:.3e} \
         (subspaces barely intersect)"
    )]
    SingularOverlap { min_singular: f64 },
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("singular value decomposition failed: {0}")]
    Svd(String),
}

type Result<T> = std::result::Result<T, LinalgError>;

/// The tensor-product level bases the simulator works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    /// One ion: |0>, |1>, |a>, |e>.
    SingleIon,
    /// Two ions: product basis |00>, |01>, ..., |ee| in row-major slot order.
    TwoIon,
}

const SINGLE_LABELS: [&str; 4] = ["0", "1", "a", "e"];

impl Basis {
    pub fn dim(self) -> usize {
        match self {
            Basis::SingleIon => 4,
            Basis::TwoIon => 16,
        }
    }

    /// Label of basis state `index`, e.g. "a" or "1e".
    pub fn label(self, index: usize) -> String {
        match self {
            Basis::SingleIon => SINGLE_LABELS[index].to_string(),
            Basis::TwoIon => {
                format!("{}{}", SINGLE_LABELS[index / 4], SINGLE_LABELS[index % 4])
            }
        }
    }

    pub fn labels(self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    /// Index of the product state with the given single-ion level indices.
    pub fn product_index(first: usize, second: usize) -> usize {
        4 * first + second
    }
}

/// Complex amplitude vector over a tensor-product ion-level basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    amplitudes: Array1<C64>,
    basis: Basis,
}

impl QuantumState {
    pub fn new(basis: Basis, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: basis.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, basis })
    }

    /// The computational/bare basis state with a 1 at `index`.
    pub fn basis_state(basis: Basis, index: usize) -> Self {
        let mut amplitudes = Array1::zeros(basis.dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes, basis }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            amplitudes: self.amplitudes.mapv(|z| z / n),
            basis: self.basis,
        }
    }
}

/// Dense complex square matrix: Hamiltonians, propagators, holonomies.
///
/// `hermitian` is an assertion tag set by [`OperatorMatrix::hermitian`];
/// matrices built through other constructors carry `false` even if they
/// happen to be hermitian.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wrap a square matrix without asserting any structure.
    pub fn general(entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(LinalgError::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self {
            entries,
            hermitian: false,
        })
    }

    /// Wrap a square matrix and assert hermiticity.
    ///
    /// The tolerance scales with the largest entry so that Hamiltonians given
    /// in physical rad/s units validate as well as O(1) test matrices.
    pub fn hermitian(entries: Array2<C64>) -> Result<Self> {
        let m = Self::general(entries)?;
        let asym = m.max_asymmetry();
        if asym > 1e-12 * m.max_abs().max(1.0) {
            return Err(LinalgError::NotHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(Self {
            hermitian: true,
            ..m
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: Array2::eye(dim),
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: Array2::zeros((dim, dim)),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn is_hermitian_tagged(&self) -> bool {
        self.hermitian
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            entries: self.entries.t().mapv(|z| z.conj()),
            hermitian: self.hermitian,
        }
    }

    /// Matrix product self * other.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Self::general(self.entries.dot(&other.entries))
    }

    /// Apply to a state: |out> = M |in>.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if self.dim() != state.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        QuantumState::new(state.basis(), self.entries.dot(state.amplitudes()))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let defect = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(defect);
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// max |U^dag U - I| entry; zero for exact unitaries.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.dagger().entries.dot(&self.entries);
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }
}

/// Hermitian eigendecomposition with an explicit residual check.
///
/// ndarray-linalg 0.18 hands row-major storage to LAPACK without adjusting
/// for layout, so for complex hermitian input the returned vectors can
/// belong to the transposed (i.e. conjugated) matrix. Conjugating them back
/// restores eigenvectors of the matrix as stored; the residual check makes
/// the outcome correct under either library behavior.
pub(crate) fn eigh_checked(entries: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, vecs) = entries
        .eigh(UPLO::Lower)
        .map_err(|e| LinalgError::Eigen(e.to_string()))?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if eig_residual(entries, &vals, &vecs) <= 1e-10 * scale {
        return Ok((vals, vecs));
    }
    let conjugated = vecs.mapv(|z| z.conj());
    let residual = eig_residual(entries, &vals, &conjugated);
    if residual <= 1e-10 * scale {
        return Ok((vals, conjugated));
    }
    Err(LinalgError::Eigen(format!(
        "eigenvector residual {residual:.3e} exceeds tolerance"
    )))
}

fn eig_residual(h: &Array2<C64>, vals: &Array1<f64>, vecs: &Array2<C64>) -> f64 {
    let hv = h.dot(vecs);
    let mut worst = 0.0f64;
    for k in 0..vals.len() {
        for i in 0..h.nrows() {
            worst = worst.max((hv[(i, k)] - vecs[(i, k)] * vals[k]).norm());
        }
    }
    worst
}

/// exp(-i H dt), exact to machine precision for hermitian `h` via
/// eigendecomposition. `h` is in angular-frequency units (rad/s, hbar = 1),
/// `dt` in seconds; the result is unitary by construction.
pub fn matrix_exponential_step(h: &OperatorMatrix, dt: f64) -> Result<OperatorMatrix> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(LinalgError::InvalidTimeStep { dt });
    }
    let asym = h.max_asymmetry();
    if asym > 1e-12 * h.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian {
            max_asymmetry: asym,
        });
    }
    let (vals, vecs) = eigh_checked(&h.entries)?;
    let phases: Array1<C64> = vals.mapv(|e| (-C64::i() * e * dt).exp());
    // U = V diag(e^{-i lambda dt}) V^dag
    let scaled = &vecs * &phases; // scales column k by phases[k]
    let u = scaled.dot(&vecs.t().mapv(|z| z.conj()));
    OperatorMatrix::general(u)
}

/// Orthonormal basis of the eigenspace of hermitian `h` with |eigenvalue| <=
/// tol * ||h||, in a deterministic order (see [`canonical_subspace_basis`]).
/// An empty null space yields an empty list.
pub fn null_space_basis(h: &OperatorMatrix, tol: f64, basis: Basis) -> Result<Vec<QuantumState>> {
    if h.dim() != basis.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: basis.dim(),
            got: h.dim(),
        });
    }
    let kernel = kernel_columns(&h.entries, tol)?;
    let canonical = canonical_subspace_basis(&kernel);
    columns_to_states(&canonical, basis)
}

/// Same kernel as [`null_space_basis`] but ordered and gauged by maximal
/// overlap with `reference` (which must have the kernel's cardinality).
/// Needed wherever holonomy extraction requires a reproducible column order.
pub fn aligned_null_space_basis(
    h: &OperatorMatrix,
    tol: f64,
    reference: &[QuantumState],
) -> Result<Vec<QuantumState>> {
    if reference.is_empty() {
        return Err(LinalgError::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    let basis = reference[0].basis();
    if h.dim() != basis.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: basis.dim(),
            got: h.dim(),
        });
    }
    let kernel = kernel_columns(&h.entries, tol)?;
    if kernel.ncols() != reference.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: reference.len(),
            got: kernel.ncols(),
        });
    }
    let reference_cols = states_to_columns(reference);
    let aligned = align_columns(&kernel, &reference_cols)?;
    columns_to_states(&aligned, basis)
}

/// The k x k unitary closest in Frobenius norm to the overlap matrix
/// M_ab = <A_a|B_b> (its polar factor). The overlap must be well conditioned;
/// a smallest singular value below [`MIN_OVERLAP_SINGULAR_VALUE`] signals
/// that the two subspaces have drifted too far apart.
pub fn subspace_overlap_unitary(
    basis_a: &[QuantumState],
    basis_b: &[QuantumState],
) -> Result<OperatorMatrix> {
    if basis_a.len() != basis_b.len() || basis_a.is_empty() {
        return Err(LinalgError::DimensionMismatch {
            expected: basis_a.len(),
            got: basis_b.len(),
        });
    }
    check_orthonormal(basis_a)?;
    check_orthonormal(basis_b)?;
    let a = states_to_columns(basis_a);
    let b = states_to_columns(basis_b);
    let overlap = a.t().mapv(|z| z.conj()).dot(&b);
    let (polar, min_singular) = polar_unitary(&overlap)?;
    if min_singular < MIN_OVERLAP_SINGULAR_VALUE {
        return Err(LinalgError::SingularOverlap { min_singular });
    }
    OperatorMatrix::general(polar)
}

fn check_orthonormal(states: &[QuantumState]) -> Result<()> {
    let mut defect = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let target = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            defect = defect.max((a.inner(b) - target).norm());
        }
    }
    if defect > 1e-8 {
        return Err(LinalgError::NotOrthonormal { defect });
    }
    Ok(())
}

/// Columns of the (near-)kernel of a hermitian matrix, eigenvalue threshold
/// tol * max|eigenvalue|. The zero matrix has the whole space as kernel.
pub(crate) fn kernel_columns(entries: &Array2<C64>, tol: f64) -> Result<Array2<C64>> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(LinalgError::InvalidTolerance { tol });
    }
    let (vals, vecs) = eigh_checked(entries)?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let selected: Vec<usize> = (0..vals.len())
        .filter(|&k| vals[k].abs() <= tol * scale)
        .collect();
    let d = entries.nrows();
    let mut kernel = Array2::zeros((d, selected.len()));
    for (out_col, &k) in selected.iter().enumerate() {
        kernel
            .slice_mut(s![.., out_col])
            .assign(&vecs.slice(s![.., k]));
    }
    Ok(kernel)
}

/// Canonical orthonormal basis of a column space, independent of the gauge
/// the eigensolver happened to return.
///
/// Vectors are ordered by the first basis index on which the subspace has
/// support; each leading entry is made real positive, and later vectors have
/// exactly zero component on earlier pivot rows (a reduced, QR-like form).
pub(crate) fn canonical_subspace_basis(columns: &Array2<C64>) -> Array2<C64> {
    let d = columns.nrows();
    let mut remaining = columns.to_owned();
    let mut out = Array2::zeros((d, columns.ncols()));
    let mut out_col = 0;
    for row in 0..d {
        let m = remaining.ncols();
        if m == 0 {
            break;
        }
        // Coefficient vector of row `row` across the remaining columns.
        let coeff: Array1<C64> = (0..m).map(|j| remaining[(row, j)].conj()).collect();
        let weight = coeff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if weight < 1e-7 {
            continue;
        }
        // Unit vector in the span with maximal (and real positive) weight on
        // this row.
        let pivot = remaining.dot(&coeff.mapv(|z| z / weight));
        out.slice_mut(s![.., out_col]).assign(&pivot);
        out_col += 1;
        // Deflate: keep an orthonormal basis of the coefficient directions
        // orthogonal to `coeff`; those combinations have zero entry on `row`.
        let unit = coeff.mapv(|z| z / weight);
        let mut complement: Vec<Array1<C64>> = Vec::with_capacity(m - 1);
        for j in 0..m {
            let mut cand: Array1<C64> = Array1::zeros(m);
            cand[j] = C64::new(1.0, 0.0);
            let overlap: C64 = unit
                .iter()
                .zip(cand.iter())
                .map(|(u, c)| u.conj() * c)
                .sum();
            let mut cand = &cand - &unit.mapv(|u| u * overlap);
            for prev in &complement {
                let ov: C64 = prev
                    .iter()
                    .zip(cand.iter())
                    .map(|(p, c)| p.conj() * c)
                    .sum();
                cand = &cand - &prev.mapv(|p| p * ov);
            }
            let n = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-7 {
                complement.push(cand.mapv(|z| z / n));
                if complement.len() == m - 1 {
                    break;
                }
            }
        }
        let mut next = Array2::zeros((d, complement.len()));
        for (j, dir) in complement.iter().enumerate() {
            next.slice_mut(s![.., j]).assign(&remaining.dot(dir));
        }
        remaining = next;
    }
    out.slice(s![.., ..out_col]).to_owned()
}

/// Rotate `columns` within their span so they maximally overlap `reference`
/// (polar factor of the overlap matrix).
pub(crate) fn align_columns(columns: &Array2<C64>, reference: &Array2<C64>) -> Result<Array2<C64>> {
    let overlap = columns.t().mapv(|z| z.conj()).dot(reference);
    let (polar, min_singular) = polar_unitary(&overlap)?;
    if min_singular < MIN_OVERLAP_SINGULAR_VALUE {
        return Err(LinalgError::SingularOverlap { min_singular });
    }
    Ok(columns.dot(&polar))
}

/// Unitary polar factor of a square matrix plus its smallest singular value.
pub(crate) fn polar_unitary(m: &Array2<C64>) -> Result<(Array2<C64>, f64)> {
    let (u, sigma, vt) = m
        .svd(true, true)
        .map_err(|e| LinalgError::Svd(e.to_string()))?;
    let u = u.ok_or_else(|| LinalgError::Svd("missing U factor".into()))?;
    let vt = vt.ok_or_else(|| LinalgError::Svd("missing V^dag factor".into()))?;
    let min_singular = sigma.iter().fold(f64::INFINITY, |m, s| m.min(*s));
    Ok((u.dot(&vt), min_singular))
}

pub(crate) fn states_to_columns(states: &[QuantumState]) -> Array2<C64> {
    let d = states[0].dim();
    let mut cols = Array2::zeros((d, states.len()));
    for (j, state) in states.iter().enumerate() {
        cols.slice_mut(s![.., j]).assign(state.amplitudes());
    }
    cols
}

pub(crate) fn columns_to_states(columns: &Array2<C64>, basis: Basis) -> Result<Vec<QuantumState>> {
    (0..columns.ncols())
        .map(|j| QuantumState::new(basis, columns.slice(s![.., j]).to_owned()))
        .collect()
}
