//! Dense complex operator algebra.
//!
//! Composite systems use the row-major convention: for a left factor of
//! dimension `dl` and a right factor of dimension `dr`, the product basis
//! state `|l r>` has index `l * dr + r`. Physical levels `|1>, |2>, |3>` map to
//! indices `0, 1, 2`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A square complex matrix acting on a `dim`-dimensional Hilbert space.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Builds from row-major entries; `entries.len()` must be a nonzero perfect square.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// `|row><col|` on a `dim`-dimensional space (zero-based indices).
    pub fn ket_bra(dim: usize, row: usize, col: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(row, col)] = ONE;
        Self(m)
    }

    /// `|i><i|`.
    pub fn projector(dim: usize, i: usize) -> Self {
        Self::ket_bra(dim, i, i)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    /// Column-stacked vectorization: `vec[i + j * dim] = A[i, j]`.
    pub fn vectorize(&self) -> Vec<C64> {
        self.0.as_slice().to_vec()
    }

    pub fn from_vectorized(dim: usize, v: &[C64]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: v.len(),
            });
        }
        Ok(Self(DMatrix::from_column_slice(dim, dim, v)))
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(dim={}){}", self.dim(), self.0)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.0 += &rhs.0;
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// Embeds a local operator acting on factor `site` of a product space with
/// factor dimensions `dims`.
pub fn embed(local: &Operator, site: usize, dims: &[usize]) -> Result<Operator> {
    if site >= dims.len() {
        return Err(Error::InvalidParameter(format!(
            "site {site} out of range for {} factors",
            dims.len()
        )));
    }
    local.ensure_dim(dims[site])?;
    let mut out = Operator::identity(1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == site {
            local.clone()
        } else {
            Operator::identity(d)
        };
        out = kron(&out, &factor);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Left,
    Right,
}

/// Traces out one factor of a bipartite operator on `dl * dr` dimensions.
pub fn partial_trace(a: &Operator, dims: (usize, usize), keep: Keep) -> Result<Operator> {
    let (dl, dr) = dims;
    a.ensure_dim(dl * dr)?;
    let m = &a.0;
    let out = match keep {
        Keep::Left => DMatrix::from_fn(dl, dl, |i, j| {
            (0..dr).map(|k| m[(i * dr + k, j * dr + k)]).sum::<C64>()
        }),
        Keep::Right => DMatrix::from_fn(dr, dr, |i, j| {
            (0..dl).map(|k| m[(k * dr + i, k * dr + j)]).sum::<C64>()
        }),
    };
    Ok(Operator(out))
}

/// Eigendecomposition `A = U diag(λ) U†` of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: Operator,
}

impl SpectralDecomposition {
    /// Applies a real function to the spectrum: `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Operator {
        let u = &self.eigenvectors.0;
        let n = u.nrows();
        let mut scaled = u.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        Operator(scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> Operator {
        self.map(|x| x)
    }
}

pub fn hermitian_eig(a: &Operator) -> Result<SpectralDecomposition> {
    let deviation = a.hermiticity_error();
    if deviation > tolerance::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(a.hermitian_part().0);
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.dim(), a.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: Operator(vectors),
    })
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: Operator,
    spectrum: SpectralDecomposition,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let deviation = op.hermiticity_error();
        if deviation > tolerance::HERMITIAN {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {deviation:e})"
            )));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > tolerance::TRACE {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let spectrum = hermitian_eig(&op)?;
        let min = spectrum.eigenvalues[0];
        if min < tolerance::MIN_EIGENVALUE {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { op, spectrum })
    }

    /// Hermitian-symmetrizes and renormalizes before validating.
    pub fn normalized(op: &Operator) -> Result<Self> {
        let h = op.hermitian_part();
        let tr = h.trace().re;
        if !(tr.is_finite() && tr.abs() > 0.0) {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        Self::new(h.scale_real(1.0 / tr))
    }

    /// Diagonal state from populations (must sum to one).
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::new(Operator::from_real_diagonal(p))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(Operator::identity(dim).scale_real(1.0 / dim as f64))
            .expect("maximally mixed state is valid")
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.eigenvalues[0]
    }

    pub fn populations(&self) -> Vec<f64> {
        self.op.real_diagonal()
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        other.op.ensure_dim(self.dim())?;
        let diff = (&self.op - &other.op).hermitian_part();
        let eig = hermitian_eig(&diff)?;
        Ok(0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
    }
}

/// Matrix logarithm of a density matrix with eigenvalues clamped to `floor`.
pub fn log_psd(rho: &DensityMatrix, floor: f64) -> Operator {
    rho.spectrum.map(|x| x.max(floor).ln())
}
