//! Dense complex linear algebra for the small Hermitian matrices used
//! throughout the crate.
//!
//! Matrices are thin wrappers over `nalgebra::DMatrix<Complex64>`; the
//! eigensolver is nalgebra's Hermitian QR iteration, applied after the input
//! has been symmetrized as `(m + m†)/2`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// Relative asymmetry accepted by the eigensolver.
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-10;

/// Relative asymmetry tolerated by the Hermitian type invariants.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

/// Spectrum of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
}

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows().max(1),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row-major rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self(DMatrix::from_fn(dim, dim, |i, j| rows[i][j])))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Real diagonal matrix.
    pub fn diagonal(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `|v⟩⟨v|`
    pub fn outer(v: &CVector) -> Self {
        Self(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// Max-entry norm `max_jk |m_jk|`.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// `max_jk |m_jk - conj(m_kj)|`
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..d {
            for k in j..d {
                worst = worst.max((self.0[(j, k)] - self.0[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `rel_tol` relative to the largest entry (absolute
    /// when the matrix is smaller than one).
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol * self.max_abs().max(1.0)
    }

    /// `(m + m†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// `⟨u|m|v⟩`
    pub fn sandwich(&self, u: &CVector, v: &CVector) -> Complex64 {
        u.dotc(&(&self.0 * v))
    }

    /// Hermitian eigendecomposition with ascending eigenvalues and
    /// orthonormal eigenvectors.
    pub fn eigh(&self) -> Result<Eigen> {
        let asym = self.asymmetry();
        if asym > EIGEN_HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::NonHermitianInput(asym));
        }
        let sym = self.hermitian_part();
        let dim = self.dim();
        if dim == 1 {
            return Ok(Eigen {
                values: vec![sym.0[(0, 0)].re],
                vectors: vec![CVector::from_element(1, Complex64::new(1.0, 0.0))],
            });
        }
        let decomposition = sym.0.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            decomposition.eigenvalues[a].total_cmp(&decomposition.eigenvalues[b])
        });
        let values = order
            .iter()
            .map(|&k| decomposition.eigenvalues[k])
            .collect();
        let vectors = order
            .iter()
            .map(|&k| {
                let v = decomposition.eigenvectors.column(k).into_owned();
                let norm = v.norm();
                v.map(|z| z / norm)
            })
            .collect();
        Ok(Eigen { values, vectors })
    }

    /// Rebuilds `Σ_k f(λ_k) v_k v_k†` from a spectrum.
    pub fn from_spectrum(eigen: &Eigen, mut f: impl FnMut(f64) -> f64) -> Self {
        let dim = eigen.vectors[0].len();
        let mut m = DMatrix::zeros(dim, dim);
        for (value, vector) in eigen.values.iter().zip(&eigen.vectors) {
            let weight = f(*value);
            if weight != 0.0 {
                m += (vector * vector.adjoint()).map(|z| z * weight);
            }
        }
        Self(m)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Normalizes a vector to unit length; `None` for the zero vector.
pub fn normalized(v: &CVector) -> Option<CVector> {
    let norm = v.norm();
    (norm > 0.0 && norm.is_finite()).then(|| v.map(|z| z / norm))
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
