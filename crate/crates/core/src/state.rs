//! Density matrices, the Born rule and state-comparison metrics.

use crate::error::{Error, Result};
use crate::linalg::{c, CVector, ComplexMatrix, HERMITIAN_TOL};
use crate::measurement::{Effect, ObservableBasis};

/// Trace and negativity tolerance of a valid density matrix.
pub const STATE_TOL: f64 = 1e-10;

/// Unit-trace positive-semidefinite Hermitian matrix, kept together with its
/// diagonal form `ρ = Σ_i r_i |φ_i⟩⟨φ_i|`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<CVector>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityMatrix {
    /// Validates `m` at the default tolerance [`STATE_TOL`].
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, STATE_TOL)
    }

    /// Validates `m` with `tol` applied to Hermiticity (relative), trace and
    /// negative eigenvalues. Eigenvalues in `[-tol, 0)` are clamped to zero.
    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let herm_tol = tol.max(HERMITIAN_TOL);
        if !m.is_hermitian(herm_tol) {
            return Err(Error::NonHermitianInput(m.asymmetry()));
        }
        let matrix = m.hermitian_part();
        let trace = matrix.trace().re;
        if !trace.is_finite() || (trace - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let eigen = matrix.eigh()?;
        let smallest = eigen.values[0];
        if smallest < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {smallest:.3e}"
            )));
        }
        if smallest < 0.0 {
            let clamped: Vec<f64> = eigen.values.iter().map(|v| v.max(0.0)).collect();
            let rebuilt = ComplexMatrix::from_spectrum(&eigen, |v| v.max(0.0));
            return Ok(Self {
                matrix: rebuilt,
                eigenvalues: clamped,
                eigenvectors: eigen.vectors,
            });
        }
        Ok(Self {
            matrix,
            eigenvalues: eigen.values,
            eigenvectors: eigen.vectors,
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
            .expect("identity/dim is a state")
    }

    pub fn pure(vector: &CVector) -> Result<Self> {
        let v = crate::linalg::normalized(vector)
            .ok_or_else(|| Error::InvalidState("zero state vector".into()))?;
        Self::new(ComplexMatrix::outer(&v))
    }

    /// Qubit state `(I + x σx + y σy + z σz)/2`; requires `|v| ≤ 1`.
    pub fn from_bloch(v: [f64; 3]) -> Result<Self> {
        let [x, y, z] = v;
        let m = ComplexMatrix::from_rows(&[
            vec![c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0)],
            vec![c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)],
        ])?;
        Self::new(m)
    }

    /// The frequency matrix `Σ_a w_a |a⟩⟨a|` diagonal in `basis`.
    pub fn diagonal_in_basis(basis: &ObservableBasis, weights: &[f64]) -> Result<Self> {
        if weights.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: weights.len(),
            });
        }
        let m = basis
            .effects()
            .iter()
            .zip(weights)
            .fold(ComplexMatrix::zeros(basis.dim()), |acc, (e, w)| {
                &acc + &e.projector().scale(*w)
            });
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Ascending eigenvalues `r_i`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[CVector] {
        &self.eigenvectors
    }

    /// Projector onto the eigenvectors with eigenvalue above `rank_tol`.
    pub fn support_projector(&self, rank_tol: f64) -> ComplexMatrix {
        let d = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .filter(|(r, _)| **r > rank_tol)
            .fold(ComplexMatrix::zeros(d), |acc, (_, v)| {
                &acc + &ComplexMatrix::outer(v)
            })
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        self.eigenvalues.iter().filter(|r| **r > rank_tol).count()
    }

    /// Bloch vector `(x, y, z)` of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::RequiresQubit(self.dim()));
        }
        let off = self.matrix.get(0, 1);
        let z = self.matrix.get(0, 0).re - self.matrix.get(1, 1).re;
        Ok([2.0 * off.re, -2.0 * off.im, z])
    }

    fn sqrt(&self) -> ComplexMatrix {
        let eigen = crate::linalg::Eigen {
            values: self.eigenvalues.clone(),
            vectors: self.eigenvectors.clone(),
        };
        ComplexMatrix::from_spectrum(&eigen, |r| r.max(0.0).sqrt())
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `⟨y|ρ|y⟩`, clamped to `[0, 1]`.
pub fn born_probability(state: &DensityMatrix, effect: &Effect) -> Result<f64> {
    check_dims(state.dim(), effect.dim())?;
    Ok(raw_probability(state, effect).clamp(0.0, 1.0))
}

/// Unclamped real part of `⟨y|ρ|y⟩`; the dimensions must already agree.
pub(crate) fn raw_probability(state: &DensityMatrix, effect: &Effect) -> f64 {
    state.matrix.sandwich(effect.vector(), effect.vector()).re
}

/// Clamps the spectrum of a Hermitian matrix at zero and renormalizes it to
/// unit trace.
pub fn project_to_physical(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let eigen = m.eigh()?;
    let total: f64 = eigen.values.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroTraceAfterClamp);
    }
    let projected = ComplexMatrix::from_spectrum(&eigen, |v| v.max(0.0) / total);
    DensityMatrix::new(projected)
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`.
///
/// Qubits use the closed form `Tr(ab) + 2√(det a det b)`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let value = if a.dim() == 2 {
        let overlap = (a.matrix() * b.matrix()).trace().re;
        let det_a = a.eigenvalues.iter().product::<f64>().max(0.0);
        let det_b = b.eigenvalues.iter().product::<f64>().max(0.0);
        overlap + 2.0 * (det_a * det_b).sqrt()
    } else {
        let root = a.sqrt();
        let inner = &(&root * b.matrix()) * &root;
        let eigen = inner.hermitian_part().eigh()?;
        let t: f64 = eigen.values.iter().map(|v| v.max(0.0).sqrt()).sum();
        t * t
    };
    Ok(value.clamp(0.0, 1.0))
}

/// `½ Σ |eig(a − b)|`
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let diff = (a.matrix() - b.matrix()).hermitian_part();
    let eigen = diff.eigh()?;
    Ok(0.5 * eigen.values.iter().map(|v| v.abs()).sum::<f64>())
}
