//! Rank-one effects, orthonormal observable bases and the built-in
//! measurement presets.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CVector, ComplexMatrix};

/// Unit-norm tolerance accepted when constructing an effect.
pub const EFFECT_NORM_TOL: f64 = 1e-10;

/// A rank-one projector `|y⟩⟨y|` together with its outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    vector: CVector,
    label: String,
}

impl Effect {
    /// Accepts a vector whose norm is one within [`EFFECT_NORM_TOL`] and
    /// renormalizes it exactly.
    pub fn new(vector: CVector, label: impl Into<String>) -> Result<Self> {
        let norm = vector.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > EFFECT_NORM_TOL {
            return Err(Error::InvalidEffect(format!("vector norm {norm} is not 1")));
        }
        Self::normalized(vector, label)
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(vector: CVector, label: impl Into<String>) -> Result<Self> {
        let vector = crate::linalg::normalized(&vector)
            .ok_or_else(|| Error::InvalidEffect("zero vector".into()))?;
        Ok(Self {
            vector,
            label: label.into(),
        })
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis_vector(dim: usize, index: usize, label: impl Into<String>) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Self {
            vector: v,
            label: label.into(),
        }
    }

    /// Qubit effect whose Bloch direction is `direction` (normalized here).
    pub fn from_bloch_direction(direction: [f64; 3], label: impl Into<String>) -> Result<Self> {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidEffect("zero Bloch direction".into()));
        }
        let [x, y, z] = direction.map(|v| v / norm);
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        let v = CVector::from_vec(vec![
            c((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Self::normalized(v, label)
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vector)
    }

    /// Unit Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a qubit effect.
    pub fn bloch_direction(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::RequiresQubit(self.dim()));
        }
        let (a, b) = (self.vector[0], self.vector[1]);
        let cross = a.conj() * b;
        Ok([2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()])
    }
}

/// Eigenbasis of a nondegenerate observable: `dim` orthonormal effects.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableBasis {
    name: String,
    effects: Vec<Effect>,
}

impl ObservableBasis {
    pub fn new(name: impl Into<String>, effects: Vec<Effect>) -> Result<Self> {
        let name = name.into();
        let dim = effects.first().map(Effect::dim).unwrap_or(0);
        if dim == 0 || effects.len() != dim || effects.iter().any(|e| e.dim() != dim) {
            return Err(Error::InvalidBasis(format!(
                "{name}: need exactly dim effects of equal dimension"
            )));
        }
        for (a, ea) in effects.iter().enumerate() {
            for eb in &effects[a + 1..] {
                let overlap = ea.vector().dotc(eb.vector()).norm();
                if overlap > 1e-12 {
                    return Err(Error::InvalidBasis(format!(
                        "{name}: effects {} and {} overlap by {overlap:.3e}",
                        ea.label(),
                        eb.label()
                    )));
                }
            }
        }
        let basis = Self { name, effects };
        let closure = (&basis.closure() - &ComplexMatrix::identity(dim)).max_abs();
        if closure > 1e-10 {
            return Err(Error::InvalidBasis(format!(
                "{}: projectors miss the identity by {closure:.3e}",
                basis.name
            )));
        }
        Ok(basis)
    }

    pub fn computational(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| Effect::basis_vector(dim, k, format!("z{k}")))
            .collect();
        Self {
            name: "computational".into(),
            effects,
        }
    }

    /// Qubit basis `{+n, -n}` labelled `name+` / `name-`.
    pub fn qubit_axis(name: &str, direction: [f64; 3]) -> Result<Self> {
        let plus = Effect::from_bloch_direction(direction, format!("{name}+"))?;
        let minus = Effect::from_bloch_direction(direction.map(|v| -v), format!("{name}-"))?;
        Self::new(name, vec![plus, minus])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects.len()
    }

    /// `Σ_a |a⟩⟨a|`
    pub fn closure(&self) -> ComplexMatrix {
        let dim = self.dim();
        self.effects
            .iter()
            .fold(ComplexMatrix::zeros(dim), |acc, e| &acc + &e.projector())
    }
}

/// Single qubit Pauli axis by name (`x`, `y` or `z`).
pub fn pauli_axis(name: &str) -> Option<ObservableBasis> {
    let direction = match name {
        "x" => [1.0, 0.0, 0.0],
        "y" => [0.0, 1.0, 0.0],
        "z" => [0.0, 0.0, 1.0],
        _ => return None,
    };
    ObservableBasis::qubit_axis(name, direction).ok()
}

/// The three Pauli eigenbases, six effects `±x, ±y, ±z`.
pub fn pauli6() -> Vec<ObservableBasis> {
    ["x", "y", "z"]
        .iter()
        .map(|n| pauli_axis(n).expect("built-in axis"))
        .collect()
}

/// Pauli bases plus the diagonal axis `(1,1,1)/√3`: eight effects, an
/// overcomplete qubit plan whose axes are not mutually unbiased.
pub fn overcomplete8() -> Vec<ObservableBasis> {
    let mut bases = pauli6();
    bases.push(ObservableBasis::qubit_axis("d", [1.0, 1.0, 1.0]).expect("built-in axis"));
    bases
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// Complete set of `d + 1` mutually unbiased bases for prime `d`.
///
/// For `d = 2` these are the Pauli bases. For odd primes the computational
/// basis is joined by `v_{b,k}(j) = ω^{b j² + k j} / √d`, `ω = e^{2πi/d}`.
pub fn mutually_unbiased_bases(dim: usize) -> Result<Vec<ObservableBasis>> {
    if !is_prime(dim) {
        return Err(Error::InvalidBasis(format!(
            "mutually unbiased preset needs a prime dimension, got {dim}"
        )));
    }
    if dim == 2 {
        let mut bases = pauli6();
        bases.rotate_left(2);
        return Ok(bases);
    }
    let mut bases = vec![ObservableBasis::computational(dim)];
    let amplitude = 1.0 / (dim as f64).sqrt();
    for b in 0..dim {
        let effects = (0..dim)
            .map(|k| {
                let v = CVector::from_fn(dim, |j, _| {
                    let phase = ((b * j * j + k * j) % dim) as f64;
                    Complex64::from_polar(amplitude, 2.0 * PI * phase / dim as f64)
                });
                Effect::normalized(v, format!("b{b}k{k}"))
            })
            .collect::<Result<Vec<_>>>()?;
        bases.push(ObservableBasis::new(format!("mub{b}"), effects)?);
    }
    Ok(bases)
}
