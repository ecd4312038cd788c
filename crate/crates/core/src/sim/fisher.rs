//! Per-shot Fisher information of a qubit plan in Bloch coordinates.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::sim::plan::{MeasurementPlan, Observable};
use crate::state::DensityMatrix;

/// Probabilities at or below this make the information undefined.
pub const PROBABILITY_EPS: f64 = 1e-12;

/// Parametrization of the state space the information refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parametrization {
    /// `ρ = (I + θ·σ)/2`, `θ = (x, y, z)`.
    #[default]
    BlochCoordinates,
}

/// `I_jk = Σ_o w_o Σ_i (1/p_i) ∂_j p_i ∂_k p_i` with `w_o = shots_o / N` and
/// `p_i = (1 + n_i·θ)/2`, so `∂p_i/∂θ = n_i / 2`.
///
/// Rest outcomes of bare effect lists contribute with `p = 1 − Σ p_i` and
/// gradient `−Σ n_i / 2`.
pub fn fisher_information(
    true_state: &DensityMatrix,
    plan: &MeasurementPlan,
    parametrization: Parametrization,
) -> Result<[[f64; 3]; 3]> {
    let Parametrization::BlochCoordinates = parametrization;
    if true_state.dim() != 2 || plan.dim() != 2 {
        return Err(Error::RequiresQubit(plan.dim()));
    }
    let theta = true_state.bloch_vector()?;
    let total = plan.total_shots() as f64;
    let mut info = [[0.0; 3]; 3];
    let mut accumulate = |weight: f64, p: f64, grad: [f64; 3]| -> Result<()> {
        if grad.iter().all(|g| *g == 0.0) && p.abs() <= PROBABILITY_EPS {
            return Ok(());
        }
        if p <= PROBABILITY_EPS {
            return Err(Error::SingularProbability(p));
        }
        for j in 0..3 {
            for k in 0..3 {
                info[j][k] += weight * grad[j] * grad[k] / p;
            }
        }
        Ok(())
    };
    for (observable, &shots) in plan.observables().iter().zip(plan.shots()) {
        let weight = shots as f64 / total;
        let mut rest_p = 1.0;
        let mut rest_grad = [0.0; 3];
        for effect in observable.effects() {
            let n = effect.bloch_direction()?;
            let p = 0.5 * (1.0 + n[0] * theta[0] + n[1] * theta[1] + n[2] * theta[2]);
            let grad = n.map(|v| 0.5 * v);
            accumulate(weight, p, grad)?;
            rest_p -= p;
            for k in 0..3 {
                rest_grad[k] -= grad[k];
            }
        }
        if let Observable::Effects(_) = observable {
            accumulate(weight, rest_p, rest_grad)?;
        }
    }
    Ok(info)
}

/// Cramér–Rao variances `diag(I⁻¹) / N`; `None` if the information is singular.
pub fn crb_variance(information: &[[f64; 3]; 3], total_shots: u64) -> Option<[f64; 3]> {
    let m = Matrix3::from_fn(|j, k| information[j][k]);
    let inverse = m.try_inverse()?;
    let n = total_shots as f64;
    let diag = [
        inverse[(0, 0)] / n,
        inverse[(1, 1)] / n,
        inverse[(2, 2)] / n,
    ];
    diag.iter()
        .all(|v| v.is_finite() && *v >= 0.0)
        .then_some(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Effect;
    use crate::measurement::{pauli6, pauli_axis};

    fn z_plan() -> MeasurementPlan {
        MeasurementPlan::from_bases(vec![pauli_axis("z").unwrap()], vec![100], 0).unwrap()
    }

    #[test]
    fn z_axis_at_origin() {
        let info = fisher_information(
            &DensityMatrix::maximally_mixed(2),
            &z_plan(),
            Parametrization::BlochCoordinates,
        )
        .unwrap();
        let expected = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        for j in 0..3 {
            for k in 0..3 {
                assert!((info[j][k] - expected[j][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z_axis_closed_form() {
        let state = DensityMatrix::from_bloch([0.0, 0.0, 0.6]).unwrap();
        let info =
            fisher_information(&state, &z_plan(), Parametrization::BlochCoordinates).unwrap();
        assert!((info[2][2] - 1.5625).abs() < 1e-12);
    }

    #[test]
    fn symmetric_plan_at_origin() {
        let plan = MeasurementPlan::from_bases(pauli6(), vec![10, 10, 10], 0).unwrap();
        let info = fisher_information(
            &DensityMatrix::maximally_mixed(2),
            &plan,
            Parametrization::BlochCoordinates,
        )
        .unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let expected = if j == k { 1.0 / 3.0 } else { 0.0 };
                assert!((info[j][k] - expected).abs() < 1e-12);
            }
        }
        let crb = crb_variance(&info, 30).unwrap();
        for v in crb {
            assert!((v - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_state_is_singular() {
        let up = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            fisher_information(&up, &z_plan(), Parametrization::BlochCoordinates),
            Err(Error::SingularProbability(_))
        ));
    }

    #[test]
    fn yes_no_effect_matches_its_basis() {
        let state = DensityMatrix::from_bloch([0.1, 0.2, 0.3]).unwrap();
        let yes = Effect::basis_vector(2, 0, "yes");
        let bare =
            MeasurementPlan::new(vec![Observable::Effects(vec![yes])], vec![100], 0).unwrap();
        let a = fisher_information(&state, &bare, Parametrization::BlochCoordinates).unwrap();
        let b = fisher_information(&state, &z_plan(), Parametrization::BlochCoordinates).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!((a[j][k] - b[j][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn requires_qubit() {
        let plan = MeasurementPlan::from_bases(
            vec![crate::measurement::ObservableBasis::computational(3)],
            vec![10],
            0,
        )
        .unwrap();
        assert!(matches!(
            fisher_information(
                &DensityMatrix::maximally_mixed(3),
                &plan,
                Parametrization::BlochCoordinates
            ),
            Err(Error::RequiresQubit(3))
        ));
    }
}
