//! Measurement plans and synthetic datasets drawn from them.

use crate::data::{Dataset, Record};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurement::{Effect, ObservableBasis};
use crate::sim::rng::SeededRng;
use crate::state::{raw_probability, DensityMatrix};

/// One measurement setting.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Complete orthonormal eigenbasis.
    Basis(ObservableBasis),
    /// Rank-one effects with `Σ |y⟩⟨y| ≤ I`; the remaining probability is an
    /// implicit "rest" outcome.
    Effects(Vec<Effect>),
}

impl Observable {
    pub fn effects(&self) -> &[Effect] {
        match self {
            Observable::Basis(b) => b.effects(),
            Observable::Effects(e) => e,
        }
    }

    pub fn dim(&self) -> usize {
        self.effects().first().map(Effect::dim).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    observables: Vec<Observable>,
    shots: Vec<u64>,
    seed: u64,
    /// Record the rest outcome of bare effect lists as its own effect.
    include_complement: bool,
    complements: Vec<Option<Effect>>,
}

impl MeasurementPlan {
    pub fn new(observables: Vec<Observable>, shots: Vec<u64>, seed: u64) -> Result<Self> {
        Self::with_complement(observables, shots, seed, false)
    }

    /// With `include_complement`, the rest outcome `I − Σ|y⟩⟨y|` of every
    /// bare effect list enters the dataset as an extra record. It must then
    /// be rank one.
    pub fn with_complement(
        observables: Vec<Observable>,
        shots: Vec<u64>,
        seed: u64,
        include_complement: bool,
    ) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::InvalidPlan("no observables".into()));
        }
        if observables.len() != shots.len() {
            return Err(Error::InvalidPlan(format!(
                "{} observables but {} shot counts",
                observables.len(),
                shots.len()
            )));
        }
        if shots.contains(&0) {
            return Err(Error::InvalidPlan(
                "every observable needs at least one shot".into(),
            ));
        }
        let dim = observables[0].dim();
        if dim == 0 || observables.iter().any(|o| o.dim() != dim) {
            return Err(Error::InvalidPlan("observables differ in dimension".into()));
        }
        let mut complements = Vec::with_capacity(observables.len());
        for (index, observable) in observables.iter().enumerate() {
            let complement = match observable {
                Observable::Basis(_) => None,
                Observable::Effects(effects) => {
                    if effects.is_empty() {
                        return Err(Error::InvalidPlan(format!("observable {index} is empty")));
                    }
                    let sum = effects
                        .iter()
                        .fold(ComplexMatrix::zeros(dim), |acc, e| &acc + &e.projector());
                    let rest = &ComplexMatrix::identity(dim) - &sum;
                    let eigen = rest.eigh()?;
                    if eigen.values[0] < -1e-10 {
                        return Err(Error::InvalidPlan(format!(
                            "effects of observable {index} sum beyond the identity"
                        )));
                    }
                    if include_complement {
                        let support: Vec<_> = eigen
                            .values
                            .iter()
                            .zip(&eigen.vectors)
                            .filter(|(v, _)| **v > 1e-10)
                            .collect();
                        match support.as_slice() {
                            [(value, vector)] if (**value - 1.0).abs() < 1e-10 => {
                                Some(Effect::normalized((*vector).clone(), "rest")?)
                            }
                            [] => None,
                            _ => {
                                return Err(Error::InvalidPlan(format!(
                                    "complement of observable {index} is not a rank-one projector"
                                )))
                            }
                        }
                    } else {
                        None
                    }
                }
            };
            complements.push(complement);
        }
        Ok(Self {
            observables,
            shots,
            seed,
            include_complement,
            complements,
        })
    }

    /// Complete bases with the given shots each.
    pub fn from_bases(bases: Vec<ObservableBasis>, shots: Vec<u64>, seed: u64) -> Result<Self> {
        Self::new(
            bases.into_iter().map(Observable::Basis).collect(),
            shots,
            seed,
        )
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn shots(&self) -> &[u64] {
        &self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn include_complement(&self) -> bool {
        self.include_complement
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn total_shots(&self) -> u64 {
        self.shots.iter().sum()
    }

    /// Same settings, different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Same settings and seed with new shot counts.
    pub fn with_shots(&self, shots: Vec<u64>) -> Result<Self> {
        Self::with_complement(
            self.observables.clone(),
            shots,
            self.seed,
            self.include_complement,
        )
    }

    /// Outcome probabilities of each observable; bare effect lists get the
    /// rest probability appended.
    pub fn outcome_probabilities(&self, state: &DensityMatrix) -> Result<Vec<Vec<f64>>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        self.observables
            .iter()
            .enumerate()
            .map(|(index, observable)| {
                let mut probs: Vec<f64> = observable
                    .effects()
                    .iter()
                    .map(|e| raw_probability(state, e).max(0.0))
                    .collect();
                let total: f64 = probs.iter().sum();
                match observable {
                    Observable::Basis(_) => {
                        if (total - 1.0).abs() > 1e-10 {
                            return Err(Error::InvalidPlan(format!(
                                "probabilities of observable {index} sum to {total}"
                            )));
                        }
                    }
                    Observable::Effects(_) => {
                        if total > 1.0 + 1e-10 {
                            return Err(Error::InvalidPlan(format!(
                                "probabilities of observable {index} exceed one"
                            )));
                        }
                        probs.push((1.0 - total).max(0.0));
                    }
                }
                Ok(probs)
            })
            .collect()
    }

    fn assemble(&self, counts: Vec<Vec<u64>>) -> Result<Dataset> {
        let mut records = Vec::new();
        for (o, (observable, c)) in self.observables.iter().zip(&counts).enumerate() {
            records.extend(
                observable
                    .effects()
                    .iter()
                    .zip(c)
                    .map(|(e, &count)| Record {
                        effect: e.clone(),
                        count,
                        observable: o,
                    }),
            );
            if let (Observable::Effects(effects), Some(rest)) = (observable, &self.complements[o]) {
                records.push(Record {
                    effect: rest.clone(),
                    count: c[effects.len()],
                    observable: o,
                });
            }
        }
        Dataset::new(records, Some(self.shots.clone()))
    }
}

fn draw(probs: &[f64], rng: &mut SeededRng) -> usize {
    let u = rng.next_f64();
    let mut cumulative = 0.0;
    for (k, p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return k;
        }
    }
    // u landed in the rounding gap above the last cumulative sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Draws `shots_j` categorical outcomes per observable from the Born
/// distribution of `true_state`, all from one stream seeded by the plan.
pub fn sample_dataset(true_state: &DensityMatrix, plan: &MeasurementPlan) -> Result<Dataset> {
    let probabilities = plan.outcome_probabilities(true_state)?;
    let mut rng = SeededRng::new(plan.seed);
    let counts = probabilities
        .iter()
        .zip(&plan.shots)
        .map(|(probs, &shots)| {
            let mut c = vec![0u64; probs.len()];
            for _ in 0..shots {
                c[draw(probs, &mut rng)] += 1;
            }
            c
        })
        .collect();
    plan.assemble(counts)
}

/// Noise-free dataset: counts `shots_j · p_i` rounded by largest remainder,
/// exact whenever those products are integers.
pub fn expected_dataset(true_state: &DensityMatrix, plan: &MeasurementPlan) -> Result<Dataset> {
    let probabilities = plan.outcome_probabilities(true_state)?;
    let counts = probabilities
        .iter()
        .zip(&plan.shots)
        .map(|(probs, &shots)| {
            let total: f64 = probs.iter().sum();
            let ideal: Vec<f64> = probs.iter().map(|p| p / total * shots as f64).collect();
            let mut c: Vec<u64> = ideal.iter().map(|x| (x + 1e-9).floor() as u64).collect();
            let assigned: u64 = c.iter().sum();
            let mut order: Vec<usize> = (0..c.len()).collect();
            order.sort_by(|&a, &b| {
                let ra = ideal[a] - c[a] as f64;
                let rb = ideal[b] - c[b] as f64;
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            for &k in order.iter().take(shots.saturating_sub(assigned) as usize) {
                c[k] += 1;
            }
            c
        })
        .collect();
    plan.assemble(counts)
}
