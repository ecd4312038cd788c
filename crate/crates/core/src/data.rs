//! Measurement records: integer counts per rank-one effect.

use crate::error::{Error, Result};
use crate::measurement::{Effect, ObservableBasis};

/// One outcome of the sequential record.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub effect: Effect,
    pub count: u64,
    /// Index of the observable (measurement setting) that produced it.
    pub observable: usize,
}

/// Pooled counts `N_i` over all measured observables.
///
/// Frequencies are derived from the integer counts on demand. Besides the
/// pooled frequencies `f_i = N_i / N` the dataset keeps the number of shots
/// spent on each observable, giving the per-setting frequencies
/// `N_i / N_j` used by the least-squares and linear-inversion baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    records: Vec<Record>,
    observable_shots: Vec<u64>,
}

impl Dataset {
    /// Validates the records. Without `observable_shots` each observable's
    /// shot count is the sum of its recorded counts.
    pub fn new(records: Vec<Record>, observable_shots: Option<Vec<u64>>) -> Result<Self> {
        let dim = records
            .first()
            .map(|r| r.effect.dim())
            .ok_or(Error::EmptyDataset)?;
        if records.iter().any(|r| r.effect.dim() != dim) {
            return Err(Error::InconsistentDimensions);
        }
        if records.iter().all(|r| r.count == 0) {
            return Err(Error::EmptyDataset);
        }
        let n_observables = records.iter().map(|r| r.observable).max().unwrap_or(0) + 1;
        let mut recorded = vec![0u64; n_observables];
        for r in &records {
            recorded[r.observable] = recorded[r.observable]
                .checked_add(r.count)
                .ok_or_else(|| Error::InvalidPlan("count overflow".into()))?;
        }
        let observable_shots = match observable_shots {
            None => recorded,
            Some(shots) => {
                if shots.len() != n_observables {
                    return Err(Error::InvalidPlan(format!(
                        "{} observables referenced but {} shot totals given",
                        n_observables,
                        shots.len()
                    )));
                }
                if let Some(o) = (0..n_observables).find(|&o| recorded[o] > shots[o]) {
                    return Err(Error::InvalidPlan(format!(
                        "observable {o} records {} counts but only {} shots",
                        recorded[o], shots[o]
                    )));
                }
                shots
            }
        };
        Ok(Self {
            dim,
            records,
            observable_shots,
        })
    }

    /// Records of a single observable.
    pub fn single_observable(counts: Vec<(Effect, u64)>) -> Result<Self> {
        let records = counts
            .into_iter()
            .map(|(effect, count)| Record {
                effect,
                count,
                observable: 0,
            })
            .collect();
        Self::new(records, None)
    }

    /// Counts for each effect of `basis`, in order.
    pub fn from_basis_counts(basis: &ObservableBasis, counts: &[u64]) -> Result<Self> {
        if counts.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: counts.len(),
            });
        }
        Self::single_observable(
            basis
                .effects()
                .iter()
                .cloned()
                .zip(counts.iter().copied())
                .collect(),
        )
    }

    /// Pools several complete bases, each with its own counts.
    pub fn from_bases(bases: &[ObservableBasis], counts: &[Vec<u64>]) -> Result<Self> {
        if bases.len() != counts.len() {
            return Err(Error::InvalidPlan(
                "one count list per basis required".into(),
            ));
        }
        let mut records = Vec::new();
        for (o, (basis, c)) in bases.iter().zip(counts).enumerate() {
            if c.len() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    expected: basis.dim(),
                    found: c.len(),
                });
            }
            records.extend(basis.effects().iter().zip(c).map(|(e, &count)| Record {
                effect: e.clone(),
                count,
                observable: o,
            }));
        }
        Self::new(records, None)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `N = Σ_i N_i`
    pub fn total(&self) -> u64 {
        self.records.iter().map(|r| r.count).sum()
    }

    pub fn observable_shots(&self) -> &[u64] {
        &self.observable_shots
    }

    pub fn counts(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.count).collect()
    }

    /// Pooled relative frequencies `f_i = N_i / N`, aligned with the records.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.records
            .iter()
            .map(|r| r.count as f64 / total)
            .collect()
    }

    /// `(effect, f_i)` pairs.
    pub fn frequency_pairs(&self) -> Vec<(&Effect, f64)> {
        self.records
            .iter()
            .map(|r| &r.effect)
            .zip(self.frequencies())
            .collect()
    }

    /// Per-observable frequencies `N_i / N_j` where `j` is the record's observable.
    pub fn setting_frequencies(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| match self.observable_shots[r.observable] {
                0 => 0.0,
                shots => r.count as f64 / shots as f64,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{pauli6, ObservableBasis};

    fn z() -> ObservableBasis {
        ObservableBasis::computational(2)
    }

    #[test]
    fn frequency_examples() {
        for (counts, expected) in [
            ([9, 1], [0.9, 0.1]),
            ([5, 5], [0.5, 0.5]),
            ([10, 0], [1.0, 0.0]),
        ] {
            let d = Dataset::from_basis_counts(&z(), &counts).unwrap();
            assert_eq!(d.total(), 10);
            assert_eq!(d.frequencies(), expected.to_vec());
            assert_eq!(d.len(), 2, "zero-count records are retained");
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        assert_eq!(
            Dataset::from_basis_counts(&z(), &[0, 0]).unwrap_err(),
            Error::EmptyDataset
        );
        assert_eq!(Dataset::new(vec![], None).unwrap_err(), Error::EmptyDataset);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let records = vec![
            Record {
                effect: Effect::basis_vector(2, 0, "a"),
                count: 1,
                observable: 0,
            },
            Record {
                effect: Effect::basis_vector(3, 0, "b"),
                count: 1,
                observable: 0,
            },
        ];
        assert_eq!(
            Dataset::new(records, None).unwrap_err(),
            Error::InconsistentDimensions
        );
    }

    #[test]
    fn pooled_and_setting_frequencies() {
        let d = Dataset::from_bases(&pauli6(), &[vec![3, 1], vec![2, 2], vec![1, 7]]).unwrap();
        assert_eq!(d.total(), 16);
        assert_eq!(d.observable_shots(), &[4, 4, 8]);
        let f = d.frequencies();
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(f[0], 3.0 / 16.0);
        let g = d.setting_frequencies();
        assert_eq!(g, vec![0.75, 0.25, 0.5, 0.5, 0.125, 0.875]);
    }

    #[test]
    fn explicit_shots_must_cover_counts() {
        let records = vec![Record {
            effect: Effect::basis_vector(2, 0, "yes"),
            count: 7,
            observable: 0,
        }];
        let d = Dataset::new(records.clone(), Some(vec![10])).unwrap();
        assert_eq!(d.setting_frequencies(), vec![0.7]);
        assert_eq!(d.frequencies(), vec![1.0]);
        assert!(Dataset::new(records, Some(vec![5])).is_err());
    }
}
