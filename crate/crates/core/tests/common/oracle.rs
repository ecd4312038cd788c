//! Exhaustive Bloch-ball grid search, independent of the estimators.
//!
//! Probabilities are evaluated as `(1 + n·v)/2` from each effect's Bloch
//! direction, computed here straight from the effect vector; nothing goes
//! through `DensityMatrix` or the likelihood module.

#![allow(dead_code)]

use mlq_core::Dataset;

pub const GRID_STEP: f64 = 0.005;

/// Probability floor applied inside the logarithm, matching the estimator's
/// default convention for observed outcomes.
const FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBest {
    pub value: f64,
    pub point: [f64; 3],
}

/// Per-record data reduced to plain numbers.
pub struct QubitRecords {
    pub directions: Vec<[f64; 3]>,
    /// `N_i / Σ N`
    pub pooled: Vec<f64>,
    /// `N_i / shots of the record's setting`
    pub per_setting: Vec<f64>,
}

impl QubitRecords {
    pub fn from_dataset(data: &Dataset) -> Self {
        assert_eq!(data.dim(), 2);
        let total: u64 = data.records().iter().map(|r| r.count).sum();
        let shots = data.observable_shots();
        let mut directions = Vec::new();
        let mut pooled = Vec::new();
        let mut per_setting = Vec::new();
        for record in data.records() {
            let v = record.effect.vector();
            let (a, b) = (v[0], v[1]);
            let norm = a.norm_sqr() + b.norm_sqr();
            let cross = a.conj() * b;
            directions.push([
                2.0 * cross.re / norm,
                2.0 * cross.im / norm,
                (a.norm_sqr() - b.norm_sqr()) / norm,
            ]);
            pooled.push(record.count as f64 / total as f64);
            per_setting.push(record.count as f64 / shots[record.observable] as f64);
        }
        Self {
            directions,
            pooled,
            per_setting,
        }
    }

    fn probability(&self, i: usize, v: [f64; 3]) -> f64 {
        let n = self.directions[i];
        0.5 * (1.0 + n[0] * v[0] + n[1] * v[1] + n[2] * v[2])
    }

    /// `Σ f_i ln p_i` over observed outcomes.
    pub fn log_likelihood(&self, v: [f64; 3]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.directions.len() {
            let f = self.pooled[i];
            if f > 0.0 {
                total += f * self.probability(i, v).max(FLOOR).ln();
            }
        }
        total
    }

    /// `Σ (p_i − g_i)²`
    pub fn ls_objective(&self, v: [f64; 3]) -> f64 {
        (0..self.directions.len())
            .map(|i| (self.probability(i, v) - self.per_setting[i]).powi(2))
            .sum()
    }
}

/// Maximizes `f` over grid points `step · (i, j, k)` inside the unit ball.
/// Ties keep the first point in `(i, j, k)` lexicographic order.
pub fn grid_argmax(step: f64, f: impl Fn([f64; 3]) -> f64) -> GridBest {
    let n = (1.0 / step).round() as i64;
    let mut best = GridBest {
        value: f64::NEG_INFINITY,
        point: [0.0; 3],
    };
    for i in -n..=n {
        let x = i as f64 * step;
        let ry = 1.0 - x * x;
        let jmax = ((ry.max(0.0)).sqrt() / step + 1e-9).floor() as i64;
        for j in -jmax..=jmax {
            let y = j as f64 * step;
            let rz = ry - y * y;
            if rz < -1e-12 {
                continue;
            }
            let kmax = ((rz.max(0.0)).sqrt() / step + 1e-9).floor() as i64;
            for k in -kmax..=kmax {
                let z = k as f64 * step;
                if x * x + y * y + z * z > 1.0 + 1e-12 {
                    continue;
                }
                let value = f([x, y, z]);
                if value > best.value {
                    best = GridBest {
                        value,
                        point: [x, y, z],
                    };
                }
            }
        }
    }
    best
}

pub fn ml_oracle(data: &Dataset) -> GridBest {
    let records = QubitRecords::from_dataset(data);
    grid_argmax(GRID_STEP, |v| records.log_likelihood(v))
}

/// Minimum of the least-squares objective (returned as a positive value).
pub fn ls_oracle(data: &Dataset) -> GridBest {
    let records = QubitRecords::from_dataset(data);
    let best = grid_argmax(GRID_STEP, |v| -records.ls_objective(v));
    GridBest {
        value: -best.value,
        point: best.point,
    }
}
