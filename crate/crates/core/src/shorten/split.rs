//! Splitting a circle action into `k + 1` commuting fibrewise actions.

use crate::calculus::{Hamiltonian, QuadraticAffine};
use crate::error::{Error, Result};
use crate::phase::WeightVector;

/// `(k+1) × s` matrix of positive integers whose columns sum to the
/// distinct weights.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SplitMatrix {
    /// Distinct weights, ascending; one column each.
    pub columns: Vec<u32>,
    pub rows: Vec<Vec<u32>>,
}

impl SplitMatrix {
    pub fn new(columns: Vec<u32>, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.is_empty() || rows.iter().any(|r| r.len() != columns.len()) {
            return Err(Error::InvalidParameter("split rows must match the column count".into()));
        }
        if rows.iter().flatten().any(|&a| a == 0) {
            return Err(Error::InvalidParameter("split entries must be ≥ 1".into()));
        }
        for (j, &k) in columns.iter().enumerate() {
            let sum: u32 = rows.iter().map(|r| r[j]).sum();
            if sum != k {
                return Err(Error::InvalidParameter(format!(
                    "column {j} sums to {sum}, expected weight {k}"
                )));
            }
        }
        Ok(SplitMatrix { columns, rows })
    }

    /// Number of extra summands `k` (rows − 1).
    pub fn k(&self) -> usize {
        self.rows.len() - 1
    }

    fn column_of(&self, weight: u32) -> usize {
        self.columns.iter().position(|&c| c == weight).expect("weight has a column")
    }

    /// `H₍ᵢ₎(z) = −Σ_j a_{i,col(k_j)} π|z_j|²`; repeated weights share a column.
    pub fn summands(&self, weights: &WeightVector) -> Result<Vec<Hamiltonian>> {
        let mut distinct = weights.as_slice().to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct != self.columns {
            return Err(Error::InvalidParameter(format!(
                "split columns {:?} do not match weights {weights}",
                self.columns
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let quad = weights
                    .as_slice()
                    .iter()
                    .map(|&k| -(row[self.column_of(k)] as f64))
                    .collect();
                Hamiltonian::Quadratic(QuadraticAffine::diagonal(quad))
            })
            .collect())
    }

    /// Rotation speeds of each summand.
    pub fn speeds(&self, weights: &WeightVector) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                weights
                    .as_slice()
                    .iter()
                    .map(|&k| row[self.column_of(k)] as f64)
                    .collect()
            })
            .collect()
    }
}

/// Canonical split with `k = min k_j − 1`: `k` rows of ones, then
/// `k_j − k`.
pub fn weight_split(weights: &WeightVector) -> SplitMatrix {
    let mut columns = weights.as_slice().to_vec();
    columns.sort_unstable();
    columns.dedup();
    let k = (columns[0] - 1) as usize;
    let mut rows = vec![vec![1; columns.len()]; k];
    rows.push(columns.iter().map(|&c| c - k as u32).collect());
    SplitMatrix::new(columns, rows).expect("canonical split is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use std::f64::consts::PI;

    #[test]
    fn canonical_split_of_three_five() {
        let s = weight_split(&WeightVector::new(vec![3, 5]).unwrap());
        assert_eq!(s.k(), 2);
        assert_eq!(s.rows, vec![vec![1, 1], vec![1, 1], vec![1, 3]]);
    }

    #[test]
    fn semi_free_weight_has_a_single_row() {
        let s = weight_split(&WeightVector::new(vec![1]).unwrap());
        assert_eq!(s.k(), 0);
        assert_eq!(s.rows, vec![vec![1]]);
    }

    #[test]
    fn summands_add_up_to_the_momentum_quadratic() {
        let w = WeightVector::new(vec![3, 5]).unwrap();
        let hs = weight_split(&w).summands(&w).unwrap();
        let mut rng = sampling::rng(9);
        for _ in 0..100 {
            let z = [sampling::disc_point(2.0, &mut rng), sampling::disc_point(2.0, &mut rng)];
            let total: f64 = hs.iter().map(|h| h.value(0.0, &z).unwrap()).sum();
            let expect = -3.0 * PI * z[0].norm_sqr() - 5.0 * PI * z[1].norm_sqr();
            assert!((total - expect).abs() < 1e-12);
            for h in &hs {
                assert!(h.value(0.0, &z).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn repeated_weights_share_a_column() {
        let w = WeightVector::new(vec![2, 4, 2]).unwrap();
        let s = weight_split(&w);
        assert_eq!(s.columns, vec![2, 4]);
        assert_eq!(s.speeds(&w)[1], vec![1.0, 3.0, 1.0]);
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        assert!(SplitMatrix::new(vec![3], vec![vec![1], vec![1]]).is_err());
        assert!(SplitMatrix::new(vec![2], vec![vec![0], vec![2]]).is_err());
    }
}
