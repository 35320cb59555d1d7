//! Deformation parameters, the total block length and its Hessian at the
//! undeformed action.
//!
//! Convention: `j(1 − j/k)` is the coefficient of `|λ_j|²` in the quadratic
//! form, so the second partials in the real and imaginary directions are
//! `2·j(1 − j/k)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::WeightVector;

use super::block::{block_coefficients, block_length};

/// One block `(λ)_j ∈ ℂ^{k_j − 1}` per coordinate.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DeformationParams {
    pub weights: Vec<u32>,
    pub blocks: Vec<Vec<Complex64>>,
}

impl DeformationParams {
    pub fn new(weights: &WeightVector, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        if blocks.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: blocks.len(),
            });
        }
        for (b, &k) in blocks.iter().zip(weights.as_slice()) {
            if b.len() != k as usize - 1 {
                return Err(Error::DimensionMismatch {
                    expected: k as usize - 1,
                    got: b.len(),
                });
            }
        }
        Ok(DeformationParams {
            weights: weights.as_slice().to_vec(),
            blocks,
        })
    }

    pub fn zeros(weights: &WeightVector) -> Self {
        let blocks = weights
            .as_slice()
            .iter()
            .map(|&k| vec![Complex64::new(0.0, 0.0); k as usize - 1])
            .collect();
        DeformationParams {
            weights: weights.as_slice().to_vec(),
            blocks,
        }
    }

    /// Real dimension `Σ 2(k_j − 1)`.
    pub fn real_dim(&self) -> usize {
        2 * self.blocks.iter().map(|b| b.len()).sum::<usize>()
    }

    /// `(Re λ, Im λ)` pairs, block by block.
    pub fn to_reals(&self) -> Vec<f64> {
        self.blocks.iter().flatten().flat_map(|l| [l.re, l.im]).collect()
    }

    pub fn from_reals(weights: &WeightVector, reals: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(weights);
        if reals.len() != p.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: p.real_dim(),
                got: reals.len(),
            });
        }
        let mut it = reals.chunks(2);
        for b in &mut p.blocks {
            for l in b.iter_mut() {
                let c = it.next().expect("length checked");
                *l = Complex64::new(c[0], c[1]);
            }
        }
        Ok(p)
    }

    pub fn scaled(&self, s: f64) -> Self {
        DeformationParams {
            weights: self.weights.clone(),
            blocks: self.blocks.iter().map(|b| b.iter().map(|l| l * s).collect()).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_reals().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `"λ[coord].j re|im"` labels matching [`Self::to_reals`].
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (c, b) in self.blocks.iter().enumerate() {
            for j in 1..=b.len() {
                out.push(format!("λ[{c}]_{j} re"));
                out.push(format!("λ[{c}]_{j} im"));
            }
        }
        out
    }
}

/// `Σ_blocks ∫₀¹ min_z −(1/π) H̄ dt`.
pub fn total_length(params: &DeformationParams, t_nodes: usize) -> Result<f64> {
    let mut s = 0.0;
    for (b, &k) in params.blocks.iter().zip(&params.weights) {
        if k >= 2 {
            s += block_length(k, b, t_nodes)?;
        }
    }
    Ok(s)
}

/// Predicted second partial `2·j(1 − j/k)` per real parameter.
pub fn analytic_second_partials(weights: &WeightVector) -> Vec<f64> {
    weights
        .as_slice()
        .iter()
        .flat_map(|&k| block_coefficients(k).into_iter().flat_map(|c| [2.0 * c, 2.0 * c]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HessianReport {
    pub labels: Vec<String>,
    pub step: f64,
    /// Richardson-extrapolated central-difference Hessian (row-major).
    pub numeric: Vec<Vec<f64>>,
    /// `H_ii / 2`, the measured quadratic-form coefficients.
    pub numeric_coefficients: Vec<f64>,
    /// `j(1 − j/k)`.
    pub analytic_coefficients: Vec<f64>,
    pub max_relative_deviation: f64,
    pub max_off_diagonal: f64,
    /// `‖A − Aᵀ‖∞`.
    pub asymmetry: f64,
    pub min_eigenvalue: Option<f64>,
}

/// Central-difference Hessian of `f` at 0 with a Richardson pass at `h/2`.
pub fn fd_hessian<F>(f: F, dim: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if !(h.is_finite() && h > 1e-8) {
        return Err(Error::StepUnderflow(h));
    }
    let at = |h: f64| -> Result<DMatrix<f64>> {
        let f0 = f(&vec![0.0; dim])?;
        let entries: Vec<(usize, usize, f64)> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(i, j)| {
                let eval = |si: f64, sj: f64| {
                    let mut x = vec![0.0; dim];
                    x[i] += si * h;
                    x[j] += sj * h;
                    f(&x)
                };
                let v = if i == j {
                    (eval(0.5, 0.5)? - 2.0 * f0 + eval(-0.5, -0.5)?) / (h * h)
                } else {
                    (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?) / (4.0 * h * h)
                };
                Ok((i, j, v))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = DMatrix::zeros(dim, dim);
        for (i, j, v) in entries {
            m[(i, j)] = v;
        }
        Ok(m)
    };
    let coarse = at(h)?;
    let fine = at(0.5 * h)?;
    let m = (&fine * 4.0 - coarse) / 3.0;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepUnderflow(h));
    }
    Ok(m)
}

/// Numeric Hessian of [`total_length`] at the origin against `2·j(1 − j/k)`.
pub fn hessian_at_origin(weights: &WeightVector, h: f64, t_nodes: usize) -> Result<HessianReport> {
    let zero = DeformationParams::zeros(weights);
    let dim = zero.real_dim();
    let m = fd_hessian(
        |x| total_length(&DeformationParams::from_reals(weights, x)?, t_nodes),
        dim,
        h,
    )?;
    let analytic: Vec<f64> = analytic_second_partials(weights).iter().map(|v| v / 2.0).collect();
    let numeric_coefficients: Vec<f64> = (0..dim).map(|i| m[(i, i)] / 2.0).collect();
    let max_relative_deviation = numeric_coefficients
        .iter()
        .zip(&analytic)
        .map(|(n, a)| ((n - a) / a).abs())
        .fold(0.0, f64::max);
    let mut max_off_diagonal = 0.0f64;
    let mut asymmetry = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                max_off_diagonal = max_off_diagonal.max(m[(i, j)].abs());
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
    }
    let min_eigenvalue = (dim > 0).then(|| {
        let sym = (&m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    });
    Ok(HessianReport {
        labels: zero.labels(),
        step: h,
        numeric: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        numeric_coefficients,
        analytic_coefficients: analytic,
        max_relative_deviation,
        max_off_diagonal,
        asymmetry,
        min_eigenvalue,
    })
}

/// `(s, total_length(s·e_i))` along real parameter `i`.
pub fn length_sweep(weights: &WeightVector, param: usize, grid: &[f64], t_nodes: usize) -> Result<Vec<(f64, f64)>> {
    let dim = DeformationParams::zeros(weights).real_dim();
    if param >= dim {
        return Err(Error::InvalidParameter(format!("parameter {param} out of range (dimension {dim})")));
    }
    grid.iter()
        .map(|&s| {
            let mut x = vec![0.0; dim];
            x[param] = s;
            Ok((s, total_length(&DeformationParams::from_reals(weights, &x)?, t_nodes)?))
        })
        .collect()
}
