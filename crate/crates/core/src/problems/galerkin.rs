use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::cached_rule;

/// Gauss–Legendre order used on each box and box product.
const BOX_ORDER: usize = 20;

type Kernel = fn(f64, f64) -> f64;
type Rhs = fn(f64) -> f64;

/// Galerkin discretization of the second test problem with orthonormal box
/// functions: `n` boxes on `s ∈ [0, π/2]` for the data, `n` boxes on
/// `t ∈ [0, π]` for the solution, both equations stacked into a `2n × n`
/// least-squares system.
#[derive(Debug, Clone)]
pub struct GalerkinBaseline {
    n: usize,
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalerkinSolution {
    /// Coefficient of each orthonormal box function.
    pub coeffs: Vec<f64>,
    /// `R` from the QR factorization has a negligible diagonal entry.
    pub rank_deficient: bool,
}

fn box_integral_1d(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    cached_rule(BOX_ORDER)?.composite(&f, lo, hi, 1)
}

fn box_integral_2d(k: Kernel, s: (f64, f64), t: (f64, f64)) -> Result<f64> {
    let inner = |sv: f64| box_integral_1d(&|tv| k(sv, tv), t.0, t.1).unwrap_or(f64::NAN);
    box_integral_1d(&inner, s.0, s.1)
}

pub fn galerkin_baseline(n: usize) -> Result<GalerkinBaseline> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 boxes, got {n}")));
    }
    let kernels: [(Kernel, Rhs); 2] = [
        (|s, t| (s * t.cos()).exp(), |s| 2.0 * s.sinh() / s),
        (|s, t| s * t + (s * t).exp(), |s| PI * s + (1.0 + (PI * s).exp()) / (1.0 + s * s)),
    ];
    let hs = PI / 2.0 / n as f64;
    let ht = PI / n as f64;
    let sbox = |i: usize| (i as f64 * hs, (i + 1) as f64 * hs);
    let tbox = |j: usize| (j as f64 * ht, (j + 1) as f64 * ht);
    let mut matrix = DMatrix::zeros(2 * n, n);
    let mut rhs = DVector::zeros(2 * n);
    for (l, (k, g)) in kernels.iter().enumerate() {
        for i in 0..n {
            let s = sbox(i);
            rhs[l * n + i] = box_integral_1d(g, s.0, s.1)? / hs.sqrt();
            for j in 0..n {
                matrix[(l * n + i, j)] = box_integral_2d(*k, s, tbox(j))? / (hs * ht).sqrt();
            }
        }
    }
    Ok(GalerkinBaseline { n, matrix, rhs })
}

impl GalerkinBaseline {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Unregularized least squares by Householder QR; when `R` is exactly
    /// singular the minimum-norm solution from the SVD is returned instead.
    pub fn solve(&self) -> Result<GalerkinSolution> {
        let n = self.n;
        let qr = self.matrix.clone().qr();
        let r = qr.r();
        let scale = r.diagonal().amax();
        let rank_deficient = r.diagonal().iter().any(|d| d.abs() <= n as f64 * f64::EPSILON * scale);
        let mut qtb = self.rhs.clone();
        qr.q_tr_mul(&mut qtb);
        let head = qtb.rows(0, n).into_owned();
        let coeffs = match r.solve_upper_triangular(&head) {
            Some(x) if x.iter().all(|v| v.is_finite()) => x,
            _ => self
                .matrix
                .clone()
                .svd(true, true)
                .solve(&self.rhs, f64::EPSILON * scale)
                .map_err(|e| Error::DegenerateProblem(e.to_string()))?,
        };
        Ok(GalerkinSolution {
            coeffs: coeffs.as_slice().to_vec(),
            rank_deficient,
        })
    }
}

impl GalerkinSolution {
    /// Piecewise-constant reconstruction on `[0, π]`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let n = self.coeffs.len();
        let ht = PI / n as f64;
        let j = ((t / ht).floor() as usize).min(n - 1);
        self.coeffs[j] / ht.sqrt()
    }

    pub fn max_error(&self, truth: impl Fn(f64) -> f64, grid: &[f64]) -> f64 {
        grid.iter().map(|&t| (self.evaluate(t) - truth(t)).abs()).fold(0.0, f64::max)
    }
}
