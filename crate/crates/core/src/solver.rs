//! Minimal-norm and truncated-eigendecomposition (TEIG) solutions of the
//! Gram system `G c = g`.
//!
//! With `G = U Λ Uᵀ` the TEIG coefficients are
//! `c^(κ) = Σ_{ℓ≤κ} (u_ℓᵀ g / λ_ℓ) u_ℓ`, the residual satisfies
//! `‖G c^(κ) − g‖² = Σ_{j>κ} (u_jᵀ g)²`, and the W-norm of the solution is
//! `‖Λ^{1/2} Uᵀ c‖`. Everything here works from the projected data `Uᵀ g`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramFactorization;
use crate::quadrature::{integrate_split, IntegrationConfig};
use crate::riesz::{ProblemSpec, RieszBasis};
use crate::rkhs::{lift_unchecked, BoundaryValues, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataLabel {
    Exact,
    Noisy,
}

/// Right-hand side in block order `[g_1; …; g_m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataVector {
    values: Vec<f64>,
    label: DataLabel,
    noise_norm: Option<f64>,
}

impl DataVector {
    pub fn exact(values: Vec<f64>) -> Self {
        Self {
            values,
            label: DataLabel::Exact,
            noise_norm: None,
        }
    }

    pub fn noisy(values: Vec<f64>, noise_norm: f64) -> Self {
        Self {
            values,
            label: DataLabel::Noisy,
            noise_norm: Some(noise_norm),
        }
    }

    /// Same label and noise norm, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            label: self.label,
            noise_norm: self.noise_norm,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn label(&self) -> DataLabel {
        self.label
    }

    pub fn noise_norm(&self) -> Option<f64> {
        self.noise_norm
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_kappa(fac: &GramFactorization, kappa: usize) -> Result<()> {
    if kappa < 1 || kappa > fac.cutoff() {
        return Err(Error::invalid(format!(
            "truncation index {kappa} outside [1, {}]",
            fac.cutoff()
        )));
    }
    Ok(())
}

fn teig_from_projection(fac: &GramFactorization, projected: &DVector<f64>, kappa: usize) -> DVector<f64> {
    let u = fac.eigenvectors();
    let lambda = fac.eigenvalues();
    let mut c = DVector::zeros(fac.dim());
    for l in 0..kappa {
        c.axpy(projected[l] / lambda[l], &u.column(l), 1.0);
    }
    c
}

/// Minimal-norm coefficients, summed up to the positivity cutoff `N`.
pub fn coefficients_full(fac: &GramFactorization, g: &DataVector) -> Result<DVector<f64>> {
    coefficients_teig(fac, g, fac.cutoff())
}

/// TEIG coefficients `c^(κ)`, `1 ≤ κ ≤ N`.
pub fn coefficients_teig(fac: &GramFactorization, g: &DataVector, kappa: usize) -> Result<DVector<f64>> {
    check_kappa(fac, kappa)?;
    let projected = fac.project(g.values())?;
    Ok(teig_from_projection(fac, &projected, kappa))
}

/// `U_κ Λ_κ⁻¹ U_κᵀ g` as matrix products, applied right to left so the
/// explicit (and badly cancelling) `n × n` pseudoinverse is never formed.
pub fn coefficients_teig_pinv(fac: &GramFactorization, g: &DataVector, kappa: usize) -> Result<DVector<f64>> {
    check_kappa(fac, kappa)?;
    let n = fac.dim();
    if g.len() != n {
        return Err(Error::invalid("data vector length does not match the Gram matrix"));
    }
    let u = fac.eigenvectors().columns(0, kappa);
    let inv = DVector::from_iterator(kappa, fac.eigenvalues().iter().take(kappa).map(|l| 1.0 / l));
    let projected = u.tr_mul(&DVector::from_column_slice(g.values()));
    Ok(u * DMatrix::from_diagonal(&inv) * projected)
}

/// `‖G c^(κ) − g‖` from the tail of `Uᵀ g`, for `0 ≤ κ ≤ N_m`.
pub fn residual_norm(fac: &GramFactorization, g: &DataVector, kappa: usize) -> Result<f64> {
    if kappa > fac.dim() {
        return Err(Error::invalid(format!(
            "truncation index {kappa} exceeds {}",
            fac.dim()
        )));
    }
    let projected = fac.project(g.values())?;
    Ok(tail_norm(&projected, kappa))
}

fn tail_norm(projected: &DVector<f64>, kappa: usize) -> f64 {
    projected.rows_range(kappa..).norm()
}

/// `‖G c − g‖` formed directly.
pub fn residual_norm_direct(fac: &GramFactorization, g: &DataVector, coeffs: &DVector<f64>) -> f64 {
    (fac.gram() * coeffs - DVector::from_column_slice(g.values())).norm()
}

/// `‖Λ^{1/2} Uᵀ c‖` over the first `N` eigenpairs.
pub fn w_norm(fac: &GramFactorization, coeffs: &DVector<f64>) -> Result<f64> {
    if coeffs.len() != fac.dim() {
        return Err(Error::invalid("coefficient vector length does not match the Gram matrix"));
    }
    let projected = fac.eigenvectors().tr_mul(coeffs);
    Ok((0..fac.cutoff())
        .map(|l| fac.eigenvalues()[l] * projected[l] * projected[l])
        .sum::<f64>()
        .sqrt())
}

/// `sqrt(cᵀ G c)`, clamped at zero.
pub fn w_norm_gram(fac: &GramFactorization, coeffs: &DVector<f64>) -> f64 {
    coeffs.dot(&(fac.gram() * coeffs)).max(0.0).sqrt()
}

/// A TEIG solution at one truncation index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedSolution {
    pub kappa: usize,
    pub coeffs: Vec<f64>,
    pub w_norm: f64,
    pub residual: f64,
    pub boundary: BoundaryValues,
}

impl RegularizedSolution {
    pub fn coefficients(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub fn evaluate(&self, basis: &RieszBasis, grid: &[f64]) -> Result<Vec<f64>> {
        evaluate_solution(basis, &self.coefficients(), grid)
    }
}

/// Sweeps over truncation indices for one data vector, sharing `Uᵀ g`.
#[derive(Debug, Clone)]
pub struct TeigSweep<'a> {
    fac: &'a GramFactorization,
    projected: DVector<f64>,
    boundary: BoundaryValues,
}

impl<'a> TeigSweep<'a> {
    pub fn new(fac: &'a GramFactorization, g: &DataVector, boundary: BoundaryValues) -> Result<Self> {
        Ok(Self {
            fac,
            projected: fac.project(g.values())?,
            boundary,
        })
    }

    pub fn factorization(&self) -> &GramFactorization {
        self.fac
    }

    /// `Uᵀ g`.
    pub fn projected(&self) -> &DVector<f64> {
        &self.projected
    }

    pub fn max_kappa(&self) -> usize {
        self.fac.cutoff()
    }

    pub fn coefficients(&self, kappa: usize) -> Result<DVector<f64>> {
        check_kappa(self.fac, kappa)?;
        Ok(teig_from_projection(self.fac, &self.projected, kappa))
    }

    pub fn residual(&self, kappa: usize) -> Result<f64> {
        if kappa > self.fac.dim() {
            return Err(Error::invalid(format!("truncation index {kappa} too large")));
        }
        Ok(tail_norm(&self.projected, kappa))
    }

    /// `‖f^(κ)‖_W = sqrt(Σ_{ℓ≤κ} (u_ℓᵀ g)² / λ_ℓ)`.
    pub fn w_norm(&self, kappa: usize) -> Result<f64> {
        check_kappa(self.fac, kappa)?;
        Ok((0..kappa)
            .map(|l| self.projected[l] * self.projected[l] / self.fac.eigenvalues()[l])
            .sum::<f64>()
            .sqrt())
    }

    pub fn solution(&self, kappa: usize) -> Result<RegularizedSolution> {
        let c = self.coefficients(kappa)?;
        Ok(RegularizedSolution {
            kappa,
            w_norm: self.w_norm(kappa)?,
            residual: self.residual(kappa)?,
            coeffs: c.as_slice().to_vec(),
            boundary: self.boundary,
        })
    }
}

/// Representer values and boundary lift tabulated on a fixed grid, so that a
/// solution evaluates as one matrix-vector product.
#[derive(Debug, Clone)]
pub struct GridEvaluator {
    grid: Vec<f64>,
    values: DMatrix<f64>,
    lift: DVector<f64>,
}

impl GridEvaluator {
    pub fn new(basis: &RieszBasis, grid: &[f64]) -> Result<Self> {
        let ps = basis.problem();
        let iv = ps.interval();
        for &t in grid {
            iv.check(t, "grid point")?;
        }
        let values = basis.value_matrix(grid)?;
        let lift = DVector::from_iterator(
            grid.len(),
            grid.iter().map(|&t| lift_unchecked(t, iv, ps.boundary())),
        );
        Ok(Self {
            grid: grid.to_vec(),
            values,
            lift,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `Σ_j c_j η_j(t) + γ(t)` at every grid point.
    pub fn eval(&self, coeffs: &DVector<f64>) -> Result<Vec<f64>> {
        if coeffs.len() != self.values.ncols() {
            return Err(Error::invalid("coefficient vector length does not match the basis"));
        }
        Ok((&self.values * coeffs + &self.lift).as_slice().to_vec())
    }
}

/// `f(t) = Σ_j c_j η_j(t) + γ(t)` on `grid`.
pub fn evaluate_solution(basis: &RieszBasis, coeffs: &DVector<f64>, grid: &[f64]) -> Result<Vec<f64>> {
    GridEvaluator::new(basis, grid)?.eval(coeffs)
}

/// Coefficients of `η̂_ℓ = Σ_j (u_{jℓ}/√λ_ℓ) η_j`; `ℓ` is zero-based and below `N`.
pub fn orthonormal_coefficients(fac: &GramFactorization, l: usize) -> Result<DVector<f64>> {
    if l >= fac.cutoff() {
        return Err(Error::invalid(format!(
            "orthonormal function {l} requested, only {} have positive eigenvalues",
            fac.cutoff()
        )));
    }
    let lambda = fac.eigenvalues()[l];
    Ok(fac.eigenvectors().column(l) / lambda.sqrt())
}

/// `η̂_ℓ(y)`; `ℓ` is zero-based.
pub fn orthonormal_function(fac: &GramFactorization, basis: &RieszBasis, l: usize, y: f64) -> Result<f64> {
    let c = orthonormal_coefficients(fac, l)?;
    let mut v = 0.0;
    for (j, cj) in c.iter().enumerate() {
        v += cj * basis.eval_value(j, y)?;
    }
    Ok(v)
}

/// Applies every collocation functional to `f` by quadrature:
/// `(K_ℓ f)(x_{ℓ,i}) = ∫ k_ℓ(x_{ℓ,i}, t) f(t) dt`.
pub fn apply_forward(ps: &ProblemSpec, f: &dyn Fn(f64) -> f64, cfg: &IntegrationConfig) -> Result<DataVector> {
    apply_forward_split(ps, f, &[], cfg)
}

/// [`apply_forward`] with quadrature split where `f` is not smooth.
pub fn apply_forward_split(
    ps: &ProblemSpec,
    f: &dyn Fn(f64) -> f64,
    breakpoints: &[f64],
    cfg: &IntegrationConfig,
) -> Result<DataVector> {
    let iv = ps.interval();
    let mut values = Vec::with_capacity(ps.total_functionals());
    for eq in ps.equations() {
        let k = eq.kernel();
        for &x in eq.nodes() {
            let integrand = |t: f64| k(x, t) * f(t);
            values.push(integrate_split(&integrand, iv.a(), iv.b(), breakpoints, cfg)?);
        }
    }
    Ok(DataVector::exact(values))
}

/// Max-norm and discrete L2 norm of the difference between two grid functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub max: f64,
    pub l2: f64,
}

/// Errors on a uniform grid over `iv`; the L2 norm uses trapezoid weights.
pub fn error_norms(approx: &[f64], exact: &[f64], iv: &Interval) -> ErrorNorms {
    let m = approx.len();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let h = if m > 1 { iv.length() / (m - 1) as f64 } else { iv.length() };
    for (k, (a, e)) in approx.iter().zip(exact).enumerate() {
        let d = (a - e).abs();
        max = max.max(d);
        let w = if k == 0 || k + 1 == m { 0.5 * h } else { h };
        sum += w * d * d;
    }
    ErrorNorms { max, l2: sum.sqrt() }
}
