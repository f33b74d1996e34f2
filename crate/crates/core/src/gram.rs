//! Gram matrix of the representers and its spectral factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riesz::{weighted_gram, RieszBasis};

/// `G[p][q] = <η_p, η_q>_W = ∫ η_p'' η_q''` on the basis grid, symmetrized.
pub fn assemble_gram(basis: &RieszBasis) -> Result<DMatrix<f64>> {
    let g = weighted_gram(basis.second_samples(), basis.grid_weights());
    if let Some((idx, v)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        let n = g.nrows();
        return Err(Error::GramEntry {
            row: idx % n,
            col: idx / n,
            source: Box::new(Error::NumericDomain {
                abscissa: f64::NAN,
                value: *v,
            }),
        });
    }
    Ok(g)
}

/// How the positivity cutoff `N` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CutoffPolicy {
    /// Keep `λ_ℓ > relative · λ_1`; zero keeps every positive eigenvalue.
    pub relative: f64,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self { relative: 0.0 }
    }
}

/// Largest `N` with `λ_N` above the policy threshold (one-based count).
pub fn positivity_cutoff(eigenvalues: &[f64], policy: CutoffPolicy) -> Result<usize> {
    let first = *eigenvalues
        .first()
        .ok_or_else(|| Error::invalid("no eigenvalues"))?;
    if !(first > 0.0) {
        return Err(Error::DegenerateProblem(format!(
            "largest Gram eigenvalue is {first}, not positive"
        )));
    }
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("eigenvalues must be sorted in decreasing order"));
    }
    let threshold = (policy.relative * first).max(0.0);
    Ok(eigenvalues.iter().take_while(|&&l| l > threshold).count())
}

/// `λ_1 / |λ_{N_m}|`, flagged when the smallest eigenvalue is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub value: f64,
    pub indefinite: bool,
}

/// `G = U Λ Uᵀ` with eigenvalues in decreasing order.
#[derive(Debug, Clone)]
pub struct GramFactorization {
    gram: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    cutoff: usize,
    condition: ConditionEstimate,
}

/// Symmetric eigendecomposition with a deterministic sign convention: the
/// largest-magnitude component of every eigenvector is positive.
pub fn spectral_factorize(gram: DMatrix<f64>, policy: CutoffPolicy) -> Result<GramFactorization> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n {
        return Err(Error::invalid(format!(
            "Gram matrix must be square and non-empty, got {}x{}",
            gram.nrows(),
            gram.ncols()
        )));
    }
    if gram.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Gram matrix has non-finite entries"));
    }
    for p in 0..n {
        for q in 0..p {
            if gram[(p, q)] != gram[(q, p)] {
                return Err(Error::invalid(format!(
                    "Gram matrix is not symmetric at ({p}, {q})"
                )));
            }
        }
    }
    let eig = SymmetricEigen::try_new(gram.clone(), f64::EPSILON, 1000 * n)
        .ok_or(Error::EigenNonConvergence(n))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let pivot = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) })
            .0;
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(col, &v);
    }

    let cutoff = positivity_cutoff(eigenvalues.as_slice(), policy)?;
    let smallest = eigenvalues[n - 1];
    let condition = ConditionEstimate {
        value: eigenvalues[0] / smallest.abs(),
        indefinite: smallest <= 0.0,
    };
    Ok(GramFactorization {
        gram,
        eigenvalues,
        eigenvectors,
        cutoff,
        condition,
    })
}

impl GramFactorization {
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `λ_1 ≥ … ≥ λ_{N_m}`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Column `ℓ` is `u_ℓ`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Positivity cutoff `N`: number of leading eigenpairs used by the solver.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn condition(&self) -> ConditionEstimate {
        self.condition
    }

    /// `Uᵀ g`.
    pub fn project(&self, g: &[f64]) -> Result<DVector<f64>> {
        if g.len() != self.dim() {
            return Err(Error::invalid(format!(
                "data vector has length {}, Gram matrix is {}x{}",
                g.len(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.eigenvectors.tr_mul(&DVector::from_column_slice(g)))
    }

    /// `‖G − U Λ Uᵀ‖_F / ‖G‖_F`.
    pub fn reconstruction_error(&self) -> f64 {
        let lambda = DMatrix::from_diagonal(&self.eigenvalues);
        let rebuilt = &self.eigenvectors * lambda * self.eigenvectors.transpose();
        (&rebuilt - &self.gram).norm() / self.gram.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factorizes_trivially() {
        let fac = spectral_factorize(DMatrix::identity(4, 4), CutoffPolicy::default()).unwrap();
        assert_eq!(fac.cutoff(), 4);
        assert!(fac.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert!(!fac.condition().indefinite);
    }

    #[test]
    fn diagonal_with_negative_tail() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0, 3.0]));
        let fac = spectral_factorize(g, CutoffPolicy::default()).unwrap();
        assert_eq!(fac.eigenvalues().as_slice(), &[3.0, 2.0, -1.0]);
        assert_eq!(fac.cutoff(), 2);
        assert!(fac.condition().indefinite);
        assert_eq!(fac.condition().value, 3.0);
        // Sign convention: dominant component positive.
        for col in fac.eigenvectors().column_iter() {
            let dominant = col.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(dominant > 0.0);
        }
    }

    #[test]
    fn cutoff_policies() {
        assert_eq!(positivity_cutoff(&[3.0, 2.0, 1.0], CutoffPolicy::default()).unwrap(), 3);
        assert_eq!(
            positivity_cutoff(&[1.0, 1e-20, -1e-18], CutoffPolicy::default()).unwrap(),
            2
        );
        assert_eq!(
            positivity_cutoff(&[1.0, 1e-20, -1e-18], CutoffPolicy { relative: 1e-16 }).unwrap(),
            1
        );
        assert!(matches!(
            positivity_cutoff(&[0.0, -1.0], CutoffPolicy::default()),
            Err(Error::DegenerateProblem(_))
        ));
        assert!(positivity_cutoff(&[1.0, 2.0], CutoffPolicy::default()).is_err());
        assert!(positivity_cutoff(&[], CutoffPolicy::default()).is_err());
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut g = DMatrix::identity(2, 2);
        g[(0, 1)] = 0.5;
        assert!(spectral_factorize(g, CutoffPolicy::default()).is_err());
    }

    #[test]
    fn reconstruction_of_random_symmetric_matrix() {
        let n = 7;
        let mut g = DMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..=p {
                let v = ((p * 31 + q * 17) as f64).sin();
                g[(p, q)] = v;
                g[(q, p)] = v;
            }
        }
        let fac = spectral_factorize(g, CutoffPolicy::default()).unwrap();
        assert!(fac.reconstruction_error() < 1e-14);
        let utu = fac.eigenvectors().transpose() * fac.eigenvectors();
        assert!((utu - DMatrix::<f64>::identity(n, n)).amax() < 1e-14);
        let l = fac.eigenvalues();
        assert!(l.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }
}
