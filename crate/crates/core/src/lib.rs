//! Regularized minimal-norm solutions of overdetermined systems of
//! first-kind Fredholm integral equations with prescribed boundary values.
//!
//! The unknown lives in the space `W` of functions on `[a, b]` vanishing at
//! both ends, with inner product `∫ f'' g''`. Every collocation functional
//! has a Riesz representer `η_j` in `W`; the minimal-norm solution is a
//! combination of the representers whose coefficients solve the Gram system
//! `G c = g`. Because `G` is severely ill-conditioned, solutions are
//! regularized by truncating its eigendecomposition, with the truncation
//! index chosen by the discrepancy principle, the L-curve, or an oracle.
//!
//! ```no_run
//! use std::sync::Arc;
//! use riesz_teig::{build_basis, assemble_gram, spectral_factorize, problems, CutoffPolicy,
//!     IntegrationConfig, TeigSweep};
//!
//! let cfg = IntegrationConfig::default();
//! let ps = Arc::new(problems::test_problem_1(10)?);
//! let basis = build_basis(ps.clone(), &cfg)?;
//! let fac = spectral_factorize(assemble_gram(&basis)?, CutoffPolicy::default())?;
//! let data = ps.shifted_exact_data(&cfg)?;
//! let sweep = TeigSweep::new(&fac, &data, *ps.boundary())?;
//! let solution = sweep.solution(fac.cutoff())?;
//! let values = solution.evaluate(&basis, &ps.interval().uniform_grid(1000))?;
//! # Ok::<(), riesz_teig::Error>(())
//! ```

pub mod error;
pub mod gram;
pub mod problems;
pub mod quadrature;
pub mod regparam;
pub mod riesz;
pub mod rkhs;
pub mod solver;

pub use error::{Error, Result};
pub use gram::{assemble_gram, positivity_cutoff, spectral_factorize, ConditionEstimate, CutoffPolicy, GramFactorization};
pub use quadrature::{
    gauss_legendre_rule, integrate, integrate_with_breakpoints, IntegrationConfig, QuadratureRule,
};
pub use regparam::{
    add_noise, discrepancy_kappa, kappa_best, lcurve_corner, lcurve_points, Corner, CornerMethod,
    Discrepancy, ErrorMetric, KappaBest, Lcurve, LcurvePoint, NoiseModel, NoiseTarget, ParamSelectionReport, Reference,
    noisy_system_data,
};
pub use riesz::{build_basis, ProblemSpec, RieszBasis, TruthName, TruthProfile};
pub use rkhs::{
    boundary_lift, reproduce_value, reproducing_kernel, reproducing_kernel_second, reproducing_kernel_value,
    shift_rhs, BoundaryValues, Interval,
};
pub use solver::{
    apply_forward, apply_forward_split, coefficients_full, coefficients_teig, coefficients_teig_pinv,
    error_norms, evaluate_solution, orthonormal_coefficients, orthonormal_function, residual_norm,
    residual_norm_direct, w_norm, w_norm_gram, DataLabel, DataVector, ErrorNorms, GridEvaluator,
    RegularizedSolution, TeigSweep,
};
