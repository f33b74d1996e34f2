use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::riesz::{AnalyticRepresenter, Equation, ProblemSpec, TruthProfile};
use crate::rkhs::{BoundaryValues, Interval};

/// `c + (d − c)(i − 1)/(n − 1)`, `i = 1…n`.
pub fn uniform_nodes(c: f64, d: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 nodes per equation, got {n}")));
    }
    let mut nodes: Vec<f64> = (0..n).map(|i| c + (d - c) * i as f64 / (n - 1) as f64).collect();
    nodes[n - 1] = d;
    Ok(nodes)
}

/// On `[0, 1]` with solution `t² + 1`:
/// `∫ x/(t+1) f = x(log 4 − 1/2)` and `∫ cos(xt) f = 2(x cos x + (x² − 1) sin x)/x³`,
/// nodes `0.1 + 0.9(i−1)/(n−1)`, boundary values `f(0) = 1`, `f(1) = 2`.
pub fn test_problem_1(n: usize) -> Result<ProblemSpec> {
    test_problem_1_with_nodes(uniform_nodes(0.1, 1.0, n)?)
}

/// [`test_problem_1`] collocated at arbitrary nodes in `(0, 1]`.
pub fn test_problem_1_with_nodes(nodes: Vec<f64>) -> Result<ProblemSpec> {
    let ln4 = 4f64.ln();
    let eq1 = Equation::new(Arc::new(|x, t| x / (t + 1.0)), nodes.clone())
        .with_range(f64::MIN_POSITIVE, 1.0)
        .with_exact_rhs_fn(|x| x * (ln4 - 0.5))
        .with_analytic_representer(AnalyticRepresenter {
            second: Arc::new(|x, z| x * ((1.0 - z) * z.ln_1p() - z * (4.0 / ((1.0 + z) * (1.0 + z))).ln())),
            value: Some(Arc::new(|x, y| {
                x / 36.0
                    * (6.0 * (1.0 + y).powi(3) * y.ln_1p()
                        - y * (y * y * (5.0 + 12.0 * LN_2) + 15.0 * y + 4.0 * (9.0 * LN_2 - 5.0)))
            })),
        })
        // ∫ x/(t+1) (t+1) dt
        .with_analytic_shift(Arc::new(|x| x));
    let eq2 = Equation::new(Arc::new(|x, t| (x * t).cos()), nodes)
        .with_range(f64::MIN_POSITIVE, 1.0)
        .with_exact_rhs_fn(|x| 2.0 / x.powi(3) * (x * x.cos() + (x * x - 1.0) * x.sin()))
        .with_analytic_representer(AnalyticRepresenter {
            second: Arc::new(|x, z| (z * x.cos() - (x * z).cos() - z + 1.0) / (x * x)),
            value: Some(Arc::new(|x, y| {
                y * (y - 1.0) / (6.0 * x * x) * ((y + 1.0) * x.cos() - y + 2.0)
                    + (y * (1.0 - x.cos()) - 1.0 + (x * y).cos()) / x.powi(4)
            })),
        })
        // ∫ cos(xt) (t+1) dt
        .with_analytic_shift(Arc::new(|x| (x.cos() - 1.0) / (x * x) + 2.0 * x.sin() / x));
    Ok(ProblemSpec::new(
        "tp1",
        Interval::new(0.0, 1.0)?,
        BoundaryValues::new(1.0, 2.0)?,
        vec![eq1, eq2],
    )?
    .with_truth(TruthProfile::custom("t^2+1", |t| t * t + 1.0)))
}

/// On `[0, π]` with solution `sin t`:
/// `∫ e^{x cos t} f = 2 sinh(x)/x` and `∫ (xt + e^{xt}) f = πx + (1 + e^{πx})/(1 + x²)`,
/// nodes `0.1 + (π/2 − 0.1)(i−1)/(n−1)`, zero boundary values. The first
/// equation has no closed-form representers.
pub fn test_problem_2(n: usize) -> Result<ProblemSpec> {
    let nodes = uniform_nodes(0.1, PI / 2.0, n)?;
    let eq1 = Equation::new(Arc::new(|x, t| (x * t.cos()).exp()), nodes.clone())
        .with_range(f64::MIN_POSITIVE, PI / 2.0)
        .with_exact_rhs_fn(|x| 2.0 * x.sinh() / x);
    let eq2 = Equation::new(Arc::new(|x, t| x * t + (x * t).exp()), nodes)
        .with_range(f64::MIN_POSITIVE, PI / 2.0)
        .with_exact_rhs_fn(|x| PI * x + (1.0 + (PI * x).exp()) / (1.0 + x * x))
        .with_analytic_representer(AnalyticRepresenter {
            second: Arc::new(|x, z| {
                z * (1.0 - (PI * x).exp()) / (PI * x * x)
                    + x * z * (z * z - PI * PI) / 6.0
                    + ((x * z).exp() - 1.0) / (x * x)
            }),
            value: Some(Arc::new(|x, y| {
                let epx = (PI * x).exp();
                PI * PI * x * y / 36.0 * (0.7 * PI * PI - y * y)
                    + y / (6.0 * PI * x.powi(4)) * (1.0 - epx) * (x * x * y * y + 6.0)
                    + PI * y / (6.0 * x * x) * (epx + 2.0)
                    + y * y / 2.0 * (x * y.powi(3) / 60.0 - 1.0 / (x * x))
                    + ((x * y).exp() - 1.0) / x.powi(4)
            })),
        });
    Ok(ProblemSpec::new(
        "tp2",
        Interval::new(0.0, PI)?,
        BoundaryValues::zero(),
        vec![eq1, eq2],
    )?
    .with_truth(TruthProfile::custom("sin t", f64::sin)))
}
