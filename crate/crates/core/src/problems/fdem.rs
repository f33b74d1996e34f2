use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_split, IntegrationConfig};
use crate::riesz::{AnalyticRepresenter, Equation, ProblemSpec, TruthProfile};
use crate::rkhs::{BoundaryValues, Interval};

use super::artificial::uniform_nodes;

/// `θ(z, h) = √(4(z+h)² + 1)`.
pub fn theta(z: f64, h: f64) -> f64 {
    (4.0 * (z + h) * (z + h) + 1.0).sqrt()
}

/// Vertical-coil sensitivity `k^V(s) = 4s / (4s² + 1)^{3/2}`.
pub fn kernel_vertical(s: f64) -> f64 {
    4.0 * s / (4.0 * s * s + 1.0).powf(1.5)
}

/// Horizontal-coil sensitivity `k^H(s) = 2 − 4s / √(4s² + 1)`.
pub fn kernel_horizontal(s: f64) -> f64 {
    2.0 - 4.0 * s / (4.0 * s * s + 1.0).sqrt()
}

/// Ground conductivity meter readings truncated at depth `z0`, with the
/// conductivity below `z0` assumed equal to `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdemConfig {
    pub z0: f64,
    pub n: usize,
    /// Instrument heights; defaults to `0.1 + 0.9(i−1)/(n−1)`.
    pub heights: Option<Vec<f64>>,
    /// `σ(0)`; defaults to the truth's value.
    pub alpha: Option<f64>,
    /// `σ(z0)` and the value below `z0`; defaults to the truth's value.
    pub beta: Option<f64>,
}

impl FdemConfig {
    pub fn new(n: usize) -> Self {
        Self {
            z0: 4.0,
            n,
            heights: None,
            alpha: None,
            beta: None,
        }
    }

    pub fn with_depth(mut self, z0: f64) -> Self {
        self.z0 = z0;
        self
    }

    pub fn resolved_heights(&self) -> Result<Vec<f64>> {
        let h = match &self.heights {
            Some(h) => h.clone(),
            None => uniform_nodes(0.1, 1.0, self.n)?,
        };
        if h.len() < 2 {
            return Err(Error::invalid("need at least 2 instrument heights"));
        }
        if let Some(bad) = h.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::invalid(format!("instrument heights must be positive, got {bad}")));
        }
        Ok(h)
    }
}

fn vertical_second(z0: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync + Clone {
    move |h, x| {
        0.5 * ((1.0 - x / z0) * (2.0 * h).asinh() - (2.0 * (x + h)).asinh()
            + x / z0 * (2.0 * (z0 + h)).asinh())
    }
}

fn horizontal_second(z0: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync {
    let first = vertical_second(z0);
    move |h, x| {
        0.5 * (2.0 * x * (x - z0) + x * (1.0 + h / z0) * theta(z0, h) - (x + h) * theta(x, h)
            + h * (1.0 - x / z0) * theta(0.0, h)
            + first(h, x))
    }
}

fn vertical_value(z0: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync {
    move |h, y| {
        let q = 0.125 - h * h - y * y / 3.0;
        3.0 / 16.0
            * ((y + h) * theta(y, h) - y * (1.0 + h / z0) * theta(z0, h) + h * (y / z0 - 1.0) * theta(0.0, h))
            + 0.5
                * ((0.5 * (y / z0 - 1.0) * q + y / 3.0 * (y - z0)) * (2.0 * h).asinh()
                    + (-y / (2.0 * z0) * q + y * (h + z0 / 3.0)) * (2.0 * (z0 + h)).asinh()
                    + 0.5 * (0.125 - (y + h) * (y + h)) * (2.0 * (y + h)).asinh())
    }
}

fn horizontal_value(z0: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync {
    move |h, y| {
        let (h2, y2, z2) = (h * h, y * y, z0 * z0);
        let algebraic = z0 * (h * (13.0 - 8.0 * (3.0 * h * y + h2 + 3.0 * y2)) + y * (13.0 - 8.0 * y2)) * theta(y, h)
            + y * (h * (8.0 * (3.0 * h * z0 + h2 + 2.0 * y2 + z2) - 13.0) + z0 * (8.0 * (2.0 * y2 - z2) - 13.0))
                * theta(z0, h)
            + h * (z0 * (8.0 * (h2 + 6.0 * y2 - 4.0 * y * z0) - 13.0) + y * (13.0 - 8.0 * (h2 + 2.0 * y2)))
                * theta(0.0, h)
            + 16.0 * y * z0 * (y * y2 - 2.0 * y2 * z0 + z0 * z2);
        let logarithmic = (y - z0) * (1.0 - 16.0 * (h2 + y2 / 3.0 - 2.0 * y * z0 / 3.0)) * (2.0 * h).asinh()
            + z0 * (1.0 - 16.0 * (y + h) * (y + h)) * (2.0 * (y + h)).asinh()
            - y * (1.0 - 16.0 * (h2 + y2 / 3.0 + 2.0 * h * z0 + 2.0 * z2 / 3.0)) * (2.0 * (z0 + h)).asinh();
        algebraic / (192.0 * z0) + logarithmic / (128.0 * z0)
    }
}

/// `β ∫_{z0}^∞ k^V(h+z) dz = β/θ(z0,h)`.
pub fn vertical_tail(z0: f64, beta: f64, h: f64) -> f64 {
    beta / theta(z0, h)
}

/// `β ∫_{z0}^∞ k^H(h+z) dz = β(θ(z0,h) − 2(h+z0))`.
pub fn horizontal_tail(z0: f64, beta: f64, h: f64) -> f64 {
    beta * (theta(z0, h) - 2.0 * (h + z0))
}

/// The two-orientation system on `[0, z0]` with exact readings of `truth`:
/// `g_ℓ(h) = ∫_0^{z0} k_ℓ(h,z) σ(z) dz + β ∫_{z0}^∞ k_ℓ(h,z) dz`.
pub fn fdem_problem(cfg: &FdemConfig, truth: TruthProfile) -> Result<ProblemSpec> {
    let z0 = cfg.z0;
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::invalid(format!("truncation depth must be positive, got {z0}")));
    }
    let heights = cfg.resolved_heights()?;
    let alpha = cfg.alpha.unwrap_or_else(|| truth.eval(0.0));
    let beta = cfg.beta.unwrap_or_else(|| truth.eval(z0));
    let iv = Interval::new(0.0, z0)?;
    let quad = IntegrationConfig::default();

    let readings = |k: fn(f64) -> f64, tail: &dyn Fn(f64) -> f64| -> Result<Vec<f64>> {
        heights
            .iter()
            .map(|&h| {
                let f = |z: f64| k(h + z) * truth.eval(z);
                Ok(integrate_split(&f, 0.0, z0, truth.breakpoints(), &quad)? + tail(h))
            })
            .collect()
    };
    let g1 = readings(kernel_vertical, &|h| vertical_tail(z0, beta, h))?;
    let g2 = readings(kernel_horizontal, &|h| horizontal_tail(z0, beta, h))?;

    let ab = alpha - beta;
    let asinh_gap = move |h: f64| (2.0 * h).asinh() - (2.0 * (z0 + h)).asinh();
    let eq1 = Equation::new(Arc::new(|h, z| kernel_vertical(h + z)), heights.clone())
        .with_range(0.0, f64::MAX)
        .with_exact_rhs(g1)
        .with_data_offset(Arc::new(move |h| vertical_tail(z0, beta, h)))
        .with_analytic_representer(AnalyticRepresenter {
            second: Arc::new(vertical_second(z0)),
            value: Some(Arc::new(vertical_value(z0))),
        })
        .with_analytic_shift(Arc::new(move |h| alpha / theta(0.0, h) + ab / (2.0 * z0) * asinh_gap(h)));
    let eq2 = Equation::new(Arc::new(|h, z| kernel_horizontal(h + z)), heights)
        .with_range(0.0, f64::MAX)
        .with_exact_rhs(g2)
        .with_data_offset(Arc::new(move |h| horizontal_tail(z0, beta, h)))
        .with_analytic_representer(AnalyticRepresenter {
            second: Arc::new(horizontal_second(z0)),
            value: Some(Arc::new(horizontal_value(z0))),
        })
        .with_analytic_shift(Arc::new(move |h| {
            (ab * h / (2.0 * z0) + alpha) * theta(0.0, h) - ab / 2.0 * (h / z0 + 1.0) * theta(z0, h) - 2.0 * beta * h
                + z0 * ab
                + ab / (4.0 * z0) * asinh_gap(h)
        }));

    let label = format!("fdem:{}", truth.label());
    let negative = iv.uniform_grid(1000).into_iter().find(|&z| truth.eval(z) < 0.0);
    let mut ps = ProblemSpec::new(label, iv, BoundaryValues::new(alpha, beta)?, vec![eq1, eq2])?.with_truth(truth);
    if let Some(z) = negative {
        ps = ps.with_warning(format!("conductivity is negative at depth {z}"));
    }
    Ok(ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::truth_profile;
    use crate::riesz::TruthName;

    #[test]
    fn kernel_and_theta_values() {
        assert_eq!(kernel_vertical(0.0), 0.0);
        assert_eq!(kernel_horizontal(0.0), 2.0);
        assert_eq!(theta(0.0, 0.0), 1.0);
    }

    #[test]
    fn tails_match_quadrature() {
        // ∫_{z0}^{Z} k(h+z) dz with the primitives −1/θ and 2z − θ, Z → ∞.
        let (z0, h) = (4.0, 0.3);
        let far = 1e6;
        let v = -1.0 / theta(far, h) + 1.0 / theta(z0, h);
        assert!((vertical_tail(z0, 1.0, h) - v).abs() < 1e-6);
        let cfg = IntegrationConfig::default();
        let quad = integrate_split(&|z: f64| kernel_vertical(h + z), z0, 50.0, &[], &cfg).unwrap()
            + (1.0 / theta(50.0, h));
        assert!((vertical_tail(z0, 1.0, h) - quad).abs() < 1e-12);
        let quad = integrate_split(&|z: f64| kernel_horizontal(h + z), z0, 50.0, &[], &cfg).unwrap()
            + (theta(50.0, h) - 2.0 * (h + 50.0));
        assert!((horizontal_tail(z0, 1.0, h) - quad).abs() < 1e-12);
    }

    #[test]
    fn analytic_shift_matches_quadrature() {
        let ps = fdem_problem(&FdemConfig::new(10), truth_profile(TruthName::Sigma2).unwrap()).unwrap();
        let cfg = IntegrationConfig::default();
        let a = ps.shifted_exact_data(&cfg).unwrap();
        let q = ps.quadrature_only().shifted_exact_data(&cfg).unwrap();
        for (x, y) in a.values().iter().zip(q.values()) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn boundary_values_follow_truth() {
        let ps = fdem_problem(&FdemConfig::new(5), truth_profile(TruthName::Sigma1).unwrap()).unwrap();
        assert!((ps.boundary().f0 - ((-1f64).exp() + 1.0)).abs() < 1e-15);
        assert!((ps.boundary().f1 - ((-9f64).exp() + 1.0)).abs() < 1e-15);
        assert!(ps.warnings().is_empty());
        let neg = TruthProfile::custom("neg", |z| z - 1.0);
        let ps = fdem_problem(&FdemConfig::new(5), neg).unwrap();
        assert_eq!(ps.warnings().len(), 1);
    }
}
