//! The space W of functions vanishing at both ends of `[a, b]`, with inner
//! product `<f, g>_W = ∫ f'' g''`, and its reproducing kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_split, IntegrationConfig};
use crate::riesz::ProblemSpec;
use crate::solver::DataVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!(
                "interval requires finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }

    pub(crate) fn check(&self, t: f64, what: &str) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{what} = {t} lies outside [{}, {}]",
                self.a, self.b
            )))
        }
    }

    /// `points` equally spaced abscissae covering both endpoints.
    pub fn uniform_grid(&self, points: usize) -> Vec<f64> {
        match points {
            0 => Vec::new(),
            1 => vec![self.a],
            _ => {
                let h = self.length() / (points - 1) as f64;
                let mut grid: Vec<f64> = (0..points).map(|k| self.a + k as f64 * h).collect();
                grid[points - 1] = self.b;
                grid
            }
        }
    }
}

/// Prescribed values `f(a) = f0` and `f(b) = f1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValues {
    pub f0: f64,
    pub f1: f64,
}

impl BoundaryValues {
    pub fn new(f0: f64, f1: f64) -> Result<Self> {
        if !(f0.is_finite() && f1.is_finite()) {
            return Err(Error::invalid(format!(
                "boundary values must be finite, got ({f0}, {f1})"
            )));
        }
        Ok(Self { f0, f1 })
    }

    pub fn zero() -> Self {
        Self { f0: 0.0, f1: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.f0 == 0.0 && self.f1 == 0.0
    }
}

/// `G_y''(z)`, the second derivative in `z` of the reproducing kernel at `y`.
///
/// Piecewise linear in `z` with a kink at `z = y`; vanishes when `y` is an endpoint.
pub fn reproducing_kernel_second(y: f64, z: f64, iv: &Interval) -> Result<f64> {
    iv.check(y, "y")?;
    iv.check(z, "z")?;
    Ok(kernel_second_unchecked(y, z, iv))
}

#[inline]
pub(crate) fn kernel_second_unchecked(y: f64, z: f64, iv: &Interval) -> f64 {
    let (a, b) = (iv.a, iv.b);
    if z < y {
        (z - a) * (y - b) / (b - a)
    } else {
        (y - a) * (z - b) / (b - a)
    }
}

/// `G(x, y)` in closed form: with `s = min(x,y) - a`, `u = max(x,y) - a`,
/// `L = b - a`, `G = s (L - u) (2 L u - s² - u²) / (6 L)`.
pub fn reproducing_kernel(x: f64, y: f64, iv: &Interval) -> Result<f64> {
    iv.check(x, "x")?;
    iv.check(y, "y")?;
    Ok(kernel_unchecked(x, y, iv))
}

#[inline]
pub(crate) fn kernel_unchecked(x: f64, y: f64, iv: &Interval) -> f64 {
    let l = iv.length();
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let s = lo - iv.a;
    let u = hi - iv.a;
    s * (l - u) * (2.0 * l * u - s * s - u * u) / (6.0 * l)
}

/// `G(x, y) = ∫ G_x''(z) G_y''(z) dz`, by quadrature split at `x` and `y`.
pub fn reproducing_kernel_value(x: f64, y: f64, iv: &Interval, cfg: &IntegrationConfig) -> Result<f64> {
    iv.check(x, "x")?;
    iv.check(y, "y")?;
    // Integrate with the arguments in canonical order so the result is symmetric bit for bit.
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let f = |z: f64| kernel_second_unchecked(lo, z, iv) * kernel_second_unchecked(hi, z, iv);
    integrate_split(&f, iv.a, iv.b, &[lo, hi], cfg)
}

/// The linear function matching the boundary values.
pub fn boundary_lift(t: f64, iv: &Interval, bv: &BoundaryValues) -> Result<f64> {
    iv.check(t, "t")?;
    Ok(lift_unchecked(t, iv, bv))
}

#[inline]
pub(crate) fn lift_unchecked(t: f64, iv: &Interval, bv: &BoundaryValues) -> f64 {
    if t == iv.a {
        return bv.f0;
    }
    if t == iv.b {
        return bv.f1;
    }
    let l = iv.length();
    (iv.b - t) / l * bv.f0 + (t - iv.a) / l * bv.f1
}

/// Recovers `f(y)` from `f''` through `f(y) = ∫ G_y''(z) f''(z) dz`.
pub fn reproduce_value<F>(f_second: &F, y: f64, iv: &Interval, cfg: &IntegrationConfig) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    iv.check(y, "y")?;
    if y == iv.a || y == iv.b {
        return Ok(0.0);
    }
    let g = |z: f64| kernel_second_unchecked(y, z, iv) * f_second(z);
    integrate_split(&g, iv.a, iv.b, &[y], cfg)
}

/// Subtracts the known part of the data so the system has homogeneous
/// boundary conditions: `φ_ℓ(x) = g_ℓ(x) - offset_ℓ(x) - ∫ k_ℓ(x,t) γ(t) dt`.
///
/// Equations that carry an analytic shift use it in place of the offset and
/// the quadrature of the lift.
pub fn shift_rhs(ps: &ProblemSpec, g: &DataVector, cfg: &IntegrationConfig) -> Result<DataVector> {
    let shift = data_shift(ps, cfg)?;
    if g.len() != shift.len() {
        return Err(Error::invalid(format!(
            "data vector has length {}, problem has {} collocation functionals",
            g.len(),
            shift.len()
        )));
    }
    let values = g.values().iter().zip(&shift).map(|(v, s)| v - s).collect();
    Ok(g.with_values(values))
}

/// The amount [`shift_rhs`] subtracts from each component.
pub fn data_shift(ps: &ProblemSpec, cfg: &IntegrationConfig) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ps.total_functionals());
    for eq in ps.equations() {
        for &x in eq.nodes() {
            let s = match eq.analytic_shift() {
                Some(shift) => shift(x),
                None => {
                    let offset = eq.data_offset().map_or(0.0, |o| o(x));
                    offset + lift_response(ps, eq.kernel(), x, cfg)?
                }
            };
            out.push(s);
        }
    }
    Ok(out)
}

/// `∫ k(x,t) γ(t) dt` by quadrature; zero when the lift vanishes.
pub fn lift_response(
    ps: &ProblemSpec,
    kernel: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    x: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let bv = ps.boundary();
    if bv.is_zero() {
        return Ok(0.0);
    }
    let iv = ps.interval();
    let f = |t: f64| kernel(x, t) * lift_unchecked(t, iv, bv);
    integrate_split(&f, iv.a, iv.b, &[], cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn interval_rejects_empty_or_reversed() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn kernel_second_examples() {
        let iv = unit();
        assert_eq!(reproducing_kernel_second(0.5, 0.25, &iv).unwrap(), -0.125);
        for z in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert_eq!(reproducing_kernel_second(0.0, z, &iv).unwrap(), 0.0);
            assert_eq!(reproducing_kernel_second(1.0, z, &iv).unwrap(), 0.0);
        }
        assert!(reproducing_kernel_second(1.5, 0.2, &iv).is_err());
        assert!(reproducing_kernel_second(0.5, -0.2, &iv).is_err());
    }

    #[test]
    fn kernel_second_is_continuous_at_kink() {
        let iv = Interval::new(-1.0, 2.0).unwrap();
        let y = 0.37;
        let left = reproducing_kernel_second(y, y - 1e-12, &iv).unwrap();
        let at = reproducing_kernel_second(y, y, &iv).unwrap();
        assert!((left - at).abs() < 1e-11);
    }

    #[test]
    fn kernel_value_examples() {
        let iv = unit();
        let cfg = IntegrationConfig::default();
        let g = reproducing_kernel_value(0.5, 0.5, &iv, &cfg).unwrap();
        assert!((g - 1.0 / 48.0).abs() < 1e-16);
        assert_eq!(reproducing_kernel(0.5, 0.5, &iv).unwrap(), 1.0 / 48.0);
        for y in [0.0, 0.3, 1.0] {
            assert_eq!(reproducing_kernel_value(0.0, y, &iv, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn kernel_value_symmetric_and_matches_closed_form() {
        let iv = Interval::new(0.0, std::f64::consts::PI).unwrap();
        let cfg = IntegrationConfig::default();
        let pts = [0.0, 0.13, 0.9, 1.57, 2.2, 3.0, std::f64::consts::PI];
        for &x in &pts {
            for &y in &pts {
                let gxy = reproducing_kernel_value(x, y, &iv, &cfg).unwrap();
                let gyx = reproducing_kernel_value(y, x, &iv, &cfg).unwrap();
                assert!((gxy - gyx).abs() <= 1e-14);
                let closed = reproducing_kernel(x, y, &iv).unwrap();
                assert!((gxy - closed).abs() <= 1e-13, "{x} {y}: {gxy} vs {closed}");
            }
        }
    }

    #[test]
    fn lift_examples() {
        let iv = unit();
        let zero = BoundaryValues::zero();
        assert_eq!(boundary_lift(0.3, &iv, &zero).unwrap(), 0.0);

        let tp1 = BoundaryValues::new(1.0, 2.0).unwrap();
        assert_eq!(boundary_lift(0.5, &iv, &tp1).unwrap(), 1.5);
        for t in [0.0, 0.2, 0.9, 1.0] {
            assert!((boundary_lift(t, &iv, &tp1).unwrap() - (t + 1.0)).abs() < 1e-15);
        }

        let z0 = 4.0;
        let iv = Interval::new(0.0, z0).unwrap();
        let (alpha, beta) = (1.3, 0.7);
        let bv = BoundaryValues::new(alpha, beta).unwrap();
        assert_eq!(boundary_lift(z0, &iv, &bv).unwrap(), beta);
        assert_eq!(boundary_lift(0.0, &iv, &bv).unwrap(), alpha);
        let z = 1.7;
        let expected = (1.0 - z / z0) * alpha + z / z0 * beta;
        assert!((boundary_lift(z, &iv, &bv).unwrap() - expected).abs() < 1e-15);
        assert!(boundary_lift(4.5, &iv, &bv).is_err());
    }

    #[test]
    fn reproduce_value_examples() {
        let iv = unit();
        let cfg = IntegrationConfig::default();
        assert_eq!(reproduce_value(&|_| 0.0, 0.4, &iv, &cfg).unwrap(), 0.0);
        let v = reproduce_value(&|_| -2.0, 0.5, &iv, &cfg).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert_eq!(reproduce_value(&|_| -2.0, 0.0, &iv, &cfg).unwrap(), 0.0);
        assert_eq!(reproduce_value(&|_| -2.0, 1.0, &iv, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn reproduction_identity_for_polynomials() {
        // p(t) = (t - a)(b - t) q(t), degree up to 6, vanishes at both ends.
        let iv = Interval::new(-0.5, 1.5).unwrap();
        let (a, b) = (iv.a(), iv.b());
        let cfg = IntegrationConfig::default();
        let q = [0.3, -1.2, 0.7, 2.0, -0.4];
        let p = |t: f64| {
            let qv = q.iter().rev().fold(0.0, |acc, c| acc * t + c);
            (t - a) * (b - t) * qv
        };
        // Second derivative by a symmetric difference of the exact polynomial
        // would lose digits; expand instead: p = r(t) q(t) with r = -(t^2) + (a+b)t - ab.
        let p2 = |t: f64| {
            let r = -(t * t) + (a + b) * t - a * b;
            let r1 = -2.0 * t + (a + b);
            let r2 = -2.0;
            let qv = q.iter().rev().fold(0.0, |acc, c| acc * t + c);
            let q1 = q
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c * t.powi(k as i32 - 1))
                .sum::<f64>();
            let q2 = q
                .iter()
                .enumerate()
                .skip(2)
                .map(|(k, c)| (k * (k - 1)) as f64 * c * t.powi(k as i32 - 2))
                .sum::<f64>();
            r2 * qv + 2.0 * r1 * q1 + r * q2
        };
        for y in iv.uniform_grid(41) {
            let v = reproduce_value(&p2, y, &iv, &cfg).unwrap();
            assert!((v - p(y)).abs() <= 1e-10, "y={y}: {v} vs {}", p(y));
        }
    }

    #[test]
    fn uniform_grid_hits_endpoints() {
        let iv = Interval::new(0.0, std::f64::consts::PI).unwrap();
        let g = iv.uniform_grid(1000);
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[999], std::f64::consts::PI);
    }
}
