//! Gauss–Legendre quadrature with panel doubling.
//!
//! Every integral in the crate that has no closed form goes through
//! [`integrate`] or [`integrate_with_breakpoints`]. Rules are computed by
//! Newton iteration on the Legendre recurrence and cached per order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of an `order`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Strictly increasing, symmetric about zero.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `f` on `[a, b]` split into `panels` equal pieces.
    pub fn composite<F>(&self, f: &F, a: f64, b: f64, panels: usize) -> Result<f64>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut total = 0.0;
        for p in 0..panels {
            let center = a + (p as f64 + 0.5) * width;
            let mut panel_sum = Compensated::default();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let t = center + half * x;
                let v = f(t);
                if !v.is_finite() {
                    return Err(Error::NumericDomain {
                        abscissa: t,
                        value: v,
                    });
                }
                panel_sum.add(w * v);
            }
            total += half * panel_sum.value();
        }
        Ok(total)
    }

    /// Abscissae and weights of the composite rule on `[a, b]`.
    pub fn composite_grid(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut xs = Vec::with_capacity(panels * self.order);
        let mut ws = Vec::with_capacity(panels * self.order);
        for p in 0..panels {
            let center = a + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(center + half * x);
                ws.push(half * w);
            }
        }
        (xs, ws)
    }
}

/// Settings shared by every quadrature call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig {
    pub order: usize,
    pub max_panel_doublings: u32,
    pub rel_tol: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            order: 64,
            max_panel_doublings: 6,
            rel_tol: 1e-12,
        }
    }
}

impl IntegrationConfig {
    pub fn with_order(order: usize) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::invalid(format!(
                "quadrature order must be at least 2, got {}",
                self.order
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

const ABS_FLOOR: f64 = 1e-300;

/// Computes the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(order: usize) -> Result<QuadratureRule> {
    if order < 1 {
        return Err(Error::invalid("quadrature order must be at least 1"));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for k in 0..half {
        // Root k of P_n, counted from the right end.
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        if n % 2 == 1 && k == half - 1 {
            x = 0.0;
            dp = legendre_with_derivative(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - k] = x;
        nodes[k] = -x;
        weights[n - 1 - k] = w;
        weights[k] = w;
    }
    // Remove the few-ulp drift of the weight formula so constants integrate
    // exactly.
    let total = compensated_sum(weights.iter().copied());
    for w in &mut weights {
        *w *= 2.0 / total;
    }
    Ok(QuadratureRule {
        order,
        nodes,
        weights,
    })
}

/// Neumaier compensated summation.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let next = self.sum + v;
        self.carry += if self.sum.abs() >= v.abs() {
            (self.sum - next) + v
        } else {
            (v - next) + self.sum
        };
        self.sum = next;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = Compensated::default();
    values.for_each(|v| acc.add(v));
    acc.value()
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * p - jf * p_prev) / (jf + 1.0);
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Rule for `order`, computed once per process.
pub fn cached_rule(order: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_legendre_rule(order)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(order, Arc::clone(&rule));
    Ok(rule)
}

/// Integrates `f` over `[a, b]`, doubling the panel count until two
/// successive estimates agree to `cfg.rel_tol` or the doubling budget runs out.
pub fn integrate<F>(f: &F, a: f64, b: f64, cfg: &IntegrationConfig) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    cfg.validate()?;
    if !(a < b) {
        return Err(Error::invalid(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let rule = cached_rule(cfg.order)?;
    let mut panels = 1;
    let mut estimate = rule.composite(f, a, b, panels)?;
    for _ in 0..cfg.max_panel_doublings {
        panels *= 2;
        let refined = rule.composite(f, a, b, panels)?;
        let converged = (refined - estimate).abs() <= cfg.rel_tol * refined.abs().max(ABS_FLOOR);
        estimate = refined;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

/// Integrates piecewise over the subintervals cut by `breakpoints`.
///
/// Breakpoints must be strictly increasing and lie strictly inside `(a, b)`.
pub fn integrate_with_breakpoints<F>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &IntegrationConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if breakpoints.is_empty() {
        return integrate(f, a, b, cfg);
    }
    for w in breakpoints.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "breakpoints must be strictly increasing, got {} before {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&bad) = breakpoints.iter().find(|&&p| !(p > a && p < b)) {
        return Err(Error::invalid(format!(
            "breakpoint {bad} is not inside ({a}, {b})"
        )));
    }
    let mut total = 0.0;
    let mut left = a;
    for &p in breakpoints.iter().chain(std::iter::once(&b)) {
        total += integrate(f, left, p, cfg)?;
        left = p;
    }
    Ok(total)
}

/// Sorts and deduplicates candidate kinks, keeping those strictly inside `(a, b)`.
pub fn interior_breakpoints(a: f64, b: f64, candidates: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// [`integrate_with_breakpoints`] after passing the candidates through
/// [`interior_breakpoints`].
pub fn integrate_split<F>(
    f: &F,
    a: f64,
    b: f64,
    candidates: &[f64],
    cfg: &IntegrationConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let pts = interior_breakpoints(a, b, candidates);
    integrate_with_breakpoints(f, a, b, &pts, cfg)
}
