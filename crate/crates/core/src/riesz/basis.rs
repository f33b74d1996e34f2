use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::{cached_rule, integrate_split, IntegrationConfig};
use crate::rkhs::{kernel_second_unchecked, kernel_unchecked, Interval};

use super::problem::{BlockIndex, Equation, ProblemSpec};

/// `η''_{ℓ,i}(z)`: the closed form when registered, otherwise
/// `∫ G_t''(z) k_ℓ(x_{ℓ,i}, t) dt` by quadrature.
pub fn representer_second(
    ps: &ProblemSpec,
    eq: usize,
    i: usize,
    z: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let (equation, x) = node(ps, eq, i)?;
    ps.interval().check(z, "z")?;
    second_at(ps.interval(), equation, x, z, cfg)
}

/// `η_{ℓ,i}(y)`: the closed form when registered, otherwise the nested
/// quadrature `∫ G_y''(z) η''(z) dz` with `η''` itself from
/// [`representer_second`].
pub fn representer_value(
    ps: &ProblemSpec,
    eq: usize,
    i: usize,
    y: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let (equation, x) = node(ps, eq, i)?;
    let iv = ps.interval();
    iv.check(y, "y")?;
    if y == iv.a() || y == iv.b() {
        return Ok(0.0);
    }
    if let Some(value) = equation.analytic().and_then(|r| r.value.as_ref()) {
        return finite(value(x, y), y);
    }
    nested_value(iv, equation, x, y, cfg, false)
}

/// [`representer_second`] ignoring any closed form.
pub fn representer_second_quadrature(
    ps: &ProblemSpec,
    eq: usize,
    i: usize,
    z: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let (equation, x) = node(ps, eq, i)?;
    ps.interval().check(z, "z")?;
    second_by_quadrature(ps.interval(), equation, x, z, cfg)
}

/// [`representer_value`] ignoring any closed form at both levels.
pub fn representer_value_quadrature(
    ps: &ProblemSpec,
    eq: usize,
    i: usize,
    y: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let (equation, x) = node(ps, eq, i)?;
    let iv = ps.interval();
    iv.check(y, "y")?;
    if y == iv.a() || y == iv.b() {
        return Ok(0.0);
    }
    nested_value(iv, equation, x, y, cfg, true)
}

/// `η_{ℓ,i}(y) = ∫ k_ℓ(x_{ℓ,i}, t) G(y, t) dt`, i.e. the collocation
/// functional applied to the reproducing kernel. One quadrature instead of two.
pub fn representer_value_by_kernel(
    ps: &ProblemSpec,
    eq: usize,
    i: usize,
    y: f64,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let (equation, x) = node(ps, eq, i)?;
    let iv = ps.interval();
    iv.check(y, "y")?;
    value_by_kernel(iv, equation, x, y, cfg)
}

fn node(ps: &ProblemSpec, eq: usize, i: usize) -> Result<(&Equation, f64)> {
    let j = ps.index().flat(eq, i)?;
    ps.functional(j)
}

fn finite(v: f64, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericDomain {
            abscissa: at,
            value: v,
        })
    }
}

fn second_at(iv: &Interval, equation: &Equation, x: f64, z: f64, cfg: &IntegrationConfig) -> Result<f64> {
    match equation.analytic() {
        Some(repr) => finite((repr.second)(x, z), z),
        None => second_by_quadrature(iv, equation, x, z, cfg),
    }
}

fn second_by_quadrature(iv: &Interval, equation: &Equation, x: f64, z: f64, cfg: &IntegrationConfig) -> Result<f64> {
    if z == iv.a() || z == iv.b() {
        return Ok(0.0);
    }
    let k = equation.kernel();
    // As a function of t, G_t''(z) has its kink at t = z.
    let f = |t: f64| kernel_second_unchecked(t, z, iv) * k(x, t);
    integrate_split(&f, iv.a(), iv.b(), &[z], cfg)
}

fn nested_value(
    iv: &Interval,
    equation: &Equation,
    x: f64,
    y: f64,
    cfg: &IntegrationConfig,
    force_quadrature: bool,
) -> Result<f64> {
    let failure = RefCell::new(None);
    let f = |z: f64| {
        let inner = if force_quadrature {
            second_by_quadrature(iv, equation, x, z, cfg)
        } else {
            second_at(iv, equation, x, z, cfg)
        };
        match inner {
            Ok(v) => kernel_second_unchecked(y, z, iv) * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let out = integrate_split(&f, iv.a(), iv.b(), &[y], cfg);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => out,
    }
}

fn value_by_kernel(iv: &Interval, equation: &Equation, x: f64, y: f64, cfg: &IntegrationConfig) -> Result<f64> {
    if y == iv.a() || y == iv.b() {
        return Ok(0.0);
    }
    let k = equation.kernel();
    let f = |t: f64| k(x, t) * kernel_unchecked(y, t, iv);
    integrate_split(&f, iv.a(), iv.b(), &[y], cfg)
}

/// The `N_m` Riesz representers of a problem, with `η''` tabulated on the
/// composite Gauss–Legendre grid used for Gram inner products.
#[derive(Debug, Clone)]
pub struct RieszBasis {
    problem: Arc<ProblemSpec>,
    cfg: IntegrationConfig,
    grid: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
    /// Row `j` holds `η_j''` at every grid abscissa.
    second: DMatrix<f64>,
}

/// Builds all representers and picks the Gram grid: the panel count doubles
/// until the tabulated inner products settle to `cfg.rel_tol`.
pub fn build_basis(ps: Arc<ProblemSpec>, cfg: &IntegrationConfig) -> Result<RieszBasis> {
    cfg.validate()?;
    let rule = cached_rule(cfg.order)?;
    let iv = *ps.interval();
    let mut panels = 1;
    let (mut grid, mut weights) = rule.composite_grid(iv.a(), iv.b(), panels);
    let mut second = tabulate_second(&ps, &grid, cfg)?;
    let mut gram = weighted_gram(&second, &weights);
    for _ in 0..cfg.max_panel_doublings {
        let next_panels = panels * 2;
        let (g, w) = rule.composite_grid(iv.a(), iv.b(), next_panels);
        let s = tabulate_second(&ps, &g, cfg)?;
        let next_gram = weighted_gram(&s, &w);
        let scale = next_gram.amax().max(1e-300);
        let change = (&next_gram - &gram).amax();
        panels = next_panels;
        grid = g;
        weights = w;
        second = s;
        gram = next_gram;
        if change <= cfg.rel_tol * scale {
            break;
        }
    }
    Ok(RieszBasis {
        problem: ps,
        cfg: *cfg,
        grid,
        weights,
        panels,
        second,
    })
}

fn tabulate_second(ps: &ProblemSpec, grid: &[f64], cfg: &IntegrationConfig) -> Result<DMatrix<f64>> {
    let n = ps.total_functionals();
    let iv = ps.interval();
    let mut out = DMatrix::zeros(n, grid.len());
    for j in 0..n {
        let (equation, x) = ps.functional(j)?;
        for (q, &z) in grid.iter().enumerate() {
            out[(j, q)] = second_at(iv, equation, x, z, cfg).map_err(|e| Error::GramEntry {
                row: j,
                col: j,
                source: Box::new(e),
            })?;
        }
    }
    Ok(out)
}

pub(crate) fn weighted_gram(second: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut scaled = second.clone();
    for (q, w) in weights.iter().enumerate() {
        scaled.column_mut(q).scale_mut(*w);
    }
    let g = &scaled * second.transpose();
    (&g + g.transpose()) * 0.5
}

impl RieszBasis {
    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn problem_arc(&self) -> &Arc<ProblemSpec> {
        &self.problem
    }

    pub fn config(&self) -> &IntegrationConfig {
        &self.cfg
    }

    pub fn index(&self) -> &BlockIndex {
        self.problem.index()
    }

    pub fn len(&self) -> usize {
        self.problem.total_functionals()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Abscissae of the Gram quadrature grid.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid_panels(&self) -> usize {
        self.panels
    }

    /// `η_j''` sampled on [`Self::grid`]; one row per representer.
    pub fn second_samples(&self) -> &DMatrix<f64> {
        &self.second
    }

    pub fn eval_second(&self, j: usize, z: f64) -> Result<f64> {
        let (equation, x) = self.problem.functional(j)?;
        let iv = self.problem.interval();
        iv.check(z, "z")?;
        second_at(iv, equation, x, z, &self.cfg)
    }

    /// `η_j(y)`; zero at the endpoints, closed form when registered, otherwise
    /// the kernel applied to `G(y, ·)` by quadrature.
    pub fn eval_value(&self, j: usize, y: f64) -> Result<f64> {
        let (equation, x) = self.problem.functional(j)?;
        let iv = self.problem.interval();
        iv.check(y, "y")?;
        if y == iv.a() || y == iv.b() {
            return Ok(0.0);
        }
        if let Some(value) = equation.analytic().and_then(|r| r.value.as_ref()) {
            return finite(value(x, y), y);
        }
        value_by_kernel(iv, equation, x, y, &self.cfg)
    }

    /// Matrix with entry `(p, j) = η_j(points[p])`.
    pub fn value_matrix(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(points.len(), self.len());
        for j in 0..self.len() {
            for (p, &y) in points.iter().enumerate() {
                out[(p, j)] = self.eval_value(j, y)?;
            }
        }
        Ok(out)
    }

    /// `<η_p, f>_W = ∫ η_p'' f''` on the Gram grid.
    pub fn inner_with_second(&self, p: usize, f_second: &dyn Fn(f64) -> f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(q, (&z, &w))| w * self.second[(p, q)] * f_second(z))
            .sum()
    }
}
