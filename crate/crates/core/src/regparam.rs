//! Choosing the truncation index: discrepancy principle, L-curve corner,
//! and the oracle `κ_best` when the true solution is known.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::IntegrationConfig;
use crate::riesz::ProblemSpec;
use crate::rkhs::{shift_rhs, Interval};
use crate::solver::{error_norms, w_norm, DataVector, GridEvaluator, TeigSweep};

/// Smallest `κ` whose residual is below `τ‖e‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub kappa: usize,
    /// False when no `κ ≤ N` met the bound and `N` was returned instead.
    pub satisfied: bool,
    /// `(κ, ‖G c^(κ) − g‖)` for every scanned `κ`.
    pub trace: Vec<(usize, f64)>,
}

pub fn discrepancy_kappa(sweep: &TeigSweep<'_>, noise_norm: f64, tau: f64) -> Result<Discrepancy> {
    if !(noise_norm > 0.0) || !noise_norm.is_finite() {
        return Err(Error::invalid(format!("noise norm must be positive, got {noise_norm}")));
    }
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("tau must exceed 1, got {tau}")));
    }
    let bound = tau * noise_norm;
    let mut trace = Vec::new();
    for kappa in 1..=sweep.max_kappa() {
        let r = sweep.residual(kappa)?;
        trace.push((kappa, r));
        if r <= bound {
            return Ok(Discrepancy {
                kappa,
                satisfied: true,
                trace,
            });
        }
    }
    Ok(Discrepancy {
        kappa: sweep.max_kappa(),
        satisfied: false,
        trace,
    })
}

/// One L-curve point in base-10 logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcurvePoint {
    pub kappa: usize,
    pub log_residual: f64,
    pub log_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lcurve {
    pub points: Vec<LcurvePoint>,
    /// Points with zero residual or zero norm, which have no logarithm.
    pub dropped: usize,
}

/// `(log‖G c^(κ) − g‖, log‖f^(κ)‖_W)` for `κ = 1…N`.
pub fn lcurve_points(sweep: &TeigSweep<'_>) -> Result<Lcurve> {
    let mut points = Vec::new();
    let mut dropped = 0;
    for kappa in 1..=sweep.max_kappa() {
        let r = sweep.residual(kappa)?;
        let w = sweep.w_norm(kappa)?;
        if r > 0.0 && w > 0.0 {
            points.push(LcurvePoint {
                kappa,
                log_residual: r.log10(),
                log_norm: w.log10(),
            });
        } else {
            dropped += 1;
        }
    }
    if points.len() < 3 {
        return Err(Error::InsufficientCurve { usable: points.len() });
    }
    Ok(Lcurve { points, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CornerMethod {
    /// Candidate corners from pruned curves at dyadic scales.
    Pruning,
    /// Most negative discrete curvature of the log-log polygon.
    MaxCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub kappa: usize,
    /// Position in the point list.
    pub index: usize,
    /// No convex corner exists; `kappa` is then the last point's.
    pub degenerate: bool,
    pub method: CornerMethod,
}

/// Wedge products below `-CONVEXITY_TOL` count as a convex turn; anything
/// closer to zero is treated as collinear.
const CONVEXITY_TOL: f64 = 1e-12;

fn wedge(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - v[0] * u[1]
}

fn unit(u: [f64; 2]) -> [f64; 2] {
    let n = u[0].hypot(u[1]);
    [u[0] / n, u[1] / n]
}

pub fn lcurve_corner(points: &[LcurvePoint], method: CornerMethod) -> Result<Corner> {
    if points.len() < 3 {
        return Err(Error::InsufficientCurve { usable: points.len() });
    }
    let p: Vec<[f64; 2]> = points.iter().map(|q| [q.log_residual, q.log_norm]).collect();
    if p.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("L-curve points must be finite"));
    }
    let found = match method {
        CornerMethod::Pruning => pruning_corner(&p),
        CornerMethod::MaxCurvature => curvature_corner(&p),
    };
    Ok(match found {
        Some(index) => Corner {
            kappa: points[index].kappa,
            index,
            degenerate: false,
            method,
        },
        None => Corner {
            kappa: points[points.len() - 1].kappa,
            index: points.len() - 1,
            degenerate: true,
            method,
        },
    })
}

/// Adaptive pruning: the polygon is repeatedly subsampled to its `p` longest
/// segments (`p` doubling from 5). Each pruned curve nominates the vertex of
/// its sharpest convex turn and the point nearest the crossing of its flattest
/// and steepest segments. The candidates are then scanned along the curve for
/// the first steep stretch that follows a convex turn.
fn pruning_corner(p: &[[f64; 2]]) -> Option<usize> {
    let np = p.len();
    let nseg = np - 1;
    let v: Vec<[f64; 2]> = (0..nseg).map(|k| [p[k + 1][0] - p[k][0], p[k + 1][1] - p[k][1]]).collect();
    let len: Vec<f64> = v.iter().map(|s| s[0].hypot(s[1])).collect();
    if len.iter().any(|&l| l == 0.0) {
        // Repeated points carry no direction; prune them away first.
        let keep: Vec<usize> = (0..np).filter(|&k| k == 0 || p[k] != p[k - 1]).collect();
        if keep.len() < 3 {
            return None;
        }
        let q: Vec<[f64; 2]> = keep.iter().map(|&k| p[k]).collect();
        return pruning_corner(&q).map(|i| keep[i]);
    }
    let w: Vec<[f64; 2]> = v.iter().map(|&s| unit(s)).collect();

    let mut by_length: Vec<usize> = (0..nseg).collect();
    // Longest first; ties resolved by position for determinism.
    by_length.sort_by(|&i, &j| len[j].total_cmp(&len[i]).then(j.cmp(&i)));

    let mut candidates: Vec<usize> = Vec::new();
    let mut convex = false;
    let mut scale = 5.min(nseg);
    while scale < 2 * nseg {
        let mut elmts: Vec<usize> = by_length[..scale.min(nseg)].to_vec();
        elmts.sort_unstable();
        if let Some(c) = sharpest_turn(&w, &elmts) {
            convex = true;
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
        if let Some(c) = global_behavior(p, &w, &elmts) {
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
        scale *= 2;
    }
    if !convex {
        return None;
    }
    if !candidates.contains(&0) {
        candidates.push(0);
    }
    candidates.sort_unstable();

    // Stretches between consecutive candidates that rise at least as steeply
    // as they run; the first one is ignored.
    let steep: Vec<usize> = (1..candidates.len() - 1)
        .filter(|&d| {
            let (a, b) = (p[candidates[d]], p[candidates[d + 1]]);
            b[1] - a[1] >= (b[0] - a[0]).abs()
        })
        .collect();
    if steep.is_empty() {
        return candidates.last().copied();
    }
    let dirs: Vec<[f64; 2]> = candidates
        .windows(2)
        .map(|c| unit([p[c[1]][0] - p[c[0]][0], p[c[1]][1] - p[c[0]][1]]))
        .collect();
    let turn = |d: usize| wedge(dirs[d - 1], dirs[d]);
    match steep.iter().find(|&&d| turn(d) <= 0.0) {
        Some(&d) => Some(candidates[d]),
        None => Some(candidates[*steep.last().unwrap()]),
    }
}

/// Vertex after the segment with the most negative wedge product against its
/// successor among the kept segments.
fn sharpest_turn(w: &[[f64; 2]], elmts: &[usize]) -> Option<usize> {
    let (k, m) = elmts
        .windows(2)
        .map(|e| wedge(w[e[0]], w[e[1]]))
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, bm), (k, m)| if m < bm { (k, m) } else { (bk, bm) });
    (m < -CONVEXITY_TOL).then(|| elmts[k] + 1)
}

/// Intersects the horizontal line through the flattest kept segment with the
/// steepest kept segment that lies after it, and returns the curve point
/// nearest that intersection.
fn global_behavior(p: &[[f64; 2]], w: &[[f64; 2]], elmts: &[usize]) -> Option<usize> {
    let ln = elmts.len();
    if ln < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..ln).collect();
    order.sort_by(|&i, &j| w[elmts[i]][1].abs().total_cmp(&w[elmts[j]][1].abs()).then(i.cmp(&j)));

    // Widen the flattest and steepest sets until some flat segment precedes a
    // steep one.
    let mut count = 1;
    let mut mn = order[0];
    let mut mx = order[ln - 1];
    while mn >= mx {
        if count >= ln {
            return None;
        }
        mx = mx.max(order[ln - 1 - count]);
        count += 1;
        mn = mn.min(order[count - 1]);
    }
    let (flat, steep) = if count > 1 {
        let mut pick = None;
        'outer: for i in 0..count {
            for j in (ln - count..ln).rev() {
                if order[i] < order[j] {
                    pick = Some((order[i], order[j]));
                    break 'outer;
                }
            }
        }
        pick?
    } else {
        (order[0], order[ln - 1])
    };

    let level = p[elmts[flat]][1];
    let (s0, s1) = (p[elmts[steep]], p[elmts[steep] + 1]);
    let x = s1[0] + (level - s1[1]) / (s1[1] - s0[1]) * (s1[0] - s0[0]);
    if !x.is_finite() {
        return None;
    }
    let origin = [x, level];
    p.iter()
        .map(|q| (q[0] - origin[0]).powi(2) + (q[1] - origin[1]).powi(2))
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (k, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((k, d)),
        })
        .map(|(k, _)| k)
}

/// Interior vertex with the most negative signed Menger curvature.
fn curvature_corner(p: &[[f64; 2]]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in 1..p.len() - 1 {
        let a = [p[k][0] - p[k - 1][0], p[k][1] - p[k - 1][1]];
        let b = [p[k + 1][0] - p[k][0], p[k + 1][1] - p[k][1]];
        let c = [p[k + 1][0] - p[k - 1][0], p[k + 1][1] - p[k - 1][1]];
        let denom = a[0].hypot(a[1]) * b[0].hypot(b[1]) * c[0].hypot(c[1]);
        if denom == 0.0 {
            continue;
        }
        let curvature = 2.0 * wedge(a, b) / denom;
        if curvature < -CONVEXITY_TOL && best.map_or(true, |(_, m)| curvature < m) {
            best = Some((k, curvature));
        }
    }
    best.map(|(k, _)| k)
}

/// Error measure used to define `κ_best`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric {
    /// `‖L(c_ref − c^(κ))‖` against reference coefficients.
    WNorm,
    #[default]
    GridL2,
    GridMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaBest {
    pub kappa: usize,
    pub metric: ErrorMetric,
    /// Error for `κ = 1…N`; entry `κ − 1`.
    pub errors: Vec<f64>,
}

/// Reference against which `κ_best` is measured.
pub enum Reference<'a> {
    /// Coefficients of the noise-free solution, for [`ErrorMetric::WNorm`].
    Coefficients(&'a nalgebra::DVector<f64>),
    /// True solution sampled on the evaluator's grid.
    Grid {
        evaluator: &'a GridEvaluator,
        truth: &'a [f64],
        interval: &'a Interval,
    },
}

pub fn kappa_best(sweep: &TeigSweep<'_>, reference: Reference<'_>, metric: ErrorMetric) -> Result<KappaBest> {
    let mut errors = Vec::with_capacity(sweep.max_kappa());
    for kappa in 1..=sweep.max_kappa() {
        let c = sweep.coefficients(kappa)?;
        let e = match (&reference, metric) {
            (Reference::Coefficients(reference), ErrorMetric::WNorm) => {
                w_norm(sweep.factorization(), &(*reference - &c))?
            }
            (
                Reference::Grid {
                    evaluator,
                    truth,
                    interval,
                },
                ErrorMetric::GridL2 | ErrorMetric::GridMax,
            ) => {
                if truth.len() != evaluator.grid().len() {
                    return Err(Error::invalid("truth samples do not match the evaluation grid"));
                }
                let norms = error_norms(&evaluator.eval(&c)?, truth, interval);
                if metric == ErrorMetric::GridL2 {
                    norms.l2
                } else {
                    norms.max
                }
            }
            _ => return Err(Error::invalid("error metric does not match the reference kind")),
        };
        errors.push(e);
    }
    let kappa = errors
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, be), (k, &e)| if e < be { (k, e) } else { (bk, be) })
        .0
        + 1;
    Ok(KappaBest { kappa, metric, errors })
}

/// Parameters and realized size of an additive Gaussian perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub delta: f64,
    pub seed: u64,
    pub realized_norm: f64,
}

/// `g = g_exact + e` with `e = (δ/√N_m)‖g_exact‖ w` and `w` standard normal.
/// The stream is ChaCha20 seeded from `seed`; normals come from Box–Muller on
/// 53-bit uniforms, so results are identical on every platform.
pub fn add_noise(g_exact: &DataVector, delta: f64, seed: u64) -> Result<(DataVector, NoiseModel)> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("noise level must be non-negative, got {delta}")));
    }
    let n = g_exact.len();
    let w = standard_normals(n, seed);
    let scale = delta / (n as f64).sqrt() * g_exact.norm();
    let e: Vec<f64> = w.iter().map(|x| scale * x).collect();
    let values = g_exact.values().iter().zip(&e).map(|(g, e)| g + e).collect();
    let realized_norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    let model = NoiseModel {
        delta,
        seed,
        realized_norm,
    };
    Ok((DataVector::noisy(values, realized_norm), model))
}

/// Which data vector the perturbation is scaled by and added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseTarget {
    /// The measured data `g`; the boundary shift is applied afterwards.
    Raw,
    /// The shifted right-hand side of the Gram system.
    Shifted,
}

/// Noisy right-hand side of the Gram system for a problem with exact data.
pub fn noisy_system_data(
    ps: &ProblemSpec,
    delta: f64,
    seed: u64,
    target: NoiseTarget,
    cfg: &IntegrationConfig,
) -> Result<(DataVector, NoiseModel)> {
    match target {
        NoiseTarget::Shifted => add_noise(&ps.shifted_exact_data(cfg)?, delta, seed),
        NoiseTarget::Raw => {
            let g = ps
                .exact_data()
                .ok_or_else(|| Error::invalid(format!("problem {} has no exact data", ps.label())))?;
            let (noisy, model) = add_noise(&g, delta, seed)?;
            Ok((shift_rhs(ps, &noisy, cfg)?, model))
        }
    }
}

/// `n` standard normal variates from the seeded stream.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // Uniform in (0, 1]: never zero, so the logarithm is finite.
    let mut uniform = || ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let r = (-2.0 * uniform().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * uniform();
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(n);
    out
}

/// Everything decided about the truncation index for one data vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSelectionReport {
    pub cutoff: usize,
    pub tau: f64,
    pub kappa_d: Option<usize>,
    pub kappa_lc: Option<usize>,
    pub kappa_best: Option<usize>,
    pub discrepancy_satisfied: Option<bool>,
    pub discrepancy_trace: Vec<(usize, f64)>,
    pub lcurve_points: Vec<LcurvePoint>,
    pub lcurve_dropped: usize,
    pub corner_degenerate: Option<bool>,
    pub corner_method: Option<CornerMethod>,
    pub best_metric: Option<ErrorMetric>,
}

impl ParamSelectionReport {
    pub fn new(cutoff: usize, tau: f64) -> Self {
        Self {
            cutoff,
            tau,
            kappa_d: None,
            kappa_lc: None,
            kappa_best: None,
            discrepancy_satisfied: None,
            discrepancy_trace: Vec::new(),
            lcurve_points: Vec::new(),
            lcurve_dropped: 0,
            corner_degenerate: None,
            corner_method: None,
            best_metric: None,
        }
    }

    pub fn record_discrepancy(&mut self, d: Discrepancy) {
        self.kappa_d = Some(d.kappa);
        self.discrepancy_satisfied = Some(d.satisfied);
        self.discrepancy_trace = d.trace;
    }

    pub fn record_lcurve(&mut self, curve: Lcurve, corner: Corner) {
        self.kappa_lc = Some(corner.kappa);
        self.corner_degenerate = Some(corner.degenerate);
        self.corner_method = Some(corner.method);
        self.lcurve_points = curve.points;
        self.lcurve_dropped = curve.dropped;
    }

    pub fn record_best(&mut self, best: &KappaBest) {
        self.kappa_best = Some(best.kappa);
        self.best_metric = Some(best.metric);
    }
}
