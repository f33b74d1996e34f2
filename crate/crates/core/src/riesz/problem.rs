use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::IntegrationConfig;
use crate::rkhs::{shift_rhs, BoundaryValues, Interval};
use crate::solver::DataVector;

/// Bivariate kernel `k(x, t)`: collocation abscissa first, integration variable second.
pub type Kernel = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A function of one real variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form representer formula `(node, argument) -> value`.
pub type RepresenterFormula = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Closed forms for the representers of one equation.
#[derive(Clone)]
pub struct AnalyticRepresenter {
    /// `η''(z)` for the representer at a given node.
    pub second: RepresenterFormula,
    /// `η(y)`; when absent the value is recovered by quadrature from `second`.
    pub value: Option<RepresenterFormula>,
}

/// One integral equation `∫ k(x,t) f(t) dt = g(x)` collocated at `nodes`.
#[derive(Clone)]
pub struct Equation {
    kernel: Kernel,
    nodes: Vec<f64>,
    range: (f64, f64),
    rhs_exact: Option<Vec<f64>>,
    data_offset: Option<ScalarFn>,
    analytic: Option<AnalyticRepresenter>,
    analytic_shift: Option<ScalarFn>,
}

impl Equation {
    pub fn new(kernel: Kernel, nodes: Vec<f64>) -> Self {
        let range = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        Self {
            kernel,
            nodes,
            range,
            rhs_exact: None,
            data_offset: None,
            analytic: None,
            analytic_shift: None,
        }
    }

    /// Admissible collocation range `[c, d]`; nodes are checked against it.
    pub fn with_range(mut self, c: f64, d: f64) -> Self {
        self.range = (c, d);
        self
    }

    pub fn with_exact_rhs(mut self, values: Vec<f64>) -> Self {
        self.rhs_exact = Some(values);
        self
    }

    /// Tabulates `g` at the nodes.
    pub fn with_exact_rhs_fn(self, g: impl Fn(f64) -> f64) -> Self {
        let values = self.nodes.iter().map(|&x| g(x)).collect();
        self.with_exact_rhs(values)
    }

    /// A known additive term in the data (for instance the contribution of a
    /// truncated tail), removed before solving.
    pub fn with_data_offset(mut self, offset: ScalarFn) -> Self {
        self.data_offset = Some(offset);
        self
    }

    pub fn with_analytic_representer(mut self, repr: AnalyticRepresenter) -> Self {
        self.analytic = Some(repr);
        self
    }

    /// Closed form of everything subtracted by the right-hand-side shift:
    /// data offset plus `∫ k(x,t) γ(t) dt`.
    pub fn with_analytic_shift(mut self, shift: ScalarFn) -> Self {
        self.analytic_shift = Some(shift);
        self
    }

    pub fn kernel(&self) -> &(dyn Fn(f64, f64) -> f64 + Send + Sync) {
        self.kernel.as_ref()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn rhs_exact(&self) -> Option<&[f64]> {
        self.rhs_exact.as_deref()
    }

    pub fn data_offset(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.data_offset.as_deref()
    }

    pub fn analytic(&self) -> Option<&AnalyticRepresenter> {
        self.analytic.as_ref()
    }

    pub fn analytic_shift(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.analytic_shift.as_deref()
    }

    /// Drops closed forms so every representer goes through quadrature.
    pub fn without_closed_forms(mut self) -> Self {
        self.analytic = None;
        self.analytic_shift = None;
        self
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Equation")
            .field("nodes", &self.nodes)
            .field("range", &self.range)
            .field("rhs_exact", &self.rhs_exact.is_some())
            .field("analytic", &self.analytic.is_some())
            .field("analytic_shift", &self.analytic_shift.is_some())
            .finish()
    }
}

/// Which built-in reference solution a [`TruthProfile`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthName {
    Sigma1,
    Sigma2,
    Sigma3,
    Custom,
}

/// A known exact solution, used to generate data and to measure errors.
#[derive(Clone)]
pub struct TruthProfile {
    name: TruthName,
    label: String,
    eval: ScalarFn,
    breakpoints: Vec<f64>,
}

impl TruthProfile {
    pub fn new(name: TruthName, label: impl Into<String>, eval: ScalarFn) -> Self {
        Self {
            name,
            label: label.into(),
            eval,
            breakpoints: Vec::new(),
        }
    }

    pub fn custom(label: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(TruthName::Custom, label, Arc::new(eval))
    }

    /// Points where the profile is not smooth; quadrature splits there.
    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn name(&self) -> TruthName {
        self.name
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn as_fn(&self) -> &(dyn Fn(f64) -> f64 + Send + Sync) {
        self.eval.as_ref()
    }
}

impl fmt::Debug for TruthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruthProfile")
            .field("name", &self.name)
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

/// Bijection between flat indices `j` and block indices `(ℓ, i)`, with
/// `j = i + N_{ℓ-1}` and `N_r = n_1 + … + n_r`. All indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIndex {
    offsets: Vec<usize>,
}

impl BlockIndex {
    pub fn new(block_sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(block_sizes.len() + 1);
        offsets.push(0);
        for n in block_sizes {
            offsets.push(offsets.last().unwrap() + n);
        }
        Self { offsets }
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn block_len(&self, eq: usize) -> usize {
        self.offsets[eq + 1] - self.offsets[eq]
    }

    pub fn offset(&self, eq: usize) -> usize {
        self.offsets[eq]
    }

    pub fn flat(&self, eq: usize, i: usize) -> Result<usize> {
        if eq >= self.blocks() || i >= self.block_len(eq) {
            return Err(Error::invalid(format!(
                "block index ({eq}, {i}) out of range"
            )));
        }
        Ok(self.offsets[eq] + i)
    }

    pub fn block(&self, j: usize) -> Result<(usize, usize)> {
        if j >= self.total() {
            return Err(Error::invalid(format!(
                "flat index {j} out of range for {} functionals",
                self.total()
            )));
        }
        let eq = (0..self.blocks())
            .find(|&e| j < self.offsets[e + 1])
            .expect("j < total");
        Ok((eq, j - self.offsets[eq]))
    }
}

/// A complete overdetermined system: interval, boundary values, and the
/// collocated equations.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    label: String,
    interval: Interval,
    boundary: BoundaryValues,
    equations: Vec<Equation>,
    truth: Option<TruthProfile>,
    warnings: Vec<String>,
    index: BlockIndex,
}

impl ProblemSpec {
    pub fn new(
        label: impl Into<String>,
        interval: Interval,
        boundary: BoundaryValues,
        equations: Vec<Equation>,
    ) -> Result<Self> {
        if equations.is_empty() {
            return Err(Error::invalid("a problem needs at least one equation"));
        }
        for (l, eq) in equations.iter().enumerate() {
            if eq.nodes.is_empty() {
                return Err(Error::invalid(format!("equation {l} has no collocation nodes")));
            }
            let (c, d) = eq.range;
            if let Some(x) = eq.nodes.iter().find(|x| !(x.is_finite() && **x >= c && **x <= d)) {
                return Err(Error::invalid(format!(
                    "node {x} of equation {l} is outside its collocation range [{c}, {d}]"
                )));
            }
            if let Some(rhs) = &eq.rhs_exact {
                if rhs.len() != eq.nodes.len() {
                    return Err(Error::invalid(format!(
                        "equation {l}: {} exact data values for {} nodes",
                        rhs.len(),
                        eq.nodes.len()
                    )));
                }
            }
        }
        let sizes: Vec<usize> = equations.iter().map(|e| e.nodes.len()).collect();
        Ok(Self {
            label: label.into(),
            interval,
            boundary,
            equations,
            truth: None,
            warnings: Vec::new(),
            index: BlockIndex::new(&sizes),
        })
    }

    pub fn with_truth(mut self, truth: TruthProfile) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warnings.push(warning.into());
        self
    }

    /// Same problem with every closed form removed.
    pub fn quadrature_only(&self) -> Self {
        let mut out = self.clone();
        out.equations = out.equations.into_iter().map(Equation::without_closed_forms).collect();
        out
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn boundary(&self) -> &BoundaryValues {
        &self.boundary
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn truth(&self) -> Option<&TruthProfile> {
        self.truth.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn index(&self) -> &BlockIndex {
        &self.index
    }

    /// `N_m`, the number of collocation functionals.
    pub fn total_functionals(&self) -> usize {
        self.index.total()
    }

    /// Node and equation of flat index `j`.
    pub fn functional(&self, j: usize) -> Result<(&Equation, f64)> {
        let (l, i) = self.index.block(j)?;
        let eq = &self.equations[l];
        Ok((eq, eq.nodes[i]))
    }

    /// The exact data `g` in block order, if every equation provides it.
    pub fn exact_data(&self) -> Option<DataVector> {
        let mut values = Vec::with_capacity(self.total_functionals());
        for eq in &self.equations {
            values.extend_from_slice(eq.rhs_exact.as_deref()?);
        }
        Some(DataVector::exact(values))
    }

    /// Exact data with the boundary lift and offsets removed.
    pub fn shifted_exact_data(&self, cfg: &IntegrationConfig) -> Result<DataVector> {
        let g = self
            .exact_data()
            .ok_or_else(|| Error::invalid(format!("problem {} has no exact data", self.label)))?;
        shift_rhs(self, &g, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_index_round_trips() {
        let idx = BlockIndex::new(&[5, 5]);
        assert_eq!(idx.total(), 10);
        // Second equation, first node: j = 1 + N_1 = 6 in one-based terms.
        assert_eq!(idx.flat(1, 0).unwrap() + 1, 6);
        for j in 0..10 {
            let (l, i) = idx.block(j).unwrap();
            assert_eq!(idx.flat(l, i).unwrap(), j);
        }
        assert!(idx.block(10).is_err());
        assert!(idx.flat(2, 0).is_err());
        assert!(idx.flat(0, 5).is_err());

        let uneven = BlockIndex::new(&[2, 0, 3]);
        assert_eq!(uneven.block(2).unwrap(), (2, 0));
        assert_eq!(uneven.block(1).unwrap(), (0, 1));
    }

    #[test]
    fn problem_validation() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let k: Kernel = Arc::new(|x, t| x * t);
        assert!(ProblemSpec::new("empty", iv, BoundaryValues::zero(), vec![]).is_err());
        let no_nodes = Equation::new(k.clone(), vec![]);
        assert!(ProblemSpec::new("p", iv, BoundaryValues::zero(), vec![no_nodes]).is_err());
        let outside = Equation::new(k.clone(), vec![0.5, 2.0]).with_range(0.0, 1.0);
        assert!(ProblemSpec::new("p", iv, BoundaryValues::zero(), vec![outside]).is_err());
        let bad_rhs = Equation::new(k.clone(), vec![0.5]).with_exact_rhs(vec![1.0, 2.0]);
        assert!(ProblemSpec::new("p", iv, BoundaryValues::zero(), vec![bad_rhs]).is_err());
        let ok = Equation::new(k, vec![0.2, 0.5]).with_exact_rhs_fn(|x| 2.0 * x);
        let ps = ProblemSpec::new("p", iv, BoundaryValues::zero(), vec![ok.clone(), ok]).unwrap();
        assert_eq!(ps.total_functionals(), 4);
        assert_eq!(ps.exact_data().unwrap().values(), &[0.4, 1.0, 0.4, 1.0]);
    }
}
