//! Riesz representers of the collocation functionals and the problem
//! description they are built from.

mod basis;
mod problem;

pub use basis::{
    build_basis, representer_second, representer_second_quadrature, representer_value,
    representer_value_by_kernel, representer_value_quadrature, RieszBasis,
};
pub(crate) use basis::weighted_gram;
pub use problem::{
    AnalyticRepresenter, BlockIndex, Equation, Kernel, ProblemSpec, RepresenterFormula, ScalarFn,
    TruthName, TruthProfile,
};
