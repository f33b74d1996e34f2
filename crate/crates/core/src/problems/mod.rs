//! Built-in problems: two artificial systems with known solutions, the
//! two-orientation FDEM model with three conductivity profiles, and a
//! box-function Galerkin baseline for comparison.

mod artificial;
mod fdem;
mod galerkin;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use artificial::{test_problem_1, test_problem_1_with_nodes, test_problem_2, uniform_nodes};
pub use fdem::{
    fdem_problem, horizontal_tail, kernel_horizontal, kernel_vertical, theta, vertical_tail, FdemConfig,
};
pub use galerkin::{galerkin_baseline, GalerkinBaseline, GalerkinSolution};

use crate::error::{Error, Result};
use crate::riesz::{ProblemSpec, TruthName, TruthProfile};

/// Built-in conductivity profiles.
pub fn truth_profile(name: TruthName) -> Result<TruthProfile> {
    Ok(match name {
        TruthName::Sigma1 => TruthProfile::new(name, "sigma1", Arc::new(|z: f64| (-(z - 1.0).powi(2)).exp() + 1.0)),
        TruthName::Sigma2 => TruthProfile::new(
            name,
            "sigma2",
            Arc::new(|z: f64| {
                if z <= 1.0 {
                    0.8 * z + 0.2
                } else {
                    0.8 * (-(z - 1.0)).exp() + 0.2
                }
            }),
        )
        .with_breakpoints(vec![1.0]),
        TruthName::Sigma3 => TruthProfile::new(
            name,
            "sigma3",
            Arc::new(|z: f64| if (0.5..=1.5).contains(&z) { 2.0 } else { 0.2 }),
        )
        .with_breakpoints(vec![0.5, 1.5]),
        TruthName::Custom => return Err(Error::invalid("custom profiles have no built-in definition")),
    })
}

impl FromStr for TruthName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma1" => Ok(Self::Sigma1),
            "sigma2" => Ok(Self::Sigma2),
            "sigma3" => Ok(Self::Sigma3),
            other => Err(Error::invalid(format!("unknown conductivity profile '{other}'"))),
        }
    }
}

/// Problems addressable by name: `tp1`, `tp2`, `fdem:sigma1|2|3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemName {
    Tp1,
    Tp2,
    Fdem(TruthName),
}

impl ProblemName {
    pub fn is_fdem(&self) -> bool {
        matches!(self, Self::Fdem(_))
    }

    /// Discrepancy safety factor used by default.
    pub fn default_tau(&self) -> f64 {
        if self.is_fdem() {
            1.3
        } else {
            1.1
        }
    }

    /// FDEM noise perturbs the shifted readings; the artificial problems
    /// perturb the raw right-hand side.
    pub fn noise_target(&self) -> crate::regparam::NoiseTarget {
        if self.is_fdem() {
            crate::regparam::NoiseTarget::Shifted
        } else {
            crate::regparam::NoiseTarget::Raw
        }
    }

    pub fn build(&self, n: usize) -> Result<ProblemSpec> {
        match self {
            Self::Tp1 => test_problem_1(n),
            Self::Tp2 => test_problem_2(n),
            Self::Fdem(t) => fdem_problem(&FdemConfig::new(n), truth_profile(*t)?),
        }
    }
}

impl FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tp1" => Ok(Self::Tp1),
            "tp2" => Ok(Self::Tp2),
            _ => match s.strip_prefix("fdem:") {
                Some(t) => Ok(Self::Fdem(t.parse()?)),
                None => Err(Error::invalid(format!(
                    "unknown problem '{s}' (expected tp1, tp2, fdem:sigma1, fdem:sigma2 or fdem:sigma3)"
                ))),
            },
        }
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tp1 => f.write_str("tp1"),
            Self::Tp2 => f.write_str("tp2"),
            Self::Fdem(TruthName::Sigma1) => f.write_str("fdem:sigma1"),
            Self::Fdem(TruthName::Sigma2) => f.write_str("fdem:sigma2"),
            Self::Fdem(TruthName::Sigma3) => f.write_str("fdem:sigma3"),
            Self::Fdem(TruthName::Custom) => f.write_str("fdem:custom"),
        }
    }
}
