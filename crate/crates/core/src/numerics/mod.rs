//! Quadrature, special functions and the Gauss hypergeometric function.

mod annulus;
mod hypergeometric;
pub mod quadrature;
mod special;

use thiserror::Error;

pub use annulus::{annulus_integral, annulus_integral_with, PHI_NODES};
pub use hypergeometric::hyp2f1_neg;
pub use quadrature::{
    build_semi_infinite_rule, integrate, integrate_semi_infinite, try_integrate,
    try_integrate_semi_infinite, Estimate, RuleNode, Tolerance,
};
pub use special::{exp_e1, gamma, rgamma};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no convergence after {subdivisions} subdivisions (estimate {value}, error {error})")]
    NoConvergence {
        subdivisions: usize,
        value: f64,
        error: f64,
    },
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}
