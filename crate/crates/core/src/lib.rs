//! Rational filters for subspace iteration on Hermitian interior eigenproblems.
//!
//! The crate covers the whole pipeline: building and evaluating filters,
//! weighted least-squares objectives with analytic gradients, quasi-Newton
//! optimizers (unconstrained and box constrained), convergence-rate analysis,
//! weight-function design, and a small subspace-iteration simulator.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod design;
pub mod error;
pub mod filter;
pub mod gauss;
pub mod io;
pub mod loss;
pub mod optim;
pub mod quadrature;
pub mod rate;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod tables;
pub mod weight;

pub use error::{Error, Result};
pub use filter::{canonicalize, RationalFilter, SearchInterval};
pub use gauss::{gauss_legendre_filter, gauss_legendre_rule};
pub use loss::{from_real, real_gradient, to_real, SliseObjective};
pub use rate::{expected_rate, predicted_iterations, worst_case_rate, EigenvalueDensity, Gap};
pub use report::FilterFamily;
pub use scalar::Real;
pub use tables::{builtin_filter, BuiltinFilter};
pub use weight::{builtin_weight, BuiltinWeight, StepWeightFunction};

pub type Filter = RationalFilter<f64>;
pub type Weight = StepWeightFunction<f64>;
pub type Objective = SliseObjective<f64>;
pub type Problem = sim::SyntheticProblem<f64>;
pub type Density = EigenvalueDensity<f64>;
