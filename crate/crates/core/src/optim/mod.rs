//! Quasi-Newton and derivative-free minimizers.
//!
//! Gradient-based routines take a single callback returning the value and
//! gradient at a point, or `None` when the point lies outside the objective's
//! domain (the line search then backs off).

mod bfgs;
mod boxed;
pub(crate) mod dense;
mod line_search;
mod shape;
mod simplex;
mod slise;

use std::fmt;

use crate::error::{domain, Result};
use crate::scalar::Real;

pub use bfgs::{bfgs_minimize, bfgs_update};
pub use boxed::{box_bfgs_minimize, cauchy_point, project, CauchyPoint};
pub use line_search::{wolfe_line_search, LineSearchFailure, LineSearchOptions, LineSearchStep};
pub use shape::{shape_constrained_minimize, ShapeConstraints};
pub use simplex::{nelder_mead, SimplexConfig};
pub use slise::{fit_filter, imaginary_part_bounds, FitOutcome};

/// Stopping and line-search parameters shared by the quasi-Newton solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Sufficient-decrease constant.
    pub c1: T,
    /// Curvature constant, `c1 < c2 < 1`.
    pub c2: T,
    pub max_iterations: usize,
    /// Budget on objective evaluations (value and gradient come together).
    pub max_evaluations: usize,
    /// Threshold on the infinity norm of the projected gradient.
    pub gradient_tolerance: T,
    /// Relative decrease below which the run stops; 0 disables the test.
    pub loss_tolerance: T,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            c1: T::lit(1e-4),
            c2: T::lit(0.9),
            max_iterations: 1000,
            max_evaluations: 5000,
            gradient_tolerance: T::lit(1e-8),
            loss_tolerance: T::zero(),
        }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(T::zero() < self.c1 && self.c1 < self.c2 && self.c2 < T::one()) {
            return Err(domain(format!(
                "Wolfe constants must satisfy 0 < c1 < c2 < 1, got {} and {}",
                self.c1, self.c2
            )));
        }
        if self.max_iterations == 0 || self.max_evaluations == 0 {
            return Err(domain("iteration and evaluation budgets must be positive"));
        }
        if !(self.gradient_tolerance >= T::zero()) || !(self.loss_tolerance >= T::zero()) {
            return Err(domain("tolerances must be non-negative"));
        }
        Ok(())
    }

    pub fn with_max_evaluations(mut self, n: usize) -> Self {
        self.max_evaluations = n;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_gradient_tolerance(mut self, tol: T) -> Self {
        self.gradient_tolerance = tol;
        self
    }

    fn line_search(&self, alpha_init: T, alpha_max: T, budget: usize) -> LineSearchOptions<T> {
        LineSearchOptions { c1: self.c1, c2: self.c2, alpha_init, alpha_max, max_evaluations: budget.min(100) }
    }
}

/// Elementwise bounds `lower <= x <= upper`; infinite entries are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> BoxBounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(domain(format!("{} lower but {} upper bounds", lower.len(), upper.len())));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i]) || lower[i].is_nan() || upper[i].is_nan()) {
            return Err(domain(format!("bound {i}: lower {} exceeds upper {}", lower[i], upper[i])));
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Self { lower: vec![T::neg_infinity(); n], upper: vec![T::infinity(); n] }
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.len() && x.iter().enumerate().all(|(i, &v)| self.lower[i] <= v && v <= self.upper[i])
    }

    /// Flags the coordinates sitting exactly on a bound.
    pub fn active(&self, x: &[T]) -> Vec<bool> {
        x.iter().enumerate().map(|(i, &v)| v == self.lower[i] || v == self.upper[i]).collect()
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    GradientTol,
    LossTol,
    MaxIter,
    MaxEval,
    LineSearchFail,
}

impl Termination {
    /// True for the two tolerance-based stops.
    pub fn converged(self) -> bool {
        matches!(self, Termination::GradientTol | Termination::LossTol)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::GradientTol => "gradient-tolerance",
            Termination::LossTol => "loss-tolerance",
            Termination::MaxIter => "max-iterations",
            Termination::MaxEval => "max-evaluations",
            Termination::LineSearchFail => "line-search-failure",
        };
        f.write_str(s)
    }
}

/// One row of the iteration trace; row 0 describes the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub loss: T,
    pub grad_norm: T,
    pub evaluations: usize,
}

/// Diagnostics of one accepted quasi-Newton step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    pub alpha: T,
    pub value_before: T,
    pub slope_before: T,
    pub value_after: T,
    pub slope_after: T,
    /// False only for box steps clipped at the feasible segment end.
    pub curvature_satisfied: bool,
    pub update_applied: bool,
    /// Cholesky test on the inverse-Hessian approximation after the update.
    pub inverse_hessian_spd: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport<T> {
    pub solution: Vec<T>,
    pub final_loss: T,
    pub final_gradient: Vec<T>,
    pub iterations: usize,
    pub loss_evaluations: usize,
    pub gradient_evaluations: usize,
    pub termination: Termination,
    pub active_bounds: Vec<bool>,
    pub trace: Vec<TraceRow<T>>,
    pub steps: Vec<StepRecord<T>>,
}

impl<T: Real> OptimizerReport<T> {
    /// Strict decrease along the recorded trace.
    pub fn is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].loss < w[0].loss)
    }
}
