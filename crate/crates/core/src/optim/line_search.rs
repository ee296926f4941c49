//! Bracketing/zoom line search for the Wolfe conditions.

use crate::error::{domain, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOptions<T> {
    pub c1: T,
    pub c2: T,
    pub alpha_init: T,
    /// Largest admissible step. A step at this cap that satisfies sufficient
    /// decrease but not curvature is accepted and flagged.
    pub alpha_max: T,
    pub max_evaluations: usize,
}

impl<T: Real> Default for LineSearchOptions<T> {
    fn default() -> Self {
        Self { c1: T::lit(1e-4), c2: T::lit(0.9), alpha_init: T::one(), alpha_max: T::lit(1e10), max_evaluations: 100 }
    }
}

/// Accepted step with the values needed to re-check the conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchStep<T> {
    pub alpha: T,
    pub value: T,
    pub slope: T,
    pub evaluations: usize,
    pub curvature_satisfied: bool,
}

/// The search ran out of evaluations or its bracket collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchFailure {
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Sample<T> {
    alpha: T,
    value: T,
    slope: T,
}

/// Finds a step satisfying
/// `phi(a) <= phi(0) + c1 a phi'(0)` and `|phi'(a)| <= c2 |phi'(0)|`
/// (the strong form, which implies the weak one).
///
/// `phi` returns `(phi(a), phi'(a))`, or `None` outside the domain. The step
/// returned is always the last point evaluated, so callers may cache it.
pub fn wolfe_line_search<T: Real, F: FnMut(T) -> Option<(T, T)>>(
    mut phi: F,
    value0: T,
    slope0: T,
    opts: &LineSearchOptions<T>,
) -> Result<std::result::Result<LineSearchStep<T>, LineSearchFailure>> {
    if !(slope0 < T::zero()) {
        return Err(domain(format!("line search needs a descent direction, phi'(0) = {slope0}")));
    }
    if !(T::zero() < opts.c1 && opts.c1 < opts.c2 && opts.c2 < T::one()) {
        return Err(domain("Wolfe constants must satisfy 0 < c1 < c2 < 1"));
    }
    let mut evals = 0usize;
    let mut eval = |a: T, evals: &mut usize| -> Sample<T> {
        *evals += 1;
        match phi(a) {
            Some((v, s)) if v.is_finite() && s.is_finite() => Sample { alpha: a, value: v, slope: s },
            _ => Sample { alpha: a, value: T::infinity(), slope: T::nan() },
        }
    };
    let armijo = |s: &Sample<T>| s.value <= value0 + opts.c1 * s.alpha * slope0;
    let curvature = |s: &Sample<T>| s.slope.abs() <= -opts.c2 * slope0;
    let accept = |s: Sample<T>, evals: usize, curv: bool| {
        Ok(Ok(LineSearchStep {
            alpha: s.alpha,
            value: s.value,
            slope: s.slope,
            evaluations: evals,
            curvature_satisfied: curv,
        }))
    };

    let mut prev = Sample { alpha: T::zero(), value: value0, slope: slope0 };
    let mut alpha = opts.alpha_init.min(opts.alpha_max);
    let mut first = true;
    loop {
        if evals >= opts.max_evaluations {
            return Ok(Err(LineSearchFailure { evaluations: evals }));
        }
        let cur = eval(alpha, &mut evals);
        if !armijo(&cur) || (!first && cur.value >= prev.value) {
            return zoom(&mut eval, prev, cur, opts, evals, &armijo, &curvature).map(|r| {
                r.map(|(s, n)| LineSearchStep {
                    alpha: s.alpha,
                    value: s.value,
                    slope: s.slope,
                    evaluations: n,
                    curvature_satisfied: true,
                })
            });
        }
        if curvature(&cur) {
            return accept(cur, evals, true);
        }
        if cur.slope >= T::zero() {
            return zoom(&mut eval, cur, prev, opts, evals, &armijo, &curvature).map(|r| {
                r.map(|(s, n)| LineSearchStep {
                    alpha: s.alpha,
                    value: s.value,
                    slope: s.slope,
                    evaluations: n,
                    curvature_satisfied: true,
                })
            });
        }
        if alpha >= opts.alpha_max {
            // still descending at the cap
            return accept(cur, evals, false);
        }
        prev = cur;
        first = false;
        alpha = (alpha * T::lit(2.0)).min(opts.alpha_max);
    }
}

fn zoom<T: Real, E, A, C>(
    eval: &mut E,
    mut lo: Sample<T>,
    mut hi: Sample<T>,
    opts: &LineSearchOptions<T>,
    mut evals: usize,
    armijo: &A,
    curvature: &C,
) -> Result<std::result::Result<(Sample<T>, usize), LineSearchFailure>>
where
    E: FnMut(T, &mut usize) -> Sample<T>,
    A: Fn(&Sample<T>) -> bool,
    C: Fn(&Sample<T>) -> bool,
{
    loop {
        if evals >= opts.max_evaluations {
            return Ok(Err(LineSearchFailure { evaluations: evals }));
        }
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width <= T::epsilon() * b.max(T::min_positive_value()) {
            return Ok(Err(LineSearchFailure { evaluations: evals }));
        }
        let margin = T::lit(0.1) * width;
        let mut trial = interpolate(&lo, &hi);
        if !(trial.is_finite() && trial >= a + margin && trial <= b - margin) {
            trial = (lo.alpha + hi.alpha) * T::lit(0.5);
        }
        let cur = eval(trial, &mut evals);
        if !armijo(&cur) || cur.value >= lo.value {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Ok(Ok((cur, evals)));
            }
            if cur.slope * (hi.alpha - lo.alpha) >= T::zero() {
                hi = lo;
            }
            lo = cur;
        }
    }
}

/// Cubic interpolation through both samples when both are finite,
/// quadratic through `lo` and `hi.value` when only the slope at `hi` is missing.
fn interpolate<T: Real>(lo: &Sample<T>, hi: &Sample<T>) -> T {
    let (a, b) = (lo.alpha, hi.alpha);
    if !hi.value.is_finite() {
        return T::nan();
    }
    if !hi.slope.is_finite() {
        let h = b - a;
        let denom = T::lit(2.0) * (hi.value - lo.value - lo.slope * h);
        return a - lo.slope * h * h / denom;
    }
    let d1 = lo.slope + hi.slope - T::lit(3.0) * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < T::zero() {
        return T::nan();
    }
    let d2 = (b - a).signum() * disc.sqrt();
    b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + T::lit(2.0) * d2)
}
