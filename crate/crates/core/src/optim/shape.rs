//! SLiSe fitting with pointwise caps on `|r|` outside the interval.

use log::{debug, warn};
use num_complex::Complex;

use super::slise::{check_bound, feasible_start, imaginary_part_bounds};
use super::{bfgs_minimize, box_bfgs_minimize, FitOutcome, OptimizerConfig};
use crate::error::{domain, Result};
use crate::filter::RationalFilter;
use crate::loss::{filter_from_real, from_real, SliseObjective};
use crate::scalar::Real;

const MAX_ROUNDS: usize = 8;
const PENALTY_GROWTH: f64 = 10.0;
/// Absolute slack allowed on each cap.
pub const CAP_SLACK: f64 = 1e-8;

/// Caps `|r(x_i)| <= C_i` at points `1 < x_1 < ... < x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeConstraints<T> {
    points: Vec<T>,
    caps: Vec<T>,
}

impl<T: Real> ShapeConstraints<T> {
    pub fn new(points: Vec<T>, caps: Vec<T>) -> Result<Self> {
        if points.len() != caps.len() {
            return Err(domain(format!("{} points but {} caps", points.len(), caps.len())));
        }
        let mut prev = T::one();
        for &x in &points {
            if !(x > prev) || !x.is_finite() {
                return Err(domain("constraint points must be finite and satisfy 1 < x_1 < ... < x_k"));
            }
            prev = x;
        }
        if caps.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(domain("caps must be positive and finite"));
        }
        Ok(Self { points, caps })
    }

    /// Caps `C_i = (1 + c) |r_0(x_i)|` relative to a reference filter.
    pub fn relative_to(reference: &RationalFilter<T>, points: Vec<T>, c: T) -> Result<Self> {
        if !(c > T::zero() && c < T::one()) {
            return Err(domain(format!("relative slack c must lie in (0, 1), got {c}")));
        }
        let caps = points.iter().map(|&x| (T::one() + c) * reference.value(x).abs()).collect();
        Self::new(points, caps)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn caps(&self) -> &[T] {
        &self.caps
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `|r(x_i)| - C_i` (non-positive when every cap holds).
    pub fn max_violation(&self, filter: &RationalFilter<T>) -> T {
        self.points.iter().zip(&self.caps).map(|(&x, &c)| filter.value(x).abs() - c).fold(T::neg_infinity(), T::max)
    }
}

/// `r(x)` and its gradient with respect to the real embedding.
fn value_and_gradient<T: Real>(beta: &[Complex<T>], w: &[Complex<T>], x: T) -> (T, Vec<T>) {
    let m = beta.len();
    let two = T::lit(2.0);
    let xc = Complex::new(x, T::zero());
    let mut grad = vec![T::zero(); 4 * m];
    let mut value = T::zero();
    for k in 0..m {
        let (a, b) = ((xc - w[k]).inv(), (xc + w[k]).inv());
        let phi = a - b;
        let dphi = a * a + b * b;
        value += two * (beta[k] * phi).re;
        grad[k] = two * phi.re;
        grad[m + k] = -two * phi.im;
        let t = beta[k] * dphi;
        grad[2 * m + k] = two * t.re;
        grad[3 * m + k] = -two * t.im;
    }
    (value, grad)
}

/// Quadratic-penalty SLiSe fit subject to `constraints`.
///
/// The penalty `mu sum (max(0, |r(x_i)| - C_i) / C_i)^2` starts at `mu` equal
/// to the starting residual and grows tenfold per round (at most eight rounds),
/// each round warm-started from the previous one. If the final iterate still
/// breaks a cap by more than [`CAP_SLACK`], the best iterate that honored every
/// cap is returned instead. The reported `final_loss` is the plain residual.
pub fn shape_constrained_minimize<T: Real>(
    objective: &SliseObjective<T>,
    start: &RationalFilter<T>,
    constraints: &ShapeConstraints<T>,
    lb: Option<T>,
    config: &OptimizerConfig<T>,
) -> Result<FitOutcome<T>> {
    if constraints.is_empty() {
        return super::fit_filter(objective, start, lb, config);
    }
    if start.m() != objective.m() {
        return Err(domain(format!("start has {} poles, objective expects {}", start.m(), objective.m())));
    }
    check_bound(lb)?;
    let slack = T::lit(CAP_SLACK);
    let x0 = feasible_start(start, lb)?;
    let start_filter = filter_from_real(&x0)?;
    assert!(constraints.max_violation(&start_filter) <= slack, "start violates its own caps");
    let bounds = lb.map(|lb| imaginary_part_bounds(start.m(), lb));
    let base = objective.loss_real(&x0)?;
    let mut mu = base.max(T::epsilon());
    let mut x = x0.clone();
    let mut best_feasible = (base, x0);
    let mut combined: Option<super::OptimizerReport<T>> = None;

    for round in 0..MAX_ROUNDS {
        let penalized = |v: &[T]| {
            let (f, mut g) = objective.loss_and_real_gradient(v).ok()?;
            let (beta, w) = from_real(v).ok()?;
            let mut total = f;
            for (&xi, &ci) in constraints.points.iter().zip(&constraints.caps) {
                let (r, dr) = value_and_gradient(&beta, &w, xi);
                let excess = r.abs() - ci;
                if excess > T::zero() {
                    let rel = excess / ci;
                    total += mu * rel * rel;
                    let scale = T::lit(2.0) * mu * rel / ci * r.signum();
                    for (gi, di) in g.iter_mut().zip(&dr) {
                        *gi += scale * *di;
                    }
                }
            }
            Some((total, g))
        };
        let report = match &bounds {
            None => bfgs_minimize(penalized, &x, config)?,
            Some(b) => box_bfgs_minimize(penalized, &x, b, config)?,
        };
        x = report.solution.clone();
        let filter = filter_from_real(&x)?;
        let violation = constraints.max_violation(&filter);
        let loss = objective.loss_real(&x)?;
        debug!("shape round {round}: mu = {mu:e}, residual = {loss:e}, worst cap excess = {violation:e}");
        if violation <= slack && loss < best_feasible.0 {
            best_feasible = (loss, x.clone());
        }
        combined = Some(match combined {
            None => report,
            Some(mut acc) => {
                let offset = acc.loss_evaluations;
                let it = acc.iterations;
                acc.trace.extend(report.trace.iter().skip(1).map(|row| super::TraceRow {
                    iteration: row.iteration + it,
                    evaluations: row.evaluations + offset,
                    ..*row
                }));
                acc.steps.extend(report.steps);
                acc.iterations += report.iterations;
                acc.loss_evaluations += report.loss_evaluations;
                acc.gradient_evaluations += report.gradient_evaluations;
                acc.solution = report.solution;
                acc.final_gradient = report.final_gradient;
                acc.termination = report.termination;
                acc.active_bounds = report.active_bounds;
                acc
            }
        });
        if violation <= slack {
            break;
        }
        mu = mu * T::lit(PENALTY_GROWTH);
    }

    let mut report = combined.expect("at least one round");
    let (loss, x) = best_feasible;
    if report.solution != x {
        warn!("penalty rounds ended outside the caps; returning the best feasible iterate");
        report.solution = x.clone();
    }
    report.final_loss = loss;
    let filter = filter_from_real(&x)?;
    Ok(FitOutcome { filter, loss, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::to_real;
    use crate::tables::BuiltinFilter;

    #[test]
    fn filter_gradient_matches_finite_differences() {
        let f = BuiltinFilter::GammaSlise16.filter::<f64>();
        let v = to_real(f.coeffs(), f.poles());
        let x = 1.7;
        let (r, g) = value_and_gradient(f.coeffs(), f.poles(), x);
        assert!((r - f.value(x)).abs() < 1e-15);
        for i in 0..v.len() {
            let h = 1e-7;
            let mut a = v.clone();
            let mut b = v.clone();
            a[i] += h;
            b[i] -= h;
            let (ba, wa) = from_real(&a).unwrap();
            let (bb, wb) = from_real(&b).unwrap();
            let fd = (value_and_gradient(&ba, &wa, x).0 - value_and_gradient(&bb, &wb, x).0) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "slot {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn constraint_validation() {
        assert!(ShapeConstraints::new(vec![0.5], vec![1.0]).is_err());
        assert!(ShapeConstraints::new(vec![2.0, 1.5], vec![1.0, 1.0]).is_err());
        assert!(ShapeConstraints::new(vec![2.0], vec![0.0]).is_err());
        let f = BuiltinFilter::GaussLegendre16.filter::<f64>();
        assert!(ShapeConstraints::relative_to(&f, vec![2.0], 1.5).is_err());
    }
}
