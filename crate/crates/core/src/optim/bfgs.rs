//! Unconstrained BFGS with inverse-Hessian updates.

use log::debug;

use super::dense::{dot, identity, inf_norm, is_positive_definite, matvec};
use super::line_search::wolfe_line_search;
use super::{OptimizerConfig, OptimizerReport, StepRecord, Termination, TraceRow};
use crate::error::{domain, Result};
use crate::scalar::Real;

/// In-place update `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`,
/// `rho = 1/(y^T s)`.
///
/// Returns `false` and leaves `h` untouched when `y^T s <= 0`.
pub fn bfgs_update<T: Real>(h: &mut [T], s: &[T], y: &[T]) -> bool {
    let n = s.len();
    debug_assert_eq!(h.len(), n * n);
    let ys = dot(y, s);
    if !(ys > T::zero()) || !ys.is_finite() {
        debug!("skipping BFGS update, y^T s = {ys:e}");
        return false;
    }
    let rho = T::one() / ys;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
    // keep exact symmetry
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (h[i * n + j] + h[j * n + i]) * T::lit(0.5);
            h[i * n + j] = avg;
            h[j * n + i] = avg;
        }
    }
    true
}

/// Evaluation state shared between the driver and its line searches.
pub(super) struct Probe<'a, T, F> {
    pub(super) f: &'a mut F,
    pub(super) evaluations: usize,
    last: Option<(Vec<T>, T, Vec<T>)>,
}

impl<'a, T: Real, F: FnMut(&[T]) -> Option<(T, Vec<T>)>> Probe<'a, T, F> {
    pub(super) fn new(f: &'a mut F) -> Self {
        Self { f, evaluations: 0, last: None }
    }

    pub(super) fn eval(&mut self, x: &[T]) -> Option<(T, Vec<T>)> {
        self.evaluations += 1;
        let out = (self.f)(x).filter(|(v, g)| v.is_finite() && g.iter().all(|c| c.is_finite()));
        self.last = out.as_ref().map(|(v, g)| (x.to_vec(), *v, g.clone()));
        out
    }

    pub(super) fn take_last(&mut self) -> Option<(Vec<T>, T, Vec<T>)> {
        self.last.take()
    }
}

/// Minimizes a smooth function from `x0`.
///
/// `f` returns value and gradient, or `None` outside its domain. The
/// inverse-Hessian approximation starts at the identity and is rescaled by
/// `y^T s / y^T y` once, right before the first update.
pub fn bfgs_minimize<T: Real, F: FnMut(&[T]) -> Option<(T, Vec<T>)>>(
    mut f: F,
    x0: &[T],
    config: &OptimizerConfig<T>,
) -> Result<OptimizerReport<T>> {
    config.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(domain("empty starting point"));
    }
    let mut probe = Probe::new(&mut f);
    let (mut fx, mut g) = probe.eval(x0).ok_or_else(|| domain("objective is not finite at the starting point"))?;
    let mut x = x0.to_vec();
    let mut h = identity(n, T::one());
    let mut scaled = false;
    let mut trace = vec![TraceRow { iteration: 0, loss: fx, grad_norm: inf_norm(&g), evaluations: 1 }];
    let mut steps = Vec::new();
    let mut iterations = 0;

    let termination = loop {
        if inf_norm(&g) <= config.gradient_tolerance {
            break Termination::GradientTol;
        }
        if iterations >= config.max_iterations {
            break Termination::MaxIter;
        }
        if probe.evaluations >= config.max_evaluations {
            break Termination::MaxEval;
        }
        let mut p: Vec<T> = matvec(&h, &g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &p);
        if !(slope < T::zero()) {
            debug!("quasi-Newton direction is not descent, resetting to steepest descent");
            h = identity(n, T::one());
            scaled = false;
            p = g.iter().map(|v| -*v).collect();
            slope = dot(&g, &p);
        }
        let alpha_init = if iterations == 0 && !scaled { T::one().min(T::one() / inf_norm(&g)) } else { T::one() };
        let budget = config.max_evaluations - probe.evaluations;
        let opts = config.line_search(alpha_init, T::lit(1e10), budget);
        let x_ref = x.clone();
        let p_ref = p.clone();
        let outcome = wolfe_line_search(
            |a| {
                let xt: Vec<T> = x_ref.iter().zip(&p_ref).map(|(xi, pi)| *xi + a * *pi).collect();
                probe.eval(&xt).map(|(v, gt)| (v, dot(&gt, &p_ref)))
            },
            fx,
            slope,
            &opts,
        )?;
        let step = match outcome {
            Ok(step) => step,
            Err(_) if probe.evaluations >= config.max_evaluations => break Termination::MaxEval,
            Err(_) => break Termination::LineSearchFail,
        };
        let (x_new, f_new, g_new) = probe.take_last().expect("accepted step was just evaluated");
        let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        if !scaled {
            let (ys, yy) = (dot(&y, &s), dot(&y, &y));
            if ys > T::zero() && yy > T::zero() {
                h = identity(n, ys / yy);
                scaled = true;
            }
        }
        let applied = bfgs_update(&mut h, &s, &y);
        steps.push(StepRecord {
            alpha: step.alpha,
            value_before: fx,
            slope_before: slope,
            value_after: step.value,
            slope_after: step.slope,
            curvature_satisfied: step.curvature_satisfied,
            update_applied: applied,
            inverse_hessian_spd: is_positive_definite(&h, n),
        });
        let decrease = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        iterations += 1;
        trace.push(TraceRow {
            iteration: iterations,
            loss: fx,
            grad_norm: inf_norm(&g),
            evaluations: probe.evaluations,
        });
        if config.loss_tolerance > T::zero() && decrease <= config.loss_tolerance * fx.abs().max(T::one()) {
            break Termination::LossTol;
        }
    };

    let evaluations = probe.evaluations;
    Ok(OptimizerReport {
        active_bounds: vec![false; n],
        solution: x,
        final_loss: fx,
        final_gradient: g,
        iterations,
        loss_evaluations: evaluations,
        gradient_evaluations: evaluations,
        termination,
        trace,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Some((v, g))
    }

    #[test]
    fn identity_is_a_fixed_point() {
        let mut h: Vec<f64> = vec![1.0, 0.0, 0.0, 1.0];
        assert!(bfgs_update(&mut h, &[1.0, 0.0], &[1.0, 0.0]));
        assert_eq!(h, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn hand_expanded_update() {
        // s = (1,0), y = (2,1): rho = 1/2, H' = (I - rho s y^T)(I - rho y s^T) + rho s s^T
        let mut h: Vec<f64> = vec![1.0, 0.0, 0.0, 1.0];
        assert!(bfgs_update(&mut h, &[1.0, 0.0], &[2.0, 1.0]));
        let expected = [0.75, -0.5, -0.5, 1.0];
        for (a, b) in h.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{h:?}");
        }
    }

    #[test]
    fn negative_curvature_is_skipped() {
        let mut h = vec![2.0, 0.0, 0.0, 2.0];
        assert!(!bfgs_update(&mut h, &[1.0, 0.0], &[-1.0, 0.0]));
        assert_eq!(h, vec![2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn convex_quadratic() {
        let r = bfgs_minimize(
            |x: &[f64]| Some((x[0] * x[0] + x[1] * x[1], vec![2.0 * x[0], 2.0 * x[1]])),
            &[1.0, 1.0],
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!(r.solution.iter().all(|v| v.abs() < 1e-10));
        assert_eq!(r.termination, Termination::GradientTol);
    }

    #[test]
    fn rosenbrock_valley() {
        let r = bfgs_minimize(rosenbrock, &[-1.2, 1.0], &OptimizerConfig::default()).unwrap();
        assert!(r.iterations <= 200, "{} iterations", r.iterations);
        assert!((r.solution[0] - 1.0).abs() < 1e-6 && (r.solution[1] - 1.0).abs() < 1e-6);
        assert!(r.is_monotone());
        assert!(r.steps.iter().all(|s| s.inverse_hessian_spd && s.curvature_satisfied));
    }

    #[test]
    fn starting_outside_the_domain_fails() {
        assert!(bfgs_minimize(|_: &[f64]| None, &[0.0], &OptimizerConfig::default()).is_err());
    }
}
