//! Nelder-Mead simplex search.

use super::{OptimizerReport, Termination, TraceRow};
use crate::error::{domain, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexConfig<T> {
    pub max_evaluations: usize,
    /// Stop once every vertex is within this distance (infinity norm) of the best one...
    pub x_tolerance: T,
    /// ...and the vertex values spread by less than this.
    pub f_tolerance: T,
    /// Initial edge along coordinate `i` is `relative_step * |x0_i|`, or
    /// `absolute_step` when `x0_i == 0`.
    pub relative_step: T,
    pub absolute_step: T,
}

impl<T: Real> Default for SimplexConfig<T> {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            x_tolerance: T::lit(1e-10),
            f_tolerance: T::lit(1e-12),
            relative_step: T::lit(0.1),
            absolute_step: T::lit(0.1),
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` without derivatives. Non-finite values count as `+inf`, so
/// the simplex simply moves away from them.
///
/// With a budget of zero evaluations the start is returned untouched (its
/// value is reported as NaN since it was never computed).
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    config: &SimplexConfig<T>,
) -> Result<OptimizerReport<T>> {
    let n = x0.len();
    if n == 0 {
        return Err(domain("empty starting point"));
    }
    let report = |x: Vec<T>, v: T, iterations, evaluations, termination, trace| OptimizerReport {
        active_bounds: vec![false; n],
        solution: x,
        final_loss: v,
        final_gradient: Vec::new(),
        iterations,
        loss_evaluations: evaluations,
        gradient_evaluations: 0,
        termination,
        trace,
        steps: Vec::new(),
    };
    if config.max_evaluations == 0 {
        return Ok(report(x0.to_vec(), T::nan(), 0, 0, Termination::MaxEval, Vec::new()));
    }
    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };
    let v0 = eval(x0, &mut evals);
    if !v0.is_finite() {
        return Err(domain("objective is not finite at the starting point"));
    }
    let mut simplex: Vec<(Vec<T>, T)> = vec![(x0.to_vec(), v0)];
    for i in 0..n {
        if evals >= config.max_evaluations {
            break;
        }
        let mut x = x0.to_vec();
        let step = if x0[i] != T::zero() { config.relative_step * x0[i] } else { config.absolute_step };
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut trace = vec![TraceRow { iteration: 0, loss: v0, grad_norm: T::nan(), evaluations: evals }];
    if simplex.len() < n + 1 {
        let best = best_of(&simplex);
        return Ok(report(best.0, best.1, 0, evals, Termination::MaxEval, trace));
    }

    let (alpha, gamma, rho, sigma) = (T::lit(REFLECT), T::lit(EXPAND), T::lit(CONTRACT), T::lit(SHRINK));
    let mut iterations = 0;
    let termination = loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if diameter <= config.x_tolerance && spread <= config.f_tolerance {
            break Termination::LossTol;
        }
        if evals >= config.max_evaluations {
            break Termination::MaxEval;
        }
        iterations += 1;
        let mut centroid = vec![T::zero(); n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += *v;
            }
        }
        let nf = T::from_count(n);
        centroid.iter_mut().for_each(|c| *c /= nf);
        let worst = simplex[n].clone();
        let along = |t: T| -> Vec<T> { centroid.iter().zip(&worst.0).map(|(c, w)| *c + t * (*c - *w)).collect() };

        let xr = along(alpha);
        let vr = eval(&xr, &mut evals);
        if vr < simplex[0].1 {
            let xe = along(alpha * gamma);
            let ve = if evals < config.max_evaluations { eval(&xe, &mut evals) } else { T::infinity() };
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            // outside contraction when the reflection beat the worst point, inside otherwise
            let xc = if vr < worst.1 { along(alpha * rho) } else { along(-rho) };
            let vc = if evals < config.max_evaluations { eval(&xc, &mut evals) } else { T::infinity() };
            if vc < worst.1.min(vr) {
                simplex[n] = (xc, vc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if evals >= config.max_evaluations {
                        break;
                    }
                    let xs: Vec<T> = best.iter().zip(&vertex.0).map(|(b, v)| *b + sigma * (*v - *b)).collect();
                    let vs = eval(&xs, &mut evals);
                    *vertex = (xs, vs);
                }
            }
        }
        let best = best_of(&simplex);
        trace.push(TraceRow { iteration: iterations, loss: best.1, grad_norm: T::nan(), evaluations: evals });
    };
    let best = best_of(&simplex);
    Ok(report(best.0, best.1, iterations, evals, termination, trace))
}

fn best_of<T: Real>(simplex: &[(Vec<T>, T)]) -> (Vec<T>, T) {
    simplex
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .cloned()
        .expect("simplex is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absolute_value_kink() {
        let r = nelder_mead(|x: &[f64]| (x[0] - 3.0).abs(), &[0.0], &SimplexConfig::default()).unwrap();
        assert!((r.solution[0] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + x[0] * x[1],
            &[2.0, 2.0],
            &SimplexConfig::default(),
        )
        .unwrap();
        // minimizer solves [2 1; 1 6] x = [2, -3]
        let (a, b) = (15.0 / 11.0, -8.0 / 11.0);
        assert!((r.solution[0] - a).abs() < 1e-6 && (r.solution[1] - b).abs() < 1e-6, "{:?}", r.solution);
    }

    #[test]
    fn rosenbrock_within_budget() {
        let cfg = SimplexConfig { max_evaluations: 5000, ..Default::default() };
        let r =
            nelder_mead(|x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0], &cfg)
                .unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-3 && (r.solution[1] - 1.0).abs() < 1e-3);
        assert!(r.loss_evaluations <= 5000);
    }

    #[test]
    fn zero_budget_returns_start() {
        let cfg = SimplexConfig { max_evaluations: 0, ..Default::default() };
        let r = nelder_mead(|x: &[f64]| x[0] * x[0], &[4.0], &cfg).unwrap();
        assert_eq!(r.solution, vec![4.0]);
        assert_eq!(r.termination, Termination::MaxEval);
    }

    #[test]
    fn budget_is_respected() {
        let cfg = SimplexConfig { max_evaluations: 37, ..Default::default() };
        let r = nelder_mead(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[1.0, 2.0, 3.0], &cfg).unwrap();
        assert!(r.loss_evaluations <= 37);
    }
}
