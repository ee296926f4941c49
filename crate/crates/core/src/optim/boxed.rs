//! Box-constrained BFGS: generalized Cauchy point, subspace step, projection.

use log::debug;

use super::bfgs::{bfgs_update, Probe};
use super::dense::{cholesky, cholesky_solve, dot, identity, inf_norm, is_positive_definite, matvec};
use super::line_search::wolfe_line_search;
use super::{BoxBounds, OptimizerConfig, OptimizerReport, StepRecord, Termination, TraceRow};
use crate::error::{domain, Result};
use crate::scalar::Real;

/// Componentwise clamp onto the box.
pub fn project<T: Real>(x: &[T], bounds: &BoxBounds<T>) -> Vec<T> {
    x.iter().zip(bounds.lower().iter().zip(bounds.upper())).map(|(&v, (&l, &u))| v.max(l).min(u)).collect()
}

/// Result of the piecewise search along the projected steepest-descent path.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyPoint<T> {
    pub point: Vec<T>,
    /// Coordinates that reached a bound along the path.
    pub fixed: Vec<bool>,
    /// Path parameter `t` of the minimizer, `x(t) = P(x - t g)`.
    pub t: T,
}

/// First local minimizer of `q(z) = g^T (z - x) + (z - x)^T B (z - x) / 2`
/// along `z(t) = P(x - t g)`, `t >= 0`.
///
/// The path is linear between consecutive breakpoints (where a coordinate hits
/// its bound), so each segment is minimized in closed form.
pub fn cauchy_point<T: Real>(x: &[T], g: &[T], b: &[T], bounds: &BoxBounds<T>) -> CauchyPoint<T> {
    let n = x.len();
    let mut breaks: Vec<(T, usize)> = Vec::new();
    let mut fixed = vec![false; n];
    for i in 0..n {
        let t = if g[i] < T::zero() {
            (x[i] - bounds.upper()[i]) / g[i]
        } else if g[i] > T::zero() {
            (x[i] - bounds.lower()[i]) / g[i]
        } else {
            T::infinity()
        };
        if t <= T::zero() {
            fixed[i] = g[i] != T::zero();
        } else if t.is_finite() {
            breaks.push((t, i));
        }
    }
    breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite breakpoints"));

    let mut d: Vec<T> = (0..n).map(|i| if fixed[i] || g[i] == T::zero() { T::zero() } else { -g[i] }).collect();
    let mut z = vec![T::zero(); n];
    let mut t_prev = T::zero();
    let mut next = 0;
    loop {
        if d.iter().all(|v| *v == T::zero()) {
            break;
        }
        let bd = matvec(b, &d);
        let slope = dot(g, &d) + dot(&bd, &z);
        let curv = dot(&d, &bd);
        if slope >= T::zero() {
            break;
        }
        let t_next = breaks.get(next).map_or(T::infinity(), |bp| bp.0);
        let dt = if curv > T::zero() { -slope / curv } else { T::infinity() };
        if dt < t_next - t_prev {
            for i in 0..n {
                z[i] += dt * d[i];
            }
            t_prev += dt;
            break;
        }
        if !t_next.is_finite() {
            // unbounded descent along a ray; stop at the last finite point
            break;
        }
        let step = t_next - t_prev;
        for i in 0..n {
            z[i] += step * d[i];
        }
        t_prev = t_next;
        while next < breaks.len() && breaks[next].0 <= t_next {
            let i = breaks[next].1;
            d[i] = T::zero();
            fixed[i] = true;
            next += 1;
        }
    }
    let mut point: Vec<T> = x.iter().zip(&z).map(|(a, b)| *a + *b).collect();
    for &(t, i) in &breaks[..next] {
        if t <= t_prev {
            point[i] = if g[i] < T::zero() { bounds.upper()[i] } else { bounds.lower()[i] };
        }
    }
    let point = project(&point, bounds);
    CauchyPoint { point, fixed, t: t_prev }
}

fn projected_gradient_norm<T: Real>(x: &[T], g: &[T], bounds: &BoxBounds<T>) -> T {
    let shifted: Vec<T> = x.iter().zip(g).map(|(a, b)| *a - *b).collect();
    let p = project(&shifted, bounds);
    p.iter().zip(x).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
}

/// Direct BFGS update of the Hessian approximation.
fn direct_update<T: Real>(b: &mut [T], s: &[T], y: &[T]) {
    let n = s.len();
    let bs = matvec(b, s);
    let sbs = dot(s, &bs);
    let ys = dot(y, s);
    if !(sbs > T::zero()) || !(ys > T::zero()) {
        return;
    }
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] += y[i] * y[j] / ys - bs[i] * bs[j] / sbs;
        }
    }
}

/// Minimizes `f` over a box from a feasible `x0`.
///
/// Each iteration minimizes the quadratic model along the projected gradient
/// path (Cauchy point), then over the still-free coordinates, projects, and
/// runs a line search on `x + a (x~ - x)`, `a in (0, 1]`. A step that reaches
/// `a = 1` while still descending is accepted with `curvature_satisfied =
/// false` in its [`StepRecord`].
pub fn box_bfgs_minimize<T: Real, F: FnMut(&[T]) -> Option<(T, Vec<T>)>>(
    mut f: F,
    x0: &[T],
    bounds: &BoxBounds<T>,
    config: &OptimizerConfig<T>,
) -> Result<OptimizerReport<T>> {
    config.validate()?;
    let n = x0.len();
    if n == 0 || bounds.len() != n {
        return Err(domain(format!("starting point has {n} entries, bounds have {}", bounds.len())));
    }
    if let Some(i) = (0..n).find(|&i| !(bounds.lower()[i] <= x0[i] && x0[i] <= bounds.upper()[i])) {
        return Err(domain(format!(
            "starting coordinate {i} = {} lies outside [{}, {}]",
            x0[i],
            bounds.lower()[i],
            bounds.upper()[i]
        )));
    }
    let mut probe = Probe::new(&mut f);
    let (mut fx, mut g) = probe.eval(x0).ok_or_else(|| domain("objective is not finite at the starting point"))?;
    let mut x = x0.to_vec();
    let mut h = identity(n, T::one());
    let mut b = identity(n, T::one());
    let mut scaled = false;
    let mut trace =
        vec![TraceRow { iteration: 0, loss: fx, grad_norm: projected_gradient_norm(&x, &g, bounds), evaluations: 1 }];
    let mut steps = Vec::new();
    let mut iterations = 0;

    let termination = loop {
        if projected_gradient_norm(&x, &g, bounds) <= config.gradient_tolerance {
            break Termination::GradientTol;
        }
        if iterations >= config.max_iterations {
            break Termination::MaxIter;
        }
        if probe.evaluations >= config.max_evaluations {
            break Termination::MaxEval;
        }
        let (p, slope) = match search_direction(&x, &g, &b, bounds) {
            Some(d) => d,
            None if scaled => {
                debug!("no feasible descent from the model, resetting the quasi-Newton matrices");
                h = identity(n, T::one());
                b = identity(n, T::one());
                scaled = false;
                continue;
            }
            None => break Termination::LineSearchFail,
        };
        let budget = config.max_evaluations - probe.evaluations;
        let opts = config.line_search(T::one(), T::one(), budget);
        let x_ref = x.clone();
        let outcome = wolfe_line_search(
            |a| {
                let xt: Vec<T> = x_ref.iter().zip(&p).map(|(xi, pi)| *xi + a * *pi).collect();
                let xt = project(&xt, bounds);
                probe.eval(&xt).map(|(v, gt)| (v, dot(&gt, &p)))
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
                b = identity(n, yy / ys);
                scaled = true;
            }
        }
        let applied = bfgs_update(&mut h, &s, &y);
        if applied {
            direct_update(&mut b, &s, &y);
        }
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
            grad_norm: projected_gradient_norm(&x, &g, bounds),
            evaluations: probe.evaluations,
        });
        if config.loss_tolerance > T::zero() && decrease <= config.loss_tolerance * fx.abs().max(T::one()) {
            break Termination::LossTol;
        }
    };

    let evaluations = probe.evaluations;
    Ok(OptimizerReport {
        active_bounds: bounds.active(&x),
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

/// `(p, g^T p)` with `p = x~ - x`, or `None` if no descent direction exists.
fn search_direction<T: Real>(x: &[T], g: &[T], b: &[T], bounds: &BoxBounds<T>) -> Option<(Vec<T>, T)> {
    let n = x.len();
    let cp = cauchy_point(x, g, b, bounds);
    let dc: Vec<T> = cp.point.iter().zip(x).map(|(a, b)| *a - *b).collect();

    let free: Vec<usize> = (0..n)
        .filter(|&i| !cp.fixed[i] && bounds.lower()[i] < cp.point[i] && cp.point[i] < bounds.upper()[i])
        .collect();
    let mut target = cp.point.clone();
    if !free.is_empty() {
        // reduced gradient of the model at the Cauchy point
        let bdc = matvec(b, &dc);
        let rhs: Vec<T> = free.iter().map(|&i| -(g[i] + bdc[i])).collect();
        let k = free.len();
        let mut bff = vec![T::zero(); k * k];
        for (a, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                bff[a * k + c] = b[i * n + j];
            }
        }
        if let Some(l) = cholesky(&bff, k) {
            let d = cholesky_solve(&l, &rhs);
            for (a, &i) in free.iter().enumerate() {
                target[i] += d[a];
            }
            target = project(&target, bounds);
        }
    }
    let p: Vec<T> = target.iter().zip(x).map(|(a, b)| *a - *b).collect();
    let slope = dot(g, &p);
    if slope < T::zero() {
        return Some((p, slope));
    }
    let slope = dot(g, &dc);
    if slope < T::zero() && inf_norm(&dc) > T::zero() {
        return Some((dc, slope));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(l: &[f64], u: &[f64]) -> BoxBounds<f64> {
        BoxBounds::new(l.to_vec(), u.to_vec()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let b = bounds(&[0.0], &[1.0]);
        assert_eq!(project(&[5.0], &b), vec![1.0]);
        assert_eq!(project(&[0.3], &b), vec![0.3]);
        assert_eq!(project(&[-3.0, 0.5], &bounds(&[0.0, 0.0], &[1.0, 1.0])), vec![0.0, 0.5]);
    }

    #[test]
    fn cauchy_point_clamps_before_the_model_minimum() {
        // q(x) = x^2 at x = 2: gradient 4, Hessian 2
        let cp = cauchy_point(&[2.0], &[4.0], &[2.0], &bounds(&[1.0], &[3.0]));
        assert_eq!(cp.point, vec![1.0]);
        assert!(cp.fixed[0]);
    }

    #[test]
    fn cauchy_point_without_active_bounds_is_the_exact_steepest_descent_step() {
        let cp = cauchy_point(&[2.0, 1.0], &[4.0, 2.0], &[2.0, 0.0, 0.0, 2.0], &BoxBounds::<f64>::unbounded(2));
        assert!((cp.point[0]).abs() < 1e-15 && (cp.point[1]).abs() < 1e-15);
        assert!((cp.t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_leaves_point_unchanged() {
        let cp = cauchy_point(&[0.5, 0.5], &[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &bounds(&[0.0, 0.0], &[1.0, 1.0]));
        assert_eq!(cp.point, vec![0.5, 0.5]);
    }

    #[test]
    fn cauchy_path_bends_at_the_box_edge() {
        // q(z) = |z - c|^2 with c = (2, 0.5) outside the unit box, start at origin
        let x = [0.0, 0.0];
        let c = [2.0, 0.5];
        let g = [-2.0 * c[0], -2.0 * c[1]];
        let hess = [2.0, 0.0, 0.0, 2.0];
        let bx = bounds(&[0.0, 0.0], &[1.0, 1.0]);
        let cp = cauchy_point(&x, &g, &hess, &bx);
        // dense scan of q(P(x - t g))
        let q = |z: &[f64]| (z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2);
        let mut best = (f64::INFINITY, vec![]);
        for k in 0..=200_000 {
            let t = k as f64 * 1e-5;
            let z = project(&[x[0] - t * g[0], x[1] - t * g[1]], &bx);
            let v = q(&z);
            if v < best.0 - 1e-15 {
                best = (v, z);
            } else if v > best.0 + 1e-12 {
                break;
            }
        }
        assert!((cp.point[0] - best.1[0]).abs() < 1e-4 && (cp.point[1] - best.1[1]).abs() < 1e-4);
        assert_eq!(cp.point[0], 1.0);
        assert!((cp.point[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bounded_rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            Some((
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2),
                vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)],
            ))
        };
        let bx = bounds(&[-2.0, -2.0], &[0.8, 2.0]);
        let r = box_bfgs_minimize(f, &[-1.2, 1.0], &bx, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.solution[0], 0.8);
        assert!((r.solution[1] - 0.64).abs() < 1e-6, "{:?}", r.solution);
        assert_eq!(r.active_bounds, vec![true, false]);
        assert!(r.is_monotone());
        let mut prev = f64::INFINITY;
        for row in &r.trace {
            assert!(row.loss < prev);
            prev = row.loss;
        }
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let f = |x: &[f64]| Some((x[0] * x[0], vec![2.0 * x[0]]));
        assert!(box_bfgs_minimize(f, &[2.0], &bounds(&[0.0], &[1.0]), &OptimizerConfig::default()).is_err());
    }
}
