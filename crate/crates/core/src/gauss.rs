//! Gauss-Legendre rules and the Gauss-Legendre rational filter.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::filter::RationalFilter;
use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes in ascending order.
///
/// Each root of `P_n` is polished by Newton iteration on the three-term
/// recurrence, starting from the Tricomi approximation, until the update
/// falls below `1e-15` (or the scalar's epsilon, whichever is coarser).
pub fn gauss_legendre_rule<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    if n == 0 {
        return (nodes, weights);
    }
    let nf = T::from_count(n);
    let tol = T::lit(1e-15).max(T::lit(4.0) * T::epsilon());
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root; Tricomi's initial guess
        let k = T::from_count(i) + T::lit(0.75);
        let mut x = (T::PI() * k / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x = x - step;
            if step.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` via the Bonnet recurrence.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::from_count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Gauss-Legendre filter of degree `4m`.
///
/// The indicator of `(-1, 1)` is written as a contour integral over the unit
/// circle, reduced to the upper half `t in (0, pi)`, and discretized with `2m`
/// Gauss-Legendre nodes:
///
/// ```text
/// r(x) = (1/2pi) Re sum_k omega_k (g(t_k) + conj g(t_k)),   g(t) = e^{it}/(e^{it} - x)
/// ```
///
/// Node pairs `t` and `pi - t` share a weight, so the `2m` unit-circle poles
/// fold onto `m` representatives `w = e^{it}` with `t in (pi/2, pi)` and
/// coefficient `beta = -omega w / (2 pi)`.
pub fn gauss_legendre_filter<T: Real>(m: usize) -> Result<RationalFilter<T>> {
    if m == 0 {
        return Err(domain("Gauss-Legendre filter needs m >= 1"));
    }
    let (nodes, weights) = gauss_legendre_rule::<T>(2 * m);
    let half_pi = T::FRAC_PI_2();
    let two_pi = T::lit(2.0) * T::PI();
    let mut poles = Vec::with_capacity(m);
    let mut coeffs = Vec::with_capacity(m);
    // nodes are ascending; the upper m map to t in (pi/2, pi)
    for (y, omega) in nodes.iter().zip(&weights).skip(m).rev() {
        let t = half_pi * (*y + T::one());
        let w_t = *omega * half_pi;
        let pole = Complex::new(t.cos(), t.sin());
        poles.push(pole);
        coeffs.push(-pole * (w_t / two_pi));
    }
    RationalFilter::new(poles, coeffs)
}
