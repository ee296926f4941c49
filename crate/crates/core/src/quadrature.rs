//! Globally adaptive Gauss-Kronrod (7/15) integration.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    /// False when the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
}

/// One 15-point Kronrod panel: `(kronrod estimate, |kronrod - gauss|)`.
pub fn kronrod_panel<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let center = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod += T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol*|I|)`, bisecting the
/// panel with the largest error estimate at each step.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> QuadratureResult<T> {
    if a == b {
        return QuadratureResult { value: T::zero(), error: T::zero(), evaluations: 0, converged: true };
    }
    let mut panels: Vec<(T, T, T, T)> = Vec::new();
    let (v, e) = kronrod_panel(&mut f, a, b);
    panels.push((a, b, v, e));
    let mut evaluations = 15;
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if panels.len() >= max_panels {
            return QuadratureResult { value: total, error: err, evaluations, converged: false };
        }
        let (idx, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, v, e) = panels.swap_remove(idx);
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            // panel cannot be split further in this precision
            panels.push((lo, hi, v, T::zero()));
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
            continue;
        }
        let (v1, e1) = kronrod_panel(&mut f, lo, mid);
        let (v2, e2) = kronrod_panel(&mut f, mid, hi);
        evaluations += 30;
        total = total - v + v1 + v2;
        err = err - e + e1 + e2;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        if panels.len() % 64 == 0 {
            // resum to shed accumulated cancellation in the running totals
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
        }
    }
    QuadratureResult { value: total, error: err, evaluations, converged: true }
}

/// Integrates over consecutive `[points[i], points[i+1]]`, each adaptively.
pub fn integrate_breakpoints<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> QuadratureResult<T> {
    let pieces = points.len().saturating_sub(1).max(1);
    let mut out = QuadratureResult { value: T::zero(), error: T::zero(), evaluations: 0, converged: true };
    for w in points.windows(2) {
        let r = integrate(&mut f, w[0], w[1], abs_tol / T::from_count(pieces), rel_tol, max_panels);
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
        out.converged &= r.converged;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact_on_one_panel() {
        let r = integrate(|x: f64| x.powi(6) - 3.0 * x, 0.0, 2.0, 1e-14, 0.0, 10);
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-12);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn sharp_lorentzian() {
        let eps = 1e-3;
        let r = integrate(|x: f64| eps / (x * x + eps * eps), -1.0, 1.0, 1e-12, 0.0, 2000);
        let exact = 2.0 * (1.0 / eps).atan();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_sum_pieces() {
        let r = integrate_breakpoints(|x: f64| if x < 1.0 { 1.0 } else { 2.0 }, &[0.0, 1.0, 3.0], 1e-12, 0.0, 50);
        assert!((r.value - 5.0).abs() < 1e-13);
    }
}
