//! Convergence-rate functionals of rational filters.

use std::fmt;
use std::sync::Arc;

use log::{debug, warn};

use crate::error::{domain, Error, Result};
use crate::filter::RationalFilter;
use crate::loss::{filter_from_real, filter_to_real};
use crate::optim::{nelder_mead, OptimizerReport, SimplexConfig};
use crate::quadrature::integrate;
use crate::scalar::Real;

/// Samples per scan of the inner and outer regions.
pub const SCAN_POINTS: usize = 4096;
/// The outer scan first covers `[1/G, OUTER_SPAN/G]`.
pub const OUTER_SPAN: f64 = 64.0;
/// `predicted_iterations` flags counts above this.
pub const ITERATION_FLAG_THRESHOLD: usize = 10_000;

/// Gap parameter `G in (0, 1)`: the regions `[0, G]` (inside) and `[1/G, inf)`
/// (outside) are compared, the band in between is ignored.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Gap<T>(T);

impl<T: Real> Gap<T> {
    pub fn new(g: T) -> Result<Self> {
        if !(g > T::zero() && g < T::one()) {
            return Err(domain(format!("gap parameter must lie in (0, 1), got {g}")));
        }
        Ok(Self(g))
    }

    pub fn value(self) -> T {
        self.0
    }
}

impl<T: Real> fmt::Display for Gap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Extrema behind a worst-case rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase<T> {
    pub rate: T,
    /// `min |r|` over `[0, G]` and where it occurs.
    pub inner_min: T,
    pub inner_argmin: T,
    /// `max |r|` over `[1/G, inf)` and where it occurs.
    pub outer_max: T,
    pub outer_argmax: T,
}

/// `max_{x >= 1/G} |r(x)| / min_{0 <= x <= G} |r(x)|`.
pub fn worst_case_rate<T: Real>(filter: &RationalFilter<T>, gap: Gap<T>) -> Result<T> {
    Ok(worst_case_analysis(filter, gap)?.rate)
}

/// Worst-case rate together with the located extrema.
///
/// Both regions are scanned on [`SCAN_POINTS`] samples (the outer one
/// geometrically, since `|r|` varies fastest near `1/G`), the best sample is
/// refined by bisection on the derivative of `|r|`, and the outer scan is
/// extended until the tail bound `|r(x)| <= sum_i 4|beta_i||w_i| / (x^2 - |w_i|^2)`
/// drops below the running maximum.
pub fn worst_case_analysis<T: Real>(filter: &RationalFilter<T>, gap: Gap<T>) -> Result<WorstCase<T>> {
    let g = gap.value();
    let abs = |x: T| filter.value(x).abs();
    // signed slope of |r|
    let slope = |x: T| filter.value(x).signum() * filter.derivative(x);

    // inner minimum
    let n = SCAN_POINTS;
    let inner: Vec<T> = (0..n).map(|k| g * T::from_count(k) / T::from_count(n - 1)).collect();
    let values: Vec<T> = inner.iter().map(|&x| filter.value(x)).collect();
    if values.windows(2).any(|w| w[0].signum() != w[1].signum()) || values.iter().any(|v| *v == T::zero()) {
        return Err(Error::Numeric("filter changes sign inside [0, G]; worst-case rate is unbounded".into()));
    }
    let k = argmin(values.iter().map(|v| v.abs()));
    let (inner_argmin, inner_min) = refine(&inner, k, &abs, &|x| -slope(x), false);
    if !(inner_min > T::lit(1e-300)) {
        return Err(Error::Numeric(format!("degenerate filter: min |r| on [0, G] is {inner_min:e}")));
    }

    // outer maximum
    let mut lo = T::one() / g;
    let mut hi = lo * T::lit(OUTER_SPAN);
    let (mut outer_argmax, mut outer_max) = (lo, abs(lo));
    loop {
        let ratio = (hi / lo).ln();
        let grid: Vec<T> = (0..n).map(|k| lo * (ratio * T::from_count(k) / T::from_count(n - 1)).exp()).collect();
        let k = argmax(grid.iter().map(|&x| abs(x)));
        let (xm, vm) = refine(&grid, k, &abs, &slope, true);
        if vm > outer_max {
            outer_max = vm;
            outer_argmax = xm;
        }
        if tail_bound(filter, hi) <= outer_max {
            break;
        }
        debug!("worst-case scan extended beyond x = {hi}");
        lo = hi;
        hi = hi * T::lit(OUTER_SPAN);
        if !hi.is_finite() {
            break;
        }
    }
    Ok(WorstCase { rate: outer_max / inner_min, inner_min, inner_argmin, outer_max, outer_argmax })
}

/// Upper bound on `|r(x)|` valid for all `x' >= x > max |w_i|`.
pub fn tail_bound<T: Real>(filter: &RationalFilter<T>, x: T) -> T {
    filter
        .poles()
        .iter()
        .zip(filter.coeffs())
        .map(|(w, b)| {
            let d = x * x - w.norm_sqr();
            if d > T::zero() {
                T::lit(4.0) * b.norm() * w.norm() / d
            } else {
                T::infinity()
            }
        })
        .sum()
}

fn argmin<T: Real>(it: impl Iterator<Item = T>) -> usize {
    it.enumerate().fold((0, T::infinity()), |b, (i, v)| if v < b.1 { (i, v) } else { b }).0
}

fn argmax<T: Real>(it: impl Iterator<Item = T>) -> usize {
    it.enumerate().fold((0, T::neg_infinity()), |b, (i, v)| if v > b.1 { (i, v) } else { b }).0
}

/// Refines the extremum of `f` near `grid[k]` by bisecting on `ascent`, which
/// must be positive where moving right increases the objective (`f` for a
/// maximum, `-f` for a minimum).
fn refine<T: Real>(grid: &[T], k: usize, f: &dyn Fn(T) -> T, ascent: &dyn Fn(T) -> T, maximize: bool) -> (T, T) {
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let mut best = (grid[k], f(grid[k]));
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (mut a, mut b) = (lo, hi);
    let (sa, sb) = (ascent(a), ascent(b));
    if sa > T::zero() && sb < T::zero() {
        for _ in 0..200 {
            let mid = (a + b) * T::lit(0.5);
            if mid <= a || mid >= b {
                break;
            }
            if ascent(mid) > T::zero() {
                a = mid;
            } else {
                b = mid;
            }
        }
        let x = (a + b) * T::lit(0.5);
        let v = f(x);
        if better(v, best.1) {
            best = (x, v);
        }
    }
    best
}

/// Probability density of eigenvalues on the real line.
#[derive(Clone)]
pub struct EigenvalueDensity<T> {
    h: Arc<dyn Fn(T) -> T + Send + Sync>,
    support: T,
    /// Kinks and jumps of `h`, used as quadrature panel boundaries.
    breakpoints: Vec<T>,
    name: String,
}

impl<T: Real> fmt::Debug for EigenvalueDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenvalueDensity").field("name", &self.name).field("support", &self.support).finish()
    }
}

impl<T: Real> EigenvalueDensity<T> {
    /// Custom density, treated as zero for `|x| > support`. Normalization over
    /// `[-support, support]` is checked to `1e-6`.
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(T) -> T + Send + Sync + 'static,
        support: T,
        breakpoints: Vec<T>,
    ) -> Result<Self> {
        if !(support > T::zero()) || !support.is_finite() {
            return Err(domain("density support bound must be positive and finite"));
        }
        let density = Self { h: Arc::new(h), support, breakpoints, name: name.into() };
        let mass = density.mass(-support, support);
        if !((mass - T::one()).abs() <= T::lit(1e-6)) {
            return Err(domain(format!("density '{}' integrates to {mass}, not 1", density.name)));
        }
        Ok(density)
    }

    pub fn uniform(a: T, b: T) -> Result<Self> {
        if !(a < b) {
            return Err(domain("uniform density needs a < b"));
        }
        let height = T::one() / (b - a);
        let support = a.abs().max(b.abs());
        Self::new(
            format!("uniform[{a},{b}]"),
            move |x| if x >= a && x <= b { height } else { T::zero() },
            support,
            vec![a, b],
        )
    }

    /// Normal density, cut off twelve standard deviations from the mean.
    pub fn normal(mean: T, variance: T) -> Result<Self> {
        if !(variance > T::zero()) {
            return Err(domain("variance must be positive"));
        }
        let sd = variance.sqrt();
        let norm = T::one() / (sd * (T::lit(2.0) * T::PI()).sqrt());
        let support = mean.abs() + T::lit(12.0) * sd;
        Self::new(
            format!("normal({mean},{variance})"),
            move |x| {
                let z = (x - mean) / sd;
                norm * (-(z * z) * T::lit(0.5)).exp()
            },
            support,
            vec![mean],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> T {
        self.support
    }

    pub fn density(&self, x: T) -> T {
        if x.abs() > self.support {
            T::zero()
        } else {
            (self.h)(x)
        }
    }

    fn cuts(&self, a: T, b: T, extra: &[T]) -> Vec<T> {
        let mut pts: Vec<T> = vec![a, b];
        pts.extend(self.breakpoints.iter().chain(extra).copied().filter(|&p| p > a && p < b));
        pts.sort_by(|x, y| x.partial_cmp(y).expect("finite cut points"));
        pts.dedup();
        pts
    }

    fn integrate_with(&self, a: T, b: T, extra: &[T], f: &dyn Fn(T) -> T) -> T {
        if !(a < b) {
            return T::zero();
        }
        let pts = self.cuts(a, b, extra);
        pts.windows(2)
            .map(|w| integrate(|x| f(x) * self.density(x), w[0], w[1], T::lit(1e-14), T::lit(1e-11), 4000).value)
            .sum()
    }

    /// `P[a <= X <= b]`.
    pub fn mass(&self, a: T, b: T) -> T {
        self.integrate_with(a.max(-self.support), b.min(self.support), &[], &|_| T::one())
    }
}

/// `E[ |r(Y)| / |r(X)| ]` for independent `X in [-G, G]`, `Y` with
/// `|Y| >= 1/G`, both drawn from `density`.
///
/// Factorized as `(int_I h/|r|) (int_O |r| h) / (P_I P_O)`. A filter vanishing
/// inside `I` makes the first factor diverge; the rate is then `+inf`.
pub fn expected_rate<T: Real>(filter: &RationalFilter<T>, density: &EigenvalueDensity<T>, gap: Gap<T>) -> Result<T> {
    let g = gap.value();
    let s = density.support();
    let outer = T::one() / g;
    let p_inner = density.mass(-g, g);
    let p_outer = density.mass(-s, -outer) + density.mass(outer, s);
    if !(p_inner > T::zero()) || !(p_outer > T::zero()) {
        return Err(domain(format!(
            "density '{}' gives P[inside] = {p_inner}, P[outside] = {p_outer}; both must be positive",
            density.name()
        )));
    }
    // sign scan for roots of r inside I
    let n = 10 * SCAN_POINTS;
    let mut prev = filter.value(-g);
    for k in 1..=n {
        let x = -g + T::lit(2.0) * g * T::from_count(k) / T::from_count(n);
        let v = filter.value(x);
        if v == T::zero() || v.signum() != prev.signum() {
            warn!("filter vanishes near x = {x} inside the interval; expected rate diverges");
            return Ok(T::infinity());
        }
        prev = v;
    }
    let zero = [T::zero()];
    let inner = density.integrate_with(-g, g, &zero, &|x| T::one() / filter.value(x).abs());
    let tail = |x: T| filter.value(x).abs();
    let outside = density.integrate_with(-s, -outer, &[], &tail) + density.integrate_with(outer, s, &[], &tail);
    Ok(inner * outside / (p_inner * p_outer))
}

/// Derivative-free minimization of the expected rate over the real embedding.
///
/// Nelder-Mead runs on `ln E - mu sum_i ln|Im w_i|` with `mu = 1e-3`; poles
/// closer than `1e-6` to the real axis are rejected outright. The start is
/// returned if the search fails to improve on it.
pub fn minimize_expected_rate<T: Real>(
    density: &EigenvalueDensity<T>,
    gap: Gap<T>,
    start: &RationalFilter<T>,
    config: &SimplexConfig<T>,
) -> Result<(RationalFilter<T>, T, OptimizerReport<T>)> {
    let e0 = expected_rate(start, density, gap)?;
    if !e0.is_finite() {
        return Err(domain("expected rate of the start filter is infinite"));
    }
    let m = start.m();
    let mu = T::lit(1e-3);
    let floor = T::lit(1e-6);
    let objective = |v: &[T]| -> T {
        let ims = &v[3 * m..];
        if ims.iter().any(|im| im.abs() < floor) {
            return T::infinity();
        }
        let Ok(f) = filter_from_real(v) else { return T::infinity() };
        match expected_rate(&f, density, gap) {
            Ok(e) if e > T::zero() && e.is_finite() => e.ln() - mu * ims.iter().map(|im| im.abs().ln()).sum::<T>(),
            _ => T::infinity(),
        }
    };
    let x0 = filter_to_real(start);
    let mut report = nelder_mead(objective, &x0, config)?;
    let candidate = filter_from_real(&report.solution)?;
    let e = expected_rate(&candidate, density, gap)?;
    if e <= e0 {
        report.final_loss = e;
        Ok((candidate, e, report))
    } else {
        report.solution = x0;
        report.final_loss = e0;
        Ok((start.clone(), e0, report))
    }
}

/// Iterations predicted by a per-iteration contraction `rate` to reach `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationPrediction {
    pub iterations: usize,
    /// Set when the count exceeds [`ITERATION_FLAG_THRESHOLD`].
    pub impractical: bool,
}

/// `ceil(ln(tolerance) / ln(rate))`.
pub fn predicted_iterations<T: Real>(rate: T, tolerance: T) -> Result<IterationPrediction> {
    if !(rate > T::zero()) {
        return Err(domain(format!("rate must be positive, got {rate}")));
    }
    if !(rate < T::one()) {
        return Err(Error::Numeric(format!("rate {rate} >= 1: subspace iteration does not converge")));
    }
    if !(tolerance > T::zero() && tolerance < T::one()) {
        return Err(domain(format!("tolerance must lie in (0, 1), got {tolerance}")));
    }
    // absorb rounding in the quotient so exact powers are not overcounted
    let n = ((tolerance.ln() / rate.ln()) * (T::one() - T::lit(1e-12))).ceil();
    let iterations = n.to_usize().unwrap_or(usize::MAX).max(1);
    Ok(IterationPrediction { iterations, impractical: iterations > ITERATION_FLAG_THRESHOLD })
}
