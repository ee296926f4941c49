//! Weighted least-squares (SLiSe) objective for rational filters.
//!
//! The residual of a filter `r` under a step weight `G` is
//!
//! ```text
//! f(beta, w) = int_0^inf G(x) (1_{(-1,1)}(x) - r(x))^2 dx
//! ```
//!
//! i.e. half of the integral over the whole real line (the integrand is even).
//! For step weights every piece is an elementary integral of a rational
//! function: writing `r(x) = sum_p c_p / (x - p)` over the `4m` signed poles
//! `p in {w, conj w, -w, -conj w}`, the loss is assembled per weight segment
//! from `int 1/(x-p)`, `int 1/((x-p)(x-q))` and (for the pole gradient)
//! `int 1/((x-p)(x-q)^2)`, all in terms of principal complex logarithms.
//!
//! Gradients are Wirtinger derivatives `df/dbeta_k`, `df/dw_k`; the gradient
//! of the real embedding `(Re, Im)` is `2 conj` of these.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::filter::{rff_sum, RationalFilter};
use crate::quadrature::integrate;
use crate::scalar::Real;
use crate::weight::StepWeightFunction;

/// Poles closer than this to the real axis are rejected.
pub const MIN_POLE_IMAG: f64 = 1e-10;

/// A step weight paired with a target filter size `m` (degree `4m`).
#[derive(Debug, Clone, PartialEq)]
pub struct SliseObjective<T> {
    weight: StepWeightFunction<T>,
    m: usize,
    /// Positive-half-line segments `(lo, hi, weight, inside)`, split at 1.
    segments: Vec<(T, T, T, bool)>,
}

impl<T: Real> SliseObjective<T> {
    pub fn new(weight: StepWeightFunction<T>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain("objective needs m >= 1"));
        }
        let mut segments = Vec::new();
        for (lo, hi, v) in weight.segments() {
            if lo < T::one() && hi > T::one() {
                segments.push((lo, T::one(), v, true));
                segments.push((T::one(), hi, v, false));
            } else {
                segments.push((lo, hi, v, hi <= T::one()));
            }
        }
        Ok(Self { weight, m, segments })
    }

    pub fn weight(&self) -> &StepWeightFunction<T> {
        &self.weight
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of real unknowns of the embedded problem.
    pub fn dimension(&self) -> usize {
        4 * self.m
    }

    fn check(&self, beta: &[Complex<T>], w: &[Complex<T>]) -> Result<()> {
        if beta.len() != self.m || w.len() != self.m {
            return Err(domain(format!(
                "expected {} coefficients and poles, got {} and {}",
                self.m,
                beta.len(),
                w.len()
            )));
        }
        let floor = T::lit(MIN_POLE_IMAG);
        for (i, (b, p)) in beta.iter().zip(w).enumerate() {
            if !(b.re.is_finite() && b.im.is_finite() && p.re.is_finite() && p.im.is_finite()) {
                return Err(domain(format!("parameter {i} is not finite")));
            }
            if p.im.abs() < floor {
                return Err(domain(format!("pole {i} has |Im| = {} below {MIN_POLE_IMAG:e}", p.im.abs())));
            }
        }
        Ok(())
    }

    /// Closed-form residual.
    pub fn loss(&self, beta: &[Complex<T>], w: &[Complex<T>]) -> Result<T> {
        self.check(beta, w)?;
        Ok(self.assemble(beta, w, false).0)
    }

    /// Wirtinger gradient `(df/dbeta, df/dw)`.
    pub fn gradient(&self, beta: &[Complex<T>], w: &[Complex<T>]) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        self.check(beta, w)?;
        let (_, gb, gw) = self.assemble(beta, w, true);
        Ok((gb, gw))
    }

    pub fn loss_and_gradient(
        &self,
        beta: &[Complex<T>],
        w: &[Complex<T>],
    ) -> Result<(T, Vec<Complex<T>>, Vec<Complex<T>>)> {
        self.check(beta, w)?;
        Ok(self.assemble(beta, w, true))
    }

    pub fn filter_loss(&self, filter: &RationalFilter<T>) -> Result<T> {
        self.loss(filter.coeffs(), filter.poles())
    }

    /// Residual of the real-embedded parameter vector.
    pub fn loss_real(&self, v: &[T]) -> Result<T> {
        let (beta, w) = from_real(v)?;
        self.loss(&beta, &w)
    }

    /// Residual and real gradient of the embedded parameter vector.
    pub fn loss_and_real_gradient(&self, v: &[T]) -> Result<(T, Vec<T>)> {
        let (beta, w) = from_real(v)?;
        let (f, gb, gw) = self.loss_and_gradient(&beta, &w)?;
        Ok((f, real_gradient(&gb, &gw)))
    }

    /// Reference residual by adaptive Gauss-Kronrod quadrature of the
    /// defining integral, panel boundaries at every weight breakpoint and 1.
    pub fn loss_quadrature(&self, beta: &[Complex<T>], w: &[Complex<T>]) -> Result<T> {
        self.check(beta, w)?;
        let abs_tol = T::lit(1e-12).max(T::lit(64.0) * T::epsilon());
        let per_segment = abs_tol / T::from_count(self.segments.len().max(1));
        let mut total = T::zero();
        for &(lo, hi, v, inside) in &self.segments {
            let target = if inside { T::one() } else { T::zero() };
            let res = integrate(
                |x| {
                    let d = target - rff_sum(beta, w, x).re;
                    d * d
                },
                lo,
                hi,
                per_segment / v,
                T::zero(),
                20_000,
            );
            if !res.converged {
                return Err(Error::Numeric(format!(
                    "quadrature on [{lo}, {hi}] stopped with error estimate {}",
                    res.error
                )));
            }
            total += v * res.value;
        }
        Ok(total)
    }

    fn assemble(
        &self,
        beta: &[Complex<T>],
        w: &[Complex<T>],
        want_grad: bool,
    ) -> (T, Vec<Complex<T>>, Vec<Complex<T>>) {
        let m = self.m;
        let n = 4 * m;
        let zero = Complex::new(T::zero(), T::zero());
        // signed poles and residues; layout 4i + {0: w, 1: conj w, 2: -w, 3: -conj w}
        let mut poles = Vec::with_capacity(n);
        let mut res = Vec::with_capacity(n);
        for (b, p) in beta.iter().zip(w) {
            poles.extend([*p, p.conj(), -p, -p.conj()]);
            res.extend([*b, b.conj(), -b, -b.conj()]);
        }

        let mut loss = T::zero();
        let mut acc_beta = vec![zero; m];
        let mut acc_pole = vec![zero; m];
        let mut single = vec![zero; n];
        let mut pair = vec![zero; n * n];
        let mut inv_sq = vec![zero; n];
        let mut cubic = vec![zero; n * 2 * m];

        for &(lo, hi, v, inside) in &self.segments {
            for (k, p) in poles.iter().enumerate() {
                single[k] = log_span(lo, hi, *p);
                inv_sq[k] = recip(lo, *p) - recip(hi, *p);
            }
            for a in 0..n {
                for b in a..n {
                    let (j, _) = pair_integrals(lo, hi, poles[a], poles[b], single[a], single[b], false);
                    pair[a * n + b] = j;
                    pair[b * n + a] = j;
                }
            }
            // int (1_I - r)^2 = inside*len - 2 inside sum c_p D_p + sum c_p c_q J_pq
            let mut quad = zero;
            for a in 0..n {
                let mut row = zero;
                for b in 0..n {
                    row = row + res[b] * pair[a * n + b];
                }
                quad = quad + res[a] * row;
            }
            let mut seg = quad.re;
            if inside {
                let lin: Complex<T> = res.iter().zip(&single).map(|(c, d)| c * d).fold(zero, |s, t| s + t);
                seg += (hi - lo) - T::lit(2.0) * lin.re;
            }
            loss += v * seg;

            if !want_grad {
                continue;
            }
            for a in 0..n {
                for k in 0..m {
                    for (slot, q) in [(2 * k, 4 * k), (2 * k + 1, 4 * k + 2)] {
                        let (_, kk) = pair_integrals(lo, hi, poles[a], poles[q], single[a], single[q], true);
                        cubic[a * 2 * m + slot] = kk;
                    }
                }
            }
            let vc = Complex::new(v, T::zero());
            for k in 0..m {
                let (plus, minus) = (4 * k, 4 * k + 2);
                // int (1_I - r) phi_k,  phi_k = 1/(x - w_k) - 1/(x + w_k)
                let mut b_term = zero;
                // int (1_I - r) psi_k,  psi_k = 1/(x - w_k)^2 + 1/(x + w_k)^2
                let mut w_term = zero;
                if inside {
                    b_term = single[plus] - single[minus];
                    w_term = inv_sq[plus] + inv_sq[minus];
                }
                for a in 0..n {
                    b_term = b_term - res[a] * (pair[a * n + plus] - pair[a * n + minus]);
                    w_term = w_term - res[a] * (cubic[a * 2 * m + 2 * k] + cubic[a * 2 * m + 2 * k + 1]);
                }
                acc_beta[k] = acc_beta[k] + vc * b_term;
                acc_pole[k] = acc_pole[k] + vc * w_term;
            }
        }

        let loss = loss.max(T::zero());
        if !want_grad {
            return (loss, Vec::new(), Vec::new());
        }
        let minus_two = Complex::new(T::lit(-2.0), T::zero());
        let grad_beta = acc_beta.iter().map(|a| minus_two * a).collect();
        let grad_pole = acc_pole.iter().zip(beta).map(|(a, b)| minus_two * b * a).collect();
        (loss, grad_beta, grad_pole)
    }
}

#[inline]
fn recip<T: Real>(x: T, p: Complex<T>) -> Complex<T> {
    (Complex::new(x, T::zero()) - p).inv()
}

/// `int_lo^hi dx/(x - p) = Log(hi - p) - Log(lo - p)`; continuous because
/// `x - p` never crosses the negative real axis for non-real `p`.
#[inline]
fn log_span<T: Real>(lo: T, hi: T, p: Complex<T>) -> Complex<T> {
    (Complex::new(hi, T::zero()) - p).ln() - (Complex::new(lo, T::zero()) - p).ln()
}

/// `(int dx/((x-p)(x-q)), int dx/((x-p)(x-q)^2))` over `[lo, hi]`.
///
/// Same-half-plane pairs use the antiderivatives `-lambda(d)/(x-q)` and
/// `mu(d)/(x-q)^2` with `d = (q-p)/(x-q)`, which stay accurate as `p -> q`.
/// Opposite-half-plane pairs are at least `2 min|Im|` apart and use plain
/// partial fractions.
fn pair_integrals<T: Real>(
    lo: T,
    hi: T,
    p: Complex<T>,
    q: Complex<T>,
    span_p: Complex<T>,
    span_q: Complex<T>,
    want_cubic: bool,
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    if (p.im > T::zero()) == (q.im > T::zero()) {
        let at = |x: T| {
            let xq = Complex::new(x, T::zero()) - q;
            let d = (q - p) / xq;
            let (lam, mu) = log1p_kernels(d, want_cubic);
            (-lam / xq, mu / (xq * xq))
        };
        let (jh, kh) = at(hi);
        let (jl, kl) = at(lo);
        (jh - jl, if want_cubic { kh - kl } else { zero })
    } else {
        let diff = p - q;
        let j = (span_p - span_q) / diff;
        let k = if want_cubic { j / diff + (recip(hi, q) - recip(lo, q)) / diff } else { zero };
        (j, k)
    }
}

/// `lambda(d) = ln(1+d)/d` and `mu(d) = (ln(1+d) - d)/d^2`.
fn log1p_kernels<T: Real>(d: Complex<T>, want_mu: bool) -> (Complex<T>, Complex<T>) {
    let one = Complex::new(T::one(), T::zero());
    if d.norm() < T::lit(0.1) {
        // ln(1+d) = sum_{k>=1} (-1)^{k+1} d^k / k
        let mut lam = Complex::new(T::zero(), T::zero());
        let mut mu = Complex::new(T::zero(), T::zero());
        let mut pw = one;
        for k in 0..24 {
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            lam = lam + pw * (sign / T::from_count(k + 1));
            if want_mu {
                mu = mu - pw * (sign / T::from_count(k + 2));
            }
            pw = pw * d;
        }
        (lam, mu)
    } else {
        let l = (one + d).ln();
        let lam = l / d;
        let mu = if want_mu { (l - d) / (d * d) } else { Complex::new(T::zero(), T::zero()) };
        (lam, mu)
    }
}

/// Packs `(beta, w)` as `[Re beta, Im beta, Re w, Im w]`, each block of length `m`.
pub fn to_real<T: Real>(beta: &[Complex<T>], w: &[Complex<T>]) -> Vec<T> {
    let mut v = Vec::with_capacity(4 * beta.len());
    v.extend(beta.iter().map(|b| b.re));
    v.extend(beta.iter().map(|b| b.im));
    v.extend(w.iter().map(|p| p.re));
    v.extend(w.iter().map(|p| p.im));
    v
}

/// Inverse of [`to_real`].
pub fn from_real<T: Real>(v: &[T]) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    if v.is_empty() || v.len() % 4 != 0 {
        return Err(domain(format!("real parameter vector of length {} is not a positive multiple of 4", v.len())));
    }
    let m = v.len() / 4;
    let beta = (0..m).map(|i| Complex::new(v[i], v[m + i])).collect();
    let w = (0..m).map(|i| Complex::new(v[2 * m + i], v[3 * m + i])).collect();
    Ok((beta, w))
}

/// Gradient of the real embedding: `2 conj(g)` split into `(Re, Im)` slots.
pub fn real_gradient<T: Real>(grad_beta: &[Complex<T>], grad_w: &[Complex<T>]) -> Vec<T> {
    let two = T::lit(2.0);
    let mut v = Vec::with_capacity(2 * (grad_beta.len() + grad_w.len()));
    v.extend(grad_beta.iter().map(|g| two * g.re));
    v.extend(grad_beta.iter().map(|g| -two * g.im));
    v.extend(grad_w.iter().map(|g| two * g.re));
    v.extend(grad_w.iter().map(|g| -two * g.im));
    v
}

/// Real embedding of a filter.
pub fn filter_to_real<T: Real>(filter: &RationalFilter<T>) -> Vec<T> {
    to_real(filter.coeffs(), filter.poles())
}

/// Filter from a real parameter vector (normalized into the canonical quadrant).
pub fn filter_from_real<T: Real>(v: &[T]) -> Result<RationalFilter<T>> {
    let (beta, w) = from_real(v)?;
    RationalFilter::new(w, beta)
}
