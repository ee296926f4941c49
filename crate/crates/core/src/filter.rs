//! Rational filter functions and search-interval canonicalization.
//!
//! A filter of degree `4m` is stored through `m` representative poles `w_i`
//! (with `Re w_i <= 0`, `Im w_i > 0`) and complex coefficients `beta_i`. The
//! remaining three poles of each group are `conj(w_i)`, `-w_i`, `-conj(w_i)`:
//!
//! ```text
//! r(x) = sum_i  beta_i/(x - w_i) + conj(beta_i)/(x - conj(w_i))
//!             - beta_i/(x + w_i) - conj(beta_i)/(x + conj(w_i))
//! ```
//!
//! which is real and even on the real line.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Rational filter parametrized by its representative poles and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFilter<T> {
    poles: Vec<Complex<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> RationalFilter<T> {
    /// Builds a filter, normalizing every pole/coefficient pair into the
    /// canonical quadrant. The normalization leaves `r(x)` unchanged.
    pub fn new(poles: Vec<Complex<T>>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if poles.is_empty() {
            return Err(domain("a filter needs at least one pole"));
        }
        if poles.len() != coeffs.len() {
            return Err(Error::Invariant(format!("{} poles but {} coefficients", poles.len(), coeffs.len())));
        }
        for (i, (w, b)) in poles.iter().zip(&coeffs).enumerate() {
            if !(w.re.is_finite() && w.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
                return Err(Error::Invariant(format!("pole {i} or its coefficient is not finite")));
            }
            if w.im == T::zero() {
                return Err(Error::Invariant(format!("pole {i} ({}) lies on the real axis", w.re)));
            }
        }
        let (poles, coeffs) = poles.into_iter().zip(coeffs).map(|(w, b)| canonical_pair(w, b)).unzip();
        Ok(Self { poles, coeffs })
    }

    /// Number of representative poles; the filter has degree `4 * m()`.
    pub fn m(&self) -> usize {
        self.poles.len()
    }

    pub fn degree(&self) -> usize {
        4 * self.m()
    }

    pub fn poles(&self) -> &[Complex<T>] {
        &self.poles
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Checked evaluation on the real line.
    pub fn evaluate(&self, x: T) -> Result<T> {
        if !x.is_finite() {
            return Err(domain(format!("filter evaluated at non-finite x = {x}")));
        }
        let raw = self.evaluate_complex(x);
        debug_assert!(
            raw.im.abs() <= T::lit(1e4) * T::epsilon() * (T::one() + raw.re.abs()),
            "filter value has imaginary residue {}",
            raw.im
        );
        Ok(raw.re)
    }

    /// Unchecked evaluation, for inner loops over finite grids.
    #[inline]
    pub fn value(&self, x: T) -> T {
        rff_sum(&self.coeffs, &self.poles, x).re
    }

    /// The full four-term sum before the imaginary part is dropped.
    pub fn evaluate_complex(&self, x: T) -> Complex<T> {
        rff_sum(&self.coeffs, &self.poles, x)
    }

    /// Checked derivative `r'(x)`.
    pub fn evaluate_derivative(&self, x: T) -> Result<T> {
        if !x.is_finite() {
            return Err(domain(format!("filter derivative at non-finite x = {x}")));
        }
        Ok(self.derivative(x))
    }

    #[inline]
    pub fn derivative(&self, x: T) -> T {
        rff_derivative_sum(&self.coeffs, &self.poles, x).re
    }

    /// `max_i 1/|Im w_i|`, the pole-distance bound on the conditioning of the
    /// shifted systems `(A - zI)`.
    pub fn worst_case_condition_number(&self) -> T {
        self.poles.iter().map(|w| T::one() / w.im.abs()).fold(T::zero(), T::max)
    }

    /// Returns a copy with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self { poles: self.poles.clone(), coeffs: self.coeffs.iter().map(|b| b * factor).collect() }
    }

    /// Converts the stored parameters to another scalar type.
    pub fn cast<U: Real>(&self) -> RationalFilter<U> {
        let conv = |z: &Complex<T>| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy()));
        RationalFilter { poles: self.poles.iter().map(conv).collect(), coeffs: self.coeffs.iter().map(conv).collect() }
    }
}

/// Maps `(w, beta)` onto the representative with `Re w <= 0`, `Im w > 0`.
///
/// `(w, b) -> (conj w, conj b)` and `(w, b) -> (-w, -b)` both permute the four
/// terms of a group, so `r` is unchanged.
pub fn canonical_pair<T: Real>(mut w: Complex<T>, mut b: Complex<T>) -> (Complex<T>, Complex<T>) {
    if w.re > T::zero() {
        w = -w;
        b = -b;
    }
    if w.im < T::zero() {
        w = w.conj();
        b = b.conj();
    }
    (w, b)
}

/// Raw four-term sum over arbitrary (not necessarily canonical) parameters.
#[inline]
pub fn rff_sum<T: Real>(coeffs: &[Complex<T>], poles: &[Complex<T>], x: T) -> Complex<T> {
    let xc = Complex::new(x, T::zero());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (b, w) in coeffs.iter().zip(poles) {
        let bc = b.conj();
        let wc = w.conj();
        acc = acc + b / (xc - w) + bc / (xc - wc) - b / (xc + w) - bc / (xc + wc);
    }
    acc
}

#[inline]
pub fn rff_derivative_sum<T: Real>(coeffs: &[Complex<T>], poles: &[Complex<T>], x: T) -> Complex<T> {
    let xc = Complex::new(x, T::zero());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (b, w) in coeffs.iter().zip(poles) {
        let bc = b.conj();
        let wc = w.conj();
        let sq = |z: Complex<T>| z * z;
        acc = acc - b / sq(xc - w) - bc / sq(xc - wc) + b / sq(xc + w) + bc / sq(xc + wc);
    }
    acc
}

/// Real search interval `(a, b)` of an interior eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchInterval<T> {
    a: T,
    b: T,
}

impl<T: Real> SearchInterval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(domain(format!("search interval ({a}, {b}) must satisfy a < b")));
        }
        Ok(Self { a, b })
    }

    pub fn lower(&self) -> T {
        self.a
    }

    pub fn upper(&self) -> T {
        self.b
    }

    pub fn midpoint(&self) -> T {
        (self.a + self.b) / T::lit(2.0)
    }

    pub fn radius(&self) -> T {
        (self.b - self.a) / T::lit(2.0)
    }

    /// Shift and scale taking `(a, b)` onto `(-1, 1)`: `A' = (A - shift I) / scale`.
    pub fn canonicalize(&self) -> (T, T) {
        (self.midpoint(), self.radius())
    }

    /// Image of a single eigenvalue under the canonical map.
    pub fn to_canonical(&self, lambda: T) -> T {
        (lambda - self.midpoint()) / self.radius()
    }

    pub fn from_canonical(&self, mu: T) -> T {
        mu * self.radius() + self.midpoint()
    }
}

/// `(midpoint, radius)` of `(a, b)`; fails when `a >= b`.
pub fn canonicalize<T: Real>(a: T, b: T) -> Result<(T, T)> {
    Ok(SearchInterval::new(a, b)?.canonicalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn single() -> RationalFilter<f64> {
        RationalFilter::new(vec![c(-0.6, 0.8)], vec![c(0.3, -0.2)]).unwrap()
    }

    #[test]
    fn derivative_of_single_pair_matches_hand_expansion() {
        // r(x) = 2 Re[b/(x-w) - b/(x+w)]  =>  r'(x) = 2 Re[-b/(x-w)^2 + b/(x+w)^2]
        let (w, b) = (c(-0.6, 0.8), c(0.3, -0.2));
        let x = c(2.0, 0.0);
        let expected = 2.0 * (-b / ((x - w) * (x - w)) + b / ((x + w) * (x + w))).re;
        assert_relative_eq!(single().derivative(2.0), expected, max_relative = 1e-14);
        let value = 2.0 * (b / (x - w) - b / (x + w)).re;
        assert_relative_eq!(single().value(2.0), value, max_relative = 1e-14);
    }

    #[test]
    fn derivative_vanishes_at_origin() {
        assert!(single().derivative(0.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_preserves_values() {
        let raw = vec![c(0.6, -0.8), c(0.1, 0.3)];
        let coeffs = vec![c(0.3, -0.2), c(-0.05, 0.4)];
        let f = RationalFilter::new(raw.clone(), coeffs.clone()).unwrap();
        for w in f.poles() {
            assert!(w.re <= 0.0 && w.im > 0.0);
        }
        for x in [-3.0, -0.4, 0.0, 0.7, 1.2, 9.0] {
            assert_relative_eq!(f.value(x), rff_sum(&coeffs, &raw, x).re, max_relative = 1e-13);
        }
    }

    #[test]
    fn rejects_real_poles_and_count_mismatch() {
        assert!(matches!(RationalFilter::new(vec![c(-0.5, 0.0)], vec![c(1.0, 0.0)]), Err(Error::Invariant(_))));
        assert!(RationalFilter::new(vec![c(-0.5, 0.1)], vec![]).is_err());
        assert!(RationalFilter::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn non_finite_argument_is_a_domain_error() {
        assert!(matches!(single().evaluate(f64::NAN), Err(Error::Domain(_))));
        assert!(single().evaluate_derivative(f64::INFINITY).is_err());
    }

    #[test]
    fn canonicalization_examples() {
        assert_eq!(canonicalize(-1.0, 1.0).unwrap(), (0.0, 1.0));
        assert_eq!(canonicalize(0.0, 4.0).unwrap(), (2.0, 2.0));
        let iv = SearchInterval::new(0.0, 4.0).unwrap();
        assert_eq!(iv.to_canonical(3.0), 0.5);
        assert_eq!(iv.from_canonical(0.5), 3.0);
        assert!(canonicalize(1.0, 1.0).is_err());
        assert!(canonicalize(2.0, 1.0).is_err());
    }

    #[test]
    fn unit_imaginary_parts_give_unit_condition_number() {
        let f = RationalFilter::new(vec![c(-0.3, 1.0), c(-2.0, 1.0)], vec![c(1.0, 0.0), c(0.5, 0.5)]).unwrap();
        assert_eq!(f.worst_case_condition_number(), 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let f = single().cast::<f32>();
        assert!((f.value(0.3) - single().value(0.3) as f32).abs() < 1e-5);
    }
}
