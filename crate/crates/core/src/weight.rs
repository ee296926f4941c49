//! Even, non-negative step weights with compact support.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Piecewise-constant weight stored on the positive half-line.
///
/// `values[j]` applies on `[breakpoints[j-1], breakpoints[j])` (with an
/// implicit leading breakpoint 0); the weight vanishes for
/// `|x| >= breakpoints.last()` and is mirrored for negative arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWeightFunction<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> StepWeightFunction<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::Invariant("weight needs at least one breakpoint".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::Invariant(format!("{} breakpoints but {} values", breakpoints.len(), values.len())));
        }
        let mut prev = T::zero();
        for (j, &b) in breakpoints.iter().enumerate() {
            if !b.is_finite() || b <= prev {
                return Err(Error::Invariant(format!(
                    "breakpoint {j} ({b}) must be finite and exceed the previous one ({prev})"
                )));
            }
            prev = b;
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= T::zero())) {
            return Err(Error::Invariant(format!("weight value {j} ({v}) must be finite and non-negative")));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Right end of the support.
    pub fn support(&self) -> T {
        *self.breakpoints.last().expect("non-empty by construction")
    }

    pub fn value(&self, x: T) -> T {
        let ax = x.abs();
        self.breakpoints.iter().position(|&b| ax < b).map_or(T::zero(), |j| self.values[j])
    }

    /// Positive-half-line segments `(lo, hi, value)`, skipping zero weights.
    pub fn segments(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        let starts = std::iter::once(T::zero()).chain(self.breakpoints.iter().copied());
        starts
            .zip(self.breakpoints.iter().copied())
            .zip(self.values.iter().copied())
            .map(|((lo, hi), v)| (lo, hi, v))
            .filter(|&(_, _, v)| v > T::zero())
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(|&v| v * factor).collect() }
    }
}

/// The three tabulated weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinWeight {
    GammaSlise,
    BoxSlise,
    EnhancedGammaSlise,
}

impl BuiltinWeight {
    pub const ALL: [BuiltinWeight; 3] =
        [BuiltinWeight::GammaSlise, BuiltinWeight::BoxSlise, BuiltinWeight::EnhancedGammaSlise];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinWeight::GammaSlise => "gamma-slise",
            BuiltinWeight::BoxSlise => "box-slise",
            BuiltinWeight::EnhancedGammaSlise => "enhanced-gamma-slise",
        }
    }

    fn table(self) -> (&'static [f64], &'static [f64]) {
        match self {
            BuiltinWeight::GammaSlise => (&[0.95, 1.05, 1.4, 5.0], &[1.0, 0.01, 10.0, 20.0]),
            BuiltinWeight::BoxSlise => {
                (&[0.95, 0.995, 1.005, 1.05, 1.1, 1.3, 1.8, 3.0], &[1.0, 4.0, 2.0, 4.0, 0.6, 1.0, 0.3, 0.1])
            }
            BuiltinWeight::EnhancedGammaSlise => (&[0.96, 1.0417, 1.4, 10.0], &[0.7, 0.00092, 887.0, 20.0]),
        }
    }

    pub fn weight<T: Real>(self) -> StepWeightFunction<T> {
        let (b, v) = self.table();
        StepWeightFunction::new(b.iter().map(|&x| T::lit(x)).collect(), v.iter().map(|&x| T::lit(x)).collect())
            .expect("tabulated weights are valid")
    }
}

impl fmt::Display for BuiltinWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Self::ALL
            .into_iter()
            .find(|b| b.name() == key)
            .ok_or_else(|| Error::Lookup { kind: "builtin weight", name: s.to_string() })
    }
}

pub fn builtin_weight<T: Real>(name: BuiltinWeight) -> StepWeightFunction<T> {
    name.weight()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        assert_eq!(BuiltinWeight::GammaSlise.weight::<f64>().value(1.2), 10.0);
        assert_eq!(BuiltinWeight::GammaSlise.weight::<f64>().value(-1.2), 10.0);
        assert_eq!(BuiltinWeight::BoxSlise.weight::<f64>().value(5.0), 0.0);
        assert_eq!(BuiltinWeight::EnhancedGammaSlise.weight::<f64>().value(1.2), 887.0);
        // left-closed steps
        assert_eq!(BuiltinWeight::GammaSlise.weight::<f64>().value(0.95), 0.01);
        assert_eq!(BuiltinWeight::GammaSlise.weight::<f64>().value(5.0), 0.0);
    }

    #[test]
    fn invariants_enforced() {
        assert!(StepWeightFunction::new(vec![1.0, 0.5], vec![1.0, 1.0]).is_err());
        assert!(StepWeightFunction::new(vec![1.0], vec![-1.0]).is_err());
        assert!(StepWeightFunction::new(vec![0.0], vec![1.0]).is_err());
        assert!(StepWeightFunction::<f64>::new(vec![], vec![]).is_err());
        assert!(StepWeightFunction::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn segments_skip_zero_steps() {
        let w = StepWeightFunction::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.0, 2.0]).unwrap();
        let segs: Vec<_> = w.segments().collect();
        assert_eq!(segs, vec![(0.0, 1.0, 1.0), (2.0, 3.0, 2.0)]);
        assert_eq!(w.support(), 3.0);
    }

    #[test]
    fn lookup() {
        assert_eq!("Box-SLiSe".parse::<BuiltinWeight>().unwrap(), BuiltinWeight::BoxSlise);
        assert!("hat".parse::<BuiltinWeight>().is_err());
    }
}
