//! Weight-function design by minimizing the worst-case rate of the fitted filter.

use std::cell::RefCell;

use log::{debug, warn};

use crate::error::{domain, Result};
use crate::gauss::gauss_legendre_filter;
use crate::loss::SliseObjective;
use crate::optim::{fit_filter, nelder_mead, OptimizerConfig, OptimizerReport, SimplexConfig};
use crate::rate::{worst_case_rate, Gap};
use crate::scalar::Real;
use crate::weight::StepWeightFunction;

/// End of the support of every realized weight.
pub const SUPPORT_CAP: f64 = 10.0;

/// Five-step weight: `v1` below `w1`, `v2` up to `1/w1`, `v3` up to `w2`,
/// `v4` up to `w3` and `v5` from `w3` to [`SUPPORT_CAP`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricWeight<T> {
    v: [T; 5],
    w1: T,
    w2: T,
    w3: T,
}

impl<T: Real> ParametricWeight<T> {
    /// `v1..v4` must be positive; `v5 = 0` drops the tail step.
    pub fn new(v: [T; 5], w1: T, w2: T, w3: T) -> Result<Self> {
        if v[..4].iter().any(|x| !(*x > T::zero() && x.is_finite())) || !(v[4] >= T::zero() && v[4].is_finite()) {
            return Err(domain(format!("step heights must be positive (v5 may be 0), got {v:?}")));
        }
        if !(w1 > T::zero() && w1 < T::one()) {
            return Err(domain(format!("w1 must lie in (0, 1), got {w1}")));
        }
        if !(w2 > T::one() / w1 && w3 > w2 && w3.is_finite()) {
            return Err(domain(format!("need 1/w1 < w2 < w3, got 1/w1 = {}, w2 = {w2}, w3 = {w3}", T::one() / w1)));
        }
        Ok(Self { v, w1, w2, w3 })
    }

    pub fn gamma_slise() -> Self {
        Self::new([1.0, 0.01, 10.0, 20.0, 0.0].map(T::lit), T::lit(0.95), T::lit(1.4), T::lit(5.0))
            .expect("valid parameters")
    }

    pub fn enhanced_gamma_slise() -> Self {
        Self::new([0.7, 0.00092, 887.0, 20.0, 0.0].map(T::lit), T::lit(0.96), T::lit(1.4), T::lit(10.0))
            .expect("valid parameters")
    }

    pub fn heights(&self) -> [T; 5] {
        self.v
    }

    /// `(w1, w2, w3)`.
    pub fn widths(&self) -> [T; 3] {
        [self.w1, self.w2, self.w3]
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.v.map(|x| x * factor), self.w1, self.w2, self.w3)
    }

    /// Step weight with breakpoints `(w1, 1/w1, w2, w3[, SUPPORT_CAP])`.
    pub fn realize(&self) -> StepWeightFunction<T> {
        let mut breakpoints = vec![self.w1, T::one() / self.w1, self.w2, self.w3];
        let mut values = self.v[..4].to_vec();
        let cap = T::lit(SUPPORT_CAP);
        if self.v[4] > T::zero() && self.w3 < cap {
            breakpoints.push(cap);
            values.push(self.v[4]);
        }
        StepWeightFunction::new(breakpoints, values).expect("parameter invariants give a valid weight")
    }

    /// Unconstrained coordinates: logs of the heights (`v5` only when
    /// positive), logit of `w1` and logs of the two width increments.
    fn to_search(self) -> Vec<T> {
        let mut out: Vec<T> = self.v.iter().filter(|x| **x > T::zero()).map(|x| x.ln()).collect();
        out.push((self.w1 / (T::one() - self.w1)).ln());
        out.push((self.w2 - T::one() / self.w1).ln());
        out.push((self.w3 - self.w2).ln());
        out
    }

    fn from_search(z: &[T], with_tail: bool) -> Result<Self> {
        let k = if with_tail { 5 } else { 4 };
        let mut v = [T::zero(); 5];
        for (vi, zi) in v.iter_mut().zip(&z[..k]) {
            *vi = zi.exp();
        }
        let w1 = T::one() / (T::one() + (-z[k]).exp());
        let w2 = T::one() / w1 + z[k + 1].exp();
        let w3 = w2 + z[k + 2].exp();
        Self::new(v, w1, w2, w3)
    }
}

/// Budgets for weight design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig<T> {
    /// Inner SLiSe fit per candidate.
    pub inner: OptimizerConfig<T>,
    /// Outer simplex search.
    pub outer: SimplexConfig<T>,
}

impl<T: Real> Default for DesignConfig<T> {
    fn default() -> Self {
        Self {
            inner: OptimizerConfig::default().with_max_iterations(300).with_max_evaluations(2000),
            outer: SimplexConfig { max_evaluations: 200, ..SimplexConfig::default() },
        }
    }
}

impl<T: Real> DesignConfig<T> {
    pub fn with_budget(mut self, evaluations: usize) -> Self {
        self.outer.max_evaluations = evaluations;
        self
    }
}

/// Worst-case rate at `gap` of the `m`-pole filter fitted to the realized
/// weight from the Gauss-Legendre start. Failed fits score `+inf`.
pub fn weight_objective<T: Real>(pw: &ParametricWeight<T>, gap: Gap<T>, m: usize, config: &DesignConfig<T>) -> T {
    let attempt = || -> Result<T> {
        let objective = SliseObjective::new(pw.realize(), m)?;
        let start = gauss_legendre_filter(m)?;
        let fit = fit_filter(&objective, &start, None, &config.inner)?;
        worst_case_rate(&fit.filter, gap)
    };
    match attempt() {
        Ok(rate) => rate,
        Err(e) => {
            warn!("rejecting weight candidate {pw:?}: {e}");
            T::infinity()
        }
    }
}

/// One objective evaluation of a design run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignLogRow<T> {
    pub evaluation: usize,
    pub objective: T,
    pub weight: ParametricWeight<T>,
}

impl<T: Real> DesignLogRow<T> {
    /// Cells matching the header `evaluation,objective,v1,v2,v3,v4,v5,w1,w2,w3`.
    pub fn cells(&self) -> Vec<String> {
        let mut out = vec![self.evaluation.to_string(), self.objective.to_string()];
        out.extend(self.weight.v.iter().chain(&self.weight.widths()).map(|x| x.to_string()));
        out
    }
}

pub const DESIGN_LOG_HEADER: &str = "evaluation,objective,v1,v2,v3,v4,v5,w1,w2,w3";

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome<T> {
    pub weight: ParametricWeight<T>,
    /// Objective of `weight`; `NaN` when nothing was evaluated.
    pub objective: T,
    pub report: OptimizerReport<T>,
    pub log: Vec<DesignLogRow<T>>,
}

/// Nelder-Mead over the reparametrized weight, so every candidate is feasible.
/// The best candidate seen is returned, never worse than `start`.
pub fn design_weight<T: Real>(
    start: &ParametricWeight<T>,
    gap: Gap<T>,
    m: usize,
    config: &DesignConfig<T>,
) -> Result<DesignOutcome<T>> {
    if m == 0 {
        return Err(domain("pole count must be positive"));
    }
    let with_tail = start.v[4] > T::zero();
    let z0 = start.to_search();
    // the coordinate round trip is inexact, so the start is always decoded to itself
    let decode = |z: &[T]| if z == z0.as_slice() { Ok(*start) } else { ParametricWeight::from_search(z, with_tail) };
    let log = RefCell::new(Vec::new());
    let objective = |z: &[T]| -> T {
        let Ok(pw) = decode(z) else { return T::infinity() };
        let value = weight_objective(&pw, gap, m, config);
        let mut log = log.borrow_mut();
        let evaluation = log.len() + 1;
        debug!("design evaluation {evaluation}: {value:e}");
        log.push(DesignLogRow { evaluation, objective: value, weight: pw });
        value
    };
    let report = nelder_mead(objective, &z0, &config.outer)?;
    let log = log.into_inner();
    let weight = decode(&report.solution)?;
    Ok(DesignOutcome { weight, objective: report.final_loss, report, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::BuiltinWeight;

    #[test]
    fn gamma_parameters_match_the_builtin_weight() {
        let realized = ParametricWeight::<f64>::gamma_slise().realize();
        let builtin = BuiltinWeight::GammaSlise.weight::<f64>();
        for k in 0..=1200 {
            let x = k as f64 * 0.005;
            // the template puts the second breakpoint at 1/0.95, the table at 1.05
            if (1.05..1.0 / 0.95).contains(&x) {
                continue;
            }
            assert_eq!(realized.value(x), builtin.value(x), "x = {x}");
        }
    }

    #[test]
    fn enhanced_parameters_match_the_builtin_weight() {
        let realized = ParametricWeight::<f64>::enhanced_gamma_slise().realize();
        let builtin = BuiltinWeight::EnhancedGammaSlise.weight::<f64>();
        for k in 0..=2400 {
            let x = k as f64 * 0.005;
            if (1.0 / 0.96..1.0417).contains(&x) {
                continue;
            }
            assert_eq!(realized.value(x), builtin.value(x), "x = {x}");
        }
    }

    #[test]
    fn positive_tail_extends_to_the_cap() {
        let pw = ParametricWeight::new([1.0, 0.1, 2.0, 3.0, 0.5], 0.5, 2.5, 4.0).unwrap();
        let w = pw.realize();
        assert_eq!(w.breakpoints(), &[0.5, 2.0, 2.5, 4.0, SUPPORT_CAP]);
        assert_eq!(w.value(7.0), 0.5);
        assert_eq!(w.value(11.0), 0.0);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(ParametricWeight::new([1.0; 5], 1.2, 2.0, 3.0).is_err());
        assert!(ParametricWeight::new([1.0; 5], 0.5, 1.5, 3.0).is_err());
        assert!(ParametricWeight::new([1.0; 5], 0.5, 2.5, 2.4).is_err());
        assert!(ParametricWeight::new([1.0, 0.0, 1.0, 1.0, 1.0], 0.5, 2.5, 3.0).is_err());
    }

    #[test]
    fn search_coordinates_round_trip() {
        for pw in [
            ParametricWeight::<f64>::gamma_slise(),
            ParametricWeight::new([1.0, 0.1, 2.0, 3.0, 0.5], 0.5, 2.5, 4.0).unwrap(),
        ] {
            let z = pw.to_search();
            let back = ParametricWeight::from_search(&z, pw.v[4] > 0.0).unwrap();
            for (a, b) in back.v.iter().chain(&back.widths()).zip(pw.v.iter().chain(&pw.widths())) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_budget_returns_the_start() {
        let start = ParametricWeight::<f64>::gamma_slise();
        let out = design_weight(&start, Gap::new(0.95).unwrap(), 4, &DesignConfig::default().with_budget(0)).unwrap();
        assert_eq!(out.weight, start);
        assert!(out.log.is_empty());
    }
}
