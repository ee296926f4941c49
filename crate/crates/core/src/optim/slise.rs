//! Fitting rational filters to a SLiSe objective.

use log::warn;

use super::{bfgs_minimize, box_bfgs_minimize, BoxBounds, OptimizerConfig, OptimizerReport};
use crate::error::{domain, Result};
use crate::filter::RationalFilter;
use crate::loss::{filter_from_real, filter_to_real, SliseObjective, MIN_POLE_IMAG};
use crate::scalar::Real;

/// Relative shortfall below the bound that is still snapped onto it.
pub const START_SNAP_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome<T> {
    pub filter: RationalFilter<T>,
    /// SLiSe residual of `filter`.
    pub loss: T,
    pub report: OptimizerReport<T>,
}

/// Bounds on the real embedding enforcing `Im w_i >= lb`; everything else is free.
pub fn imaginary_part_bounds<T: Real>(m: usize, lb: T) -> BoxBounds<T> {
    let mut lower = vec![T::neg_infinity(); 4 * m];
    for l in lower.iter_mut().skip(3 * m) {
        *l = lb;
    }
    BoxBounds::new(lower, vec![T::infinity(); 4 * m]).expect("lower <= +inf")
}

/// Real embedding of `start`, with poles that miss `lb` by less than
/// [`START_SNAP_TOLERANCE`] (relative) raised onto the bound.
pub(crate) fn feasible_start<T: Real>(start: &RationalFilter<T>, lb: Option<T>) -> Result<Vec<T>> {
    let mut x = filter_to_real(start);
    let m = start.m();
    if let Some(lb) = lb {
        let snap = lb * (T::one() - T::lit(START_SNAP_TOLERANCE));
        for i in 0..m {
            let im = x[3 * m + i];
            if im < snap {
                return Err(domain(format!(
                    "start pole {i} has Im = {im} below the bound {lb}; the start must lie in the bounds"
                )));
            }
            if im < lb {
                warn!("raising start pole {i} from Im = {im} onto the bound {lb}");
                x[3 * m + i] = lb;
            }
        }
    }
    Ok(x)
}

pub(crate) fn check_bound<T: Real>(lb: Option<T>) -> Result<()> {
    match lb {
        Some(lb) if !(lb >= T::lit(MIN_POLE_IMAG)) || !lb.is_finite() => {
            Err(domain(format!("lower bound on |Im w| must be finite and at least {MIN_POLE_IMAG:e}, got {lb}")))
        }
        _ => Ok(()),
    }
}

/// Minimizes the SLiSe residual from `start`.
///
/// Without `lb` this is plain BFGS on the real embedding; with `lb` the
/// imaginary parts of the poles are kept `>= lb` by the box solver.
pub fn fit_filter<T: Real>(
    objective: &SliseObjective<T>,
    start: &RationalFilter<T>,
    lb: Option<T>,
    config: &OptimizerConfig<T>,
) -> Result<FitOutcome<T>> {
    if start.m() != objective.m() {
        return Err(domain(format!("start has {} poles, objective expects {}", start.m(), objective.m())));
    }
    check_bound(lb)?;
    let x0 = feasible_start(start, lb)?;
    let f = |v: &[T]| objective.loss_and_real_gradient(v).ok();
    let report = match lb {
        None => bfgs_minimize(f, &x0, config)?,
        Some(lb) => box_bfgs_minimize(f, &x0, &imaginary_part_bounds(start.m(), lb), config)?,
    };
    let filter = filter_from_real(&report.solution)?;
    let loss = report.final_loss;
    Ok(FitOutcome { filter, loss, report })
}
