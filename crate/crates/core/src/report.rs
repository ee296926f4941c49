//! Comparison tables: worst-case rates over gaps and pole counts, and
//! simulated iteration counts over a problem suite.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::filter::RationalFilter;
use crate::gauss::gauss_legendre_filter;
use crate::loss::SliseObjective;
use crate::optim::{fit_filter, OptimizerConfig};
use crate::rate::{worst_case_rate, Gap};
use crate::scalar::Real;
use crate::sim::{block_size, measured_vs_predicted_rate, SimulationConfig, SyntheticProblem};
use crate::tables::BuiltinFilter;
use crate::weight::BuiltinWeight;

/// Filter families compared in the rate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterFamily {
    GaussLegendre,
    GammaSlise,
    EnhancedGammaSlise,
}

impl FilterFamily {
    pub const ALL: [FilterFamily; 3] =
        [FilterFamily::GaussLegendre, FilterFamily::GammaSlise, FilterFamily::EnhancedGammaSlise];

    pub fn name(self) -> &'static str {
        match self {
            FilterFamily::GaussLegendre => "gauss-legendre",
            FilterFamily::GammaSlise => "gamma-slise",
            FilterFamily::EnhancedGammaSlise => "enhanced-gamma-slise",
        }
    }

    /// Member with `m` representative poles. The 16-pole members of the
    /// weighted families are the tabulated filters; other sizes are fitted to
    /// the family weight from the Gauss-Legendre filter of the same size.
    pub fn filter<T: Real>(self, m: usize) -> Result<RationalFilter<T>> {
        let (weight, tabulated) = match self {
            FilterFamily::GaussLegendre => return gauss_legendre_filter(m),
            FilterFamily::GammaSlise => (BuiltinWeight::GammaSlise, BuiltinFilter::GammaSlise16),
            FilterFamily::EnhancedGammaSlise => {
                (BuiltinWeight::EnhancedGammaSlise, BuiltinFilter::EnhancedGammaSlise16)
            }
        };
        if m == 4 {
            return Ok(tabulated.filter());
        }
        let objective = SliseObjective::new(weight.weight(), m)?;
        let fit = fit_filter(&objective, &gauss_legendre_filter(m)?, None, &OptimizerConfig::default())?;
        Ok(fit.filter)
    }
}

impl fmt::Display for FilterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Lookup { kind: "filter family", name: s.to_string() })
    }
}

pub const RATE_HEADER: &str = "G,poles,filter,worst_case_rate";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow<T> {
    pub gap: T,
    pub poles: usize,
    pub family: FilterFamily,
    pub rate: T,
}

impl<T: Real> RateRow<T> {
    pub fn cells(&self) -> Vec<String> {
        vec![self.gap.to_string(), self.poles.to_string(), self.family.to_string(), self.rate.to_string()]
    }
}

/// Worst-case rates for every family, pole count and gap, ordered by pole
/// count, then gap, then family.
pub fn rate_table<T: Real>(families: &[FilterFamily], gaps: &[T], pole_counts: &[usize]) -> Result<Vec<RateRow<T>>> {
    if let Some(p) = pole_counts.iter().find(|p| **p == 0 || **p % 4 != 0) {
        return Err(domain(format!("pole counts must be positive multiples of 4, got {p}")));
    }
    let gaps = gaps.iter().map(|&g| Gap::new(g)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, FilterFamily)> =
        pole_counts.iter().flat_map(|&p| families.iter().map(move |&f| (p, f))).collect();
    let filters = jobs.par_iter().map(|&(p, f)| f.filter::<T>(p / 4)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &poles in pole_counts {
        for &gap in &gaps {
            for ((p, family), filter) in jobs.iter().zip(&filters) {
                if *p == poles {
                    rows.push(RateRow {
                        gap: gap.value(),
                        poles,
                        family: *family,
                        rate: worst_case_rate(filter, gap)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub const BENCHMARK_HEADER: &str = "problem_id,filter,N_multiplier,iterations,converged,predicted_rate,measured_rate";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow<T> {
    pub problem_id: usize,
    pub filter: String,
    pub multiplier: f64,
    pub iterations: usize,
    pub converged: bool,
    pub predicted_rate: T,
    pub measured_rate: T,
}

impl<T: Real> BenchmarkRow<T> {
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.problem_id.to_string(),
            self.filter.clone(),
            self.multiplier.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.predicted_rate.to_string(),
            self.measured_rate.to_string(),
        ]
    }
}

/// Runs every filter on every problem with block size
/// `ceil(multiplier * interior count)`.
pub fn benchmark<T: Real>(
    problems: &[SyntheticProblem<T>],
    filters: &[(String, RationalFilter<T>)],
    multiplier: f64,
    config: &SimulationConfig<T>,
) -> Result<Vec<BenchmarkRow<T>>> {
    let mut rows = Vec::new();
    for (problem_id, problem) in problems.iter().enumerate() {
        let block = block_size(problem.interior_indices().len(), multiplier)?;
        for (name, filter) in filters {
            let cmp = measured_vs_predicted_rate(problem, block, filter, config)?;
            rows.push(BenchmarkRow {
                problem_id,
                filter: name.clone(),
                multiplier,
                iterations: cmp.iterations,
                converged: cmp.converged,
                predicted_rate: cmp.predicted,
                measured_rate: cmp.measured,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_parse() {
        for f in FilterFamily::ALL {
            assert_eq!(f.name().parse::<FilterFamily>().unwrap(), f);
        }
        assert!("zolotarev".parse::<FilterFamily>().is_err());
    }

    #[test]
    fn table_shape_and_order() {
        let rows = rate_table::<f64>(&FilterFamily::ALL, &[0.9, 0.95], &[16]).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].gap, rows[0].family), (0.9, FilterFamily::GaussLegendre));
        assert_eq!((rows[5].gap, rows[5].family), (0.95, FilterFamily::EnhancedGammaSlise));
        assert!(rate_table::<f64>(&FilterFamily::ALL, &[0.9], &[10]).is_err());
    }
}
