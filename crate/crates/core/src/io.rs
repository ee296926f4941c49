//! JSON files for filters and weights, and CSV tables.
//!
//! Floats are written in shortest round-trip form (at most 17 significant
//! digits), so reading a written file reproduces every value bit for bit.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::RationalFilter;
use crate::scalar::Real;
use crate::weight::StepWeightFunction;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexEntry {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterFile {
    m: usize,
    poles: Vec<ComplexEntry>,
    coeffs: Vec<ComplexEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

fn parse_error(context: &str, message: impl Into<String>) -> Error {
    Error::Parse { context: context.to_string(), message: message.into() }
}

fn entry<T: Real>(z: &Complex<T>) -> ComplexEntry {
    ComplexEntry { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() }
}

fn scalar<T: Real>(v: f64, context: &str, field: &str) -> Result<T> {
    T::from_f64(v).ok_or_else(|| parse_error(context, format!("{field}: {v} is not representable")))
}

pub fn filter_to_json<T: Real>(filter: &RationalFilter<T>) -> String {
    let file = FilterFile {
        m: filter.m(),
        poles: filter.poles().iter().map(entry).collect(),
        coeffs: filter.coeffs().iter().map(entry).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

/// Parses a filter file; `context` (usually the path) prefixes error messages.
pub fn filter_from_json<T: Real>(text: &str, context: &str) -> Result<RationalFilter<T>> {
    let file: FilterFile = serde_json::from_str(text).map_err(|e| parse_error(context, e.to_string()))?;
    if file.poles.len() != file.m {
        return Err(parse_error(context, format!("field 'poles' has {} entries but m = {}", file.poles.len(), file.m)));
    }
    if file.coeffs.len() != file.m {
        return Err(parse_error(
            context,
            format!("field 'coeffs' has {} entries but m = {}", file.coeffs.len(), file.m),
        ));
    }
    let convert = |list: &[ComplexEntry], field: &str| -> Result<Vec<Complex<T>>> {
        list.iter()
            .enumerate()
            .map(|(i, z)| {
                let name = format!("{field}[{i}]");
                Ok(Complex::new(scalar(z.re, context, &name)?, scalar(z.im, context, &name)?))
            })
            .collect()
    };
    let poles = convert(&file.poles, "poles")?;
    let coeffs = convert(&file.coeffs, "coeffs")?;
    RationalFilter::new(poles, coeffs).map_err(|e| match e {
        Error::Invariant(msg) => Error::Invariant(format!("{context}: {msg}")),
        other => other,
    })
}

pub fn weight_to_json<T: Real>(weight: &StepWeightFunction<T>) -> String {
    let file = WeightFile {
        breakpoints: weight.breakpoints().iter().map(|b| b.to_f64_lossy()).collect(),
        values: weight.values().iter().map(|v| v.to_f64_lossy()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn weight_from_json<T: Real>(text: &str, context: &str) -> Result<StepWeightFunction<T>> {
    let file: WeightFile = serde_json::from_str(text).map_err(|e| parse_error(context, e.to_string()))?;
    if file.breakpoints.len() != file.values.len() {
        return Err(parse_error(
            context,
            format!("{} breakpoints but {} values", file.breakpoints.len(), file.values.len()),
        ));
    }
    let breakpoints =
        file.breakpoints.iter().map(|&b| scalar(b, context, "breakpoints")).collect::<Result<Vec<T>>>()?;
    let values = file.values.iter().map(|&v| scalar(v, context, "values")).collect::<Result<Vec<T>>>()?;
    StepWeightFunction::new(breakpoints, values).map_err(|e| match e {
        Error::Invariant(msg) => Error::Invariant(format!("{context}: {msg}")),
        other => other,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display()))))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display()))))
}

pub fn read_filter<T: Real>(path: &Path) -> Result<RationalFilter<T>> {
    filter_from_json(&read(path)?, &path.display().to_string())
}

pub fn write_filter<T: Real>(path: &Path, filter: &RationalFilter<T>) -> Result<()> {
    write(path, &(filter_to_json(filter) + "\n"))
}

pub fn read_weight<T: Real>(path: &Path) -> Result<StepWeightFunction<T>> {
    weight_from_json(&read(path)?, &path.display().to_string())
}

pub fn write_weight<T: Real>(path: &Path, weight: &StepWeightFunction<T>) -> Result<()> {
    write(path, &(weight_to_json(weight) + "\n"))
}

/// Renders a CSV table. Cells are written with `Display`, which for floats is
/// the shortest round-trip form and therefore deterministic.
pub fn csv_table<R, C>(header: &str, rows: R) -> String
where
    R: IntoIterator<Item = Vec<C>>,
    C: Display,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `samples` equispaced points of `r` on `[a, b]`, endpoints included, as CSV
/// with header `x,value`.
pub fn curve_csv<T: Real>(filter: &RationalFilter<T>, a: T, b: T, samples: usize) -> Result<String> {
    if samples < 2 || !(a < b) {
        return Err(Error::Domain(format!("need a < b and at least two samples, got [{a}, {b}] with {samples}")));
    }
    let rows = (0..samples).map(|k| {
        let x = if k + 1 == samples { b } else { a + (b - a) * T::from_count(k) / T::from_count(samples - 1) };
        vec![x, filter.value(x)]
    });
    Ok(csv_table("x,value", rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::BuiltinFilter;
    use crate::weight::BuiltinWeight;

    #[test]
    fn filter_round_trip_is_exact() {
        for b in BuiltinFilter::ALL {
            let f = b.filter::<f64>();
            let back: RationalFilter<f64> = filter_from_json(&filter_to_json(&f), "mem").unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn weight_round_trip_is_exact() {
        let w = BuiltinWeight::BoxSlise.weight::<f64>();
        let back: StepWeightFunction<f64> = weight_from_json(&weight_to_json(&w), "mem").unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn real_pole_is_an_invariant_violation() {
        let text = r#"{"m":1,"poles":[{"re":-0.5,"im":0.0}],"coeffs":[{"re":1.0,"im":0.0}]}"#;
        assert!(matches!(filter_from_json::<f64>(text, "f.json"), Err(Error::Invariant(_))));
    }

    #[test]
    fn count_mismatch_is_a_parse_error() {
        let text = r#"{"m":2,"poles":[{"re":-0.5,"im":0.5}],"coeffs":[{"re":1.0,"im":0.0}]}"#;
        let err = filter_from_json::<f64>(text, "f.json").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("poles"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = filter_from_json::<f64>("{\n \"m\": 1,\n \"poles\": [\n", "f.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("f.json") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn curve_samples() {
        let f = BuiltinFilter::GaussLegendre16.filter::<f64>();
        let csv = curve_csv(&f, -2.0, 2.0, 5).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "x,value");
        assert!(lines[1].starts_with("-2,") && lines[5].starts_with("2,"));
    }
}
