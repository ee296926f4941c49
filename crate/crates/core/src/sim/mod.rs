//! Subspace iteration with rational filters on synthetic dense Hermitian
//! problems with a planted spectrum.

pub mod matrix;

use log::{debug, warn};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::filter::{RationalFilter, SearchInterval};
use crate::scalar::Real;
pub use matrix::{householder_qr, jacobi_eigen, CMatrix, Lu};

/// Dense Hermitian matrix `U diag(spectrum) U^H` with known eigenvectors.
#[derive(Debug, Clone)]
pub struct SyntheticProblem<T> {
    spectrum: Vec<T>,
    seed: u64,
    matrix: CMatrix<T>,
    eigenvectors: CMatrix<T>,
    interval: SearchInterval<T>,
}

impl<T: Real> SyntheticProblem<T> {
    pub fn n(&self) -> usize {
        self.spectrum.len()
    }

    pub fn spectrum(&self) -> &[T] {
        &self.spectrum
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Column `j` belongs to `spectrum()[j]`.
    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    pub fn interval(&self) -> SearchInterval<T> {
        self.interval
    }

    /// Same matrix, different search interval.
    pub fn with_interval(mut self, interval: SearchInterval<T>) -> Self {
        self.interval = interval;
        self
    }

    /// Indices of planted eigenvalues strictly inside the interval.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.interval.to_canonical(self.spectrum[i]).abs() < T::one()).collect()
    }

    /// Largest `|lambda|`, which is the spectral norm.
    pub fn norm(&self) -> T {
        self.spectrum.iter().map(|l| l.abs()).fold(T::zero(), T::max)
    }
}

fn gaussian<T: Real>(rng: &mut ChaCha8Rng) -> Complex<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re * std::f64::consts::FRAC_1_SQRT_2), T::lit(im * std::f64::consts::FRAC_1_SQRT_2))
}

fn gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Builds the problem with search interval `(-1, 1)`. Seed 0 uses the
/// identity as eigenvector matrix, so the result is diagonal; other seeds draw
/// a random unitary.
pub fn generate_problem<T: Real>(spectrum: &[T], seed: u64) -> Result<SyntheticProblem<T>> {
    let n = spectrum.len();
    if n == 0 {
        return Err(domain("spectrum is empty"));
    }
    if spectrum.iter().any(|l| !l.is_finite()) {
        return Err(domain("spectrum must be finite"));
    }
    let u = if seed == 0 {
        CMatrix::identity(n)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        householder_qr(&gaussian_matrix::<T>(n, n, &mut rng)).0
    };
    let mut scaled = u.clone();
    for (j, &l) in spectrum.iter().enumerate() {
        scaled.column_mut(j).iter_mut().for_each(|z| *z = *z * l);
    }
    let mut matrix = scaled.matmul(&u.adjoint());
    matrix.symmetrize();
    Ok(SyntheticProblem {
        spectrum: spectrum.to_vec(),
        seed,
        matrix,
        eigenvectors: u,
        interval: SearchInterval::new(-T::one(), T::one())?,
    })
}

/// `r(A) V`, with `r` acting on the interval-canonicalized matrix.
///
/// Each of the `4m` shifted systems is solved by its own LU factorization; the
/// solves run in parallel and are summed in a fixed order.
pub fn apply_filter<T: Real>(
    filter: &RationalFilter<T>,
    problem: &SyntheticProblem<T>,
    v: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    let a = problem.matrix();
    let n = a.rows();
    if v.rows() != n {
        return Err(domain(format!("block has {} rows, matrix has {n}", v.rows())));
    }
    let center = problem.interval().midpoint();
    let radius = problem.interval().radius();
    let shifts: Vec<(Complex<T>, Complex<T>)> = filter
        .poles()
        .iter()
        .zip(filter.coeffs())
        .flat_map(|(&w, &b)| [(w, b), (w.conj(), b.conj()), (-w, -b), (-w.conj(), -b.conj())])
        .collect();
    let terms: Vec<Result<CMatrix<T>>> = shifts
        .par_iter()
        .map(|&(w, b)| {
            // b / (mu - w) with mu = (lambda - c) / rho equals b rho / (lambda - (c + rho w))
            let z = w * radius + center;
            let mut shifted = a.clone();
            for i in 0..n {
                shifted[(i, i)] -= z;
            }
            let mut x = Lu::factor(&shifted)?.solve(v);
            x.scale(b * radius);
            Ok(x)
        })
        .collect();
    let mut out = CMatrix::zeros(n, v.cols());
    for t in terms {
        out.add_scaled(&t?, Complex::new(T::one(), T::zero()));
    }
    Ok(out)
}

/// `sum |lambda|` over the entries in `(-1, 1)`.
pub fn eigentrace<T: Real>(values: &[T]) -> T {
    values.iter().filter(|l| l.abs() < T::one()).map(|l| l.abs()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig<T> {
    /// Stop once the relative eigentrace change drops to this.
    pub tolerance: T,
    pub max_iterations: usize,
    /// Seed of the random starting block.
    pub seed: u64,
    /// When set, convergence additionally requires every accepted pair to
    /// satisfy `||A v - lambda v|| <= residual_tolerance * ||A||`.
    pub residual_tolerance: Option<T>,
}

impl<T: Real> Default for SimulationConfig<T> {
    fn default() -> Self {
        Self { tolerance: T::lit(1e-13), max_iterations: 50, seed: 1, residual_tolerance: None }
    }
}

/// Per-iteration diagnostics of a subspace iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationHistory<T> {
    /// Eigentrace of the canonicalized Ritz values.
    pub eigentraces: Vec<T>,
    /// Relative eigentrace change; `NaN` for the first iteration.
    pub relative_changes: Vec<T>,
    /// Largest distance of a planted interior eigenvector from the current subspace.
    pub subspace_errors: Vec<T>,
    /// `max |Q^H Q - I|`.
    pub orthogonality_defects: Vec<T>,
    /// Ritz values found inside the interval, spurious ones included.
    pub interior_counts: Vec<usize>,
}

impl<T> IterationHistory<T> {
    pub fn iterations(&self) -> usize {
        self.eigentraces.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    /// Unit eigenvector.
    pub vector: Vec<Complex<T>>,
    /// `||A v - lambda v||`.
    pub residual: T,
}

/// Ritz pairs inside the interval with a residual above this fraction of the
/// interval radius are treated as spurious: they are left out of the
/// eigentrace and of the returned pairs.
pub const SPURIOUS_RESIDUAL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceResult<T> {
    /// Non-spurious Ritz pairs inside the interval, ascending.
    pub pairs: Vec<EigenPair<T>>,
    pub history: IterationHistory<T>,
    pub converged: bool,
}

fn orthonormalize<T: Real>(x: &CMatrix<T>, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    let mut x = x.clone();
    for attempt in 0..4 {
        let (q, diag) = householder_qr(&x);
        let largest = diag.iter().copied().fold(T::zero(), T::max);
        let collapsed: Vec<usize> = (0..diag.len()).filter(|&j| !(diag[j] > T::lit(1e-12) * largest)).collect();
        if collapsed.is_empty() || attempt == 3 {
            return q;
        }
        warn!("rank collapse in {} columns, restarting them with random vectors", collapsed.len());
        let scale = x.max_abs().max(T::min_positive_value());
        for &j in &collapsed {
            for z in x.column_mut(j) {
                *z = gaussian::<T>(rng) * scale;
            }
        }
    }
    unreachable!("loop returns on its last attempt")
}

/// Subspace iteration with `block` columns until the relative eigentrace
/// change reaches `config.tolerance` with an unchanged number of accepted
/// Ritz pairs.
///
/// Non-convergence is not an error: the last Ritz pairs are returned with
/// `converged = false`.
pub fn subspace_iteration<T: Real>(
    problem: &SyntheticProblem<T>,
    block: usize,
    filter: &RationalFilter<T>,
    config: &SimulationConfig<T>,
) -> Result<SubspaceResult<T>> {
    let n = problem.n();
    if block == 0 || block > n {
        return Err(domain(format!("block size must lie in 1..={n}, got {block}")));
    }
    if block < problem.interior_indices().len() {
        return Err(domain(format!(
            "block size {block} is below the {} eigenvalues inside the interval",
            problem.interior_indices().len()
        )));
    }
    if !(config.tolerance > T::zero()) {
        return Err(domain("tolerance must be positive"));
    }
    let a = problem.matrix();
    let interval = problem.interval();
    let interior = problem.interior_indices();
    let spurious = T::lit(SPURIOUS_RESIDUAL) * interval.radius();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // keep the start block independent of problems generated from the same seed
    rng.set_stream(1);
    let mut v = gaussian_matrix::<T>(n, block, &mut rng);
    let mut history = IterationHistory::default();
    let mut previous: Option<(T, usize)> = None;
    let mut converged = false;
    let mut pairs = Vec::new();

    for iteration in 1..=config.max_iterations {
        let x = apply_filter(filter, problem, &v)?;
        let q = orthonormalize(&x, &mut rng);
        let mut gram = q.adjoint_matmul(&q);
        gram.add_scaled(&CMatrix::identity(block), Complex::new(-T::one(), T::zero()));
        history.orthogonality_defects.push(gram.max_abs());

        let aq = a.matmul(&q);
        let reduced = q.adjoint_matmul(&aq);
        let (values, y) = jacobi_eigen(&reduced)?;
        v = q.matmul(&y);
        let av = aq.matmul(&y);
        let inside: Vec<usize> = (0..block).filter(|&j| interval.to_canonical(values[j]).abs() < T::one()).collect();
        history.interior_counts.push(inside.len());
        pairs = inside
            .iter()
            .map(|&j| {
                let value = values[j];
                let residual =
                    av.column(j).iter().zip(v.column(j)).map(|(p, u)| (*p - *u * value).norm_sqr()).sum::<T>().sqrt();
                EigenPair { value, vector: v.column(j).to_vec(), residual }
            })
            .filter(|pair| pair.residual <= spurious)
            .collect::<Vec<_>>();
        let canonical: Vec<T> = pairs.iter().map(|p| interval.to_canonical(p.value)).collect();
        let trace = eigentrace(&canonical);
        history.eigentraces.push(trace);

        let error = interior
            .iter()
            .map(|&j| {
                let u = problem.eigenvectors().column(j);
                let coeffs: Vec<Complex<T>> = (0..block).map(|c| matrix::dotc(q.column(c), u)).collect();
                let mut resid = u.to_vec();
                for (c, coef) in coeffs.iter().enumerate() {
                    for (r, qi) in resid.iter_mut().zip(q.column(c)) {
                        *r -= *qi * *coef;
                    }
                }
                matrix::norm2(&resid)
            })
            .fold(T::zero(), T::max);
        history.subspace_errors.push(error);

        let change = match previous {
            None => T::nan(),
            Some((_, count)) if count != pairs.len() => T::infinity(),
            Some((p, _)) if trace == T::zero() => (trace - p).abs(),
            Some((p, _)) => (trace - p).abs() / trace.abs(),
        };
        history.relative_changes.push(change);
        debug!(
            "iteration {iteration}: {} accepted of {} Ritz values inside, eigentrace {trace}, change {change:e}, \
             subspace error {error:e}",
            pairs.len(),
            inside.len()
        );
        previous = Some((trace, pairs.len()));
        let accurate =
            config.residual_tolerance.is_none_or(|rt| pairs.iter().all(|p| p.residual <= rt * problem.norm()));
        if change <= config.tolerance && accurate {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!("subspace iteration stopped after {} iterations without convergence", config.max_iterations);
    }
    Ok(SubspaceResult { pairs, history, converged })
}

/// Measured convergence against the predicted per-iteration contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct RateComparison<T> {
    pub measured: T,
    /// `|r(lambda_{N+1})| / min_{i <= k} |r(lambda_i)|` with eigenvalues sorted
    /// by `|r|` descending and `k` the interior count.
    pub predicted: T,
    /// Whether the `k` largest `|r(lambda)|` all belong to interior eigenvalues.
    pub ordering_holds: bool,
    pub iterations: usize,
    pub converged: bool,
}

/// Subspace-error reductions at or below this are treated as round-off.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Runs the iteration with `block` columns and compares the observed
/// subspace-error reduction with the prediction from the planted spectrum.
///
/// The measured rate is the geometric mean of successive error ratios,
/// dropping the first and the last ratio and any ratio whose new error has
/// reached [`ERROR_FLOOR`]. If nothing remains, the ratios are used as they
/// are.
pub fn measured_vs_predicted_rate<T: Real>(
    problem: &SyntheticProblem<T>,
    block: usize,
    filter: &RationalFilter<T>,
    config: &SimulationConfig<T>,
) -> Result<RateComparison<T>> {
    let interval = problem.interval();
    let interior = problem.interior_indices();
    let k = interior.len();
    if block >= problem.n() {
        return Err(domain("prediction needs block < n"));
    }
    let mut by_response: Vec<(T, bool)> = problem
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, &l)| (filter.value(interval.to_canonical(l)).abs(), interior.contains(&i)))
        .collect();
    by_response.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite responses"));
    let ordering_holds = by_response[..k].iter().all(|(_, inside)| *inside);
    if !ordering_holds {
        warn!("filter response does not rank the interior eigenvalues first; prediction is unreliable");
    }
    let smallest_inside = interior
        .iter()
        .map(|&i| filter.value(interval.to_canonical(problem.spectrum()[i])).abs())
        .fold(T::infinity(), T::min);
    if !(smallest_inside > T::zero()) {
        return Err(Error::Numeric("filter vanishes at an interior eigenvalue".into()));
    }
    let predicted = by_response[block].0 / smallest_inside;

    let run = subspace_iteration(problem, block, filter, config)?;
    let errors = &run.history.subspace_errors;
    let ratios: Vec<T> = errors.windows(2).map(|w| w[1] / w[0]).collect();
    let floor = T::lit(ERROR_FLOOR);
    let middle: Vec<T> = if ratios.len() > 2 {
        ratios[1..ratios.len() - 1]
            .iter()
            .zip(&errors[2..errors.len() - 1])
            .filter(|(_, e)| **e > floor)
            .map(|(r, _)| *r)
            .collect()
    } else {
        Vec::new()
    };
    let usable: Vec<T> = if middle.is_empty() {
        ratios.iter().zip(&errors[1..]).filter(|(_, e)| **e > floor).map(|(r, _)| *r).collect()
    } else {
        middle
    };
    let measured = if usable.is_empty() {
        T::nan()
    } else {
        (usable.iter().map(|r| r.ln()).sum::<T>() / T::from_count(usable.len())).exp()
    };
    Ok(RateComparison {
        measured,
        predicted,
        ordering_holds,
        iterations: run.history.iterations(),
        converged: run.converged,
    })
}

/// Block size `ceil(multiplier * interior)`.
pub fn block_size(interior: usize, multiplier: f64) -> Result<usize> {
    if !(multiplier >= 1.0) || !multiplier.is_finite() {
        return Err(domain(format!("multiplier must be at least 1, got {multiplier}")));
    }
    // tolerate representation error in products such as 1.1 * 20
    Ok(((multiplier * interior as f64) - 1e-9).ceil().max(interior as f64) as usize)
}

/// Problem `index` of the standard suite: size 200, 20 eigenvalues spread over
/// `[-0.95, 0.95]`, 60 exterior ones clustered in `1.05 <= |lambda| <= 1.1` and
/// the remaining 120 in `1.1 <= |lambda| <= 5`. The index seeds both the
/// spectrum and the eigenvectors.
pub fn standard_problem<T: Real>(index: u64) -> Result<SyntheticProblem<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index);
    let inside = Uniform::new_inclusive(-0.95, 0.95).expect("valid range");
    let cluster = Uniform::new_inclusive(1.05, 1.1).expect("valid range");
    let far = Uniform::new_inclusive(1.1, 5.0).expect("valid range");
    let mut spectrum: Vec<f64> = (0..20).map(|_| inside.sample(&mut rng)).collect();
    for k in 0..60 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        spectrum.push(sign * cluster.sample(&mut rng));
    }
    for k in 0..120 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        spectrum.push(sign * far.sample(&mut rng));
    }
    generate_problem(&spectrum.iter().map(|&l| T::lit(l)).collect::<Vec<T>>(), index + 1)
}
