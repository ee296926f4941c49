#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use filter_forge::Filter;

/// Worst-case rate from uniform grids: `n` points on `[0, G]` and `n` points
/// on `[1/G, 64/G]`.
pub fn dense_worst_case(filter: &Filter, g: f64, n: usize) -> f64 {
    let step = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
    let inner = (0..n).map(|k| filter.value(step(0.0, g, k)).abs()).fold(f64::INFINITY, f64::min);
    let outer = (0..n).map(|k| filter.value(step(1.0 / g, 64.0 / g, k)).abs()).fold(0.0, f64::max);
    outer / inner
}

/// The two eigenvalue distributions used for the expected rate.
#[derive(Clone, Copy, Debug)]
pub enum Sampler {
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Centered normal with standard deviation `sigma`.
    Normal { sigma: f64 },
}

// Standard normal conditioned on z >= a > 0, by exponential rejection.
fn normal_tail(rng: &mut ChaCha8Rng, a: f64) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    let exp = Exp::new(lambda).unwrap();
    loop {
        let z = a + exp.sample(rng);
        if rng.random::<f64>() <= (-0.5 * (z - lambda).powi(2)).exp() {
            return z;
        }
    }
}

impl Sampler {
    fn inside(self, rng: &mut ChaCha8Rng, g: f64) -> f64 {
        match self {
            Sampler::Uniform { .. } => rng.random_range(-g..=g),
            Sampler::Normal { sigma } => loop {
                let z: f64 = StandardNormal.sample(rng);
                let x = sigma * z;
                if x.abs() <= g {
                    return x;
                }
            },
        }
    }

    fn outside(self, rng: &mut ChaCha8Rng, g: f64) -> f64 {
        let magnitude = match self {
            Sampler::Uniform { half_width } => rng.random_range(1.0 / g..=half_width),
            Sampler::Normal { sigma } => sigma * normal_tail(rng, 1.0 / (g * sigma)),
        };
        if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// Monte Carlo estimate of `E[|r(Y)| / |r(X)|]` with independent `X` inside
/// `[-G, G]` and `Y` outside `[-1/G, 1/G]`, `n` draws each.
pub fn monte_carlo_expected(filter: &Filter, sampler: Sampler, g: f64, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inner = 0.0;
    let mut outer = 0.0;
    for _ in 0..n {
        inner += 1.0 / filter.value(sampler.inside(&mut rng, g)).abs();
        outer += filter.value(sampler.outside(&mut rng, g)).abs();
    }
    (inner / n as f64) * (outer / n as f64)
}
