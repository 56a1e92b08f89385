//! Deterministic sampling of chart points and (optionally parallel) per-sample work.
//!
//! Points are always drawn sequentially from a ChaCha stream seeded by
//! [`SampleConfig::seed`], so the set of points, and every number derived
//! from them, is the same whether evaluation runs on one thread or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Chart, EvalError, Point};

/// How per-sample work is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    /// Data-parallel over samples. Falls back to sequential when the crate is
    /// built without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleConfig {
    pub samples: usize,
    /// Absolute tolerance for numeric zero tests.
    pub tol: f64,
    pub seed: u64,
    /// Draw at most `retry_factor * samples` points when points hit domain errors.
    pub retry_factor: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { samples: 100, tol: 1e-9, seed: 42, retry_factor: 20, exec: Exec::default() }
    }
}

impl SampleConfig {
    /// Defaults used by the standalone zero test.
    pub fn zero_test() -> Self {
        Self { samples: 50, ..Self::default() }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn max_attempts(&self) -> usize {
        self.samples.max(1) * self.retry_factor.max(1)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("only {got} of {needed} sample points were admissible after {attempts} draws (last failure: {last})")]
    Exhausted { needed: usize, got: usize, attempts: usize, last: EvalError },
}

/// A recorded point with the value computed there.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample<T> {
    pub point: Point,
    pub value: T,
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], exec: Exec, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Draws `n` points from `chart` and evaluates `f` at each, redrawing points
/// where `f` fails. Points are drawn in a fixed order and accepted in that
/// order, so the result does not depend on `cfg.exec`.
pub fn sample_with<T, F>(chart: &Chart, cfg: &SampleConfig, n: usize, f: F) -> Result<Vec<Sample<T>>, SampleError>
where
    T: Send,
    F: Fn(&Point) -> Result<T, EvalError> + Sync + Send,
{
    let mut rng = cfg.rng();
    let cap = n.max(1) * cfg.retry_factor.max(1);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    let mut last = None;
    while out.len() < n {
        if attempts >= cap {
            return Err(SampleError::Exhausted {
                needed: n,
                got: out.len(),
                attempts,
                last: last.unwrap_or(EvalError::NonFinite("sampling".into())),
            });
        }
        let batch = (n - out.len()).min(cap - attempts);
        let points: Vec<Point> = (0..batch).map(|_| chart.draw_point(&mut rng)).collect();
        attempts += batch;
        let results = map(&points, cfg.exec, |p| f(p));
        for (point, r) in points.into_iter().zip(results) {
            match r {
                Ok(value) if out.len() < n => out.push(Sample { point, value }),
                Ok(_) => {}
                Err(e) => last = Some(e),
            }
        }
    }
    Ok(out)
}

/// The first `n` points of the sample stream, without any admissibility filter.
pub fn raw_points(chart: &Chart, cfg: &SampleConfig, n: usize) -> Vec<Point> {
    let mut rng = cfg.rng();
    (0..n).map(|_| chart.draw_point(&mut rng)).collect()
}
