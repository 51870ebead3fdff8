//! Empirical distributions, Kolmogorov–Smirnov distances, digamma and the
//! fourth-moment fluctuation diagnostic.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::export::Sig17;
use crate::oracle::oracle_spectrum;
use crate::rng::RandomStream;

/// Sorted, NaN-free sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    values: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("empirical measure cannot contain NaN"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of values `<= x`.
    pub fn ecdf(&self, x: f64) -> Result<f64> {
        if self.values.is_empty() {
            return Err(Error::domain("ecdf of an empty measure"));
        }
        let k = self.values.partition_point(|&v| v <= x);
        Ok(k as f64 / self.values.len() as f64)
    }

    /// Fraction of values inside the closed interval `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let a = self.values.partition_point(|&v| v < lo);
        let b = self.values.partition_point(|&v| v <= hi);
        b.saturating_sub(a) as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Free-function form of [`EmpiricalMeasure::ecdf`].
pub fn ecdf(measure: &EmpiricalMeasure, x: f64) -> Result<f64> {
    measure.ecdf(x)
}

/// One-sample KS distance against a continuous CDF, evaluated exactly at the
/// jump points of the empirical CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(measure: &EmpiricalMeasure, cdf: F) -> f64 {
    ks_one_sample_with_left_limits(measure, &cdf, &cdf)
}

/// One-sample KS distance against a CDF that may jump. `cdf` is the
/// right-continuous CDF and `cdf_left(x)` its left limit `F(x-)`; the
/// deviation below each sample point is measured against the left limit.
pub fn ks_one_sample_with_left_limits<F, G>(measure: &EmpiricalMeasure, cdf: F, cdf_left: G) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = measure.count() as f64;
    measure
        .values()
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &x)| {
            let above = (i as f64 + 1.0) / n - cdf(x);
            let below = cdf_left(x) - i as f64 / n;
            acc.max(above).max(below)
        })
}

/// Two-sample KS distance `sup |F_a − F_b|`, computed by a linear merge.
pub fn ks_two_sample(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("two-sample KS needs two non-empty samples"));
    }
    let (xs, ys) = (a.values(), b.values());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // once either side is exhausted the gap only shrinks towards 0
    Ok(d)
}

/// Digamma ψ(x) for `x > 0`: upward recurrence to `x >= 10`, then the
/// asymptotic expansion through the `x^-10` term.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "digamma needs a finite x > 0, got {x}"
        )));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    Ok(x.ln() - 0.5 * inv - series - shift)
}

/// Machine-readable KS outcome.
#[derive(Clone, Debug, Serialize)]
pub struct KsReport {
    pub name: String,
    pub statistic: Sig17,
    pub sample_sizes: Vec<usize>,
    pub seed: u64,
    pub threshold: Sig17,
    pub pass: bool,
}

impl KsReport {
    pub fn new(
        name: impl Into<String>,
        statistic: f64,
        sample_sizes: Vec<usize>,
        seed: u64,
        threshold: f64,
    ) -> Self {
        Self {
            name: name.into(),
            statistic: Sig17(statistic),
            sample_sizes,
            seed,
            threshold: Sig17(threshold),
            pass: statistic <= threshold,
        }
    }
}

fn in_half_plane(arg: f64, start: f64) -> bool {
    (arg - start).rem_euclid(TAU) < PI
}

/// Monte Carlo estimate of `E[Σ_j (h(Z_j) − E h)]^4 / n^2` with `h` the
/// indicator of the half-plane `arg z ∈ [angle, angle + π)`.
///
/// Uses joint eigenvalue draws from the matrix oracle. `E h` comes from an
/// independent pilot run of `reps` draws; the main run then uses another
/// `reps` draws from the same stream.
pub fn fourth_moment_ratio(
    spec: &EnsembleSpec,
    halfplane_angle: f64,
    reps: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    if reps < 100 {
        return Err(Error::domain(format!(
            "fourth_moment_ratio needs reps >= 100, got {reps}"
        )));
    }
    let n = spec.n() as f64;
    let count_in = |rng: &mut RandomStream| -> Result<f64> {
        let spectrum = oracle_spectrum(spec, rng)?;
        Ok(spectrum
            .arguments()
            .filter(|&a| in_half_plane(a, halfplane_angle))
            .count() as f64)
    };

    let mut pilot = 0.0;
    for _ in 0..reps {
        pilot += count_in(rng)?;
    }
    let p_hat = pilot / (reps as f64 * n);

    let mut fourth = 0.0;
    for _ in 0..reps {
        let s = count_in(rng)? - n * p_hat;
        fourth += s.powi(4);
    }
    Ok(fourth / reps as f64 / (n * n))
}
