//! Exact scalar samplers in log domain: Gamma and Beta with integer shapes,
//! and the uniform angle.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::special::log_add_exp;

/// Natural log of a positive quantity whose linear value may underflow.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::numeric("log value is NaN"));
        }
        Ok(Self(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

/// `ln X` with `X ~ Gamma(shape, 1)`.
///
/// Marsaglia–Tsang squeeze/rejection; the accepted value `d·(1 + c·x)^3` is
/// returned through its logarithm so large shapes never overflow.
pub fn sample_log_gamma(shape: u64, rng: &mut RandomStream) -> Result<LogValue> {
    if shape == 0 {
        return Err(Error::domain("gamma shape must be >= 1"));
    }
    Ok(LogValue(log_gamma_unchecked(shape as f64, rng)))
}

fn log_gamma_unchecked(shape: f64, rng: &mut RandomStream) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    let ln_d = d.ln();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let base = 1.0 + c * x;
        if base <= 0.0 {
            continue;
        }
        let ln_v = 3.0 * base.ln();
        let v = base * base * base;
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + ln_v) {
            return ln_d + ln_v;
        }
    }
}

/// `ln X` with `X ~ Beta(a, b)`, built as `G_a / (G_a + G_b)`.
pub fn sample_log_beta(a: u64, b: u64, rng: &mut RandomStream) -> Result<LogValue> {
    if a == 0 || b == 0 {
        return Err(Error::domain(format!(
            "beta parameters must be >= 1, got ({a}, {b})"
        )));
    }
    let ga = log_gamma_unchecked(a as f64, rng);
    let gb = log_gamma_unchecked(b as f64, rng);
    let value = ga - log_add_exp(ga, gb);
    Ok(LogValue(value.min(0.0)))
}

/// Uniform angle on `[0, 2π)`.
pub fn sample_angle(rng: &mut RandomStream) -> f64 {
    loop {
        let theta = rng.gen::<f64>() * TAU;
        if theta < TAU {
            return theta;
        }
    }
}
