//! Finite-`n` scaling functions `F_n` and the limiting radial laws of the
//! scaled eigenvalue moduli.
//!
//! For truncated unitary products the radial coordinate is
//! `h_n(r) = (r^2 / b_n)^{1/γ_n}` and, when `F_n → F`, its limiting CDF is
//! `F⁻¹`. The Ginibre-product profile is the uniform law of
//! `|Z|^{2/m} / n` on `[0, 1]`.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::export::{sig17_opt, Sig17};
use crate::quadrature::{integrate, Tolerance};

/// Absolute tolerance for the `q`-profile integrals.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Target `|F(x) − y|` when inverting `F` numerically.
pub const INVERSION_TOL: f64 = 1e-13;
/// Step for finite differences of `F⁻¹`.
pub const FD_STEP: f64 = 1e-6;
/// Distance from 0 or 1 below which one-sided differences are used.
pub const FD_EDGE: f64 = 1e-4;
/// Points in the exported grid on `[0, 1]`.
pub const EXPORT_POINTS: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    GinibrePower,
    ArcLaw,
    GeneralF,
    CircularLaw,
}

/// Continuous limit profile `q(t)` of the ratios `n / n_j` at `t = j / m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QProfile {
    Constant {
        value: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// Piecewise-linear through `(t_i, q_i)`, `t_0 = 0`, `t_last = 1`.
    Tabulated {
        t: Vec<f64>,
        q: Vec<f64>,
    },
}

impl QProfile {
    pub fn constant(value: f64) -> Result<Self> {
        Self::validated(QProfile::Constant { value })
    }

    pub fn linear(intercept: f64, slope: f64) -> Result<Self> {
        Self::validated(QProfile::Linear { intercept, slope })
    }

    pub fn tabulated(t: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if t.len() != q.len() || t.len() < 2 {
            return Err(Error::domain(
                "q table needs matching t and q columns with at least two rows",
            ));
        }
        if t[0] != 0.0 || t[t.len() - 1] != 1.0 {
            return Err(Error::domain("q table must span t = 0 to t = 1"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "q table t column must be strictly increasing",
            ));
        }
        Self::validated(QProfile::Tabulated { t, q })
    }

    /// Tabulate `f` on a uniform grid of `points` nodes.
    pub fn tabulate<F: Fn(f64) -> f64>(f: F, points: usize) -> Result<Self> {
        let points = points.max(2);
        let t: Vec<f64> = (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect();
        let q = t.iter().map(|&x| f(x)).collect();
        Self::tabulated(t, q)
    }

    /// Parse `t,q` CSV rows (a header line and `#` comments are skipped).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = Vec::new();
        let mut q = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
                continue;
            }
            let mut cols = line.split(',');
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Parse(format!("q table row `{line}` needs two columns")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("q table row `{line}`: {e}")))
            };
            t.push(next()?);
            q.push(next()?);
        }
        Self::tabulated(t, q)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            QProfile::Constant { value } => *value,
            QProfile::Linear { intercept, slope } => intercept + slope * x,
            QProfile::Tabulated { t, q } => {
                let x = x.clamp(0.0, 1.0);
                let k = t.partition_point(|&ti| ti <= x).clamp(1, t.len() - 1);
                let (t0, t1) = (t[k - 1], t[k]);
                let w = (x - t0) / (t1 - t0);
                q[k - 1] + w * (q[k] - q[k - 1])
            }
        }
    }

    fn validated(self) -> Result<Self> {
        let step = 1e-3;
        let mut prev = self.eval(0.0);
        for i in 0..=1000 {
            let x = i as f64 * step;
            let v = self.eval(x);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("q({x}) = {v} lies outside [0, 1]")));
            }
            if i > 0 && i < 1000 && !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!(
                    "q({x}) = {v} must lie strictly inside (0, 1)"
                )));
            }
            if (v - prev).abs() >= 0.1 {
                return Err(Error::domain(format!(
                    "q jumps by {} near t = {x}",
                    (v - prev).abs()
                )));
            }
            prev = v;
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Law {
    GinibrePower { m: usize },
    Arc,
    Circular,
    EqualAlphas { alpha: f64, m: usize },
    Alphas { alphas: Vec<f64> },
    QCurve { q: QProfile },
    Beta { beta: f64 },
    BetaInfinite,
}

/// A limiting radial law with its CDF, density and planar density.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitProfile {
    law: Law,
}

/// `F_n(x) = (Π_j n_j x / (n x + l_j))^{1/γ_n}`, evaluated in log domain.
pub fn fn_finite(spec: &EnsembleSpec, gamma_n: f64, x: f64) -> Result<f64> {
    if spec.kind() != EnsembleKind::TruncatedUnitaryProduct {
        return Err(Error::contract(
            "F_n is defined for truncated unitary products only",
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "F_n is defined on [0, 1], got x = {x}"
        )));
    }
    if !(gamma_n >= 1.0) || !gamma_n.is_finite() {
        return Err(Error::domain(format!(
            "gamma_n must be finite and >= 1, got {gamma_n}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let n = spec.n() as f64;
    let ln_x = x.ln();
    let log_sum: f64 = spec
        .gaps()
        .iter()
        .map(|&l| {
            let l = l as f64;
            (n + l).ln() + ln_x - (n * x + l).ln()
        })
        .sum();
    Ok((log_sum / gamma_n).exp())
}

/// Uniform limit of `|Z_j|^{2/m} / n` for products of `m` Ginibre matrices.
pub fn ginibre_limit(m: usize) -> Result<LimitProfile> {
    if m == 0 {
        return Err(Error::domain("factor count m must be >= 1"));
    }
    Ok(LimitProfile {
        law: Law::GinibrePower { m },
    })
}

/// Fixed `m`, `n / n_j → α_j`, `γ_n = 2`.
pub fn corollary1_limit(alphas: &[f64]) -> Result<LimitProfile> {
    if alphas.is_empty() {
        return Err(Error::domain("need one alpha per factor (m >= 1)"));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::domain(format!("alpha = {a} outside [0, 1]")));
    }
    let law = if alphas.iter().all(|&a| a == 1.0) {
        Law::Arc
    } else if alphas.iter().all(|&a| a == alphas[0]) {
        Law::EqualAlphas {
            alpha: alphas[0],
            m: alphas.len(),
        }
    } else {
        Law::Alphas {
            alphas: alphas.to_vec(),
        }
    };
    Ok(LimitProfile { law })
}

/// `m → ∞` with `n / n_j ≈ q(j / m)`, `γ_n = m`.
pub fn corollary2_limit(q: QProfile) -> Result<LimitProfile> {
    let q = q.validated()?;
    Ok(LimitProfile {
        law: Law::QCurve { q },
    })
}

/// `n / n_j → 1` uniformly with `Σ l_j / n → β`. Pass `f64::INFINITY` for
/// `β = ∞`.
pub fn corollary3_limit(beta: f64) -> Result<LimitProfile> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::domain(format!(
            "beta must be >= 0 (or +inf), got {beta}"
        )));
    }
    let law = if beta == 0.0 {
        Law::Arc
    } else if beta.is_infinite() {
        Law::BetaInfinite
    } else {
        Law::Beta { beta }
    };
    Ok(LimitProfile { law })
}

/// `max_j n / n_j → 0` with `γ_n = m`: the circular law for `√R e^{iΘ}`.
pub fn corollary4_limit() -> LimitProfile {
    LimitProfile { law: Law::Circular }
}

/// Bisection for `F(x) = y` on `[0, 1]`.
///
/// Stops once `|F(x) − y| <= tol` or after `⌈log2(1/tol)⌉ + 2` halvings,
/// whichever comes first; in the latter case the final midpoint is returned
/// (its residual is then limited by the slope of `F`).
pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, y: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "inversion tolerance must be positive, got {tol}"
        )));
    }
    const PROBES: usize = 32;
    let mut prev = f(0.0);
    for i in 1..=PROBES {
        let v = f(i as f64 / PROBES as f64);
        if !(v >= prev) {
            return Err(Error::contract(format!(
                "function is not nondecreasing on the probe grid near x = {}",
                i as f64 / PROBES as f64
            )));
        }
        prev = v;
    }
    let (f0, f1) = (f(0.0), f(1.0));
    if !(f0 <= y && y <= f1) {
        return Err(Error::contract(format!(
            "y = {y} is not bracketed by F(0) = {f0} and F(1) = {f1}"
        )));
    }
    let max_iter = (1.0 / tol).log2().ceil().max(0.0) as usize + 2;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    for _ in 0..max_iter {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - y).abs() <= tol {
            return Ok(mid);
        }
        if v < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Limiting CDF of the scaled radius at `y`.
pub fn limit_radial_cdf(profile: &LimitProfile, y: f64) -> Result<f64> {
    profile.radial_cdf(y)
}

impl LimitProfile {
    pub fn regime(&self) -> Regime {
        match self.law {
            Law::GinibrePower { .. } => Regime::GinibrePower,
            Law::Arc => Regime::ArcLaw,
            Law::Circular => Regime::CircularLaw,
            _ => Regime::GeneralF,
        }
    }

    /// Parameter echo for exports.
    pub fn parameters(&self) -> Value {
        match &self.law {
            Law::GinibrePower { m } => json!({ "family": "ginibre", "m": m }),
            Law::Arc => json!({ "family": "arc" }),
            Law::Circular => json!({ "family": "cor4" }),
            Law::EqualAlphas { alpha, m } => json!({ "family": "cor1", "alpha": alpha, "m": m }),
            Law::Alphas { alphas } => json!({ "family": "cor1", "alphas": alphas }),
            Law::QCurve { q } => json!({ "family": "cor2", "q": q }),
            Law::Beta { beta } => json!({ "family": "cor3", "beta": beta }),
            Law::BetaInfinite => json!({ "family": "cor3", "beta": "inf" }),
        }
    }

    /// `F(x)` on `[0, 1]`; `None` for the arc and circular laws.
    pub fn forward(&self, x: f64) -> Result<Option<f64>> {
        let x = x.clamp(0.0, 1.0);
        let v = match &self.law {
            Law::Arc | Law::Circular => return Ok(None),
            Law::GinibrePower { .. } => x,
            Law::EqualAlphas { alpha, m } => (x / (1.0 - alpha * (1.0 - x))).powf(*m as f64 / 2.0),
            Law::Alphas { alphas } => alphas_f(alphas, x),
            Law::QCurve { q } => q_f(q, x)?,
            Law::Beta { beta } => beta_f(*beta, x),
            Law::BetaInfinite => beta_f(2.0, x),
        };
        Ok(Some(v))
    }

    /// `F⁻¹(y)` on `[0, 1]`, the limiting CDF of the scaled radius there.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let y = y.clamp(0.0, 1.0);
        if y == 0.0 || y == 1.0 {
            return Ok(match self.law {
                Law::Arc if y < 1.0 => 0.0,
                _ => y,
            });
        }
        let v = match &self.law {
            Law::Arc => 0.0,
            Law::GinibrePower { .. } | Law::Circular => y,
            Law::EqualAlphas { alpha, m } => {
                let p = y.powf(2.0 / *m as f64);
                (1.0 - alpha) * p / (1.0 - alpha * p)
            }
            Law::Alphas { alphas } => invert_monotone(|x| alphas_f(alphas, x), y, INVERSION_TOL)?,
            Law::QCurve { q } => {
                let f = |x: f64| q_f(q, x).unwrap_or(f64::NAN);
                invert_monotone(f, y, INVERSION_TOL)?
            }
            Law::Beta { beta } => 1.0 / (1.0 - 2.0 / beta * y.ln()),
            Law::BetaInfinite => 1.0 / (1.0 - y.ln()),
        };
        Ok(v)
    }

    /// `f*(x) = d/dx F⁻¹(x)`; `None` for the arc law.
    pub fn radial_density(&self, x: f64) -> Result<Option<f64>> {
        if !(0.0..=1.0).contains(&x) {
            return Ok(match self.law {
                Law::Arc => None,
                _ => Some(0.0),
            });
        }
        let v = match &self.law {
            Law::Arc => return Ok(None),
            Law::GinibrePower { .. } | Law::Circular => 1.0,
            Law::EqualAlphas { alpha, m } => {
                let m = *m as f64;
                let p = x.powf(2.0 / m);
                2.0 * (1.0 - alpha) / m * x.powf(2.0 / m - 1.0) / (1.0 - alpha * p).powi(2)
            }
            Law::Alphas { .. } => self.fd_inverse_slope(x)?,
            Law::QCurve { q } => {
                let xi = self.inverse(x)?;
                1.0 / q_density(q, xi)?
            }
            Law::Beta { beta } => 2.0 * beta / (x * (beta - 2.0 * x.ln()).powi(2)),
            Law::BetaInfinite => 1.0 / (x * (1.0 - x.ln()).powi(2)),
        };
        Ok(Some(v))
    }

    /// Density of `Z = R e^{iΘ}` at `|z| = ρ`; `None` for the arc law.
    ///
    /// For the Ginibre profile `Z` is `Z_j / n^{m/2}`; for the circular law
    /// it is `√R e^{iΘ}`; otherwise `R` is the scaled radius itself.
    pub fn planar_density(&self, rho: f64) -> Result<Option<f64>> {
        if matches!(self.law, Law::Arc) {
            return Ok(None);
        }
        if !(rho >= 0.0) || rho > 1.0 {
            return Ok(Some(0.0));
        }
        let v = match &self.law {
            Law::Arc => unreachable!(),
            Law::GinibrePower { m } => {
                let m = *m as f64;
                rho.powf(2.0 / m - 2.0) / (m * PI)
            }
            Law::Circular => 1.0 / PI,
            Law::Beta { beta } => beta / (PI * rho * rho * (beta - 2.0 * rho.ln()).powi(2)),
            Law::BetaInfinite => 1.0 / (2.0 * PI * rho * rho * (1.0 - rho.ln()).powi(2)),
            Law::QCurve { q } => {
                let xi = self.inverse(rho)?;
                1.0 / (2.0 * PI * rho * q_density(q, xi)?)
            }
            Law::EqualAlphas { .. } | Law::Alphas { .. } => {
                let fs = self.radial_density(rho)?.unwrap_or(0.0);
                fs / (2.0 * PI * rho)
            }
        };
        Ok(Some(v))
    }

    /// Limiting CDF of the scaled radius (right-continuous).
    pub fn radial_cdf(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::domain("radial CDF evaluated at NaN"));
        }
        if y <= 0.0 {
            return Ok(0.0);
        }
        match self.law {
            Law::Arc => Ok(if y >= 1.0 { 1.0 } else { 0.0 }),
            _ if y >= 1.0 => Ok(1.0),
            _ => self.inverse(y),
        }
    }

    /// Left limit `F*(y−)`; differs from [`Self::radial_cdf`] only at the
    /// arc-law atom.
    pub fn radial_cdf_left(&self, y: f64) -> Result<f64> {
        match self.law {
            Law::Arc => Ok(if y > 1.0 { 1.0 } else { 0.0 }),
            _ => self.radial_cdf(y),
        }
    }

    /// Radial coordinate matching a planar modulus `ρ` (`ρ^{2/m}` for the
    /// Ginibre profile, `ρ^2` for the circular law, `ρ` otherwise).
    pub fn radial_coordinate(&self, rho: f64) -> f64 {
        match self.law {
            Law::GinibrePower { m } => rho.powf(2.0 / m as f64),
            Law::Circular => rho * rho,
            _ => rho,
        }
    }

    fn fd_inverse_slope(&self, x: f64) -> Result<f64> {
        let h = FD_STEP;
        if x < FD_EDGE {
            Ok((self.inverse(x + h)? - self.inverse(x)?) / h)
        } else if x > 1.0 - FD_EDGE {
            Ok((self.inverse(x)? - self.inverse(x - h)?) / h)
        } else {
            Ok((self.inverse(x + h)? - self.inverse(x - h)?) / (2.0 * h))
        }
    }

    /// Values on the uniform export grid over `[0, 1]`; `None` for the arc
    /// law.
    pub fn grid(&self) -> Result<Option<Vec<GridPoint>>> {
        if self.regime() == Regime::ArcLaw {
            return Ok(None);
        }
        (0..EXPORT_POINTS)
            .map(|i| {
                let x = i as f64 / (EXPORT_POINTS - 1) as f64;
                Ok(GridPoint {
                    x,
                    forward: self.forward(x)?,
                    inverse: self.inverse(x)?,
                    radial_density: self.radial_density(x)?,
                    planar_density: self.planar_density(x)?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// JSON export: regime, parameters, numerics and a 1001-point table of
    /// `(x, F, F⁻¹, f*, planar_density)`. The arc law carries no table.
    pub fn to_json(&self, meta: Value) -> Result<String> {
        let table = self.grid()?.map(|points| {
            points
                .iter()
                .map(|p| GridRow {
                    x: Sig17(p.x),
                    f: sig17_opt(p.forward),
                    f_inverse: Sig17(p.inverse),
                    f_star: sig17_opt(p.radial_density),
                    planar_density: sig17_opt(p.planar_density),
                })
                .collect::<Vec<_>>()
        });
        let radial_cdf = if self.regime() == Regime::ArcLaw {
            json!({ "kind": "step", "at": 1.0 })
        } else {
            json!({ "kind": "F_inverse" })
        };
        let export = LimitExport {
            meta,
            regime: self.regime(),
            parameters: self.parameters(),
            radial_cdf,
            numerics: Numerics {
                grid_points: EXPORT_POINTS,
                grid_step: Sig17(1.0 / (EXPORT_POINTS - 1) as f64),
                inversion_tol: Sig17(INVERSION_TOL),
                finite_difference_step: Sig17(FD_STEP),
                finite_difference_edge: Sig17(FD_EDGE),
                quadrature_abs_tol: Sig17(QUADRATURE_TOL),
            },
            table,
        };
        serde_json::to_string_pretty(&export).map_err(|e| Error::numeric(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub forward: Option<f64>,
    pub inverse: f64,
    pub radial_density: Option<f64>,
    pub planar_density: Option<f64>,
}

#[derive(Serialize)]
struct LimitExport {
    meta: Value,
    regime: Regime,
    parameters: Value,
    radial_cdf: Value,
    numerics: Numerics,
    table: Option<Vec<GridRow>>,
}

#[derive(Serialize)]
struct Numerics {
    grid_points: usize,
    grid_step: Sig17,
    inversion_tol: Sig17,
    finite_difference_step: Sig17,
    finite_difference_edge: Sig17,
    quadrature_abs_tol: Sig17,
}

#[derive(Serialize)]
struct GridRow {
    x: Sig17,
    #[serde(rename = "F")]
    f: Option<Sig17>,
    #[serde(rename = "F_inverse")]
    f_inverse: Sig17,
    f_star: Option<Sig17>,
    planar_density: Option<Sig17>,
}

fn alphas_f(alphas: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log: f64 = alphas
        .iter()
        .map(|a| (x / (1.0 - a * (1.0 - x))).ln())
        .sum();
    (0.5 * log).exp()
}

fn beta_f(beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (0.5 * beta * (x - 1.0) / x).exp()
    }
}

/// `∫_0^1 ln(1 − q(t)(1 − x)) dt`.
fn q_log_integral(q: &QProfile, x: f64) -> Result<f64> {
    let c = 1.0 - x;
    match q {
        QProfile::Constant { value } => Ok((1.0 - value * c).ln()),
        _ => Ok(integrate(
            |t| (1.0 - q.eval(t) * c).ln(),
            0.0,
            1.0,
            Tolerance::absolute(QUADRATURE_TOL),
        )?
        .value),
    }
}

fn q_f(q: &QProfile, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(x * (-q_log_integral(q, x)?).exp())
}

/// `f(x) = F'(x) = (F(x)/x) ∫_0^1 (1 − q)/(1 − q(1 − x)) dt`.
fn q_density(q: &QProfile, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let c = 1.0 - x;
    let inner = match q {
        QProfile::Constant { value } => (1.0 - value) / (1.0 - value * c),
        _ => {
            integrate(
                |t| {
                    let v = q.eval(t);
                    (1.0 - v) / (1.0 - v * c)
                },
                0.0,
                1.0,
                Tolerance::absolute(QUADRATURE_TOL),
            )?
            .value
        }
    };
    Ok(q_f(q, x)? / x * inner)
}

/// Gaps `l_j = n_j − n` with `n_j = ⌈n / q(j/m)⌉`, never below 1.
pub fn gaps_from_q(n: usize, m: usize, q: &QProfile) -> Vec<u64> {
    (1..=m)
        .map(|j| {
            let ratio = q.eval(j as f64 / m as f64);
            let nj = (n as f64 / ratio).ceil();
            let nj = if nj.is_finite() {
                nj as u64
            } else {
                u64::MAX / 2
            };
            nj.saturating_sub(n as u64).max(1)
        })
        .collect()
}
