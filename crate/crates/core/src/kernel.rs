//! Determinantal-kernel utilities for rotation-invariant weights `φ(|z|)`.
//!
//! With `c_k = 2π ∫_0^∞ x^{2k+1} φ(x) dx`, the eigenvalue density is
//! `C Π|z_j − z_k|^2 Π φ(|z_j|)` with `C⁻¹ = n! c_0 ⋯ c_{n−1}`, and the
//! correlation kernel is `K(z, w) = Σ_{k<n} (z w̄)^k / c_k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, integrate_with_breaks, Tolerance};
use crate::special::{ln_beta, ln_factorial, log_add_exp};

/// Relative tolerance used for the moment integrals.
pub const CK_QUADRATURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum RadialWeight {
    /// `φ(x) = e^{−x²}`.
    GinibreM1,
    /// `φ(x) = (l/π)(1 − x²)^{l−1}` on `[0, 1]`.
    TruncatedM1 { l: u64 },
    /// Piecewise-linear through `(x_i, φ_i)`, zero outside `[x_0, x_last]`.
    Tabulated { x: Vec<f64>, phi: Vec<f64> },
}

impl RadialWeight {
    pub fn truncated(l: u64) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("truncation gap l must be >= 1"));
        }
        Ok(RadialWeight::TruncatedM1 { l })
    }

    pub fn tabulated(x: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if x.len() != phi.len() || x.len() < 2 {
            return Err(Error::domain(
                "weight table needs matching x and phi columns with at least two rows",
            ));
        }
        if x[0] < 0.0 || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(
                "weight table x values must be finite and >= 0",
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "weight table x column must be strictly increasing",
            ));
        }
        if phi.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain(
                "weight table phi values must be finite and >= 0",
            ));
        }
        Ok(RadialWeight::Tabulated { x, phi })
    }

    /// Parse `x,phi` CSV rows; a header and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut x = Vec::new();
        let mut phi = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 2 {
                return Err(Error::Parse(format!(
                    "weight row `{line}` needs two columns"
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("weight row `{line}`: {e}")))
            };
            x.push(parse(cols[0])?);
            phi.push(parse(cols[1])?);
        }
        Self::tabulated(x, phi)
    }

    /// Upper end of the support, `None` when unbounded.
    pub fn support_upper(&self) -> Option<f64> {
        match self {
            RadialWeight::GinibreM1 => None,
            RadialWeight::TruncatedM1 { .. } => Some(1.0),
            RadialWeight::Tabulated { x, .. } => x.last().copied(),
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.ln_phi(r).exp()
    }

    pub fn ln_phi(&self, r: f64) -> f64 {
        if !(r >= 0.0) {
            return f64::NEG_INFINITY;
        }
        match self {
            RadialWeight::GinibreM1 => -r * r,
            RadialWeight::TruncatedM1 { l } => {
                if r > 1.0 {
                    return f64::NEG_INFINITY;
                }
                let base = (*l as f64 / PI).ln();
                if *l == 1 {
                    base
                } else {
                    base + (*l - 1) as f64 * (-r * r).ln_1p()
                }
            }
            RadialWeight::Tabulated { x, phi } => {
                let last = x.len() - 1;
                if r < x[0] || r > x[last] {
                    return f64::NEG_INFINITY;
                }
                let k = x.partition_point(|&v| v <= r).clamp(1, last);
                let w = (r - x[k - 1]) / (x[k] - x[k - 1]);
                (phi[k - 1] + w * (phi[k] - phi[k - 1])).ln()
            }
        }
    }
}

/// Moment constants and weight defining the kernel of an `n`-point process.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    n: usize,
    log_c: Vec<f64>,
    weight: RadialWeight,
}

impl KernelSpec {
    pub fn new(n: usize, weight: RadialWeight) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("point count n must be >= 1"));
        }
        let log_c = (0..n as u64)
            .map(|k| compute_ck(&weight, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, log_c, weight })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `log c_k` for `k = 0..n`.
    pub fn log_c(&self) -> &[f64] {
        &self.log_c
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    /// `log C = −(log n! + Σ log c_k)`.
    pub fn log_normalizing_constant(&self) -> f64 {
        -(ln_factorial(self.n as u64) + self.log_c.iter().sum::<f64>())
    }

    /// `log Σ_k r^{2k} / c_k`, i.e. `log K(z, z)` at `|z| = r`.
    fn log_diagonal(&self, r: f64) -> f64 {
        if r == 0.0 {
            return -self.log_c[0];
        }
        let ln_r2 = 2.0 * r.ln();
        self.log_c
            .iter()
            .enumerate()
            .map(|(k, lc)| k as f64 * ln_r2 - lc)
            .fold(f64::NEG_INFINITY, log_add_exp)
    }
}

/// `log c_k`; closed form for the two built-in weights, quadrature for
/// tabulated ones.
pub fn compute_ck(weight: &RadialWeight, k: u64) -> Result<f64> {
    match weight {
        RadialWeight::GinibreM1 => Ok(PI.ln() + ln_factorial(k)),
        RadialWeight::TruncatedM1 { l } => {
            Ok((*l as f64).ln() + ln_beta(k as f64 + 1.0, *l as f64))
        }
        RadialWeight::Tabulated { .. } => compute_ck_quadrature(weight, k),
    }
}

/// `log c_k` by adaptive quadrature, for any weight kind.
///
/// Integrands are divided by their peak value so that large `k` stays in
/// range; the peak is added back in log space.
pub fn compute_ck_quadrature(weight: &RadialWeight, k: u64) -> Result<f64> {
    let kf = k as f64;
    let tol = Tolerance::relative(CK_QUADRATURE_TOL);
    let (log_integral, log_prefactor) = match weight {
        RadialWeight::GinibreM1 => {
            // c_k = π ∫_0^∞ u^k e^{−u} du, peak at u = k
            let log_peak = if k == 0 { 0.0 } else { kf * kf.ln() - kf };
            let f = |u: f64| {
                if u == 0.0 {
                    if k == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (kf * u.ln() - u - log_peak).exp()
                }
            };
            let head = integrate_with_breaks(f, &[0.0, kf.max(1.0), 2.0 * kf.max(1.0)], tol)?;
            let tail = integrate_to_infinity(f, 2.0 * kf.max(1.0), kf.sqrt().max(1.0), tol)?;
            ((head.value + tail.value).ln() + log_peak, PI.ln())
        }
        RadialWeight::TruncatedM1 { l } => {
            // c_k = l ∫_0^1 u^k (1 − u)^{l−1} du
            let b = (*l - 1) as f64;
            let mode = if kf + b == 0.0 { 0.5 } else { kf / (kf + b) };
            let log_at = |u: f64| {
                let a = if k == 0 { 0.0 } else { kf * u.ln() };
                let c = if b == 0.0 { 0.0 } else { b * (-u).ln_1p() };
                a + c
            };
            let log_peak = log_at(mode);
            let f = |u: f64| {
                if (u == 0.0 && k > 0) || (u == 1.0 && b > 0.0) {
                    0.0
                } else {
                    (log_at(u) - log_peak).exp()
                }
            };
            let mut breaks = vec![0.0, 1.0];
            if mode > 0.0 && mode < 1.0 {
                breaks.insert(1, mode);
            }
            let v = integrate_with_breaks(f, &breaks, tol)?.value;
            (v.ln() + log_peak, (*l as f64).ln())
        }
        RadialWeight::Tabulated { x, phi } => {
            // c_k = 2π ∫ x^{2k+1} φ(x) dx, kinks at the nodes
            let top = *x.last().unwrap();
            let log_peak = if top > 0.0 {
                (2.0 * kf + 1.0) * top.ln()
            } else {
                0.0
            };
            let f = |r: f64| {
                if r <= 0.0 {
                    return 0.0;
                }
                let w = weight.phi(r);
                if w == 0.0 {
                    0.0
                } else {
                    w * ((2.0 * kf + 1.0) * r.ln() - log_peak).exp()
                }
            };
            let _ = phi;
            let v = if x.len() <= 2048 {
                integrate_with_breaks(f, x, tol)?.value
            } else {
                integrate(f, x[0], top, tol)?.value
            };
            (v.ln() + log_peak, (2.0 * PI).ln())
        }
    };
    let log_c = log_integral + log_prefactor;
    if !log_c.is_finite() {
        return Err(Error::domain(format!(
            "moment integral for k = {k} is zero or divergent"
        )));
    }
    Ok(log_c)
}

/// `log C` for `n` points under `weight`.
pub fn normalizing_constant(n: usize, weight: &RadialWeight) -> Result<f64> {
    Ok(KernelSpec::new(n, weight.clone())?.log_normalizing_constant())
}

/// `K(z, w) = Σ_{k<n} (z w̄)^k / c_k`.
///
/// Terms are summed relative to the largest modulus so that neither the
/// powers nor `1/c_k` overflow before the final rescale.
pub fn kernel_eval(spec: &KernelSpec, z: Complex64, w: Complex64) -> Complex64 {
    let s = z * w.conj();
    let modulus = s.norm();
    if modulus == 0.0 {
        return Complex64::new((-spec.log_c[0]).exp(), 0.0);
    }
    let ln_s = modulus.ln();
    let theta = s.arg();
    let logs: Vec<f64> = spec
        .log_c
        .iter()
        .enumerate()
        .map(|(k, lc)| k as f64 * ln_s - lc)
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: Complex64 = logs
        .iter()
        .enumerate()
        .map(|(k, l)| Complex64::from_polar((l - top).exp(), k as f64 * theta))
        .sum();
    sum * top.exp()
}

/// `P_n(r) = (1/n) Σ_{j=1}^n 2π r^{2j−1} φ(r) / c_{j−1}`, the density of the
/// modulus of a uniformly chosen point.
pub fn radial_density_pn(spec: &KernelSpec, r: f64) -> f64 {
    if !(r > 0.0) {
        return 0.0;
    }
    let ln_phi = spec.weight.ln_phi(r);
    if ln_phi == f64::NEG_INFINITY {
        return 0.0;
    }
    ((2.0 * PI).ln() + r.ln() + spec.log_diagonal(r) + ln_phi - (spec.n as f64).ln()).exp()
}

/// One-point density `(1/n) K(z, z) φ(|z|)`.
pub fn one_point_density(spec: &KernelSpec, z: Complex64) -> f64 {
    let r = z.norm();
    let ln_phi = spec.weight.ln_phi(r);
    if ln_phi == f64::NEG_INFINITY {
        return 0.0;
    }
    (spec.log_diagonal(r) + ln_phi - (spec.n as f64).ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_constants() {
        assert_relative_eq!(
            compute_ck(&RadialWeight::GinibreM1, 0).unwrap().exp(),
            PI,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            compute_ck(&RadialWeight::GinibreM1, 3).unwrap().exp(),
            6.0 * PI,
            max_relative = 1e-14
        );
        let t2 = RadialWeight::truncated(2).unwrap();
        assert_relative_eq!(
            compute_ck(&t2, 1).unwrap().exp(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn normalizing_constants() {
        let g = RadialWeight::GinibreM1;
        assert_relative_eq!(
            normalizing_constant(1, &g).unwrap().exp(),
            1.0 / PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            normalizing_constant(2, &g).unwrap().exp(),
            1.0 / (2.0 * PI * PI),
            max_relative = 1e-14
        );
        let t1 = RadialWeight::truncated(1).unwrap();
        assert_relative_eq!(
            normalizing_constant(1, &t1).unwrap().exp(),
            1.0,
            max_relative = 1e-14
        );
        assert!(normalizing_constant(0, &g).is_err());
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for weight in [
            RadialWeight::GinibreM1,
            RadialWeight::truncated(1).unwrap(),
            RadialWeight::truncated(4).unwrap(),
        ] {
            for k in 0..=20 {
                let closed = compute_ck(&weight, k).unwrap();
                let quad = compute_ck_quadrature(&weight, k).unwrap();
                assert!(
                    (quad - closed).exp_m1().abs() < 1e-8,
                    "{weight:?} k={k}: {quad} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn kernel_values() {
        let spec = KernelSpec::new(2, RadialWeight::GinibreM1).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        assert_relative_eq!(
            kernel_eval(&spec, zero, zero).re,
            1.0 / PI,
            max_relative = 1e-15
        );
        let one = Complex64::new(1.0, 0.0);
        let k = kernel_eval(&spec, one, one);
        assert_relative_eq!(k.re, 2.0 / PI, max_relative = 1e-14);
        assert!(k.im.abs() < 1e-15);
    }

    #[test]
    fn kernel_hermitian() {
        let spec = KernelSpec::new(7, RadialWeight::truncated(3).unwrap()).unwrap();
        let z = Complex64::new(0.3, -0.4);
        let w = Complex64::new(-0.2, 0.7);
        let a = kernel_eval(&spec, z, w).conj();
        let b = kernel_eval(&spec, w, z);
        assert!((a - b).norm() < 1e-13 * b.norm());
    }

    #[test]
    fn kernel_survives_large_arguments() {
        let spec = KernelSpec::new(200, RadialWeight::GinibreM1).unwrap();
        let z = Complex64::new(14.0, 0.0);
        let k = kernel_eval(&spec, z, z);
        assert!(k.re.is_finite() && k.re > 0.0);
        assert_relative_eq!(k.re.ln(), spec.log_diagonal(14.0), max_relative = 1e-12);
    }

    #[test]
    fn pn_single_point() {
        let spec = KernelSpec::new(1, RadialWeight::GinibreM1).unwrap();
        assert_relative_eq!(
            radial_density_pn(&spec, 1.0),
            2.0 / std::f64::consts::E,
            max_relative = 1e-14
        );
        assert_eq!(radial_density_pn(&spec, 0.0), 0.0);
    }

    #[test]
    fn one_point_density_is_radial() {
        let spec = KernelSpec::new(5, RadialWeight::GinibreM1).unwrap();
        let a = one_point_density(&spec, Complex64::new(0.6, 0.8));
        let b = one_point_density(&spec, Complex64::new(1.0, 0.0));
        assert!((a - b).abs() < 1e-12);
        for i in 1..40 {
            let r = i as f64 * 0.1;
            let lhs = 2.0 * PI * r * one_point_density(&spec, Complex64::from_polar(r, 1.3));
            assert!((lhs - radial_density_pn(&spec, r)).abs() < 1e-10);
        }
    }

    #[test]
    fn tabulated_weight_parses_and_integrates() {
        let rows: String = (0..=100)
            .map(|i| {
                let x = i as f64 * 0.05;
                format!("{x},{}\n", (-x * x).exp())
            })
            .collect();
        let weight = RadialWeight::from_csv(&format!("x,phi\n{rows}")).unwrap();
        assert_eq!(weight.support_upper(), Some(5.0));
        let c0 = compute_ck(&weight, 0).unwrap().exp();
        assert!((c0 - PI).abs() < 5e-3);
        assert!(RadialWeight::from_csv("x,phi\n0,1\n0,2\n").is_err());
        assert!(RadialWeight::from_csv("x,phi\n0,1\n1,-2\n").is_err());
        let zero = RadialWeight::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(compute_ck(&zero, 0), Err(Error::Domain(_))));
    }
}
