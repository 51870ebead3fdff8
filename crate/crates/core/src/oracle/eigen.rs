//! Eigenvalues of a general complex matrix: balancing, Householder reduction
//! to upper Hessenberg form, then single-shift implicit QR with Wilkinson
//! shifts and deflation.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const SWEEPS_PER_DIM: usize = 30;

/// Eigenvalues `λ_i = scale · e^{log_scale}` plus a backward-error estimate.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    scaled: Vec<Complex64>,
    log_scale: f64,
    /// Max over eigenvalues of `‖b‖ / (‖H‖_F ‖x‖)` where `(H − λI)x = b`
    /// is one inverse-iteration step on the balanced Hessenberg form.
    pub residual: f64,
}

impl SpectrumResult {
    pub(crate) fn with_log_scale(mut self, log_scale: f64) -> Self {
        self.log_scale += log_scale;
        self
    }

    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// Eigenvalues in linear scale. May underflow for long products; use
    /// [`SpectrumResult::log_sq_moduli`] there.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let s = self.log_scale.exp();
        self.scaled.iter().map(|z| z * s).collect()
    }

    pub fn scaled_eigenvalues(&self) -> &[Complex64] {
        &self.scaled
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `ln |λ_i|^2`.
    pub fn log_sq_moduli(&self) -> impl Iterator<Item = f64> + '_ {
        self.scaled
            .iter()
            .map(move |z| 2.0 * (z.norm().ln() + self.log_scale))
    }

    /// `arg λ_i` in `[0, 2π)`.
    pub fn arguments(&self) -> impl Iterator<Item = f64> + '_ {
        self.scaled.iter().map(|z| {
            let a = z.arg().rem_euclid(std::f64::consts::TAU);
            if a >= std::f64::consts::TAU {
                0.0
            } else {
                a
            }
        })
    }
}

/// All eigenvalues of `m`. `tol` is the relative deflation threshold: a
/// subdiagonal entry is dropped once `|h_{k+1,k}| <= tol·(|h_kk| + |h_{k+1,k+1}|)`.
pub fn eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<SpectrumResult> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "eigenvalue tolerance must be positive, got {tol}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let n = m.dim();
    if n == 0 {
        return Ok(SpectrumResult {
            scaled: Vec::new(),
            log_scale: 0.0,
            residual: 0.0,
        });
    }
    let mut h = m.clone();
    balance(&mut h);
    to_hessenberg(&mut h);
    let hess = h.clone();
    let eig = hessenberg_qr(&mut h, tol)?;
    let residual = backward_error(&hess, &eig);
    Ok(SpectrumResult {
        scaled: eig,
        log_scale: 0.0,
        residual,
    })
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity by powers of two equalising row and column norms.
fn balance(a: &mut ComplexMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.dim();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn to_hessenberg(a: &mut ComplexMatrix) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi /= vnorm;
        }
        // A ← (I − 2vv*) A on rows k+1..n
        for j in k..n {
            let dot: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            for i in k + 1..n {
                a[(i, j)] -= 2.0 * v[i] * dot;
            }
        }
        // A ← A (I − 2vv*) on columns k+1..n
        for i in 0..n {
            let dot: Complex64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                a[(i, j)] -= 2.0 * dot * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Rotation `[[c, s], [−s̄, c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if x.norm() == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let ax = x.norm();
    let norm = ax.hypot(y.norm());
    (ax / norm, (x / ax) * y.conj() / norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = (half_diff * half_diff + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg_qr(h: &mut ComplexMatrix, tol: f64) -> Result<Vec<Complex64>> {
    let n = h.dim();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let scale_floor = h.frobenius_norm() * f64::EPSILON;
    let cap = SWEEPS_PER_DIM * n;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            return Ok(eig);
        }
        // locate the start of the unreduced block ending at hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let thresh = if diag > 0.0 { tol * diag } else { scale_floor };
            if sub <= thresh.max(scale_floor * 1e-3) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= cap {
            return Err(Error::numeric(format!(
                "QR iteration did not converge within {cap} sweeps: {} of {n} eigenvalues deflated, \
                 active block [{lo}, {hi}]",
                n - 1 - hi
            )));
        }
        total += 1;
        its += 1;

        let mu = if its.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in lo..hi {
            let (x, y) = if k == lo {
                (h[(lo, lo)] - mu, h[(lo + 1, lo)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let col_start = if k == lo { lo } else { k - 1 };
            for j in col_start..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + c * b;
            }
            if k > lo {
                h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
            let row_end = (k + 2).min(hi);
            for i in lo..=row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
}

/// One step of inverse iteration per eigenvalue on the Hessenberg form.
fn backward_error(hess: &ComplexMatrix, eig: &[Complex64]) -> f64 {
    let n = hess.dim();
    let hnorm = hess.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for &lambda in eig {
        a.copy_from_slice(hess.as_slice());
        for i in 0..n {
            a[i * n + i] -= lambda;
        }
        x.iter_mut().for_each(|v| *v = Complex64::new(1.0, 0.0));
        let b_norm = (n as f64).sqrt();
        // Hessenberg LU with partial pivoting between adjacent rows
        for k in 0..n.saturating_sub(1) {
            if a[(k + 1) * n + k].norm() > a[k * n + k].norm() {
                for j in k..n {
                    a.swap(k * n + j, (k + 1) * n + j);
                }
                x.swap(k, k + 1);
            }
            let mut pivot = a[k * n + k];
            if pivot.norm() == 0.0 {
                pivot = Complex64::new(f64::EPSILON * hnorm, 0.0);
                a[k * n + k] = pivot;
            }
            let f = a[(k + 1) * n + k] / pivot;
            if f.norm() != 0.0 {
                for j in k..n {
                    let t = a[k * n + j];
                    a[(k + 1) * n + j] -= f * t;
                }
                let t = x[k];
                x[k + 1] -= f * t;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            let mut pivot = a[k * n + k];
            if pivot.norm() == 0.0 {
                pivot = Complex64::new(f64::EPSILON * hnorm, 0.0);
            }
            x[k] = s / pivot;
        }
        let x_norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let eta = if x_norm.is_finite() && x_norm > 0.0 {
            b_norm / (hnorm * x_norm)
        } else {
            0.0
        };
        worst = worst.max(eta);
    }
    worst
}
