//! Random matrix draws: complex Ginibre and Haar unitary.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// `n × n` matrix of i.i.d. standard complex normals (real and imaginary
/// parts `N(0, 1/2)`, so `E|x|^2 = 1`).
pub fn sample_ginibre_matrix(n: usize, rng: &mut RandomStream) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2);
        }
    }
    m
}

/// Haar unitary from the QR factorisation of a Ginibre draw, with each
/// column of `Q` multiplied by the phase of the matching diagonal entry of
/// `R` so the factorisation is the unique one with positive `diag(R)`.
pub fn sample_haar_unitary(n: usize, rng: &mut RandomStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::domain("unitary dimension must be >= 1"));
    }
    for _attempt in 0..2 {
        let g = sample_ginibre_matrix(n, rng);
        if let Some(u) = phase_corrected_q(g) {
            return Ok(u);
        }
    }
    Err(Error::numeric(format!(
        "Ginibre draw of size {n} was numerically rank deficient twice"
    )))
}

fn phase_corrected_q(mut a: ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.dim();
    let scale = a.frobenius_norm();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for k in 0..n {
        let norm = (k..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-14 * scale {
            return None;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);
        for j in k..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| vt.conj() * a[(k + t, j)])
                .sum();
            for (t, vt) in v.iter().enumerate() {
                a[(k + t, j)] -= 2.0 * vt * dot;
            }
        }
        // R_kk = alpha; keep its phase for the correction
        phases.push(alpha / alpha.norm());
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1}, accumulated from the right end
    let mut q = ComplexMatrix::identity(n);
    for k in (0..n).rev() {
        let v = &reflectors[k];
        for j in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| vt.conj() * q[(k + t, j)])
                .sum();
            for (t, vt) in v.iter().enumerate() {
                q[(k + t, j)] -= 2.0 * vt * dot;
            }
        }
    }
    for (j, ph) in phases.iter().enumerate() {
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    Some(q)
}

/// Leading principal `n × n` block.
pub fn truncate_top_left(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if n == 0 || n > m.dim() {
        return Err(Error::domain(format!(
            "cannot take a {n}x{n} corner of a {d}x{d} matrix",
            d = m.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = m[(i, j)];
        }
    }
    Ok(out)
}
