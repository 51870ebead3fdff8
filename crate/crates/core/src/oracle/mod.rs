//! Brute-force ground truth: draw the actual factor matrices, multiply them
//! and diagonalise the product.

mod eigen;
mod matrix;
mod random;

use std::fmt::Write as _;

pub use eigen::{eigenvalues, SpectrumResult};
pub use matrix::ComplexMatrix;
pub use random::{sample_ginibre_matrix, sample_haar_unitary, truncate_top_left};

use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::export::fmt17;
use crate::rng::RandomStream;

/// Largest dimension the oracle accepts.
pub const MAX_ORACLE_DIM: usize = 64;

/// Deflation threshold used by [`oracle_spectrum`].
pub const ORACLE_TOL: f64 = 1e-12;

/// Eigenvalues of `X_m ⋯ X_1` for one draw of the factors described by
/// `spec`. The running product is renormalised by its largest row norm after
/// every factor; the accumulated log-scale is carried in the result.
pub fn oracle_spectrum(spec: &EnsembleSpec, rng: &mut RandomStream) -> Result<SpectrumResult> {
    let n = spec.n();
    if n > MAX_ORACLE_DIM {
        return Err(Error::OracleGuard(format!(
            "n = {n} exceeds the oracle limit of {MAX_ORACLE_DIM}; the dense eigensolver is a \
             validation tool, use the structural sampler at this size"
        )));
    }
    let mut product = ComplexMatrix::identity(n);
    let mut log_scale = 0.0;
    for r in 0..spec.m() {
        let factor = match spec.kind() {
            EnsembleKind::GinibreProduct => sample_ginibre_matrix(n, rng),
            EnsembleKind::TruncatedUnitaryProduct => {
                let size = n + spec.gaps()[r] as usize;
                truncate_top_left(&sample_haar_unitary(size, rng)?, n)?
            }
        };
        product = &factor * &product;
        let s = product.max_row_norm();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::numeric(format!(
                "product degenerated after factor {}",
                r + 1
            )));
        }
        product.scale(1.0 / s);
        log_scale += s.ln();
    }
    Ok(eigenvalues(&product, ORACLE_TOL)?.with_log_scale(log_scale))
}

/// CSV export `replicate,re,im,log_sq_modulus,argument`.
pub fn spectra_to_csv(spectra: &[SpectrumResult]) -> String {
    let mut out = String::from("replicate,re,im,log_sq_modulus,argument\n");
    for (rep, s) in spectra.iter().enumerate() {
        let z = s.eigenvalues();
        for ((z, l), a) in z.iter().zip(s.log_sq_moduli()).zip(s.arguments()) {
            let _ = writeln!(
                out,
                "{rep},{},{},{},{}",
                fmt17(z.re),
                fmt17(z.im),
                fmt17(l),
                fmt17(a)
            );
        }
    }
    out
}
