//! Structural samplers for the eigenvalue moduli of the two product
//! ensembles, plus their exact moments.
//!
//! For `n × n` Ginibre products with `m` factors, the multiset
//! `{|Z_j|^2}` has the law of `{Π_r s_{j,r}}` with independent
//! `s_{j,r} ~ Gamma(j)`. For products of `n × n` corners of Haar unitaries
//! of size `n + l_r`, the factors are `Beta(j, l_r)` instead. Entry `j − 1`
//! of a [`LogRadialSample`] holds `Σ_r ln s_{j,r}`.
//!
//! Angles attached by [`attach_angles`] are i.i.d. uniform and independent of
//! the moduli. That reproduces the one-point law and every limit of the
//! empirical measure, but not the joint law of the eigenvalue arguments.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::fmt17;
use crate::rng::RandomStream;
use crate::sampling::{sample_angle, sample_log_beta, sample_log_gamma};
use crate::special::ln_gamma;
use crate::stats::{digamma, EmpiricalMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    GinibreProduct,
    TruncatedUnitaryProduct,
}

/// Dimension `n`, factor count `m`, and for truncated products the gaps
/// `l_r = n_r − n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    n: usize,
    m: usize,
    gaps: Vec<u64>,
}

impl EnsembleSpec {
    pub fn ginibre(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::domain(format!(
                "ginibre product needs n >= 1 and m >= 1 (got n={n}, m={m})"
            )));
        }
        Ok(Self {
            kind: EnsembleKind::GinibreProduct,
            n,
            m,
            gaps: Vec::new(),
        })
    }

    /// Truncated unitary product with one factor per gap.
    pub fn truncated(n: usize, gaps: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("truncated product needs n >= 1"));
        }
        if gaps.is_empty() {
            return Err(Error::domain(
                "truncated product needs at least one factor (gaps is empty)",
            ));
        }
        if let Some(pos) = gaps.iter().position(|&l| l == 0) {
            return Err(Error::domain(format!(
                "every gap l_j must be >= 1 so that n < n_j (gap {} is 0)",
                pos + 1
            )));
        }
        Ok(Self {
            kind: EnsembleKind::TruncatedUnitaryProduct,
            n,
            m: gaps.len(),
            gaps,
        })
    }

    /// Truncated product with `m` identical gaps.
    pub fn truncated_uniform(n: usize, m: usize, gap: u64) -> Result<Self> {
        Self::truncated(n, vec![gap; m])
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    /// Sizes `n_j = n + l_j` of the unitary factors.
    pub fn unitary_sizes(&self) -> impl Iterator<Item = u64> + '_ {
        self.gaps.iter().map(move |&l| self.n as u64 + l)
    }

    /// `ln b_n = Σ_j ln(n / n_j)` (zero for Ginibre products).
    pub fn log_b(&self) -> f64 {
        let n = self.n as f64;
        self.gaps.iter().map(|&l| -(l as f64 / n).ln_1p()).sum()
    }

    /// `Σ_j l_j / n`.
    pub fn gap_mass(&self) -> f64 {
        self.gaps.iter().map(|&l| l as f64).sum::<f64>() / self.n as f64
    }
}

/// One draw of the `n` squared moduli, in log domain, indexed by `j = 1..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRadialSample {
    pub spec: EnsembleSpec,
    pub log_sq_moduli: Vec<f64>,
    pub angles: Option<Vec<f64>>,
}

impl LogRadialSample {
    pub fn len(&self) -> usize {
        self.log_sq_moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_sq_moduli.is_empty()
    }
}

/// Draw the squared eigenvalue moduli of `spec` through the Gamma/Beta
/// product representation.
pub fn sample_radii(spec: &EnsembleSpec, rng: &mut RandomStream) -> Result<LogRadialSample> {
    let mut log_sq_moduli = Vec::with_capacity(spec.n);
    for j in 1..=spec.n as u64 {
        let mut acc = 0.0;
        match spec.kind {
            EnsembleKind::GinibreProduct => {
                for _ in 0..spec.m {
                    acc += sample_log_gamma(j, rng)?.get();
                }
            }
            EnsembleKind::TruncatedUnitaryProduct => {
                for &l in &spec.gaps {
                    acc += sample_log_beta(j, l, rng)?.get();
                }
            }
        }
        log_sq_moduli.push(acc);
    }
    Ok(LogRadialSample {
        spec: spec.clone(),
        log_sq_moduli,
        angles: None,
    })
}

/// Fill in i.i.d. uniform angles.
pub fn attach_angles(
    mut sample: LogRadialSample,
    rng: &mut RandomStream,
) -> Result<LogRadialSample> {
    if sample.angles.is_some() {
        return Err(Error::contract("angles already attached to this sample"));
    }
    sample.angles = Some((0..sample.len()).map(|_| sample_angle(rng)).collect());
    Ok(sample)
}

/// Radial scaling `h_n` applied to eigenvalue moduli.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingRule {
    /// `h(r) = r^{2/m} / n`.
    GinibrePower { n: usize, m: usize },
    /// `h(r) = (r^2 / b_n)^{1/γ}`.
    TruncatedPower { gamma: f64, log_b: f64 },
    /// `h(r) = r / a_n`.
    Linear { log_a: f64 },
}

impl ScalingRule {
    pub fn ginibre_power(spec: &EnsembleSpec) -> Result<Self> {
        if spec.kind != EnsembleKind::GinibreProduct {
            return Err(Error::contract(
                "ginibre-power scaling requires a Ginibre product",
            ));
        }
        Ok(ScalingRule::GinibrePower {
            n: spec.n,
            m: spec.m,
        })
    }

    pub fn truncated_power(spec: &EnsembleSpec, gamma: f64) -> Result<Self> {
        if spec.kind != EnsembleKind::TruncatedUnitaryProduct {
            return Err(Error::contract(
                "truncated-power scaling requires a truncated unitary product",
            ));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "scaling exponent gamma_n must be finite and >= 1, got {gamma}"
            )));
        }
        Ok(ScalingRule::TruncatedPower {
            gamma,
            log_b: spec.log_b(),
        })
    }

    /// `a_n = b_n^{1/2}` for truncated products, `a_n = n^{m/2}` for Ginibre
    /// products.
    pub fn linear_for(spec: &EnsembleSpec) -> Self {
        let log_a = match spec.kind {
            EnsembleKind::GinibreProduct => 0.5 * spec.m as f64 * (spec.n as f64).ln(),
            EnsembleKind::TruncatedUnitaryProduct => 0.5 * spec.log_b(),
        };
        ScalingRule::Linear { log_a }
    }

    /// `ln h` as a function of `ln r^2`.
    pub fn log_scale(&self, log_sq_modulus: f64) -> f64 {
        match *self {
            ScalingRule::GinibrePower { n, m } => log_sq_modulus / m as f64 - (n as f64).ln(),
            ScalingRule::TruncatedPower { gamma, log_b } => (log_sq_modulus - log_b) / gamma,
            ScalingRule::Linear { log_a } => 0.5 * log_sq_modulus - log_a,
        }
    }

    fn check(&self, spec: &EnsembleSpec) -> Result<()> {
        match *self {
            ScalingRule::GinibrePower { n, m } => {
                if spec.kind != EnsembleKind::GinibreProduct {
                    return Err(Error::contract(
                        "ginibre-power scaling applied to a truncated product",
                    ));
                }
                if n != spec.n || m != spec.m {
                    return Err(Error::contract(format!(
                        "ginibre-power scaling built for (n={n}, m={m}) applied to (n={}, m={})",
                        spec.n, spec.m
                    )));
                }
            }
            ScalingRule::TruncatedPower { .. } => {
                if spec.kind != EnsembleKind::TruncatedUnitaryProduct {
                    return Err(Error::contract(
                        "truncated-power scaling applied to a Ginibre product",
                    ));
                }
            }
            ScalingRule::Linear { .. } => {}
        }
        Ok(())
    }
}

/// `ln h_n(|Z_j|)` for each entry, in index order.
pub fn scaled_log_values(sample: &LogRadialSample, rule: &ScalingRule) -> Result<Vec<f64>> {
    rule.check(&sample.spec)?;
    Ok(sample
        .log_sq_moduli
        .iter()
        .map(|&v| rule.log_scale(v))
        .collect())
}

/// `h_n(|Z_j|)` for each entry, in index order.
pub fn scaled_values(sample: &LogRadialSample, rule: &ScalingRule) -> Result<Vec<f64>> {
    Ok(scaled_log_values(sample, rule)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// Empirical measure of the scaled radii.
pub fn apply_scaling(sample: &LogRadialSample, rule: &ScalingRule) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::new(scaled_values(sample, rule)?)
}

fn check_moment_order(t: f64) -> Result<()> {
    if !(t > -1.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "moment order must be finite and > -1, got {t}"
        )));
    }
    Ok(())
}

/// `E|Z_j|^{2t}` for `j = 1..n`.
pub fn exact_moment_by_index(spec: &EnsembleSpec, t: f64) -> Result<Vec<f64>> {
    check_moment_order(t)?;
    let values = (1..=spec.n)
        .map(|j| {
            let j = j as f64;
            let log_m = match spec.kind {
                EnsembleKind::GinibreProduct => spec.m as f64 * (ln_gamma(j + t) - ln_gamma(j)),
                EnsembleKind::TruncatedUnitaryProduct => spec
                    .gaps
                    .iter()
                    .map(|&l| {
                        let l = l as f64;
                        // B(j+t, l) / B(j, l)
                        ln_gamma(j + t) - ln_gamma(j + t + l) - ln_gamma(j) + ln_gamma(j + l)
                    })
                    .sum(),
            };
            log_m.exp()
        })
        .collect();
    Ok(values)
}

/// `E|Z_J|^{2t}` for `J` uniform on `1..n`.
pub fn exact_moment(spec: &EnsembleSpec, t: f64) -> Result<f64> {
    let per_index = exact_moment_by_index(spec, t)?;
    Ok(per_index.iter().sum::<f64>() / spec.n as f64)
}

/// `E ln |Z_j|^2` for the `j`-th structural entry (1-based).
pub fn exact_log_mean(spec: &EnsembleSpec, j: usize) -> Result<f64> {
    if j == 0 || j > spec.n {
        return Err(Error::domain(format!("index j={j} outside 1..={}", spec.n)));
    }
    let jf = j as f64;
    match spec.kind {
        EnsembleKind::GinibreProduct => Ok(spec.m as f64 * digamma(jf)?),
        EnsembleKind::TruncatedUnitaryProduct => {
            let psi_j = digamma(jf)?;
            spec.gaps
                .iter()
                .map(|&l| Ok(psi_j - digamma(jf + l as f64)?))
                .sum()
        }
    }
}

/// Concatenated CSV export of replicate samples: header
/// `replicate,j,log_sq_modulus,angle`, plus a `scaled_radius` column when a
/// scaling rule is given. The `angle` cell is empty when no angles are
/// attached.
pub fn samples_to_csv(
    samples: &[LogRadialSample],
    scaling: Option<&ScalingRule>,
) -> Result<String> {
    let mut out = String::new();
    out.push_str("replicate,j,log_sq_modulus,angle");
    if scaling.is_some() {
        out.push_str(",scaled_radius");
    }
    out.push('\n');
    for (rep, sample) in samples.iter().enumerate() {
        let scaled = scaling
            .map(|rule| scaled_values(sample, rule))
            .transpose()?;
        for (idx, &v) in sample.log_sq_moduli.iter().enumerate() {
            let angle = sample
                .angles
                .as_ref()
                .map(|a| fmt17(a[idx]))
                .unwrap_or_default();
            let _ = write!(out, "{rep},{},{},{angle}", idx + 1, fmt17(v));
            if let Some(s) = &scaled {
                let _ = write!(out, ",{}", fmt17(s[idx]));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::ginibre(0, 1).is_err());
        assert!(EnsembleSpec::ginibre(3, 0).is_err());
        assert!(EnsembleSpec::truncated(3, vec![]).is_err());
        assert!(EnsembleSpec::truncated(3, vec![2, 0]).is_err());
        let s = EnsembleSpec::truncated(5, vec![2, 3]).unwrap();
        assert_eq!(s.m(), 2);
        assert_eq!(s.unitary_sizes().collect::<Vec<_>>(), vec![7, 8]);
        assert_relative_eq!(
            s.log_b(),
            (5.0f64 / 7.0).ln() + (5.0f64 / 8.0).ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn single_ginibre_is_exponential() {
        let spec = EnsembleSpec::ginibre(1, 1).unwrap();
        let mut rng = RandomStream::new(10, 0);
        let draws = 100_000;
        let mean: f64 = (0..draws)
            .map(|_| sample_radii(&spec, &mut rng).unwrap().log_sq_moduli[0].exp())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn single_truncated_is_uniform() {
        let spec = EnsembleSpec::truncated(1, vec![1]).unwrap();
        let mut rng = RandomStream::new(11, 0);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| sample_radii(&spec, &mut rng).unwrap().log_sq_moduli[0].exp())
            .collect();
        let m = EmpiricalMeasure::new(xs).unwrap();
        let d = crate::stats::ks_one_sample(&m, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.02, "{d}");
    }

    #[test]
    fn truncated_entries_nonpositive() {
        let spec = EnsembleSpec::truncated(20, vec![1, 3, 100]).unwrap();
        let mut rng = RandomStream::new(12, 0);
        for _ in 0..200 {
            let s = sample_radii(&spec, &mut rng).unwrap();
            assert_eq!(s.len(), 20);
            assert!(s.log_sq_moduli.iter().all(|&v| v <= 0.0));
        }
    }

    #[test]
    fn angles_attach_once() {
        let spec = EnsembleSpec::ginibre(4, 2).unwrap();
        let mut rng = RandomStream::new(13, 0);
        let s = sample_radii(&spec, &mut rng).unwrap();
        assert!(s.angles.is_none());
        let s = attach_angles(s, &mut rng).unwrap();
        assert_eq!(s.angles.as_ref().unwrap().len(), 4);
        assert!(matches!(
            attach_angles(s, &mut rng),
            Err(Error::Contract(_))
        ));
    }

    fn fixed_sample(spec: EnsembleSpec, v: f64) -> LogRadialSample {
        LogRadialSample {
            log_sq_moduli: vec![v; spec.n()],
            spec,
            angles: None,
        }
    }

    #[test]
    fn scaling_fixed_points() {
        let spec = EnsembleSpec::truncated(3, vec![5, 7]).unwrap();
        let rule = ScalingRule::truncated_power(&spec, 2.0).unwrap();
        let s = fixed_sample(spec.clone(), spec.log_b());
        for v in scaled_values(&s, &rule).unwrap() {
            assert_eq!(v, 1.0);
        }

        let g = EnsembleSpec::ginibre(4, 1).unwrap();
        let s = fixed_sample(g.clone(), 4f64.ln());
        let rule = ScalingRule::ginibre_power(&g).unwrap();
        for v in scaled_values(&s, &rule).unwrap() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-15);
        }

        let rule = ScalingRule::TruncatedPower {
            gamma: 2.0,
            log_b: 0.25f64.ln(),
        };
        let s = fixed_sample(spec, 0.0625f64.ln());
        for v in scaled_values(&s, &rule).unwrap() {
            assert_relative_eq!(v, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn scaling_rule_mismatch() {
        let g = EnsembleSpec::ginibre(4, 2).unwrap();
        let t = EnsembleSpec::truncated(4, vec![2, 2]).unwrap();
        assert!(ScalingRule::ginibre_power(&t).is_err());
        assert!(ScalingRule::truncated_power(&g, 2.0).is_err());
        assert!(ScalingRule::truncated_power(&t, 0.5).is_err());
        let wrong = ScalingRule::GinibrePower { n: 5, m: 2 };
        assert!(scaled_values(&fixed_sample(g.clone(), 0.0), &wrong).is_err());
        let tp = ScalingRule::truncated_power(&t, 2.0).unwrap();
        assert!(scaled_values(&fixed_sample(g.clone(), 0.0), &tp).is_err());
        // linear scaling works for both kinds
        assert!(scaled_values(&fixed_sample(g.clone(), 0.0), &ScalingRule::linear_for(&g)).is_ok());
        assert!(scaled_values(&fixed_sample(t.clone(), 0.0), &ScalingRule::linear_for(&t)).is_ok());
    }

    #[test]
    fn exact_moment_examples() {
        let g = EnsembleSpec::ginibre(1, 1).unwrap();
        assert_relative_eq!(exact_moment(&g, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        let t = EnsembleSpec::truncated(2, vec![2]).unwrap();
        assert_relative_eq!(exact_moment(&t, 1.0).unwrap(), 5.0 / 12.0, epsilon = 1e-14);
        for spec in [
            EnsembleSpec::ginibre(7, 3).unwrap(),
            EnsembleSpec::truncated(5, vec![2, 3]).unwrap(),
        ] {
            assert_relative_eq!(exact_moment(&spec, 0.0).unwrap(), 1.0, epsilon = 1e-14);
            assert!(exact_moment(&spec, -1.0).is_err());
        }
        // Ginibre: E|Z_j|^2 = j^m, so the uniform average is (1/n) Σ j^m
        let g = EnsembleSpec::ginibre(6, 2).unwrap();
        let direct: f64 = (1..=6).map(|j| (j * j) as f64).sum::<f64>() / 6.0;
        assert_relative_eq!(exact_moment(&g, 1.0).unwrap(), direct, max_relative = 1e-13);
    }

    #[test]
    fn exact_log_mean_examples() {
        let g = EnsembleSpec::ginibre(3, 1).unwrap();
        assert_relative_eq!(
            exact_log_mean(&g, 1).unwrap(),
            -0.577_215_664_901_532_9,
            epsilon = 1e-12
        );
        let t = EnsembleSpec::truncated(3, vec![1]).unwrap();
        assert_relative_eq!(exact_log_mean(&t, 1).unwrap(), -1.0, epsilon = 1e-12);
        assert!(exact_log_mean(&t, 0).is_err());
        assert!(exact_log_mean(&t, 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = EnsembleSpec::ginibre(2, 1).unwrap();
        let mut rng = RandomStream::new(1, 0);
        let a = sample_radii(&spec, &mut rng).unwrap();
        let b = attach_angles(sample_radii(&spec, &mut rng).unwrap(), &mut rng).unwrap();
        let csv = samples_to_csv(&[a, b], None).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "replicate,j,log_sq_modulus,angle");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,1,") && lines[1].ends_with(','));
        assert!(lines[4].starts_with("1,2,") && !lines[4].ends_with(','));
    }
}
