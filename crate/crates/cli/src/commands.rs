use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use prodspec::ensembles::{attach_angles, sample_radii, samples_to_csv, scaled_values};
use prodspec::export::{fmt17, Sig17};
use prodspec::kernel::{radial_density_pn, KernelSpec};
use prodspec::limits::Regime;
use prodspec::oracle::oracle_spectrum;
use prodspec::stats::{ks_one_sample, ks_one_sample_with_left_limits, ks_two_sample};
use prodspec::{
    EmpiricalMeasure, EnsembleKind, EnsembleSpec, KsReport, LogRadialSample, RandomStream,
    ScalingRule,
};

use crate::args::{
    Cli, Format, KernelArgs, KsArgs, LimitCmdArgs, RegimeArg, SampleArgs, ValidateArgs,
};
use crate::output::{to_json, write_output, Meta};
use crate::{CliError, Verdict};

/// Oracle draws use stream ids from here on, structural draws from 0.
const ORACLE_STREAM_BASE: u64 = 1 << 40;

fn require_seed(cli: &Cli, command: &str) -> Result<u64, CliError> {
    cli.seed
        .ok_or_else(|| CliError::Usage(format!("{command} needs an explicit --seed")))
}

fn scale_summary(spec: &EnsembleSpec) -> String {
    match spec.kind() {
        EnsembleKind::GinibreProduct => {
            format!(
                "log a_n={:.6}",
                0.5 * spec.m() as f64 * (spec.n() as f64).ln()
            )
        }
        EnsembleKind::TruncatedUnitaryProduct => format!("log b_n={:.6}", spec.log_b()),
    }
}

fn draw(
    spec: &EnsembleSpec,
    seed: u64,
    stream: u64,
    angles: bool,
) -> Result<LogRadialSample, CliError> {
    let mut rng = RandomStream::new(seed, stream);
    let sample = sample_radii(spec, &mut rng)?;
    Ok(if angles {
        attach_angles(sample, &mut rng)?
    } else {
        sample
    })
}

#[derive(Serialize)]
struct ReplicateJson {
    replicate: usize,
    stream_id: u64,
    log_sq_moduli: Vec<Sig17>,
    angles: Option<Vec<Sig17>>,
    scaled_radii: Option<Vec<Sig17>>,
}

pub fn sample(cli: &Cli, args: &SampleArgs) -> Result<Verdict, CliError> {
    let seed = require_seed(cli, "sample")?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be >= 1".into()));
    }
    let spec = args.ensemble.spec()?;
    let rule = args.scaling.rule(&spec)?;
    let format = cli.format.unwrap_or(Format::Csv);

    let start = Instant::now();
    let samples = (0..args.reps)
        .into_par_iter()
        .map(|r| draw(&spec, seed, r as u64, args.angles))
        .collect::<Result<Vec<_>, _>>()?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut meta = Meta::new("sample", Some(seed), args)?;
    meta.insert("format", format!("{format:?}").to_lowercase());
    let text = match format {
        Format::Csv => meta.csv_header() + &samples_to_csv(&samples, rule.as_ref())?,
        Format::Json => {
            let replicates = samples
                .iter()
                .enumerate()
                .map(|(r, s)| {
                    Ok(ReplicateJson {
                        replicate: r,
                        stream_id: r as u64,
                        log_sq_moduli: s.log_sq_moduli.iter().copied().map(Sig17).collect(),
                        angles: s
                            .angles
                            .as_ref()
                            .map(|a| a.iter().copied().map(Sig17).collect()),
                        scaled_radii: rule
                            .as_ref()
                            .map(|rule| scaled_values(s, rule))
                            .transpose()?
                            .map(|v| v.into_iter().map(Sig17).collect()),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            to_json(&json!({ "meta": meta, "replicates": replicates }))?
        }
    };
    write_output(cli.out.as_deref(), &text)?;

    let points = spec.n() * args.reps;
    eprintln!(
        "sample: n={} m={} {} reps={} points={} wall={:.3}s points/sec={:.0}",
        spec.n(),
        spec.m(),
        scale_summary(&spec),
        args.reps,
        points,
        elapsed,
        points as f64 / elapsed.max(1e-9)
    );
    Ok(Verdict::Done)
}

fn opt17(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

pub fn limit(cli: &Cli, args: &LimitCmdArgs) -> Result<Verdict, CliError> {
    let profile = args.limit.profile(args.m)?;
    let format = cli.format.unwrap_or(Format::Json);
    let mut meta = Meta::new("limit", cli.seed, args)?;
    meta.insert("format", format!("{format:?}").to_lowercase());
    let regime =
        serde_json::to_value(profile.regime()).map_err(|e| CliError::Numeric(e.to_string()))?;
    let text = match format {
        Format::Json => {
            let meta = serde_json::to_value(&meta).map_err(|e| CliError::Numeric(e.to_string()))?;
            let mut t = profile.to_json(meta)?;
            t.push('\n');
            t
        }
        Format::Csv => {
            meta.insert("regime", regime.as_str().unwrap_or_default());
            let mut out = meta.csv_header();
            match profile.grid()? {
                None => out.push_str("# radial_cdf=step at 1\n"),
                Some(points) => {
                    out.push_str("x,F,F_inverse,f_star,planar_density\n");
                    for p in points {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            fmt17(p.x),
                            opt17(p.forward),
                            fmt17(p.inverse),
                            opt17(p.radial_density),
                            opt17(p.planar_density)
                        );
                    }
                }
            }
            out
        }
    };
    write_output(cli.out.as_deref(), &text)?;
    eprintln!("limit: regime={}", regime.as_str().unwrap_or_default());
    Ok(Verdict::Done)
}

fn report_csv(meta: &Meta, reports: &[&KsReport]) -> String {
    let mut out = meta.csv_header();
    out.push_str("name,statistic,threshold,pass,sample_sizes\n");
    for r in reports {
        let sizes: Vec<String> = r.sample_sizes.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.name,
            fmt17(r.statistic.0),
            fmt17(r.threshold.0),
            r.pass,
            sizes.join(";")
        );
    }
    out
}

pub fn validate(cli: &Cli, args: &ValidateArgs) -> Result<Verdict, CliError> {
    let seed = require_seed(cli, "validate")?;
    if args.draws == 0 {
        return Err(CliError::Usage("--draws must be >= 1".into()));
    }
    let spec = args.ensemble.spec()?;
    let oracle = args.oracle_spec(&spec)?;
    let format = cli.format.unwrap_or(Format::Json);

    let start = Instant::now();
    let structural: Vec<f64> = (0..args.draws)
        .into_par_iter()
        .map(|r| draw(&spec, seed, r as u64, false).map(|s| s.log_sq_moduli))
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    let dense = (0..args.draws)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomStream::new(seed, ORACLE_STREAM_BASE + r as u64);
            let spectrum = oracle_spectrum(&oracle, &mut rng)?;
            Ok((
                spectrum.log_sq_moduli().collect::<Vec<_>>(),
                spectrum.residual,
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let max_residual = dense.iter().map(|d| d.1).fold(0.0, f64::max);
    let dense: Vec<f64> = dense.into_iter().flat_map(|d| d.0).collect();
    let elapsed = start.elapsed().as_secs_f64();

    let a = EmpiricalMeasure::new(structural)?;
    let b = EmpiricalMeasure::new(dense)?;
    let d = ks_two_sample(&a, &b)?;
    let report = KsReport::new(
        "structural_vs_oracle",
        d,
        vec![a.count(), b.count()],
        seed,
        args.threshold,
    );

    let mut meta = Meta::new("validate", Some(seed), args)?;
    meta.insert("format", format!("{format:?}").to_lowercase());
    let text = match format {
        Format::Json => to_json(&json!({
            "meta": meta,
            "report": report,
            "max_oracle_residual": Sig17(max_residual),
        }))?,
        Format::Csv => report_csv(&meta, &[&report]),
    };
    write_output(cli.out.as_deref(), &text)?;
    eprintln!(
        "validate: KS={:.5} threshold={} {} points={}+{} wall={:.3}s",
        d,
        args.threshold,
        if report.pass { "PASS" } else { "FAIL" },
        a.count(),
        b.count(),
        elapsed
    );
    Ok(if report.pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

pub fn kstest(cli: &Cli, args: &KsArgs) -> Result<Verdict, CliError> {
    let seed = require_seed(cli, "kstest")?;
    if args.draws == 0 {
        return Err(CliError::Usage("--draws must be >= 1".into()));
    }
    let spec = args.ensemble.spec()?;
    let rule = args
        .scaling
        .rule(&spec)?
        .ok_or_else(|| CliError::Usage("kstest needs a --scaling rule".into()))?;
    let profile = args.limit.profile(Some(spec.m()))?;
    let paired = match args.limit.regime {
        RegimeArg::Ginibre => matches!(rule, ScalingRule::GinibrePower { .. }),
        _ => matches!(rule, ScalingRule::TruncatedPower { .. }),
    };
    if !paired {
        return Err(CliError::Usage(format!(
            "regime {:?} cannot be compared with {:?} scaling (ginibre pairs with ginibre-power, cor1-4 with truncated-power)",
            args.limit.regime, args.scaling.scaling
        )
        .to_lowercase()));
    }
    let format = cli.format.unwrap_or(Format::Json);

    let samples = (0..args.draws)
        .into_par_iter()
        .map(|r| draw(&spec, seed, r as u64, true))
        .collect::<Result<Vec<_>, _>>()?;
    let mut radii = Vec::with_capacity(spec.n() * args.draws);
    let mut angles = Vec::with_capacity(spec.n() * args.draws);
    for s in &samples {
        radii.extend(scaled_values(s, &rule)?);
        angles.extend(s.angles.as_ref().into_iter().flatten().map(|a| a / TAU));
    }
    let radii = EmpiricalMeasure::new(radii)?;
    let angles = EmpiricalMeasure::new(angles)?;

    let near_one = radii.mass_between(0.9, 1.1);
    let arc = profile.regime() == Regime::ArcLaw;
    // a point mass has no useful KS distance at finite n; test concentration instead
    let (name, d_radial, radial_threshold) = if arc {
        (
            "radial_mass_outside_0.9_1.1",
            1.0 - near_one,
            1.0 - args.arc_mass,
        )
    } else {
        let d = ks_one_sample_with_left_limits(
            &radii,
            |y| profile.radial_cdf(y).unwrap_or(f64::NAN),
            |y| profile.radial_cdf_left(y).unwrap_or(f64::NAN),
        );
        ("radial", d, args.threshold)
    };
    if !d_radial.is_finite() {
        return Err(CliError::Numeric(
            "limiting CDF could not be evaluated at every sample point".into(),
        ));
    }
    let d_angle = ks_one_sample(&angles, |x| x.clamp(0.0, 1.0));
    let radial = KsReport::new(name, d_radial, vec![radii.count()], seed, radial_threshold);
    let angular = KsReport::new(
        "angular",
        d_angle,
        vec![angles.count()],
        seed,
        args.angular_threshold.unwrap_or(args.threshold),
    );
    let pass = radial.pass && angular.pass;

    let mut meta = Meta::new("kstest", Some(seed), args)?;
    meta.insert("format", format!("{format:?}").to_lowercase());
    let text = match format {
        Format::Json => to_json(&json!({
            "meta": meta,
            "regime": profile.regime(),
            "reports": [radial, angular],
            "mass_within_0.9_1.1": Sig17(near_one),
            "pass": pass,
        }))?,
        Format::Csv => report_csv(&meta, &[&radial, &angular]),
    };
    write_output(cli.out.as_deref(), &text)?;
    eprintln!(
        "kstest: {}={:.5} angular KS={:.5} mass[0.9,1.1]={:.4} {}",
        radial.name,
        d_radial,
        d_angle,
        near_one,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { Verdict::Pass } else { Verdict::Fail })
}

#[derive(Serialize)]
struct CkRow {
    k: usize,
    log_c: Sig17,
    c: Sig17,
}

pub fn kernel(cli: &Cli, args: &KernelArgs) -> Result<Verdict, CliError> {
    if args.grid_points < 2 {
        return Err(CliError::Usage("--grid-points must be >= 2".into()));
    }
    let weight = args.weight()?;
    let spec = KernelSpec::new(args.n, weight.clone())?;
    let r_max = match args.r_max {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => {
            return Err(CliError::Usage(format!(
                "--r-max must be positive, got {r}"
            )))
        }
        None => weight
            .support_upper()
            .unwrap_or_else(|| (args.n as f64).sqrt() + 8.0),
    };
    let step = r_max / (args.grid_points - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..args.grid_points)
        .map(|i| {
            let r = i as f64 * step;
            (r, radial_density_pn(&spec, r))
        })
        .collect();
    let trapezoid: f64 = grid
        .windows(2)
        .map(|w| 0.5 * step * (w[0].1 + w[1].1))
        .sum();
    let log_c_norm = spec.log_normalizing_constant();
    let format = cli.format.unwrap_or(Format::Csv);

    let mut meta = Meta::new("kernel", cli.seed, args)?;
    meta.insert("format", format!("{format:?}").to_lowercase());
    meta.insert("log-normalizing-constant", fmt17(log_c_norm));
    meta.insert("r-max-used", fmt17(r_max));
    meta.insert("pn-trapezoid-integral", fmt17(trapezoid));

    let ck: Vec<CkRow> = spec
        .log_c()
        .iter()
        .enumerate()
        .map(|(k, &lc)| CkRow {
            k,
            log_c: Sig17(lc),
            c: Sig17(lc.exp()),
        })
        .collect();

    match format {
        Format::Json => {
            let text = to_json(&json!({
                "meta": meta,
                "log_normalizing_constant": Sig17(log_c_norm),
                "ck": ck,
                "pn": {
                    "r": grid.iter().map(|g| Sig17(g.0)).collect::<Vec<_>>(),
                    "density": grid.iter().map(|g| Sig17(g.1)).collect::<Vec<_>>(),
                    "trapezoid_integral": Sig17(trapezoid),
                },
            }))?;
            write_output(cli.out.as_deref(), &text)?;
        }
        Format::Csv => {
            let mut ck_csv = meta.csv_header();
            ck_csv.push_str("k,log_c,c\n");
            for row in &ck {
                let _ = writeln!(
                    ck_csv,
                    "{},{},{}",
                    row.k,
                    fmt17(row.log_c.0),
                    fmt17(row.c.0)
                );
            }
            let mut pn_csv = meta.csv_header();
            pn_csv.push_str("r,P_n\n");
            for (r, p) in &grid {
                let _ = writeln!(pn_csv, "{},{}", fmt17(*r), fmt17(*p));
            }
            match cli.out.as_deref() {
                Some(dir) => {
                    fs::create_dir_all(dir)
                        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    write_output(Some(&dir.join("ck.csv")), &ck_csv)?;
                    write_output(Some(&dir.join("pn.csv")), &pn_csv)?;
                }
                None => write_output(None, &format!("{ck_csv}\n{pn_csv}"))?,
            }
        }
    }
    eprintln!(
        "kernel: n={} log C={:.10} P_n trapezoid integral={:.8}",
        args.n, log_c_norm, trapezoid
    );
    Ok(Verdict::Done)
}
