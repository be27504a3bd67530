use std::fmt::Write as _;

use ghe_core::calculus::FIELDS;
use ghe_core::fdoracle::{certify_sample, CertStatus, FdOptions};
use ghe_core::superpose::{summarize, CheckOutcome, CheckStats, Expectation, PointEvaluator, PointRecord};
use ghe_core::{Axis, Point, TheoremReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::scenario::{Prepared, ScenarioError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Sample,
    Balance,
    Fdcheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Sample => "sample",
            Command::Balance => "balance",
            Command::Fdcheck => "fdcheck",
        }
    }
}

/// Result of a command: a pass flag, a text summary and the JSON report body.
pub struct Outcome {
    pub passed: bool,
    pub text: String,
    pub report: serde_json::Value,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema_version: u32,
    command: &'a str,
    scenario: &'a str,
    expect: Expectation,
    passed: bool,
    report: &'a R,
}

fn envelope<R: Serialize>(command: Command, prepared: &Prepared, passed: bool, report: &R) -> serde_json::Value {
    serde_json::to_value(Envelope {
        schema_version: SCHEMA_VERSION,
        command: command.name(),
        scenario: &prepared.scenario.name,
        expect: prepared.scenario.expect,
        passed,
        report,
    })
    .expect("reports serialize")
}

fn evaluator(prepared: &Prepared) -> Result<PointEvaluator<'_>, ScenarioError> {
    Ok(PointEvaluator::new(
        prepared.family(),
        prepared.spec.clone(),
        prepared.policy,
        prepared.tolerances.fold,
        prepared.reduced(),
    )?)
}

fn header(out: &mut String, command: Command, prepared: &Prepared) {
    let name = if prepared.scenario.name.is_empty() {
        "(unnamed)"
    } else {
        &prepared.scenario.name
    };
    let _ = writeln!(
        out,
        "{} {name}: {} seeds, {} points, expect {:?}",
        command.name(),
        prepared.family().len(),
        prepared.points.len(),
        prepared.scenario.expect
    );
}

fn stats_line(out: &mut String, name: &str, s: &CheckStats) {
    let _ = writeln!(
        out,
        "  {name:<28} n={:<6} max={:.3e} median={:.3e} above {:.0e}: {}",
        s.count, s.max, s.median, s.threshold, s.exceeding
    );
}

fn checks_block(out: &mut String, checks: &[CheckOutcome], passed: bool) {
    for c in checks {
        let _ = writeln!(out, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(out, "result: {}", if passed { "PASS" } else { "FAIL" });
}

pub fn verify(prepared: &Prepared) -> Result<Outcome, ScenarioError> {
    let ev = evaluator(prepared)?;
    let records = ev.evaluate_all(&prepared.points);
    let report = summarize(&records, &prepared.tolerances.thresholds(), prepared.scenario.expect);
    let mut text = String::new();
    header(&mut text, Command::Verify, prepared);
    counts_line(&mut text, &report);
    stats_line(&mut text, "seed field equation", &report.seed_ghe);
    stats_line(&mut text, "seed compatibility", &report.seed_compat);
    stats_line(&mut text, "pairwise balance", &report.pairwise);
    stats_line(&mut text, "n-term balance", &report.n_term);
    if let Some(r) = &report.reduced {
        stats_line(&mut text, "reduced balance", r);
    }
    stats_line(&mut text, "superposed field equation", &report.superposed_ghe);
    stats_line(&mut text, "superposed compatibility", &report.superposed_compat);
    stats_line(&mut text, "quadratic expansion", &report.expansion);
    stats_line(&mut text, "compatibility linearity", &report.compat_linearity);
    checks_block(&mut text, &report.checks, report.passed);
    Ok(Outcome {
        passed: report.passed,
        report: envelope(Command::Verify, prepared, report.passed, &report),
        text,
    })
}

fn counts_line(out: &mut String, r: &TheoremReport) {
    let _ = writeln!(
        out,
        "  points {} admissible {} folds {} holes {} degenerate {}",
        r.points, r.admissible, r.folds, r.holes, r.degenerate
    );
}

#[derive(Debug, Serialize)]
pub struct PairStats {
    pub i: usize,
    pub j: usize,
    pub pairwise: CheckStats,
    pub reduced: Option<CheckStats>,
}

#[derive(Debug, Serialize)]
pub struct BalanceReport {
    pub points: usize,
    pub admissible: usize,
    pub pairs: Vec<PairStats>,
    pub n_term: CheckStats,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

pub fn balance(prepared: &Prepared) -> Result<Outcome, ScenarioError> {
    let ev = evaluator(prepared)?;
    let records = ev.evaluate_all(&prepared.points);
    let ok: Vec<&PointRecord> = records.iter().filter(|r| r.admissible()).collect();
    let tol = &prepared.tolerances;
    let expect = prepared.scenario.expect;
    let limit = match expect {
        Expectation::Hold => tol.balance,
        Expectation::Violate => tol.violation,
    };
    let n = prepared.family().len();
    let mut pairs = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let pairwise = ok.iter().map(|r| r.pairs[k].pairwise.normalized).collect();
            let reduced: Vec<f64> = ok.iter().filter_map(|r| r.pairs[k].reduced.map(|x| x.normalized)).collect();
            pairs.push(PairStats {
                i,
                j,
                pairwise: CheckStats::from_values(pairwise, limit),
                reduced: (!reduced.is_empty()).then(|| CheckStats::from_values(reduced, limit)),
            });
            k += 1;
        }
    }
    let n_term = CheckStats::from_values(
        ok.iter().filter_map(|r| r.n_term.map(|x| x.normalized)).collect(),
        limit,
    );

    let mut checks = vec![CheckOutcome {
        name: "admissible points".into(),
        passed: !ok.is_empty(),
        detail: format!("{} of {} points", ok.len(), records.len()),
    }];
    let max_check = |name: String, s: &CheckStats| CheckOutcome {
        name,
        passed: s.exceeding == 0,
        detail: format!("max {:.3e} over {} values (limit {:.0e})", s.max, s.count, s.threshold),
    };
    match expect {
        Expectation::Hold => {
            for p in &pairs {
                checks.push(max_check(format!("pairwise balance ({}, {})", p.i, p.j), &p.pairwise));
                if let Some(r) = &p.reduced {
                    checks.push(max_check(format!("reduced balance ({}, {})", p.i, p.j), r));
                }
            }
            checks.push(max_check("n-term balance".into(), &n_term));
        }
        Expectation::Violate => {
            for p in &pairs {
                let (name, s) = match &p.reduced {
                    Some(r) => ("reduced", r),
                    None => ("pairwise", &p.pairwise),
                };
                checks.push(CheckOutcome {
                    name: format!("{name} balance ({}, {}) violated", p.i, p.j),
                    passed: s.count > 0 && s.exceeding_fraction() > tol.violate_fraction,
                    detail: format!(
                        "{:.2}% of {} values above {:.0e}, median {:.3e}",
                        100.0 * s.exceeding_fraction(),
                        s.count,
                        s.threshold,
                        s.median
                    ),
                });
            }
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = BalanceReport {
        points: records.len(),
        admissible: ok.len(),
        pairs,
        n_term,
        checks,
        passed,
    };

    let mut text = String::new();
    header(&mut text, Command::Balance, prepared);
    let _ = writeln!(text, "  points {} admissible {}", report.points, report.admissible);
    if report.pairs.is_empty() {
        let _ = writeln!(text, "  no seed pairs");
    }
    for p in &report.pairs {
        stats_line(&mut text, &format!("pairwise ({}, {})", p.i, p.j), &p.pairwise);
        if let Some(r) = &p.reduced {
            stats_line(&mut text, &format!("reduced ({}, {})", p.i, p.j), r);
        }
    }
    stats_line(&mut text, "n-term", &report.n_term);
    checks_block(&mut text, &report.checks, passed);
    Ok(Outcome {
        passed,
        report: envelope(Command::Balance, prepared, passed, &report),
        text,
    })
}

#[derive(Debug, Serialize)]
pub struct Worst {
    pub point: Point,
    pub seed: usize,
    pub field: String,
    pub axis: Axis,
    pub deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct FdReport {
    pub points: usize,
    /// Seed samples compared against finite differences.
    pub certified: usize,
    pub near_fold: usize,
    /// Seed samples with no root, or a stencil point with no root nearby.
    pub holes: usize,
    pub unsupported: usize,
    pub max_deviation: f64,
    pub median_deviation: f64,
    /// Largest deviation per partial, in `p_x .. r_t` order.
    pub partial_max: Vec<f64>,
    pub worst: Option<Worst>,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn fdcheck(prepared: &Prepared) -> Result<Outcome, ScenarioError> {
    let ev = evaluator(prepared)?;
    let family = prepared.family();
    let opts = FdOptions {
        fold: prepared.tolerances.fold,
        ..FdOptions::default()
    };
    let per_point: Vec<Vec<(usize, Option<ghe_core::fdoracle::CertReport>)>> = prepared
        .points
        .par_iter()
        .map(|at| match ev.seed_samples(at) {
            Ok(samples) => samples
                .iter()
                .enumerate()
                .map(|(i, s)| (i, Some(certify_sample(family, i, ev.relation(i), s, ev.policy(), &opts))))
                .collect(),
            Err(_) => vec![(0, None)],
        })
        .collect();

    let mut report = FdReport {
        points: prepared.points.len(),
        certified: 0,
        near_fold: 0,
        holes: 0,
        unsupported: 0,
        max_deviation: 0.0,
        median_deviation: 0.0,
        partial_max: vec![0.0; 12],
        worst: None,
        tolerance: prepared.tolerances.fd,
        passed: false,
    };
    let mut maxima = Vec::new();
    for (seed, cert) in per_point.into_iter().flatten() {
        let Some(c) = cert else {
            report.holes += 1;
            continue;
        };
        match &c.status {
            CertStatus::Certified => {}
            CertStatus::NearFold { .. } => {
                report.near_fold += 1;
                continue;
            }
            CertStatus::Hole { .. } => {
                report.holes += 1;
                continue;
            }
            CertStatus::Unsupported { .. } => {
                report.unsupported += 1;
                continue;
            }
        }
        report.certified += 1;
        maxima.push(c.max_deviation);
        for (m, d) in report.partial_max.iter_mut().zip(&c.deviations) {
            *m = m.max(*d);
        }
        if report.worst.as_ref().is_none_or(|w| c.max_deviation > w.deviation) {
            let (field, axis) = c.worst.clone().expect("certified reports name their worst partial");
            report.worst = Some(Worst {
                point: c.point,
                seed,
                field,
                axis,
                deviation: c.max_deviation,
            });
        }
    }
    let stats = CheckStats::from_values(maxima, report.tolerance);
    report.max_deviation = stats.max;
    report.median_deviation = stats.median;
    report.passed = report.certified > 0 && stats.exceeding == 0;

    let mut text = String::new();
    header(&mut text, Command::Fdcheck, prepared);
    let _ = writeln!(
        text,
        "  certified {} near-fold {} holes {} unsupported {}",
        report.certified, report.near_fold, report.holes, report.unsupported
    );
    let _ = writeln!(
        text,
        "  max deviation {:.3e} median {:.3e} (limit {:.0e})",
        report.max_deviation, report.median_deviation, report.tolerance
    );
    for (k, m) in report.partial_max.iter().enumerate() {
        let _ = write!(text, "{}{}_{}={:.1e}", if k == 0 { "  " } else { " " }, FIELDS[k / 4], Axis::ALL[k % 4], m);
    }
    let _ = writeln!(text);
    if let Some(w) = &report.worst {
        let _ = writeln!(text, "  worst: seed {} {}_{} at {}", w.seed, w.field, w.axis, w.point);
    }
    let _ = writeln!(text, "result: {}", if report.passed { "PASS" } else { "FAIL" });
    Ok(Outcome {
        passed: report.passed,
        report: envelope(Command::Fdcheck, prepared, report.passed, &report),
        text,
    })
}

/// Evaluates the cloud and returns the CSV dump with a short summary.
pub fn sample(prepared: &Prepared) -> Result<(String, Outcome), ScenarioError> {
    let ev = evaluator(prepared)?;
    let records = ev.evaluate_all(&prepared.points);
    let csv = crate::csv::write(&records, prepared.family().len());
    let report = summarize(&records, &prepared.tolerances.thresholds(), prepared.scenario.expect);
    let mut text = String::new();
    header(&mut text, Command::Sample, prepared);
    counts_line(&mut text, &report);
    let _ = writeln!(text, "  {} rows, {} columns", records.len(), crate::csv::columns(prepared.family().len()).len());
    Ok((
        csv,
        Outcome {
            passed: true,
            report: envelope(Command::Sample, prepared, true, &report),
            text,
        },
    ))
}
