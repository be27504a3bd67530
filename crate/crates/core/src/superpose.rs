//! Linear combinations of seed solutions and end-to-end verification of
//! the superposition theorem over a point cloud.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{
    compat_residuals, ghe_residual, n_term_balance, pairwise_balance, reduced_balance, Equation, FieldSample,
    ResidualReport,
};
use crate::implicit::{enumerate_roots, BranchPolicy, ImplicitRelation};
use crate::point::Point;
use crate::registry::{GeneralFamily, SolutionFamily};

/// Samples more than this apart (max-norm) are not at the same point.
pub const POINT_MATCH: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuperposeError {
    #[error("superposition needs at least one coefficient")]
    Empty,
    #[error("all superposition coefficients are zero")]
    AllZero,
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("{got} coefficients given for {expected} seeds")]
    Length { expected: usize, got: usize },
    #[error("sample {index} is at {found}, expected {expected}")]
    PointMismatch {
        index: usize,
        expected: Point,
        found: Point,
    },
    #[error("the reduced-balance family has {got} seeds, expected {expected}")]
    ReducedLength { expected: usize, got: usize },
}

/// Coefficients `a_1..a_n`, one per seed of the family in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SuperpositionSpec {
    coeffs: Vec<f64>,
}

impl SuperpositionSpec {
    pub fn new(coeffs: Vec<f64>) -> Result<SuperpositionSpec, SuperposeError> {
        if coeffs.is_empty() {
            return Err(SuperposeError::Empty);
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(SuperposeError::NonFinite { index });
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(SuperposeError::AllZero);
        }
        Ok(SuperpositionSpec { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for SuperpositionSpec {
    type Error = SuperposeError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        SuperpositionSpec::new(coeffs)
    }
}

impl From<SuperpositionSpec> for Vec<f64> {
    fn from(spec: SuperpositionSpec) -> Vec<f64> {
        spec.coeffs
    }
}

/// Coefficient-weighted sum of samples taken at one point.
pub fn superpose(samples: &[FieldSample], coeffs: &[f64]) -> Result<FieldSample, SuperposeError> {
    if samples.len() != coeffs.len() {
        return Err(SuperposeError::Length {
            expected: samples.len(),
            got: coeffs.len(),
        });
    }
    let (first, rest) = samples.split_first().ok_or(SuperposeError::Empty)?;
    let mut out = first.scaled(coeffs[0]);
    for (index, (s, &c)) in rest.iter().zip(&coeffs[1..]).enumerate() {
        if s.point.max_abs_diff(&first.point) > POINT_MATCH {
            return Err(SuperposeError::PointMismatch {
                index: index + 1,
                expected: first.point,
                found: s.point,
            });
        }
        out.add_scaled(c, s);
    }
    Ok(out)
}

/// `R(Σ a_i s_i) - Σ a_i² R(s_i) - Σ_{i<j} a_i a_j C(s_i, s_j)`, where `R` is
/// the field-equation residual and `C` the pairwise cross term.
///
/// `pairs` lists `C(s_i, s_j)` for `i < j` in lexicographic order.
pub fn expansion_residual(
    superposed: &ResidualReport,
    seeds: &[ResidualReport],
    pairs: &[ResidualReport],
    coeffs: &[f64],
) -> ResidualReport {
    let mut value = superposed.value;
    let mut scale = superposed.scale;
    for (r, &a) in seeds.iter().zip(coeffs) {
        value -= a * a * r.value;
        scale = scale.max(a * a * r.scale);
    }
    let mut k = 0;
    for i in 0..coeffs.len() {
        for j in i + 1..coeffs.len() {
            let w = coeffs[i] * coeffs[j];
            value -= w * pairs[k].value;
            scale = scale.max(w.abs() * pairs[k].scale);
            k += 1;
        }
    }
    ResidualReport::new(Equation::Expansion, value, scale, superposed.point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// The superposition is a solution and every balance condition holds.
    #[default]
    Hold,
    /// The seeds are solutions but the superposition is not.
    Violate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Seed residuals (field equation and compatibility).
    pub seed: f64,
    /// Superposed field-equation residual when the theorem should hold.
    pub superposed: f64,
    /// Fraction of admissible points at which `superposed` must be met.
    pub hold_fraction: f64,
    /// Pairwise, n-term and reduced balance residuals.
    pub balance: f64,
    /// Quadratic expansion and compatibility linearity.
    pub expansion: f64,
    /// A residual above this counts as a violation.
    pub violation: f64,
    /// Fraction of admissible points that must show a violation.
    pub violate_fraction: f64,
    /// Points with any seed `|D|` below this are excluded from statistics.
    pub fold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            seed: 1e-10,
            superposed: 1e-9,
            hold_fraction: 0.99,
            balance: 1e-9,
            expansion: 1e-12,
            violation: 1e-3,
            violate_fraction: 0.5,
            fold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointStatus {
    Admissible,
    /// Some seed has `ε_D ≤ |D| < fold`; evaluated but excluded from statistics.
    Fold { seed: usize, slope: f64 },
    /// Some seed has no root on the scan interval.
    Hole { seed: usize },
    /// Some seed root has `|D| < ε_D` or could not be differentiated.
    Degenerate { seed: usize, message: String },
}

/// Pairwise results for seeds `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub pairwise: ResidualReport,
    pub reduced: Option<ResidualReport>,
}

/// Everything evaluated at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub point: Point,
    pub status: PointStatus,
    pub seeds: Vec<FieldSample>,
    pub seed_ghe: Vec<ResidualReport>,
    pub seed_compat: Vec<(ResidualReport, ResidualReport)>,
    pub pairs: Vec<PairRecord>,
    pub n_term: Option<ResidualReport>,
    pub superposed: Option<FieldSample>,
    pub superposed_ghe: Option<ResidualReport>,
    pub superposed_compat: Option<(ResidualReport, ResidualReport)>,
    pub expansion: Option<ResidualReport>,
    /// Compatibility residuals of the superposition minus the weighted seed residuals, normalized.
    pub compat_linearity: Option<f64>,
}

impl PointRecord {
    fn empty(point: Point, status: PointStatus) -> PointRecord {
        PointRecord {
            point,
            status,
            seeds: Vec::new(),
            seed_ghe: Vec::new(),
            seed_compat: Vec::new(),
            pairs: Vec::new(),
            n_term: None,
            superposed: None,
            superposed_ghe: None,
            superposed_compat: None,
            expansion: None,
            compat_linearity: None,
        }
    }

    pub fn admissible(&self) -> bool {
        self.status == PointStatus::Admissible
    }
}

/// Solves every seed at a point and evaluates all residuals.
pub struct PointEvaluator<'a> {
    family: &'a dyn SolutionFamily,
    relations: Vec<Box<dyn ImplicitRelation + 'a>>,
    reduced: Option<&'a GeneralFamily>,
    spec: SuperpositionSpec,
    policy: BranchPolicy,
    fold: f64,
}

impl<'a> PointEvaluator<'a> {
    /// `reduced` supplies general-form seeds (the family itself, or an
    /// embedding of it) on which the reduced balance condition is evaluated.
    pub fn new(
        family: &'a dyn SolutionFamily,
        spec: SuperpositionSpec,
        policy: BranchPolicy,
        fold: f64,
        reduced: Option<&'a GeneralFamily>,
    ) -> Result<PointEvaluator<'a>, SuperposeError> {
        if spec.len() != family.len() {
            return Err(SuperposeError::Length {
                expected: family.len(),
                got: spec.len(),
            });
        }
        if let Some(g) = reduced {
            if g.len() != family.len() {
                return Err(SuperposeError::ReducedLength {
                    expected: family.len(),
                    got: g.len(),
                });
            }
        }
        let relations = (0..family.len())
            .map(|i| family.relation(i, &policy.scan))
            .collect();
        Ok(PointEvaluator {
            family,
            relations,
            reduced,
            spec,
            policy,
            fold,
        })
    }

    pub fn family(&self) -> &dyn SolutionFamily {
        self.family
    }

    pub fn relation(&self, i: usize) -> &dyn ImplicitRelation {
        &*self.relations[i]
    }

    pub fn policy(&self) -> &BranchPolicy {
        &self.policy
    }

    pub fn spec(&self) -> &SuperpositionSpec {
        &self.spec
    }

    /// Seed samples at `at`, or the status explaining why there are none.
    pub fn seed_samples(&self, at: &Point) -> Result<Vec<FieldSample>, PointStatus> {
        let eps = self.policy.tolerances.degenerate_slope;
        (0..self.family.len())
            .map(|i| {
                let roots = enumerate_roots(self.relation(i), at, &self.policy);
                let root = self
                    .policy
                    .select
                    .pick(&roots)
                    .ok_or(PointStatus::Hole { seed: i })?;
                self.family
                    .field_sample(i, at, root.root, eps)
                    .map_err(|e| PointStatus::Degenerate {
                        seed: i,
                        message: e.to_string(),
                    })
            })
            .collect()
    }

    pub fn evaluate(&self, at: &Point) -> PointRecord {
        let seeds = match self.seed_samples(at) {
            Ok(s) => s,
            Err(status) => return PointRecord::empty(*at, status),
        };
        let status = seeds
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.slope.map(|d| (i, d)))
            .find(|(_, d)| d.abs() < self.fold)
            .map_or(PointStatus::Admissible, |(seed, slope)| PointStatus::Fold { seed, slope });
        let shared = self.family.shared();
        let coeffs = self.spec.coeffs();

        let seed_ghe: Vec<_> = seeds.iter().map(|s| ghe_residual(s, shared)).collect();
        let seed_compat: Vec<_> = seeds.iter().map(compat_residuals).collect();
        let mut pairs = Vec::new();
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                let reduced = self.reduced.and_then(|g| {
                    let s = g.seeds();
                    reduced_balance(&s[i], &s[j], shared, at, (seeds[i].p.value, seeds[j].p.value)).ok()
                });
                pairs.push(PairRecord {
                    i,
                    j,
                    pairwise: pairwise_balance(&seeds[i], &seeds[j], shared),
                    reduced,
                });
            }
        }
        let n_term = n_term_balance(&seeds, shared);
        let superposed = superpose(&seeds, coeffs).expect("seed samples share the point");
        let sup_ghe = ghe_residual(&superposed, shared);
        let sup_compat = compat_residuals(&superposed);
        let pair_reports: Vec<_> = pairs.iter().map(|p| p.pairwise).collect();
        let expansion = expansion_residual(&sup_ghe, &seed_ghe, &pair_reports, coeffs);

        let mut linearity: f64 = 0.0;
        for (k, sup) in [sup_compat.0, sup_compat.1].into_iter().enumerate() {
            let mut value = sup.value;
            let mut scale = sup.scale;
            for (c, &a) in seed_compat.iter().zip(coeffs) {
                let r = if k == 0 { c.0 } else { c.1 };
                value -= a * r.value;
                scale = scale.max(a.abs() * r.scale);
            }
            linearity = linearity.max(ResidualReport::new(sup.equation, value, scale, *at).normalized);
        }

        PointRecord {
            point: *at,
            status,
            seeds,
            seed_ghe,
            seed_compat,
            pairs,
            n_term: Some(n_term),
            superposed: Some(superposed),
            superposed_ghe: Some(sup_ghe),
            superposed_compat: Some(sup_compat),
            expansion: Some(expansion),
            compat_linearity: Some(linearity),
        }
    }

    /// Evaluates all points in parallel; the output keeps the input order.
    pub fn evaluate_all(&self, points: &[Point]) -> Vec<PointRecord> {
        points.par_iter().map(|p| self.evaluate(p)).collect()
    }
}

/// Summary of one normalized-residual check over the admissible points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckStats {
    pub count: usize,
    pub max: f64,
    pub median: f64,
    /// Number of values above the check's threshold.
    pub exceeding: usize,
    pub threshold: f64,
}

impl CheckStats {
    pub fn from_values(mut values: Vec<f64>, threshold: f64) -> CheckStats {
        values.sort_by(f64::total_cmp);
        let count = values.len();
        let median = match count {
            0 => 0.0,
            n if n % 2 == 1 => values[n / 2],
            n => 0.5 * (values[n / 2 - 1] + values[n / 2]),
        };
        CheckStats {
            count,
            max: values.last().copied().unwrap_or(0.0),
            median,
            exceeding: values.iter().filter(|&&v| v > threshold).count(),
            threshold,
        }
    }

    /// Fraction of values at or below the threshold; 1 when empty.
    pub fn within_fraction(&self) -> f64 {
        if self.count == 0 {
            1.0
        } else {
            (self.count - self.exceeding) as f64 / self.count as f64
        }
    }

    pub fn exceeding_fraction(&self) -> f64 {
        1.0 - self.within_fraction()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub expect: Expectation,
    pub points: usize,
    pub admissible: usize,
    pub holes: usize,
    pub folds: usize,
    pub degenerate: usize,
    pub seed_ghe: CheckStats,
    pub seed_compat: CheckStats,
    pub pairwise: CheckStats,
    pub n_term: CheckStats,
    pub reduced: Option<CheckStats>,
    pub superposed_ghe: CheckStats,
    pub superposed_compat: CheckStats,
    pub expansion: CheckStats,
    pub compat_linearity: CheckStats,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

fn check(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn max_check(name: &str, s: &CheckStats) -> CheckOutcome {
    check(
        name,
        s.exceeding == 0,
        format!("max {:.3e} over {} values (limit {:.0e})", s.max, s.count, s.threshold),
    )
}

/// Aggregates point records into statistics and pass/fail checks.
pub fn summarize(records: &[PointRecord], thresholds: &Thresholds, expect: Expectation) -> TheoremReport {
    let mut holes = 0;
    let mut folds = 0;
    let mut degenerate = 0;
    for r in records {
        match r.status {
            PointStatus::Hole { .. } => holes += 1,
            PointStatus::Fold { .. } => folds += 1,
            PointStatus::Degenerate { .. } => degenerate += 1,
            PointStatus::Admissible => {}
        }
    }
    let ok: Vec<&PointRecord> = records.iter().filter(|r| r.admissible()).collect();
    let collect = |f: &dyn Fn(&PointRecord) -> Vec<f64>| ok.iter().flat_map(|r| f(r)).collect::<Vec<f64>>();

    let seed_ghe = collect(&|r| r.seed_ghe.iter().map(|g| g.normalized).collect());
    let seed_compat = collect(&|r| {
        r.seed_compat
            .iter()
            .flat_map(|(a, b)| [a.normalized, b.normalized])
            .collect()
    });
    let pairwise = collect(&|r| r.pairs.iter().map(|p| p.pairwise.normalized).collect());
    let reduced = collect(&|r| r.pairs.iter().filter_map(|p| p.reduced.map(|x| x.normalized)).collect());
    let has_reduced = ok.iter().any(|r| r.pairs.iter().any(|p| p.reduced.is_some()));
    let n_term = collect(&|r| r.n_term.iter().map(|x| x.normalized).collect());
    let sup_ghe = collect(&|r| r.superposed_ghe.iter().map(|x| x.normalized).collect());
    let sup_compat = collect(&|r| {
        r.superposed_compat
            .iter()
            .flat_map(|(a, b)| [a.normalized, b.normalized])
            .collect()
    });
    let expansion = collect(&|r| r.expansion.iter().map(|x| x.normalized).collect());
    let linearity = collect(&|r| r.compat_linearity.into_iter().collect());

    let t = thresholds;
    let (balance_limit, sup_limit) = match expect {
        Expectation::Hold => (t.balance, t.superposed),
        Expectation::Violate => (t.violation, t.violation),
    };
    let stats = |v: Vec<f64>, limit: f64| CheckStats::from_values(v, limit);
    let mut report = TheoremReport {
        expect,
        points: records.len(),
        admissible: ok.len(),
        holes,
        folds,
        degenerate,
        seed_ghe: stats(seed_ghe, t.seed),
        seed_compat: stats(seed_compat, t.seed),
        pairwise: stats(pairwise, balance_limit),
        n_term: stats(n_term, balance_limit),
        reduced: has_reduced.then(|| stats(reduced, balance_limit)),
        superposed_ghe: stats(sup_ghe, sup_limit),
        superposed_compat: stats(sup_compat, t.seed),
        expansion: stats(expansion, t.expansion),
        compat_linearity: stats(linearity, t.expansion),
        checks: Vec::new(),
        passed: false,
    };

    let mut checks = vec![
        check(
            "admissible points",
            report.admissible > 0,
            format!("{} of {} points", report.admissible, report.points),
        ),
        max_check("seed field equation", &report.seed_ghe),
        max_check("seed compatibility", &report.seed_compat),
        max_check("quadratic expansion", &report.expansion),
        max_check("compatibility linearity", &report.compat_linearity),
    ];
    match expect {
        Expectation::Hold => {
            let s = &report.superposed_ghe;
            checks.push(check(
                "superposed field equation",
                s.within_fraction() >= t.hold_fraction,
                format!(
                    "{:.2}% of {} points within {:.0e} (need {:.2}%), max {:.3e}",
                    100.0 * s.within_fraction(),
                    s.count,
                    s.threshold,
                    100.0 * t.hold_fraction,
                    s.max
                ),
            ));
            checks.push(max_check("superposed compatibility", &report.superposed_compat));
            checks.push(max_check("pairwise balance", &report.pairwise));
            checks.push(max_check("n-term balance", &report.n_term));
            if let Some(r) = &report.reduced {
                checks.push(max_check("reduced balance", r));
            }
        }
        Expectation::Violate => {
            let mut violated = |name: &str, s: &CheckStats| {
                checks.push(check(
                    name,
                    s.count > 0 && s.exceeding_fraction() > t.violate_fraction,
                    format!(
                        "{:.2}% of {} values above {:.0e} (need > {:.2}%), median {:.3e}",
                        100.0 * s.exceeding_fraction(),
                        s.count,
                        s.threshold,
                        100.0 * t.violate_fraction,
                        s.median
                    ),
                ))
            };
            violated("superposed field equation violated", &report.superposed_ghe);
            if let Some(r) = &report.reduced {
                violated("reduced balance violated", r);
            }
        }
    }
    report.passed = checks.iter().all(|c| c.passed);
    report.checks = checks;
    report
}

/// Evaluates `points` and summarizes the result.
pub fn verify_theorem(
    evaluator: &PointEvaluator<'_>,
    points: &[Point],
    thresholds: &Thresholds,
    expect: Expectation,
) -> (TheoremReport, Vec<PointRecord>) {
    let records = evaluator.evaluate_all(points);
    (summarize(&records, thresholds, expect), records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{
        build_general_family, build_shock_family, embed_shock_family, GeneralSolutionDef, SharedProfile,
        ShockSolutionDef,
    };
    use crate::smooth::SmoothFn;

    fn profile() -> SharedProfile {
        SharedProfile::new(
            SmoothFn::parse("t", &["t"]).unwrap(),
            SmoothFn::parse("y", &["y"]).unwrap(),
            SmoothFn::parse("z", &["z"]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn spec_invariants() {
        assert_eq!(SuperpositionSpec::new(vec![]), Err(SuperposeError::Empty));
        assert_eq!(SuperpositionSpec::new(vec![0.0, 0.0]), Err(SuperposeError::AllZero));
        assert_eq!(
            SuperpositionSpec::new(vec![1.0, f64::NAN]),
            Err(SuperposeError::NonFinite { index: 1 })
        );
        assert!(SuperpositionSpec::new(vec![0.0, 2.0]).is_ok());
        let parsed: Result<SuperpositionSpec, _> = serde_json::from_str("[0, 0]");
        assert!(parsed.is_err());
    }

    #[test]
    fn superposition_of_two_shock_seeds() {
        let fam = build_shock_family(
            vec![
                ShockSolutionDef::parse("p^2/2", "p", "0", "0").unwrap(),
                ShockSolutionDef::parse("p^2", "0", "0", "0").unwrap(),
            ],
            profile(),
        )
        .unwrap();
        let ev = PointEvaluator::new(
            &fam,
            SuperpositionSpec::new(vec![2.0, -1.0]).unwrap(),
            BranchPolicy::default(),
            1e-3,
            None,
        )
        .unwrap();
        let at = Point::new(1.0, 1.0, 1.0, 1.0);
        let rec = ev.evaluate(&at);
        assert!(rec.admissible());
        assert!((rec.seeds[0].p.value + 0.25).abs() < 1e-15);
        assert!((rec.seeds[1].p.value + 1.0 / 6.0).abs() < 1e-15);
        let sup = rec.superposed.unwrap();
        assert!((sup.p.value + 1.0 / 3.0).abs() < 1e-15);

        let single = superpose(&rec.seeds[..1], &[1.0]).unwrap();
        assert_eq!(single.p, rec.seeds[0].p);
        assert_eq!(single.q, rec.seeds[0].q);
        assert_eq!(single.r, rec.seeds[0].r);

        let projected = superpose(&rec.seeds, &[1.0, 0.0]).unwrap();
        let shared = fam.shared();
        assert_eq!(ghe_residual(&projected, shared).value, ghe_residual(&rec.seeds[0], shared).value);
    }

    #[test]
    fn point_mismatch_is_rejected() {
        let a = FieldSample::zero(Point::new(0.0, 0.0, 0.0, 0.0));
        let b = FieldSample::zero(Point::new(0.0, 1e-12, 0.0, 0.0));
        assert!(matches!(superpose(&[a.clone(), b], &[1.0, 1.0]), Err(SuperposeError::PointMismatch { .. })));
        assert!(matches!(superpose(&[a], &[1.0, 1.0]), Err(SuperposeError::Length { .. })));
    }

    #[test]
    fn theorem_holds_for_shock_family_and_fails_for_unbalanced_pair() {
        let shock = build_shock_family(
            vec![
                ShockSolutionDef::parse("p^2/2 + p^4/12", "p", "y", "z^2").unwrap(),
                ShockSolutionDef::parse("p^3/3 + p^2", "p^3/3 + 2*p", "1", "0").unwrap(),
                ShockSolutionDef::parse("p^2", "p/2 + p^3", "0", "z").unwrap(),
            ],
            profile(),
        )
        .unwrap();
        let embedded = embed_shock_family(&shock).unwrap();
        let ev = PointEvaluator::new(
            &shock,
            SuperpositionSpec::new(vec![1.5, -2.0, 0.7]).unwrap(),
            BranchPolicy::default(),
            1e-3,
            Some(&embedded),
        )
        .unwrap();
        let points: Vec<Point> = (0..50)
            .map(|k| {
                let u = k as f64 / 50.0;
                Point::new(2.0 * u - 1.0, 0.5 + u, 1.5 - u, 0.3 + 0.5 * u)
            })
            .collect();
        let (report, _) = verify_theorem(&ev, &points, &Thresholds::default(), Expectation::Hold);
        assert!(report.passed, "{report:#?}");
        assert!(report.reduced.is_some());

        let general = build_general_family(
            vec![
                GeneralSolutionDef::parse("p^2*y/2", "p^2*z/2", "p*t + p^3/3").unwrap(),
                GeneralSolutionDef::parse("y*p^4/12 + y*p^2/2", "p^2*z/2", "p*(1 + t^2/2)").unwrap(),
            ],
            SharedProfile::constants_only(1.0, -3.0).unwrap(),
        )
        .unwrap();
        let ev = PointEvaluator::new(
            &general,
            SuperpositionSpec::new(vec![1.0, 1.0]).unwrap(),
            BranchPolicy::default(),
            1e-3,
            Some(&general),
        )
        .unwrap();
        let (report, _) = verify_theorem(&ev, &points, &Thresholds::default(), Expectation::Violate);
        assert!(report.passed, "{report:#?}");
        let (report, _) = verify_theorem(&ev, &points, &Thresholds::default(), Expectation::Hold);
        assert!(!report.passed);
    }

    #[test]
    fn holes_are_counted() {
        let fam = build_general_family(
            vec![GeneralSolutionDef::parse("0", "0", "p^2 + 1").unwrap()],
            SharedProfile::constants_only(1.0, 1.0).unwrap(),
        )
        .unwrap();
        let ev = PointEvaluator::new(
            &fam,
            SuperpositionSpec::new(vec![1.0]).unwrap(),
            BranchPolicy::default(),
            1e-3,
            None,
        )
        .unwrap();
        let (report, records) = verify_theorem(
            &ev,
            &[Point::new(1.0, 0.0, 0.0, 0.0), Point::new(-5.0, 0.0, 0.0, 0.0)],
            &Thresholds::default(),
            Expectation::Hold,
        );
        assert_eq!(report.holes, 1);
        assert_eq!(report.admissible, 1);
        assert_eq!(records[0].status, PointStatus::Hole { seed: 0 });
        assert_eq!(records[1].pairs.len(), 0);
        assert_eq!(records[1].n_term.unwrap().value, 0.0);
    }

    #[test]
    fn median_and_fractions() {
        let s = CheckStats::from_values(vec![3.0, 1.0, 2.0, 10.0], 2.5);
        assert_eq!((s.max, s.median, s.exceeding), (10.0, 2.5, 2));
        assert_eq!(s.within_fraction(), 0.5);
        let empty = CheckStats::from_values(vec![], 1.0);
        assert_eq!(empty.within_fraction(), 1.0);
    }
}
