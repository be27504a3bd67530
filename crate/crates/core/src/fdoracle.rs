//! Finite-difference derivatives used to check the closed-form partials.
//!
//! Fields are re-solved at every stencil point with the root search seeded
//! from the sample's own root, so the stencil stays on one sheet of a
//! multivalued solution.

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{FieldSample, FIELDS};
use crate::implicit::{solve_near, BranchPolicy, ImplicitRelation};
use crate::point::{Axis, Point};
use crate::registry::SolutionFamily;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("step {0} is not a positive finite number")]
    Step(f64),
    #[error("field cannot be evaluated at {axis} offset {offset:e}")]
    Hole { axis: Axis, offset: f64 },
}

/// Richardson-extrapolated central difference
/// `(8(f(+h) - f(-h)) - (f(+2h) - f(-2h))) / 12h` along `axis`.
pub fn fd_partial(
    field: impl Fn(&Point) -> Option<f64>,
    at: &Point,
    axis: Axis,
    h: f64,
) -> Result<f64, FdError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FdError::Step(h));
    }
    let f = |k: f64| {
        field(&at.shifted(axis, k * h)).ok_or(FdError::Hole {
            axis,
            offset: k * h,
        })
    };
    Ok(richardson([f(1.0)?, f(-1.0)?, f(2.0)?, f(-2.0)?], h))
}

/// The stencil combination for values at offsets `[+h, -h, +2h, -2h]`.
pub fn richardson([p1, m1, p2, m2]: [f64; 4], h: f64) -> f64 {
    (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
}

/// Default step `1e-3 (1 + |c|)` for coordinate value `c`.
pub fn default_step(coordinate: f64) -> f64 {
    1e-3 * (1.0 + coordinate.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdOptions {
    /// Samples with `|D|` below this are skipped.
    pub fold: f64,
    /// Largest fraction of the estimated distance to the nearest fold, in
    /// units of `p`, that one step may move the root.
    pub fold_fraction: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            fold: 1e-3,
            fold_fraction: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertStatus {
    Certified,
    NearFold { slope: f64 },
    Hole { axis: Axis, offset: f64 },
    /// The sample carries no root slope (a composite) or the relation failed at the root.
    Unsupported { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub point: Point,
    pub status: CertStatus,
    /// `|analytic - fd| / (1 + |analytic|)` for the twelve partials, in
    /// [`FieldSample::partials`] order; empty unless certified.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// `(field, axis)` of the largest deviation.
    pub worst: Option<(String, Axis)>,
    pub steps: [f64; 4],
}

impl CertReport {
    fn skipped(s: &FieldSample, status: CertStatus) -> CertReport {
        CertReport {
            point: s.point,
            status,
            deviations: Vec::new(),
            max_deviation: 0.0,
            worst: None,
            steps: [0.0; 4],
        }
    }

    pub fn certified(&self) -> bool {
        self.status == CertStatus::Certified
    }
}

/// Smallest `u > 0` with `d = c u + k u^2 / 2`, infinite if `c = k = 0`.
fn fold_distance(d: f64, c: f64, k: f64) -> f64 {
    if k > 0.0 {
        2.0 * d / (c + (c * c + 2.0 * k * d).sqrt())
    } else if c > 0.0 {
        d / c
    } else {
        f64::INFINITY
    }
}

/// Deviation of an analytic value from its finite-difference estimate.
pub fn deviation(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / (1.0 + analytic.abs())
}

/// Compares the twelve closed-form partials of seed `seed` against finite
/// differences of the re-solved branch through `s.p`.
pub fn certify_sample(
    family: &dyn SolutionFamily,
    seed: usize,
    rel: &dyn ImplicitRelation,
    s: &FieldSample,
    policy: &BranchPolicy,
    opts: &FdOptions,
) -> CertReport {
    let Some(slope) = s.slope else {
        return CertReport::skipped(
            s,
            CertStatus::Unsupported {
                message: "composite sample".into(),
            },
        );
    };
    if slope.abs() < opts.fold {
        return CertReport::skipped(s, CertStatus::NearFold { slope });
    }
    let jet = match rel.jet(s.p.value, &s.point) {
        Ok(j) => j,
        Err(e) => {
            return CertReport::skipped(
                s,
                CertStatus::Unsupported {
                    message: e.to_string(),
                },
            )
        }
    };

    // Distance in p to where D vanishes, from a quadratic model of D with the
    // third p-derivative taken by differencing the curvature; moving along an
    // axis shifts p at rate |p_a|.
    let dp = 1e-4 * (1.0 + s.p.value.abs());
    let third = match (rel.jet(s.p.value + dp, &s.point), rel.jet(s.p.value - dp, &s.point)) {
        (Ok(hi), Ok(lo)) => (hi.curvature - lo.curvature) / (2.0 * dp),
        _ => 0.0,
    };
    let fold_distance = fold_distance(slope.abs(), jet.curvature.abs(), third.abs());
    let steps = Axis::ALL.map(|axis| {
        let h = default_step(s.point.get(axis));
        let rate = s.p.grad[axis.index()].abs();
        if rate > 0.0 {
            h.min(opts.fold_fraction * fold_distance / rate)
        } else {
            h
        }
    });

    let fields = |at: &Point| -> Option<[f64; 3]> {
        let (c, c0) = (at.coords(), s.point.coords());
        let guess = s.p.value + (0..4).map(|k| s.p.grad[k] * (c[k] - c0[k])).sum::<f64>();
        let root = solve_near(rel, at, guess, policy)?;
        let (q, r) = family.qr(seed, at, root.root).ok()?;
        Some([root.root, q, r])
    };

    let analytic = s.partials();
    let mut deviations = vec![0.0; 12];
    for axis in Axis::ALL {
        let h = steps[axis.index()];
        // One solve per stencil point serves all three fields.
        let mut stencil = [[0.0; 3]; 4];
        for (slot, k) in stencil.iter_mut().zip([1.0, -1.0, 2.0, -2.0]) {
            let offset = k * h;
            match fields(&s.point.shifted(axis, offset)) {
                Some(v) => *slot = v,
                None => return CertReport::skipped(s, CertStatus::Hole { axis, offset }),
            }
        }
        for f in 0..3 {
            let fd = richardson(stencil.map(|v| v[f]), h);
            let idx = 4 * f + axis.index();
            deviations[idx] = deviation(analytic[idx], fd);
        }
    }
    let (worst_idx, max_deviation) = deviations
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("twelve partials");
    CertReport {
        point: s.point,
        status: CertStatus::Certified,
        deviations,
        max_deviation,
        worst: Some((FIELDS[worst_idx / 4].to_string(), Axis::ALL[worst_idx % 4])),
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::implicit::enumerate_roots;
    use crate::registry::{
        build_general_family, build_shock_family, GeneralSolutionDef, SharedProfile, ShockSolutionDef,
    };
    use crate::smooth::SmoothFn;

    #[test]
    fn polynomial_and_constant_fields() {
        let at = Point::new(3.0, 0.0, 0.0, 0.0);
        let d = fd_partial(|p| Some(p.x * p.x), &at, Axis::X, 1e-3).unwrap();
        assert!((d - 6.0).abs() < 1e-9);
        let d = fd_partial(|_| Some(4.2), &at, Axis::T, 1e-3).unwrap();
        assert!(d.abs() < 1e-12);
        assert_eq!(fd_partial(|_| Some(0.0), &at, Axis::X, 0.0), Err(FdError::Step(0.0)));
        assert!(matches!(
            fd_partial(|p| (p.y < 0.0015).then_some(1.0), &at, Axis::Y, 1e-3),
            Err(FdError::Hole { axis: Axis::Y, .. })
        ));
    }

    #[test]
    fn stencil_is_fourth_order() {
        let x = 0.7;
        let err = |h: f64| {
            let at = Point::new(x, 0.0, 0.0, 0.0);
            (fd_partial(|p| Some(p.x.sin()), &at, Axis::X, h).unwrap() - x.cos()).abs()
        };
        let ratio = err(1e-1) / err(1e-2);
        assert!((5e3..=2e4).contains(&ratio), "ratio {ratio}");
    }

    fn shock() -> crate::registry::ShockFamily {
        let shared = SharedProfile::new(
            SmoothFn::parse("t + sin(t)/2", &["t"]).unwrap(),
            SmoothFn::parse("y", &["y"]).unwrap(),
            SmoothFn::parse("z^2/2", &["z"]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        build_shock_family(
            vec![
                ShockSolutionDef::parse("p^2/2", "p", "0", "0").unwrap(),
                ShockSolutionDef::parse("p^4/12 - p^2/2", "p^3/3 + p", "y^2", "z").unwrap(),
            ],
            shared,
        )
        .unwrap()
    }

    #[test]
    fn shock_branch_slope_matches_closed_form() {
        let fam = shock();
        let policy = BranchPolicy::default();
        let rel = fam.relation(0, &policy.scan);
        let at = Point::new(1.0, 1.0, 1.0, 1.0);
        let p = |pt: &Point| enumerate_roots(&*rel, pt, &policy).first().map(|r| r.root);
        let fd = fd_partial(p, &at, Axis::X, default_step(at.x)).unwrap();
        let s = fam.field_sample(0, &at, p(&at).unwrap(), 1e-8).unwrap();
        assert!(deviation(-1.0 / s.slope.unwrap(), fd) <= 1e-6);
    }

    #[test]
    fn certification_of_shock_and_general_samples() {
        let fam = shock();
        let policy = BranchPolicy::default();
        let opts = FdOptions::default();
        for at in [Point::new(0.3, 0.9, 1.1, 0.4), Point::new(-0.8, 1.4, 0.6, 0.2)] {
            for i in 0..2 {
                let rel = fam.relation(i, &policy.scan);
                for root in enumerate_roots(&*rel, &at, &policy) {
                    let s = fam.field_sample(i, &at, root.root, 1e-8).unwrap();
                    let c = certify_sample(&fam, i, &*rel, &s, &policy, &opts);
                    if s.slope.unwrap().abs() < opts.fold {
                        assert!(matches!(c.status, CertStatus::NearFold { .. }));
                    } else {
                        assert!(c.certified() && c.max_deviation <= 1e-6, "{c:?}");
                    }
                }
            }
        }

        let general = build_general_family(
            vec![GeneralSolutionDef::parse("p^2*y/2 + sin(p)*y^2", "p^3*z/6 + exp(z)", "p*t + p^3/3").unwrap()],
            SharedProfile::constants_only(1.0, 2.0).unwrap(),
        )
        .unwrap();
        let rel = general.relation(0, &policy.scan);
        let at = Point::new(0.4, 1.1, 0.9, 0.3);
        let root = enumerate_roots(&*rel, &at, &policy)[0].root;
        let s = general.field_sample(0, &at, root, 1e-8).unwrap();
        let c = certify_sample(&general, 0, &*rel, &s, &policy, &opts);
        assert!(c.certified() && c.max_deviation <= 1e-6, "{c:?}");
    }

    #[test]
    fn near_fold_is_skipped() {
        // D = p² - 1e-4, so the root p = 0 at the origin sits next to a fold.
        let fam = build_general_family(
            vec![GeneralSolutionDef::parse("0", "0", "p^3/3 - 0.0001*p").unwrap()],
            SharedProfile::constants_only(1.0, 1.0).unwrap(),
        )
        .unwrap();
        let policy = BranchPolicy::default();
        let rel = fam.relation(0, &policy.scan);
        let s = fam.field_sample(0, &Point::default(), 0.0, 1e-8).unwrap();
        assert!((s.slope.unwrap() + 1e-4).abs() < 1e-18);
        let c = certify_sample(&fam, 0, &*rel, &s, &policy, &FdOptions::default());
        assert!(matches!(c.status, CertStatus::NearFold { .. }));
    }

    #[test]
    fn zero_field_has_zero_deviation() {
        // Φ = x + p: p = -x, q = r = 0.
        let fam = build_general_family(
            vec![GeneralSolutionDef::parse("0", "0", "p").unwrap()],
            SharedProfile::constants_only(1.0, 1.0).unwrap(),
        )
        .unwrap();
        let policy = BranchPolicy::default();
        let rel = fam.relation(0, &policy.scan);
        let at = Point::new(0.0, 0.3, 0.1, 0.2);
        let s = fam.field_sample(0, &at, 0.0, 1e-8).unwrap();
        let c = certify_sample(&fam, 0, &*rel, &s, &policy, &FdOptions::default());
        assert!(c.certified());
        for (k, d) in c.deviations.iter().enumerate() {
            if k != 0 {
                assert_eq!(*d, 0.0, "partial {k}");
            }
        }
        assert!(c.deviations[0] < 1e-12);
    }
}
