//! Scenario files: JSON documents describing a family, a superposition and
//! a point cloud. Unknown keys are rejected.

use std::path::Path;

use ghe_core::implicit::{PolicyError, SolverTolerances};
use ghe_core::registry::{
    build_general_family, build_shock_family, embed_shock_family, RegistryError, P, T, Y, Z,
};
use ghe_core::sampling::{sample_box, Method, SampleBox, SamplingError};
use ghe_core::superpose::{Expectation, SuperposeError};
use ghe_core::{
    BranchPolicy, GeneralFamily, GeneralSolutionDef, Point, ScanGrid, Selection, SharedProfile, ShockFamily,
    ShockSolutionDef, SmoothFn, SolutionFamily, SuperpositionSpec, Thresholds,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{role}: {source}")]
    Expression {
        role: String,
        source: ghe_core::smooth::SmoothFnError,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Superposition(#[from] SuperposeError),
    #[error("branch: {0}")]
    Policy(#[from] PolicyError),
    #[error("sampling: {0}")]
    Sampling(#[from] SamplingError),
    #[error("sampling: {0}")]
    SamplingSpec(String),
    #[error("tolerances: {0}")]
    Tolerance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default = "zero")]
    pub alpha: String,
    #[serde(default = "zero")]
    pub beta: String,
    #[serde(default = "zero")]
    pub delta: String,
}

fn zero() -> String {
    "0".into()
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            alpha: zero(),
            beta: zero(),
            delta: zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSeedSpec {
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: String,
    #[serde(default = "zero")]
    pub m: String,
    #[serde(default = "zero")]
    pub n: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSeedSpec {
    #[serde(rename = "Q")]
    pub q: String,
    #[serde(rename = "R")]
    pub r: String,
    #[serde(rename = "T")]
    pub t: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Shock { seeds: Vec<ShockSeedSpec> },
    General { seeds: Vec<GeneralSeedSpec> },
}

impl FamilySpec {
    pub fn len(&self) -> usize {
        match self {
            FamilySpec::Shock { seeds } => seeds.len(),
            FamilySpec::General { seeds } => seeds.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(rename = "box")]
    pub bounds: Option<SampleBox>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub method: Method,
    /// Explicit points `[x, y, z, t]`; exclusive with `box`.
    pub points: Option<Vec<[f64; 4]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchSpec {
    pub interval: [f64; 2],
    pub nodes: usize,
    pub select: Selection,
}

impl Default for BranchSpec {
    fn default() -> Self {
        let g = ScanGrid::default();
        BranchSpec {
            interval: [g.lo, g.hi],
            nodes: g.nodes,
            select: Selection::default(),
        }
    }
}

/// Every tolerance in one flat table; all optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub seed: f64,
    pub superposed: f64,
    pub hold_fraction: f64,
    pub balance: f64,
    pub expansion: f64,
    pub violation: f64,
    pub violate_fraction: f64,
    pub fold: f64,
    /// Largest accepted finite-difference deviation.
    pub fd: f64,
    pub root_abs: f64,
    pub root_rel: f64,
    pub degenerate_slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let t = Thresholds::default();
        let s = SolverTolerances::default();
        Tolerances {
            seed: t.seed,
            superposed: t.superposed,
            hold_fraction: t.hold_fraction,
            balance: t.balance,
            expansion: t.expansion,
            violation: t.violation,
            violate_fraction: t.violate_fraction,
            fold: t.fold,
            fd: 1e-6,
            root_abs: s.abs,
            root_rel: s.rel,
            degenerate_slope: s.degenerate_slope,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), ScenarioError> {
        let named = [
            ("seed", self.seed),
            ("superposed", self.superposed),
            ("hold_fraction", self.hold_fraction),
            ("balance", self.balance),
            ("expansion", self.expansion),
            ("violation", self.violation),
            ("violate_fraction", self.violate_fraction),
            ("fold", self.fold),
            ("fd", self.fd),
            ("root_abs", self.root_abs),
            ("root_rel", self.root_rel),
            ("degenerate_slope", self.degenerate_slope),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ScenarioError::Tolerance(format!("`{name}` = {v} must be finite and non-negative")));
            }
        }
        for (name, v) in [("hold_fraction", self.hold_fraction), ("violate_fraction", self.violate_fraction)] {
            if v > 1.0 {
                return Err(ScenarioError::Tolerance(format!("`{name}` = {v} exceeds 1")));
            }
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            seed: self.seed,
            superposed: self.superposed,
            hold_fraction: self.hold_fraction,
            balance: self.balance,
            expansion: self.expansion,
            violation: self.violation,
            violate_fraction: self.violate_fraction,
            fold: self.fold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub constants: Constants,
    #[serde(default)]
    pub profile: Profile,
    pub family: FamilySpec,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub expect: Expectation,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub branch: BranchSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

pub enum Family {
    Shock(ShockFamily),
    General(GeneralFamily),
}

impl Family {
    pub fn as_dyn(&self) -> &dyn SolutionFamily {
        match self {
            Family::Shock(f) => f,
            Family::General(f) => f,
        }
    }
}

/// A validated scenario with everything built.
pub struct Prepared {
    pub scenario: Scenario,
    pub family: Family,
    /// General-form seeds for the reduced balance condition; `None` when a
    /// shock family has non-polynomial `m` or `n`.
    pub reduced: Option<GeneralFamily>,
    pub spec: SuperpositionSpec,
    pub policy: BranchPolicy,
    pub tolerances: Tolerances,
    pub points: Vec<Point>,
}

impl Prepared {
    pub fn family(&self) -> &dyn SolutionFamily {
        self.family.as_dyn()
    }

    pub fn reduced(&self) -> Option<&GeneralFamily> {
        match &self.family {
            Family::General(g) => Some(g),
            Family::Shock(_) => self.reduced.as_ref(),
        }
    }
}

fn smooth(role: String, src: &str, vars: &[&str]) -> Result<SmoothFn, ScenarioError> {
    SmoothFn::parse(src, vars).map_err(|source| ScenarioError::Expression { role, source })
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text)
    }

    pub fn prepare(self, overrides: &Overrides) -> Result<Prepared, ScenarioError> {
        let mut tolerances = self.tolerances;
        if let Some(tol) = overrides.tol {
            tolerances.superposed = tol;
            tolerances.balance = tol;
            tolerances.fd = tol;
        }
        tolerances.validate()?;

        let shared = SharedProfile::new(
            smooth("profile.alpha".into(), &self.profile.alpha, &[T])?,
            smooth("profile.beta".into(), &self.profile.beta, &[Y])?,
            smooth("profile.delta".into(), &self.profile.delta, &[Z])?,
            self.constants.a,
            self.constants.b,
        )?;
        let role = |i: usize, name: &str| format!("family.seeds[{i}].{name}");
        let (family, reduced) = match &self.family {
            FamilySpec::Shock { seeds } => {
                let defs = seeds
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        Ok(ShockSolutionDef {
                            f: smooth(role(i, "F"), &s.f, &[P])?,
                            g: smooth(role(i, "G"), &s.g, &[P])?,
                            m: smooth(role(i, "m"), &s.m, &[Y])?,
                            n: smooth(role(i, "n"), &s.n, &[Z])?,
                        })
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?;
                let family = build_shock_family(defs, shared)?;
                let reduced = embed_shock_family(&family).ok();
                (Family::Shock(family), reduced)
            }
            FamilySpec::General { seeds } => {
                let defs = seeds
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        Ok(GeneralSolutionDef {
                            q: smooth(role(i, "Q"), &s.q, &[P, Y])?,
                            r: smooth(role(i, "R"), &s.r, &[P, Z])?,
                            t: smooth(role(i, "T"), &s.t, &[P, T])?,
                        })
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?;
                (Family::General(build_general_family(defs, shared)?), None)
            }
        };

        let spec = SuperpositionSpec::new(self.coefficients.clone())?;
        if spec.len() != family.as_dyn().len() {
            return Err(SuperposeError::Length {
                expected: family.as_dyn().len(),
                got: spec.len(),
            }
            .into());
        }

        let [lo, hi] = self.branch.interval;
        let mut policy = BranchPolicy::new(lo, hi, self.branch.nodes)?.with_selection(self.branch.select);
        policy.tolerances = SolverTolerances {
            abs: tolerances.root_abs,
            rel: tolerances.root_rel,
            degenerate_slope: tolerances.degenerate_slope,
            ..policy.tolerances
        };

        let points = self.sampling.points(overrides)?;
        Ok(Prepared {
            scenario: self,
            family,
            reduced,
            spec,
            policy,
            tolerances,
            points,
        })
    }
}

impl SamplingSpec {
    pub const DEFAULT_COUNT: usize = 1000;

    pub fn points(&self, overrides: &Overrides) -> Result<Vec<Point>, ScenarioError> {
        match (&self.bounds, &self.points) {
            (Some(bx), None) => {
                let count = overrides.points.or(self.count).unwrap_or(Self::DEFAULT_COUNT);
                let seed = overrides.seed.or(self.seed).unwrap_or(0);
                Ok(sample_box(bx, count, seed, self.method)?)
            }
            (None, Some(points)) => {
                if self.count.is_some() || self.seed.is_some() || overrides.points.is_some() {
                    return Err(ScenarioError::SamplingSpec(
                        "`count` and `seed` apply to `box` sampling, not to explicit `points`".into(),
                    ));
                }
                if points.is_empty() {
                    return Err(SamplingError::Count.into());
                }
                if let Some(bad) = points.iter().find(|p| p.iter().any(|c| !c.is_finite())) {
                    return Err(ScenarioError::SamplingSpec(format!("point {bad:?} is not finite")));
                }
                Ok(points.iter().map(|&c| Point::from_array(c)).collect())
            }
            _ => Err(ScenarioError::SamplingSpec("give exactly one of `box` or `points`".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "constants": {"a": 1, "b": 1},
        "profile": {"alpha": "t", "beta": "y", "delta": "z"},
        "family": {"kind": "shock", "seeds": [{"F": "p^2/2", "G": "p"}]},
        "coefficients": [1],
        "sampling": {"points": [[1, 1, 1, 1]]}
    }"#;

    #[test]
    fn minimal_scenario_uses_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.expect, Expectation::Hold);
        assert_eq!(s.branch, BranchSpec::default());
        let p = s.prepare(&Overrides::default()).unwrap();
        assert_eq!(p.points, vec![Point::new(1.0, 1.0, 1.0, 1.0)]);
        assert_eq!(p.policy.scan, ScanGrid::default());
        assert!(p.reduced().is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"coefficients\"", "\"colour\": 1, \"coefficients\"");
        assert!(matches!(Scenario::from_json(&text), Err(ScenarioError::Json(_))));
        let text = MINIMAL.replace("\"G\": \"p\"", "\"G\": \"p\", \"H\": \"0\"");
        assert!(Scenario::from_json(&text).is_err());
        let text = MINIMAL.replace("\"kind\": \"shock\"", "\"kind\": \"wave\"");
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn malformed_expression_reports_location() {
        let text = MINIMAL.replace("p^2/2", "p +* 2");
        let err = Scenario::from_json(&text)
            .unwrap()
            .prepare(&Overrides::default())
            .err()
            .unwrap();
        assert_eq!(err.to_string(), "family.seeds[0].F: syntax error at byte 3: expected operand, found `*`");
    }

    #[test]
    fn validation_errors() {
        let prepare = |text: &str| Scenario::from_json(text).unwrap().prepare(&Overrides::default()).err();
        assert!(matches!(
            prepare(&MINIMAL.replace("[1],", "[1, 2],")),
            Some(ScenarioError::Superposition(SuperposeError::Length { .. }))
        ));
        assert!(matches!(
            prepare(&MINIMAL.replace("[1],", "[0],")),
            Some(ScenarioError::Superposition(SuperposeError::AllZero))
        ));
        assert!(matches!(
            prepare(&MINIMAL.replace("\"seeds\": [{\"F\": \"p^2/2\", \"G\": \"p\"}]", "\"seeds\": []")),
            Some(ScenarioError::Registry(RegistryError::EmptyFamily) | ScenarioError::Superposition(_))
        ));
        assert!(matches!(
            prepare(&MINIMAL.replace("\"b\": 1", "\"b\": 1}, \"branch\": {\"nodes\": 4")),
            Some(ScenarioError::Policy(_))
        ));
        let empty_box = MINIMAL.replace(
            "\"points\": [[1, 1, 1, 1]]",
            "\"box\": {\"x\": [0, 0], \"y\": [1, 1], \"z\": [1, 1], \"t\": [0, 0]}",
        );
        assert!(matches!(prepare(&empty_box), Some(ScenarioError::Sampling(SamplingError::Empty))));
        assert!(matches!(
            prepare(&MINIMAL.replace("\"alpha\": \"t\"", "\"alpha\": \"y\"")),
            Some(ScenarioError::Expression { .. })
        ));
    }

    #[test]
    fn overrides_apply() {
        let text = MINIMAL.replace(
            "\"points\": [[1, 1, 1, 1]]",
            "\"box\": {\"x\": [-1, 1], \"y\": [0.5, 1.5], \"z\": [0.5, 1.5], \"t\": [0, 1]}, \"count\": 10",
        );
        let p = Scenario::from_json(&text)
            .unwrap()
            .prepare(&Overrides {
                points: Some(25),
                seed: Some(3),
                tol: Some(1e-7),
            })
            .unwrap();
        assert_eq!(p.points.len(), 25);
        assert_eq!(p.tolerances.superposed, 1e-7);
        assert_eq!(p.tolerances.fd, 1e-7);
        let err = Scenario::from_json(MINIMAL).unwrap().prepare(&Overrides {
            points: Some(5),
            ..Overrides::default()
        });
        assert!(matches!(err, Err(ScenarioError::SamplingSpec(_))));
    }
}
