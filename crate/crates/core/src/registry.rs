//! Solution-family definitions built from user-supplied smooth functions.
//!
//! Variable conventions are fixed: the field variable is `p` and the
//! spacetime coordinates are `x`, `y`, `z`, `t`. Shock seeds use `F(p)`,
//! `G(p)`, `m(y)`, `n(z)` with a shared profile `α(t)`, `β(y)`, `δ(z)`;
//! general seeds use `Q(p, y)`, `R(p, z)`, `T(p, t)`.

use thiserror::Error;

use crate::calculus::{self, CalculusError, FieldSample};
use crate::expr::{add, antiderivative, mul, EvalError, Expr};
use crate::implicit::{ImplicitRelation, PhiEval, PhiJet, ScanGrid};
use crate::point::Point;
use crate::smooth::SmoothFn;

pub const P: &str = "p";
pub const Y: &str = "y";
pub const Z: &str = "z";
pub const T: &str = "t";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("empty family")]
    EmptyFamily,
    #[error("variable convention: `{role}` must be a function of ({expected}), found ({found})")]
    VariableConvention {
        role: String,
        expected: String,
        found: String,
    },
    #[error("equation constants a = {a}, b = {b} are invalid (both zero or not finite)")]
    Constants { a: f64, b: f64 },
    #[error("`{role}` cannot be evaluated at any probe point: {source}")]
    Probe { role: String, source: EvalError },
    #[error("`{role}` = {expr} has no polynomial antiderivative")]
    NotPolynomial { role: String, expr: String },
}

fn check_vars(role: &str, f: &SmoothFn, expected: &[&str]) -> Result<(), RegistryError> {
    let found: Vec<&str> = f.variables().collect();
    if found != expected {
        return Err(RegistryError::VariableConvention {
            role: role.to_string(),
            expected: expected.join(", "),
            found: found.join(", "),
        });
    }
    Ok(())
}

// Fails only when every probe point is outside the function's domain.
fn probe(role: &str, f: &SmoothFn, orders: &[(usize, usize)]) -> Result<(), RegistryError> {
    const PROBES: [f64; 4] = [0.37, 1.13, 2.71, -0.59];
    for &(di, dj) in orders {
        let mut last = None;
        let ok = PROBES.iter().any(|&u| {
            let args = [u, 0.5 * u + 0.29];
            match f.eval_partial(di, dj, &args[..f.arity()]) {
                Ok(_) => true,
                Err(e) => {
                    last = Some(e);
                    false
                }
            }
        });
        if !ok {
            return Err(RegistryError::Probe {
                role: role.to_string(),
                source: last.expect("at least one probe"),
            });
        }
    }
    Ok(())
}

/// Functions and constants shared by every seed of a family.
#[derive(Debug, Clone)]
pub struct SharedProfile {
    pub alpha: SmoothFn,
    pub beta: SmoothFn,
    pub delta: SmoothFn,
    a: f64,
    b: f64,
}

impl SharedProfile {
    pub fn new(
        alpha: SmoothFn,
        beta: SmoothFn,
        delta: SmoothFn,
        a: f64,
        b: f64,
    ) -> Result<SharedProfile, RegistryError> {
        check_vars("alpha", &alpha, &[T])?;
        check_vars("beta", &beta, &[Y])?;
        check_vars("delta", &delta, &[Z])?;
        if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
            return Err(RegistryError::Constants { a, b });
        }
        Ok(SharedProfile {
            alpha,
            beta,
            delta,
            a,
            b,
        })
    }

    /// Profile with `α = β = δ = 0`, for families that do not use it.
    pub fn constants_only(a: f64, b: f64) -> Result<SharedProfile, RegistryError> {
        let zero = |v: &str| SmoothFn::new(Expr::Const(0.0), &[v]).expect("constant");
        SharedProfile::new(zero(T), zero(Y), zero(Z), a, b)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `c = -a - b`; never stored.
    pub fn c(&self) -> f64 {
        -self.a - self.b
    }
}

#[derive(Debug, Clone)]
pub struct ShockSolutionDef {
    pub f: SmoothFn,
    pub g: SmoothFn,
    pub m: SmoothFn,
    pub n: SmoothFn,
}

impl ShockSolutionDef {
    pub fn parse(f: &str, g: &str, m: &str, n: &str) -> Result<Self, crate::smooth::SmoothFnError> {
        Ok(ShockSolutionDef {
            f: SmoothFn::parse(f, &[P])?,
            g: SmoothFn::parse(g, &[P])?,
            m: SmoothFn::parse(m, &[Y])?,
            n: SmoothFn::parse(n, &[Z])?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GeneralSolutionDef {
    pub q: SmoothFn,
    pub r: SmoothFn,
    pub t: SmoothFn,
}

impl GeneralSolutionDef {
    pub fn parse(q: &str, r: &str, t: &str) -> Result<Self, crate::smooth::SmoothFnError> {
        Ok(GeneralSolutionDef {
            q: SmoothFn::parse(q, &[P, Y])?,
            r: SmoothFn::parse(r, &[P, Z])?,
            t: SmoothFn::parse(t, &[P, T])?,
        })
    }
}

/// Shared profile with the derivatives the engine evaluates.
#[derive(Debug, Clone)]
pub(crate) struct ProfileDerivs {
    pub alpha: SmoothFn,
    pub alpha_1: SmoothFn,
    pub beta: SmoothFn,
    pub beta_1: SmoothFn,
    pub beta_2: SmoothFn,
    pub delta: SmoothFn,
    pub delta_1: SmoothFn,
    pub delta_2: SmoothFn,
}

impl ProfileDerivs {
    fn new(shared: &SharedProfile) -> Result<ProfileDerivs, RegistryError> {
        probe("alpha", &shared.alpha, &[(0, 0), (1, 0)])?;
        probe("beta", &shared.beta, &[(0, 0), (1, 0), (2, 0)])?;
        probe("delta", &shared.delta, &[(0, 0), (1, 0), (2, 0)])?;
        Ok(ProfileDerivs {
            alpha: shared.alpha.clone(),
            alpha_1: shared.alpha.derivative(1, 0),
            beta: shared.beta.clone(),
            beta_1: shared.beta.derivative(1, 0),
            beta_2: shared.beta.derivative(2, 0),
            delta: shared.delta.clone(),
            delta_1: shared.delta.derivative(1, 0),
            delta_2: shared.delta.derivative(2, 0),
        })
    }
}

/// One shock seed with every derivative it needs, precomputed.
#[derive(Debug, Clone)]
pub struct ShockSeed {
    pub def: ShockSolutionDef,
    pub(crate) f_1: SmoothFn,
    pub(crate) f_2: SmoothFn,
    pub(crate) f_3: SmoothFn,
    pub(crate) g_1: SmoothFn,
    pub(crate) g_2: SmoothFn,
    pub(crate) m_1: SmoothFn,
    pub(crate) n_1: SmoothFn,
}

impl ShockSeed {
    fn new(index: usize, def: ShockSolutionDef) -> Result<ShockSeed, RegistryError> {
        let role = |name: &str| format!("seeds[{index}].{name}");
        check_vars(&role("F"), &def.f, &[P])?;
        check_vars(&role("G"), &def.g, &[P])?;
        check_vars(&role("m"), &def.m, &[Y])?;
        check_vars(&role("n"), &def.n, &[Z])?;
        probe(&role("F"), &def.f, &[(0, 0), (1, 0), (2, 0)])?;
        probe(&role("G"), &def.g, &[(0, 0), (1, 0)])?;
        probe(&role("m"), &def.m, &[(0, 0), (1, 0)])?;
        probe(&role("n"), &def.n, &[(0, 0), (1, 0)])?;
        Ok(ShockSeed {
            f_1: def.f.derivative(1, 0),
            f_2: def.f.derivative(2, 0),
            f_3: def.f.derivative(3, 0),
            g_1: def.g.derivative(1, 0),
            g_2: def.g.derivative(2, 0),
            m_1: def.m.derivative(1, 0),
            n_1: def.n.derivative(1, 0),
            def,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GeneralSeed {
    pub def: GeneralSolutionDef,
    pub(crate) q_1: SmoothFn,
    pub(crate) q_2: SmoothFn,
    pub(crate) q_11: SmoothFn,
    pub(crate) q_12: SmoothFn,
    pub(crate) q_22: SmoothFn,
    pub(crate) q_111: SmoothFn,
    pub(crate) r_1: SmoothFn,
    pub(crate) r_2: SmoothFn,
    pub(crate) r_11: SmoothFn,
    pub(crate) r_12: SmoothFn,
    pub(crate) r_22: SmoothFn,
    pub(crate) r_111: SmoothFn,
    pub(crate) t_1: SmoothFn,
    pub(crate) t_2: SmoothFn,
    pub(crate) t_11: SmoothFn,
}

impl GeneralSeed {
    fn new(index: usize, def: GeneralSolutionDef) -> Result<GeneralSeed, RegistryError> {
        let role = |name: &str| format!("seeds[{index}].{name}");
        check_vars(&role("Q"), &def.q, &[P, Y])?;
        check_vars(&role("R"), &def.r, &[P, Z])?;
        check_vars(&role("T"), &def.t, &[P, T])?;
        probe(&role("Q"), &def.q, &[(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])?;
        probe(&role("R"), &def.r, &[(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])?;
        probe(&role("T"), &def.t, &[(0, 0), (1, 0), (0, 1)])?;
        Ok(GeneralSeed {
            q_1: def.q.derivative(1, 0),
            q_2: def.q.derivative(0, 1),
            q_11: def.q.derivative(2, 0),
            q_12: def.q.derivative(1, 1),
            q_22: def.q.derivative(0, 2),
            q_111: def.q.derivative(3, 0),
            r_1: def.r.derivative(1, 0),
            r_2: def.r.derivative(0, 1),
            r_11: def.r.derivative(2, 0),
            r_12: def.r.derivative(1, 1),
            r_22: def.r.derivative(0, 2),
            r_111: def.r.derivative(3, 0),
            t_1: def.t.derivative(1, 0),
            t_2: def.t.derivative(0, 1),
            t_11: def.t.derivative(2, 0),
            def,
        })
    }

    /// `(∂₁₂Q(p, y), ∂₁₂R(p, z), ∂₂T(p, t))`, the inputs of the reduced balance condition.
    pub fn mixed_partials(&self, p: f64, at: &Point) -> Result<(f64, f64, f64), EvalError> {
        Ok((
            self.q_12.eval(&[p, at.y])?,
            self.r_12.eval(&[p, at.z])?,
            self.t_2.eval(&[p, at.t])?,
        ))
    }
}

/// A family of seed solutions, each defined through an implicit relation for `p`.
pub trait SolutionFamily: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn shared(&self) -> &SharedProfile;

    /// Implicit relation of seed `i`; `grid` lets implementations tabulate `p`-only terms.
    fn relation(&self, i: usize, grid: &ScanGrid) -> Box<dyn ImplicitRelation + '_>;

    /// Closed-form `(p, q, r)` and first derivatives of seed `i` on the root `p`.
    fn field_sample(&self, i: usize, at: &Point, p: f64, degenerate_slope: f64)
        -> Result<FieldSample, CalculusError>;

    /// `(q, r)` of seed `i` at `at` given the branch value `p`.
    fn qr(&self, i: usize, at: &Point, p: f64) -> Result<(f64, f64), EvalError>;
}

#[derive(Debug, Clone)]
pub struct ShockFamily {
    shared: SharedProfile,
    pub(crate) profile: ProfileDerivs,
    seeds: Vec<ShockSeed>,
}

pub fn build_shock_family(
    defs: Vec<ShockSolutionDef>,
    shared: SharedProfile,
) -> Result<ShockFamily, RegistryError> {
    if defs.is_empty() {
        return Err(RegistryError::EmptyFamily);
    }
    let profile = ProfileDerivs::new(&shared)?;
    let seeds = defs
        .into_iter()
        .enumerate()
        .map(|(i, d)| ShockSeed::new(i, d))
        .collect::<Result<_, _>>()?;
    Ok(ShockFamily {
        shared,
        profile,
        seeds,
    })
}

impl ShockFamily {
    pub fn seeds(&self) -> &[ShockSeed] {
        &self.seeds
    }

    pub fn shock_relation(&self, i: usize, grid: &ScanGrid) -> ShockRelation<'_> {
        ShockRelation::new(&self.seeds[i], &self.profile, grid)
    }
}

impl SolutionFamily for ShockFamily {
    fn len(&self) -> usize {
        self.seeds.len()
    }

    fn shared(&self) -> &SharedProfile {
        &self.shared
    }

    fn relation(&self, i: usize, grid: &ScanGrid) -> Box<dyn ImplicitRelation + '_> {
        Box::new(self.shock_relation(i, grid))
    }

    fn field_sample(
        &self,
        i: usize,
        at: &Point,
        p: f64,
        degenerate_slope: f64,
    ) -> Result<FieldSample, CalculusError> {
        let mut s = calculus::shock_derivatives(&self.seeds[i], &self.profile, at, p, degenerate_slope)?;
        s.source = calculus::Source::Seed(i);
        Ok(s)
    }

    fn qr(&self, i: usize, at: &Point, p: f64) -> Result<(f64, f64), EvalError> {
        let seed = &self.seeds[i];
        let f = seed.def.f.eval(&[p])?;
        let q = seed.def.m.eval(&[at.y])? + self.profile.beta_1.eval(&[at.y])? * f;
        let r = seed.def.n.eval(&[at.z])? + self.profile.delta_1.eval(&[at.z])? * f;
        Ok((q, r))
    }
}

/// `Φ = x + (α + β + δ) F'(p) + G(p)`, `D = (α + β + δ) F''(p) + G'(p)`.
///
/// `F'` and `G` are tabulated once on the scan grid, so a scan costs one
/// multiply-add per node.
pub struct ShockRelation<'a> {
    seed: &'a ShockSeed,
    profile: &'a ProfileDerivs,
    grid: ScanGrid,
    table: Vec<Option<(f64, f64)>>,
}

impl<'a> ShockRelation<'a> {
    fn new(seed: &'a ShockSeed, profile: &'a ProfileDerivs, grid: &ScanGrid) -> Self {
        let table = grid
            .nodes()
            .map(|p| Some((seed.f_1.eval(&[p]).ok()?, seed.def.g.eval(&[p]).ok()?)))
            .collect();
        ShockRelation {
            seed,
            profile,
            grid: *grid,
            table,
        }
    }

    fn speed(&self, at: &Point) -> Result<f64, EvalError> {
        Ok(self.profile.alpha.eval(&[at.t])?
            + self.profile.beta.eval(&[at.y])?
            + self.profile.delta.eval(&[at.z])?)
    }
}

impl ImplicitRelation for ShockRelation<'_> {
    fn eval(&self, p: f64, at: &Point) -> Result<PhiEval, EvalError> {
        let s = self.speed(at)?;
        let f1 = self.seed.f_1.eval(&[p])?;
        let g = self.seed.def.g.eval(&[p])?;
        let slope = s * self.seed.f_2.eval(&[p])? + self.seed.g_1.eval(&[p])?;
        Ok(PhiEval {
            value: at.x + s * f1 + g,
            slope,
            scale: at.x.abs().max((s * f1).abs()).max(g.abs()),
        })
    }

    fn jet(&self, p: f64, at: &Point) -> Result<PhiJet, EvalError> {
        let e = self.eval(p, at)?;
        let s = self.speed(at)?;
        let f1 = self.seed.f_1.eval(&[p])?;
        let curvature = s * self.seed.f_3.eval(&[p])? + self.seed.g_2.eval(&[p])?;
        Ok(PhiJet {
            value: e.value,
            slope: e.slope,
            curvature,
            gradient: [
                1.0,
                self.profile.beta_1.eval(&[at.y])? * f1,
                self.profile.delta_1.eval(&[at.z])? * f1,
                self.profile.alpha_1.eval(&[at.t])? * f1,
            ],
        })
    }

    fn scan(&self, at: &Point, grid: &ScanGrid) -> Vec<Option<f64>> {
        if *grid != self.grid {
            return grid
                .nodes()
                .map(|p| self.eval(p, at).ok().map(|e| e.value))
                .collect();
        }
        let Ok(s) = self.speed(at) else {
            return vec![None; grid.nodes];
        };
        self.table
            .iter()
            .map(|entry| entry.map(|(f1, g)| at.x + s * f1 + g))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GeneralFamily {
    shared: SharedProfile,
    seeds: Vec<GeneralSeed>,
}

pub fn build_general_family(
    defs: Vec<GeneralSolutionDef>,
    shared: SharedProfile,
) -> Result<GeneralFamily, RegistryError> {
    if defs.is_empty() {
        return Err(RegistryError::EmptyFamily);
    }
    let seeds = defs
        .into_iter()
        .enumerate()
        .map(|(i, d)| GeneralSeed::new(i, d))
        .collect::<Result<_, _>>()?;
    Ok(GeneralFamily { shared, seeds })
}

impl GeneralFamily {
    pub fn seeds(&self) -> &[GeneralSeed] {
        &self.seeds
    }
}

impl SolutionFamily for GeneralFamily {
    fn len(&self) -> usize {
        self.seeds.len()
    }

    fn shared(&self) -> &SharedProfile {
        &self.shared
    }

    fn relation(&self, i: usize, _grid: &ScanGrid) -> Box<dyn ImplicitRelation + '_> {
        Box::new(GeneralRelation {
            seed: &self.seeds[i],
        })
    }

    fn field_sample(
        &self,
        i: usize,
        at: &Point,
        p: f64,
        degenerate_slope: f64,
    ) -> Result<FieldSample, CalculusError> {
        let mut s = calculus::general_derivatives(&self.seeds[i], at, p, degenerate_slope)?;
        s.source = calculus::Source::Seed(i);
        Ok(s)
    }

    fn qr(&self, i: usize, at: &Point, p: f64) -> Result<(f64, f64), EvalError> {
        let seed = &self.seeds[i];
        Ok((seed.q_2.eval(&[p, at.y])?, seed.r_2.eval(&[p, at.z])?))
    }
}

/// `Φ = x + ∂₁Q(p, y) + ∂₁R(p, z) + T(p, t)`, `D = ∂₁₁Q + ∂₁₁R + ∂₁T`.
pub struct GeneralRelation<'a> {
    seed: &'a GeneralSeed,
}

impl ImplicitRelation for GeneralRelation<'_> {
    fn eval(&self, p: f64, at: &Point) -> Result<PhiEval, EvalError> {
        let s = self.seed;
        let q1 = s.q_1.eval(&[p, at.y])?;
        let r1 = s.r_1.eval(&[p, at.z])?;
        let t0 = s.def.t.eval(&[p, at.t])?;
        let slope = s.q_11.eval(&[p, at.y])? + s.r_11.eval(&[p, at.z])? + s.t_1.eval(&[p, at.t])?;
        Ok(PhiEval {
            value: at.x + q1 + r1 + t0,
            slope,
            scale: at.x.abs().max(q1.abs()).max(r1.abs()).max(t0.abs()),
        })
    }

    fn jet(&self, p: f64, at: &Point) -> Result<PhiJet, EvalError> {
        let e = self.eval(p, at)?;
        let s = self.seed;
        let curvature =
            s.q_111.eval(&[p, at.y])? + s.r_111.eval(&[p, at.z])? + s.t_11.eval(&[p, at.t])?;
        Ok(PhiJet {
            value: e.value,
            slope: e.slope,
            curvature,
            gradient: [
                1.0,
                s.q_12.eval(&[p, at.y])?,
                s.r_12.eval(&[p, at.z])?,
                s.t_2.eval(&[p, at.t])?,
            ],
        })
    }
}

/// The shock seed written as a general seed:
/// `Q = M(y) + β(y) F(p)` with `M' = m`, `R = N(z) + δ(z) F(p)` with `N' = n`,
/// and `T = α(t) F'(p) + G(p)`.
///
/// Only polynomial `m` and `n` are supported, since `M` and `N` are built
/// by symbolic integration.
pub fn embed_shock(
    def: &ShockSolutionDef,
    shared: &SharedProfile,
) -> Result<GeneralSolutionDef, RegistryError> {
    let integrate = |role: &str, f: &SmoothFn, var: &str| {
        antiderivative(f.expr(), var).ok_or_else(|| RegistryError::NotPolynomial {
            role: role.to_string(),
            expr: f.to_string(),
        })
    };
    let big_m = integrate("m", &def.m, Y)?;
    let big_n = integrate("n", &def.n, Z)?;
    let f = def.f.expr().clone();
    let q = add(big_m, mul(shared.beta.expr().clone(), f.clone()));
    let r = add(big_n, mul(shared.delta.expr().clone(), f));
    let t = add(
        mul(shared.alpha.expr().clone(), def.f.partial(1, 0).into_owned()),
        def.g.expr().clone(),
    );
    let wrap = |e: Expr, vars: &[&str]| SmoothFn::new(e, vars).expect("embedding keeps variable conventions");
    Ok(GeneralSolutionDef {
        q: wrap(q, &[P, Y]),
        r: wrap(r, &[P, Z]),
        t: wrap(t, &[P, T]),
    })
}

/// Every seed of a shock family embedded as a general seed.
pub fn embed_shock_family(family: &ShockFamily) -> Result<GeneralFamily, RegistryError> {
    let defs = family
        .seeds
        .iter()
        .map(|s| embed_shock(&s.def, &family.shared))
        .collect::<Result<Vec<_>, _>>()?;
    build_general_family(defs, family.shared.clone())
}
