//! First derivatives of `(p, q, r)` by implicit differentiation, Poisson
//! brackets and the residuals of the field-level equations.
//!
//! The field equation is `a{r, p}_yt + b{r, q}_xt = 0` with the
//! compatibility conditions `p_y = q_x`, `p_z = r_x`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::point::{Axis, Point};
use crate::registry::{GeneralSeed, ProfileDerivs, SharedProfile, ShockSeed};

/// Guard added to residual scales so identically zero fields normalize to 0.
pub const SCALE_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("degenerate root at {point}: |D| = {slope:e} is below {threshold:e}")]
    Degenerate {
        point: Point,
        slope: f64,
        threshold: f64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A scalar field value with its gradient in `(x, y, z, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 4],
}

impl Jet {
    pub fn d(&self, axis: Axis) -> f64 {
        self.grad[axis.index()]
    }

    fn scaled(&self, k: f64) -> Jet {
        Jet {
            value: k * self.value,
            grad: self.grad.map(|g| k * g),
        }
    }

    fn add_scaled(&mut self, k: f64, other: &Jet) {
        self.value += k * other.value;
        for (g, o) in self.grad.iter_mut().zip(other.grad) {
            *g += k * o;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Seed(usize),
    Composite,
}

/// `(p, q, r)` and their first partials at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: Point,
    pub p: Jet,
    pub q: Jet,
    pub r: Jet,
    /// `D` at the root the sample was built from; `None` for composites.
    pub slope: Option<f64>,
    pub source: Source,
}

impl FieldSample {
    pub fn zero(point: Point) -> FieldSample {
        FieldSample {
            point,
            p: Jet::default(),
            q: Jet::default(),
            r: Jet::default(),
            slope: None,
            source: Source::Composite,
        }
    }

    /// The twelve first partials, ordered `p`, `q`, `r` and then by axis.
    pub fn partials(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, jet) in [&self.p, &self.q, &self.r].into_iter().enumerate() {
            out[4 * k..4 * k + 4].copy_from_slice(&jet.grad);
        }
        out
    }

    /// Every value and partial multiplied by `k`.
    pub fn scaled(&self, k: f64) -> FieldSample {
        FieldSample {
            point: self.point,
            p: self.p.scaled(k),
            q: self.q.scaled(k),
            r: self.r.scaled(k),
            slope: None,
            source: Source::Composite,
        }
    }

    pub(crate) fn add_scaled(&mut self, k: f64, other: &FieldSample) {
        self.p.add_scaled(k, &other.p);
        self.q.add_scaled(k, &other.q);
        self.r.add_scaled(k, &other.r);
    }
}

/// Names of the three fields, matching the order of [`FieldSample::partials`].
pub const FIELDS: [&str; 3] = ["p", "q", "r"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Ghe,
    CompatY,
    CompatZ,
    Pairwise,
    NTerm,
    Reduced,
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation: Equation,
    pub value: f64,
    /// Largest magnitude among the individual terms.
    pub scale: f64,
    pub normalized: f64,
    pub point: Point,
}

impl ResidualReport {
    pub fn new(equation: Equation, value: f64, scale: f64, point: Point) -> ResidualReport {
        ResidualReport {
            equation,
            value,
            scale,
            normalized: value.abs() / (scale + SCALE_GUARD),
            point,
        }
    }
}

fn max_abs(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0, |m, t| m.max(t.abs()))
}

// Shared assembly: p from the gradient of Φ, then q = q0 + kq·(...) and
// r = r0 + kr·(...) where kq, kr multiply p's gradient and the extra
// terms are the explicit y- and z-dependence.
#[allow(clippy::too_many_arguments)]
fn implicit_sample(
    at: &Point,
    p: f64,
    slope: f64,
    phi_grad: [f64; 4],
    q: f64,
    kq: f64,
    q_y: f64,
    r: f64,
    kr: f64,
    r_z: f64,
    threshold: f64,
) -> Result<FieldSample, CalculusError> {
    if slope.is_nan() || slope.abs() < threshold {
        return Err(CalculusError::Degenerate {
            point: *at,
            slope,
            threshold,
        });
    }
    let p_grad = phi_grad.map(|g| -g / slope);
    let mut q_grad = p_grad.map(|g| kq * g);
    q_grad[Axis::Y.index()] += q_y;
    let mut r_grad = p_grad.map(|g| kr * g);
    r_grad[Axis::Z.index()] += r_z;
    Ok(FieldSample {
        point: *at,
        p: Jet {
            value: p,
            grad: p_grad,
        },
        q: Jet {
            value: q,
            grad: q_grad,
        },
        r: Jet {
            value: r,
            grad: r_grad,
        },
        slope: Some(slope),
        source: Source::Composite,
    })
}

/// Closed-form sample of a shock seed at the root `p`.
///
/// With `S = α + β + δ` and `D = S F''(p) + G'(p)`:
/// `∇p = -(1, β'F', δ'F', α'F') / D`, `q = m + β'F`, `r = n + δ'F`.
pub(crate) fn shock_derivatives(
    seed: &ShockSeed,
    profile: &ProfileDerivs,
    at: &Point,
    p: f64,
    degenerate_slope: f64,
) -> Result<FieldSample, CalculusError> {
    let (y, z, t) = ([at.y], [at.z], [at.t]);
    let s = profile.alpha.eval(&t)? + profile.beta.eval(&y)? + profile.delta.eval(&z)?;
    let f = seed.def.f.eval(&[p])?;
    let f1 = seed.f_1.eval(&[p])?;
    let slope = s * seed.f_2.eval(&[p])? + seed.g_1.eval(&[p])?;
    let (a1, b1, b2) = (profile.alpha_1.eval(&t)?, profile.beta_1.eval(&y)?, profile.beta_2.eval(&y)?);
    let (d1, d2) = (profile.delta_1.eval(&z)?, profile.delta_2.eval(&z)?);
    implicit_sample(
        at,
        p,
        slope,
        [1.0, b1 * f1, d1 * f1, a1 * f1],
        seed.def.m.eval(&y)? + b1 * f,
        b1 * f1,
        seed.m_1.eval(&y)? + b2 * f,
        seed.def.n.eval(&z)? + d1 * f,
        d1 * f1,
        seed.n_1.eval(&z)? + d2 * f,
        degenerate_slope,
    )
}

/// Closed-form sample of a general seed at the root `p`.
///
/// With `D = ∂₁₁Q + ∂₁₁R + ∂₁T`:
/// `∇p = -(1, ∂₁₂Q, ∂₁₂R, ∂₂T) / D`, `q = ∂₂Q`, `r = ∂₂R`.
pub(crate) fn general_derivatives(
    seed: &GeneralSeed,
    at: &Point,
    p: f64,
    degenerate_slope: f64,
) -> Result<FieldSample, CalculusError> {
    let (py, pz, pt) = ([p, at.y], [p, at.z], [p, at.t]);
    let q12 = seed.q_12.eval(&py)?;
    let r12 = seed.r_12.eval(&pz)?;
    let slope = seed.q_11.eval(&py)? + seed.r_11.eval(&pz)? + seed.t_1.eval(&pt)?;
    implicit_sample(
        at,
        p,
        slope,
        [1.0, q12, r12, seed.t_2.eval(&pt)?],
        seed.q_2.eval(&py)?,
        q12,
        seed.q_22.eval(&py)?,
        seed.r_2.eval(&pz)?,
        r12,
        seed.r_22.eval(&pz)?,
        degenerate_slope,
    )
}

/// `{A, B}_µν = A_µ B_ν - A_ν B_µ`.
pub fn poisson_bracket(a: &Jet, b: &Jet, mu: Axis, nu: Axis) -> f64 {
    a.d(mu) * b.d(nu) - a.d(nu) * b.d(mu)
}

// The four terms of a{r_j, p_i}_yt + b{r_j, q_i}_xt, in evaluation order.
fn cross_terms(a: f64, b: f64, r: &Jet, s: &FieldSample) -> [f64; 4] {
    [
        a * r.d(Axis::Y) * s.p.d(Axis::T),
        -(a * r.d(Axis::T) * s.p.d(Axis::Y)),
        b * r.d(Axis::X) * s.q.d(Axis::T),
        -(b * r.d(Axis::T) * s.q.d(Axis::X)),
    ]
}

fn cross_value(a: f64, b: f64, r: &Jet, s: &FieldSample) -> f64 {
    a * poisson_bracket(r, &s.p, Axis::Y, Axis::T) + b * poisson_bracket(r, &s.q, Axis::X, Axis::T)
}

/// `a{r, p}_yt + b{r, q}_xt`.
pub fn ghe_residual(s: &FieldSample, shared: &SharedProfile) -> ResidualReport {
    let (a, b) = (shared.a(), shared.b());
    ResidualReport::new(
        Equation::Ghe,
        cross_value(a, b, &s.r, s),
        max_abs(&cross_terms(a, b, &s.r, s)),
        s.point,
    )
}

/// `(p_y - q_x, p_z - r_x)`.
pub fn compat_residuals(s: &FieldSample) -> (ResidualReport, ResidualReport) {
    let (p_y, q_x) = (s.p.d(Axis::Y), s.q.d(Axis::X));
    let (p_z, r_x) = (s.p.d(Axis::Z), s.r.d(Axis::X));
    (
        ResidualReport::new(Equation::CompatY, p_y - q_x, max_abs(&[p_y, q_x]), s.point),
        ResidualReport::new(Equation::CompatZ, p_z - r_x, max_abs(&[p_z, r_x]), s.point),
    )
}

fn pairwise_parts(si: &FieldSample, sj: &FieldSample, a: f64, b: f64) -> (f64, f64) {
    let value = cross_value(a, b, &sj.r, si) + cross_value(a, b, &si.r, sj);
    let scale = max_abs(&cross_terms(a, b, &sj.r, si)).max(max_abs(&cross_terms(a, b, &si.r, sj)));
    (value, scale)
}

/// Cross term `a{r_j,p_i}_yt + a{r_i,p_j}_yt + b{r_j,q_i}_xt + b{r_i,q_j}_xt`.
pub fn pairwise_balance(si: &FieldSample, sj: &FieldSample, shared: &SharedProfile) -> ResidualReport {
    let (value, scale) = pairwise_parts(si, sj, shared.a(), shared.b());
    ResidualReport::new(Equation::Pairwise, value, scale, si.point)
}

/// Sum of the cross terms over all pairs `i < j`; zero for fewer than two samples.
pub fn n_term_balance(samples: &[FieldSample], shared: &SharedProfile) -> ResidualReport {
    let (a, b) = (shared.a(), shared.b());
    let point = samples.first().map_or_else(Point::default, |s| s.point);
    let mut acc: Option<(f64, f64)> = None;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let (v, s) = pairwise_parts(&samples[i], &samples[j], a, b);
            acc = Some(match acc {
                None => (v, s),
                Some((av, as_)) => (av + v, as_.max(s)),
            });
        }
    }
    let (value, scale) = acc.unwrap_or((0.0, 0.0));
    ResidualReport::new(Equation::NTerm, value, scale, point)
}

/// Reduced balance condition for two general seeds at their own roots `p1`, `p2`:
///
/// `a (∂₁₂R₂ - ∂₁₂R₁)(∂₂T₁ ∂₁₂Q₂ - ∂₂T₂ ∂₁₂Q₁)
///  - b (∂₂T₂ - ∂₂T₁)(∂₁₂Q₁ ∂₁₂R₂ - ∂₁₂Q₂ ∂₁₂R₁)`.
///
/// The scale is the largest of the eight expanded products.
pub fn reduced_balance(
    s1: &GeneralSeed,
    s2: &GeneralSeed,
    shared: &SharedProfile,
    at: &Point,
    (p1, p2): (f64, f64),
) -> Result<ResidualReport, EvalError> {
    let (a, b) = (shared.a(), shared.b());
    let (q1, r1, t1) = s1.mixed_partials(p1, at)?;
    let (q2, r2, t2) = s2.mixed_partials(p2, at)?;
    let lhs = a * (r2 - r1) * (t1 * q2 - t2 * q1);
    let rhs = b * (t2 - t1) * (q1 * r2 - q2 * r1);
    let scale = max_abs(&[
        a * r2 * t1 * q2,
        a * r2 * t2 * q1,
        a * r1 * t1 * q2,
        a * r1 * t2 * q1,
        b * t2 * q1 * r2,
        b * t2 * q2 * r1,
        b * t1 * q1 * r2,
        b * t1 * q2 * r1,
    ]);
    Ok(ResidualReport::new(Equation::Reduced, lhs - rhs, scale, *at))
}
