//! Numerical solution of the implicit hodograph relation `Φ(p; x, y, z, t) = 0`.
//!
//! Roots are bracketed by a sign-change scan of `Φ` over a fixed `p` interval
//! and refined with Newton steps that fall back to bisection whenever a step
//! would leave the bracket. Tangential (even multiplicity) roots do not
//! change sign and are not guaranteed to be found; folds show up instead
//! through the `degenerate` flag on neighbouring roots.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;
use crate::point::Point;

/// `Φ` and its `p`-derivative `D` at one `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEval {
    pub value: f64,
    pub slope: f64,
    /// Largest magnitude among the terms summed into `value`.
    pub scale: f64,
}

/// Second-order local data used to size finite-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiJet {
    pub value: f64,
    pub slope: f64,
    /// `∂D/∂p`
    pub curvature: f64,
    /// `∂Φ/∂(x, y, z, t)` at fixed `p`.
    pub gradient: [f64; 4],
}

pub trait ImplicitRelation: Sync {
    fn eval(&self, p: f64, at: &Point) -> Result<PhiEval, EvalError>;

    fn jet(&self, p: f64, at: &Point) -> Result<PhiJet, EvalError>;

    /// `Φ` at every node of `grid`; `None` where it cannot be evaluated.
    fn scan(&self, at: &Point, grid: &ScanGrid) -> Vec<Option<f64>> {
        grid.nodes()
            .map(|p| self.eval(p, at).ok().map(|e| e.value))
            .collect()
    }
}

/// Relation given directly by closures for `Φ` and `D`.
pub struct FnRelation<F, D> {
    pub phi: F,
    pub slope: D,
}

impl<F, D> ImplicitRelation for FnRelation<F, D>
where
    F: Fn(f64, &Point) -> f64 + Sync,
    D: Fn(f64, &Point) -> f64 + Sync,
{
    fn eval(&self, p: f64, at: &Point) -> Result<PhiEval, EvalError> {
        let value = (self.phi)(p, at);
        Ok(PhiEval {
            value,
            slope: (self.slope)(p, at),
            scale: value.abs().max(at.x.abs()),
        })
    }

    fn jet(&self, p: f64, at: &Point) -> Result<PhiJet, EvalError> {
        let e = self.eval(p, at)?;
        let h = 1e-6 * (1.0 + p.abs());
        let curvature = ((self.slope)(p + h, at) - (self.slope)(p - h, at)) / (2.0 * h);
        let mut gradient = [0.0; 4];
        for (g, axis) in gradient.iter_mut().zip(crate::point::Axis::ALL) {
            let hx = 1e-6 * (1.0 + at.get(axis).abs());
            *g = ((self.phi)(p, &at.shifted(axis, hx)) - (self.phi)(p, &at.shifted(axis, -hx)))
                / (2.0 * hx);
        }
        Ok(PhiJet {
            value: e.value,
            slope: e.slope,
            curvature,
            gradient,
        })
    }
}

/// Uniform grid of `nodes` points on `[lo, hi]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
}

impl ScanGrid {
    pub const MIN_NODES: usize = 16;

    pub fn node(&self, k: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / (self.nodes - 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |k| self.node(k))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            lo: -10.0,
            hi: 10.0,
            nodes: 1024,
        }
    }
}

/// Which root to take where no previous root is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    Lowest,
    Nearest(f64),
    Index(usize),
}

impl Selection {
    pub fn pick<'a>(&self, roots: &'a [RootReport]) -> Option<&'a RootReport> {
        match *self {
            Selection::Lowest => roots.first(),
            Selection::Nearest(seed) => nearest(roots, seed),
            Selection::Index(k) => roots.get(k),
        }
    }
}

fn nearest(roots: &[RootReport], target: f64) -> Option<&RootReport> {
    roots.iter().min_by(|a, b| {
        (a.root - target)
            .abs()
            .total_cmp(&(b.root - target).abs())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    pub abs: f64,
    pub rel: f64,
    /// `|D|` below this marks a root as degenerate.
    pub degenerate_slope: f64,
    pub max_iterations: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            abs: 1e-12,
            rel: 1e-12,
            degenerate_slope: 1e-8,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("scan interval [{lo}, {hi}] is empty or not finite")]
    Interval { lo: f64, hi: f64 },
    #[error("scan resolution {0} is below the minimum of {min}", min = ScanGrid::MIN_NODES)]
    Resolution(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPolicy {
    pub scan: ScanGrid,
    pub select: Selection,
    /// Follow the previous root along ordered grids instead of reselecting.
    pub continuation: bool,
    pub tolerances: SolverTolerances,
}

impl Default for BranchPolicy {
    fn default() -> Self {
        BranchPolicy {
            scan: ScanGrid::default(),
            select: Selection::Lowest,
            continuation: true,
            tolerances: SolverTolerances::default(),
        }
    }
}

impl BranchPolicy {
    pub fn new(lo: f64, hi: f64, nodes: usize) -> Result<BranchPolicy, PolicyError> {
        let policy = BranchPolicy {
            scan: ScanGrid { lo, hi, nodes },
            ..BranchPolicy::default()
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_selection(mut self, select: Selection) -> BranchPolicy {
        self.select = select;
        self
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let ScanGrid { lo, hi, nodes } = self.scan;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(PolicyError::Interval { lo, hi });
        }
        if nodes < ScanGrid::MIN_NODES {
            return Err(PolicyError::Resolution(nodes));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub root: f64,
    /// `|Φ(root)|`
    pub residual: f64,
    /// `D(root)`
    pub slope: f64,
    pub iterations: usize,
    /// Every bracketed root at this point, ascending.
    pub roots: Vec<f64>,
    pub degenerate: bool,
    /// False when the iteration limit was hit and the bracket midpoint returned.
    pub converged: bool,
    /// Residual within `abs + rel * scale`, with `scale` the largest term of `Φ`.
    pub within_tolerance: bool,
}

struct Refined {
    root: f64,
    eval: PhiEval,
    iterations: usize,
    converged: bool,
}

/// Safeguarded Newton on a bracket with `Φ(a)` and `Φ(b)` of opposite sign.
fn refine(
    rel: &dyn ImplicitRelation,
    at: &Point,
    (a, fa): (f64, f64),
    (b, fb): (f64, f64),
    tol: &SolverTolerances,
) -> Option<Refined> {
    // Orient so Φ(neg) < 0 < Φ(pos).
    let (mut neg, mut pos) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut p = {
        let secant = a - fa * (b - a) / (fb - fa);
        if secant.is_finite() && secant > a.min(b) && secant < a.max(b) {
            secant
        } else {
            0.5 * (a + b)
        }
    };
    let mut last = None;
    for iteration in 1..=tol.max_iterations {
        let e = match rel.eval(p, at) {
            Ok(e) => e,
            Err(_) => {
                // Non-evaluable interior point: bisect towards an endpoint.
                p = 0.5 * (p + neg);
                continue;
            }
        };
        last = Some(e);
        let done = |root: f64, eval: PhiEval| Refined {
            root,
            eval,
            iterations: iteration,
            converged: true,
        };
        if e.value == 0.0 || e.value.abs() <= 2.0 * f64::EPSILON * e.scale {
            return Some(done(p, e));
        }
        if e.value < 0.0 {
            neg = p;
        } else {
            pos = p;
        }
        let (lo, hi) = (neg.min(pos), neg.max(pos));
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE {
            return Some(done(p, e));
        }
        let newton = p - e.value / e.slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - p).abs() <= 2.0 * f64::EPSILON * p.abs() {
            return Some(done(p, e));
        }
        p = next;
    }
    let mid = 0.5 * (neg + pos);
    let eval = rel.eval(mid, at).ok().or(last)?;
    Some(Refined {
        root: mid,
        eval,
        iterations: tol.max_iterations,
        converged: false,
    })
}

fn report(r: Refined, tol: &SolverTolerances) -> RootReport {
    let residual = r.eval.value.abs();
    RootReport {
        root: r.root,
        residual,
        slope: r.eval.slope,
        iterations: r.iterations,
        roots: Vec::new(),
        degenerate: r.eval.slope.abs() < tol.degenerate_slope,
        converged: r.converged,
        within_tolerance: residual <= tol.abs + tol.rel * r.eval.scale,
    }
}

/// All sign-change roots of `Φ(·; at)` on the policy's scan grid, ascending.
pub fn enumerate_roots(
    rel: &dyn ImplicitRelation,
    at: &Point,
    policy: &BranchPolicy,
) -> Vec<RootReport> {
    let grid = &policy.scan;
    let values = rel.scan(at, grid);
    let tol = &policy.tolerances;
    let mut found = Vec::new();
    for k in 0..values.len() {
        let Some(fk) = values[k] else { continue };
        let pk = grid.node(k);
        if fk == 0.0 {
            if let Ok(e) = rel.eval(pk, at) {
                found.push(report(
                    Refined {
                        root: pk,
                        eval: e,
                        iterations: 0,
                        converged: true,
                    },
                    tol,
                ));
            }
            continue;
        }
        let Some(Some(fn_)) = values.get(k + 1) else { continue };
        if fk * fn_ < 0.0 {
            let pn = grid.node(k + 1);
            if let Some(r) = refine(rel, at, (pk, fk), (pn, *fn_), tol) {
                found.push(report(r, tol));
            }
        }
    }
    let all: Vec<f64> = found.iter().map(|r| r.root).collect();
    for r in &mut found {
        r.roots = all.clone();
    }
    found
}

/// Root nearest to `guess`, searched in a window around it that widens
/// until a sign change appears, and finally over the whole scan grid.
pub fn solve_near(
    rel: &dyn ImplicitRelation,
    at: &Point,
    guess: f64,
    policy: &BranchPolicy,
) -> Option<RootReport> {
    const SUBDIVISIONS: usize = 64;
    let tol = &policy.tolerances;
    let mut half_width = match rel.eval(guess, at) {
        Ok(e) if e.slope != 0.0 => 4.0 * (e.value / e.slope).abs(),
        _ => 0.0,
    }
    .max(1e-6 * (1.0 + guess.abs()));
    while half_width < policy.scan.width() {
        let window = ScanGrid {
            lo: guess - half_width,
            hi: guess + half_width,
            nodes: SUBDIVISIONS + 1,
        };
        let values: Vec<Option<f64>> = window
            .nodes()
            .map(|p| rel.eval(p, at).ok().map(|e| e.value))
            .collect();
        let mut best: Option<RootReport> = None;
        for k in 0..SUBDIVISIONS {
            let (Some(fa), Some(fb)) = (values[k], values[k + 1]) else { continue };
            let (a, b) = (window.node(k), window.node(k + 1));
            let candidate = if fa == 0.0 {
                rel.eval(a, at).ok().map(|e| {
                    report(
                        Refined {
                            root: a,
                            eval: e,
                            iterations: 0,
                            converged: true,
                        },
                        tol,
                    )
                })
            } else if fa * fb < 0.0 {
                refine(rel, at, (a, fa), (b, fb), tol).map(|r| report(r, tol))
            } else {
                None
            };
            if let Some(c) = candidate {
                if best
                    .as_ref()
                    .is_none_or(|b| (c.root - guess).abs() < (b.root - guess).abs())
                {
                    best = Some(c);
                }
            }
        }
        if let Some(mut b) = best {
            b.roots = vec![b.root];
            return Some(b);
        }
        half_width *= 4.0;
    }
    let roots = enumerate_roots(rel, at, policy);
    nearest(&roots, guess).cloned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStep {
    pub point: Point,
    /// `None` marks a hole: no root at this point.
    pub report: Option<RootReport>,
    /// Root chosen by the selection rule rather than by continuation.
    pub restarted: bool,
    /// Distance to the previous root exceeds ten times the median step.
    pub jump: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTrace {
    pub steps: Vec<BranchStep>,
}

impl BranchTrace {
    pub fn holes(&self) -> usize {
        self.steps.iter().filter(|s| s.report.is_none()).count()
    }

    pub fn jumps(&self) -> usize {
        self.steps.iter().filter(|s| s.jump).count()
    }

    pub fn roots(&self) -> Vec<Option<f64>> {
        self.steps
            .iter()
            .map(|s| s.report.as_ref().map(|r| r.root))
            .collect()
    }
}

/// Follows one root branch along an ordered sequence of adjacent points.
pub fn continue_branch(
    rel: &dyn ImplicitRelation,
    grid: &[Point],
    policy: &BranchPolicy,
) -> BranchTrace {
    let mut steps = Vec::with_capacity(grid.len());
    let mut motions: Vec<(usize, f64)> = Vec::new();
    let mut previous: Option<f64> = None;
    for (k, at) in grid.iter().enumerate() {
        let roots = enumerate_roots(rel, at, policy);
        let (chosen, restarted) = match previous.filter(|_| policy.continuation) {
            Some(prev) => (nearest(&roots, prev).cloned(), false),
            None => (policy.select.pick(&roots).cloned(), true),
        };
        if let (Some(prev), Some(c), false) = (previous, &chosen, restarted) {
            motions.push((k, (c.root - prev).abs()));
        }
        previous = chosen.as_ref().map(|c| c.root);
        steps.push(BranchStep {
            point: *at,
            report: chosen,
            restarted,
            jump: false,
        });
    }
    if !motions.is_empty() {
        let mut sorted: Vec<f64> = motions.iter().map(|m| m.1).collect();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        for (k, motion) in motions {
            let root = steps[k].report.as_ref().map_or(0.0, |r| r.root);
            let floor = 64.0 * f64::EPSILON * (1.0 + root.abs());
            if motion > 10.0 * median + floor {
                steps[k].jump = true;
            }
        }
    }
    BranchTrace { steps }
}
