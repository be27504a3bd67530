//! Implicit shock-wave solutions of the general heavenly equation
//!
//! ```text
//! a {r, p}_yt + b {r, q}_xt = 0,   p_y = q_x,   p_z = r_x,   a + b + c = 0
//! ```
//!
//! and numerical certification of when linear combinations of such solutions
//! are again solutions.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] parses and symbolically differentiates the user-supplied
//!   arbitrary functions; [`smooth`] caches their partial derivatives.
//! * [`registry`] assembles those functions into solution families.
//! * [`implicit`] solves the hodograph relation for `p` at a spacetime point.
//! * [`calculus`] computes closed-form first derivatives of `(p, q, r)` and
//!   every residual (field equation, compatibility, balance conditions).
//! * [`superpose`] forms linear combinations and checks the superposition
//!   theorem point by point.
//! * [`fdoracle`] is an independent finite-difference check of [`calculus`].

pub mod calculus;
pub mod expr;
pub mod fdoracle;
pub mod implicit;
pub mod point;
pub mod registry;
pub mod sampling;
pub mod smooth;
pub mod superpose;

pub use calculus::{FieldSample, Jet, ResidualReport, Source};
pub use expr::{Expr, ParseError};
pub use implicit::{BranchPolicy, ImplicitRelation, RootReport, ScanGrid, Selection};
pub use point::{Axis, Point};
pub use registry::{
    GeneralFamily, GeneralSolutionDef, SharedProfile, ShockFamily, ShockSolutionDef,
    SolutionFamily,
};
pub use smooth::SmoothFn;
pub use superpose::{SuperpositionSpec, TheoremReport, Thresholds};
