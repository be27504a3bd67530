//! Fixtures shared by the benchmarks.

use ghe_core::registry::build_shock_family;
use ghe_core::sampling::{sample_box, Method, SampleBox};
use ghe_core::{Point, SharedProfile, ShockFamily, ShockSolutionDef, SmoothFn};

const SEEDS: [[&str; 4]; 5] = [
    ["p^2/2 + p^4/12", "p - p^3/6", "y^2", "1 - z"],
    ["p^2 + p^4/4", "2*p + p^3/3", "3*y", "z^3"],
    ["p^2/3 + p^3/10", "p/2", "0", "z"],
    ["2*p^2 - p^3/5 + p^4/8", "p^2/4", "y", "0"],
    ["p^2/2", "p + p^4/20", "y^3/3", "2*z^2"],
];

/// A shock family with the first `seeds` (at most five) fixture seeds.
pub fn shock_family(seeds: usize) -> ShockFamily {
    let shared = SharedProfile::new(
        SmoothFn::parse("t + sin(t)/2", &["t"]).unwrap(),
        SmoothFn::parse("y", &["y"]).unwrap(),
        SmoothFn::parse("z^2/2", &["z"]).unwrap(),
        1.0,
        -2.5,
    )
    .unwrap();
    let defs = SEEDS[..seeds]
        .iter()
        .map(|[f, g, m, n]| ShockSolutionDef::parse(f, g, m, n).unwrap())
        .collect();
    build_shock_family(defs, shared).unwrap()
}

/// `count` Halton points in the usual sampling box.
pub fn cloud(count: usize) -> Vec<Point> {
    let bx = SampleBox {
        x: [-1.0, 1.0],
        y: [0.5, 1.5],
        z: [0.5, 1.5],
        t: [0.0, 1.0],
    };
    sample_box(&bx, count, 7, Method::Halton).unwrap()
}
