//! Point clouds over an axis-aligned box in `(x, y, z, t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::{Axis, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("box bounds for {axis} are [{lo}, {hi}]; need finite lo <= hi")]
    Bounds { axis: Axis, lo: f64, hi: f64 },
    #[error("sampling box is empty: every axis has zero width")]
    Empty,
    #[error("point count must be positive")]
    Count,
}

/// Closed box `[lo, hi]` per axis. Zero-width axes are allowed (slices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
    pub t: [f64; 2],
}

impl SampleBox {
    pub fn bounds(&self) -> [[f64; 2]; 4] {
        [self.x, self.y, self.z, self.t]
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        for (axis, [lo, hi]) in Axis::ALL.into_iter().zip(self.bounds()) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(SamplingError::Bounds { axis, lo, hi });
            }
        }
        if self.bounds().iter().all(|[lo, hi]| lo == hi) {
            return Err(SamplingError::Empty);
        }
        Ok(())
    }

    /// Maps a point of the unit hypercube into the box.
    pub fn map(&self, u: [f64; 4]) -> Point {
        let b = self.bounds();
        Point::from_array(std::array::from_fn(|k| b[k][0] + (b[k][1] - b[k][0]) * u[k]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Randomly shifted Halton sequence in bases 2, 3, 5, 7.
    #[default]
    Halton,
    Uniform,
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * f;
        n /= base;
        f *= inv;
    }
    out
}

/// `count` points in `bx`, reproducible from `seed`.
pub fn sample_box(bx: &SampleBox, count: usize, seed: u64, method: Method) -> Result<Vec<Point>, SamplingError> {
    bx.validate()?;
    if count == 0 {
        return Err(SamplingError::Count);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match method {
        Method::Halton => {
            const BASES: [u64; 4] = [2, 3, 5, 7];
            let shift: [f64; 4] = std::array::from_fn(|_| rng.gen());
            (1..=count as u64)
                .map(|n| bx.map(std::array::from_fn(|k| (radical_inverse(n, BASES[k]) + shift[k]).fract())))
                .collect()
        }
        Method::Uniform => (0..count).map(|_| bx.map(std::array::from_fn(|_| rng.gen()))).collect(),
    };
    Ok(points)
}
