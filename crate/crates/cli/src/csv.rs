//! CSV dump of per-point records.
//!
//! Columns, for a family of `n` seeds (`i` and `j` run from 0):
//!
//! | columns | content |
//! |---|---|
//! | `x,y,z,t` | coordinates |
//! | `status` | `admissible`, `fold`, `hole` or `degenerate` |
//! | per seed `i`: `p{i},p{i}_x,p{i}_y,p{i}_z,p{i}_t`, same for `q{i}`, `r{i}` | seed fields and partials |
//! | per seed `i`: `D{i}` | `∂Φ/∂p` at the root |
//! | per seed `i`: `ghe{i},compat_y{i},compat_z{i}` | normalized residuals |
//! | per pair `i<j`: `pair{i}_{j},reduced{i}_{j}` | normalized balance residuals |
//! | `n_term` | normalized n-term balance residual |
//! | `sup_p,sup_p_x,...,sup_r_t` | superposed fields and partials |
//! | `sup_ghe,sup_compat_y,sup_compat_z` | normalized residuals of the superposition |
//! | `expansion` | normalized quadratic-expansion residual |
//!
//! Numbers use `{:.16e}` (17 significant digits); unavailable values are empty.

use std::fmt::Write as _;

use ghe_core::calculus::{FieldSample, FIELDS};
use ghe_core::superpose::{PointRecord, PointStatus};
use ghe_core::{Axis, ResidualReport};

fn field_columns(prefix: &str, suffix: &str, out: &mut Vec<String>) {
    for f in FIELDS {
        out.push(format!("{prefix}{f}{suffix}"));
        for a in Axis::ALL {
            out.push(format!("{prefix}{f}{suffix}_{a}"));
        }
    }
}

pub fn columns(seeds: usize) -> Vec<String> {
    let mut out: Vec<String> = ["x", "y", "z", "t", "status"].map(String::from).to_vec();
    for i in 0..seeds {
        field_columns("", &i.to_string(), &mut out);
    }
    for i in 0..seeds {
        out.push(format!("D{i}"));
    }
    for i in 0..seeds {
        out.extend([format!("ghe{i}"), format!("compat_y{i}"), format!("compat_z{i}")]);
    }
    for i in 0..seeds {
        for j in i + 1..seeds {
            out.extend([format!("pair{i}_{j}"), format!("reduced{i}_{j}")]);
        }
    }
    out.push("n_term".into());
    field_columns("sup_", "", &mut out);
    out.extend(["sup_ghe", "sup_compat_y", "sup_compat_z", "expansion"].map(String::from));
    out
}

fn num(row: &mut Vec<String>, v: Option<f64>) {
    row.push(v.map_or_else(String::new, |v| format!("{v:.16e}")));
}

fn sample(row: &mut Vec<String>, s: Option<&FieldSample>) {
    for k in 0..3 {
        let jet = s.map(|s| [s.p, s.q, s.r][k]);
        num(row, jet.map(|j| j.value));
        for a in 0..4 {
            num(row, jet.map(|j| j.grad[a]));
        }
    }
}

fn residual(row: &mut Vec<String>, r: Option<&ResidualReport>) {
    num(row, r.map(|r| r.normalized));
}

fn status(s: &PointStatus) -> &'static str {
    match s {
        PointStatus::Admissible => "admissible",
        PointStatus::Fold { .. } => "fold",
        PointStatus::Hole { .. } => "hole",
        PointStatus::Degenerate { .. } => "degenerate",
    }
}

pub fn write(records: &[PointRecord], seeds: usize) -> String {
    let mut out = columns(seeds).join(",");
    out.push('\n');
    for r in records {
        let mut row = Vec::new();
        for c in r.point.coords() {
            num(&mut row, Some(c));
        }
        row.push(status(&r.status).into());
        for i in 0..seeds {
            sample(&mut row, r.seeds.get(i));
        }
        for i in 0..seeds {
            num(&mut row, r.seeds.get(i).and_then(|s| s.slope));
        }
        for i in 0..seeds {
            residual(&mut row, r.seed_ghe.get(i));
            residual(&mut row, r.seed_compat.get(i).map(|c| &c.0));
            residual(&mut row, r.seed_compat.get(i).map(|c| &c.1));
        }
        // Pairs are stored in the same lexicographic order as the columns.
        for k in 0..seeds * seeds.saturating_sub(1) / 2 {
            let p = r.pairs.get(k);
            residual(&mut row, p.map(|p| &p.pairwise));
            residual(&mut row, p.and_then(|p| p.reduced.as_ref()));
        }
        residual(&mut row, r.n_term.as_ref());
        sample(&mut row, r.superposed.as_ref());
        residual(&mut row, r.superposed_ghe.as_ref());
        residual(&mut row, r.superposed_compat.as_ref().map(|c| &c.0));
        residual(&mut row, r.superposed_compat.as_ref().map(|c| &c.1));
        residual(&mut row, r.expansion.as_ref());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_for_two_seeds() {
        let cols = columns(2);
        assert_eq!(&cols[..7], ["x", "y", "z", "t", "status", "p0", "p0_x"]);
        assert!(cols.contains(&"pair0_1".to_string()));
        assert!(cols.contains(&"r1_t".to_string()));
        assert_eq!(cols.last().unwrap(), "expansion");
        assert_eq!(cols.len(), 5 + 2 * 15 + 2 + 2 * 3 + 2 + 1 + 15 + 4);
    }
}
