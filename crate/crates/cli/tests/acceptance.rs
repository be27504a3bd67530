//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use ghe_cli::commands;
use ghe_cli::scenario::{Overrides, Prepared, Scenario};
use ghe_core::fdoracle::fd_partial;
use ghe_core::implicit::enumerate_roots;
use ghe_core::superpose::{PointEvaluator, PointRecord};
use ghe_core::{Axis, Point};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SCENARIOS: usize = 20;
const POINTS: usize = 1500;
const MIN_ADMISSIBLE: usize = 1000;

const ALPHA: [&str; 4] = ["t", "t + sin(t)/2", "1 + t^2", "exp(t/2)"];
const BETA: [&str; 4] = ["y", "y^2/2", "1 + y/3", "sin(y)"];
const DELTA: [&str; 3] = ["z", "z^2/2", "cos(z)"];
const M: [&str; 4] = ["0", "y^2", "3*y", "y^3/3 - y"];
const N: [&str; 4] = ["0", "1 - z", "z^3", "2*z^2"];

struct Line {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn poly(rng: &mut ChaCha8Rng, lo: u32, hi: u32, lead: f64) -> String {
    let mut terms = Vec::new();
    for k in lo..=hi {
        let c = if k == hi { lead } else { rng.gen_range(-1.0..1.0) };
        terms.push(format!("({c:.6})*p^{k}"));
    }
    terms.join(" + ")
}

/// Randomized shock scenario `k`: 2, 3 or 5 seeds with polynomial `F`, `G`
/// of degree at most 4 and smooth profile functions drawn from small pools.
fn random_scenario(k: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
    let seeds = [2, 3, 5][k % 3];
    let family: Vec<_> = (0..seeds)
        .map(|_| {
            let f_lead = rng.gen_range(0.05..0.5);
            let g_lead = rng.gen_range(-0.2..0.2);
            json!({
                "F": poly(&mut rng, 2, 4, f_lead),
                "G": poly(&mut rng, 1, 4, g_lead),
                "m": M.choose(&mut rng).unwrap(),
                "n": N.choose(&mut rng).unwrap(),
            })
        })
        .collect();
    let coefficients: Vec<f64> = (0..seeds).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let a = rng.gen_range(-2.0..2.0);
    let b = rng.gen_range(-2.0..2.0);
    let value = json!({
        "name": format!("random_{k}"),
        "constants": { "a": a, "b": b },
        "profile": {
            "alpha": ALPHA.choose(&mut rng).unwrap(),
            "beta": BETA.choose(&mut rng).unwrap(),
            "delta": DELTA.choose(&mut rng).unwrap(),
        },
        "family": { "kind": "shock", "seeds": family },
        "coefficients": coefficients,
        "sampling": {
            "box": { "x": [-2, 2], "y": [0.5, 1.5], "z": [0.5, 1.5], "t": [0, 1] },
            "count": POINTS,
            "seed": k,
        }
    });
    Scenario::from_json(&value.to_string()).expect("generated scenario parses")
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn prepare(s: Scenario) -> Prepared {
    s.prepare(&Overrides::default()).expect("scenario prepares")
}

fn evaluate(p: &Prepared) -> Vec<PointRecord> {
    PointEvaluator::new(p.family(), p.spec.clone(), p.policy, p.tolerances.fold, p.reduced())
        .expect("evaluator builds")
        .evaluate_all(&p.points)
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

struct Run {
    prepared: Prepared,
    records: Vec<PointRecord>,
}

impl Run {
    fn admissible(&self) -> impl Iterator<Item = &PointRecord> {
        self.records.iter().filter(|r| r.admissible())
    }
}

fn seed_validity(runs: &[Run], elapsed: f64) -> Line {
    let mut worst = 0.0f64;
    let mut fewest = usize::MAX;
    for run in runs {
        fewest = fewest.min(run.admissible().count());
        for r in run.admissible() {
            worst = worst.max(max_of(r.seed_ghe.iter().map(|g| g.normalized)));
            worst = worst.max(max_of(r.seed_compat.iter().flat_map(|(y, z)| [y.normalized, z.normalized])));
        }
    }
    Line {
        name: "1 seed validity",
        passed: worst <= 1e-9 && fewest >= MIN_ADMISSIBLE && elapsed <= 60.0,
        detail: format!(
            "{SCENARIOS} scenarios, min admissible {fewest} (need {MIN_ADMISSIBLE}), max residual {worst:.2e} (limit 1e-9), {elapsed:.1} s (limit 60 s)"
        ),
    }
}

fn superposition(runs: &[Run]) -> Line {
    let mut worst_fraction = 1.0f64;
    let mut sizes = Vec::new();
    for run in runs {
        let values: Vec<f64> = run
            .admissible()
            .filter_map(|r| r.superposed_ghe.as_ref().map(|g| g.normalized))
            .collect();
        let within = values.iter().filter(|v| **v <= 1e-9).count();
        worst_fraction = worst_fraction.min(within as f64 / values.len().max(1) as f64);
        sizes.push(run.prepared.family().len());
    }
    sizes.sort_unstable();
    sizes.dedup();
    Line {
        name: "2 superposition theorem",
        passed: worst_fraction >= 0.99 && sizes == [2, 3, 5],
        detail: format!(
            "seed counts {sizes:?}, worst scenario {:.2}% of admissible points within 1e-9 (need 99%)",
            100.0 * worst_fraction
        ),
    }
}

fn balance(runs: &[Run]) -> Line {
    let (mut pairwise, mut n_term, mut reduced) = (0.0f64, 0.0f64, 0.0f64);
    let mut reduced_count = 0;
    let mut bit_equal = true;
    let mut compared = 0;
    for run in runs {
        for r in run.admissible() {
            pairwise = pairwise.max(max_of(r.pairs.iter().map(|p| p.pairwise.normalized)));
            for red in r.pairs.iter().filter_map(|p| p.reduced.as_ref()) {
                reduced = reduced.max(red.normalized);
                reduced_count += 1;
            }
            let nt = r.n_term.as_ref().expect("admissible points carry the n-term residual");
            n_term = n_term.max(nt.normalized);
            if r.pairs.len() == 1 {
                let p = &r.pairs[0].pairwise;
                bit_equal &= nt.value.to_bits() == p.value.to_bits()
                    && nt.normalized.to_bits() == p.normalized.to_bits();
                compared += 1;
            }
        }
    }
    Line {
        name: "3 balance conditions",
        passed: pairwise <= 1e-9 && n_term <= 1e-9 && reduced <= 1e-9 && reduced_count > 0 && bit_equal && compared > 0,
        detail: format!(
            "max pairwise {pairwise:.2e}, n-term {n_term:.2e}, reduced {reduced:.2e} over {reduced_count} pairs (limit 1e-9); n=2 bit-equal at {compared} points: {bit_equal}"
        ),
    }
}

fn negative_control() -> (Line, Run) {
    let prepared = prepare(Scenario::load(&shipped("general_unbalanced.json")).unwrap());
    let records = evaluate(&prepared);
    let run = Run { prepared, records };
    let mut seed = 0.0f64;
    let (mut sup_above, mut red_above, mut total) = (0, 0, 0);
    for r in run.admissible() {
        seed = seed.max(max_of(r.seed_ghe.iter().map(|g| g.normalized)));
        seed = seed.max(max_of(r.seed_compat.iter().flat_map(|(y, z)| [y.normalized, z.normalized])));
        total += 1;
        if r.superposed_ghe.as_ref().is_some_and(|g| g.normalized > 1e-3) {
            sup_above += 1;
        }
        if r.pairs[0].reduced.as_ref().is_some_and(|g| g.normalized > 1e-3) {
            red_above += 1;
        }
    }
    let frac = |k: usize| k as f64 / total.max(1) as f64;
    let line = Line {
        name: "4 negative control",
        passed: seed <= 1e-10 && frac(sup_above) > 0.5 && frac(red_above) > 0.5,
        detail: format!(
            "{total} points, max seed residual {seed:.2e} (limit 1e-10), superposed > 1e-3 at {:.1}%, reduced > 1e-3 at {:.1}% (need > 50%)",
            100.0 * frac(sup_above),
            100.0 * frac(red_above)
        ),
    };
    (line, run)
}

fn expansion(runs: &[Run]) -> Line {
    let mut worst = 0.0f64;
    let mut count = 0;
    for run in runs {
        for r in run.admissible() {
            let e = r.expansion.as_ref().expect("admissible points carry the expansion residual");
            worst = worst.max(e.normalized);
            count += 1;
        }
    }
    Line {
        name: "5 quadratic-form identity",
        passed: worst <= 1e-12,
        detail: format!("{count} points, max normalized residual {worst:.2e} (limit 1e-12)"),
    }
}

fn certification(runs: &[Run]) -> Line {
    let mut worst = 0.0f64;
    let mut certified = 0u64;
    let mut all_passed = true;
    for run in runs {
        let mut p = prepare(run.prepared.scenario.clone());
        p.points.truncate(500);
        let out = commands::fdcheck(&p).expect("fdcheck runs");
        let report = &out.report["report"];
        worst = worst.max(report["max_deviation"].as_f64().unwrap_or(f64::INFINITY));
        certified += report["certified"].as_u64().unwrap_or(0);
        all_passed &= out.passed;
    }

    // Stencil order: halving h on sin should cut the error by about 2^4.
    let at = Point::new(0.7, 0.0, 0.0, 0.0);
    let sin = |q: &Point| Some(q.x.sin());
    let err = |h: f64| (fd_partial(sin, &at, Axis::X, h).unwrap() - 0.7f64.cos()).abs();
    let ratios: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|h| err(*h) / err(h / 2.0)).collect();
    let order_ok = ratios.iter().all(|r| (14.0..18.0).contains(r));
    Line {
        name: "6 derivative certification",
        passed: worst <= 1e-6 && certified > 0 && all_passed && order_ok,
        detail: format!(
            "{certified} seed samples, max deviation {worst:.2e} (limit 1e-6); sin error ratios under halving {:?} (expect ~16)",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        ),
    }
}

/// Affine relations: `F = c p^2`, `G = g1 p + g0` give
/// `p = -(x + g0) / (2 c S + g1)` with `S = alpha + beta + delta`.
fn affine_and_determinism() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..20 {
        let c: f64 = rng.gen_range(0.2..2.0);
        let g1: f64 = rng.gen_range(0.5..2.0);
        let g0: f64 = rng.gen_range(-1.0..1.0);
        let value = json!({
            "constants": { "a": 1.0, "b": 1.0 },
            "profile": { "alpha": "t", "beta": "y^2", "delta": "z/2" },
            "family": { "kind": "shock", "seeds": [ { "F": format!("{c:e}*p^2"), "G": format!("{g1:e}*p + {g0:e}") } ] },
            "coefficients": [1.0],
            "branch": { "interval": [-50, 50], "nodes": 512 },
            "sampling": { "box": { "x": [-3, 3], "y": [0.5, 1.5], "z": [0.5, 1.5], "t": [0, 1] }, "count": 50, "seed": 9 }
        });
        let p = prepare(Scenario::from_json(&value.to_string()).unwrap());
        let ev = PointEvaluator::new(p.family(), p.spec.clone(), p.policy, p.tolerances.fold, None).unwrap();
        for at in &p.points {
            let s = at.t + at.y * at.y + at.z / 2.0;
            let exact = -(at.x + g0) / (2.0 * c * s + g1);
            let roots = enumerate_roots(ev.relation(0), at, &p.policy);
            let rel = match roots.as_slice() {
                [r] => (r.root - exact).abs() / exact.abs().max(f64::MIN_POSITIVE),
                _ => f64::INFINITY,
            };
            worst = worst.max(rel);
            checked += 1;
        }
    }

    let mut deterministic = true;
    let mut names = Vec::new();
    for name in ["shock_n2.json", "general_unbalanced.json", "trivial_family.json", "single_seed.json", "affine.json"] {
        let run = || {
            let p = prepare(Scenario::load(&shipped(name)).unwrap());
            let (csv, _) = commands::sample(&p).unwrap();
            let verify = commands::verify(&p).unwrap();
            (csv, verify.report.to_string(), verify.passed)
        };
        let (a, b) = (run(), run());
        deterministic &= a == b && a.2;
        names.push(name.trim_end_matches(".json"));
    }
    Line {
        name: "7 affine roots and determinism",
        passed: worst <= 1e-12 && deterministic,
        detail: format!(
            "{checked} affine roots, max relative error {worst:.2e} (limit 1e-12); shipped {names:?} bit-identical and passing: {deterministic}"
        ),
    }
}

fn main() {
    let start = Instant::now();
    let runs: Vec<Run> = (0..SCENARIOS)
        .map(|k| {
            let prepared = prepare(random_scenario(k));
            let records = evaluate(&prepared);
            Run { prepared, records }
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let (negative, control) = negative_control();
    let mut lines = vec![
        seed_validity(&runs, elapsed),
        superposition(&runs),
        balance(&runs),
        negative,
    ];
    let mut all = runs;
    all.push(control);
    lines.push(expansion(&all));
    lines.push(certification(&all));
    lines.push(affine_and_determinism());

    let mut failed = 0;
    for l in &lines {
        println!("[{}] {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
        failed += usize::from(!l.passed);
    }
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
