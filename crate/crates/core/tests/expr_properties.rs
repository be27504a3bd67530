use ghe_core::expr::{differentiate, parse, Expr};
use proptest::prelude::*;
use proptest::test_runner::Config;

const VARS: [&str; 2] = ["p", "y"];

// Source text of a random expression of depth at most `depth`. Division,
// log and sqrt get arguments bounded away from their singular sets so the
// finite-difference reference stays meaningful.
fn source(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        (-3.0..3.0f64).prop_map(|c| format!("{c:.3}")),
        (1u32..4).prop_map(|k| k.to_string()),
        Just("p".to_string()),
        Just("y".to_string()),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (2 + sin({b})))")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("(1.5 + cos({a}))^0.5")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("tanh({a})")),
            inner.clone().prop_map(|a| format!("exp(tanh({a}))")),
            inner.clone().prop_map(|a| format!("log(1 + ({a})^2)")),
            inner.prop_map(|a| format!("sqrt(2 + sin({a}))")),
        ]
    })
    .boxed()
}

fn eval(e: &Expr, p: f64, y: f64) -> Option<f64> {
    e.eval(&[("p", p), ("y", y)]).ok()
}

fn richardson(f: impl Fn(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    Some((8.0 * (f(x + h)? - f(x - h)?) - (f(x + 2.0 * h)? - f(x - 2.0 * h)?)) / (12.0 * h))
}

proptest! {
    #![proptest_config(Config::with_cases(1000))]

    #[test]
    fn symbolic_derivative_matches_finite_differences(
        src in source(6), p in -2.0..2.0f64, y in -2.0..2.0f64, wrt in 0usize..2,
    ) {
        let e = parse(&src, &VARS).unwrap();
        let d = differentiate(&e, VARS[wrt]);
        let Some(value) = eval(&e, p, y) else { return Ok(()) };
        prop_assume!(value.abs() < 1e6);
        let Some(symbolic) = eval(&d, p, y) else { return Ok(()) };
        let fd = if wrt == 0 {
            richardson(|u| eval(&e, u, y), p, 1e-5)
        } else {
            richardson(|u| eval(&e, p, u), y, 1e-5)
        };
        let Some(fd) = fd else { return Ok(()) };
        prop_assert!(
            (symbolic - fd).abs() <= 1e-6 * (1.0 + symbolic.abs()),
            "{src} d/d{}: symbolic {symbolic}, fd {fd}", VARS[wrt]
        );
    }

    #[test]
    fn printed_form_reparses_to_the_same_function(
        src in source(6), p in -2.0..2.0f64, y in -2.0..2.0f64,
    ) {
        let e = parse(&src, &VARS).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, &VARS).unwrap();
        prop_assert_eq!(&again.to_string(), &printed);
        match (eval(&e, p, y), eval(&again, p, y)) {
            (Some(a), Some(b)) => prop_assert_eq!(a.to_bits(), b.to_bits(), "{}", printed),
            (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
        }
    }

    #[test]
    fn differentiation_is_linear(
        s1 in source(4), s2 in source(4), a in -3.0..3.0f64, b in -3.0..3.0f64,
        p in -2.0..2.0f64, y in -2.0..2.0f64,
    ) {
        let combined = parse(&format!("{a} * ({s1}) + {b} * ({s2})"), &VARS).unwrap();
        let lhs = eval(&differentiate(&combined, "p"), p, y);
        let d1 = eval(&differentiate(&parse(&s1, &VARS).unwrap(), "p"), p, y);
        let d2 = eval(&differentiate(&parse(&s2, &VARS).unwrap(), "p"), p, y);
        if let (Some(lhs), Some(d1), Some(d2)) = (lhs, d1, d2) {
            let rhs = a * d1 + b * d2;
            let scale = 1.0 + (a * d1).abs() + (b * d2).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn evaluation_examples() {
    assert_eq!(parse("p^2/2", &["p"]).unwrap().eval(&[("p", 3.0)]).unwrap(), 4.5);
    assert_eq!(parse("exp(p)", &["p"]).unwrap().eval(&[("p", 0.0)]).unwrap(), 1.0);
    assert!(parse("1/p", &["p"]).unwrap().eval(&[("p", 0.0)]).is_err());
}
