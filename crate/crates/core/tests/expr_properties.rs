use fracvim::expr::{equivalent, parse, Expr, NormalForm, Rational, UnaryOp};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => Just(Expr::Var),
        1 => (-3i128..=3).prop_map(Expr::int),
        1 => (1i128..=5, 2i128..=4).prop_map(|(n, d)| Expr::Rational(Rational::new(n, d))),
        1 => Just(parse("pi").unwrap()),
    ]
}

/// Smooth on [-2, 2] apart from isolated poles of `/`, which the sampler skips.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 0i128..=3).prop_map(|(a, k)| Expr::pow(a, Expr::int(k))),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Cos, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Tanh, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Exp, Expr::unary(UnaryOp::Sin, a))),
            inner.prop_map(|a| Expr::div(a, parse("2 + cos(x)").unwrap())),
        ]
    })
}

fn same(a: &Expr, b: &Expr) -> bool {
    equivalent(a, b, 32, 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_is_linear(a in smooth_expr(), b in smooth_expr()) {
        let lhs = Expr::add(a.clone(), b.clone()).differentiate(1).unwrap();
        let rhs = Expr::add(a.differentiate(1).unwrap(), b.differentiate(1).unwrap());
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn product_rule(a in smooth_expr(), b in smooth_expr()) {
        let lhs = Expr::mul(a.clone(), b.clone()).differentiate(1).unwrap();
        let rhs = Expr::add(
            Expr::mul(a.differentiate(1).unwrap(), b.clone()),
            Expr::mul(a, b.differentiate(1).unwrap()),
        );
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn simplify_preserves_value(e in smooth_expr()) {
        prop_assert!(same(&e, &e.simplify()));
    }

    #[test]
    fn print_then_parse_preserves_value(e in smooth_expr()) {
        let printed = e.to_string();
        let reparsed = parse(&printed).unwrap();
        prop_assert!(same(&e, &reparsed), "{}", printed);
        let simplified = e.simplify().to_string();
        prop_assert!(same(&e, &parse(&simplified).unwrap()), "{}", simplified);
    }

    #[test]
    fn symbolic_derivative_matches_central_difference(e in smooth_expr()) {
        let d = e.differentiate(1).unwrap();
        let h = 1e-5;
        for k in 0..16 {
            let x = -1.0 + 2.0 * (k as f64 + 0.5) / 16.0;
            let (Ok(plus), Ok(minus), Ok(exact)) = (e.evaluate(x + h), e.evaluate(x - h), d.evaluate(x)) else {
                continue;
            };
            let fd = (plus - minus) / (2.0 * h);
            prop_assert!((exact - fd).abs() <= 1e-5 * (1.0 + exact.abs()), "{} at {}: {} vs {}", e, x, exact, fd);
        }
    }

    #[test]
    fn normal_form_derivative_agrees_with_tree_derivative(e in smooth_expr()) {
        let tree = e.differentiate(2).unwrap();
        let nf = NormalForm::from_expr(&e).derivative_n(2).unwrap().to_expr();
        prop_assert!(same(&tree, &nf));
    }
}

#[test]
fn spec_equivalence_examples() {
    let p = |s| parse(s).unwrap();
    assert!(equivalent(&p("(x+1)^2"), &p("x^2+2*x+1"), 32, 1e-9).unwrap());
    assert!(equivalent(&p("sin(2*x)"), &p("2*sin(x)*cos(x)"), 32, 1e-9).unwrap());
    assert!(!equivalent(&p("x"), &p("x+1e-3"), 32, 1e-9).unwrap());
}
