use pg_core::{parse_expr, Expr};
use proptest::prelude::*;

const DIM: usize = 3;

fn polynomial() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3.0f64..3.0).prop_map(|c| Expr::constant((c * 100.0).round() / 100.0)),
        (0..DIM).prop_map(Expr::coord),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_all),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul_all),
            inner.clone().prop_map(|e| -e),
            (inner, 2i32..4).prop_map(|(e, n)| e.powi(n)),
        ]
    })
}

fn smooth() -> impl Strategy<Value = Expr> {
    polynomial().prop_flat_map(|p| {
        prop_oneof![
            Just(p.clone()),
            Just(p.sin()),
            Just(p.cos() * Expr::coord(0)),
            Just(p.sin().exp()),
            Just(p.clone().div_expr(&(Expr::constant(2.0) + Expr::coord(1).powi(2)))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, DIM)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn derivative_matches_central_difference(e in polynomial(), p in point(), k in 0..DIM) {
        let h = 1e-6;
        let exact = e.d(k).eval_at(&p).unwrap();
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus[k] += h;
        minus[k] -= h;
        let fd = (e.eval_at(&plus).unwrap() - e.eval_at(&minus).unwrap()) / (2.0 * h);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "fd {fd} exact {exact} for {e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(e in smooth()) {
        let printed = e.to_string();
        let reparsed = parse_expr(&printed, DIM, false).unwrap();
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn reparsed_tree_evaluates_identically(e in smooth(), p in point()) {
        let reparsed = parse_expr(&e.to_string(), DIM, false).unwrap();
        let (a, b) = (e.eval_at(&p).unwrap(), reparsed.eval_at(&p).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn mixed_partials_commute(e in smooth(), p in point(), i in 0..DIM, j in 0..DIM) {
        let a = e.d(i).d(j).eval_at(&p).unwrap();
        let b = e.d(j).d(i).eval_at(&p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn evaluation_is_deterministic(e in smooth(), p in point()) {
        prop_assert_eq!(e.eval_at(&p).unwrap().to_bits(), e.eval_at(&p).unwrap().to_bits());
    }
}
