//! Algebraic laws of evaluation, substitution, simplification and the
//! expectation transformers.

mod common;

use proptest::prelude::*;

use pgcl_core::algebra::simplify;
use pgcl_core::ast::{rat, ratio, ArithExpr, CmpOp, Expectation, Pred, ProgState, Value, Var};
use pgcl_core::gen::random_case;
use pgcl_core::parser::{parse_stmt, print_program};
use pgcl_core::wp::{wp_exact, Transformer};

const VARS: [&str; 2] = ["x", "y"];

fn arith() -> impl Strategy<Value = ArithExpr> {
    let leaf = prop_oneof![
        (0i64..4).prop_map(|n| ArithExpr::Const(rat(n))),
        (1i64..4, 2i64..4).prop_map(|(n, d)| ArithExpr::Const(ratio(n, d))),
        prop::sample::select(&VARS[..]).prop_map(|v| ArithExpr::Var(Var::new(v))),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithExpr::Monus(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithExpr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| ArithExpr::Floor(Box::new(a))),
            inner.prop_map(|a| ArithExpr::Ceil(Box::new(a))),
        ]
    })
}

fn pred() -> impl Strategy<Value = Pred> {
    let op = prop::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]);
    let leaf = prop_oneof![Just(Pred::True), Just(Pred::False), (arith(), op, arith()).prop_map(|(a, o, b)| Pred::Cmp(a, o, b))];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::or(a, b)),
            inner.prop_map(Pred::not),
        ]
    })
}

fn expectation() -> impl Strategy<Value = Expectation> {
    let leaf = prop_oneof![
        4 => arith().prop_map(|a| Expectation::from(&a)),
        1 => Just(Expectation::Infinity),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expectation::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expectation::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expectation::min(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expectation::max(a, b)),
            (pred(), inner.clone()).prop_map(|(p, a)| Expectation::mul(Expectation::iverson(p), a)),
            (pred(), inner).prop_map(|(p, a)| Expectation::imp(p, a)),
        ]
    })
}

fn state() -> impl Strategy<Value = ProgState> {
    (0i64..4, 0i64..4).prop_map(|(x, y)| common::state(&[("x", x), ("y", y)]))
}

proptest! {
    #[test]
    fn substitution_matches_updated_state(f in expectation(), e in arith(), s in state()) {
        let x = Var::new("x");
        if let (Ok(v), Ok(lhs)) = (e.eval(&s), f.subst(&x, &e).eval(&s)) {
            prop_assert_eq!(lhs, f.eval(&s.with(&x, v)).unwrap());
        }
    }

    #[test]
    fn min_and_max_evaluate_pointwise(a in expectation(), b in expectation(), s in state()) {
        if let (Ok(va), Ok(vb)) = (a.eval(&s), b.eval(&s)) {
            prop_assert_eq!(Expectation::min(a.clone(), b.clone()).eval(&s).unwrap(), va.minimum(&vb));
            prop_assert_eq!(Expectation::max(a, b).eval(&s).unwrap(), va.maximum(&vb));
        }
    }

    #[test]
    fn zero_annihilates_infinity(f in expectation(), s in state()) {
        let zero_inf = Expectation::mul(Expectation::zero(), Expectation::Infinity);
        prop_assert_eq!(zero_inf.eval(&s).unwrap(), Value::zero());
        if f.eval(&s).is_ok() {
            let absorbed = Expectation::mul(Expectation::iverson(Pred::False), f);
            prop_assert_eq!(absorbed.eval(&s).unwrap(), Value::zero());
        }
    }

    #[test]
    fn simplification_preserves_values(f in expectation(), s in state()) {
        if let Ok(v) = f.eval(&s) {
            prop_assert_eq!(simplify(&f).eval(&s).unwrap(), v);
        }
    }

    #[test]
    fn simplification_is_idempotent_in_value(f in expectation(), s in state()) {
        let once = simplify(&f);
        if let Ok(v) = once.eval(&s) {
            prop_assert_eq!(simplify(&once).eval(&s).unwrap(), v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transformers_are_monotone(seed in any::<u64>(), bump in 0i64..3) {
        let case = random_case(seed);
        let g = Expectation::add(case.post.clone(), Expectation::int(bump));
        for t in [Transformer::Dwp, Transformer::Awp] {
            let (wf, wg) = (wp_exact(t, &case.program, &case.post).unwrap(), wp_exact(t, &case.program, &g).unwrap());
            for s in case.domain.states() {
                prop_assert!(wf.eval(&s).unwrap() <= wg.eval(&s).unwrap(), "{t:?} at {s}");
            }
        }
    }

    #[test]
    fn transformers_are_feasible(seed in any::<u64>()) {
        let case = random_case(seed);
        for t in [Transformer::Dwp, Transformer::Awp] {
            let zero = wp_exact(t, &case.program, &Expectation::zero()).unwrap();
            let one = wp_exact(t, &case.program, &Expectation::one()).unwrap();
            for s in case.domain.states() {
                prop_assert_eq!(zero.eval(&s).unwrap(), Value::zero());
                prop_assert_eq!(one.eval(&s).unwrap(), Value::one());
            }
        }
    }

    #[test]
    fn demonic_is_below_angelic(seed in any::<u64>()) {
        let case = random_case(seed);
        let lo = wp_exact(Transformer::Dwp, &case.program, &case.post).unwrap();
        let hi = wp_exact(Transformer::Awp, &case.program, &case.post).unwrap();
        for s in case.domain.states() {
            prop_assert!(lo.eval(&s).unwrap() <= hi.eval(&s).unwrap(), "at {s}");
        }
    }

    #[test]
    fn generated_programs_print_and_parse_back(seed in any::<u64>()) {
        let case = random_case(seed);
        let text = print_program(&case.program);
        prop_assert_eq!(parse_stmt(&text).unwrap(), case.program, "{}", text);
    }
}

#[test]
fn fixtures_print_and_parse_back() {
    for (name, file) in common::all_fixtures() {
        let text = print_program(&file.program);
        assert_eq!(parse_stmt(&text).unwrap(), file.program, "{name}");
    }
}
