use super::*;
use crate::algebra::{pred_equiv, pred_valid};
use crate::ast::{rat, ProgState, Var};
use crate::parser::{parse_pred, parse_program, SourceFile};

fn fixture(src: &str) -> SourceFile {
    parse_program(src).unwrap()
}

fn st(pairs: &[(&str, i64)]) -> ProgState {
    ProgState::from_pairs(pairs.iter().map(|(n, v)| (*n, rat(*v))))
}

fn guards(c: &Stmt) -> (Pred, Pred) {
    match c {
        Stmt::GChoice(g1, _, g2, _) => (g1.clone(), g2.clone()),
        Stmt::Seq(a, _) => guards(a),
        other => panic!("no guarded choice at the head of {other:?}"),
    }
}

#[test]
fn choice_between_copies_picks_the_smaller() {
    let f = fixture(include_str!("../../fixtures/ex51.pgcl"));
    let c = dtrans(&f.program, f.post.as_ref().unwrap()).unwrap();
    let (g1, g2) = guards(&c);
    let full = f.domain.with_init(None);
    assert!(pred_equiv(&g1, &parse_pred("y <= z").unwrap(), &full).unwrap().holds);
    assert!(pred_equiv(&g2, &parse_pred("y >= z").unwrap(), &full).unwrap().holds);
    assert!(implements(&c, &f.program, &f.domain).unwrap().holds);
    let simplified = simplify_guards(&c);
    assert_eq!(guards(&simplified).0, simplify_pred(&g1));
}

#[test]
fn both_tamings_implement_the_original() {
    let c = fixture(include_str!("../../fixtures/ex41_c.pgcl"));
    let c1 = fixture(include_str!("../../fixtures/ex41_c1.pgcl"));
    let c2 = fixture(include_str!("../../fixtures/ex41_c2.pgcl"));
    for imp in [&c1, &c2] {
        assert!(implements(&imp.program, &c.program, &c.domain).unwrap().holds);
    }
    let back = implements(&c.program, &c1.program, &c.domain).unwrap();
    assert!(!back.holds);
    assert_eq!(back.locus.as_deref(), Some("1"));
    assert!(is_deterministic(&c1.program, &c.domain).unwrap().holds);
    let nd = is_deterministic(&c2.program, &c.domain).unwrap();
    assert!(!nd.holds);
    let w = nd.witness.unwrap();
    assert_eq!(w.get(&Var::new("y")), w.get(&Var::new("z")));
}

#[test]
fn structural_mismatch_is_located() {
    let c = fixture(include_str!("../../fixtures/fig5.pgcl"));
    let other = fixture(include_str!("../../fixtures/fig6.pgcl"));
    let r = implements(&other.program, &c.program, &c.domain).unwrap();
    assert!(!r.holds);
    assert!(r.reason.unwrap().contains("differ"));
}

#[test]
fn monty_hall_never_keeps_the_door() {
    let f = fixture(include_str!("../../fixtures/monty_hall.pgcl"));
    let c = atrans(&f.program, f.post.as_ref().unwrap()).unwrap();
    let (_, keep) = guards(&c);
    let full = f.domain.with_init(None);
    let never = pred_valid(&Pred::not(keep), &full).unwrap();
    assert!(never.holds);
    assert!(implements(&c, &f.program, &f.domain).unwrap().holds);
}

#[test]
fn squaring_is_chosen_below_the_golden_ratio() {
    let f = fixture(include_str!("../../fixtures/ex46.pgcl"));
    let c = dtrans(&f.program, f.post.as_ref().unwrap()).unwrap();
    let Stmt::While(_, body, _) = &c else { panic!("expected a loop") };
    let Stmt::PChoice(_, _, choice) = &**body else { panic!("expected a coin flip") };
    let (square, inc) = guards(choice);
    for x in 0..=10 {
        let s = st(&[("c", 1), ("x", x)]);
        assert_eq!(square.eval(&s).unwrap(), x <= 1, "x = {x}");
        assert_eq!(inc.eval(&s).unwrap(), x >= 2, "x = {x}");
    }
}

#[test]
fn gambling_guards_compare_exact_losing_probabilities() {
    let f = fixture(include_str!("../../fixtures/gamb.pgcl"));
    let c = dtrans(&f.program, f.post.as_ref().unwrap()).unwrap();
    let Stmt::While(_, body, _) = &c else { panic!("expected a loop") };
    let (p_coin, q_coin) = guards(body);
    let running = f.domain.with_init(Some(parse_pred("c < N && a = 0").unwrap()));
    let want_p = parse_pred("q <= p * p || q <= p && (N - c) % 2 = 1").unwrap();
    let want_q = parse_pred("p <= q || p * p <= q && N - c >= 2").unwrap();
    assert!(pred_equiv(&p_coin, &want_p, &running).unwrap().holds);
    assert!(pred_equiv(&q_coin, &want_q, &running).unwrap().holds);
}

#[test]
fn determinizations_are_deterministic_implementations() {
    let f = fixture(include_str!("../../fixtures/nim.pgcl"));
    let c = atrans(&f.program, f.post.as_ref().unwrap()).unwrap();
    assert!(implements(&c, &f.program, &f.domain).unwrap().holds);
    for det in [determinize(&c), determinize_right(&c)] {
        assert!(implements(&det, &c, &f.domain).unwrap().holds);
        assert!(is_deterministic(&det, &f.domain).unwrap().holds);
    }
}

#[test]
fn arm_guards_follow_the_desugaring() {
    let f = fixture(include_str!("../../fixtures/nim.pgcl"));
    let Stmt::While(_, body, _) = &f.program.desugar().unwrap() else { panic!("expected a loop") };
    let Stmt::Seq(choice, _) = &**body else { panic!("expected a sequence") };
    let Stmt::GChoice(_, _, _, p2) = &**choice else { panic!("expected a choice") };
    let arms = arm_guards(p2, 3).unwrap();
    assert_eq!(arms.len(), 3);
    let full = f.domain.with_init(None);
    for (g, _) in &arms {
        assert!(pred_valid(g, &full).unwrap().holds);
    }
}
