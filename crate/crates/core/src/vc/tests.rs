use super::*;
use crate::ast::{rat, ProgState};
use crate::mdp::EscapePolicy;
use crate::parser::{parse_expectation, parse_pred, parse_program, parse_stmt, SourceFile};

fn fixture(src: &str) -> SourceFile {
    parse_program(src).unwrap()
}

fn truncating() -> VcOptions {
    VcOptions { build: BuildOptions { escape: EscapePolicy::Truncate, ..BuildOptions::default() }, ..VcOptions::default() }
}

fn run(provider: VcProviderId, file: &SourceFile, opts: &VcOptions) -> VcReport {
    vc_check(provider, provider.transformer(), &file.program, file.post.as_ref().unwrap(), &file.domain, opts).unwrap()
}

fn st(pairs: &[(&str, i64)]) -> ProgState {
    ProgState::from_pairs(pairs.iter().map(|(n, v)| (*n, rat(*v))))
}

#[test]
fn superinvariant_of_squaring_loop() {
    let f = fixture(include_str!("../../fixtures/ex46.pgcl"));
    let r = run(VcProviderId::Superinv, &f, &VcOptions::default());
    assert!(r.verdict);
    assert_eq!(r.loops.len(), 1);
    assert_eq!(r.loops[0].inequality.states_checked, 22);
}

#[test]
fn tampered_superinvariant_fails_at_first_violation() {
    let f = fixture(include_str!("../../fixtures/ex46_tampered.pgcl"));
    let r = run(VcProviderId::Superinv, &f, &VcOptions::default());
    assert!(!r.verdict);
    assert_eq!(r.first_counterexample(), Some(&st(&[("c", 1), ("x", 2)])));
}

#[test]
fn nested_loops_both_checked() {
    let f = fixture(include_str!("../../fixtures/nested.pgcl"));
    let r = run(VcProviderId::Superinv, &f, &VcOptions::default());
    assert!(r.verdict, "{r:?}");
    let locations: Vec<_> = r.loops.iter().map(|l| l.location.as_str()).collect();
    assert_eq!(locations, ["2.2", "2.2.1.2.2.2"]);
    assert!(r.warnings.iter().any(|w| w.contains("sample")));
}

#[test]
fn sequence_condition_splits() {
    let f = fixture(include_str!("../../fixtures/nested.pgcl"));
    let post = f.post.clone().unwrap();
    let Stmt::Seq(first, rest) = f.program.clone() else { panic!("sequence expected") };
    let whole = vc_check(VcProviderId::Superinv, Transformer::Dwp, &f.program, &post, &f.domain, &VcOptions::default())
        .unwrap();
    let mid = wpre_raw(Transformer::Dwp, &rest, &post).unwrap();
    let left = vc_check(VcProviderId::Superinv, Transformer::Dwp, &first, &mid, &f.domain, &VcOptions::default()).unwrap();
    let right = vc_check(VcProviderId::Superinv, Transformer::Dwp, &rest, &post, &f.domain, &VcOptions::default()).unwrap();
    assert!(left.loops.is_empty());
    assert_eq!(whole.verdict, left.verdict && right.verdict);
    assert_eq!(whole.loops.len(), right.loops.len());
}

#[test]
fn nim_subinvariant_with_termination() {
    let f = fixture(include_str!("../../fixtures/nim.pgcl"));
    let r = run(VcProviderId::DastSubinv, &f, &VcOptions::default());
    assert!(r.verdict, "{r:?}");
    assert_eq!(r.loops[0].bound, Some(Value::one()));
    assert!(r.loops[0].dast.as_ref().unwrap().holds);
}

#[test]
fn nim_tampered_fails() {
    let f = fixture(include_str!("../../fixtures/nim_tampered.pgcl"));
    let r = run(VcProviderId::DastSubinv, &f, &VcOptions::default());
    assert!(!r.verdict);
    let cex = r.first_counterexample().unwrap();
    assert_eq!(cex.get(&"turn".into()), Some(&rat(1)));
}

#[test]
fn non_terminating_loop_fails_dast() {
    let f = fixture(include_str!("../../fixtures/while_skip.pgcl"));
    let r = run(VcProviderId::DastSubinv, &f, &VcOptions::default());
    assert!(r.loops[0].inequality.holds);
    assert!(!r.loops[0].dast.as_ref().unwrap().holds);
    assert!(!r.verdict);
    assert_eq!(r.first_counterexample(), Some(&st(&[("c", 0)])));
}

#[test]
fn loop_with_false_guard_passes_everything() {
    let f = fixture("domain x: 0..3; post x; program { while false inv x { x := x + 1 } }");
    for p in [VcProviderId::Superinv, VcProviderId::DastSubinv, VcProviderId::DpastSubinv] {
        assert!(run(p, &f, &VcOptions::default()).verdict, "{p:?}");
    }
}

#[test]
fn optional_stopping_example() {
    let f = fixture(include_str!("../../fixtures/stopping.pgcl"));
    let r = run(VcProviderId::DpastSubinv, &f, &truncating());
    assert!(r.verdict, "{r:?}");
    let stop = r.loops[0].stopping.as_ref().unwrap();
    assert_eq!(stop.cdb.bound, Some(Value::int(2)));
    assert!(r.warnings.iter().any(|w| w.contains("cut off")));
}

#[test]
fn cdb_of_skip_is_zero() {
    let d = fixture("domain x: 0..3; program { skip }").domain;
    let inv = parse_expectation("x + 1").unwrap();
    let r = check_cdb(&parse_pred("x < 2").unwrap(), &Stmt::Skip, &inv, &d, &VcOptions::default()).unwrap();
    assert_eq!(r.bound, Some(Value::zero()));
}

#[test]
fn cdb_of_bodies_with_loops_uses_the_model() {
    let d = fixture("domain x: 0..3; program { skip }").domain;
    let inv = parse_expectation("x + 1").unwrap();
    let guard = parse_pred("x < 3").unwrap();
    let flat = parse_stmt("{ x := x + 1 } [1/2] { skip }").unwrap();
    let looped = parse_stmt("{ x := x + 1 } [1/2] { skip }; while false inv x { skip }").unwrap();
    let opts = VcOptions::default();
    let a = check_cdb(&guard, &flat, &inv, &d, &opts).unwrap();
    let b = check_cdb(&guard, &looped, &inv, &d, &opts).unwrap();
    assert!(!a.via_model && b.via_model);
    assert_eq!(a.bound, Some(Value::Finite(rat(1) / rat(2))));
    assert_eq!(a.bound, b.bound);
}

#[test]
fn shape_mismatch_is_reported() {
    let d = fixture("domain c: 0..1; domain x: 0..3; program { skip }").domain;
    let inv = parse_expectation("x + 1").unwrap();
    let r = check_shape(&parse_pred("c = 1").unwrap(), &inv, &parse_expectation("x").unwrap(), &d).unwrap();
    assert!(!r.holds);
    assert_eq!(r.counterexample, Some(st(&[("c", 0), ("x", 0)])));
}

#[test]
fn gamb2_payoff_subinvariant() {
    let f = fixture(include_str!("../../fixtures/gamb2.pgcl"));
    let r = run(VcProviderId::DpastSubinv, &f, &truncating());
    assert!(r.verdict, "{r:?}");
    let cdb = r.loops[0].stopping.as_ref().unwrap().cdb.bound.clone().unwrap();
    // The largest payoff bound over the samples is 4 (q = 2/3), so the
    // one-step change is at most 2 + 4.
    assert!(cdb <= Value::int(6));
}

#[test]
fn pairing_mismatch_is_an_error() {
    let c = parse_stmt("skip").unwrap();
    let d = fixture("domain x: 0..1; program { skip }").domain;
    let e = vc_check(VcProviderId::Superinv, Transformer::Awp, &c, &Expectation::zero(), &d, &VcOptions::default());
    assert!(matches!(e, Err(VcError::Pairing { .. })));
}

#[test]
fn threshold_check() {
    let f = fixture(include_str!("../../fixtures/ex46.pgcl"));
    let r = check_threshold(Transformer::Dwp, &f.program, f.post.as_ref().unwrap(), f.threshold.as_ref().unwrap(), &f.domain)
        .unwrap();
    assert!(r.holds);
}
