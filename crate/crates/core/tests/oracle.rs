//! Symbolic transformers against the operational model on random loop-free
//! programs, plus the transformation laws on the same corpus.

mod common;

use pgcl_core::ast::{Expectation, FiniteDomain, Stmt, Value};
use pgcl_core::gen::{corpus, GenCase};
use pgcl_core::mdp::{build_mdp, expected_reward, restrict_by_program, BuildOptions, Mode, SolveOptions};
use pgcl_core::parser::print_program;
use pgcl_core::transform::{determinize, determinize_right, implements, is_deterministic, trans};
use pgcl_core::ast::Dir;
use pgcl_core::wp::{wp_exact, wpre, Transformer};

const SEED: u64 = 0x5eed;
const CASES: usize = 500;

fn pairs() -> [(Transformer, Mode, Dir); 2] {
    [(Transformer::Dwp, Mode::Min, Dir::Le), (Transformer::Awp, Mode::Max, Dir::Ge)]
}

fn oracle(c: &Stmt, d: &FiniteDomain, f: &Expectation, mode: Mode) -> Vec<(pgcl_core::ast::ProgState, Value)> {
    let m = build_mdp(c, d, &BuildOptions::default()).unwrap();
    let r = expected_reward(&m, f, mode, &SolveOptions::default()).unwrap();
    assert!(r.exact, "loop-free models are solved exactly");
    r.values
}

fn describe(case: &GenCase) -> String {
    format!("seed {}:\n{}\npost {:?}", case.seed, print_program(&case.program), case.post)
}

#[test]
fn wp_matches_the_model_exactly() {
    for case in corpus(SEED, CASES) {
        for (t, mode, _) in pairs() {
            let w = wp_exact(t, &case.program, &case.post).unwrap();
            for (s, v) in oracle(&case.program, &case.domain, &case.post, mode) {
                assert_eq!(w.eval(&s).unwrap(), v, "{t:?} at {s} for {}", describe(&case));
            }
        }
    }
}

#[test]
fn transformation_preserves_the_preexpectation() {
    for case in corpus(SEED, CASES) {
        for (t, mode, dir) in pairs() {
            let c = &case.program;
            let tamed = trans(dir, t, c, &case.post).unwrap();
            let imp = implements(&tamed, c, &case.domain).unwrap();
            assert!(imp.holds, "{imp:?} for {}", describe(&case));
            let target = wpre(t, c, &case.post).unwrap();
            for det in [determinize(&tamed), determinize_right(&tamed)] {
                assert!(is_deterministic(&det, &case.domain).unwrap().holds);
                for (s, v) in oracle(&det, &case.domain, &case.post, mode) {
                    assert_eq!(target.eval(&s).unwrap(), v, "{t:?} at {s} for {}", describe(&case));
                }
            }
        }
    }
}

#[test]
fn implementations_are_bounded_by_the_original() {
    for case in corpus(SEED, CASES) {
        let c = &case.program;
        let m = build_mdp(c, &case.domain, &BuildOptions::default()).unwrap();
        let tamed = trans(Dir::Le, Transformer::Dwp, c, &case.post).unwrap();
        let det = determinize_right(&tamed);
        let sub = restrict_by_program(&m, &det, &case.domain, &BuildOptions::default()).unwrap();
        let opts = SolveOptions::default();
        let lo = expected_reward(&m, &case.post, Mode::Min, &opts).unwrap().values;
        let hi = expected_reward(&m, &case.post, Mode::Max, &opts).unwrap().values;
        let mid = expected_reward(&sub.mdp, &case.post, Mode::Min, &opts).unwrap().values;
        for ((l, h), (s, v)) in lo.iter().zip(&hi).zip(&mid) {
            assert!(l.1 <= *v && *v <= h.1, "at {s} for {}", describe(&case));
        }
    }
}
