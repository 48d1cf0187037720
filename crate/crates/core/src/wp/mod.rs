//! Weakest preexpectation transformers: demonic (`dwp`) and angelic (`awp`)
//! resolution of nondeterminism, exact on loop-free programs and
//! invariant-based (`T*`) on programs with annotated loops.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::simplify;
use crate::ast::{fmt_rat, ArithExpr, DesugarError, EvalError, Expectation, FiniteDomain, Pred, ProgState, Stmt, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Transformer {
    /// Minimizes over resolutions of nondeterminism.
    Dwp,
    /// Maximizes over resolutions of nondeterminism.
    Awp,
}

impl Transformer {
    pub fn name(self) -> &'static str {
        match self {
            Transformer::Dwp => "dwp",
            Transformer::Awp => "awp",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WpError {
    #[error("program contains a loop; use the invariant-based transformer")]
    LoopPresent,
    #[error(transparent)]
    Desugar(#[from] DesugarError),
    #[error("probability {expr} evaluates to {value} at {state}, outside [0, 1]")]
    ProbabilityRange { expr: String, value: String, state: ProgState },
    #[error("evaluation failed at {state}: {source}")]
    Eval { state: ProgState, source: EvalError },
    #[error("probability {expr} cannot be evaluated at {state}: {source}")]
    ProbabilityEval { expr: String, state: ProgState, source: EvalError },
}

fn one_minus(p: &ArithExpr) -> Expectation {
    Expectation::monus(Expectation::one(), Expectation::from(p))
}

/// Recursion options: whether loops contribute their invariant, and whether
/// intermediate results are simplified as they are built.
#[derive(Clone, Copy)]
struct RecMode {
    loops: bool,
    eager: bool,
}

fn rec(t: Transformer, c: &Stmt, f: Expectation, m: RecMode) -> Result<Expectation, WpError> {
    let e = rec_node(t, c, f, m)?;
    Ok(if m.eager && !matches!(c, Stmt::Seq(..) | Stmt::Skip) { simplify(&e) } else { e })
}

fn rec_node(t: Transformer, c: &Stmt, f: Expectation, m: RecMode) -> Result<Expectation, WpError> {
    Ok(match c {
        Stmt::Skip => f,
        Stmt::Assign(x, e) => f.subst(x, e),
        Stmt::Seq(a, b) => {
            let g = rec(t, b, f, m)?;
            rec(t, a, g, m)?
        }
        Stmt::GChoice(g1, a, g2, b) => {
            let fa = rec(t, a, f.clone(), m)?;
            let fb = rec(t, b, f, m)?;
            match t {
                Transformer::Dwp => {
                    Expectation::min(Expectation::imp(g1.clone(), fa), Expectation::imp(g2.clone(), fb))
                }
                Transformer::Awp => Expectation::max(
                    Expectation::mul(Expectation::iverson(g1.clone()), fa),
                    Expectation::mul(Expectation::iverson(g2.clone()), fb),
                ),
            }
        }
        Stmt::PChoice(a, p, b) => {
            let fa = rec(t, a, f.clone(), m)?;
            let fb = rec(t, b, f, m)?;
            Expectation::add(
                Expectation::mul(Expectation::from(p), fa),
                Expectation::mul(one_minus(p), fb),
            )
        }
        Stmt::While(_, _, inv) if m.loops => inv.clone(),
        Stmt::While(..) => return Err(WpError::LoopPresent),
        Stmt::IfElse(..) | Stmt::Uniform(..) | Stmt::Choice(..) => rec(t, &c.desugar()?, f, m)?,
    })
}

/// `T*` without simplification: each loop contributes its invariant.
pub fn wpre_raw(t: Transformer, c: &Stmt, f: &Expectation) -> Result<Expectation, WpError> {
    rec(t, c, f.clone(), RecMode { loops: true, eager: false })
}

/// `T*`, simplified.
pub fn wpre(t: Transformer, c: &Stmt, f: &Expectation) -> Result<Expectation, WpError> {
    rec(t, c, f.clone(), RecMode { loops: true, eager: true })
}

/// The exact transformer on a loop-free program, simplified.
pub fn wp_exact(t: Transformer, c: &Stmt, f: &Expectation) -> Result<Expectation, WpError> {
    rec(t, c, f.clone(), RecMode { loops: false, eager: true })
}

/// `T*(c)(f)` at one state, evaluated by running the transformer rules
/// forward instead of building the symbolic preexpectation. Needed for
/// transformed programs, whose guards embed preexpectations and whose
/// symbolic `T*` grows too large to build.
pub fn wpre_at(t: Transformer, c: &Stmt, f: &Expectation, s: &ProgState) -> Result<Value, WpError> {
    run_at(t, &c.desugar()?, s, &mut |end| f.eval(end).map_err(|source| WpError::Eval { state: end.clone(), source }))
}

/// Evaluates `T*(c)(k)` at `s`, where the continuation `k` gives the value of
/// the postexpectation at a final state.
fn run_at(
    t: Transformer,
    c: &Stmt,
    s: &ProgState,
    k: &mut dyn FnMut(&ProgState) -> Result<Value, WpError>,
) -> Result<Value, WpError> {
    let err = |source| WpError::Eval { state: s.clone(), source };
    Ok(match c {
        Stmt::Skip => k(s)?,
        Stmt::Assign(x, e) => k(&s.with(x, e.eval(s).map_err(err)?))?,
        Stmt::Seq(a, b) => run_at(t, a, s, &mut |mid| run_at(t, b, mid, k))?,
        Stmt::GChoice(g1, a, g2, b) => {
            let (e1, e2) = (g1.eval(s).map_err(err)?, g2.eval(s).map_err(err)?);
            let fa = if e1 { run_at(t, a, s, k)? } else { Value::zero() };
            let fb = if e2 { run_at(t, b, s, k)? } else { Value::zero() };
            match t {
                Transformer::Dwp => {
                    let imp = |on: bool, v: Value| if on { v } else { Value::Infinity };
                    imp(e1, fa).minimum(&imp(e2, fb))
                }
                Transformer::Awp => fa.maximum(&fb),
            }
        }
        Stmt::PChoice(a, p, b) => {
            let pa = Expectation::from(p).eval(s).map_err(err)?;
            let pb = one_minus(p).eval(s).map_err(err)?;
            let fa = if pa.is_zero() { Value::zero() } else { run_at(t, a, s, k)? };
            let fb = if pb.is_zero() { Value::zero() } else { run_at(t, b, s, k)? };
            pa.mul(&fa).add(&pb.mul(&fb))
        }
        Stmt::While(_, _, inv) => inv.eval(s).map_err(err)?,
        Stmt::IfElse(..) | Stmt::Uniform(..) | Stmt::Choice(..) => run_at(t, &c.desugar()?, s, k)?,
    })
}

/// `[guard] * T*(body)(inv) + [!guard] * f` for a loop node.
pub fn char_functional(
    t: Transformer,
    guard: &Pred,
    body: &Stmt,
    inv: &Expectation,
    f: &Expectation,
) -> Result<Expectation, WpError> {
    let step = wpre_raw(t, body, inv)?;
    let e = Expectation::add(
        Expectation::mul(Expectation::iverson(guard.clone()), step),
        Expectation::mul(Expectation::iverson(Pred::not(guard.clone())), f.clone()),
    );
    Ok(simplify(&e))
}

fn collect_probs<'a>(c: &'a Stmt, out: &mut Vec<&'a ArithExpr>) {
    match c {
        Stmt::Skip | Stmt::Assign(..) | Stmt::Uniform(..) => {}
        Stmt::Seq(a, b) | Stmt::GChoice(_, a, _, b) | Stmt::IfElse(_, a, b) => {
            collect_probs(a, out);
            collect_probs(b, out);
        }
        Stmt::PChoice(a, p, b) => {
            out.push(p);
            collect_probs(a, out);
            collect_probs(b, out);
        }
        Stmt::While(_, body, _) => collect_probs(body, out),
        Stmt::Choice(arms) => arms.iter().for_each(|(_, s)| collect_probs(s, out)),
    }
}

/// Checks that every probability expression of `c` lies in `[0, 1]` at every
/// state of the domain (the init filter is ignored since intermediate states
/// need not be initial).
pub fn check_probabilities(c: &Stmt, d: &FiniteDomain) -> Result<(), WpError> {
    let mut probs = Vec::new();
    collect_probs(c, &mut probs);
    probs.sort();
    probs.dedup();
    if probs.is_empty() {
        return Ok(());
    }
    let zero = crate::ast::rat(0);
    let one = crate::ast::rat(1);
    for st in d.states() {
        for p in &probs {
            let expr = crate::parser::print_arith(p);
            let v = p
                .eval(&st)
                .map_err(|source| WpError::ProbabilityEval { expr: expr.clone(), state: st.clone(), source })?;
            if v < zero || v > one {
                return Err(WpError::ProbabilityRange { expr, value: fmt_rat(&v), state: st });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{eq_on_domain, le_on_domain};
    use crate::ast::{VarDomain, Value};
    use crate::parser::{parse_expectation, parse_stmt, print_expectation};

    fn e(s: &str) -> Expectation {
        parse_expectation(s).unwrap()
    }

    fn dom(vars: &[(&str, i64, i64)]) -> FiniteDomain {
        FiniteDomain::new(vars.iter().map(|(n, lo, hi)| VarDomain::range(n, *lo, *hi)).collect(), None).unwrap()
    }

    #[test]
    fn averaging_assignment() {
        let c = parse_stmt("{ y := y + 2 } [1/2] { y := y + 4 }; x := y").unwrap();
        let r = wp_exact(Transformer::Dwp, &c, &e("x")).unwrap();
        assert_eq!(print_expectation(&r), "y + 3");
    }

    #[test]
    fn demonic_and_angelic_choice() {
        let c = parse_stmt(
            "if true -> { y := 1 } [] true -> { y := 4 } fi; { y := y + 2 } [1/2] { y := y + 4 }; x := y",
        )
        .unwrap();
        assert_eq!(wp_exact(Transformer::Dwp, &c, &e("x")).unwrap(), Expectation::int(4));
        assert_eq!(wp_exact(Transformer::Awp, &c, &e("x")).unwrap(), Expectation::int(7));
    }

    #[test]
    fn minimum_of_two_initial_values() {
        let c = parse_stmt("if true -> { x := y } [] true -> { x := z } fi; { x := 0 } [1/2] { x := 2 * x }").unwrap();
        let r = wp_exact(Transformer::Dwp, &c, &e("x")).unwrap();
        let d = dom(&[("x", 0, 3), ("y", 0, 3), ("z", 0, 3)]);
        assert!(eq_on_domain(&r, &e("min(y, z)"), &d).unwrap().holds);
    }

    #[test]
    fn loops_need_invariants() {
        let c = parse_stmt("while c != 0 inv [c != 0] * (x + 1) + [c = 0] * x { c := 0 }").unwrap();
        assert_eq!(wp_exact(Transformer::Dwp, &c, &e("x")), Err(WpError::LoopPresent));
        assert_eq!(wpre(Transformer::Dwp, &c, &e("x")).unwrap(), simplify(&e("[c != 0] * (x + 1) + [c = 0] * x")));
        assert_eq!(wp_exact(Transformer::Awp, &Stmt::Skip, &e("x")).unwrap(), e("x"));
    }

    #[test]
    fn superinvariant_step() {
        let inv = e("[c != 0] * (x + 1) + [c = 0] * x");
        let body = parse_stmt("{ c := 0 } [1/2] { if true -> { x := x * x } [] true -> { x := x + 1 } fi }").unwrap();
        let guard = crate::parser::parse_pred("c != 0").unwrap();
        let phi = char_functional(Transformer::Dwp, &guard, &body, &inv, &e("x")).unwrap();
        let d = dom(&[("c", 0, 1), ("x", 0, 10)]);
        assert!(le_on_domain(&phi, &inv, &d).unwrap().holds);
        let trivial = char_functional(Transformer::Dwp, &Pred::False, &Stmt::Skip, &Expectation::zero(), &Expectation::zero());
        assert_eq!(trivial.unwrap(), Expectation::zero());
    }

    #[test]
    fn probability_range() {
        let d = dom(&[("y", 0, 3)]);
        let ok = parse_stmt("{ skip } [y / 3] { skip }").unwrap();
        assert!(check_probabilities(&ok, &d).is_ok());
        let bad = parse_stmt("{ skip } [y / 2] { skip }").unwrap();
        assert!(matches!(check_probabilities(&bad, &d), Err(WpError::ProbabilityRange { .. })));
        let v = wp_exact(Transformer::Dwp, &ok, &e("y")).unwrap();
        assert_eq!(v.eval(&ProgState::from_pairs([("y", crate::ast::rat(2))])).unwrap(), Value::int(2));
    }

    #[test]
    fn pointwise_evaluation_matches_the_symbolic_transformer() {
        let c = parse_stmt(
            "if x < 2 -> { x := x * x } [] true -> { { x := x + 1 } [x / 4] { y := 0 } } fi; \
             while y > 0 inv x + y { y := y - 1 }; if y = x { x := 1 } else { skip }",
        )
        .unwrap();
        let f = e("min(x, 3) + [y = 0] * 2");
        let d = dom(&[("x", 0, 4), ("y", 0, 2)]);
        for t in [Transformer::Dwp, Transformer::Awp] {
            let w = wpre(t, &c, &f).unwrap();
            for s in d.states() {
                assert_eq!(wpre_at(t, &c, &f, &s).unwrap(), w.eval(&s).unwrap(), "{t:?} at {s}");
            }
        }
        let stuck = parse_stmt("if false -> { skip } [] x > 9 -> { skip } fi").unwrap();
        let s = ProgState::from_pairs([("x", crate::ast::rat(0))]);
        assert_eq!(wpre_at(Transformer::Dwp, &stuck, &f, &s).unwrap(), Value::Infinity);
        assert_eq!(wpre_at(Transformer::Awp, &stuck, &f, &s).unwrap(), Value::zero());
    }
}
