//! Guard strengthening guided by preexpectations, the implementation
//! relation between programs, determinism checks and tie-breaking.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{check_states, cmp_guard, simplify_pred, CheckError};
use crate::ast::{DesugarError, Dir, Expectation, FiniteDomain, Pred, ProgState, Stmt};
use crate::parser::print_program;
use crate::wp::{wpre, Transformer, WpError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Wp(#[from] WpError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Desugar(#[from] DesugarError),
}

/// Strengthens every guarded choice of `c` so that a branch stays enabled
/// only where its preexpectation compares favourably (`dir`) with the other
/// branch's. Loop bodies are transformed against their own invariants.
pub fn trans(dir: Dir, t: Transformer, c: &Stmt, f: &Expectation) -> Result<Stmt, WpError> {
    rec(dir, t, &c.desugar()?, f)
}

/// Upper-bound pairing: `<=` with `dwp`.
pub fn dtrans(c: &Stmt, f: &Expectation) -> Result<Stmt, WpError> {
    trans(Dir::Le, Transformer::Dwp, c, f)
}

/// Lower-bound pairing: `>=` with `awp`.
pub fn atrans(c: &Stmt, f: &Expectation) -> Result<Stmt, WpError> {
    trans(Dir::Ge, Transformer::Awp, c, f)
}

fn rec(dir: Dir, t: Transformer, c: &Stmt, f: &Expectation) -> Result<Stmt, WpError> {
    Ok(match c {
        Stmt::Skip | Stmt::Assign(..) => c.clone(),
        Stmt::Seq(a, b) => {
            let mid = wpre(t, b, f)?;
            Stmt::seq(rec(dir, t, a, &mid)?, rec(dir, t, b, f)?)
        }
        Stmt::GChoice(g1, a, g2, b) => {
            let (wa, wb) = (wpre(t, a, f)?, wpre(t, b, f)?);
            let h1 = Pred::and(g1.clone(), Pred::implies(g2.clone(), cmp_guard(&wa, &wb, dir)));
            let h2 = Pred::and(g2.clone(), Pred::implies(g1.clone(), cmp_guard(&wb, &wa, dir)));
            Stmt::gchoice(h1, rec(dir, t, a, f)?, h2, rec(dir, t, b, f)?)
        }
        Stmt::PChoice(a, p, b) => Stmt::pchoice(rec(dir, t, a, f)?, p.clone(), rec(dir, t, b, f)?),
        Stmt::While(g, body, inv) => Stmt::while_loop(g.clone(), rec(dir, t, body, inv)?, inv.clone()),
        Stmt::IfElse(..) | Stmt::Uniform(..) | Stmt::Choice(..) => rec(dir, t, &c.desugar()?, f)?,
    })
}

/// Applies `simplify_pred` to every guard, for display. Semantics are
/// unchanged.
pub fn simplify_guards(c: &Stmt) -> Stmt {
    map_choices(c, &|g1, g2| (simplify_pred(g1), simplify_pred(g2)))
}

/// Left-biased tie-breaking: the first branch wins wherever both guards hold.
pub fn determinize(c: &Stmt) -> Stmt {
    map_choices(c, &|g1, g2| (g1.clone(), Pred::and(g2.clone(), Pred::not(g1.clone()))))
}

/// Right-biased tie-breaking: the second branch wins wherever both guards hold.
pub fn determinize_right(c: &Stmt) -> Stmt {
    map_choices(c, &|g1, g2| (Pred::and(g1.clone(), Pred::not(g2.clone())), g2.clone()))
}

fn map_choices(c: &Stmt, h: &dyn Fn(&Pred, &Pred) -> (Pred, Pred)) -> Stmt {
    let m = |s: &Stmt| map_choices(s, h);
    match c {
        Stmt::Skip | Stmt::Assign(..) | Stmt::Uniform(..) => c.clone(),
        Stmt::Seq(a, b) => Stmt::seq(m(a), m(b)),
        Stmt::GChoice(g1, a, g2, b) => {
            let (k1, k2) = h(g1, g2);
            Stmt::gchoice(k1, m(a), k2, m(b))
        }
        Stmt::PChoice(a, p, b) => Stmt::pchoice(m(a), p.clone(), m(b)),
        Stmt::While(g, body, inv) => Stmt::while_loop(g.clone(), m(body), inv.clone()),
        Stmt::IfElse(g, a, b) => Stmt::IfElse(g.clone(), Box::new(m(a)), Box::new(m(b))),
        Stmt::Choice(arms) => Stmt::Choice(arms.iter().map(|(g, s)| (g.clone(), m(s))).collect()),
    }
}

/// Where and why `C' ⊸ C` fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImplementsReport {
    pub holds: bool,
    /// Child positions from the root, 1-based, of the first mismatch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<ProgState>,
    pub sampled: bool,
}

impl ImplementsReport {
    fn ok(d: &FiniteDomain) -> Self {
        ImplementsReport { holds: true, locus: None, reason: None, counterexample: None, sampled: d.sampled() }
    }

    fn fail(d: &FiniteDomain, locus: &str, reason: String, counterexample: Option<ProgState>) -> Self {
        ImplementsReport {
            holds: false,
            locus: Some(if locus.is_empty() { "0".into() } else { locus.into() }),
            reason: Some(reason),
            counterexample,
            sampled: d.sampled(),
        }
    }
}

fn child(path: &str, i: usize) -> String {
    if path.is_empty() {
        i.to_string()
    } else {
        format!("{path}.{i}")
    }
}

/// Decides `imp ⊸ orig` relative to `d`: the programs agree up to guards of
/// guarded choices, each strengthened guard entails the original one, and
/// the strengthened guards still cover every state. Guard checks range over
/// the whole product domain since guards are evaluated at intermediate
/// states.
pub fn implements(imp: &Stmt, orig: &Stmt, d: &FiniteDomain) -> Result<ImplementsReport, TransformError> {
    let full = d.with_init(None);
    let (imp, orig) = (imp.desugar()?, orig.desugar()?);
    Ok(implements_rec(&imp, &orig, &full, "")?)
}

fn implements_rec(imp: &Stmt, orig: &Stmt, d: &FiniteDomain, path: &str) -> Result<ImplementsReport, CheckError> {
    let mismatch = |what: &str| {
        ImplementsReport::fail(
            d,
            path,
            format!("{what}: `{}` vs `{}`", one_line(imp), one_line(orig)),
            None,
        )
    };
    let pair = |a1: &Stmt, a2: &Stmt, b1: &Stmt, b2: &Stmt| -> Result<ImplementsReport, CheckError> {
        let left = implements_rec(a1, a2, d, &child(path, 1))?;
        if !left.holds {
            return Ok(left);
        }
        implements_rec(b1, b2, d, &child(path, 2))
    };
    match (imp, orig) {
        (Stmt::Skip, Stmt::Skip) => Ok(ImplementsReport::ok(d)),
        (Stmt::Assign(x, e), Stmt::Assign(y, g)) if x == y && e == g => Ok(ImplementsReport::ok(d)),
        (Stmt::Seq(a1, b1), Stmt::Seq(a2, b2)) => pair(a1, a2, b1, b2),
        (Stmt::PChoice(a1, p, b1), Stmt::PChoice(a2, q, b2)) if p == q => pair(a1, a2, b1, b2),
        (Stmt::While(g, b1, _), Stmt::While(h, b2, _)) if g == h => implements_rec(b1, b2, d, &child(path, 1)),
        (Stmt::GChoice(h1, a1, h2, b1), Stmt::GChoice(g1, a2, g2, b2)) => {
            let mut failure = None;
            check_states(d, |s| {
                let (k1, k2) = (h1.eval(s)?, h2.eval(s)?);
                let reason = if k1 && !g1.eval(s)? {
                    "first guard is not a strengthening"
                } else if k2 && !g2.eval(s)? {
                    "second guard is not a strengthening"
                } else if !k1 && !k2 {
                    "no branch is enabled"
                } else {
                    return Ok(true);
                };
                failure = Some(reason);
                Ok(false)
            })
            .map(|r| match (failure, r.counterexample) {
                (Some(reason), cex) => Some(ImplementsReport::fail(d, path, reason.into(), cex)),
                _ => None,
            })?
            .map_or_else(|| pair(a1, a2, b1, b2), Ok)
        }
        (Stmt::Assign(..), Stmt::Assign(..)) => Ok(mismatch("assignments differ")),
        (Stmt::PChoice(..), Stmt::PChoice(..)) => Ok(mismatch("probabilities differ")),
        (Stmt::While(..), Stmt::While(..)) => Ok(mismatch("loop guards differ")),
        _ => Ok(mismatch("statements differ")),
    }
}

fn one_line(s: &Stmt) -> String {
    print_program(s).split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminismReport {
    pub holds: bool,
    /// Location of the first guarded choice with overlapping guards.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locus: Option<String>,
    /// A state satisfying both of its guards.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ProgState>,
}

/// True when no guarded choice of `c` has a state of `d` (whole product)
/// satisfying both guards.
pub fn is_deterministic(c: &Stmt, d: &FiniteDomain) -> Result<DeterminismReport, TransformError> {
    let full = d.with_init(None);
    Ok(determinism_rec(&c.desugar()?, &full, "")?)
}

fn determinism_rec(c: &Stmt, d: &FiniteDomain, path: &str) -> Result<DeterminismReport, CheckError> {
    let both = |a: &Stmt, b: &Stmt| -> Result<DeterminismReport, CheckError> {
        let r = determinism_rec(a, d, &child(path, 1))?;
        if !r.holds {
            return Ok(r);
        }
        determinism_rec(b, d, &child(path, 2))
    };
    match c {
        Stmt::Skip | Stmt::Assign(..) | Stmt::Uniform(..) => Ok(DeterminismReport { holds: true, locus: None, witness: None }),
        Stmt::Seq(a, b) | Stmt::PChoice(a, _, b) => both(a, b),
        Stmt::While(_, body, _) => determinism_rec(body, d, &child(path, 1)),
        Stmt::GChoice(g1, a, g2, b) => {
            let r = check_states(d, |s| Ok(!(g1.eval(s)? && g2.eval(s)?)))?;
            if !r.holds {
                let locus = Some(if path.is_empty() { "0".into() } else { path.into() });
                return Ok(DeterminismReport { holds: false, locus, witness: r.counterexample });
            }
            both(a, b)
        }
        Stmt::IfElse(..) | Stmt::Choice(..) => unreachable!("programs are desugared first"),
    }
}

/// The enabling condition of each arm of a right-nested guarded choice with
/// `arity` arms, as produced by desugaring an n-ary `if ... fi`.
pub fn arm_guards(c: &Stmt, arity: usize) -> Option<Vec<(Pred, Stmt)>> {
    let mut out = Vec::with_capacity(arity);
    let mut context = Pred::True;
    let mut cur = c;
    while out.len() + 2 < arity {
        let Stmt::GChoice(g1, a, g2, rest) = cur else { return None };
        out.push((Pred::and(context.clone(), g1.clone()), (**a).clone()));
        context = Pred::and(context, g2.clone());
        cur = rest;
    }
    let Stmt::GChoice(g1, a, g2, b) = cur else { return None };
    out.push((Pred::and(context.clone(), g1.clone()), (**a).clone()));
    out.push((Pred::and(context, g2.clone()), (**b).clone()));
    Some(out)
}

#[cfg(test)]
mod tests;
