use thiserror::Error;

use super::{ratio, ArithExpr, Pred, Stmt, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesugarError {
    #[error("uniform assignment to `{0}` has no alternatives")]
    EmptyUniform(Var),
    #[error("guarded choice needs at least two arms")]
    ShortChoice,
}

fn disjunction(guards: &[Pred]) -> Pred {
    if guards.contains(&Pred::True) {
        return Pred::True;
    }
    let mut it = guards.iter().cloned();
    let first = it.next().unwrap_or(Pred::False);
    it.fold(first, Pred::or)
}

impl Stmt {
    /// Rewrites `if/else`, `uniform` and n-ary choice into core statements.
    pub fn desugar(&self) -> Result<Stmt, DesugarError> {
        Ok(match self {
            Stmt::Skip | Stmt::Assign(..) => self.clone(),
            Stmt::Seq(a, b) => Stmt::seq(a.desugar()?, b.desugar()?),
            Stmt::GChoice(g1, a, g2, b) => Stmt::gchoice(g1.clone(), a.desugar()?, g2.clone(), b.desugar()?),
            Stmt::PChoice(a, p, b) => Stmt::pchoice(a.desugar()?, p.clone(), b.desugar()?),
            Stmt::While(g, body, inv) => Stmt::while_loop(g.clone(), body.desugar()?, inv.clone()),
            Stmt::IfElse(g, a, b) => {
                Stmt::gchoice(g.clone(), a.desugar()?, Pred::not(g.clone()), b.desugar()?)
            }
            Stmt::Uniform(x, es) => uniform(x, es)?,
            Stmt::Choice(arms) => choice(arms)?,
        })
    }
}

fn uniform(x: &Var, es: &[ArithExpr]) -> Result<Stmt, DesugarError> {
    let n = es.len();
    match es {
        [] => Err(DesugarError::EmptyUniform(x.clone())),
        [e] => Ok(Stmt::Assign(x.clone(), e.clone())),
        [e, rest @ ..] => {
            let p = ArithExpr::Const(ratio(1, n as i64));
            Ok(Stmt::pchoice(Stmt::Assign(x.clone(), e.clone()), p, uniform(x, rest)?))
        }
    }
}

fn choice(arms: &[(Pred, Stmt)]) -> Result<Stmt, DesugarError> {
    match arms {
        [] | [_] => Err(DesugarError::ShortChoice),
        [(g1, s1), (g2, s2)] => Ok(Stmt::gchoice(g1.clone(), s1.desugar()?, g2.clone(), s2.desugar()?)),
        [(g1, s1), rest @ ..] => {
            let guards: Vec<Pred> = rest.iter().map(|(g, _)| g.clone()).collect();
            Ok(Stmt::gchoice(g1.clone(), s1.desugar()?, disjunction(&guards), choice(rest)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::CmpOp;

    fn inc(k: i64) -> ArithExpr {
        ArithExpr::add(ArithExpr::var("x"), ArithExpr::int(k))
    }

    #[test]
    fn if_else_becomes_complementary_guards() {
        let c0 = Pred::cmp(ArithExpr::var("c"), CmpOp::Eq, ArithExpr::int(0));
        let s = Stmt::IfElse(c0.clone(), Box::new(Stmt::Skip), Box::new(Stmt::Skip));
        let want = Stmt::gchoice(c0.clone(), Stmt::Skip, Pred::not(c0), Stmt::Skip);
        assert_eq!(s.desugar().unwrap(), want);
    }

    #[test]
    fn uniform_becomes_right_nested_chain() {
        let s = Stmt::Uniform(Var::new("x"), vec![inc(1), inc(2), inc(3)]);
        let want = Stmt::pchoice(
            Stmt::assign("x", inc(1)),
            ArithExpr::Const(ratio(1, 3)),
            Stmt::pchoice(Stmt::assign("x", inc(2)), ArithExpr::Const(ratio(1, 2)), Stmt::assign("x", inc(3))),
        );
        assert_eq!(s.desugar().unwrap(), want);
    }

    #[test]
    fn singleton_uniform_is_plain_assignment() {
        let s = Stmt::Uniform(Var::new("x"), vec![inc(1)]);
        assert_eq!(s.desugar().unwrap(), Stmt::assign("x", inc(1)));
        let empty = Stmt::Uniform(Var::new("x"), vec![]);
        assert!(matches!(empty.desugar(), Err(DesugarError::EmptyUniform(_))));
    }

    #[test]
    fn ternary_choice_nests_to_the_right() {
        let arms = vec![
            (Pred::True, Stmt::assign("x", inc(1))),
            (Pred::True, Stmt::assign("x", inc(2))),
            (Pred::True, Stmt::assign("x", inc(3))),
        ];
        let got = Stmt::Choice(arms).desugar().unwrap();
        let want = Stmt::gchoice(
            Pred::True,
            Stmt::assign("x", inc(1)),
            Pred::True,
            Stmt::gchoice(Pred::True, Stmt::assign("x", inc(2)), Pred::True, Stmt::assign("x", inc(3))),
        );
        assert_eq!(got, want);
        assert!(got.is_core());
    }
}
