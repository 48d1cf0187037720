use super::{ArithExpr, Expectation, Pred, Var};

impl ArithExpr {
    /// Replaces every occurrence of `x` by `e`.
    pub fn subst(&self, x: &Var, e: &ArithExpr) -> ArithExpr {
        let b = |a: &ArithExpr| Box::new(a.subst(x, e));
        match self {
            ArithExpr::Const(_) => self.clone(),
            ArithExpr::Var(v) if v == x => e.clone(),
            ArithExpr::Var(_) => self.clone(),
            ArithExpr::Add(p, q) => ArithExpr::Add(b(p), b(q)),
            ArithExpr::Monus(p, q) => ArithExpr::Monus(b(p), b(q)),
            ArithExpr::Mul(p, q) => ArithExpr::Mul(b(p), b(q)),
            ArithExpr::Div(p, q) => ArithExpr::Div(b(p), b(q)),
            ArithExpr::Mod(p, q) => ArithExpr::Mod(b(p), b(q)),
            ArithExpr::Floor(p) => ArithExpr::Floor(b(p)),
            ArithExpr::Ceil(p) => ArithExpr::Ceil(b(p)),
        }
    }
}

impl Pred {
    pub fn subst(&self, x: &Var, e: &ArithExpr) -> Pred {
        let b = |p: &Pred| Box::new(p.subst(x, e));
        match self {
            Pred::True | Pred::False => self.clone(),
            Pred::Cmp(p, op, q) => Pred::Cmp(p.subst(x, e), *op, q.subst(x, e)),
            Pred::EqMod(p, q, k) => Pred::EqMod(p.subst(x, e), q.subst(x, e), k.subst(x, e)),
            Pred::And(p, q) => Pred::And(b(p), b(q)),
            Pred::Or(p, q) => Pred::Or(b(p), b(q)),
            Pred::Not(p) => Pred::Not(b(p)),
            Pred::Implies(p, q) => Pred::Implies(b(p), b(q)),
            Pred::ExpCmp(f, d, g) => Pred::ExpCmp(Box::new(f.subst(x, e)), *d, Box::new(g.subst(x, e))),
        }
    }
}

impl Expectation {
    /// `f[x := e]`.
    pub fn subst(&self, x: &Var, e: &ArithExpr) -> Expectation {
        use Expectation as E;
        let b = |f: &Expectation| Box::new(f.subst(x, e));
        match self {
            E::Const(_) | E::Infinity => self.clone(),
            E::Var(v) if v == x => Expectation::from(e),
            E::Var(_) => self.clone(),
            E::Add(p, q) => E::Add(b(p), b(q)),
            E::Monus(p, q) => E::Monus(b(p), b(q)),
            E::Mul(p, q) => E::Mul(b(p), b(q)),
            E::Div(p, q) => E::Div(b(p), b(q)),
            E::Mod(p, q) => E::Mod(b(p), b(q)),
            E::Floor(p) => E::Floor(b(p)),
            E::Ceil(p) => E::Ceil(b(p)),
            E::Min(p, q) => E::Min(b(p), b(q)),
            E::Max(p, q) => E::Max(b(p), b(q)),
            E::AbsDiff(p, q) => E::AbsDiff(b(p), b(q)),
            E::Iverson(p) => E::Iverson(Box::new(p.subst(x, e))),
            E::Imp(p, g) => E::Imp(Box::new(p.subst(x, e)), b(g)),
            E::Pow(base, n) => E::Pow(b(base), n.subst(x, e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::ast::{rat, ArithExpr, CmpOp, Expectation, Pred, ProgState, Value, Var};

    #[test]
    fn direct_replacement() {
        let y1 = ArithExpr::add(ArithExpr::var("y"), ArithExpr::int(1));
        let got = Expectation::var("x").subst(&Var::new("x"), &y1);
        assert_eq!(got, Expectation::from(&y1));
    }

    #[test]
    fn substitution_reaches_guards_and_exponents() {
        let f = Expectation::Pow(
            Box::new(Expectation::iverson(Pred::cmp(ArithExpr::var("x"), CmpOp::Lt, ArithExpr::int(2)))),
            ArithExpr::var("x"),
        );
        let g = f.subst(&Var::new("x"), &ArithExpr::int(1));
        assert_eq!(g.eval(&ProgState::from_pairs([("x", rat(9))])).unwrap(), Value::one());
    }
}
