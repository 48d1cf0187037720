use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::ast::{ArithExpr, CmpOp, Dir, Expectation, Pred, Rat, Value};

/// Products whose expansion would exceed this many monomials are kept
/// factored as an opaque atom.
const TERM_LIMIT: usize = 256;

type Monomial = Vec<Expectation>;

/// Sum of monomials with nonnegative rational coefficients. Atoms are
/// simplified expectations that are not sums, products or constants; the
/// `Infinity` leaf is treated as an idempotent atom.
#[derive(Clone, Debug, PartialEq)]
struct Poly(BTreeMap<Monomial, Rat>);

fn is_inf_only(m: &Monomial) -> bool {
    m.len() == 1 && m[0] == Expectation::Infinity
}

fn complement(a: &Expectation) -> Option<&Pred> {
    match a {
        Expectation::Iverson(p) => match &**p {
            Pred::Not(q) => Some(q),
            _ => None,
        },
        _ => None,
    }
}

fn atom_rank(a: &Expectation) -> u8 {
    match a {
        Expectation::Iverson(_) => 0,
        Expectation::Infinity => 2,
        _ => 1,
    }
}

/// Normalizes an atom multiset. Returns `None` when the monomial is zero
/// because it contains complementary Iverson brackets.
fn normalize_monomial(mut m: Monomial) -> Option<Monomial> {
    // Brackets first so products read as `[guard] * value`.
    m.sort_by(|a, b| (atom_rank(a), a).cmp(&(atom_rank(b), b)));
    // Iverson brackets and infinity are idempotent under multiplication.
    m.dedup_by(|a, b| a == b && matches!(a, Expectation::Iverson(_) | Expectation::Infinity));
    let brackets: Vec<&Pred> = m
        .iter()
        .filter_map(|a| match a {
            Expectation::Iverson(p) => Some(&**p),
            _ => None,
        })
        .collect();
    let contradictory = m
        .iter()
        .filter_map(complement)
        .any(|q| brackets.contains(&q));
    (!contradictory).then_some(m)
}

impl Poly {
    fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    fn constant(c: Rat) -> Self {
        let mut p = Poly::zero();
        p.insert(Vec::new(), c);
        p
    }

    fn atom(a: Expectation) -> Self {
        match a {
            Expectation::Const(c) => Poly::constant(c),
            a => {
                let mut p = Poly::zero();
                p.insert(vec![a], Rat::one());
                p
            }
        }
    }

    fn insert(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let Some(m) = normalize_monomial(m) else { return };
        let entry = self.0.entry(m.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if m.contains(&Expectation::Infinity) {
            // c * inf * atoms equals inf * atoms for any c > 0.
            *entry = Rat::one();
        }
    }

    fn as_const(&self) -> Option<Value> {
        match self.0.len() {
            0 => Some(Value::zero()),
            1 => {
                let (m, c) = self.0.iter().next().expect("one entry");
                if m.is_empty() {
                    Some(Value::Finite(c.clone()))
                } else if is_inf_only(m) {
                    Some(Value::Infinity)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn absorb_infinity(self) -> Self {
        if self.0.keys().any(is_inf_only) {
            Poly::atom(Expectation::Infinity)
        } else {
            self
        }
    }

    fn add(mut self, other: Poly) -> Self {
        for (m, c) in other.0 {
            self.insert(m, c);
        }
        self.absorb_infinity()
    }

    fn mul(&self, other: &Poly) -> Option<Self> {
        if self.0.len() * other.0.len() > TERM_LIMIT {
            return None;
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m = m1.clone();
                m.extend(m2.iter().cloned());
                out.insert(m, c1 * c2);
            }
        }
        Some(out.absorb_infinity())
    }

    fn scale(&self, k: &Rat) -> Self {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            out.insert(m.clone(), c * k);
        }
        out
    }

    fn into_expectation(self) -> Expectation {
        if let Some(v) = self.as_const() {
            return value_exp(v);
        }
        let mut terms: Vec<Expectation> = Vec::new();
        let mut constant = None;
        for (m, c) in self.0 {
            if m.is_empty() {
                constant = Some(Expectation::Const(c));
                continue;
            }
            let mut factors = m.into_iter();
            let first = factors.next().expect("non-empty monomial");
            let mut term = if c.is_one() {
                first
            } else {
                Expectation::mul(Expectation::Const(c), first)
            };
            for f in factors {
                term = Expectation::mul(term, f);
            }
            terms.push(term);
        }
        terms.extend(constant);
        terms
            .into_iter()
            .reduce(Expectation::add)
            .expect("non-constant polynomial has a term")
    }
}

fn value_exp(v: Value) -> Expectation {
    match v {
        Value::Finite(c) => Expectation::Const(c),
        Value::Infinity => Expectation::Infinity,
    }
}

fn const_of(e: &Expectation) -> Option<Value> {
    match e {
        Expectation::Const(c) => Some(Value::Finite(c.clone())),
        Expectation::Infinity => Some(Value::Infinity),
        _ => None,
    }
}

/// Evaluates a closed expression; evaluation errors leave it unfolded.
fn fold_closed(e: Expectation) -> Expectation {
    let empty = crate::ast::ProgState::from_pairs([]);
    match e.eval(&empty) {
        Ok(v) => value_exp(v),
        Err(_) => e,
    }
}

fn poly(e: &Expectation) -> Poly {
    use Expectation as E;
    match e {
        E::Const(c) => Poly::constant(c.clone()),
        E::Add(a, b) => poly(a).add(poly(b)),
        E::Mul(a, b) => {
            let (pa, pb) = (poly(a), poly(b));
            match pa.mul(&pb) {
                Some(p) => p,
                None => Poly::atom(E::mul(pa.into_expectation(), pb.into_expectation())),
            }
        }
        E::Div(a, b) => {
            let (sa, sb) = (simplify(a), simplify(b));
            match &sb {
                E::Const(k) if !k.is_zero() => poly(&sa).scale(&k.recip()),
                _ => atom_or_fold(E::Div(Box::new(sa), Box::new(sb))),
            }
        }
        _ => Poly::atom(simplify_atom(e)),
    }
}

fn atom_or_fold(e: Expectation) -> Poly {
    let free = crate::ast::FreeVars::free_vars(&e).is_empty();
    let e = if free { fold_closed(e) } else { e };
    Poly::atom(e)
}

fn simplify_atom(e: &Expectation) -> Expectation {
    use Expectation as E;
    match e {
        E::Const(_) | E::Infinity | E::Var(_) => e.clone(),
        E::Add(..) | E::Mul(..) | E::Div(..) => simplify(e),
        E::Monus(a, b) => {
            let (sa, sb) = (simplify(a), simplify(b));
            match (const_of(&sa), const_of(&sb)) {
                (_, Some(v)) if v.is_zero() => sa,
                (Some(v), _) if v.is_zero() => E::zero(),
                (Some(Value::Infinity), Some(Value::Finite(_))) => E::Infinity,
                (Some(_), Some(_)) => fold_closed(E::Monus(Box::new(sa), Box::new(sb))),
                _ if sa == sb && !matches!(sa, E::Infinity) && is_finite_valued(&sa) => E::zero(),
                _ => E::Monus(Box::new(sa), Box::new(sb)),
            }
        }
        E::Mod(a, b) => closed_or(E::Mod(Box::new(simplify(a)), Box::new(simplify(b)))),
        E::Floor(a) => closed_or(E::Floor(Box::new(simplify(a)))),
        E::Ceil(a) => closed_or(E::Ceil(Box::new(simplify(a)))),
        E::AbsDiff(a, b) => closed_or(E::AbsDiff(Box::new(simplify(a)), Box::new(simplify(b)))),
        E::Min(a, b) => {
            let (sa, sb) = (simplify(a), simplify(b));
            match (const_of(&sa), const_of(&sb)) {
                _ if sa == sb => sa,
                (Some(x), Some(y)) => value_exp(x.minimum(&y)),
                (Some(Value::Infinity), _) => sb,
                (_, Some(Value::Infinity)) => sa,
                (Some(v), _) | (_, Some(v)) if v.is_zero() => E::zero(),
                _ => E::Min(Box::new(sa), Box::new(sb)),
            }
        }
        E::Max(a, b) => {
            let (sa, sb) = (simplify(a), simplify(b));
            match (const_of(&sa), const_of(&sb)) {
                _ if sa == sb => sa,
                (Some(x), Some(y)) => value_exp(x.maximum(&y)),
                (Some(Value::Infinity), _) | (_, Some(Value::Infinity)) => E::Infinity,
                (Some(v), _) if v.is_zero() => sb,
                (_, Some(v)) if v.is_zero() => sa,
                _ => E::Max(Box::new(sa), Box::new(sb)),
            }
        }
        E::Iverson(p) => match simplify_pred(p) {
            Pred::True => E::one(),
            Pred::False => E::zero(),
            p => E::Iverson(Box::new(p)),
        },
        E::Imp(p, g) => {
            let sg = simplify(g);
            match simplify_pred(p) {
                Pred::True => sg,
                Pred::False => E::Infinity,
                _ if sg == E::Infinity => E::Infinity,
                p => E::Imp(Box::new(p), Box::new(sg)),
            }
        }
        E::Pow(b, n) => {
            let sb = simplify(b);
            let sn = simplify_arith(n);
            match &sn {
                ArithExpr::Const(k) if k.is_zero() => E::one(),
                ArithExpr::Const(k) if k.is_one() => sb,
                _ => closed_or(E::Pow(Box::new(sb), sn)),
            }
        }
    }
}

/// True for expressions built only from arithmetic nodes, which never
/// evaluate to infinity.
fn is_finite_valued(e: &Expectation) -> bool {
    ArithExpr::try_from(e).is_ok()
}

fn closed_or(e: Expectation) -> Expectation {
    if crate::ast::FreeVars::free_vars(&e).is_empty() {
        fold_closed(e)
    } else {
        e
    }
}

/// Rewrites an expectation into an evaluation-equivalent, usually smaller
/// form: constant folding, Iverson algebra, neutral and absorbing elements,
/// and distribution of products over sums.
pub fn simplify(e: &Expectation) -> Expectation {
    poly(e).into_expectation()
}

/// Simplifies an arithmetic expression through the expectation simplifier.
pub fn simplify_arith(a: &ArithExpr) -> ArithExpr {
    let s = simplify(&Expectation::from(a));
    ArithExpr::try_from(&s).unwrap_or_else(|_| a.clone())
}

fn cmp_consts(x: &Value, op: CmpOp, y: &Value) -> bool {
    match op {
        CmpOp::Eq => x == y,
        CmpOp::Ne => x != y,
        CmpOp::Lt => x < y,
        CmpOp::Le => x <= y,
        CmpOp::Gt => x > y,
        CmpOp::Ge => x >= y,
    }
}

fn bool_pred(b: bool) -> Pred {
    if b {
        Pred::True
    } else {
        Pred::False
    }
}

/// Boolean constant folding plus simplification of the embedded arithmetic.
/// Comparisons between two arithmetic expectations become plain comparisons.
pub fn simplify_pred(p: &Pred) -> Pred {
    match p {
        Pred::True | Pred::False => p.clone(),
        Pred::Cmp(a, op, b) => {
            let (sa, sb) = (simplify_arith(a), simplify_arith(b));
            match (&sa, &sb) {
                (ArithExpr::Const(x), ArithExpr::Const(y)) => {
                    bool_pred(cmp_consts(&Value::Finite(x.clone()), *op, &Value::Finite(y.clone())))
                }
                _ if sa == sb => bool_pred(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge)),
                _ => Pred::Cmp(sa, *op, sb),
            }
        }
        Pred::EqMod(a, b, k) => {
            let s = Pred::EqMod(simplify_arith(a), simplify_arith(b), simplify_arith(k));
            match (&s, crate::ast::FreeVars::free_vars(&s).is_empty()) {
                (_, true) => s.eval(&crate::ast::ProgState::from_pairs([])).map(bool_pred).unwrap_or(s),
                _ => s,
            }
        }
        Pred::And(a, b) => match (simplify_pred(a), simplify_pred(b)) {
            (Pred::False, _) | (_, Pred::False) => Pred::False,
            (Pred::True, q) | (q, Pred::True) => q,
            (x, y) if x == y => x,
            (x, y) => Pred::and(x, y),
        },
        Pred::Or(a, b) => match (simplify_pred(a), simplify_pred(b)) {
            (Pred::True, _) | (_, Pred::True) => Pred::True,
            (Pred::False, q) | (q, Pred::False) => q,
            (x, y) if x == y => x,
            (x, y) => Pred::or(x, y),
        },
        Pred::Not(a) => match simplify_pred(a) {
            Pred::True => Pred::False,
            Pred::False => Pred::True,
            Pred::Not(q) => *q,
            q => Pred::not(q),
        },
        Pred::Implies(a, b) => match (simplify_pred(a), simplify_pred(b)) {
            (Pred::False, _) | (_, Pred::True) => Pred::True,
            (Pred::True, q) => q,
            (q, Pred::False) => Pred::not(q),
            (x, y) => Pred::implies(x, y),
        },
        Pred::ExpCmp(f, dir, g) => {
            let (sf, sg) = (simplify(f), simplify(g));
            if let (Some(x), Some(y)) = (const_of(&sf), const_of(&sg)) {
                return bool_pred(match dir {
                    Dir::Le => x <= y,
                    Dir::Ge => x >= y,
                });
            }
            if sf == sg {
                return Pred::True;
            }
            match (ArithExpr::try_from(&sf), ArithExpr::try_from(&sg)) {
                (Ok(a), Ok(b)) => {
                    let op = match dir {
                        Dir::Le => CmpOp::Le,
                        Dir::Ge => CmpOp::Ge,
                    };
                    Pred::Cmp(a, op, b)
                }
                _ => Pred::ExpCmp(Box::new(sf), *dir, Box::new(sg)),
            }
        }
    }
}

/// The comparison guard `f <= g` (or `f >= g`), kept as an expectation
/// comparison node.
pub fn cmp_guard(f: &Expectation, g: &Expectation, dir: Dir) -> Pred {
    Pred::ExpCmp(Box::new(f.clone()), dir, Box::new(g.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expectation, parse_pred, print_expectation, print_pred};

    fn s(src: &str) -> String {
        print_expectation(&simplify(&parse_expectation(src).unwrap()))
    }

    #[test]
    fn neutral_and_absorbing_elements() {
        assert_eq!(s("1*f + 0*g"), "f");
        assert_eq!(s("0 * infinity"), "0");
        assert_eq!(s("x + infinity"), "infinity");
        assert_eq!(s("min(infinity, x)"), "x");
        assert_eq!(s("max(0, x)"), "x");
        assert_eq!(s("imp(true, x)"), "x");
        assert_eq!(s("imp(false, x)"), "infinity");
    }

    #[test]
    fn averages_collapse() {
        assert_eq!(s("1/2*(y + 2) + 1/2*(y + 4)"), "y + 3");
        assert_eq!(s("x / 2 + x / 2"), "x");
    }

    #[test]
    fn iverson_algebra() {
        assert_eq!(s("[c = 0] * [c = 0] * x"), "[c = 0] * x");
        assert_eq!(s("[true] + [false]"), "1");
        assert_eq!(s("[c = 0] * [!(c = 0)]"), "0");
        assert_eq!(s("[1 < 2] * x"), "x");
    }

    #[test]
    fn substituted_constants_fold() {
        let e = parse_expectation("y + 3").unwrap().subst(&"y".into(), &ArithExpr::int(4));
        assert_eq!(simplify(&e), Expectation::int(7));
    }

    #[test]
    fn powers() {
        assert_eq!(s("(1/2)^3"), "1/8");
        assert_eq!(s("x^0"), "1");
        assert_eq!(s("x^1"), "x");
    }

    #[test]
    fn predicates() {
        let p = simplify_pred(&parse_pred("true && (x < 1 || false)").unwrap());
        assert_eq!(print_pred(&p), "x < 1");
        let p = simplify_pred(&parse_pred("wpcmp(<=, y, z)").unwrap());
        assert_eq!(print_pred(&p), "y <= z");
        let p = simplify_pred(&parse_pred("wpcmp(<=, imp(x = 1, y), z)").unwrap());
        assert!(matches!(p, Pred::ExpCmp(..)));
        assert_eq!(simplify_pred(&parse_pred("wpcmp(<=, 3, 4)").unwrap()), Pred::True);
    }

    #[test]
    fn cmp_guard_is_reflexive_node() {
        let f = parse_expectation("[c != 0] * x").unwrap();
        let g = cmp_guard(&f, &f, Dir::Le);
        assert!(matches!(g, Pred::ExpCmp(..)));
        assert_eq!(simplify_pred(&g), Pred::True);
    }
}
