//! Syntax trees for programs, arithmetic, predicates and expectations.

mod desugar;
mod domain;
mod eval;
mod subst;
mod value;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use desugar::DesugarError;
pub use domain::{DomainError, FiniteDomain, ProgState, VarDomain};
pub use eval::EvalError;
pub use value::{fmt_rat, rat, ratio, Rat, Value};

/// A program variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Arithmetic over non-negative rationals. Subtraction is truncated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithExpr {
    Const(Rat),
    Var(Var),
    Add(Box<ArithExpr>, Box<ArithExpr>),
    Monus(Box<ArithExpr>, Box<ArithExpr>),
    Mul(Box<ArithExpr>, Box<ArithExpr>),
    Div(Box<ArithExpr>, Box<ArithExpr>),
    Mod(Box<ArithExpr>, Box<ArithExpr>),
    Floor(Box<ArithExpr>),
    Ceil(Box<ArithExpr>),
}

// Smart constructors, named after the node they build.
#[allow(clippy::should_implement_trait)]
impl ArithExpr {
    pub fn int(n: i64) -> Self {
        ArithExpr::Const(rat(n))
    }

    pub fn var(name: &str) -> Self {
        ArithExpr::Var(Var::new(name))
    }

    pub fn add(a: ArithExpr, b: ArithExpr) -> Self {
        ArithExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn monus(a: ArithExpr, b: ArithExpr) -> Self {
        ArithExpr::Monus(Box::new(a), Box::new(b))
    }

    pub fn mul(a: ArithExpr, b: ArithExpr) -> Self {
        ArithExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: ArithExpr, b: ArithExpr) -> Self {
        ArithExpr::Div(Box::new(a), Box::new(b))
    }
}

/// Comparison operators on arithmetic values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Direction of an expectation comparison: `Le` is "below", `Ge` is "above".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Le,
    Ge,
}

impl Dir {
    pub fn symbol(self) -> &'static str {
        match self {
            Dir::Le => "<=",
            Dir::Ge => ">=",
        }
    }
}

/// Boolean predicates over program states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    True,
    False,
    Cmp(ArithExpr, CmpOp, ArithExpr),
    /// `a ≡ b (mod k)`.
    EqMod(ArithExpr, ArithExpr, ArithExpr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    /// Pointwise comparison of two expectations.
    ExpCmp(Box<Expectation>, Dir, Box<Expectation>),
}

impl Pred {
    pub fn cmp(a: ArithExpr, op: CmpOp, b: ArithExpr) -> Self {
        Pred::Cmp(a, op, b)
    }

    pub fn and(a: Pred, b: Pred) -> Self {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Self {
        Pred::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Pred) -> Self {
        Pred::Not(Box::new(a))
    }

    pub fn implies(a: Pred, b: Pred) -> Self {
        Pred::Implies(Box::new(a), Box::new(b))
    }
}

/// Expectations: maps from states to the non-negative rationals extended by infinity.
///
/// The arithmetic node kinds mirror [`ArithExpr`] so arithmetic can be embedded
/// by substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expectation {
    Const(Rat),
    Infinity,
    Var(Var),
    Add(Box<Expectation>, Box<Expectation>),
    Monus(Box<Expectation>, Box<Expectation>),
    Mul(Box<Expectation>, Box<Expectation>),
    Div(Box<Expectation>, Box<Expectation>),
    Mod(Box<Expectation>, Box<Expectation>),
    Floor(Box<Expectation>),
    Ceil(Box<Expectation>),
    Min(Box<Expectation>, Box<Expectation>),
    Max(Box<Expectation>, Box<Expectation>),
    Iverson(Box<Pred>),
    /// `imp(φ, g)`: `g` where `φ` holds and infinity elsewhere.
    Imp(Box<Pred>, Box<Expectation>),
    Pow(Box<Expectation>, ArithExpr),
    /// `|a - b|` evaluated with signed intermediate arithmetic.
    AbsDiff(Box<Expectation>, Box<Expectation>),
}

// Smart constructors, named after the node they build.
#[allow(clippy::should_implement_trait)]
impl Expectation {
    pub fn int(n: i64) -> Self {
        Expectation::Const(rat(n))
    }

    pub fn zero() -> Self {
        Expectation::int(0)
    }

    pub fn one() -> Self {
        Expectation::int(1)
    }

    pub fn var(name: &str) -> Self {
        Expectation::Var(Var::new(name))
    }

    pub fn add(a: Expectation, b: Expectation) -> Self {
        Expectation::Add(Box::new(a), Box::new(b))
    }

    pub fn monus(a: Expectation, b: Expectation) -> Self {
        Expectation::Monus(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expectation, b: Expectation) -> Self {
        Expectation::Mul(Box::new(a), Box::new(b))
    }

    pub fn min(a: Expectation, b: Expectation) -> Self {
        Expectation::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Expectation, b: Expectation) -> Self {
        Expectation::Max(Box::new(a), Box::new(b))
    }

    pub fn iverson(p: Pred) -> Self {
        Expectation::Iverson(Box::new(p))
    }

    pub fn imp(p: Pred, g: Expectation) -> Self {
        Expectation::Imp(Box::new(p), Box::new(g))
    }

    pub fn abs_diff(a: Expectation, b: Expectation) -> Self {
        Expectation::AbsDiff(Box::new(a), Box::new(b))
    }
}

impl From<&ArithExpr> for Expectation {
    fn from(a: &ArithExpr) -> Self {
        let b = |e: &ArithExpr| Box::new(Expectation::from(e));
        match a {
            ArithExpr::Const(c) => Expectation::Const(c.clone()),
            ArithExpr::Var(v) => Expectation::Var(v.clone()),
            ArithExpr::Add(x, y) => Expectation::Add(b(x), b(y)),
            ArithExpr::Monus(x, y) => Expectation::Monus(b(x), b(y)),
            ArithExpr::Mul(x, y) => Expectation::Mul(b(x), b(y)),
            ArithExpr::Div(x, y) => Expectation::Div(b(x), b(y)),
            ArithExpr::Mod(x, y) => Expectation::Mod(b(x), b(y)),
            ArithExpr::Floor(x) => Expectation::Floor(b(x)),
            ArithExpr::Ceil(x) => Expectation::Ceil(b(x)),
        }
    }
}

impl TryFrom<&Expectation> for ArithExpr {
    type Error = ();

    /// Succeeds when the expectation uses only arithmetic node kinds.
    fn try_from(e: &Expectation) -> Result<Self, ()> {
        let b = |x: &Expectation| ArithExpr::try_from(x).map(Box::new);
        Ok(match e {
            Expectation::Const(c) => ArithExpr::Const(c.clone()),
            Expectation::Var(v) => ArithExpr::Var(v.clone()),
            Expectation::Add(x, y) => ArithExpr::Add(b(x)?, b(y)?),
            Expectation::Monus(x, y) => ArithExpr::Monus(b(x)?, b(y)?),
            Expectation::Mul(x, y) => ArithExpr::Mul(b(x)?, b(y)?),
            Expectation::Div(x, y) => ArithExpr::Div(b(x)?, b(y)?),
            Expectation::Mod(x, y) => ArithExpr::Mod(b(x)?, b(y)?),
            Expectation::Floor(x) => ArithExpr::Floor(b(x)?),
            Expectation::Ceil(x) => ArithExpr::Ceil(b(x)?),
            _ => return Err(()),
        })
    }
}

/// Program statements, including the surface sugar forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stmt {
    Skip,
    Assign(Var, ArithExpr),
    Seq(Box<Stmt>, Box<Stmt>),
    /// Binary guarded choice: `if g1 -> s1 [] g2 -> s2 fi`.
    GChoice(Pred, Box<Stmt>, Pred, Box<Stmt>),
    /// `{ s1 } [p] { s2 }`: run `s1` with probability `p`.
    PChoice(Box<Stmt>, ArithExpr, Box<Stmt>),
    While(Pred, Box<Stmt>, Expectation),
    /// Sugar: `if φ { s1 } else { s2 }`.
    IfElse(Pred, Box<Stmt>, Box<Stmt>),
    /// Sugar: `x := uniform(e1, ..., en)`.
    Uniform(Var, Vec<ArithExpr>),
    /// Sugar: guarded choice with three or more arms.
    Choice(Vec<(Pred, Stmt)>),
}

impl Stmt {
    pub fn assign(x: &str, e: ArithExpr) -> Self {
        Stmt::Assign(Var::new(x), e)
    }

    pub fn seq(a: Stmt, b: Stmt) -> Self {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    pub fn gchoice(g1: Pred, s1: Stmt, g2: Pred, s2: Stmt) -> Self {
        Stmt::GChoice(g1, Box::new(s1), g2, Box::new(s2))
    }

    pub fn pchoice(s1: Stmt, p: ArithExpr, s2: Stmt) -> Self {
        Stmt::PChoice(Box::new(s1), p, Box::new(s2))
    }

    pub fn while_loop(guard: Pred, body: Stmt, inv: Expectation) -> Self {
        Stmt::While(guard, Box::new(body), inv)
    }

    /// Right-nested sequence of the given statements; `skip` when empty.
    pub fn seq_all(mut stmts: Vec<Stmt>) -> Self {
        let mut acc = match stmts.pop() {
            Some(s) => s,
            None => return Stmt::Skip,
        };
        while let Some(s) = stmts.pop() {
            acc = Stmt::seq(s, acc);
        }
        acc
    }

    pub fn contains_loop(&self) -> bool {
        match self {
            Stmt::While(..) => true,
            Stmt::Skip | Stmt::Assign(..) | Stmt::Uniform(..) => false,
            Stmt::Seq(a, b) | Stmt::GChoice(_, a, _, b) | Stmt::PChoice(a, _, b) => {
                a.contains_loop() || b.contains_loop()
            }
            Stmt::IfElse(_, a, b) => a.contains_loop() || b.contains_loop(),
            Stmt::Choice(arms) => arms.iter().any(|(_, s)| s.contains_loop()),
        }
    }

    pub fn is_core(&self) -> bool {
        match self {
            Stmt::Skip | Stmt::Assign(..) => true,
            Stmt::IfElse(..) | Stmt::Uniform(..) | Stmt::Choice(..) => false,
            Stmt::Seq(a, b) | Stmt::GChoice(_, a, _, b) | Stmt::PChoice(a, _, b) => {
                a.is_core() && b.is_core()
            }
            Stmt::While(_, b, _) => b.is_core(),
        }
    }
}

/// Collects the free variables of a syntax node.
pub trait FreeVars {
    fn collect_vars(&self, out: &mut BTreeSet<Var>);

    fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

impl FreeVars for ArithExpr {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            ArithExpr::Const(_) => {}
            ArithExpr::Var(v) => {
                out.insert(v.clone());
            }
            ArithExpr::Add(a, b)
            | ArithExpr::Monus(a, b)
            | ArithExpr::Mul(a, b)
            | ArithExpr::Div(a, b)
            | ArithExpr::Mod(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ArithExpr::Floor(a) | ArithExpr::Ceil(a) => a.collect_vars(out),
        }
    }
}

impl FreeVars for Pred {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Pred::True | Pred::False => {}
            Pred::Cmp(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Pred::EqMod(a, b, k) => {
                a.collect_vars(out);
                b.collect_vars(out);
                k.collect_vars(out);
            }
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Pred::Not(a) => a.collect_vars(out),
            Pred::ExpCmp(f, _, g) => {
                f.collect_vars(out);
                g.collect_vars(out);
            }
        }
    }
}

impl FreeVars for Expectation {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        use Expectation as E;
        match self {
            E::Const(_) | E::Infinity => {}
            E::Var(v) => {
                out.insert(v.clone());
            }
            E::Add(a, b)
            | E::Monus(a, b)
            | E::Mul(a, b)
            | E::Div(a, b)
            | E::Mod(a, b)
            | E::Min(a, b)
            | E::Max(a, b)
            | E::AbsDiff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            E::Floor(a) | E::Ceil(a) => a.collect_vars(out),
            E::Iverson(p) => p.collect_vars(out),
            E::Imp(p, g) => {
                p.collect_vars(out);
                g.collect_vars(out);
            }
            E::Pow(b, n) => {
                b.collect_vars(out);
                n.collect_vars(out);
            }
        }
    }
}

impl FreeVars for Stmt {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign(x, e) => {
                out.insert(x.clone());
                e.collect_vars(out);
            }
            Stmt::Seq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Stmt::GChoice(g1, a, g2, b) => {
                g1.collect_vars(out);
                g2.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Stmt::PChoice(a, p, b) => {
                p.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Stmt::While(g, body, inv) => {
                g.collect_vars(out);
                body.collect_vars(out);
                inv.collect_vars(out);
            }
            Stmt::IfElse(g, a, b) => {
                g.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Stmt::Uniform(x, es) => {
                out.insert(x.clone());
                for e in es {
                    e.collect_vars(out);
                }
            }
            Stmt::Choice(arms) => {
                for (g, s) in arms {
                    g.collect_vars(out);
                    s.collect_vars(out);
                }
            }
        }
    }
}
