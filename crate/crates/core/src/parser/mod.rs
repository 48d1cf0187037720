//! Textual format: domain declarations, optional definitions and a program body.
//!
//! ```text
//! domain c: 0..1;
//! domain p in {1/4, 1/2};
//! init c = 1;
//! post x;
//! direction upper;
//! program {
//!   while c != 0 inv [c != 0] * (x + 1) + [c = 0] * x {
//!     { c := 0 } [1/2] { if true -> { x := x * x } [] true -> { x := x + 1 } fi }
//!   }
//! }
//! ```

mod lexer;
mod print;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{
    ArithExpr, CmpOp, Dir, DomainError, Expectation, FiniteDomain, FreeVars, Pred, Rat, Stmt, Var, VarDomain,
};

use lexer::{lex, Pos, Tok};
pub use print::{print_arith, print_expectation, print_pred, print_program, print_source};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: loop has no `inv` annotation")]
    MissingInvariant { line: usize, col: usize },
    #[error("variable `{0}` is used but has no domain declaration")]
    UndeclaredVariable(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl ParseError {
    fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
    }
}

/// Which side of the optimum a file asks to bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Upper bounds on the demonic value.
    Upper,
    /// Lower bounds on the angelic value.
    Lower,
}

/// A parsed input file.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceFile {
    pub domain: FiniteDomain,
    pub post: Option<Expectation>,
    pub threshold: Option<Expectation>,
    pub direction: Option<Direction>,
    pub program: Stmt,
}

const KEYWORDS: &[&str] = &[
    "skip", "if", "fi", "else", "while", "inv", "uniform", "true", "false", "min", "max", "imp", "floor", "ceil",
    "infinity", "domain", "in", "init", "post", "threshold", "direction", "program", "eqmod", "wpcmp", "absdiff",
];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::syntax(self.pos(), msg))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(r) => format!("`{}`", crate::ast::fmt_rat(r)),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> PResult<Var> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Var::new(&s))
            }
            _ => self.err(format!("expected a variable, found {}", self.describe())),
        }
    }

    fn number(&mut self) -> PResult<Rat> {
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(r)
            }
            _ => self.err(format!("expected a number, found {}", self.describe())),
        }
    }

    fn eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    // ----- terms -----

    fn term(&mut self) -> PResult<Expectation> {
        let mut lhs = self.product()?;
        loop {
            if self.eat_sym("+") {
                lhs = Expectation::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat_sym("-") {
                lhs = Expectation::Monus(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> PResult<Expectation> {
        let mut lhs = self.power()?;
        loop {
            let ctor = if self.eat_sym("*") {
                Expectation::Mul
            } else if self.eat_sym("/") {
                Expectation::Div
            } else if self.eat_sym("%") {
                Expectation::Mod
            } else {
                return Ok(lhs);
            };
            lhs = ctor(Box::new(lhs), Box::new(self.power()?));
        }
    }

    fn power(&mut self) -> PResult<Expectation> {
        let base = self.atom()?;
        if self.eat_sym("^") {
            let at = self.pos();
            let e = self.atom()?;
            let exp = ArithExpr::try_from(&e).map_err(|_| ParseError::syntax(at, "exponent must be arithmetic"))?;
            return Ok(Expectation::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn call2(&mut self) -> PResult<(Expectation, Expectation)> {
        self.expect_sym("(")?;
        let a = self.term()?;
        self.expect_sym(",")?;
        let b = self.term()?;
        self.expect_sym(")")?;
        Ok((a, b))
    }

    fn atom(&mut self) -> PResult<Expectation> {
        fn b<T>(x: T) -> Box<T> {
            Box::new(x)
        }
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Expectation::Const(r))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.term()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.bump();
                let p = self.pred()?;
                self.expect_sym("]")?;
                Ok(Expectation::Iverson(b(p)))
            }
            Tok::Ident(s) => match s.as_str() {
                "infinity" => {
                    self.bump();
                    Ok(Expectation::Infinity)
                }
                "min" | "max" | "absdiff" => {
                    self.bump();
                    let (x, y) = self.call2()?;
                    Ok(match s.as_str() {
                        "min" => Expectation::Min(b(x), b(y)),
                        "max" => Expectation::Max(b(x), b(y)),
                        _ => Expectation::AbsDiff(b(x), b(y)),
                    })
                }
                "floor" | "ceil" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let x = self.term()?;
                    self.expect_sym(")")?;
                    Ok(if s == "floor" { Expectation::Floor(b(x)) } else { Expectation::Ceil(b(x)) })
                }
                "imp" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let p = self.pred()?;
                    self.expect_sym(",")?;
                    let g = self.term()?;
                    self.expect_sym(")")?;
                    Ok(Expectation::Imp(b(p), b(g)))
                }
                _ => Ok(Expectation::Var(self.ident()?)),
            },
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }

    fn arith(&mut self) -> PResult<ArithExpr> {
        let at = self.pos();
        let e = self.term()?;
        ArithExpr::try_from(&e).map_err(|_| ParseError::syntax(at, "expected an arithmetic expression"))
    }

    // ----- predicates -----

    fn pred(&mut self) -> PResult<Pred> {
        let lhs = self.disj()?;
        if self.eat_sym("==>") {
            return Ok(Pred::implies(lhs, self.pred()?));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<Pred> {
        let mut lhs = self.conj()?;
        while self.eat_sym("||") {
            lhs = Pred::or(lhs, self.conj()?);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Pred> {
        let mut lhs = self.unary()?;
        while self.eat_sym("&&") {
            lhs = Pred::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Pred> {
        if self.eat_sym("!") {
            return Ok(Pred::not(self.unary()?));
        }
        self.patom()
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn patom(&mut self) -> PResult<Pred> {
        if self.eat_kw("true") {
            return Ok(Pred::True);
        }
        if self.eat_kw("false") {
            return Ok(Pred::False);
        }
        if self.eat_kw("eqmod") {
            self.expect_sym("(")?;
            let a = self.arith()?;
            self.expect_sym(",")?;
            let b = self.arith()?;
            self.expect_sym(",")?;
            let k = self.arith()?;
            self.expect_sym(")")?;
            return Ok(Pred::EqMod(a, b, k));
        }
        if self.eat_kw("wpcmp") {
            self.expect_sym("(")?;
            let dir = if self.eat_sym("<=") {
                Dir::Le
            } else if self.eat_sym(">=") {
                Dir::Ge
            } else {
                return self.err("expected `<=` or `>=`");
            };
            self.expect_sym(",")?;
            let (f, g) = (self.term()?, {
                self.expect_sym(",")?;
                self.term()?
            });
            self.expect_sym(")")?;
            return Ok(Pred::ExpCmp(Box::new(f), dir, Box::new(g)));
        }
        // A comparison may itself start with a parenthesis, so try it first.
        let save = self.i;
        let first_err = match self.comparison() {
            Ok(p) => return Ok(p),
            Err(e) => e,
        };
        self.i = save;
        if self.eat_sym("(") {
            let p = self.pred()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        Err(first_err)
    }

    fn comparison(&mut self) -> PResult<Pred> {
        let a = self.arith()?;
        match self.cmp_op() {
            Some(op) => Ok(Pred::Cmp(a, op, self.arith()?)),
            None => self.err(format!("expected a comparison operator, found {}", self.describe())),
        }
    }

    // ----- statements -----

    fn block(&mut self) -> PResult<Stmt> {
        self.expect_sym("{")?;
        let s = self.seq()?;
        self.expect_sym("}")?;
        Ok(s)
    }

    fn seq(&mut self) -> PResult<Stmt> {
        let mut stmts = vec![self.stmt()?];
        while self.eat_sym(";") {
            if self.is_sym("}") || *self.peek() == Tok::Eof {
                break;
            }
            stmts.push(self.stmt()?);
        }
        Ok(Stmt::seq_all(stmts))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.eat_kw("skip") {
            return Ok(Stmt::Skip);
        }
        if self.is_sym("{") {
            let first = self.block()?;
            if self.eat_sym("[") {
                let p = self.arith()?;
                self.expect_sym("]")?;
                let second = self.block()?;
                return Ok(Stmt::pchoice(first, p, second));
            }
            return Ok(first);
        }
        if self.eat_kw("if") {
            return self.if_stmt();
        }
        if self.is_kw("while") {
            let at = self.pos();
            self.bump();
            let guard = self.pred()?;
            if !self.eat_kw("inv") {
                return Err(ParseError::MissingInvariant { line: at.line, col: at.col });
            }
            let inv = self.term()?;
            let body = self.block()?;
            return Ok(Stmt::while_loop(guard, body, inv));
        }
        let x = self.ident()?;
        self.expect_sym(":=")?;
        if self.is_kw("uniform") && matches!(self.peek_at(1), Tok::Sym("(")) {
            self.bump();
            self.bump();
            let mut es = vec![self.arith()?];
            while self.eat_sym(",") {
                es.push(self.arith()?);
            }
            self.expect_sym(")")?;
            return Ok(Stmt::Uniform(x, es));
        }
        Ok(Stmt::Assign(x, self.arith()?))
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let g = self.pred()?;
        if self.is_sym("{") {
            let a = self.block()?;
            self.expect_kw("else")?;
            let b = self.block()?;
            return Ok(Stmt::IfElse(g, Box::new(a), Box::new(b)));
        }
        self.expect_sym("->")?;
        let mut arms = vec![(g, self.block()?)];
        while self.eat_sym("[]") {
            let g = self.pred()?;
            self.expect_sym("->")?;
            arms.push((g, self.block()?));
        }
        self.expect_kw("fi")?;
        match arms.len() {
            1 => self.err("guarded choice needs at least two arms"),
            2 => {
                let (g2, s2) = arms.pop().expect("two arms");
                let (g1, s1) = arms.pop().expect("two arms");
                Ok(Stmt::gchoice(g1, s1, g2, s2))
            }
            _ => Ok(Stmt::Choice(arms)),
        }
    }

    // ----- files -----

    fn file(&mut self) -> PResult<SourceFile> {
        let mut vars = Vec::new();
        while self.eat_kw("domain") {
            let name = self.ident()?;
            let vd = if self.eat_sym(":") {
                let lo = self.number()?;
                self.expect_sym("..")?;
                let hi = self.number()?;
                VarDomain::stepped(name.as_str(), &lo, &hi)?
            } else {
                self.expect_kw("in")?;
                self.expect_sym("{")?;
                let mut vals = vec![self.number()?];
                while self.eat_sym(",") {
                    vals.push(self.number()?);
                }
                self.expect_sym("}")?;
                VarDomain::set(name.as_str(), vals)
            };
            self.expect_sym(";")?;
            vars.push(vd);
        }
        let mut init = None;
        if self.eat_kw("init") {
            init = Some(self.pred()?);
            self.expect_sym(";")?;
        }
        let (mut post, mut threshold, mut direction) = (None, None, None);
        if self.eat_kw("post") {
            post = Some(self.term()?);
            self.expect_sym(";")?;
        }
        if self.eat_kw("threshold") {
            threshold = Some(self.term()?);
            self.expect_sym(";")?;
        }
        if self.eat_kw("direction") {
            direction = Some(if self.eat_kw("upper") {
                Direction::Upper
            } else if self.eat_kw("lower") {
                Direction::Lower
            } else {
                return self.err("expected `upper` or `lower`");
            });
            self.expect_sym(";")?;
        }
        self.expect_kw("program")?;
        let program = self.block()?;
        self.eof()?;
        let domain = FiniteDomain::new(vars, init)?;
        let file = SourceFile { domain, post, threshold, direction, program };
        file.check_declared()?;
        Ok(file)
    }
}

impl SourceFile {
    fn check_declared(&self) -> Result<(), ParseError> {
        let mut used = BTreeSet::new();
        self.program.collect_vars(&mut used);
        for e in self.post.iter().chain(self.threshold.iter()) {
            e.collect_vars(&mut used);
        }
        if let Some(p) = self.domain.init() {
            p.collect_vars(&mut used);
        }
        match used.into_iter().find(|v| self.domain.index_of(v).is_none()) {
            Some(v) => Err(ParseError::UndeclaredVariable(v.to_string())),
            None => Ok(()),
        }
    }
}

pub fn parse_program(src: &str) -> Result<SourceFile, ParseError> {
    Parser::new(src)?.file()
}

/// Parses a statement on its own, without domain declarations.
pub fn parse_stmt(src: &str) -> Result<Stmt, ParseError> {
    let mut p = Parser::new(src)?;
    let s = p.seq()?;
    p.eof()?;
    Ok(s)
}

pub fn parse_expectation(src: &str) -> Result<Expectation, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.term()?;
    p.eof()?;
    Ok(e)
}

pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.pred()?;
    p.eof()?;
    Ok(e)
}

pub fn parse_arith(src: &str) -> Result<ArithExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.arith()?;
    p.eof()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{rat, ratio};

    #[test]
    fn guarded_invariant_shape() {
        let e = parse_expectation("[c != 0]*(x+1) + [c = 0]*x").unwrap();
        let c_ne = Pred::cmp(ArithExpr::var("c"), CmpOp::Ne, ArithExpr::int(0));
        let c_eq = Pred::cmp(ArithExpr::var("c"), CmpOp::Eq, ArithExpr::int(0));
        let want = Expectation::add(
            Expectation::mul(Expectation::iverson(c_ne), Expectation::add(Expectation::var("x"), Expectation::one())),
            Expectation::mul(Expectation::iverson(c_eq), Expectation::var("x")),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn infinity_and_lattice_operations() {
        assert_eq!(parse_expectation("infinity").unwrap(), Expectation::Infinity);
        assert_eq!(
            parse_expectation("min(x, y)").unwrap(),
            Expectation::min(Expectation::var("x"), Expectation::var("y"))
        );
    }

    #[test]
    fn product_binds_tighter_than_sum() {
        let e = parse_expectation("1 + 2 * x").unwrap();
        assert_eq!(
            e,
            Expectation::add(Expectation::one(), Expectation::mul(Expectation::int(2), Expectation::var("x")))
        );
        assert_eq!(parse_expectation("2/3 * x").unwrap(), Expectation::mul(Expectation::Const(ratio(2, 3)), Expectation::var("x")));
    }

    #[test]
    fn skip_with_no_domains() {
        let f = parse_program("program { skip }").unwrap();
        assert_eq!(f.program, Stmt::Skip);
        assert_eq!(f.domain.size(), 1);
    }

    #[test]
    fn loop_without_invariant_is_rejected() {
        let err = parse_program("domain c: 0..1; program { while c = 0 { skip } }").unwrap_err();
        assert!(matches!(err, ParseError::MissingInvariant { line: 1, .. }));
    }

    #[test]
    fn undeclared_variables_are_rejected() {
        let err = parse_program("domain x: 0..1; program { x := y }").unwrap_err();
        assert_eq!(err, ParseError::UndeclaredVariable("y".into()));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_program("domain x: 0..1;\nprogram { x := }").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, col: 16, .. }), "{err:?}");
    }

    #[test]
    fn parenthesised_comparisons_and_predicates() {
        let p = parse_pred("(x + 1) < 3 && (y = 0 || !(y > 2))").unwrap();
        let s = crate::ast::ProgState::from_pairs([("x", rat(1)), ("y", rat(5))]);
        assert!(!p.eval(&s).unwrap());
        let s = crate::ast::ProgState::from_pairs([("x", rat(1)), ("y", rat(1))]);
        assert!(p.eval(&s).unwrap());
    }

    #[test]
    fn sugar_is_preserved() {
        let s = parse_stmt("x := uniform(x+1, x+2, x+3)").unwrap();
        assert!(matches!(s, Stmt::Uniform(_, ref es) if es.len() == 3));
        let s = parse_stmt("if x = 0 { skip } else { x := 0 }").unwrap();
        assert!(matches!(s, Stmt::IfElse(..)));
        let s = parse_stmt("if true -> { skip } [] true -> { skip } [] true -> { skip } fi").unwrap();
        assert!(matches!(s, Stmt::Choice(ref a) if a.len() == 3));
    }

    #[test]
    fn domain_declarations() {
        let f = parse_program("domain x: 0..3; domain p in {1/2, 1/4}; init x <= 2; program { skip }").unwrap();
        assert_eq!(f.domain.size(), 8);
        assert!(f.domain.sampled());
        assert_eq!(f.domain.initial_states().unwrap().len(), 6);
    }
}
