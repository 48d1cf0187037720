use crate::ast::{fmt_rat, ArithExpr, Expectation, Pred, Stmt};

use super::{Direction, SourceFile};

const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const POWER: u8 = 2;
const ATOM: u8 = 3;

fn exp_level(e: &Expectation) -> u8 {
    use Expectation as E;
    match e {
        E::Add(..) | E::Monus(..) => SUM,
        E::Mul(..) | E::Div(..) | E::Mod(..) => PRODUCT,
        E::Pow(..) => POWER,
        _ => ATOM,
    }
}

fn exp_at(e: &Expectation, min: u8) -> String {
    let s = exp(e);
    if exp_level(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn exp(e: &Expectation) -> String {
    use Expectation as E;
    let bin = |a: &Expectation, op: &str, b: &Expectation, lvl: u8| {
        format!("{} {op} {}", exp_at(a, lvl), exp_at(b, lvl + 1))
    };
    match e {
        E::Const(c) => fmt_rat(c),
        E::Infinity => "infinity".into(),
        E::Var(v) => v.to_string(),
        E::Add(a, b) => bin(a, "+", b, SUM),
        E::Monus(a, b) => bin(a, "-", b, SUM),
        E::Mul(a, b) => bin(a, "*", b, PRODUCT),
        E::Div(a, b) => bin(a, "/", b, PRODUCT),
        E::Mod(a, b) => bin(a, "%", b, PRODUCT),
        E::Pow(b, n) => format!("{}^{}", exp_at(b, ATOM), exp_at(&Expectation::from(n), ATOM)),
        E::Floor(a) => format!("floor({})", exp(a)),
        E::Ceil(a) => format!("ceil({})", exp(a)),
        E::Min(a, b) => format!("min({}, {})", exp(a), exp(b)),
        E::Max(a, b) => format!("max({}, {})", exp(a), exp(b)),
        E::AbsDiff(a, b) => format!("absdiff({}, {})", exp(a), exp(b)),
        E::Iverson(p) => format!("[{}]", pred(p)),
        E::Imp(p, g) => format!("imp({}, {})", pred(p), exp(g)),
    }
}

fn arith(a: &ArithExpr) -> String {
    exp(&Expectation::from(a))
}

const IMPLIES: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const PATOM: u8 = 4;

fn pred_level(p: &Pred) -> u8 {
    match p {
        Pred::Implies(..) => IMPLIES,
        Pred::Or(..) => OR,
        Pred::And(..) => AND,
        Pred::Not(..) => NOT,
        _ => PATOM,
    }
}

fn pred_at(p: &Pred, min: u8) -> String {
    let s = pred(p);
    if pred_level(p) < min {
        format!("({s})")
    } else {
        s
    }
}

fn pred(p: &Pred) -> String {
    match p {
        Pred::True => "true".into(),
        Pred::False => "false".into(),
        Pred::Cmp(a, op, b) => format!("{} {} {}", arith(a), op.symbol(), arith(b)),
        Pred::EqMod(a, b, k) => format!("eqmod({}, {}, {})", arith(a), arith(b), arith(k)),
        Pred::ExpCmp(f, d, g) => format!("wpcmp({}, {}, {})", d.symbol(), exp(f), exp(g)),
        Pred::Implies(a, b) => format!("{} ==> {}", pred_at(a, OR), pred_at(b, IMPLIES)),
        Pred::Or(a, b) => format!("{} || {}", pred_at(a, OR), pred_at(b, AND)),
        Pred::And(a, b) => format!("{} && {}", pred_at(a, AND), pred_at(b, NOT)),
        Pred::Not(a) if matches!(**a, Pred::Cmp(..)) => format!("!({})", pred(a)),
        Pred::Not(a) => format!("!{}", pred_at(a, NOT)),
    }
}

pub fn print_expectation(e: &Expectation) -> String {
    exp(e)
}

pub fn print_arith(a: &ArithExpr) -> String {
    arith(a)
}

pub fn print_pred(p: &Pred) -> String {
    pred(p)
}

fn pad(depth: usize) -> String {
    "  ".repeat(depth)
}

fn block(s: &Stmt, depth: usize) -> String {
    format!("{{\n{}\n{}}}", stmt(s, depth + 1), pad(depth))
}

fn stmt(s: &Stmt, depth: usize) -> String {
    let ind = pad(depth);
    match s {
        Stmt::Skip => format!("{ind}skip"),
        Stmt::Assign(x, e) => format!("{ind}{x} := {}", arith(e)),
        Stmt::Uniform(x, es) => {
            let args: Vec<String> = es.iter().map(arith).collect();
            format!("{ind}{x} := uniform({})", args.join(", "))
        }
        Stmt::Seq(a, b) => {
            let first = match **a {
                Stmt::Seq(..) => format!("{ind}{}", block(a, depth)),
                _ => stmt(a, depth),
            };
            format!("{first};\n{}", stmt(b, depth))
        }
        Stmt::GChoice(g1, a, g2, b) => format!(
            "{ind}if {} -> {} [] {} -> {} fi",
            pred(g1),
            block(a, depth),
            pred(g2),
            block(b, depth)
        ),
        Stmt::Choice(arms) => {
            let parts: Vec<String> = arms.iter().map(|(g, s)| format!("{} -> {}", pred(g), block(s, depth))).collect();
            format!("{ind}if {} fi", parts.join(" [] "))
        }
        Stmt::IfElse(g, a, b) => format!("{ind}if {} {} else {}", pred(g), block(a, depth), block(b, depth)),
        Stmt::PChoice(a, p, b) => format!("{ind}{} [{}] {}", block(a, depth), arith(p), block(b, depth)),
        Stmt::While(g, body, inv) => format!("{ind}while {} inv {} {}", pred(g), exp(inv), block(body, depth)),
    }
}

/// Prints a statement in the concrete syntax accepted by [`super::parse_stmt`].
pub fn print_program(s: &Stmt) -> String {
    stmt(s, 0)
}

pub fn print_source(f: &SourceFile) -> String {
    let mut out = String::new();
    for v in f.domain.vars() {
        if v.sampled {
            let vals: Vec<String> = v.values.iter().map(fmt_rat).collect();
            out.push_str(&format!("domain {} in {{{}}};\n", v.name, vals.join(", ")));
        } else {
            let (lo, hi) = (v.values.first().expect("non-empty"), v.values.last().expect("non-empty"));
            out.push_str(&format!("domain {}: {}..{};\n", v.name, fmt_rat(lo), fmt_rat(hi)));
        }
    }
    if let Some(p) = f.domain.init() {
        out.push_str(&format!("init {};\n", pred(p)));
    }
    if let Some(e) = &f.post {
        out.push_str(&format!("post {};\n", exp(e)));
    }
    if let Some(e) = &f.threshold {
        out.push_str(&format!("threshold {};\n", exp(e)));
    }
    if let Some(d) = f.direction {
        let d = match d {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        };
        out.push_str(&format!("direction {d};\n"));
    }
    out.push_str(&format!("program {}\n", block(&f.program, 0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expectation, parse_pred, parse_program, parse_stmt};

    #[test]
    fn guarded_choice_layout() {
        let s = parse_stmt("if y <= z -> { x := y } [] y >= z -> { x := z } fi").unwrap();
        let text = print_program(&s);
        assert!(text.starts_with("if y <= z -> {"), "{text}");
        assert!(text.contains("} [] y >= z -> {"), "{text}");
        assert!(text.ends_with("} fi"), "{text}");
    }

    #[test]
    fn expectation_comparisons_print_as_wpcmp() {
        let p = Pred::ExpCmp(Box::new(Expectation::var("y")), crate::ast::Dir::Le, Box::new(Expectation::var("z")));
        assert_eq!(print_pred(&p), "wpcmp(<=, y, z)");
        assert_eq!(parse_pred(&print_pred(&p)).unwrap(), p);
    }

    #[test]
    fn minimal_parentheses() {
        for src in [
            "x - (y - z)",
            "(x - y) - z",
            "x * (y + 1)",
            "2 / (3 * x)",
            "(x + 1)^2",
            "1/2^(n - 1)",
            "[a = 0] * (1 - [p <= q] * q^ceil((N - c) / 2))",
            "imp(x > 0 && !(y = 1 || z = 2), x)",
        ] {
            let e = parse_expectation(src).unwrap();
            let printed = print_expectation(&e);
            assert_eq!(parse_expectation(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn nested_sequences_keep_their_shape() {
        let s = parse_stmt("{ x := 1; y := 2 }; z := 3").unwrap();
        assert!(matches!(&s, Stmt::Seq(a, _) if matches!(**a, Stmt::Seq(..))));
        assert_eq!(parse_stmt(&print_program(&s)).unwrap(), s);
    }

    #[test]
    fn files_roundtrip() {
        let text = "domain c: 0..1; domain p in {1/4, 1/2}; domain x: 0..3; init c = 1;
                    post x; threshold x + 1; direction upper;
                    program { { c := 0 } [p] { x := x + 1 } }";
        let f = parse_program(text).unwrap();
        let printed = print_source(&f);
        assert_eq!(parse_program(&printed).unwrap(), f);
        assert_eq!(print_source(&parse_program(&printed).unwrap()), printed);
    }
}
