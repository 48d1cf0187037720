use num_bigint::BigInt;

use crate::ast::Rat;

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// An integer or an `a/b` literal written without spaces.
    Num(Rat),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

// Longest first so that prefixes do not shadow longer symbols.
const SYMBOLS: &[&str] = &[
    "==>", ":=", "..", "->", "[]", "&&", "||", "<=", ">=", "!=", "+", "-", "*", "/", "%", "^", "(", ")",
    "{", "}", "[", "]", ",", ";", ":", "=", "<", ">", "!",
];

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let digits = |from: usize| {
                let mut j = from;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                j
            };
            let end = digits(i);
            let num: BigInt = chars[i..end].iter().collect::<String>().parse().expect("digits");
            let mut value = Rat::from_integer(num);
            let mut stop = end;
            if chars.get(end) == Some(&'/') && chars.get(end + 1).is_some_and(|d| d.is_ascii_digit()) {
                let dend = digits(end + 1);
                let den: BigInt = chars[end + 1..dend].iter().collect::<String>().parse().expect("digits");
                if den == BigInt::from(0) {
                    return Err(ParseError::syntax(pos, "zero denominator in rational literal"));
                }
                value = Rat::new(value.to_integer(), den);
                stop = dend;
            }
            let n = stop - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push((Tok::Num(value), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.len());
                out.push((Tok::Sym(s), pos));
            }
            None => return Err(ParseError::syntax(pos, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ratio;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn rational_literals_need_adjacent_digits() {
        assert_eq!(toks("1/2")[0], Tok::Num(ratio(1, 2)));
        assert_eq!(toks("1 / 2")[1], Tok::Sym("/"));
        assert_eq!(toks("0..10")[1], Tok::Sym(".."));
    }

    #[test]
    fn positions_and_comments() {
        let t = lex("// note\n  x := 1").unwrap();
        assert_eq!(t[0].1, Pos { line: 2, col: 3 });
        assert_eq!(t[1].0, Tok::Sym(":="));
    }

    #[test]
    fn primes_are_identifier_characters() {
        assert_eq!(toks("c' := 1")[0], Tok::Ident("c'".into()));
    }

    #[test]
    fn box_token() {
        assert_eq!(toks("} [] x")[1], Tok::Sym("[]"));
        assert_eq!(toks("[ ]")[0], Tok::Sym("["));
    }
}
