use std::fmt;

use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(usize),
    Kw(&'static str),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Assign,
    Eq,
    Bang,
    Slash,
    Hash,
    Eof,
}

pub const KEYWORDS: &[&str] = &[
    "rule", "if", "then", "else", "endif", "par", "issue", "fail", "skip", "nlet", "vlet", "in",
    "preceq", "prec", "approx", "succeq", "succ", "kand", "kor", "knot", "static", "dynamic",
    "relational", "labels", "external",
];

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Kw(k) => write!(f, "`{k}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Hash => f.write_str("`#`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse().map_err(|_| SyntaxError {
                line,
                col,
                expected: "a number that fits in usize".into(),
                found: digits.clone(),
            })?;
            Tok::Num(n)
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '!' => Tok::Bang,
                '/' => Tok::Slash,
                '#' => Tok::Hash,
                ':' if chars.get(i) == Some(&'=') => {
                    i += 1;
                    Tok::Assign
                }
                other => {
                    return Err(SyntaxError {
                        line,
                        col,
                        expected: "a token".into(),
                        found: format!("character `{other}`"),
                    })
                }
            }
        };
        col += i - start;
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span::new(line, col)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("rule // c\n  f() := x!").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|(t, _)| t).collect();
        assert_eq!(
            kinds,
            vec![
                &Tok::Kw("rule"),
                &Tok::Ident("f".into()),
                &Tok::LParen,
                &Tok::RParen,
                &Tok::Assign,
                &Tok::Ident("x".into()),
                &Tok::Bang,
                &Tok::Eof
            ]
        );
        assert_eq!((toks[1].1.line, toks[1].1.col), (2, 3));
        assert_eq!((toks[4].1.line, toks[4].1.col), (2, 7));
    }

    #[test]
    fn stray_character() {
        let e = tokenize("rule @").unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
    }
}
