//! Tokenizer shared by the specification, PTS and LHA grammars.

use num::BigInt;

use crate::error::{Error, Result};
use crate::linarith::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `_n`, `_n/d` or a plain integer.
    Num(Rat),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Assign,
    Plus,
    Minus,
    Star,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
    Implies,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(q) => format!("numeral `{}`", crate::logic::rational_to_string(q)),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Assign => ":=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Implies => "-->",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Tokenize `text`. Lines and columns are 1-based and offset by
/// `line_offset` (used when the text is embedded in a task file). `#`
/// starts a comment running to the end of the line.
pub fn tokenize(text: &str, line_offset: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1 + line_offset, 1usize);
    let err = |line, col, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let rest = |k: usize| chars.get(i + k).copied();
        let (tok, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c == '_' || c.is_ascii_digit() {
            let mut j = if c == '_' { i + 1 } else { i };
            let num_start = j;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j == num_start {
                return Err(err(start_line, start_col, "expected digits after `_`".into()));
            }
            let numer: BigInt = chars[num_start..j].iter().collect::<String>().parse().expect("digits");
            let mut q = Rat::from_integer(numer);
            if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                let d_start = j + 1;
                let mut k = d_start;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let denom: BigInt = chars[d_start..k].iter().collect::<String>().parse().expect("digits");
                if denom == BigInt::from(0) {
                    return Err(err(start_line, start_col, "zero denominator".into()));
                }
                q /= Rat::from_integer(denom);
                j = k;
            }
            if j < chars.len() && is_ident_start(chars[j]) {
                return Err(err(line, col + (j - i), "identifier cannot start with a digit".into()));
            }
            (Tok::Num(q), j - i)
        } else {
            match (c, rest(1), rest(2)) {
                ('-', Some('-'), Some('>')) => (Tok::Implies, 3),
                ('-', Some('>'), _) => (Tok::Arrow, 2),
                (':', Some('='), _) => (Tok::Assign, 2),
                ('<', Some('='), _) => (Tok::Le, 2),
                ('>', Some('='), _) => (Tok::Ge, 2),
                ('!', Some('='), _) => (Tok::Ne, 2),
                ('(', ..) => (Tok::LParen, 1),
                (')', ..) => (Tok::RParen, 1),
                ('{', ..) => (Tok::LBrace, 1),
                ('}', ..) => (Tok::RBrace, 1),
                (',', ..) => (Tok::Comma, 1),
                (';', ..) => (Tok::Semi, 1),
                (':', ..) => (Tok::Colon, 1),
                ('.', ..) => (Tok::Dot, 1),
                ('+', ..) => (Tok::Plus, 1),
                ('-', ..) => (Tok::Minus, 1),
                ('*', ..) => (Tok::Star, 1),
                ('<', ..) => (Tok::Lt, 1),
                ('>', ..) => (Tok::Gt, 1),
                ('=', ..) => (Tok::Eq, 1),
                _ => return Err(err(start_line, start_col, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token { tok, line: start_line, col: start_col });
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
