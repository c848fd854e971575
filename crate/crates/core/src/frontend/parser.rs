//! Recursive-descent parser for specifications:
//!
//! ```text
//! Base_functions := {(+,2), (-,2), (*,2)}
//! Extension_functions := {(a, 1, 2), (ap, 1, 3)}
//! Relations := {(<=,2), (<,2), (>=,2), (>,2)}
//! Clauses := (FORALL j). ap(j) = a(j) + _1;  d1p = ap(i);
//! Query := d1p - d2p > _0;
//! ```
//!
//! Formulas: atoms `t rel t`, `OR(..)`, `AND(..)`, `NOT(..)`, `TRUE`,
//! `FALSE`, implication `-->` (right associative), quantifier prefixes
//! `(FORALL v1,v2). body` / `(EXISTS v). body`, and parenthesized formulas.
//! A leading `(` is first tried as the start of a term and re-parsed as a
//! parenthesized formula if that fails.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};
use crate::linarith::Rat;
use crate::logic::{sym, Atom, ExtensionFn, Formula, Rel, Signature, Symbol, Term};

/// Parsed specification: signature, axioms K (with level annotations
/// available through [`clause_level`]) and the ground goal G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub signature: Signature,
    pub clauses: Vec<Formula>,
    pub query: Vec<Formula>,
}

impl ProblemSpec {
    pub fn new(signature: Signature) -> ProblemSpec {
        ProblemSpec { signature, clauses: Vec::new(), query: Vec::new() }
    }

    /// All statements (clauses, then query).
    pub fn all_formulas(&self) -> impl Iterator<Item = &Formula> {
        self.clauses.iter().chain(self.query.iter())
    }
}

/// Highest extension level of a function symbol in `f` (0 if none).
pub fn clause_level(f: &Formula, sig: &Signature) -> usize {
    f.functions().iter().filter_map(|g| sig.level(g)).max().unwrap_or(0)
}

/// Parser options for the different input dialects.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dialect {
    /// Accept `d(x)` for the derivative of `x` (LHA flows).
    pub derivatives: bool,
}

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    sig: &'a Signature,
    bound: Vec<Symbol>,
    dialect: Dialect,
}

fn syntax(t: &Token, msg: impl Into<String>) -> Error {
    Error::Syntax { line: t.line, col: t.col, msg: msg.into() }
}

const KEYWORDS: [&str; 7] = ["FORALL", "EXISTS", "OR", "AND", "NOT", "TRUE", "FALSE"];

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: Vec<Token>, sig: &'a Signature, dialect: Dialect) -> Parser<'a> {
        Parser { toks, pos: 0, sig, bound: Vec::new(), dialect }
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    pub(crate) fn expect(&mut self, t: Tok) -> Result<Token> {
        if self.at(&t) {
            Ok(self.bump())
        } else {
            Err(syntax(self.peek(), format!("expected `{}`, found {}", t.text(), self.peek().tok.describe())))
        }
    }

    pub(crate) fn expect_ident(&mut self) -> Result<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            other => Err(syntax(self.peek(), format!("expected identifier, found {}", other.describe()))),
        }
    }

    pub(crate) fn at_ident(&self, name: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == name)
    }

    // ----- formulas -------------------------------------------------------

    pub(crate) fn formula(&mut self) -> Result<Formula> {
        if self.at(&Tok::LParen) {
            if let Tok::Ident(q) = self.peek_at(1) {
                if q == "FORALL" || q == "EXISTS" {
                    return self.quantified();
                }
            }
        }
        let lhs = self.unary_formula()?;
        if self.at(&Tok::Implies) {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn quantified(&mut self) -> Result<Formula> {
        self.expect(Tok::LParen)?;
        let (q, _) = self.expect_ident()?;
        let mut vars = Vec::new();
        loop {
            let (v, t) = self.expect_ident()?;
            if KEYWORDS.contains(&v.as_str()) {
                return Err(syntax(&t, format!("keyword `{v}` used as variable")));
            }
            vars.push(sym(&v));
            if self.at(&Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        let n = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let body = self.formula();
        self.bound.truncate(n);
        let body = Box::new(body?);
        Ok(if q == "FORALL" { Formula::Forall(vars, body) } else { Formula::Exists(vars, body) })
    }

    fn formula_list(&mut self) -> Result<Vec<Formula>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.at(&Tok::RParen) {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(self.formula()?);
            if self.at(&Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn unary_formula(&mut self) -> Result<Formula> {
        if let Tok::Ident(k) = &self.peek().tok {
            match (k.as_str(), self.peek_at(1)) {
                ("OR", Tok::LParen) => {
                    self.bump();
                    return Ok(Formula::Or(self.formula_list()?));
                }
                ("AND", Tok::LParen) => {
                    self.bump();
                    return Ok(Formula::And(self.formula_list()?));
                }
                ("NOT", Tok::LParen) => {
                    self.bump();
                    let t = self.peek().clone();
                    let mut fs = self.formula_list()?;
                    if fs.len() != 1 {
                        return Err(syntax(&t, "NOT takes exactly one argument"));
                    }
                    return Ok(Formula::Not(Box::new(fs.remove(0))));
                }
                ("TRUE", _) => {
                    self.bump();
                    return Ok(Formula::True);
                }
                ("FALSE", _) => {
                    self.bump();
                    return Ok(Formula::False);
                }
                _ => {}
            }
        }
        if self.at(&Tok::LParen) {
            let save = self.pos;
            match self.atom() {
                Ok(a) => return Ok(a),
                Err(e_atom) => {
                    let atom_pos = self.pos;
                    self.pos = save;
                    self.bump();
                    match self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f)) {
                        Ok(f) => return Ok(f),
                        Err(e_formula) => {
                            // Report whichever reading got further.
                            return Err(if atom_pos > self.pos { e_atom } else { e_formula });
                        }
                    }
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        let t = self.peek().clone();
        let (rel, name) = match &t.tok {
            Tok::Eq => (Rel::Eq, "="),
            Tok::Le => (Rel::Le, "<="),
            Tok::Lt => (Rel::Lt, "<"),
            Tok::Ge => (Rel::Ge, ">="),
            Tok::Gt => (Rel::Gt, ">"),
            Tok::Ne => {
                self.bump();
                let rhs = self.term()?;
                return Ok(Formula::Not(Box::new(Formula::Atom(Atom::new(lhs, Rel::Eq, rhs)))));
            }
            other => return Err(syntax(&t, format!("expected a relation, found {}", other.describe()))),
        };
        if rel != Rel::Eq && !self.sig.relations.contains_key(name) {
            return Err(Error::Undeclared { symbol: name.into(), line: t.line, col: t.col });
        }
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Atom(Atom::new(lhs, rel, rhs)))
    }

    // ----- terms ----------------------------------------------------------

    fn require_op(&self, op: &str, t: &Token) -> Result<()> {
        if self.sig.base_functions.contains_key(op) {
            Ok(())
        } else {
            Err(Error::Undeclared { symbol: op.into(), line: t.line, col: t.col })
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term> {
        let mut acc = self.product()?;
        loop {
            let t = self.peek().clone();
            let op = match t.tok {
                Tok::Plus => "+",
                Tok::Minus => "-",
                _ => return Ok(acc),
            };
            self.require_op(op, &t)?;
            self.bump();
            let rhs = self.product()?;
            acc = if op == "+" { Term::add(acc, rhs) } else { Term::sub(acc, rhs) };
        }
    }

    fn product(&mut self) -> Result<Term> {
        let mut acc = self.unary_term()?;
        while self.at(&Tok::Star) {
            let t = self.bump();
            self.require_op("*", &t)?;
            let rhs = self.unary_term()?;
            acc = Term::mul(acc, rhs);
        }
        Ok(acc)
    }

    fn unary_term(&mut self) -> Result<Term> {
        if self.at(&Tok::Minus) {
            let t = self.bump();
            if let Tok::Num(q) = &self.peek().tok {
                let q = q.clone();
                self.bump();
                return Ok(Term::Num(-q));
            }
            self.require_op("-", &t)?;
            return Ok(Term::neg(self.unary_term()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(q) => {
                let q = q.clone();
                self.bump();
                Ok(Term::Num(q))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let name = name.clone();
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(syntax(&t, format!("keyword `{name}` used as a term")));
                }
                self.bump();
                if !self.at(&Tok::LParen) {
                    let s = sym(&name);
                    return Ok(if self.bound.contains(&s) { Term::Var(s) } else { Term::Const(s) });
                }
                if self.dialect.derivatives && name == "d" && self.sig.arity("d").is_none() {
                    self.bump();
                    let (x, _) = self.expect_ident()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Term::Const(sym(&format!("d({x})"))));
                }
                let Some(arity) = self.sig.arity(&name) else {
                    return Err(Error::Undeclared { symbol: name, line: t.line, col: t.col });
                };
                self.bump();
                let mut args = Vec::new();
                if !self.at(&Tok::RParen) {
                    loop {
                        args.push(self.term()?);
                        if self.at(&Tok::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                if args.len() != arity {
                    return Err(Error::Arity { symbol: name, expected: arity, found: args.len(), line: t.line, col: t.col });
                }
                Ok(Term::App(sym(&name), args))
            }
            other => Err(syntax(&t, format!("expected a term, found {}", other.describe()))),
        }
    }

    // ----- statement lists ------------------------------------------------

    /// `true` if the next tokens start a new section (`Name :=` or
    /// `name :` for one of `stop`).
    pub(crate) fn at_section(&self, stop: &[&str]) -> bool {
        match (&self.peek().tok, self.peek_at(1)) {
            (Tok::Ident(_), Tok::Assign) => true,
            (Tok::Ident(s), Tok::Colon) => stop.contains(&s.as_str()),
            (Tok::Ident(s), Tok::Ident(_) | Tok::Num(_)) => stop.contains(&s.as_str()) && (s == "mode" || s == "edge"),
            _ => false,
        }
    }

    /// Semicolon-terminated formulas up to the next section or end of
    /// input (the last `;` is optional).
    pub(crate) fn statements(&mut self, stop: &[&str]) -> Result<Vec<Formula>> {
        let mut out = Vec::new();
        while !self.at_eof() && !self.at_section(stop) {
            out.push(self.formula()?);
            if self.at(&Tok::Semi) {
                self.bump();
            } else if !self.at_eof() && !self.at_section(stop) {
                return Err(syntax(self.peek(), format!("expected `;`, found {}", self.peek().tok.describe())));
            }
        }
        Ok(out)
    }
}

// ----- declarations -------------------------------------------------------

fn decl_name(p: &mut Parser) -> Result<String> {
    let t = p.bump();
    match &t.tok {
        Tok::Ident(s) => Ok(s.clone()),
        Tok::Plus | Tok::Minus | Tok::Star | Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt | Tok::Eq => Ok(t.tok.text().into()),
        other => Err(syntax(&t, format!("expected a symbol name, found {}", other.describe()))),
    }
}

fn decl_nat(p: &mut Parser) -> Result<usize> {
    let t = p.bump();
    match &t.tok {
        Tok::Num(q) if q.is_integer() && *q >= Rat::from_integer(0.into()) => {
            q.to_integer().try_into().map_err(|_| syntax(&t, "number too large"))
        }
        other => Err(syntax(&t, format!("expected a natural number, found {}", other.describe()))),
    }
}

/// `{(name, n1, ..., nk), ...}` with exactly `width` numbers per entry.
fn decl_set(p: &mut Parser, width: usize) -> Result<Vec<(String, Vec<usize>, Token)>> {
    p.expect(Tok::LBrace)?;
    let mut out = Vec::new();
    while !p.at(&Tok::RBrace) {
        let open = p.expect(Tok::LParen)?;
        let name = decl_name(p)?;
        let mut nums = Vec::new();
        for _ in 0..width {
            p.expect(Tok::Comma)?;
            nums.push(decl_nat(p)?);
        }
        p.expect(Tok::RParen)?;
        out.push((name, nums, open));
        if p.at(&Tok::Comma) {
            p.bump();
        } else {
            break;
        }
    }
    p.expect(Tok::RBrace)?;
    Ok(out)
}

/// `{(+,2), (-,2)}` → name → arity.
pub fn parse_function_decls(text: &str) -> Result<BTreeMap<Symbol, usize>> {
    let sig = Signature::default();
    let mut p = Parser::new(tokenize(text, 0)?, &sig, Dialect::default());
    let set = decl_set(&mut p, 1)?;
    p.expect(Tok::Eof)?;
    Ok(set.into_iter().map(|(n, v, _)| (sym(&n), v[0])).collect())
}

/// `{(a, 1, 2), (ap, 1, 3)}` → name → (arity, level).
pub fn parse_extension_decls(text: &str) -> Result<BTreeMap<Symbol, ExtensionFn>> {
    let sig = Signature::default();
    let mut p = Parser::new(tokenize(text, 0)?, &sig, Dialect::default());
    let set = decl_set(&mut p, 2)?;
    p.expect(Tok::Eof)?;
    Ok(set.into_iter().map(|(n, v, _)| (sym(&n), ExtensionFn { arity: v[0], level: v[1] })).collect())
}

/// Parse a complete specification with declaration, `Clauses` and `Query`
/// sections.
pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    parse_spec_at(text, 0)
}

/// As [`parse_spec`], with reported line numbers shifted by `line_offset`.
pub fn parse_spec_at(text: &str, line_offset: usize) -> Result<ProblemSpec> {
    let toks = tokenize(text, line_offset)?;
    // Declarations are read first so that the formula sections can be
    // resolved against the signature regardless of section order.
    let mut sig = Signature::default();
    {
        let empty = Signature::default();
        let mut p = Parser::new(toks.clone(), &empty, Dialect::default());
        while !p.at_eof() {
            let (name, t) = p.expect_ident()?;
            p.expect(Tok::Assign)?;
            match name.as_str() {
                "Base_functions" => {
                    for (n, v, _) in decl_set(&mut p, 1)? {
                        sig.base_functions.insert(sym(&n), v[0]);
                    }
                }
                "Extension_functions" => {
                    for (n, v, t) in decl_set(&mut p, 2)? {
                        if v[1] == 0 {
                            return Err(syntax(&t, format!("extension function `{n}` needs a level >= 1")));
                        }
                        sig.extension_functions.insert(sym(&n), ExtensionFn { arity: v[0], level: v[1] });
                    }
                }
                "Relations" => {
                    for (n, v, _) in decl_set(&mut p, 1)? {
                        sig.relations.insert(sym(&n), v[0]);
                    }
                }
                "Parameters" => {
                    p.expect(Tok::LBrace)?;
                    while !p.at(&Tok::RBrace) {
                        let (n, _) = p.expect_ident()?;
                        sig.parameters.insert(sym(&n));
                        if p.at(&Tok::Comma) {
                            p.bump();
                        }
                    }
                    p.expect(Tok::RBrace)?;
                }
                "Clauses" | "Query" => {
                    // Skip to the next section; parsed in the second pass.
                    while !p.at_eof() && !p.at_section(&[]) {
                        p.bump();
                    }
                }
                other => return Err(syntax(&t, format!("unknown section `{other}`"))),
            }
        }
    }
    sig.validate()?;
    let mut spec = ProblemSpec::new(sig.clone());
    let mut p = Parser::new(toks, &sig, Dialect::default());
    while !p.at_eof() {
        let (name, _) = p.expect_ident()?;
        p.expect(Tok::Assign)?;
        match name.as_str() {
            "Clauses" => spec.clauses.extend(p.statements(&[])?),
            "Query" => spec.query.extend(p.statements(&[])?),
            _ => {
                while !p.at_eof() && !p.at_section(&[]) {
                    p.bump();
                }
            }
        }
    }
    Ok(spec)
}

/// Parse `;`-separated statements against a signature.
pub fn parse_statements(text: &str, sig: &Signature) -> Result<Vec<Formula>> {
    parse_statements_with(text, sig, Dialect::default())
}

pub fn parse_statements_with(text: &str, sig: &Signature, dialect: Dialect) -> Result<Vec<Formula>> {
    parse_statements_at(text, sig, dialect, 0)
}

pub fn parse_statements_at(text: &str, sig: &Signature, dialect: Dialect, line_offset: usize) -> Result<Vec<Formula>> {
    let mut p = Parser::new(tokenize(text, line_offset)?, sig, dialect);
    let out = p.statements(&[])?;
    p.expect(Tok::Eof)?;
    Ok(out)
}

/// Parse a single formula (a trailing `;` is allowed).
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    let mut p = Parser::new(tokenize(text, 0)?, sig, Dialect::default());
    let f = p.formula()?;
    if p.at(&Tok::Semi) {
        p.bump();
    }
    p.expect(Tok::Eof)?;
    Ok(f)
}

/// `;`-separated ground terms (seed terms for the instantiation closure).
pub fn parse_terms(text: &str, sig: &Signature) -> Result<Vec<Term>> {
    let mut p = Parser::new(tokenize(text, 0)?, sig, Dialect::default());
    let mut out = Vec::new();
    while !p.at_eof() {
        out.push(p.term()?);
        if !p.at_eof() {
            p.expect(Tok::Semi)?;
        }
    }
    Ok(out)
}

/// Symbols used as constants anywhere in the specification.
pub fn spec_constants(spec: &ProblemSpec) -> BTreeSet<Symbol> {
    spec.all_formulas().flat_map(|f| f.consts()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = "Base_functions := {(+,2), (-,2), (*,2)}
Extension_functions := {(b, 1, 1), (a, 1, 2), (ap, 1, 3)}
Relations := {(<=,2), (<,2), (>=,2), (>,2)}

Clauses :=
    d1 <= d2;

    (FORALL j). ap(j) = a(j) + _1;
    d1p = ap(i);
    d2p = ap(i + _1);
    ip = i + _1;
Query :=   d1p - d2p > _0;
";

    #[test]
    fn example_one_parses() {
        let s = parse_spec(EX1).unwrap();
        assert_eq!(s.signature.level("a"), Some(2));
        assert_eq!(s.signature.level("ap"), Some(3));
        assert_eq!(s.clauses.len(), 5);
        assert_eq!(s.clauses[1].to_string(), "(FORALL j). ap(j) = a(j) + _1");
        assert_eq!(s.query[0].to_string(), "d1p - d2p > _0");
        assert_eq!(clause_level(&s.clauses[1], &s.signature), 3);
    }

    #[test]
    fn quantified_implication() {
        let sig = parse_spec(EX1).unwrap().signature;
        let f = parse_formula("(FORALL i,j). i <= j --> b(i) <= b(j);", &sig).unwrap();
        assert_eq!(f.to_string(), "(FORALL i,j). (i <= j) --> (b(i) <= b(j))");
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn parenthesis_ambiguity() {
        let sig = Signature::arithmetic();
        let f = parse_formula("(x1 + x2) + x3 <= lf", &sig).unwrap();
        assert_eq!(f.to_string(), "(x1 + x2) + x3 <= lf");
        let g = parse_formula("(x <= y) --> (y <= x)", &sig).unwrap();
        assert!(matches!(g, Formula::Implies(..)));
        let h = parse_formula("OR(min < _0, NOT(ea = 0))", &sig).unwrap();
        assert_eq!(h.to_string(), "OR(min < _0, NOT(ea = _0))");
    }

    #[test]
    fn errors_point_at_tokens() {
        let sig = Signature::arithmetic();
        match parse_formula("x <= f(y)", &sig) {
            Err(Error::Undeclared { symbol, line: 1, col: 6 }) => assert_eq!(symbol, "f"),
            other => panic!("{other:?}"),
        }
        let text = EX1.replace("(ap, 1, 3)", "(ap, 2, 3)");
        assert!(matches!(parse_spec(&text), Err(Error::Arity { .. })));
        let text = EX1.replace("(>,2)", "");
        assert!(parse_spec(&text).is_err());
        match parse_formula("x <= ", &sig) {
            Err(Error::Syntax { line: 1, col: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_relation_is_rejected() {
        let mut sig = Signature::arithmetic();
        sig.relations.remove(">");
        assert!(matches!(parse_formula("x > y", &sig), Err(Error::Undeclared { .. })));
    }

    #[test]
    fn declarations() {
        let f = parse_function_decls("{(+,2), (-,2), (*,2)}").unwrap();
        assert_eq!(f.len(), 3);
        let e = parse_extension_decls("{}").unwrap();
        assert!(e.is_empty());
    }
}
