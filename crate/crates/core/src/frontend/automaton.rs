//! Text format for linear hybrid automata.
//!
//! ```text
//! variables: x1, x2;
//! parameters: lf, ea;
//! epsilon: eps;
//! mode 1:
//!     inv: x1 + x2 <= lf;
//!     flow: d(x1) >= _1; d(x2) = _0;
//!     init: x1 = _0; x2 = _0;
//!     inenv: x1 + x2 <= lf;
//! edge 1 -> 2:
//!     guard: x1 + x2 >= lf;
//!     jump: x1' = x1; x2' = x2;
//! property: x1 + x2 <= lf;
//! assume: lf >= _0;
//! ```
//!
//! Primed variables in jumps (`x1'`) denote post-jump values and are
//! renamed to `x1p`; `d(x)` in flows is the derivative of `x`. Without a
//! `parameters:` section every symbol other than the variables is a
//! parameter.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok};
use super::parser::{Dialect, Parser};
use crate::error::{Error, Result};
use crate::lha::{primed_name, Edge, HybridAutomaton, Mode};
use crate::logic::{sym, Formula, Signature, Symbol};

const SECTIONS: [&str; 13] = [
    "variables", "parameters", "epsilon", "mode", "edge", "property", "assume", "inv", "flow", "init", "inenv",
    "guard", "jump",
];

fn syntax(p: &Parser, msg: String) -> Error {
    let t = p.peek();
    Error::Syntax { line: t.line, col: t.col, msg }
}

fn node_name(p: &mut Parser) -> Result<String> {
    let t = p.bump();
    match &t.tok {
        Tok::Ident(s) => Ok(s.clone()),
        Tok::Num(q) if q.is_integer() => Ok(q.to_string()),
        other => Err(Error::Syntax { line: t.line, col: t.col, msg: format!("expected a mode name, found {}", other.describe()) }),
    }
}

fn name_list(p: &mut Parser) -> Result<Vec<Symbol>> {
    let mut out = Vec::new();
    while !p.at(&Tok::Semi) && !p.at_eof() && !p.at_section(&SECTIONS) {
        let (n, _) = p.expect_ident()?;
        out.push(sym(&n));
        if p.at(&Tok::Comma) {
            p.bump();
        }
    }
    if p.at(&Tok::Semi) {
        p.bump();
    }
    Ok(out)
}

fn key(p: &mut Parser, allowed: &[&str]) -> Result<Option<String>> {
    match &p.peek().tok {
        Tok::Ident(s) if allowed.contains(&s.as_str()) && p.peek_at(1) == &Tok::Colon => {
            let s = s.clone();
            p.bump();
            p.bump();
            Ok(Some(s))
        }
        _ => Ok(None),
    }
}

/// `x'` (as written) to `xp`.
fn unprime(fs: Vec<Formula>, vars: &[Symbol]) -> Vec<Formula> {
    let r: BTreeMap<Symbol, Symbol> = vars.iter().map(|x| (sym(&format!("{x}'")), primed_name(x))).collect();
    fs.into_iter().map(|f| f.rename(&r)).collect()
}

/// Parse an automaton; `line_offset` shifts reported line numbers (for
/// automata embedded in task files).
pub fn parse_lha(text: &str, line_offset: usize) -> Result<HybridAutomaton> {
    let sig = Signature::arithmetic();
    let mut p = Parser::new(tokenize(text, line_offset)?, &sig, Dialect { derivatives: true });
    let mut h = HybridAutomaton::default();
    let mut declared_params: Option<Vec<Symbol>> = None;
    let mut pair_count: BTreeMap<(String, String), usize> = BTreeMap::new();
    while !p.at_eof() {
        if p.at_ident("mode") && p.peek_at(1) != &Tok::Colon {
            p.bump();
            let name = node_name(&mut p)?;
            p.expect(Tok::Colon)?;
            let mut m = Mode { name, ..Default::default() };
            while let Some(k) = key(&mut p, &["inv", "flow", "init", "inenv"])? {
                let body = p.statements(&SECTIONS)?;
                match k.as_str() {
                    "inv" => m.inv.extend(body),
                    "flow" => m.flow.extend(body),
                    "init" => m.init.get_or_insert_with(Vec::new).extend(body),
                    _ => m.inenv.get_or_insert_with(Vec::new).extend(body),
                }
            }
            h.modes.push(m);
            continue;
        }
        if p.at_ident("edge") && p.peek_at(1) != &Tok::Colon {
            p.bump();
            let source = node_name(&mut p)?;
            p.expect(Tok::Arrow)?;
            let target = node_name(&mut p)?;
            p.expect(Tok::Colon)?;
            let count = pair_count.entry((source.clone(), target.clone())).or_insert(0);
            *count += 1;
            let mut e = Edge { source, target, index: *count, guard: Vec::new(), jump: Vec::new() };
            while let Some(k) = key(&mut p, &["guard", "jump"])? {
                let body = p.statements(&SECTIONS)?;
                if k == "guard" {
                    e.guard.extend(body)
                } else {
                    e.jump.extend(body)
                }
            }
            h.edges.push(e);
            continue;
        }
        let Some(k) = key(&mut p, &["variables", "parameters", "epsilon", "property", "assume"])? else {
            return Err(syntax(&p, format!("expected a section, found {}", p.peek().tok.describe())));
        };
        match k.as_str() {
            "variables" => h.variables.extend(name_list(&mut p)?),
            "parameters" => declared_params.get_or_insert_with(Vec::new).extend(name_list(&mut p)?),
            "epsilon" => {
                h.epsilon = Some(p.term()?);
                if p.at(&Tok::Semi) {
                    p.bump();
                }
            }
            "property" => h.property.extend(p.statements(&SECTIONS)?),
            _ => h.assumptions.extend(p.statements(&SECTIONS)?),
        }
    }
    let vars = h.variables.clone();
    for e in &mut h.edges {
        e.jump = unprime(std::mem::take(&mut e.jump), &vars);
    }
    h.parameters = match declared_params {
        Some(ps) => ps,
        None => {
            let vars: BTreeSet<Symbol> = h.variables.iter().cloned().collect();
            let post: BTreeSet<Symbol> = h.variables.iter().map(|x| primed_name(x)).collect();
            let mut all = BTreeSet::new();
            let mut collect = |fs: &[Formula]| {
                for f in fs {
                    all.extend(f.consts().into_iter().filter(|c| !vars.contains(c) && !post.contains(c) && !c.starts_with("d(")));
                }
            };
            collect(&h.property);
            collect(&h.assumptions);
            for m in &h.modes {
                collect(&m.inv);
                collect(&m.flow);
                collect(m.init.as_deref().unwrap_or(&[]));
                collect(m.inenv.as_deref().unwrap_or(&[]));
            }
            for e in &h.edges {
                collect(&e.guard);
                collect(&e.jump);
            }
            if let Some(crate::logic::Term::Const(e)) = &h.epsilon {
                all.remove(e);
            }
            all.into_iter().collect()
        }
    };
    h.validate()?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::print_formula;

    const TANK: &str = "
variables: x;
parameters: lf;
epsilon: eps;
mode fill:
    inv: x <= lf; x >= _0;
    flow: d(x) >= _1; d(x) <= _2;
    init: x = _0;
    inenv: x <= lf - _1;
mode drain:
    inv: x >= _0;
    flow: d(x) = -1;
edge fill -> drain:
    guard: x >= lf;
    jump: x' = x;
edge fill -> drain:
    guard: x >= lf;
    jump: x' = _0;
property: x <= lf;
assume: lf >= _0;
";

    #[test]
    fn parses_modes_and_edges() {
        let h = parse_lha(TANK, 0).unwrap();
        assert_eq!(h.modes.len(), 2);
        assert_eq!(h.edges.iter().map(|e| e.name()).collect::<Vec<_>>(), ["fill_drain_1", "fill_drain_2"]);
        assert_eq!(print_formula(&h.edges[0].jump[0]), "x - xp = _0");
        assert_eq!(h.epsilon, Some(crate::logic::Term::cnst("eps")));
        assert_eq!(h.modes[0].flow.len(), 2);
    }

    #[test]
    fn numeric_mode_names() {
        let h = parse_lha("variables: x; mode 1: inv: x >= _0; mode 2: inv: x <= _0; edge 1 -> 2: guard: x = _0;", 0).unwrap();
        assert_eq!(h.edges[0].name(), "1_2_1");
        assert!(h.parameters.is_empty());
    }

    #[test]
    fn rejects_malformed_flows() {
        let strict = "variables: x; mode a: flow: d(x) > _1;";
        assert!(matches!(parse_lha(strict, 0), Err(Error::Automaton(_))));
        let dependent = "variables: x; mode a: flow: d(x) <= x;";
        assert!(matches!(parse_lha(dependent, 0), Err(Error::Automaton(_))));
        let undeclared = "variables: x; parameters: p; mode a: inv: x <= q;";
        assert!(matches!(parse_lha(undeclared, 0), Err(Error::Automaton(_))));
        let nonconvex = "variables: x; mode a: inv: OR(x <= _0, x >= _1);";
        assert!(matches!(parse_lha(nonconvex, 0), Err(Error::Automaton(_))));
        let clash = "variables: x; parameters: xp;";
        assert!(matches!(parse_lha(clash, 0), Err(Error::Automaton(_))));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_lha("variables: x;\nmode a:\n  inv: x <= ;", 0).unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 3, .. }), "{e:?}");
    }
}
