//! Canonical printing: negation normal form, every atom moved to the form
//! `t ⋈ _c`, disjunctions and conjunctions as `OR(...)` / `AND(...)` with
//! children in a fixed order.

use crate::linarith::show::clause_order;
use crate::linarith::{atom_to_linear, LinRel, LinearAtom, Norm};
use crate::logic::{Atom, Formula};

fn atom_string(a: &Atom, positive: bool) -> String {
    match atom_to_linear(a) {
        Norm::Atom(l) => literal_string(&l, positive),
        // Purely numeric atoms are printed as written.
        _ if positive => a.to_string(),
        _ => format!("NOT({a})"),
    }
}

fn literal_string(l: &LinearAtom, positive: bool) -> String {
    if positive {
        return l.to_string();
    }
    match l.negate().as_slice() {
        [n] => n.to_string(),
        _ => {
            debug_assert_eq!(l.rel, LinRel::Eq);
            l.to_string().replacen(" = ", " != ", 1)
        }
    }
}

fn list(head: &str, mut parts: Vec<String>) -> String {
    parts.sort_by(|a, b| clause_order(a, b));
    parts.dedup();
    if parts.len() == 1 {
        return parts.pop().unwrap();
    }
    format!("{head}({})", parts.join(", "))
}

fn print_nnf(f: &Formula) -> String {
    match f {
        Formula::True => "TRUE".into(),
        Formula::False => "FALSE".into(),
        Formula::Atom(a) => atom_string(a, true),
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(a) => atom_string(a, false),
            other => format!("NOT({})", print_nnf(other)),
        },
        Formula::And(fs) => list("AND", fs.iter().map(print_nnf).collect()),
        Formula::Or(fs) => list("OR", fs.iter().map(print_nnf).collect()),
        Formula::Implies(..) => print_nnf(&f.nnf()),
        Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
            let q = if matches!(f, Formula::Forall(..)) { "FORALL" } else { "EXISTS" };
            let vs: Vec<&str> = vs.iter().map(|v| v.as_ref()).collect();
            format!("({q} {}). {}", vs.join(","), print_nnf(g))
        }
    }
}

/// Canonical concrete syntax of a formula; parses back to an equivalent
/// formula.
pub fn print_formula(f: &Formula) -> String {
    print_nnf(&f.nnf())
}

/// Statement list `φ1; φ2; ...` as printed inside `|-` blocks: one canonical
/// conjunct per line.
pub fn print_statements(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(|f| format!("{};", print_formula(f))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_formula;
    use crate::logic::Signature;

    fn sig() -> Signature {
        let mut s = Signature::arithmetic();
        s.extension_functions.insert(crate::logic::sym("a"), crate::logic::ExtensionFn { arity: 1, level: 1 });
        s
    }

    fn canon(text: &str) -> String {
        print_formula(&parse_formula(text, &sig()).unwrap())
    }

    #[test]
    fn reference_shapes() {
        assert_eq!(
            canon("(FORALL i). OR(a(i + _1) >= a(i), d1 > d2)"),
            "(FORALL i). OR(a(i + _1) - a(i) >= _0, d1 - d2 > _0)"
        );
        assert_eq!(canon("_1 <= _2"), "_1 <= _2");
        assert_eq!(canon("d1 <= d2"), "d1 - d2 <= _0");
        assert_eq!(canon("NOT(d1 <= d2)"), "d1 - d2 > _0");
        assert_eq!(canon("x != _1"), "x != _1");
    }

    #[test]
    fn round_trip() {
        for text in [
            "(FORALL i). OR(a(i + _1) - a(i) >= _0, d1 - d2 > _0)",
            "OR(min < _0, lsafe < _0, lf - lsafe <= _0, ea <= _0)",
            "AND(x <= _3/2, y - x > _0)",
        ] {
            let once = canon(text);
            assert_eq!(canon(&once), once);
        }
    }
}
