//! Printing of generated constraints (clauses of normalized atoms).
//!
//! Inside a disjunction, literals about uninterpreted applications come
//! first; the remaining literals follow in descending order of their printed
//! form. The order is total, so equal constraint sets always print the same.

use std::cmp::Ordering;

use super::atom::LinearAtom;

fn mentions_application(s: &str) -> bool {
    s.contains('(') && s.split_whitespace().any(|w| w.contains('(') && !w.starts_with('('))
}

/// Print order of the literals of one clause.
pub fn clause_order(a: &str, b: &str) -> Ordering {
    mentions_application(b).cmp(&mentions_application(a)).then_with(|| b.cmp(a))
}

/// Printed literals in clause order.
pub fn clause_literals(clause: &[LinearAtom]) -> Vec<String> {
    let mut lits: Vec<String> = clause.iter().map(|a| a.to_string()).collect();
    lits.sort_by(|a, b| clause_order(a, b));
    lits.dedup();
    lits
}

/// `OR(l1, ..., ln)`, a single literal, or `FALSE` for the empty clause.
pub fn clause_to_string(clause: &[LinearAtom]) -> String {
    let lits = clause_literals(clause);
    match lits.len() {
        0 => "FALSE".into(),
        1 => lits.into_iter().next().expect("one literal"),
        _ => format!("OR({})", lits.join(", ")),
    }
}

/// A conjunction of clauses: `TRUE`, a single clause, or `AND(c1, ..., cn)`.
pub fn cnf_to_string(cnf: &[Vec<LinearAtom>]) -> String {
    let parts: Vec<String> = cnf.iter().map(|c| clause_to_string(c)).collect();
    match parts.len() {
        0 => "TRUE".into(),
        1 => parts.into_iter().next().expect("one clause"),
        _ => format!("AND({})", parts.join(", ")),
    }
}
