//! Canonical printing of polynomials and of uninterpreted applications.
//!
//! Sums nest to the left with explicit parentheses, products inside sums are
//! parenthesized, and numerals use the `_n` syntax:
//! `(((dmax * epsilon) - (dmin * epsilon)) - ea) + lsafe`.

use num::{One, Signed, Zero};

use super::atom::term_to_poly;
use super::poly::{Monomial, Poly, Rat};
use crate::logic::{rational_to_string, Symbol, Term};

/// Canonical key of an application `f(t1, ..., tn)`: arguments printed as
/// normalized polynomials. Two applications get the same key iff their
/// arguments are equal as polynomials.
pub fn term_key(t: &Term) -> Symbol {
    match t {
        Term::App(f, args) if !Term::is_arith_op(f) => {
            let parts: Vec<String> = args.iter().map(|a| poly_to_string(&term_to_poly(a))).collect();
            crate::logic::sym(&format!("{f}({})", parts.join(", ")))
        }
        _ => crate::logic::sym(&poly_to_string(&term_to_poly(t))),
    }
}

fn monomial_body(m: &Monomial, mag: &Rat) -> (String, bool) {
    let mut factors: Vec<String> = Vec::new();
    if !mag.is_one() {
        factors.push(rational_to_string(mag));
    }
    factors.extend(m.symbols().iter().map(|s| s.to_string()));
    let compound = factors.len() > 1;
    // Products nest to the left as well: (_2 * x) * y.
    let mut acc = factors[0].clone();
    for (i, f) in factors.iter().enumerate().skip(1) {
        acc = if i == 1 { format!("{acc} * {f}") } else { format!("({acc}) * {f}") };
    }
    (acc, compound)
}

/// Print a polynomial: non-constant monomials in canonical order, the
/// constant term last.
pub fn poly_to_string(p: &Poly) -> String {
    let mut items: Vec<(&Monomial, &Rat)> = p.terms().filter(|(m, _)| !m.is_one()).collect();
    let c = p.constant_term();
    let one = Monomial::one();
    if !c.is_zero() {
        items.push((&one, p.terms().find(|(m, _)| m.is_one()).map(|(_, q)| q).expect("constant")));
    }
    if items.is_empty() {
        return "_0".to_string();
    }
    let mut acc = String::new();
    let mut acc_compound = false;
    for (k, (m, q)) in items.iter().enumerate() {
        let mag = q.abs();
        let (body, compound) = if m.is_one() { (rational_to_string(&mag), false) } else { monomial_body(m, &mag) };
        if k == 0 {
            acc = if q.is_negative() {
                if compound {
                    format!("-({body})")
                } else {
                    format!("-{body}")
                }
            } else {
                body
            };
            acc_compound = compound;
            continue;
        }
        let lhs = if acc_compound { format!("({acc})") } else { acc };
        let rhs = if compound { format!("({body})") } else { body };
        let op = if q.is_negative() { "-" } else { "+" };
        acc = format!("{lhs} {op} {rhs}");
        acc_compound = true;
    }
    acc
}
