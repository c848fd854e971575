//! SMT-LIB2 export of ground base-theory problems, for cross-checking with
//! external solvers.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num::Signed;

use crate::error::{Error, Result};
use crate::linarith::Rat;
use crate::logic::{Atom, Formula, Rel, Symbol, Term, MUL};

fn simple_symbol(s: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

fn symbol(s: &str) -> String {
    if simple_symbol(s) {
        s.to_string()
    } else {
        format!("|{}|", s.replace(['|', '\\'], "_"))
    }
}

fn numeral(q: &Rat) -> String {
    let abs = q.abs();
    let body = if abs.is_integer() {
        format!("{}.0", abs.numer())
    } else {
        format!("(/ {}.0 {}.0)", abs.numer(), abs.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

struct Export {
    consts: BTreeSet<Symbol>,
    nonlinear: bool,
}

impl Export {
    fn term(&mut self, t: &Term) -> Result<String> {
        Ok(match t {
            Term::Var(v) => return Err(Error::Unsupported(format!("non-ground input: variable `{v}`"))),
            Term::Const(c) => {
                self.consts.insert(c.clone());
                symbol(c)
            }
            Term::Num(q) => numeral(q),
            Term::App(f, args) if Term::is_arith_op(f) => {
                if f.as_ref() == MUL && args.iter().filter(|a| !matches!(a, Term::Num(_))).count() > 1 {
                    self.nonlinear = true;
                }
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>>>()?;
                format!("({f} {})", args.join(" "))
            }
            Term::App(f, _) => {
                return Err(Error::Unsupported(format!("extension function `{f}` in a ground base-theory problem")))
            }
        })
    }

    fn atom(&mut self, a: &Atom) -> Result<String> {
        let op = match a.rel {
            Rel::Eq => "=",
            r => r.as_str(),
        };
        Ok(format!("({op} {} {})", self.term(&a.lhs)?, self.term(&a.rhs)?))
    }

    fn formula(&mut self, f: &Formula) -> Result<String> {
        Ok(match f {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Atom(a) => self.atom(a)?,
            Formula::Not(g) => format!("(not {})", self.formula(g)?),
            Formula::And(fs) | Formula::Or(fs) if fs.is_empty() => {
                if matches!(f, Formula::And(_)) { "true" } else { "false" }.into()
            }
            Formula::And(fs) => format!("(and {})", self.list(fs)?),
            Formula::Or(fs) => format!("(or {})", self.list(fs)?),
            Formula::Implies(a, b) => format!("(=> {} {})", self.formula(a)?, self.formula(b)?),
            Formula::Forall(..) | Formula::Exists(..) => {
                return Err(Error::Unsupported("non-ground input: quantified formula".into()))
            }
        })
    }

    fn list(&mut self, fs: &[Formula]) -> Result<String> {
        Ok(fs.iter().map(|g| self.formula(g)).collect::<Result<Vec<_>>>()?.join(" "))
    }
}

/// SMT-LIB2 script for the conjunction of `formulas`: constants declared in
/// lexicographic order, one `assert` per formula in the given order.
/// The logic is `QF_LRA`, or `QF_NRA` when constants are multiplied.
pub fn export_smtlib(formulas: &[Formula]) -> Result<String> {
    let mut ex = Export { consts: BTreeSet::new(), nonlinear: false };
    let asserts = formulas.iter().map(|f| ex.formula(f)).collect::<Result<Vec<_>>>()?;
    let mut out = String::new();
    let logic = if ex.nonlinear { "QF_NRA" } else { "QF_LRA" };
    let _ = writeln!(out, "(set-logic {logic})");
    for c in &ex.consts {
        let _ = writeln!(out, "(declare-const {} Real)", symbol(c));
    }
    if asserts.is_empty() {
        out.push_str("(assert true)\n");
    }
    for a in asserts {
        let _ = writeln!(out, "(assert {a})");
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}
