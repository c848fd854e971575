use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};

/// Interned-by-value symbol name. Cheap to clone and `Send`.
pub type Symbol = Arc<str>;

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

/// Names of the arithmetic base functions. Everything else applied to
/// arguments is an uninterpreted (extension) function.
pub const ADD: &str = "+";
pub const SUB: &str = "-";
pub const MUL: &str = "*";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Bound variable (only meaningful under a quantifier).
    Var(Symbol),
    /// Constant symbol (arity-0 function).
    Const(Symbol),
    Num(BigRational),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(sym(name))
    }

    pub fn cnst(name: &str) -> Term {
        Term::Const(sym(name))
    }

    pub fn int(n: i64) -> Term {
        Term::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(sym(f), args)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::App(sym(ADD), vec![a, b])
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::App(sym(SUB), vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::App(sym(MUL), vec![a, b])
    }

    pub fn neg(a: Term) -> Term {
        Term::App(sym(SUB), vec![a])
    }

    pub fn is_arith_op(f: &str) -> bool {
        f == ADD || f == SUB || f == MUL
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Num(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) | Term::Num(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn collect_consts(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::Var(_) | Term::Num(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_consts(out)),
        }
    }

    /// Function symbols (non-arithmetic heads) occurring in the term.
    pub fn collect_functions(&self, out: &mut BTreeSet<Symbol>) {
        if let Term::App(f, args) = self {
            if !Term::is_arith_op(f) {
                out.insert(f.clone());
            }
            args.iter().for_each(|a| a.collect_functions(out));
        }
    }

    /// Visit every subterm, outermost first.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, sigma: &BTreeMap<Symbol, Term>) -> Term {
        match self {
            Term::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) | Term::Num(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(sigma)).collect())
            }
        }
    }

    /// Replace constants by terms (used to re-substitute definitions).
    pub fn replace_consts(&self, map: &BTreeMap<Symbol, Term>) -> Term {
        match self {
            Term::Const(c) => map.get(c).cloned().unwrap_or_else(|| self.clone()),
            Term::Var(_) | Term::Num(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.replace_consts(map)).collect())
            }
        }
    }

    /// Replace whole subterms that are keys of `map` (outermost match wins).
    pub fn replace_subterms(&self, map: &BTreeMap<Term, Term>) -> Term {
        if let Some(t) = map.get(self) {
            return t.clone();
        }
        match self {
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| a.replace_subterms(map)).collect(),
            ),
            _ => self.clone(),
        }
    }

    /// Rename constant symbols and function heads.
    pub fn rename(&self, r: &BTreeMap<Symbol, Symbol>) -> Term {
        match self {
            Term::Const(c) => Term::Const(r.get(c).cloned().unwrap_or_else(|| c.clone())),
            Term::Var(_) | Term::Num(_) => self.clone(),
            Term::App(f, args) => Term::App(
                r.get(f).cloned().unwrap_or_else(|| f.clone()),
                args.iter().map(|a| a.rename(r)).collect(),
            ),
        }
    }

    fn is_compound_arith(&self) -> bool {
        matches!(self, Term::App(f, args) if Term::is_arith_op(f) && args.len() == 2)
    }
}

pub fn fmt_rational(q: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_negative() {
        write!(f, "-")?;
    }
    let a = q.abs();
    if a.denom().is_one() {
        write!(f, "_{}", a.numer())
    } else {
        write!(f, "_{}/{}", a.numer(), a.denom())
    }
}

pub fn rational_to_string(q: &BigRational) -> String {
    struct D<'a>(&'a BigRational);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_rational(self.0, f)
        }
    }
    D(q).to_string()
}

/// Raw (non-normalizing) concrete syntax. Binary arithmetic nests to the
/// left with explicit parentheses around compound operands.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Num(q) => {
                if q.is_zero() {
                    write!(f, "_0")
                } else {
                    fmt_rational(q, f)
                }
            }
            Term::App(op, args) if Term::is_arith_op(op) && args.len() == 2 => {
                let wrap = |t: &Term, f: &mut fmt::Formatter<'_>| {
                    if t.is_compound_arith() {
                        write!(f, "({t})")
                    } else {
                        write!(f, "{t}")
                    }
                };
                wrap(&args[0], f)?;
                write!(f, " {op} ")?;
                wrap(&args[1], f)
            }
            Term::App(op, args) if op.as_ref() == SUB && args.len() == 1 => {
                if args[0].is_compound_arith() {
                    write!(f, "-({})", args[0])
                } else {
                    write!(f, "-{}", args[0])
                }
            }
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
