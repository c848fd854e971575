use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};

use super::poly::{Monomial, Poly, Rat};
use super::print::{poly_to_string, term_key};
use crate::logic::{Atom, Formula, Rel, Symbol, Term, ADD, MUL, SUB};

/// Relation of a normalized atom against zero: `poly rel 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinRel {
    Eq,
    Le,
    Lt,
}

impl LinRel {
    pub fn holds(self, v: &Rat) -> bool {
        match self {
            LinRel::Eq => v.is_zero(),
            LinRel::Le => !v.is_positive(),
            LinRel::Lt => v.is_negative(),
        }
    }

    pub fn is_strict(self) -> bool {
        self == LinRel::Lt
    }
}

/// `poly rel 0` in canonical scaling: the leading non-constant monomial has
/// coefficient +1 or -1 (always +1 for equalities).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearAtom {
    pub poly: Poly,
    pub rel: LinRel,
}

/// Result of normalizing a candidate atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Norm {
    True,
    False,
    Atom(LinearAtom),
}

impl LinearAtom {
    pub fn build(poly: Poly, rel: LinRel) -> Norm {
        if let Some(c) = poly.as_constant() {
            return if rel.holds(&c) { Norm::True } else { Norm::False };
        }
        let (_, lead) = poly.leading().expect("non-constant");
        let k = if rel == LinRel::Eq { lead.recip() } else { lead.abs().recip() };
        Norm::Atom(LinearAtom { poly: poly.scale(&k), rel })
    }

    /// Build an atom that is known to be non-constant (panics otherwise).
    pub fn new(poly: Poly, rel: LinRel) -> LinearAtom {
        match LinearAtom::build(poly, rel) {
            Norm::Atom(a) => a,
            other => panic!("constant atom {other:?}"),
        }
    }

    /// `lhs rel rhs` for any of the five surface relations.
    pub fn from_sides(lhs: Poly, rel: Rel, rhs: Poly) -> Norm {
        let d = lhs.sub(&rhs);
        match rel {
            Rel::Eq => LinearAtom::build(d, LinRel::Eq),
            Rel::Le => LinearAtom::build(d, LinRel::Le),
            Rel::Lt => LinearAtom::build(d, LinRel::Lt),
            Rel::Ge => LinearAtom::build(d.neg(), LinRel::Le),
            Rel::Gt => LinearAtom::build(d.neg(), LinRel::Lt),
        }
    }

    /// Disjunction equivalent to the negation.
    pub fn negate(&self) -> Vec<LinearAtom> {
        match self.rel {
            LinRel::Le => vec![LinearAtom::new(self.poly.neg(), LinRel::Lt)],
            LinRel::Lt => vec![LinearAtom::new(self.poly.neg(), LinRel::Le)],
            LinRel::Eq => vec![
                LinearAtom::new(self.poly.clone(), LinRel::Lt),
                LinearAtom::new(self.poly.neg(), LinRel::Lt),
            ],
        }
    }

    pub fn eval(&self, model: &BTreeMap<Symbol, Rat>) -> Option<bool> {
        self.poly.eval(model).map(|v| self.rel.holds(&v))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.poly.symbols()
    }

    pub fn mentions(&self, s: &str) -> bool {
        self.poly.mentions(s)
    }

    pub fn opaque(&self) -> LinearAtom {
        LinearAtom { poly: self.poly.opaque(), rel: self.rel }
    }

    /// Same atom with every symbol mapped to a term, as a surface atom.
    pub fn to_atom(&self, image: &impl Fn(&Symbol) -> Term) -> Atom {
        let (lhs, rel, rhs) = self.oriented();
        Atom::new(poly_to_term(&lhs, image), rel, poly_to_term(&Poly::constant(rhs), image))
    }

    /// Printing orientation: non-constant part with a positive leading
    /// coefficient on the left, constant on the right.
    pub fn oriented(&self) -> (Poly, Rel, Rat) {
        let lhs = self.poly.non_constant();
        let rhs = -self.poly.constant_term();
        let lead_pos = lhs.leading().map(|(_, q)| q.is_positive()).unwrap_or(true);
        if lead_pos {
            let rel = match self.rel {
                LinRel::Eq => Rel::Eq,
                LinRel::Le => Rel::Le,
                LinRel::Lt => Rel::Lt,
            };
            (lhs, rel, rhs)
        } else {
            let rel = match self.rel {
                LinRel::Eq => Rel::Eq,
                LinRel::Le => Rel::Ge,
                LinRel::Lt => Rel::Gt,
            };
            (lhs.neg(), rel, -rhs)
        }
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lhs, rel, rhs) = self.oriented();
        write!(f, "{} {} {}", poly_to_string(&lhs), rel.as_str(), poly_to_string(&Poly::constant(rhs)))
    }
}

/// Conjunction of atoms kept sorted and duplicate-free.
pub type Conj = Vec<LinearAtom>;

pub fn canonical_conj(mut c: Conj) -> Conj {
    c.sort();
    c.dedup();
    c
}

/// Disjunction of conjunctions. The empty DNF is false; a DNF containing the
/// empty conjunction is true.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dnf(pub Vec<Conj>);

impl Dnf {
    pub fn falsum() -> Dnf {
        Dnf(vec![])
    }

    pub fn verum() -> Dnf {
        Dnf(vec![vec![]])
    }

    pub fn is_false(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.0.iter().any(|c| c.is_empty())
    }

    pub fn conjunct(c: Conj) -> Dnf {
        Dnf(vec![canonical_conj(c)])
    }

    /// Removes syntactically repeated conjuncts, keeping first occurrences.
    pub fn dedup(self) -> Dnf {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in self.0 {
            let c = canonical_conj(c);
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        Dnf(out)
    }

    pub fn or(mut self, other: Dnf) -> Dnf {
        self.0.extend(other.0);
        self.dedup()
    }

    /// Unpruned conjunction (distribution).
    pub fn and(&self, other: &Dnf) -> Dnf {
        let mut out = Vec::with_capacity(self.0.len() * other.0.len());
        for a in &self.0 {
            for b in &other.0 {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                out.push(c);
            }
        }
        Dnf(out).dedup()
    }

    pub fn eval(&self, model: &BTreeMap<Symbol, Rat>) -> Option<bool> {
        for c in &self.0 {
            let mut all = true;
            for a in c {
                if !a.eval(model)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Some(true);
            }
        }
        Some(false)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.0.iter().flatten().flat_map(|a| a.symbols()).collect()
    }

    pub fn atoms(&self) -> BTreeSet<LinearAtom> {
        self.0.iter().flatten().cloned().collect()
    }

    /// Negation as a conjunction of clauses (each a disjunction of atoms).
    pub fn negate_to_cnf(&self) -> Vec<Vec<LinearAtom>> {
        self.0
            .iter()
            .map(|c| {
                let mut cl: Vec<LinearAtom> = c.iter().flat_map(|a| a.negate()).collect();
                cl.sort();
                cl.dedup();
                cl
            })
            .collect()
    }

    pub fn to_formula(&self, image: &impl Fn(&Symbol) -> Term) -> Formula {
        Formula::or(
            self.0
                .iter()
                .map(|c| Formula::and(c.iter().map(|a| Formula::Atom(a.to_atom(image))).collect()))
                .collect(),
        )
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_false() {
            return write!(f, "FALSE");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|c| match c.len() {
                0 => "TRUE".to_string(),
                1 => c[0].to_string(),
                _ => format!("AND({})", c.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")),
            })
            .collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "OR({})", parts.join(", "))
        }
    }
}

/// Interpret a term as a polynomial. Uninterpreted applications become
/// opaque symbols keyed by their canonical printed form; bound variables and
/// constants become symbols of the same name.
pub fn term_to_poly(t: &Term) -> Poly {
    match t {
        Term::Num(q) => Poly::constant(q.clone()),
        Term::Var(v) | Term::Const(v) => Poly::var(v.clone()),
        Term::App(op, args) if op.as_ref() == ADD && args.len() == 2 => {
            term_to_poly(&args[0]).add(&term_to_poly(&args[1]))
        }
        Term::App(op, args) if op.as_ref() == SUB && args.len() == 2 => {
            term_to_poly(&args[0]).sub(&term_to_poly(&args[1]))
        }
        Term::App(op, args) if op.as_ref() == SUB && args.len() == 1 => term_to_poly(&args[0]).neg(),
        Term::App(op, args) if op.as_ref() == MUL && args.len() == 2 => {
            term_to_poly(&args[0]).mul(&term_to_poly(&args[1]))
        }
        Term::App(..) => Poly::var(term_key(t)),
    }
}

pub fn atom_to_linear(a: &Atom) -> Norm {
    LinearAtom::from_sides(term_to_poly(&a.lhs), a.rel, term_to_poly(&a.rhs))
}

/// Rebuild a term from a polynomial, left-nested, monomials in canonical
/// order.
pub fn poly_to_term(p: &Poly, image: &impl Fn(&Symbol) -> Term) -> Term {
    let mut acc: Option<Term> = None;
    let mono_term = |m: &Monomial| -> Option<Term> {
        let mut it = m.symbols().iter();
        let first = image(it.next()?);
        Some(it.fold(first, |t, s| Term::mul(t, image(s))))
    };
    let mut constant = None;
    for (m, q) in p.terms() {
        if m.is_one() {
            constant = Some(q.clone());
            continue;
        }
        let base = mono_term(m).expect("non-constant monomial");
        let mag = q.abs();
        let body = if mag.is_one() { base } else { Term::mul(Term::Num(mag), base) };
        acc = Some(match acc {
            None if q.is_negative() => Term::neg(body),
            None => body,
            Some(t) if q.is_negative() => Term::sub(t, body),
            Some(t) => Term::add(t, body),
        });
    }
    match (acc, constant) {
        (None, None) => Term::Num(Rat::zero()),
        (None, Some(c)) => Term::Num(c),
        (Some(t), None) => t,
        (Some(t), Some(c)) if c.is_negative() => Term::sub(t, Term::Num(-c)),
        (Some(t), Some(c)) => Term::add(t, Term::Num(c)),
    }
}
