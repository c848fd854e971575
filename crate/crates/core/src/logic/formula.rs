use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::term::{sym, Symbol, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    /// Complement over a total order; `None` for equality.
    pub fn complement(self) -> Option<Rel> {
        match self {
            Rel::Eq => None,
            Rel::Le => Some(Rel::Gt),
            Rel::Lt => Some(Rel::Ge),
            Rel::Ge => Some(Rel::Lt),
            Rel::Gt => Some(Rel::Le),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub lhs: Term,
    pub rel: Rel,
    pub rhs: Term,
}

impl Atom {
    pub fn new(lhs: Term, rel: Rel, rhs: Term) -> Atom {
        Atom { lhs, rel, rhs }
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Atom {
        Atom { lhs: f(&self.lhs), rel: self.rel, rhs: f(&self.rhs) }
    }

    pub fn is_ground(&self) -> bool {
        self.lhs.is_ground() && self.rhs.is_ground()
    }

    pub fn terms(&self) -> [&Term; 2] {
        [&self.lhs, &self.rhs]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { positive: true, atom }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { positive: false, atom }
    }

    /// Negation, flipping inequalities instead of wrapping them.
    pub fn negate(&self) -> Literal {
        match (self.positive, self.atom.rel.complement()) {
            (true, Some(r)) => Literal::pos(Atom::new(self.atom.lhs.clone(), r, self.atom.rhs.clone())),
            _ => Literal { positive: !self.positive, atom: self.atom.clone() },
        }
    }

    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Formula::Not(Box::new(a))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<Symbol>, Box<Formula>),
    Exists(Vec<Symbol>, Box<Formula>),
}

/// A universally closed disjunction of literals. `vars` lists exactly the
/// variables occurring free in the literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub vars: Vec<Symbol>,
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Clause {
        let mut vs = BTreeSet::new();
        for l in &literals {
            l.atom.lhs.collect_vars(&mut vs);
            l.atom.rhs.collect_vars(&mut vs);
        }
        Clause { vars: vs.into_iter().collect(), literals }
    }

    pub fn is_ground(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.literals.iter().flat_map(|l| l.atom.terms())
    }

    pub fn to_formula(&self) -> Formula {
        let body = match self.literals.len() {
            0 => Formula::False,
            1 => self.literals[0].to_formula(),
            _ => Formula::Or(self.literals.iter().map(Literal::to_formula).collect()),
        };
        if self.vars.is_empty() {
            body
        } else {
            Formula::Forall(self.vars.clone(), Box::new(body))
        }
    }

    pub fn substitute(&self, sigma: &BTreeMap<Symbol, Term>) -> Clause {
        Clause::new(
            self.literals
                .iter()
                .map(|l| Literal { positive: l.positive, atom: l.atom.map_terms(|t| t.substitute(sigma)) })
                .collect(),
        )
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Clause {
        Clause::new(
            self.literals
                .iter()
                .map(|l| Literal { positive: l.positive, atom: l.atom.map_terms(&f) })
                .collect(),
        )
    }
}

impl Formula {
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::True);
        if fs.contains(&Formula::False) {
            return Formula::False;
        }
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn or(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::False);
        if fs.contains(&Formula::True) {
            return Formula::True;
        }
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn atom(lhs: Term, rel: Rel, rhs: Term) -> Formula {
        Formula::Atom(Atom::new(lhs, rel, rhs))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn is_ground(&self) -> bool {
        self.free_vars().is_empty() && !self.has_quantifier()
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::True | Formula::False | Formula::Atom(_) => false,
            Formula::Not(f) => f.has_quantifier(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_quantifier),
            Formula::Implies(a, b) => a.has_quantifier() || b.has_quantifier(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&BTreeSet::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &BTreeSet<Symbol>, out: &mut BTreeSet<Symbol>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                a.lhs.collect_vars(&mut vs);
                a.rhs.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(f) => f.free_vars_into(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.free_vars_into(bound, out)),
            Formula::Implies(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Forall(vs, f) | Formula::Exists(vs, f) => {
                let mut b = bound.clone();
                b.extend(vs.iter().cloned());
                f.free_vars_into(&b, out);
            }
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.atoms_into(&mut out);
        out
    }

    fn atoms_into<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => f.atoms_into(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.atoms_into(out)),
            Formula::Implies(a, b) => {
                a.atoms_into(out);
                b.atoms_into(out);
            }
        }
    }

    pub fn consts(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            a.lhs.collect_consts(&mut out);
            a.rhs.collect_consts(&mut out);
        }
        out
    }

    pub fn functions(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            a.lhs.collect_functions(&mut out);
            a.rhs.collect_functions(&mut out);
        }
        out
    }

    /// Map every atom, keeping the connective structure.
    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Atom) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(g) => Formula::Not(Box::new(g.map_atoms(f))),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Formula::Forall(vs, g) => Formula::Forall(vs.clone(), Box::new(g.map_atoms(f))),
            Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(g.map_atoms(f))),
        }
    }

    /// Capture-avoiding simultaneous substitution of free variables.
    pub fn substitute(&self, sigma: &BTreeMap<Symbol, Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.map_terms(|t| t.substitute(sigma))),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(sigma))),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.substitute(sigma)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.substitute(sigma)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.substitute(sigma)), Box::new(b.substitute(sigma)))
            }
            Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
                let mut inner: BTreeMap<Symbol, Term> =
                    sigma.iter().filter(|(k, _)| !vs.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                // variables free in the range that a binder would capture
                let mut range_vars = BTreeSet::new();
                for t in inner.values() {
                    t.collect_vars(&mut range_vars);
                }
                let mut taken: BTreeSet<Symbol> = range_vars.clone();
                taken.extend(g.free_vars());
                let mut new_vs = Vec::with_capacity(vs.len());
                for v in vs {
                    if range_vars.contains(v) {
                        let mut k = 1;
                        let fresh = loop {
                            let cand = sym(&format!("{v}_{k}"));
                            if !taken.contains(&cand) {
                                break cand;
                            }
                            k += 1;
                        };
                        taken.insert(fresh.clone());
                        inner.insert(v.clone(), Term::Var(fresh.clone()));
                        new_vs.push(fresh);
                    } else {
                        new_vs.push(v.clone());
                    }
                }
                let body = Box::new(g.substitute(&inner));
                if matches!(self, Formula::Forall(..)) {
                    Formula::Forall(new_vs, body)
                } else {
                    Formula::Exists(new_vs, body)
                }
            }
        }
    }

    /// Homomorphic renaming of constant and function symbols.
    pub fn rename(&self, r: &BTreeMap<Symbol, Symbol>) -> Formula {
        self.map_atoms(&|a| a.map_terms(|t| t.rename(r)))
    }

    pub fn replace_consts(&self, map: &BTreeMap<Symbol, Term>) -> Formula {
        self.map_atoms(&|a| a.map_terms(|t| t.replace_consts(map)))
    }

    /// Negation normal form: implications removed, negation only on
    /// equality atoms; inequalities are complemented instead.
    pub fn nnf(&self) -> Formula {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Formula {
        match (self, pos) {
            (Formula::True, true) | (Formula::False, false) => Formula::True,
            (Formula::True, false) | (Formula::False, true) => Formula::False,
            (Formula::Atom(a), true) => Formula::Atom(a.clone()),
            (Formula::Atom(a), false) => match a.rel.complement() {
                Some(r) => Formula::Atom(Atom::new(a.lhs.clone(), r, a.rhs.clone())),
                None => Formula::Not(Box::new(Formula::Atom(a.clone()))),
            },
            (Formula::Not(g), p) => g.nnf_pol(!p),
            (Formula::And(fs), true) | (Formula::Or(fs), false) => {
                Formula::and(fs.iter().map(|g| g.nnf_pol(pos)).collect())
            }
            (Formula::Or(fs), true) | (Formula::And(fs), false) => {
                Formula::or(fs.iter().map(|g| g.nnf_pol(pos)).collect())
            }
            (Formula::Implies(a, b), true) => Formula::or(vec![a.nnf_pol(false), b.nnf_pol(true)]),
            (Formula::Implies(a, b), false) => Formula::and(vec![a.nnf_pol(true), b.nnf_pol(false)]),
            (Formula::Forall(vs, g), true) | (Formula::Exists(vs, g), false) => {
                Formula::Forall(vs.clone(), Box::new(g.nnf_pol(pos)))
            }
            (Formula::Exists(vs, g), true) | (Formula::Forall(vs, g), false) => {
                Formula::Exists(vs.clone(), Box::new(g.nnf_pol(pos)))
            }
        }
    }

    /// Convert a universally quantified formula (prenex or not, no
    /// existentials after NNF) into a conjunction of clauses.
    pub fn to_clauses(&self) -> Result<Vec<Clause>> {
        let n = self.nnf();
        let body = strip_foralls(&n)?;
        let cnf = cnf_of(&body)?;
        Ok(cnf.into_iter().map(Clause::new).collect())
    }
}

fn strip_foralls(f: &Formula) -> Result<Formula> {
    Ok(match f {
        Formula::Forall(_, g) => strip_foralls(g)?,
        Formula::Exists(..) => {
            return Err(Error::Unsupported("existential quantifier in a universal formula".into()))
        }
        Formula::And(fs) => Formula::And(fs.iter().map(strip_foralls).collect::<Result<_>>()?),
        Formula::Or(fs) => Formula::Or(fs.iter().map(strip_foralls).collect::<Result<_>>()?),
        other => other.clone(),
    })
}

/// CNF of a quantifier-free NNF formula by distribution.
fn cnf_of(f: &Formula) -> Result<Vec<Vec<Literal>>> {
    Ok(match f {
        Formula::True => vec![],
        Formula::False => vec![vec![]],
        Formula::Atom(a) => vec![vec![Literal::pos(a.clone())]],
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(a) => vec![vec![Literal::neg(a.clone())]],
            _ => return Err(Error::Unsupported("formula not in negation normal form".into())),
        },
        Formula::And(fs) => {
            let mut out = Vec::new();
            for g in fs {
                out.extend(cnf_of(g)?);
            }
            out
        }
        Formula::Or(fs) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for g in fs {
                let c = cnf_of(g)?;
                let mut next = Vec::with_capacity(acc.len() * c.len().max(1));
                for a in &acc {
                    for b in &c {
                        let mut m = a.clone();
                        for l in b {
                            if !m.contains(l) {
                                m.push(l.clone());
                            }
                        }
                        next.push(m);
                    }
                }
                acc = next;
            }
            acc
        }
        Formula::Implies(..) | Formula::Forall(..) | Formula::Exists(..) => {
            return Err(Error::Unsupported("quantifier below a connective".into()))
        }
    })
}

/// Picks `sk_<v>`, then `sk_<v>_2`, `sk_<v>_3`, ... avoiding `taken`.
pub fn skolem_name(v: &str, taken: &BTreeSet<Symbol>) -> Symbol {
    let base = format!("sk_{v}");
    if !taken.contains(base.as_str()) {
        return sym(&base);
    }
    let mut k = 2;
    loop {
        let cand = format!("{base}_{k}");
        if !taken.contains(cand.as_str()) {
            return sym(&cand);
        }
        k += 1;
    }
}

/// Negation of a conjunction of universally closed clauses: a ground
/// disjunction of conjunctions of negated literals, each quantified variable
/// replaced by a skolem constant. The same variable name maps to the same
/// skolem constant across clauses, which is sound because the clauses end up
/// in separate disjuncts.
pub fn negate_universal(phi: &Formula, taken: &BTreeSet<Symbol>) -> Result<Formula> {
    let clauses = phi.to_clauses()?;
    negate_clauses(&clauses, taken)
}

pub fn negate_clauses(clauses: &[Clause], taken: &BTreeSet<Symbol>) -> Result<Formula> {
    let mut taken = taken.clone();
    for c in clauses {
        for t in c.terms() {
            t.collect_consts(&mut taken);
        }
    }
    let mut skolem: BTreeMap<Symbol, Term> = BTreeMap::new();
    let mut disjuncts = Vec::new();
    for c in clauses {
        for v in &c.vars {
            if !skolem.contains_key(v) {
                let s = skolem_name(v, &taken);
                taken.insert(s.clone());
                skolem.insert(v.clone(), Term::Const(s));
            }
        }
        let conj: Vec<Formula> = c
            .literals
            .iter()
            .map(|l| {
                let l = Literal { positive: l.positive, atom: l.atom.map_terms(|t| t.substitute(&skolem)) };
                l.negate().to_formula()
            })
            .collect();
        disjuncts.push(Formula::and(conj));
    }
    Ok(Formula::or(disjuncts))
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.as_str(), self.rhs)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, fs: &[Formula]) -> fmt::Result {
    write!(f, "{head}(")?;
    for (i, g) in fs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{g}")?;
    }
    write!(f, ")")
}

/// Raw concrete syntax (no normalization); see `frontend::printer` for the
/// canonical form.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "TRUE"),
            Formula::False => write!(f, "FALSE"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "NOT({g})"),
            Formula::And(fs) => write_list(f, "AND", fs),
            Formula::Or(fs) => write_list(f, "OR", fs),
            Formula::Implies(a, b) => write!(f, "({a}) --> ({b})"),
            Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
                let q = if matches!(self, Formula::Forall(..)) { "FORALL" } else { "EXISTS" };
                write!(f, "({q} {}). {g}", vs.iter().map(|v| v.as_ref()).collect::<Vec<_>>().join(","))
            }
        }
    }
}
