//! Property-directed symbol elimination: the weakest universal constraint
//! on the parameters under which a specification becomes unsatisfiable.
//!
//! 1. Reduce the chain of extensions to a ground problem with definitions
//!    `c = f(args)` and congruence clauses.
//! 2. Keep the parameter constants, the constants naming applications of
//!    parameter functions and the constants occurring in their arguments;
//!    every other constant is existentially quantified.
//! 3. Eliminate the quantified constants and negate.
//! 4. Substitute the definitions back and universally quantify the
//!    argument constants.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::frontend::{clause_level, ProblemSpec};
use crate::hier::{reduce_chain_with, ReduceOptions, Reduction};
use crate::linarith::{
    clause_to_string, decide_exact, eliminate, ground_model, Decision, DEFAULT_MAX_CASES, simplify_clause, term_key, to_linear, EliminationConfig, LinearAtom,
    Norm, Poly,
};
use crate::logic::{sym, Atom, Clause, Formula, Literal, Rel, Symbol, Term};

/// Which symbols survive elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Keep exactly these (constants and function symbols).
    Parameters(Vec<Symbol>),
    /// Eliminate exactly these; everything else is kept.
    Eliminate(Vec<Symbol>),
}

/// One universally closed clause of a generated constraint. Atoms are over
/// plain symbols; applications appear as opaque symbols named by their
/// canonical form (`a(i + _1)`), whose terms are kept in `terms`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UClause {
    pub vars: Vec<Symbol>,
    pub atoms: Vec<LinearAtom>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintResult {
    pub clauses: Vec<UClause>,
    /// Term behind every application symbol used in `clauses`.
    pub terms: BTreeMap<Symbol, Term>,
    /// The extension chain is definitional, so the constraint is the
    /// weakest universal one.
    pub weakest: bool,
    pub steps: Vec<String>,
}

impl UClause {
    pub fn body_string(&self) -> String {
        clause_to_string(&self.atoms)
    }
}

impl ConstraintResult {
    fn image(&self, vars: &[Symbol]) -> impl Fn(&Symbol) -> Term + '_ {
        let vars: BTreeSet<Symbol> = vars.iter().cloned().collect();
        move |s: &Symbol| {
            if let Some(t) = self.terms.get(s) {
                let sigma = vars.iter().map(|v| (v.clone(), Term::Var(v.clone()))).collect();
                t.replace_consts(&sigma)
            } else if vars.contains(s) {
                Term::Var(s.clone())
            } else {
                Term::Const(s.clone())
            }
        }
    }

    /// Universally closed clauses as formulas.
    pub fn clause_formulas(&self) -> Vec<Formula> {
        self.clauses
            .iter()
            .map(|c| {
                let image = self.image(&c.vars);
                let lits: Vec<Formula> = c.atoms.iter().map(|a| Formula::Atom(a.to_atom(&image))).collect();
                let body = Formula::or(lits);
                if c.vars.is_empty() {
                    body
                } else {
                    Formula::Forall(c.vars.clone(), Box::new(body))
                }
            })
            .collect()
    }

    pub fn formula(&self) -> Formula {
        Formula::and(self.clause_formulas())
    }

    /// Each clause in canonical print form, e.g.
    /// `(FORALL i). OR(a(i + _1) - a(i) >= _0, d1 - d2 > _0)`.
    pub fn clause_strings(&self) -> Vec<String> {
        self.clauses.iter().map(uclause_string).collect()
    }

    pub fn is_true(&self) -> bool {
        self.clauses.is_empty()
    }
}

pub fn uclause_string(c: &UClause) -> String {
    let body = c.body_string();
    if c.vars.is_empty() {
        body
    } else {
        let vs: Vec<&str> = c.vars.iter().map(|v| v.as_ref()).collect();
        format!("(FORALL {}). {body}", vs.join(","))
    }
}

impl std::fmt::Display for ConstraintResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts = self.clause_strings();
        match parts.len() {
            0 => write!(f, "TRUE"),
            1 => write!(f, "{}", parts[0]),
            _ => write!(f, "AND({})", parts.join(", ")),
        }
    }
}

/// Constants of a formula in order of first occurrence.
fn ordered_consts(fs: &[Formula]) -> Vec<Symbol> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in fs {
        for a in f.atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if let Term::Const(c) = s {
                        if seen.insert(c.clone()) {
                            out.push(c.clone());
                        }
                    }
                });
            }
        }
    }
    out
}

/// Options for [`generate_constraint_with`].
#[derive(Clone, Debug, Default)]
pub struct GenerateOptions {
    pub elimination: EliminationConfig,
    pub reduce: ReduceOptions,
}

pub fn generate_constraint(
    spec: &ProblemSpec,
    sel: &Selection,
    assumptions: &[LinearAtom],
) -> Result<ConstraintResult> {
    generate_constraint_with(spec, sel, assumptions, &GenerateOptions::default())
}

pub fn generate_constraint_with(
    spec: &ProblemSpec,
    sel: &Selection,
    assumptions: &[LinearAtom],
    opts: &GenerateOptions,
) -> Result<ConstraintResult> {
    let red = reduce_chain_with(spec, &opts.reduce)?;
    let mut res = eliminate_reduction(&red, sel, assumptions, &opts.elimination)?;
    res.weakest = is_definitional(spec);
    Ok(res)
}

/// Steps 2–4 on an already reduced problem.
pub fn eliminate_reduction(
    red: &Reduction,
    sel: &Selection,
    assumptions: &[LinearAtom],
    cfg: &EliminationConfig,
) -> Result<ConstraintResult> {
    let mut steps = Vec::new();
    let formulas = red.formulas();
    let consts = ordered_consts(&formulas);
    let expansions = red.expansions();
    let def_fn: BTreeMap<Symbol, Symbol> = red.defs.iter().map(|d| (d.constant.clone(), d.function.clone())).collect();

    // Arguments of a definition with every application named by its
    // constant (the purified arguments of Step 2(ii)).
    let names: BTreeMap<Term, Term> =
        expansions.iter().map(|(c, t)| (t.clone(), Term::Const(c.clone()))).collect();
    let arg_consts = |c: &Symbol| -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        if let Some(Term::App(_, args)) = expansions.get(c) {
            for a in args {
                a.replace_subterms(&names).collect_consts(&mut out);
            }
        }
        out
    };

    let kept_fn = |f: &Symbol| match sel {
        Selection::Parameters(ps) => ps.contains(f),
        Selection::Eliminate(es) => !es.contains(f),
    };
    let kept_defs: Vec<Symbol> = red.defs.iter().filter(|d| kept_fn(&d.function)).map(|d| d.constant.clone()).collect();
    let mut arg_keep: BTreeSet<Symbol> = BTreeSet::new();
    for c in &kept_defs {
        arg_keep.extend(arg_consts(c).into_iter().filter(|a| !def_fn.contains_key(a)));
    }
    let keep = |c: &Symbol| -> bool {
        if arg_keep.contains(c) {
            return true;
        }
        match def_fn.get(c) {
            Some(f) => kept_fn(f),
            None => match sel {
                Selection::Parameters(ps) => ps.contains(c),
                Selection::Eliminate(es) => !es.contains(c),
            },
        }
    };
    let elim: Vec<Symbol> = match sel {
        // Declaration order of the user's list, then everything else in
        // order of first occurrence.
        Selection::Eliminate(es) => {
            let mut v: Vec<Symbol> = es.iter().filter(|c| consts.contains(c) && !arg_keep.contains(*c)).cloned().collect();
            let rest: Vec<Symbol> = consts.iter().filter(|c| !keep(c) && !v.contains(c)).cloned().collect();
            v.extend(rest);
            v
        }
        Selection::Parameters(_) => consts.iter().filter(|c| !keep(c)).cloned().collect(),
    };
    steps.push(format!("eliminate: [{}]", elim.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(", ")));
    let elim_set: BTreeSet<Symbol> = elim.iter().cloned().collect();
    let dnf = to_linear(&Formula::and(formulas), &elim_set)?;
    steps.push(format!("disjuncts before elimination: {}", dnf.0.len()));
    let proj = eliminate(&elim, &dnf, assumptions, cfg)?;
    steps.push(format!("disjuncts after elimination: {}", proj.0.len()));

    // Step 4: negate, simplify each clause, substitute definitions.
    let rename: BTreeMap<Symbol, Symbol> =
        kept_defs.iter().filter_map(|c| expansions.get(c).map(|t| (c.clone(), term_key(t)))).collect();
    let mut terms = BTreeMap::new();
    for c in &kept_defs {
        if let Some(t) = expansions.get(c) {
            terms.insert(term_key(t), t.clone());
        }
    }
    let mut clauses: Vec<UClause> = Vec::new();
    for cl in proj.negate_to_cnf() {
        let Some(cl) = simplify_clause(&cl, assumptions) else { continue };
        let mut atoms = Vec::new();
        let mut valid = false;
        for a in &cl {
            let p = a.poly.substitute_all(&|s| rename.get(s).map(|n| Poly::var(n.clone())));
            match LinearAtom::build(p, a.rel) {
                Norm::Atom(b) => {
                    if !atoms.contains(&b) {
                        atoms.push(b)
                    }
                }
                Norm::True => valid = true,
                Norm::False => {}
            }
        }
        if valid {
            continue;
        }
        let mut vars: Vec<Symbol> = Vec::new();
        for a in &atoms {
            for s in a.symbols() {
                let mut inner = BTreeSet::new();
                if let Some(t) = terms.get(&s) {
                    t.collect_consts(&mut inner);
                } else {
                    inner.insert(s.clone());
                }
                for v in inner {
                    if arg_keep.contains(&v) && !vars.contains(&v) {
                        vars.push(v);
                    }
                }
            }
        }
        vars.sort();
        let uc = UClause { vars, atoms };
        if !clauses.contains(&uc) {
            clauses.push(uc);
        }
    }
    // A clause whose atoms include all atoms of another one is implied by it.
    let mut keep_clause = vec![true; clauses.len()];
    for i in 0..clauses.len() {
        for j in 0..clauses.len() {
            if i != j && keep_clause[j] && clauses[j].atoms.iter().all(|a| clauses[i].atoms.contains(a)) {
                if clauses[i].atoms.len() > clauses[j].atoms.len() || i > j {
                    keep_clause[i] = false;
                }
            }
        }
    }
    let clauses: Vec<UClause> = clauses.into_iter().zip(keep_clause).filter(|(_, k)| *k).map(|(c, _)| c).collect();
    Ok(ConstraintResult { clauses, terms, weakest: false, steps })
}

/// Soundness check: adding the constraint makes the specification
/// unsatisfiable.
pub fn check_unsat_with_constraint(spec: &ProblemSpec, gamma: &[Formula]) -> Result<bool> {
    let mut s = spec.clone();
    s.clauses.extend(gamma.iter().cloned());
    is_unsat(&s)
}

/// Decide a specification by hierarchical reduction. Products of
/// parameters are decided exactly (see [`decide_exact`]).
pub fn is_unsat(spec: &ProblemSpec) -> Result<bool> {
    let red = crate::hier::reduce_chain(spec)?;
    Ok(decide_exact(&red.formula(), &[], DEFAULT_MAX_CASES)? == Decision::Unsat)
}

// ----- definitional shapes ------------------------------------------------

/// `f(x1..xn) ⋈ s` with distinct variables `x` and `s` free of `f`.
fn defined_side(lit: &Literal, vars: &[Symbol]) -> Option<(Symbol, Rel, Vec<Symbol>)> {
    if !lit.positive {
        return None;
    }
    let a = &lit.atom;
    for (head, other, rel) in [(&a.lhs, &a.rhs, a.rel), (&a.rhs, &a.lhs, flip(a.rel))] {
        let Term::App(f, args) = head else { continue };
        if Term::is_arith_op(f) {
            continue;
        }
        let xs: Option<Vec<Symbol>> =
            args.iter().map(|t| if let Term::Var(v) = t { Some(v.clone()) } else { None }).collect();
        let Some(xs) = xs else { continue };
        let distinct: BTreeSet<&Symbol> = xs.iter().collect();
        if distinct.len() != xs.len() || !vars.iter().all(|v| xs.contains(v)) {
            continue;
        }
        let mut fs = BTreeSet::new();
        other.collect_functions(&mut fs);
        if fs.contains(f) {
            continue;
        }
        return Some((f.clone(), rel, xs));
    }
    None
}

fn flip(r: Rel) -> Rel {
    match r {
        Rel::Le => Rel::Ge,
        Rel::Lt => Rel::Gt,
        Rel::Ge => Rel::Le,
        Rel::Gt => Rel::Lt,
        Rel::Eq => Rel::Eq,
    }
}

/// Guard (as a conjunction over the canonical variables `?0, ?1, ...`) and
/// defined function of a definitional clause.
fn definitional_parts(c: &Clause) -> Option<(Symbol, Rel, Formula)> {
    for (i, lit) in c.literals.iter().enumerate() {
        let Some((f, rel, xs)) = defined_side(lit, &c.vars) else { continue };
        let others: Vec<&Literal> = c.literals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l).collect();
        if others.iter().any(|l| {
            let mut fs = BTreeSet::new();
            l.atom.lhs.collect_functions(&mut fs);
            l.atom.rhs.collect_functions(&mut fs);
            fs.contains(&f)
        }) {
            continue;
        }
        let sigma: BTreeMap<Symbol, Term> =
            xs.iter().enumerate().map(|(k, x)| (x.clone(), Term::Const(sym(&format!("?{k}"))))).collect();
        let guard = Formula::and(others.iter().map(|l| l.negate().to_formula().substitute(&sigma)).collect());
        return Some((f, rel, guard));
    }
    None
}

/// All non-ground extension clauses are guarded definitions with pairwise
/// disjoint guards per function, or bounds `s <= f(x)` / `f(x) <= t`.
pub fn is_definitional(spec: &ProblemSpec) -> bool {
    let mut by_fn: BTreeMap<Symbol, Vec<(Rel, Formula)>> = BTreeMap::new();
    for f in &spec.clauses {
        let Ok(cs) = f.to_clauses() else { return false };
        for c in cs {
            if c.is_ground() {
                continue;
            }
            if clause_level(&c.to_formula(), &spec.signature) == 0 {
                return false;
            }
            match definitional_parts(&c) {
                Some((g, rel, guard)) => by_fn.entry(g).or_default().push((rel, guard)),
                None => return false,
            }
        }
    }
    for defs in by_fn.values() {
        let eqs: Vec<&Formula> = defs.iter().filter(|(r, _)| *r == Rel::Eq).map(|(_, g)| g).collect();
        for (i, g1) in eqs.iter().enumerate() {
            for g2 in &eqs[i + 1..] {
                match ground_model(&Formula::and(vec![(*g1).clone(), (*g2).clone()])) {
                    Ok(None) => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Parse assumption atoms (`ea > _0; min >= _0`) into linear atoms.
pub fn assumptions_from(formulas: &[Formula]) -> Result<Vec<LinearAtom>> {
    let mut out = Vec::new();
    for f in formulas {
        let d = to_linear(f, &BTreeSet::new())?;
        match d.0.as_slice() {
            [c] => out.extend(c.iter().cloned()),
            [] => return Err(Error::Task(format!("assumption `{f}` is unsatisfiable"))),
            _ => return Err(Error::Task(format!("assumption `{f}` is not a conjunction of atoms"))),
        }
    }
    Ok(out)
}

/// Negation of a constraint clause, instantiated with fresh constants for
/// its variables (used for entailment checks).
pub fn negated_instance(res: &ConstraintResult, clause: usize, suffix: &str) -> Formula {
    let c = &res.clauses[clause];
    let fresh: BTreeMap<Symbol, Term> =
        c.vars.iter().map(|v| (v.clone(), Term::Const(sym(&format!("{v}{suffix}"))))).collect();
    let image = res.image(&c.vars);
    Formula::and(
        c.atoms
            .iter()
            .map(|a| {
                let at: Atom = a.to_atom(&image);
                Formula::not(Formula::Atom(at)).substitute(&fresh)
            })
            .collect(),
    )
}
