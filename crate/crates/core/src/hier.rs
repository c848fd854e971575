//! Hierarchical reduction in chains of local theory extensions.
//!
//! For a chain T0 ⊆ T0 ∪ K1 ⊆ ... ⊆ T0 ∪ K1 ∪ ... ∪ Kn the axioms of the
//! top level are instantiated at the ground extension terms of the goal
//! (identity closure), the level-n applications are replaced by fresh
//! constants together with their congruence axioms (Con0), and the
//! procedure continues one level down until only base-theory symbols,
//! numerals and fresh constants remain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::frontend::{clause_level, ProblemSpec};
use crate::linarith::{poly_to_term, term_key, term_to_poly, Poly};
use crate::logic::{sym, Atom, Clause, Formula, Rel, Signature, Symbol, Term};

/// Ground terms whose head is an extension function.
pub type GroundTermSet = BTreeSet<Term>;

// ----- canonical terms ----------------------------------------------------

fn collect_apps(t: &Term, out: &mut BTreeMap<Symbol, Term>) {
    match t {
        Term::App(f, args) if Term::is_arith_op(f) => args.iter().for_each(|a| collect_apps(a, out)),
        Term::App(..) => {
            let c = canonical_term(t);
            out.insert(term_key(&c), c);
        }
        Term::Var(v) => {
            out.insert(v.clone(), t.clone());
        }
        Term::Const(c) => {
            out.insert(c.clone(), t.clone());
        }
        Term::Num(_) => {}
    }
}

/// Canonical representative of a term: arithmetic parts are rebuilt from
/// their normalized polynomial, so `a(1 + i)` and `a(i + _1)` coincide.
pub fn canonical_term(t: &Term) -> Term {
    match t {
        Term::App(f, args) if !Term::is_arith_op(f) => Term::App(f.clone(), args.iter().map(canonical_term).collect()),
        Term::App(..) => {
            let mut table = BTreeMap::new();
            collect_apps(t, &mut table);
            let image = |s: &Symbol| table.get(s).cloned().unwrap_or_else(|| Term::Const(s.clone()));
            poly_to_term(&term_to_poly(t), &image)
        }
        _ => t.clone(),
    }
}

pub fn canonical_formula(f: &Formula) -> Formula {
    f.map_atoms(&|a| a.map_terms(canonical_term))
}

fn canonical_clause(c: &Clause) -> Clause {
    c.map_terms(canonical_term)
}

// ----- est and closure ----------------------------------------------------

fn ext_subterms(t: &Term, sig: &Signature, heads: Option<&BTreeSet<Symbol>>, out: &mut GroundTermSet) {
    t.visit(&mut |s| {
        if let Term::App(f, _) = s {
            if sig.is_extension(f) && heads.is_none_or(|h| h.contains(f)) && s.is_ground() {
                out.insert(canonical_term(s));
            }
        }
    });
}

fn formula_terms(f: &Formula) -> Vec<&Term> {
    f.atoms().into_iter().flat_map(|a| a.terms()).collect()
}

/// est(K, G): ground extension-headed subterms of the clauses and the goal.
pub fn est(k: &[Clause], g: &[Formula], sig: &Signature) -> GroundTermSet {
    est_heads(k, g, sig, None)
}

fn est_heads(k: &[Clause], g: &[Formula], sig: &Signature, heads: Option<&BTreeSet<Symbol>>) -> GroundTermSet {
    let mut out = GroundTermSet::new();
    for c in k {
        for t in c.terms() {
            ext_subterms(t, sig, heads, &mut out);
        }
    }
    for f in g {
        for t in formula_terms(f) {
            ext_subterms(t, sig, heads, &mut out);
        }
    }
    out
}

/// Identity closure Ψ_K(T) = est(K, T) ∪ T.
pub fn closure_identity(t: &GroundTermSet, k: &[Clause], sig: &Signature) -> GroundTermSet {
    let mut out = est(k, &[], sig);
    for s in t {
        ext_subterms(s, sig, None, &mut out);
        out.insert(canonical_term(s));
    }
    out
}

// ----- matching and instantiation -----------------------------------------

type Subst = BTreeMap<Symbol, Term>;

fn ground_eq(a: &Term, b: &Term) -> bool {
    canonical_term(a) == canonical_term(b)
}

enum Step {
    Ok,
    Fail,
    Defer,
}

/// Match one argument of a pattern against a ground argument, possibly
/// solving a linear argument such as `j + _1` for `j`.
fn match_arg(p: &Term, g: &Term, sigma: &mut Subst) -> Step {
    let p = p.substitute(sigma);
    if p.is_ground() {
        return if ground_eq(&p, g) { Step::Ok } else { Step::Fail };
    }
    match &p {
        Term::Var(v) => {
            sigma.insert(v.clone(), canonical_term(g));
            Step::Ok
        }
        Term::App(f, _) if !Term::is_arith_op(f) => {
            if match_term(&p, g, sigma) {
                Step::Ok
            } else {
                Step::Fail
            }
        }
        _ => {
            let mut vars = BTreeSet::new();
            p.collect_vars(&mut vars);
            if vars.len() != 1 {
                return Step::Defer;
            }
            let v = vars.into_iter().next().expect("one variable");
            // Variables are renamed apart from constants before matching, so
            // the variable's name identifies it inside the polynomial.
            let pp = term_to_poly(&p);
            let Some(c) = pp.coefficient_of(&v).as_constant() else {
                return Step::Defer;
            };
            if pp.degree_in(&[v.clone()].into_iter().collect()) != 1 {
                return Step::Defer;
            }
            let vp = Poly::var(v.clone());
            let rest = pp.sub(&vp.scale(&c));
            let mut table = BTreeMap::new();
            collect_apps(g, &mut table);
            collect_apps(&p, &mut table);
            let image = |s: &Symbol| table.get(s).cloned().unwrap_or_else(|| Term::Const(s.clone()));
            let sol = term_to_poly(g).sub(&rest).scale(&c.recip());
            sigma.insert(v, canonical_term(&poly_to_term(&sol, &image)));
            Step::Ok
        }
    }
}

/// Extend `sigma` so that `pattern` (an application) equals `ground`.
fn match_term(pattern: &Term, ground: &Term, sigma: &mut Subst) -> bool {
    let (Term::App(f, pargs), Term::App(g, gargs)) = (pattern, ground) else {
        return false;
    };
    if f != g || pargs.len() != gargs.len() {
        return false;
    }
    let mut pending: Vec<usize> = (0..pargs.len()).collect();
    while !pending.is_empty() {
        let mut progress = false;
        let mut still = Vec::new();
        for i in pending {
            match match_arg(&pargs[i], &gargs[i], sigma) {
                Step::Ok => progress = true,
                Step::Fail => return false,
                Step::Defer => still.push(i),
            }
        }
        if !progress && !still.is_empty() {
            return false;
        }
        pending = still;
    }
    true
}

fn var_patterns(c: &Clause, heads: &BTreeSet<Symbol>) -> Vec<Term> {
    let mut out = Vec::new();
    for t in c.terms() {
        t.visit(&mut |s| {
            if let Term::App(f, _) = s {
                if heads.contains(f) && !s.is_ground() && !out.contains(s) {
                    out.push(s.clone());
                }
            }
        });
    }
    out
}

fn rename_apart(c: &Clause) -> (Clause, BTreeMap<Symbol, Symbol>) {
    let map: BTreeMap<Symbol, Symbol> = c.vars.iter().map(|v| (v.clone(), sym(&format!("?{v}")))).collect();
    let sigma: Subst = map.iter().map(|(v, w)| (v.clone(), Term::Var(w.clone()))).collect();
    (c.substitute(&sigma), map)
}

fn enumerate(
    patterns: &[Term],
    t: &GroundTermSet,
    sigma: &mut Subst,
    out: &mut Vec<Subst>,
) {
    let Some((p, rest)) = patterns.split_first() else {
        out.push(sigma.clone());
        return;
    };
    let p = p.substitute(sigma);
    if p.is_ground() {
        let c = canonical_term(&p);
        if t.contains(&c) {
            enumerate(rest, t, sigma, out);
        }
        return;
    }
    let Term::App(f, _) = &p else { return };
    for g in t {
        if matches!(g, Term::App(h, _) if h == f) {
            let mut s = sigma.clone();
            if match_term(&p, g, &mut s) {
                // Every extension-headed instance must itself be in T.
                if canonical_term(&p.substitute(&s)) == *g {
                    enumerate(rest, t, &mut s, out);
                }
            }
        }
    }
}

/// K[T]: the ground instances of the clauses in which every application of
/// a function in `heads` falls into `t`. Variables that occur below no such
/// application cannot be grounded.
pub fn instantiate_heads(k: &[Clause], t: &GroundTermSet, heads: &BTreeSet<Symbol>) -> Result<Vec<Clause>> {
    let mut out: Vec<Clause> = Vec::new();
    let mut seen = BTreeSet::new();
    for c in k {
        if c.is_ground() {
            let g = canonical_clause(c);
            if seen.insert(g.clone()) {
                out.push(g);
            }
            continue;
        }
        let (c2, _) = rename_apart(c);
        let patterns = var_patterns(&c2, heads);
        let mut covered = BTreeSet::new();
        for p in &patterns {
            p.collect_vars(&mut covered);
        }
        if let Some(v) = c2.vars.iter().find(|v| !covered.contains(*v)) {
            return Err(Error::NonGroundable(format!(
                "variable `{}` of clause `{}` occurs below no extension function",
                v.trim_start_matches('?'),
                c.to_formula()
            )));
        }
        let mut substs = Vec::new();
        enumerate(&patterns, t, &mut Subst::new(), &mut substs);
        for s in substs {
            let g = canonical_clause(&c2.substitute(&s));
            if seen.insert(g.clone()) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// K[T] with all extension functions of the signature as heads.
pub fn instantiate(k: &[Clause], t: &GroundTermSet, sig: &Signature) -> Result<Vec<Clause>> {
    let heads: BTreeSet<Symbol> = sig.extension_functions.keys().cloned().collect();
    instantiate_heads(k, t, &heads)
}

// ----- flattening and purification ----------------------------------------

/// Definition `constant = function(args)` introduced by purification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def {
    pub constant: Symbol,
    pub function: Symbol,
    /// Ground argument terms (may mention constants of earlier definitions
    /// of the same purification step and applications of lower levels).
    pub args: Vec<Term>,
}

impl Def {
    pub fn term(&self) -> Term {
        Term::App(self.function.clone(), self.args.clone())
    }
}

/// Result of flattening and purifying a set of ground formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PurifiedProblem {
    /// Clauses without extension symbols (non-ground axioms of the base).
    pub k0: Vec<Clause>,
    /// Ground formulas without the purified symbols.
    pub g0: Vec<Formula>,
    pub defs: Vec<Def>,
    pub con0: Vec<Formula>,
}

/// Fresh-constant supply: `c_<f>_<k>`, avoiding every symbol in use.
#[derive(Clone, Debug, Default)]
pub struct Namer {
    taken: BTreeSet<Symbol>,
    counters: BTreeMap<Symbol, usize>,
}

impl Namer {
    pub fn new(taken: BTreeSet<Symbol>) -> Namer {
        Namer { taken, counters: BTreeMap::new() }
    }

    pub fn fresh(&mut self, f: &str) -> Symbol {
        let k = self.counters.entry(sym(f)).or_insert(0);
        loop {
            *k += 1;
            let cand = sym(&format!("c_{f}_{k}"));
            if self.taken.insert(cand.clone()) {
                return cand;
            }
        }
    }
}

fn post_order<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
    if let Term::App(_, args) = t {
        for a in args {
            post_order(a, out);
        }
    }
    out.push(t);
}

/// Purify ground formulas with respect to the functions in `heads`.
fn purify_heads(
    formulas: &[Formula],
    heads: &BTreeSet<Symbol>,
    namer: &mut Namer,
) -> Result<(Vec<Formula>, Vec<Def>, Vec<Formula>)> {
    let formulas: Vec<Formula> = formulas.iter().map(canonical_formula).collect();
    let mut names: BTreeMap<Term, Term> = BTreeMap::new();
    let mut defs: Vec<Def> = Vec::new();
    for f in &formulas {
        for t in formula_terms(f) {
            let mut order = Vec::new();
            post_order(t, &mut order);
            for s in order {
                let Term::App(g, args) = s else { continue };
                if !heads.contains(g) || names.contains_key(s) {
                    continue;
                }
                if !s.is_ground() {
                    return Err(Error::NonGroundable(format!("non-ground application `{s}` in a ground problem")));
                }
                let c = namer.fresh(g);
                let args: Vec<Term> = args.iter().map(|a| a.replace_subterms(&names)).collect();
                defs.push(Def { constant: c.clone(), function: g.clone(), args });
                names.insert(s.clone(), Term::Const(c));
            }
        }
    }
    let g0 = formulas.iter().map(|f| f.map_atoms(&|a| a.map_terms(|t| t.replace_subterms(&names)))).collect();
    Ok((g0, defs.clone(), congruence(&defs)))
}

/// Con0: one clause `args equal → constants equal` per unordered pair of
/// definitions with the same head.
pub fn congruence(defs: &[Def]) -> Vec<Formula> {
    let mut out = Vec::new();
    for (i, d) in defs.iter().enumerate() {
        for e in &defs[i + 1..] {
            if d.function != e.function {
                continue;
            }
            let premise =
                d.args.iter().zip(&e.args).map(|(a, b)| Formula::atom(a.clone(), Rel::Eq, b.clone())).collect();
            out.push(Formula::Implies(
                Box::new(Formula::and(premise)),
                Box::new(Formula::Atom(Atom::new(Term::Const(d.constant.clone()), Rel::Eq, Term::Const(e.constant.clone())))),
            ));
        }
    }
    out
}

fn symbols_of(formulas: &[Formula], clauses: &[Clause]) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for f in formulas {
        out.extend(f.consts());
    }
    for c in clauses {
        for t in c.terms() {
            t.collect_consts(&mut out);
        }
    }
    out
}

/// Flatten and purify: every ground extension application becomes a fresh
/// constant (innermost first); non-ground clauses without extension
/// symbols are returned as K0.
pub fn flatten_purify(formulas: &[Formula], sig: &Signature) -> Result<PurifiedProblem> {
    let mut ground = Vec::new();
    let mut k0 = Vec::new();
    for f in formulas {
        if f.free_vars().is_empty() && !f.has_quantifier() {
            ground.push(f.clone());
        } else {
            for c in f.to_clauses()? {
                if c.terms().any(|t| {
                    let mut fs = BTreeSet::new();
                    t.collect_functions(&mut fs);
                    fs.iter().any(|g| sig.is_extension(g))
                }) {
                    return Err(Error::NonGroundable(format!("non-ground extension clause `{}`", c.to_formula())));
                }
                k0.push(c);
            }
        }
    }
    let heads: BTreeSet<Symbol> = sig.extension_functions.keys().cloned().collect();
    let mut namer = Namer::new(symbols_of(formulas, &[]));
    let (g0, defs, con0) = purify_heads(&ground, &heads, &mut namer)?;
    Ok(PurifiedProblem { k0, g0, defs, con0 })
}

// ----- chain reduction ----------------------------------------------------

/// What happened at one level of the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelStep {
    pub level: usize,
    pub terms: Vec<Term>,
    pub instances: Vec<Formula>,
    pub defs: Vec<Def>,
    pub con0: Vec<Formula>,
}

/// Ground base-theory problem equisatisfiable (under locality) with the
/// input specification.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Reduction {
    /// Purified goal, instances and congruence clauses of every level.
    pub ground: Vec<Formula>,
    pub defs: Vec<Def>,
    pub steps: Vec<LevelStep>,
}

impl Reduction {
    pub fn formulas(&self) -> Vec<Formula> {
        self.ground.clone()
    }

    pub fn formula(&self) -> Formula {
        Formula::and(self.formulas())
    }

    /// Constant → fully expanded application term (definitions of lower
    /// levels are substituted into the arguments).
    pub fn expansions(&self) -> BTreeMap<Symbol, Term> {
        let mut out: BTreeMap<Symbol, Term> = BTreeMap::new();
        // Definitions are stored top level first; arguments only mention
        // constants of the same level or of earlier purification steps.
        for d in &self.defs {
            out.insert(d.constant.clone(), d.term());
        }
        let mut changed = true;
        while changed {
            changed = false;
            let snapshot = out.clone();
            for t in out.values_mut() {
                let n = t.replace_consts(&snapshot);
                if n != *t {
                    *t = n;
                    changed = true;
                }
            }
        }
        out
    }

    /// Human-readable dump of every level (`--dump-reduction`).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for st in &self.steps {
            let _ = writeln!(s, "level {}:", st.level);
            let _ = writeln!(s, "    terms:");
            for t in &st.terms {
                let _ = writeln!(s, "        {t};");
            }
            let _ = writeln!(s, "    instances:");
            for f in &st.instances {
                let _ = writeln!(s, "        {f};");
            }
            let _ = writeln!(s, "    definitions:");
            for d in &st.defs {
                let _ = writeln!(s, "        {} = {};", d.constant, d.term());
            }
            let _ = writeln!(s, "    congruence:");
            for f in &st.con0 {
                let _ = writeln!(s, "        {f};");
            }
        }
        let _ = writeln!(s, "ground:");
        for f in self.formulas() {
            let _ = writeln!(s, "    {f};");
        }
        s
    }
}

/// Options for [`reduce_chain_with`].
#[derive(Clone, Debug, Default)]
pub struct ReduceOptions {
    /// Extra ground terms added to the instantiation set of their level.
    pub seed: GroundTermSet,
}

/// Reduce a specification level by level, from the highest extension level
/// down to the base theory.
pub fn reduce_chain(spec: &ProblemSpec) -> Result<Reduction> {
    reduce_chain_with(spec, &ReduceOptions::default())
}

pub fn reduce_chain_with(spec: &ProblemSpec, opts: &ReduceOptions) -> Result<Reduction> {
    let sig = &spec.signature;
    let mut goal: Vec<Formula> = spec.query.clone();
    let mut by_level: BTreeMap<usize, Vec<Clause>> = BTreeMap::new();
    for f in &spec.clauses {
        if f.free_vars().is_empty() && !f.has_quantifier() {
            goal.push(f.clone());
            continue;
        }
        for c in f.to_clauses()? {
            if c.is_ground() {
                goal.push(c.to_formula());
            } else {
                let level = clause_level(&c.to_formula(), sig);
                by_level.entry(level).or_default().push(c);
            }
        }
    }
    if let Some(base) = by_level.get(&0) {
        if let Some(c) = base.first() {
            return Err(Error::NonGroundable(format!(
                "clause `{}` has variables but no extension function",
                c.to_formula()
            )));
        }
    }
    let mut namer = Namer::new(symbols_of(&goal, &by_level.values().flatten().cloned().collect::<Vec<_>>()));
    let mut red = Reduction::default();
    for level in (1..=sig.max_level()).rev() {
        let heads: BTreeSet<Symbol> =
            sig.extension_functions.iter().filter(|(_, e)| e.level == level).map(|(f, _)| f.clone()).collect();
        let k = by_level.remove(&level).unwrap_or_default();
        let mut t = est_heads(&k, &goal, sig, Some(&heads));
        t.extend(opts.seed.iter().filter(|s| matches!(s, Term::App(f, _) if heads.contains(f))).map(canonical_term));
        let instances: Vec<Formula> = instantiate_heads(&k, &t, &heads)?.iter().map(Clause::to_formula).collect();
        goal.extend(instances.iter().cloned());
        let (g, defs, con0) = purify_heads(&goal, &heads, &mut namer)?;
        goal = g;
        // Congruence clauses may mention lower-level applications, so they
        // join the goal and are purified further down.
        goal.extend(con0.iter().cloned());
        red.defs.extend(defs.iter().cloned());
        red.steps.push(LevelStep { level, terms: t.into_iter().collect(), instances, defs, con0: con0.clone() });
    }
    red.ground = goal;
    Ok(red)
}
