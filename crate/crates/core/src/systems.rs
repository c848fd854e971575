//! Transition constraint systems: inductive-invariant verification
//! conditions, bounded model checking and invariant strengthening.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::frontend::{print_formula, ProblemSpec};
use crate::hier::reduce_chain;
use crate::linarith::{ground_model, simplify_clause, to_linear, LinearAtom, Model};
use crate::logic::{negate_universal, rename_symbols, sym, ExtensionFn, Formula, Signature, Symbol, SymbolRenaming};
use crate::par;
use crate::symelim::{generate_constraint_with, is_definitional, ConstraintResult, GenerateOptions, Selection, UClause};

/// `(V, Σ, Init, Update)` with the renaming `x ↦ x'`, `f ↦ f'` of the
/// updated symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub signature: Signature,
    pub init: Vec<Formula>,
    pub update: Vec<Formula>,
    pub update_vars: SymbolRenaming,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Inductive,
    InitFails(Model),
    ConsecutionFails(Model),
    Unknown(String),
}

impl Verdict {
    pub fn is_inductive(&self) -> bool {
        matches!(self, Verdict::Inductive)
    }
}

/// Satisfiability of a specification after hierarchical reduction: a model
/// of the reduced ground problem, or `None` if it is unsatisfiable.
pub fn decide(spec: &ProblemSpec) -> Result<Option<Model>> {
    let red = reduce_chain(spec)?;
    ground_model(&red.formula())
}

fn taken_symbols(fs: &[&[Formula]]) -> BTreeSet<Symbol> {
    fs.iter().flat_map(|v| v.iter()).flat_map(|f| f.consts()).collect()
}

impl TransitionSystem {
    pub fn new(signature: Signature, init: Vec<Formula>, update: Vec<Formula>, update_vars: SymbolRenaming) -> Result<Self> {
        update_vars.check(&signature)?;
        Ok(TransitionSystem { signature, init, update, update_vars })
    }

    /// `Φ'`: the candidate over the post-state symbols.
    pub fn primed(&self, phi: &Formula) -> Result<Formula> {
        rename_symbols(phi, &self.update_vars, &self.signature)
    }

    fn negated(&self, phi: &[Formula], extra: &[&[Formula]]) -> Result<Formula> {
        let mut all: Vec<&[Formula]> = vec![phi];
        all.extend_from_slice(extra);
        negate_universal(&Formula::and(phi.to_vec()), &taken_symbols(&all))
    }

    /// `Init ∧ ¬Φ`.
    pub fn vc_initiation(&self, phi: &[Formula]) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::new(self.signature.clone());
        spec.clauses = self.init.clone();
        spec.query = vec![self.negated(phi, &[&self.init])?];
        Ok(spec)
    }

    /// `Φ ∧ Update ∧ ¬Φ'`.
    pub fn vc_consecution(&self, phi: &[Formula]) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::new(self.signature.clone());
        spec.clauses = phi.iter().cloned().chain(self.update.iter().cloned()).collect();
        let neg = self.negated(phi, &[&self.update])?;
        spec.query = vec![self.primed(&neg)?];
        Ok(spec)
    }

    pub fn check_inductive(&self, phi: &[Formula]) -> Result<Verdict> {
        if let Some(m) = decide(&self.vc_initiation(phi)?)? {
            return Ok(Verdict::InitFails(m));
        }
        if let Some(m) = decide(&self.vc_consecution(phi)?)? {
            return Ok(Verdict::ConsecutionFails(m));
        }
        Ok(Verdict::Inductive)
    }

    /// Update axioms have the guarded-definition or bounded shape.
    pub fn definitional_update(&self) -> bool {
        let mut spec = ProblemSpec::new(self.signature.clone());
        spec.clauses = self.update.clone();
        is_definitional(&spec)
    }

    // ----- bounded model checking ---------------------------------------

    /// Renaming for transition `i`: `x ↦ x_i`, `x' ↦ x_{i+1}`, plus the
    /// extended signature declaring the indexed functions. Indexed copies of
    /// an updated function `f` live at level `level(f) + i·L` where `L` is
    /// the highest level of the original chain, so every step stacks on top
    /// of the previous one.
    fn step_renaming(&self, i: usize, sig: &mut Signature) -> Result<BTreeMap<Symbol, Symbol>> {
        let stride = self.signature.max_level().max(1);
        let mut r = BTreeMap::new();
        for (x, xp) in self.update_vars.map() {
            for (from, idx) in [(x, i), (xp, i + 1)] {
                let name = sym(&format!("{x}_{idx}"));
                if self.signature.arity(&name).is_some() {
                    return Err(Error::Signature(format!("indexed symbol `{name}` is already declared")));
                }
                if let Some(e) = self.signature.extension_functions.get(x.as_ref()) {
                    let level = e.level + idx * stride;
                    sig.extension_functions.insert(name.clone(), ExtensionFn { arity: e.arity, level });
                } else if let Some(a) = self.signature.base_functions.get(x.as_ref()) {
                    sig.base_functions.insert(name.clone(), *a);
                }
                r.insert(from.clone(), name);
            }
        }
        Ok(r)
    }

    /// `Init_0 ∧ Update_0 ∧ ... ∧ Update_{j-1} ∧ ¬Φ_j`.
    pub fn bmc_formula(&self, phi: &[Formula], j: usize) -> Result<ProblemSpec> {
        let mut sig = self.signature.clone();
        let r0 = self.step_renaming(0, &mut sig)?;
        let unprimed: BTreeMap<Symbol, Symbol> =
            self.update_vars.map().keys().map(|x| (x.clone(), r0[x].clone())).collect();
        let mut clauses: Vec<Formula> = self.init.iter().map(|f| f.rename(&unprimed)).collect();
        for i in 0..j {
            let r = self.step_renaming(i, &mut sig)?;
            clauses.extend(self.update.iter().map(|f| f.rename(&r)));
        }
        let rj = self.step_renaming(j, &mut sig)?;
        let at_j: BTreeMap<Symbol, Symbol> =
            self.update_vars.map().keys().map(|x| (x.clone(), rj[x].clone())).collect();
        let phi_j: Vec<Formula> = phi.iter().map(|f| f.rename(&at_j)).collect();
        let mut spec = ProblemSpec::new(sig);
        spec.query = vec![negate_universal(&Formula::and(phi_j.clone()), &taken_symbols(&[&phi_j, &clauses]))?];
        spec.clauses = clauses;
        Ok(spec)
    }

    /// Counterexample search up to depth `k`: one entry per depth `0..=k`.
    pub fn bmc(&self, phi: &[Formula], k: usize, parallel: bool) -> Result<Vec<BmcStep>> {
        let depths: Vec<usize> = (0..=k).collect();
        par::map(parallel, &depths, |&j| {
            let spec = self.bmc_formula(phi, j)?;
            Ok(BmcStep { depth: j, counterexample: decide(&spec)? })
        })
        .into_iter()
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BmcStep {
    pub depth: usize,
    pub counterexample: Option<Model>,
}

// ----- invariant strengthening -------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Invariant(Vec<Formula>),
    NoUniversalInvariant,
    Exhausted(Vec<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strengthening {
    pub outcome: Outcome,
    pub iterations: usize,
    /// Step log, one entry per line, indented by nesting depth (4 spaces).
    pub log: Vec<String>,
    /// Every generated constraint was the weakest one.
    pub weakest: bool,
}

#[derive(Clone, Debug, Default)]
pub struct StrengthenOptions {
    pub max_iter: usize,
    pub assumptions: Vec<LinearAtom>,
    pub generate: GenerateOptions,
}

fn block(out: &mut Vec<String>, indent: &str, head: &str, fs: &[Formula], raw: bool) {
    let line = |f: &Formula| if raw { format!("{f};") } else { format!("{};", print_formula(f)) };
    if raw && fs.len() == 1 {
        out.push(format!("{indent}{head} {}", line(&fs[0])));
        return;
    }
    out.push(format!("{indent}{head} |-"));
    out.extend(fs.iter().map(|f| format!("{indent}    {}", line(f))));
}

/// Ground unit atoms of a candidate (used to simplify new constraints).
fn unit_atoms(fs: &[Formula]) -> Vec<LinearAtom> {
    let mut out = Vec::new();
    for f in fs.iter().filter(|f| f.is_ground()) {
        if let Ok(d) = to_linear(f, &BTreeSet::new()) {
            if let [c] = d.0.as_slice() {
                out.extend(c.iter().cloned());
            }
        }
    }
    out
}

/// Constraint clauses simplified under known facts; valid clauses vanish.
fn simplify_constraint(res: &ConstraintResult, facts: &[LinearAtom]) -> ConstraintResult {
    let mut clauses = Vec::new();
    for c in &res.clauses {
        let Some(atoms) = simplify_clause(&c.atoms, facts) else { continue };
        let mut syms = BTreeSet::new();
        for a in &atoms {
            for s in a.symbols() {
                match res.terms.get(&s) {
                    Some(t) => t.collect_consts(&mut syms),
                    None => {
                        syms.insert(s);
                    }
                }
            }
        }
        let vars = c.vars.iter().filter(|v| syms.contains(*v)).cloned().collect();
        let uc = UClause { vars, atoms };
        if !clauses.contains(&uc) {
            clauses.push(uc);
        }
    }
    ConstraintResult { clauses, ..res.clone() }
}

/// Iteratively conjoin the weakest constraint making the candidate
/// preserved by the update, until it is inductive, fails in the initial
/// states, or `max_iter` iterations have been spent.
pub fn strengthen(
    sys: &TransitionSystem,
    phi: &[Formula],
    params: &[Symbol],
    task: &str,
    opts: &StrengthenOptions,
) -> Result<Strengthening> {
    if opts.max_iter == 0 {
        return Err(Error::Task("inv_str_max_iter must be at least 1".into()));
    }
    let definitional = sys.definitional_update();
    let mut weakest = true;
    let mut candidate: Vec<Formula> = phi.to_vec();
    let mut log = Vec::new();
    for k in 1..=opts.max_iter {
        log.push(format!("{k}. Iteration:"));
        let ind = "    ";
        block(&mut log, ind, "(step) current candidate:", &candidate, k == 1);
        let init_vc = sys.vc_initiation(&candidate)?;
        let cons_vc = sys.vc_consecution(&candidate)?;
        let negated = &cons_vc.query[0];
        let pre_negated = sys.negated(&candidate, &[&sys.update])?;
        log.push(format!("{ind}(step) negated candidate: {};", print_formula(&pre_negated)));
        log.push(format!("{ind}(step) negated and updated candidate: {};", print_formula(negated)));
        let init_ok = decide(&init_vc)?.is_none();
        let cons_ok = decide(&cons_vc)?.is_none();
        log.push(format!("{ind}(step) created subtask:"));
        if cons_ok {
            log.push(format!("{ind}    name: {task}_ST_VC_update_{k}"));
            log.push(format!("{ind}    mode: Mode.GENERATE_CONSTRAINTS"));
        } else {
            log.push(format!("{ind}    name: {task}_ST_strengthening_{k}_"));
            log.push(format!("{ind}    mode: Mode.SYMBOL_ELIMINATION"));
        }
        log.push(format!("{ind}(step) verification condition init: {init_ok}"));
        log.push(format!("{ind}(step) verification condition: {cons_ok}"));
        if !init_ok {
            let outcome = if weakest { Outcome::NoUniversalInvariant } else { Outcome::Exhausted(candidate) };
            return Ok(Strengthening { outcome, iterations: k, log, weakest });
        }
        if cons_ok {
            return Ok(Strengthening { outcome: Outcome::Invariant(candidate), iterations: k, log, weakest });
        }
        let gamma = generate_constraint_with(&cons_vc, &Selection::Parameters(params.to_vec()), &opts.assumptions, &opts.generate)?;
        weakest &= definitional;
        let mut facts = unit_atoms(&candidate);
        facts.extend(opts.assumptions.iter().cloned());
        let gamma = simplify_constraint(&gamma, &facts);
        let before = candidate.len();
        for f in gamma.clause_formulas() {
            if !candidate.iter().any(|c| print_formula(c) == print_formula(&f)) {
                candidate.push(f);
            }
        }
        block(&mut log, ind, "(step) new candidate:", &candidate, false);
        if candidate.len() == before {
            // Nothing new: the generated constraint is already implied.
            return Ok(Strengthening { outcome: Outcome::Exhausted(candidate), iterations: k, log, weakest });
        }
    }
    Ok(Strengthening { outcome: Outcome::Exhausted(candidate), iterations: opts.max_iter, log, weakest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_extension_decls, parse_function_decls, parse_statements};

    pub fn example_two() -> (TransitionSystem, Vec<Formula>) {
        let mut sig = Signature::default();
        sig.base_functions = parse_function_decls("{(+,2), (-,2), (*,2)}").unwrap();
        sig.extension_functions = parse_extension_decls("{(b, 1, 1), (a, 1, 2), (ap, 1, 3)}").unwrap();
        sig.relations = parse_function_decls("{(<=,2), (<,2), (>=,2), (>,2)}").unwrap();
        let init = parse_statements(
            "d1 = _1; d2 = _1; (FORALL j). a(j) = b(j); i = _0; (FORALL i,j). i <= j --> b(i) <= b(j);",
            &sig,
        )
        .unwrap();
        let update =
            parse_statements("(FORALL j). ap(j) = a(j) + _1; d1p = ap(i); d2p = ap(i + _1); ip = i + _1;", &sig).unwrap();
        let r = SymbolRenaming::from_pairs([("a", "ap"), ("d1", "d1p"), ("d2", "d2p"), ("i", "ip")]).unwrap();
        let phi = parse_statements("d1 <= d2;", &sig).unwrap();
        (TransitionSystem::new(sig, init, update, r).unwrap(), phi)
    }

    fn params() -> Vec<Symbol> {
        ["a", "d1", "d2"].iter().map(|s| sym(s)).collect()
    }

    #[test]
    fn example_two_is_not_inductive() {
        let (s, phi) = example_two();
        assert!(decide(&s.vc_initiation(&phi).unwrap()).unwrap().is_none());
        assert!(matches!(s.check_inductive(&phi).unwrap(), Verdict::ConsecutionFails(_)));
    }

    #[test]
    fn example_two_strengthens_in_two_iterations() {
        let (s, phi) = example_two();
        let opts = StrengthenOptions { max_iter: 2, ..Default::default() };
        let r = strengthen(&s, &phi, &params(), "example_4.16", &opts).unwrap();
        let Outcome::Invariant(inv) = &r.outcome else { panic!("{:?}", r.outcome) };
        assert_eq!(r.iterations, 2);
        let printed: Vec<String> = inv.iter().map(print_formula).collect();
        assert_eq!(printed, ["d1 - d2 <= _0", "(FORALL i). a(i + _1) - a(i) >= _0"]);
        assert!(s.check_inductive(inv).unwrap().is_inductive());
        let expected = [
            "1. Iteration:",
            "    (step) current candidate: d1 <= d2;",
            "    (step) negated candidate: d1 - d2 > _0;",
            "    (step) negated and updated candidate: d1p - d2p > _0;",
            "    (step) created subtask:",
            "        name: example_4.16_ST_strengthening_1_",
            "        mode: Mode.SYMBOL_ELIMINATION",
            "    (step) verification condition init: true",
            "    (step) verification condition: false",
            "    (step) new candidate: |-",
            "        d1 - d2 <= _0;",
            "        (FORALL i). a(i + _1) - a(i) >= _0;",
            "2. Iteration:",
            "    (step) current candidate: |-",
            "        d1 - d2 <= _0;",
            "        (FORALL i). a(i + _1) - a(i) >= _0;",
            "    (step) negated candidate: OR(a(sk_i + _1) - a(sk_i) < _0, d1 - d2 > _0);",
            "    (step) negated and updated candidate: OR(ap(sk_i + _1) - ap(sk_i) < _0, d1p - d2p > _0);",
            "    (step) created subtask:",
            "        name: example_4.16_ST_VC_update_2",
            "        mode: Mode.GENERATE_CONSTRAINTS",
            "    (step) verification condition init: true",
            "    (step) verification condition: true",
        ];
        assert_eq!(r.log, expected);
    }

    #[test]
    fn init_failure_means_no_invariant() {
        let (s, _) = example_two();
        let phi = parse_statements("d1 < d2;", &s.signature).unwrap();
        let opts = StrengthenOptions { max_iter: 3, ..Default::default() };
        let r = strengthen(&s, &phi, &params(), "t", &opts).unwrap();
        assert_eq!(r.outcome, Outcome::NoUniversalInvariant);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn identity_update_preserves_everything() {
        let sig = Signature::arithmetic();
        let update = parse_statements("xp = x;", &sig).unwrap();
        let init = parse_statements("x = _0;", &sig).unwrap();
        let s = TransitionSystem::new(sig.clone(), init, update, SymbolRenaming::from_pairs([("x", "xp")]).unwrap()).unwrap();
        let phi = parse_statements("x <= _5;", &sig).unwrap();
        assert!(decide(&s.vc_consecution(&phi).unwrap()).unwrap().is_none());
        assert_eq!(s.check_inductive(&[Formula::True]).unwrap(), Verdict::Inductive);
    }

    #[test]
    fn bmc_example_one() {
        let (s, phi) = example_two();
        // Without the array precondition a one-step counterexample exists.
        let mut bare = s.clone();
        bare.init = parse_statements("d1 = _1; d2 = _1; i = _0;", &s.signature).unwrap();
        let steps = bare.bmc(&phi, 1, false).unwrap();
        assert!(steps[0].counterexample.is_none());
        assert!(steps[1].counterexample.is_some());
        // With a sorted array the property holds up to depth 3.
        let mut sorted = bare.clone();
        sorted.init.extend(parse_statements("(FORALL i). a(i) <= a(i + _1);", &s.signature).unwrap());
        let steps = sorted.bmc(&phi, 3, true).unwrap();
        assert!(steps.iter().all(|st| st.counterexample.is_none()), "{steps:?}");
    }

    #[test]
    fn bmc_depth_zero_is_initiation() {
        let (s, phi) = example_two();
        let b = s.bmc_formula(&phi, 0).unwrap();
        let i = s.vc_initiation(&phi).unwrap();
        assert_eq!(b.clauses.len(), i.clauses.len());
        assert_eq!(decide(&b).unwrap().is_none(), decide(&i).unwrap().is_none());
    }
}
