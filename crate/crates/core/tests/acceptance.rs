//! Acceptance checks. Each criterion prints one `PASS`/`FAIL` line; the
//! binary exits with a failure status if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use paramver_core::frontend::{
    parse_formula, parse_lha, parse_spec, parse_statements, parse_task_file, parse_terms, print_formula, ProblemSpec,
    Specification, TaskFile,
};
use paramver_core::hier::{canonical_term, closure_identity, est, reduce_chain, GroundTermSet};
use paramver_core::lha::HybridAutomaton;
use paramver_core::linarith::{
    clause_to_string, decide_exact, eliminate, equiv_on_grid_under, ground_model, rat, simplex_sat, simplify_clause,
    to_linear, Decision, Dnf, EliminationConfig, LinRel, LinearAtom, Model, Norm, Poly, Rat, DEFAULT_MAX_CASES,
};
use paramver_core::logic::{sym, Clause, Formula, Rel, Signature, Symbol, Term};
use paramver_core::runner::{mask_volatile, run_path, run_task_file, ResultBody, RunOptions};
use paramver_core::symelim::{
    assumptions_from, check_unsat_with_constraint, generate_constraint, is_unsat, negated_instance, ConstraintResult,
    Selection,
};
use paramver_core::systems::{strengthen, Outcome, StrengthenOptions};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

// ----- helpers --------------------------------------------------------------

fn tasks_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tasks")
}

fn load(name: &str) -> TaskFile {
    let path = tasks_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_task_file(&text, Some(&tasks_dir())).unwrap()
}

fn hpilot(tf: &TaskFile, task: &str) -> (ProblemSpec, Selection) {
    let t = tf.tasks.iter().find(|t| t.name == task).unwrap_or_else(|| panic!("no task {task}"));
    let Specification::Hpilot(spec) = &t.spec else { panic!("{task}: not an HPILOT task") };
    let sel = match (&t.options.parameters, &t.options.eliminate) {
        (Some(p), _) => Selection::Parameters(p.clone()),
        (_, Some(e)) => Selection::Eliminate(e.clone()),
        _ => panic!("{task}: no symbol selection"),
    };
    (spec.clone(), sel)
}

fn result_line(tf: &TaskFile, task: &str) -> String {
    let opts = RunOptions { tasks: Some(vec![task.to_string()]), ..Default::default() };
    let report = run_task_file(tf, &opts).unwrap();
    match &report.tasks[0].result {
        ResultBody::Line(s) => s.clone(),
        ResultBody::Block(b) => panic!("{task}: block result {b:?}"),
    }
}

fn atoms(text: &str, sig: &Signature) -> Vec<LinearAtom> {
    assumptions_from(&parse_statements(text, sig).unwrap()).unwrap()
}

fn syms(names: &[&str]) -> Vec<Symbol> {
    names.iter().map(|s| sym(s)).collect()
}

fn lin(p: Poly, rel: LinRel) -> LinearAtom {
    match LinearAtom::build(p, rel) {
        Norm::Atom(a) => a,
        other => panic!("expected a proper atom, got {other:?}"),
    }
}

fn plant(file: &str) -> HybridAutomaton {
    let text = std::fs::read_to_string(tasks_dir().join(file)).unwrap();
    parse_lha(&text, 0).unwrap()
}

fn rates() -> BTreeMap<Symbol, Rat> {
    [("dmin", 1), ("dmax", 2), ("da", 1)].iter().map(|(k, v)| (sym(k), rat(*v))).collect()
}

// ----- 1. Example 1 ---------------------------------------------------------

fn example1() -> String {
    const EXPECTED: &str = "(FORALL i). OR(a(i + _1) - a(i) >= _0, d1 - d2 > _0)";
    let tf = load("example1.yaml");
    let (spec, sel) = hpilot(&tf, "example constraint generation");
    let start = Instant::now();
    let res = generate_constraint(&spec, &sel, &[]).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(res.clause_strings(), vec![EXPECTED.to_string()]);
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    assert_eq!(result_line(&tf, "example constraint generation"), EXPECTED);
    format!("{EXPECTED} in {:.3} s", elapsed.as_secs_f64())
}

// ----- 2. Example 2 ---------------------------------------------------------

fn example2() -> String {
    let tf = load("example2.yaml");
    let task = &tf.tasks[0];
    let Specification::Pts(pts) = &task.spec else { panic!("not a PTS task") };
    let params = task.options.parameters.clone().unwrap();
    let opts = StrengthenOptions { max_iter: task.options.inv_str_max_iter, ..Default::default() };
    let st = strengthen(&pts.system, &pts.query, &params, &task.name, &opts).unwrap();
    assert_eq!(st.iterations, 2);
    let Outcome::Invariant(inv) = &st.outcome else { panic!("no invariant: {:?}", st.outcome) };
    let printed: Vec<String> = inv.iter().map(|f| format!("{};", print_formula(f))).collect();
    assert_eq!(printed, ["d1 - d2 <= _0;", "(FORALL i). a(i + _1) - a(i) >= _0;"]);
    for line in [
        "1. Iteration:",
        "    (step) verification condition: false",
        "2. Iteration:",
        "    (step) negated candidate: OR(a(sk_i + _1) - a(sk_i) < _0, d1 - d2 > _0);",
        "    (step) verification condition: true",
    ] {
        assert!(st.log.iter().any(|l| l == line), "missing log line `{line}`");
    }
    assert!(st.weakest);
    assert!(pts.system.check_inductive(inv).unwrap().is_inductive(), "independent re-check failed");
    format!("invariant {} after {} iterations, re-checked inductive", printed.join(" "), st.iterations)
}

// ----- 3. Plant mode 1 ------------------------------------------------------

fn plant_mode1() -> String {
    const EXPECTED: &str = "OR(min < _0, lsafe < _0, lf - lsafe <= _0, ea <= _0)";
    let tf = load("plant_mode1.yaml");
    let (spec, sel) = hpilot(&tf, &tf.tasks[0].name);
    let res = generate_constraint(&spec, &sel, &[]).unwrap();
    assert_eq!(res.clause_strings(), vec![EXPECTED.to_string()]);
    assert_eq!(result_line(&tf, &tf.tasks[0].name), EXPECTED);
    let a = atoms("min >= _0; lsafe >= _0; ea > _0;", &spec.signature);
    let simplified = simplify_clause(&res.clauses[0].atoms, &a).expect("clause is not valid");
    assert_eq!(clause_to_string(&simplified), "lf - lsafe <= _0");
    format!("{EXPECTED}; under min>=0, lsafe>=0, ea>0: lf - lsafe <= _0")
}

// ----- 4. Strengthening of the plant, variant automaton -----------------------

fn decide_vcs(h: &HybridAutomaton) -> Vec<(String, Decision)> {
    let first = h.state_symbols();
    h.vcs_invariant(&h.property)
        .unwrap()
        .into_iter()
        .map(|vc| {
            let d = decide_exact(&vc.formula, &first, DEFAULT_MAX_CASES).unwrap();
            (vc.name, d)
        })
        .collect()
}

fn plant_strengthening() -> String {
    const EXPECTED: &str = "OR(x3 >= _0, min - x3 < _0, ea <= _0)";
    let tf = load("plant_strengthening.yaml");
    let (spec, sel) = hpilot(&tf, &tf.tasks[0].name);
    let res = generate_constraint(&spec, &sel, &[]).unwrap();
    assert_eq!(res.clause_strings(), vec![EXPECTED.to_string()]);
    assert_eq!(result_line(&tf, &tf.tasks[0].name), EXPECTED);

    let h = plant("plant_variant.lha");
    assert_eq!(h.property, parse_statements("x1 + x2 <= lf; x3 >= _0;", &Signature::arithmetic()).unwrap());
    let lf_nonneg = parse_formula("lf >= _0", &Signature::arithmetic()).unwrap();
    assert!(h.assumptions.contains(&lf_nonneg));
    let all = decide_vcs(&h);
    let sat: Vec<&String> = all.iter().filter(|(_, d)| *d != Decision::Unsat).map(|(n, _)| n).collect();
    assert!(sat.is_empty(), "satisfiable VCs: {sat:?}");

    // Without lf >= 0 the jumps into the empty mode break the property.
    let mut weaker = h.clone();
    weaker.assumptions.retain(|f| *f != lf_nonneg);
    let broken: Vec<String> =
        decide_vcs(&weaker).into_iter().filter(|(_, d)| *d != Decision::Unsat).map(|(n, _)| n).collect();
    assert!(!broken.is_empty(), "lf >= 0 should be needed");
    format!("{EXPECTED}; Φ1 inductive on the variant ({} VCs UNSAT), needs lf >= 0 ({} VCs fail without)", all.len(), broken.len())
}

// ----- 5. Chatter-freedom, edge 1 -> 4 -------------------------------------

const REFERENCE_CHATTER: &str = "OR(min < _0, lsafe <= _0, lf - lsafe <= _0, esafe <= _0, \
    epsilon <= _0, ea - esafe <= _0, dmax - dmin < _0, da < _0, \
    (((dmax * epsilon) - (dmin * epsilon)) - ea) + lsafe < _0, \
    (((dmax * epsilon) - (dmin * epsilon)) - ea) + esafe < _0, \
    ((da * epsilon) - ea) + lsafe < _0, \
    ((da * epsilon) - ea) + esafe < _0)";

const PLANT_ASSUMPTIONS: &str = "min >= _0; _0 < lsafe; lsafe < lf; _0 < esafe; esafe < ea;";

fn dnf(f: &Formula) -> Dnf {
    to_linear(f, &BTreeSet::new()).unwrap()
}

fn unsat(parts: Vec<Formula>) -> bool {
    decide_exact(&Formula::and(parts), &[], DEFAULT_MAX_CASES).unwrap() == Decision::Unsat
}

fn chatter() -> String {
    let sig = Signature::arithmetic();
    let reference = parse_formula(REFERENCE_CHATTER, &sig).unwrap();
    let values: BTreeMap<Symbol, Term> = rates().into_iter().map(|(k, v)| (k, Term::Num(v))).collect();
    let reference_inst = dnf(&reference.replace_consts(&values));
    let a = atoms(PLANT_ASSUMPTIONS, &sig);
    let symbols = syms(&["lsafe", "esafe", "ea", "epsilon", "min", "lf"]);
    let grid: Vec<Rat> = [(-1, 1), (0, 1), (1, 2), (1, 1), (2, 1), (3, 1)]
        .iter()
        .map(|(n, d)| Rat::new((*n).into(), (*d).into()))
        .collect();

    // The automaton's chatter VC for the first 1 -> 4 edge, rates fixed.
    let h = plant("chemical_plant.lha").instantiate(&rates());
    let vcs = h.vcs_chatterfree_where(|n| n == "CF2_1_4_1").unwrap();
    assert_eq!(vcs.len(), 1);
    let mut spec = ProblemSpec::new(sig.clone());
    spec.query = vec![vcs[0].formula.clone()];
    let from_lha = generate_constraint(&spec, &Selection::Eliminate(h.state_symbols()), &a).unwrap();
    assert!(equiv_on_grid_under(&dnf(&from_lha.formula()), &reference_inst, &symbols, &grid, &a).unwrap());

    // The task-file version of the same query.
    let tf = load("plant_chatter.yaml");
    let (inst_spec, sel) = hpilot(&tf, "example_Damm_1");
    let inst_spec = ProblemSpec {
        query: inst_spec.query.iter().map(|f| f.replace_consts(&values)).collect(),
        ..inst_spec
    };
    let from_task = generate_constraint(&inst_spec, &sel, &[]).unwrap();
    assert!(equiv_on_grid_under(&dnf(&from_task.formula()), &reference_inst, &symbols, &grid, &a).unwrap());

    // Symbolic rates: every reference disjunct entails our constraint and vice
    // versa, under the sign assumptions.
    let (sym_spec, sel) = hpilot(&tf, "example_Damm_1");
    let ours = generate_constraint(&sym_spec, &sel, &[]).unwrap().formula();
    let mut assumed = parse_statements(PLANT_ASSUMPTIONS, &sig).unwrap();
    assumed.extend(parse_statements("dmin <= dmax; da > _0;", &sig).unwrap());
    let disjuncts = |f: &Formula| match f {
        Formula::Or(ds) => ds.clone(),
        other => vec![other.clone()],
    };
    let (pd, od) = (disjuncts(&reference), disjuncts(&ours));
    for (from, to) in [(&pd, &ours), (&od, &reference)] {
        for d in from {
            let mut parts = assumed.clone();
            parts.push(d.clone());
            parts.push(Formula::not(to.clone()));
            assert!(unsat(parts), "`{}` does not entail the other constraint", print_formula(d));
        }
    }
    format!(
        "grid-equivalent on {} points ({} and task file); {} + {} symbolic disjunct entailments",
        grid.len().pow(6),
        from_lha.clause_strings().join(" "),
        pd.len(),
        od.len()
    )
}

// ----- 6. Fourier–Motzkin against a projection oracle ----------------------

fn points(symbols: &[Symbol], grid: &[Rat]) -> Vec<Model> {
    let mut out = vec![Model::new()];
    for s in symbols {
        out = out
            .into_iter()
            .flat_map(|m| {
                grid.iter().map(move |v| {
                    let mut m = m.clone();
                    m.insert(s.clone(), v.clone());
                    m
                })
            })
            .collect();
    }
    out
}

fn fm_oracle() -> String {
    let mut rng = StdRng::seed_from_u64(6);
    let names = syms(&["x1", "x2", "x3", "x4"]);
    let grid = paramver_core::linarith::default_grid();
    let (mut instances, mut checked, mut empty) = (0, 0usize, 0);
    while instances < 500 {
        let nv = rng.gen_range(1..=4);
        let vars = &names[..nv];
        let mut conj = Vec::new();
        for _ in 0..rng.gen_range(1..=8) {
            let mut p = Poly::int(rng.gen_range(-3..=3));
            for v in vars {
                p = p.add(&Poly::var(v.clone()).scale(&rat(rng.gen_range(-3..=3))));
            }
            let rel = *[LinRel::Eq, LinRel::Le, LinRel::Le, LinRel::Lt, LinRel::Lt].choose(&mut rng).unwrap();
            if let Norm::Atom(a) = LinearAtom::build(p, rel) {
                conj.push(a);
            }
        }
        if conj.is_empty() {
            continue;
        }
        instances += 1;
        let mut shuffled = vars.to_vec();
        shuffled.shuffle(&mut rng);
        let k = rng.gen_range(1..=nv);
        let (elim, kept) = shuffled.split_at(k);
        let cfg = EliminationConfig { simplify: instances % 2 == 0, ..Default::default() };
        let res = eliminate(elim, &Dnf(vec![conj.clone()]), &[], &cfg).unwrap();
        assert!(res.symbols().iter().all(|s| kept.contains(s)), "eliminated symbol left in {res}");
        empty += usize::from(res.is_false());
        for m in points(kept, &grid) {
            let mut c = conj.clone();
            c.extend(m.iter().map(|(s, v)| lin(Poly::var(s.clone()).sub(&Poly::constant(v.clone())), LinRel::Eq)));
            let expected = simplex_sat(&c).is_sat();
            assert_eq!(res.eval(&m), Some(expected), "∃{elim:?}. {conj:?} at {m:?}: got {res}");
            checked += 1;
        }
    }
    let x = Poly::var(sym("x"));
    let a = Poly::var(sym("a"));
    let strict = Dnf(vec![vec![lin(a.sub(&x), LinRel::Lt), lin(x.sub(&a), LinRel::Lt)]]);
    let weak = Dnf(vec![vec![lin(a.sub(&x), LinRel::Le), lin(x.sub(&a), LinRel::Le)]]);
    let cfg = EliminationConfig { simplify: false, ..Default::default() };
    assert!(eliminate(&[sym("x")], &strict, &[], &cfg).unwrap().is_false(), "{{a<x, x<a}}");
    assert!(eliminate(&[sym("x")], &weak, &[], &cfg).unwrap().is_true(), "{{a<=x, x<=a}}");
    format!("{instances} instances, {checked} points agree with the simplex projection ({empty} empty); boundary cases ok")
}

// ----- 7. Hierarchical reduction against full instantiation -------------------

const INDEX: [&str; 4] = ["i", "i + _1", "i + _2", "k"];

fn offset(c: i64) -> String {
    match c {
        0 => String::new(),
        c if c > 0 => format!(" + _{c}"),
        c => format!(" - _{}", -c),
    }
}

fn random_definitional(rng: &mut StdRng) -> String {
    let mut s = String::from(
        "Base_functions := {(+,2), (-,2), (*,2)}\n\
         Extension_functions := {(a, 1, 1), (ap, 1, 2)}\n\
         Relations := {(<=,2), (<,2), (>=,2), (>,2)}\n\nClauses :=\n",
    );
    if rng.gen_bool(0.5) {
        s.push_str("    (FORALL x,y). x <= y --> a(x) <= a(y);\n");
    }
    if rng.gen_bool(0.5) {
        let (c1, c2) = (rng.gen_range(-1..=2), rng.gen_range(-1..=2));
        s.push_str(&format!("    (FORALL x). x <= k --> ap(x) = a(x){};\n", offset(c1)));
        s.push_str(&format!("    (FORALL x). k < x --> ap(x) = a(x){};\n", offset(c2)));
    } else {
        s.push_str(&format!("    (FORALL x). ap(x) = a(x){};\n", offset(rng.gen_range(-1..=2))));
    }
    s.push_str("\nQuery :=\n");
    let term = |rng: &mut StdRng| -> String {
        match rng.gen_range(0..6) {
            0 | 1 => format!("a({})", INDEX.choose(rng).unwrap()),
            2 | 3 => format!("ap({})", INDEX.choose(rng).unwrap()),
            4 => ["d1", "d2"].choose(rng).unwrap().to_string(),
            _ => format!("_{}", rng.gen_range(0..3)),
        }
    };
    for _ in 0..rng.gen_range(1..=4) {
        let (l, r) = (term(rng), term(rng));
        let rel = ["<=", "<", ">=", ">", "="].choose(rng).unwrap();
        s.push_str(&format!("    {l} {rel} {r}{};\n", offset(rng.gen_range(-1..=1))));
    }
    s
}

/// Satisfiability by instantiating every axiom at every index term of the
/// universe and adding all congruence instances between them.
fn brute_force_sat(spec: &ProblemSpec, universe: &[Term]) -> bool {
    let sig = &spec.signature;
    let mut ground = Vec::new();
    for f in spec.all_formulas() {
        match f {
            Formula::Forall(vars, body) => {
                let mut tuples: Vec<BTreeMap<Symbol, Term>> = vec![BTreeMap::new()];
                for v in vars {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|m| {
                            universe.iter().map(move |t| {
                                let mut m = m.clone();
                                m.insert(v.clone(), t.clone());
                                m
                            })
                        })
                        .collect();
                }
                ground.extend(tuples.iter().map(|m| body.substitute(m)));
            }
            g => ground.push(g.clone()),
        }
    }
    let name = |f: &str, arg: &Term| Term::Const(sym(&format!("{f}[{arg}]")));
    fn purify(t: &Term, sig: &Signature, name: &impl Fn(&str, &Term) -> Term) -> Term {
        match t {
            Term::App(f, args) if sig.is_extension(f) => {
                assert_eq!(args.len(), 1);
                name(f, &args[0])
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| purify(a, sig, name)).collect()),
            _ => t.clone(),
        }
    }
    let mut fs: Vec<Formula> =
        ground.iter().map(|g| g.map_atoms(&|a| a.map_terms(|t| purify(t, sig, &name)))).collect();
    for f in ["a", "ap"] {
        for (i, s) in universe.iter().enumerate() {
            for t in &universe[i + 1..] {
                fs.push(Formula::or(vec![
                    Formula::not(Formula::atom(s.clone(), Rel::Eq, t.clone())),
                    Formula::atom(name(f, s), Rel::Eq, name(f, t)),
                ]));
            }
        }
    }
    ground_model(&Formula::and(fs)).unwrap().is_some()
}

fn reduction_oracle() -> String {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..120 {
        let text = random_definitional(&mut rng);
        let spec = parse_spec(&text).unwrap();
        let universe = parse_terms(&INDEX.join("; "), &spec.signature).unwrap();
        let reduced = ground_model(&reduce_chain(&spec).unwrap().formula()).unwrap().is_some();
        let brute = brute_force_sat(&spec, &universe);
        assert_eq!(reduced, brute, "disagreement on\n{text}");
        if brute {
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    format!("120 definitional instances agree with full instantiation ({sat} SAT, {unsat} UNSAT)")
}

// ----- 8. Weakestness --------------------------------------------------------

fn weakestness() -> String {
    let tf = load("example1.yaml");
    let (spec, sel) = hpilot(&tf, "example constraint generation");
    let res: ConstraintResult = generate_constraint(&spec, &sel, &[]).unwrap();
    assert!(res.weakest, "example 1 is definitional");
    let candidates = ["(FORALL j). a(j) <= a(j + _1)", "(FORALL j). a(j) = a(j + _1)", "FALSE"];
    for g in candidates {
        let f = parse_formula(g, &spec.signature).unwrap();
        assert!(check_unsat_with_constraint(&spec, &[f.clone()]).unwrap(), "`{g}` does not make the problem UNSAT");
        for c in 0..res.clauses.len() {
            let mut s = ProblemSpec::new(spec.signature.clone());
            s.clauses = vec![f.clone()];
            s.query = vec![negated_instance(&res, c, "_w")];
            assert!(is_unsat(&s).unwrap(), "`{g}` does not entail clause {c}");
        }
    }
    // The check is not vacuous: a candidate that is too weak fails.
    let weak = parse_formula("d1 <= d2 + _1", &spec.signature).unwrap();
    assert!(!check_unsat_with_constraint(&spec, &[weak]).unwrap());
    format!("{} candidates make example 1 UNSAT and entail Γ", candidates.len())
}

// ----- 9. Closure laws --------------------------------------------------------

const CONSTS: [&str; 4] = ["c0", "c1", "c2", "c3"];

fn closure_signature() -> Signature {
    parse_spec(
        "Base_functions := {(+,2), (-,2), (*,2)}\n\
         Extension_functions := {(f, 1, 1), (g, 2, 1), (h, 1, 2)}\n\
         Relations := {(<=,2), (<,2), (>=,2), (>,2)}",
    )
    .unwrap()
    .signature
}

fn random_term(rng: &mut StdRng, depth: u32, ext_head: bool) -> Term {
    let leaf = |rng: &mut StdRng| {
        if rng.gen_bool(0.8) {
            Term::cnst(CONSTS.choose(rng).unwrap())
        } else {
            Term::int(rng.gen_range(0..3))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..if ext_head { 3 } else { 5 }) {
        0 => Term::app("f", vec![random_term(rng, depth - 1, false)]),
        1 => Term::app("g", vec![random_term(rng, depth - 1, false), random_term(rng, depth - 1, false)]),
        2 => Term::app("h", vec![random_term(rng, depth - 1, false)]),
        3 => Term::add(random_term(rng, depth - 1, false), random_term(rng, depth - 1, false)),
        _ => leaf(rng),
    }
}

/// Up to `max - 1` extension-headed terms.
fn random_terms(rng: &mut StdRng, max: usize) -> GroundTermSet {
    let n = rng.gen_range(0..max);
    (0..n)
        .map(|_| {
            let depth = rng.gen_range(1..=3);
            random_term(rng, depth, true)
        })
        .collect()
}

fn random_axioms(rng: &mut StdRng, sig: &Signature) -> Vec<Clause> {
    let mut k = parse_statements("(FORALL x). h(x) = f(x) + _1; (FORALL x,y). x <= y --> f(x) <= f(y);", sig).unwrap();
    for _ in 0..rng.gen_range(0..3) {
        let (l, r) = (random_term(rng, 2, true), random_term(rng, 2, false));
        k.push(Formula::atom(l, Rel::Le, r));
    }
    k.iter().flat_map(|f| f.to_clauses().unwrap()).collect()
}

fn canonical(ts: &GroundTermSet) -> GroundTermSet {
    ts.iter().map(canonical_term).collect()
}

fn closure_laws() -> String {
    let sig = closure_signature();
    let mut rng = StdRng::seed_from_u64(9);
    let mut permutations = 0;
    for n in 0..1000 {
        let k = random_axioms(&mut rng, &sig);
        let t = random_terms(&mut rng, 6);
        let psi = |t: &GroundTermSet| closure_identity(t, &k, &sig);
        let pt = psi(&t);
        // (1) est(K, T) ⊆ Ψ(T)
        let goal: Vec<Formula> = t.iter().map(|s| Formula::atom(s.clone(), Rel::Le, s.clone())).collect();
        assert!(est(&k, &goal, &sig).is_subset(&pt), "law 1");
        // (2) monotonicity
        let mut bigger = t.clone();
        bigger.extend(random_terms(&mut rng, 4));
        assert!(pt.is_subset(&psi(&bigger)), "law 2");
        // (3) Ψ(Ψ(T)) ⊆ Ψ(T)
        assert!(psi(&pt).is_subset(&pt), "law 3");
        // (4) invariance under constant renaming
        let image: Vec<&str> = if n % 2 == 0 {
            permutations += 1;
            let mut p = CONSTS.to_vec();
            p.shuffle(&mut rng);
            p
        } else {
            (0..CONSTS.len()).map(|_| *CONSTS.choose(&mut rng).unwrap()).collect()
        };
        let hmap: BTreeMap<Symbol, Symbol> = CONSTS.iter().zip(&image).map(|(c, d)| (sym(c), sym(d))).collect();
        let h_terms = |ts: &GroundTermSet| -> GroundTermSet { ts.iter().map(|s| s.rename(&hmap)).collect() };
        let hk: Vec<Clause> = k.iter().map(|c| c.map_terms(|s| s.rename(&hmap))).collect();
        let lhs = canonical(&h_terms(&pt));
        let rhs = canonical(&closure_identity(&h_terms(&t), &hk, &sig));
        assert_eq!(lhs, rhs, "law 4 under {hmap:?}");
    }
    format!("laws (1)-(4) hold on 1000 random term sets ({permutations} permutations, {} arbitrary maps)", 1000 - permutations)
}

// ----- 10. Deterministic reports ---------------------------------------------

fn deterministic_reports() -> String {
    let mut files: Vec<PathBuf> = std::fs::read_dir(tasks_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "yaml"))
        .collect();
    files.sort();
    assert!(!files.is_empty());
    for p in &files {
        let run = |parallel: bool| {
            let o = run_path(p, &RunOptions { parallel, ..Default::default() });
            assert_eq!(o.exit_code, 0, "{}: {:?}", p.display(), o.diagnostics);
            mask_volatile(&o.report)
        };
        let first = run(false);
        assert_eq!(first, run(false), "{}: reports differ between runs", p.display());
        assert_eq!(first, run(true), "{}: parallel report differs", p.display());
    }
    format!("{} task files give byte-identical masked reports (sequential, repeated, parallel)", files.len())
}

// ----- driver -------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> String); 10] = [
        ("example 1 constraint", example1),
        ("example 2 invariant strengthening", example2),
        ("chemical plant, mode 1", plant_mode1),
        ("chemical plant, strengthening and variant invariant", plant_strengthening),
        ("chatter-freedom of edge 1 -> 4", chatter),
        ("Fourier-Motzkin vs. projection oracle", fm_oracle),
        ("hierarchical reduction vs. full instantiation", reduction_oracle),
        ("weakest constraint for example 1", weakestness),
        ("closure laws", closure_laws),
        ("deterministic reports", deterministic_reports),
    ];
    std::panic::set_hook(Box::new(|info| {
        if let Some(l) = info.location() {
            eprintln!("panicked at {}:{}", l.file(), l.line());
        }
    }));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {:>2} {name} ({secs:.2} s): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
