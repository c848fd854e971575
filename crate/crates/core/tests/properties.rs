//! Randomised properties of the logic layer, the linear-arithmetic
//! procedures and the hierarchical reduction.

use std::collections::{BTreeMap, BTreeSet};

use paramver_core::frontend::{parse_formula, print_formula};
use paramver_core::hier::{congruence, Def, Namer};
use paramver_core::linarith::{
    default_grid, eliminate, equiv_on_grid_under, is_sat, simplex_sat, simplify, to_linear, Conj, Dnf, EliminationConfig,
    LinRel, LinearAtom, Model, Norm, Poly, Rat,
};
use paramver_core::logic::{negate_universal, sym, Formula, Rel, Signature, Symbol, Term};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn rational() -> impl Strategy<Value = Rat> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

/// Ground arithmetic terms over `a, b, c`.
fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(Term::cnst),
        rational().prop_map(Term::Num),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::add(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::sub(x, y)),
            (rational(), inner).prop_map(|(k, x)| Term::mul(Term::Num(k), x)),
        ]
    })
}

fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(vec![Rel::Eq, Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt])
}

fn formula() -> impl Strategy<Value = Formula> {
    let atom = (term(), rel(), term()).prop_map(|(l, r, t)| Formula::atom(l, r, t));
    atom.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            inner.prop_map(|f| Formula::Not(Box::new(f))),
        ]
    })
}

fn point(values: &[Rat], names: &[&str]) -> Model {
    names.iter().zip(values).map(|(n, v)| (sym(n), v.clone())).collect()
}

fn eval(f: &Formula, m: &Model) -> bool {
    to_linear(f, &BTreeSet::new()).unwrap().eval(m).expect("all symbols assigned")
}

/// Linear atom `k0 + Σ ki·vi ⋈ 0` over the given variables.
fn linear_atom(vars: &'static [&'static str]) -> impl Strategy<Value = LinearAtom> {
    (
        prop::collection::vec(-3i64..=3, vars.len()),
        -4i64..=4,
        prop::sample::select(vec![LinRel::Eq, LinRel::Le, LinRel::Lt]),
    )
        .prop_filter_map("constant atom", move |(ks, k0, rel)| {
            let mut p = Poly::int(k0);
            for (k, v) in ks.iter().zip(vars) {
                p = p.add(&Poly::var(sym(v)).scale(&q(*k, 1)));
            }
            match LinearAtom::build(p, rel) {
                Norm::Atom(a) => Some(a),
                _ => None,
            }
        })
}

const XYZ: &[&str] = &["x", "y", "z"];

fn small_grid() -> Vec<Rat> {
    [-2, -1, 0, 1, 2].iter().map(|&n| q(n, 1)).chain([q(1, 2), q(-1, 2)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printing_then_parsing_is_semantically_identity(f in formula(), values in prop::collection::vec(rational(), 3)) {
        let sig = Signature::arithmetic();
        let text = print_formula(&f);
        let back = parse_formula(&text, &sig).unwrap_or_else(|e| panic!("`{text}`: {e}"));
        prop_assert_eq!(print_formula(&back), text);
        let m = point(&values, &["a", "b", "c"]);
        prop_assert_eq!(eval(&f, &m), eval(&back, &m));
    }

    #[test]
    fn numerals_round_trip(v in rational()) {
        let sig = Signature::arithmetic();
        let f = Formula::atom(Term::cnst("a"), Rel::Eq, Term::Num(v.clone()));
        let back = parse_formula(&print_formula(&f), &sig).unwrap();
        let m: Model = [(sym("a"), v)].into_iter().collect();
        prop_assert!(eval(&back, &m));
    }

    #[test]
    fn substitution_composes(f in formula(), s in term(), t in term()) {
        // Put variables x, y in place of the constants a, b.
        let vars: BTreeMap<Symbol, Term> = [(sym("a"), Term::var("x")), (sym("b"), Term::var("y"))].into_iter().collect();
        let f = f.replace_consts(&vars);
        let sigma: BTreeMap<Symbol, Term> = [(sym("x"), s.replace_consts(&[(sym("a"), Term::var("y"))].into_iter().collect()))].into_iter().collect();
        let tau: BTreeMap<Symbol, Term> = [(sym("y"), t.clone())].into_iter().collect();
        let composed: BTreeMap<Symbol, Term> =
            [(sym("x"), sigma[&sym("x")].substitute(&tau)), (sym("y"), t)].into_iter().collect();
        prop_assert_eq!(f.substitute(&sigma).substitute(&tau), f.substitute(&composed));
    }

    #[test]
    fn identity_renaming_is_identity(f in formula()) {
        let id: BTreeMap<Symbol, Symbol> = f.consts().into_iter().map(|c| (c.clone(), c)).collect();
        prop_assert_eq!(f.rename(&id), f.clone());
        prop_assert_eq!(f.rename(&BTreeMap::new()), f);
    }

    #[test]
    fn negated_universals_are_ground_and_flip_truth(body in formula(), values in prop::collection::vec(rational(), 3)) {
        let body = body.replace_consts(&[(sym("a"), Term::var("x"))].into_iter().collect());
        let phi = Formula::Forall(vec![sym("x")], Box::new(body.clone()));
        let neg = negate_universal(&phi, &phi.consts()).unwrap();
        prop_assert!(neg.is_ground() && !neg.has_quantifier());
        let sk = neg.consts().into_iter().find(|c| c.starts_with("sk_")).unwrap_or_else(|| sym("sk_x"));
        prop_assert!(!phi.consts().contains(&sk));
        let m = point(&values[1..], &["b", "c"]);
        for v in default_grid().into_iter().take(9) {
            let inst = neg.replace_consts(&[(sk.clone(), Term::Num(v.clone()))].into_iter().collect());
            let body_v = body.substitute(&[(sym("x"), Term::Num(v))].into_iter().collect());
            prop_assert_eq!(eval(&inst, &m), !eval(&body_v, &m));
        }
    }

    #[test]
    fn is_sat_agrees_with_simplex_and_grid(conj in prop::collection::vec(linear_atom(XYZ), 1..7)) {
        let fm = is_sat(&conj);
        let lp = simplex_sat(&conj);
        prop_assert_eq!(fm.is_sat(), lp.is_sat());
        if let paramver_core::linarith::SatResult::Sat(m) = &fm {
            let mut m = m.clone();
            for v in XYZ {
                m.entry(sym(v)).or_insert_with(|| q(0, 1));
            }
            prop_assert!(conj.iter().all(|a| a.eval(&m) == Some(true)), "witness {:?}", m);
        }
        let grid = small_grid();
        let mut witness = false;
        for x in &grid {
            for y in &grid {
                for z in &grid {
                    let m = point(&[x.clone(), y.clone(), z.clone()], XYZ);
                    witness |= conj.iter().all(|a| a.eval(&m) == Some(true));
                }
            }
        }
        if witness {
            prop_assert!(fm.is_sat());
        }
    }

    #[test]
    fn parametric_elimination_matches_sign_instances(
        rows in prop::collection::vec((-2i64..=2, -2i64..=2, -2i64..=2, -3i64..=3, prop::sample::select(vec![LinRel::Le, LinRel::Lt, LinRel::Eq])), 1..5),
    ) {
        // Atoms a·x + b·p·x + c·y + d ⋈ 0; eliminate x, keep the parameter p.
        let (x, p, y) = (Poly::var(sym("x")), Poly::var(sym("p")), Poly::var(sym("y")));
        let conj: Conj = rows.iter().filter_map(|(a, b, c, d, rel)| {
            let poly = x.scale(&q(*a, 1)).add(&p.mul(&x).scale(&q(*b, 1))).add(&y.scale(&q(*c, 1))).add(&Poly::int(*d));
            match LinearAtom::build(poly, *rel) {
                Norm::Atom(a) => Some(a),
                _ => None,
            }
        }).collect();
        prop_assume!(!conj.is_empty());
        let projected = match eliminate(&[sym("x")], &Dnf(vec![conj.clone()]), &[], &EliminationConfig::default()) {
            Ok(d) => d,
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        for pv in [-1, 0, 1] {
            for yv in small_grid() {
                let values: Model = [(sym("p"), q(pv, 1)), (sym("y"), yv.clone())].into_iter().collect();
                let mut inst = Vec::new();
                let mut contradiction = false;
                for a in &conj {
                    let poly = a.poly.substitute_all(&|s: &Symbol| values.get(s).cloned().map(Poly::constant));
                    match LinearAtom::build(poly, a.rel) {
                        Norm::True => {}
                        Norm::False => contradiction = true,
                        Norm::Atom(b) => inst.push(b),
                    }
                }
                let exists = !contradiction && simplex_sat(&inst).is_sat();
                prop_assert_eq!(projected.eval(&values), Some(exists), "p = {}, y = {}", pv, yv);
            }
        }
    }

    #[test]
    fn simplification_preserves_meaning_under_assumptions(
        disjuncts in prop::collection::vec(prop::collection::vec(linear_atom(XYZ), 1..4), 1..4),
        assumptions in prop::collection::vec(linear_atom(XYZ), 0..3),
    ) {
        let phi = Dnf(disjuncts);
        let simple = simplify(&phi, &assumptions);
        let symbols: Vec<Symbol> = XYZ.iter().map(|s| sym(s)).collect();
        prop_assert!(equiv_on_grid_under(&phi, &simple, &symbols, &small_grid(), &assumptions).unwrap());
    }

    #[test]
    fn congruence_covers_every_same_head_pair(heads in prop::collection::vec((0usize..3, -2i64..=2, -2i64..=2), 0..8)) {
        let names = ["f", "g", "h"];
        let defs: Vec<Def> = heads.iter().enumerate().map(|(i, (h, u, v))| Def {
            constant: sym(&format!("c_{}_{}", names[*h], i)),
            function: sym(names[*h]),
            args: vec![Term::int(*u), Term::add(Term::cnst("a"), Term::int(*v))],
        }).collect();
        let con0 = congruence(&defs);
        let mut expected = 0;
        for (i, d) in defs.iter().enumerate() {
            for e in &defs[i + 1..] {
                if d.function != e.function {
                    continue;
                }
                expected += 1;
                let pair = [&d.constant, &e.constant];
                prop_assert!(con0.iter().any(|c| pair.iter().all(|s| c.consts().contains(*s))), "{} / {}", d.constant, e.constant);
            }
        }
        prop_assert_eq!(con0.len(), expected);
    }

    #[test]
    fn fresh_constants_never_collide(taken in prop::collection::btree_set(0usize..6, 0..6), draws in 1usize..10) {
        let taken: BTreeSet<Symbol> = taken.iter().map(|k| sym(&format!("c_f_{k}"))).chain([sym("f"), sym("a")]).collect();
        let mut namer = Namer::new(taken.clone());
        let mut seen = BTreeSet::new();
        for _ in 0..draws {
            let c = namer.fresh("f");
            prop_assert!(!taken.contains(&c));
            prop_assert!(seen.insert(c));
        }
    }
}
