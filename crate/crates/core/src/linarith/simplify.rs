//! Assumption-based simplification: the internal stand-in for an external
//! simplifier. Every step is an entailment check decided by `is_sat`.

use super::atom::{canonical_conj, Conj, Dnf, LinearAtom};
use super::sat::{entails, entails_conj, is_sat};

/// Conjunct-count bound above which subsumption between conjuncts is only
/// checked syntactically.
const SEMANTIC_SUBSUMPTION_LIMIT: usize = 64;

/// Drop atoms implied by the assumptions together with the other atoms that
/// are kept (greedy, in canonical order).
pub fn remove_redundant(conj: &[LinearAtom], assumptions: &[LinearAtom]) -> Conj {
    let mut kept: Vec<LinearAtom> = conj.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let a = kept[i].clone();
        let mut premises: Vec<LinearAtom> = assumptions.to_vec();
        premises.extend(kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()));
        if entails(&premises, &a) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    canonical_conj(kept)
}

/// Simplify one conjunct under assumptions; `None` if it contradicts them.
pub fn simplify_conj(conj: &[LinearAtom], assumptions: &[LinearAtom]) -> Option<Conj> {
    let mut all = assumptions.to_vec();
    all.extend(conj.iter().cloned());
    if !is_sat(&all).is_sat() {
        return None;
    }
    Some(remove_redundant(conj, assumptions))
}

/// Equivalent DNF under the assumptions: drops contradictory conjuncts,
/// redundant atoms, and conjuncts subsumed by weaker ones.
pub fn simplify(phi: &Dnf, assumptions: &[LinearAtom]) -> Dnf {
    let mut cs: Vec<Conj> = phi.0.iter().filter_map(|c| simplify_conj(c, assumptions)).collect();
    if cs.iter().any(|c| c.is_empty()) {
        return Dnf::verum();
    }
    cs = Dnf(cs).dedup().0;
    let semantic = cs.len() <= SEMANTIC_SUBSUMPTION_LIMIT;
    let mut keep = vec![true; cs.len()];
    for i in 0..cs.len() {
        for j in 0..cs.len() {
            if i == j || !keep[j] || !keep[i] {
                continue;
            }
            // C_i ⊨ C_j: C_i is redundant next to the weaker C_j.
            let syntactic = cs[j].iter().all(|a| cs[i].contains(a));
            let implied = syntactic || (semantic && {
                let mut prem = assumptions.to_vec();
                prem.extend(cs[i].iter().cloned());
                entails_conj(&prem, &cs[j])
            });
            if implied {
                keep[i] = false;
            }
        }
    }
    Dnf(cs.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect())
}

/// Simplified disjunction of atoms under assumptions: `None` when the clause
/// is valid under them; an empty clause is false.
pub fn simplify_clause(clause: &[LinearAtom], assumptions: &[LinearAtom]) -> Option<Vec<LinearAtom>> {
    let mut negated: Vec<LinearAtom> = assumptions.to_vec();
    for a in clause {
        if a.negate().len() != 1 {
            // ¬(p = 0) is disjunctive; fall back to per-atom validity.
            if entails(assumptions, a) {
                return None;
            }
            continue;
        }
        negated.extend(a.negate());
    }
    if clause.iter().all(|a| a.negate().len() == 1) && !is_sat(&negated).is_sat() {
        return None;
    }
    // Atoms false under the assumptions disappear.
    let mut atoms: Vec<LinearAtom> = clause
        .iter()
        .filter(|a| {
            let mut c = assumptions.to_vec();
            c.push((*a).clone());
            is_sat(&c).is_sat()
        })
        .cloned()
        .collect();
    atoms.sort();
    atoms.dedup();
    // An atom implying another (under the assumptions) is subsumed.
    let mut i = 0;
    while i < atoms.len() {
        let mut prem = assumptions.to_vec();
        prem.push(atoms[i].clone());
        let subsumed = atoms.iter().enumerate().any(|(j, b)| j != i && entails(&prem, b));
        if subsumed {
            atoms.remove(i);
        } else {
            i += 1;
        }
    }
    Some(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linarith::atom::LinRel;
    use crate::linarith::poly::Poly;
    use crate::logic::sym;

    fn v(s: &str) -> Poly {
        Poly::var(sym(s))
    }

    #[test]
    fn contradictory_conjuncts_vanish() {
        let min_neg = LinearAtom::new(v("min"), LinRel::Lt);
        let ea_nonpos = LinearAtom::new(v("ea"), LinRel::Le);
        let a = vec![LinearAtom::new(v("min").neg(), LinRel::Le), LinearAtom::new(v("ea").neg(), LinRel::Lt)];
        let d = simplify(&Dnf(vec![vec![min_neg], vec![ea_nonpos]]), &a);
        assert!(d.is_false());
    }

    #[test]
    fn plant_clause_reduces_to_lf_le_lsafe() {
        let clause = vec![
            LinearAtom::new(v("min"), LinRel::Lt),
            LinearAtom::new(v("lsafe"), LinRel::Lt),
            LinearAtom::new(v("lf").sub(&v("lsafe")), LinRel::Le),
            LinearAtom::new(v("ea"), LinRel::Le),
        ];
        let a = vec![
            LinearAtom::new(v("min").neg(), LinRel::Le),
            LinearAtom::new(v("lsafe").neg(), LinRel::Le),
            LinearAtom::new(v("ea").neg(), LinRel::Lt),
        ];
        let out = simplify_clause(&clause, &a).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "lf - lsafe <= _0");
    }

    #[test]
    fn subsumed_conjunct_dropped() {
        let x_pos = LinearAtom::new(v("x").neg(), LinRel::Lt);
        let y_pos = LinearAtom::new(v("y").neg(), LinRel::Lt);
        let d = simplify(&Dnf(vec![vec![x_pos.clone(), y_pos], vec![x_pos.clone()]]), &[]);
        assert_eq!(d, Dnf(vec![vec![x_pos]]));
    }
}
