//! Ground satisfiability of conjunctions of linear atoms by full
//! Fourier–Motzkin elimination, with a rational witness recovered by
//! back-substitution.
//!
//! Products of symbols are treated as opaque unknowns, so an UNSAT answer
//! is always sound while a SAT answer is exact only for linear input.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use super::atom::{canonical_conj, Conj, Dnf, LinRel, LinearAtom, Norm};
use super::fm::prune_bounds;
use super::poly::{Poly, Rat};
use super::simplex::simplex_sat;
use crate::logic::Symbol;

pub type Model = BTreeMap<Symbol, Rat>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(self) -> Option<Model> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

/// One recorded elimination, replayed backwards to build a witness.
enum Stage {
    /// `var` was solved from an equation `c*var + r = 0`.
    Pivot { var: Symbol, eq: LinearAtom },
    /// `var` was projected away; these were all atoms mentioning it.
    Bounds { var: Symbol, atoms: Vec<LinearAtom> },
}

/// Atom with the set of input atoms it was derived from (Imbert's
/// acceleration: after k projections an atom derived from more than k+1
/// inputs is redundant).
#[derive(Clone)]
struct Row {
    atom: LinearAtom,
    hist: Vec<u32>,
}

fn merge_hist(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Row count above which projection gives way to the simplex fallback.
const PROJECTION_ROW_BUDGET: usize = 400;

/// Decide a conjunction of atoms (parameters are ordinary unknowns here).
/// Projection is tried first; when it produces more than
/// `max(PROJECTION_ROW_BUDGET, 4·n)` rows the conjunction is decided by the
/// simplex method instead.
pub fn is_sat(conj: &[LinearAtom]) -> SatResult {
    let atoms_in: Vec<LinearAtom> = conj.iter().map(LinearAtom::opaque).collect();
    let Some(atoms) = prune_bounds(atoms_in.clone()) else {
        return SatResult::Unsat;
    };
    let budget = PROJECTION_ROW_BUDGET.max(4 * atoms.len());
    let mut rows: Vec<Row> = atoms.into_iter().enumerate().map(|(i, a)| Row { atom: a, hist: vec![i as u32] }).collect();
    let mut stages: Vec<Stage> = Vec::new();
    let mut projections = 0usize;
    loop {
        if rows.is_empty() {
            break;
        }
        // Occurrence counts in deterministic symbol order.
        let mut occ: BTreeMap<Symbol, usize> = BTreeMap::new();
        for r in &rows {
            for s in r.atom.symbols() {
                *occ.entry(s).or_default() += 1;
            }
        }
        if occ.is_empty() {
            break;
        }
        // Equations first: Gaussian pivot on the rarest symbol of the first
        // equation.
        if let Some(eq_idx) = rows.iter().position(|r| r.atom.rel == LinRel::Eq) {
            let eq = rows[eq_idx].atom.clone();
            let var = eq
                .symbols()
                .into_iter()
                .min_by_key(|s| occ[s])
                .expect("equation mentions a symbol");
            let ce = eq.poly.coefficient_of(&var).as_constant().expect("linear");
            let re = eq.poly.without_symbol(&var);
            let mut next = Vec::with_capacity(rows.len());
            for (i, r) in rows.iter().enumerate() {
                if i == eq_idx {
                    continue;
                }
                let c = r.atom.poly.coefficient_of(&var);
                if c.is_zero() {
                    next.push(r.atom.clone());
                    continue;
                }
                // ce*(c*x + r) = c*(ce*x) + ce*r = ce*r - c*re, scaled by sign(ce)
                let rest = r.atom.poly.without_symbol(&var);
                let p = rest.scale(&ce).sub(&c.mul(&re));
                let p = if ce.is_negative() { p.neg() } else { p };
                match LinearAtom::build(p, r.atom.rel) {
                    Norm::True => {}
                    Norm::False => return SatResult::Unsat,
                    Norm::Atom(a) => next.push(a),
                }
            }
            stages.push(Stage::Pivot { var, eq });
            let Some(next) = prune_bounds(next) else {
                return SatResult::Unsat;
            };
            // The pivoted system is equivalent, so it restarts the history.
            rows = next.into_iter().enumerate().map(|(i, a)| Row { atom: a, hist: vec![i as u32] }).collect();
            projections = 0;
            continue;
        }
        let (var, _) = occ.iter().min_by_key(|(_, n)| **n).map(|(s, n)| (s.clone(), *n)).expect("nonempty");
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut keep = Vec::new();
        let mut involved = Vec::new();
        for r in rows {
            let c = r.atom.poly.coefficient_of(&var);
            if c.is_zero() {
                keep.push(r);
                continue;
            }
            involved.push(r.atom.clone());
            let cv = c.as_constant().expect("linear");
            if cv.is_positive() {
                upper.push((cv, r));
            } else {
                lower.push((cv, r));
            }
        }
        projections += 1;
        for (cl, l) in &lower {
            for (cu, u) in &upper {
                let hist = merge_hist(&l.hist, &u.hist);
                if hist.len() > projections + 1 {
                    continue;
                }
                let rl = l.atom.poly.without_symbol(&var);
                let ru = u.atom.poly.without_symbol(&var);
                let p = ru.scale(&-cl.clone()).add(&rl.scale(cu));
                let rel = if l.atom.rel.is_strict() || u.atom.rel.is_strict() { LinRel::Lt } else { LinRel::Le };
                match LinearAtom::build(p, rel) {
                    Norm::True => {}
                    Norm::False => return SatResult::Unsat,
                    Norm::Atom(a) => keep.push(Row { atom: a, hist }),
                }
            }
        }
        if keep.len() > budget {
            return simplex_sat(&atoms_in);
        }
        stages.push(Stage::Bounds { var, atoms: involved });
        rows = match prune_rows(keep) {
            Some(r) => r,
            None => return SatResult::Unsat,
        };
    }
    let mut model = Model::new();
    for stage in stages.iter().rev() {
        match stage {
            Stage::Pivot { var, eq } => {
                let c = eq.poly.coefficient_of(var).as_constant().expect("linear");
                let r = eq.poly.without_symbol(var).eval(&complete(&model, &eq.poly, var)).expect("assigned");
                model.insert(var.clone(), -r / c);
            }
            Stage::Bounds { var, atoms } => {
                let v = choose_value(var, atoms, &model);
                model.insert(var.clone(), v);
            }
        }
    }
    for a in &atoms_in {
        for s in a.symbols() {
            model.entry(s).or_insert_with(Rat::zero);
        }
    }
    SatResult::Sat(model)
}

/// Symbols of `p` other than `var` that were never constrained default to 0.
fn complete(model: &Model, p: &Poly, var: &Symbol) -> Model {
    let mut m = model.clone();
    for s in p.symbols() {
        if &s != var {
            m.entry(s).or_insert_with(Rat::zero);
        }
    }
    m
}

fn choose_value(var: &Symbol, atoms: &[LinearAtom], model: &Model) -> Rat {
    let mut lo: Option<(Rat, bool)> = None;
    let mut hi: Option<(Rat, bool)> = None;
    for a in atoms {
        let c = a.poly.coefficient_of(var).as_constant().expect("linear");
        let r = a.poly.without_symbol(var).eval(&complete(model, &a.poly, var)).expect("assigned");
        let bound = -r / &c;
        let strict = a.rel.is_strict();
        if c.is_positive() {
            if hi.as_ref().map_or(true, |(b, s)| bound < *b || (bound == *b && strict && !s)) {
                hi = Some((bound, strict));
            }
        } else if lo.as_ref().map_or(true, |(b, s)| bound > *b || (bound == *b && strict && !s)) {
            lo = Some((bound, strict));
        }
    }
    let two = Rat::one() + Rat::one();
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) if l == h => l,
        (Some((l, _)), Some((h, _))) => (l + h) / two,
        (Some((l, s)), None) => {
            if s {
                l + Rat::one()
            } else {
                l
            }
        }
        (None, Some((h, s))) => {
            if s {
                h - Rat::one()
            } else {
                h
            }
        }
        (None, None) => Rat::zero(),
    }
}

fn prune_rows(rows: Vec<Row>) -> Option<Vec<Row>> {
    // Keep the history of the first row that produced each surviving atom.
    let mut hist_of: BTreeMap<LinearAtom, Vec<u32>> = BTreeMap::new();
    for r in &rows {
        hist_of.entry(r.atom.clone()).or_insert_with(|| r.hist.clone());
    }
    let atoms = prune_bounds(rows.into_iter().map(|r| r.atom).collect())?;
    Some(
        atoms
            .into_iter()
            .map(|a| {
                // Tightened or merged atoms (e.g. two bounds fused into an
                // equation) get the union of the candidates' histories.
                let hist = hist_of.get(&a).cloned().unwrap_or_else(|| {
                    hist_of
                        .iter()
                        .filter(|(b, _)| b.poly.non_constant() == a.poly.non_constant() || b.poly.non_constant() == a.poly.non_constant().neg())
                        .fold(Vec::new(), |acc, (_, h)| merge_hist(&acc, h))
                });
                Row { atom: a, hist }
            })
            .collect(),
    )
}

/// `premises ⊨ atom`, decided as UNSAT of premises ∧ ¬atom.
pub fn entails(premises: &[LinearAtom], atom: &LinearAtom) -> bool {
    atom.negate().into_iter().all(|n| {
        let mut c = premises.to_vec();
        c.push(n);
        !is_sat(&c).is_sat()
    })
}

/// `premises ⊨ conj` (every atom entailed).
pub fn entails_conj(premises: &[LinearAtom], conj: &[LinearAtom]) -> bool {
    conj.iter().all(|a| entails(premises, a))
}

/// Search mode for [`solve_parts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    FirstModel,
    AllImplicants,
}

/// Decide (or enumerate the satisfiable implicants of) a conjunction of
/// DNFs by depth-first search over one disjunct per part, pruning each
/// partial branch by a feasibility check. Implicants are returned as pruned
/// conjunctions in search order.
pub fn solve_parts(parts: &[Dnf], mode: SearchMode, limit: usize) -> std::result::Result<Vec<(Conj, Model)>, usize> {
    if parts.iter().any(Dnf::is_false) {
        return Ok(vec![]);
    }
    let mut base: Conj = Vec::new();
    let mut rest: Vec<&Dnf> = Vec::new();
    for p in parts {
        if p.is_true() {
            continue;
        }
        if p.0.len() == 1 {
            base.extend(p.0[0].iter().cloned());
        } else {
            rest.push(p);
        }
    }
    rest.sort_by_key(|p| p.0.len());
    let Some(base) = prune_bounds(base) else {
        return Ok(vec![]);
    };
    let mut out = Vec::new();
    dfs(&base, &rest, mode, limit, &mut out)?;
    Ok(out)
}

fn dfs(
    acc: &Conj,
    rest: &[&Dnf],
    mode: SearchMode,
    limit: usize,
    out: &mut Vec<(Conj, Model)>,
) -> std::result::Result<(), usize> {
    let SatResult::Sat(model) = is_sat(acc) else {
        return Ok(());
    };
    let Some((first, tail)) = rest.split_first() else {
        out.push((canonical_conj(acc.clone()), model));
        if out.len() > limit {
            return Err(out.len());
        }
        return Ok(());
    };
    // A disjunct already true in the current witness is tried first.
    let mut order: Vec<&Conj> = first.0.iter().collect();
    order.sort_by_key(|c| !c.iter().all(|a| a.opaque().eval(&model).unwrap_or(false)));
    for c in order {
        let mut next = acc.clone();
        next.extend(c.iter().cloned());
        let Some(next) = prune_bounds(next) else { continue };
        dfs(&next, tail, mode, limit, out)?;
        if mode == SearchMode::FirstModel && !out.is_empty() {
            return Ok(());
        }
    }
    Ok(())
}

/// First model of a conjunction of DNFs, if any.
pub fn first_model(parts: &[Dnf]) -> Option<Model> {
    solve_parts(parts, SearchMode::FirstModel, usize::MAX).ok()?.into_iter().next().map(|(_, m)| m)
}
