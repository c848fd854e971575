//! Exact linear arithmetic: normalized atoms, Fourier–Motzkin elimination
//! with parametric sign splits, ground satisfiability, simplification under
//! assumptions, and a grid-equivalence oracle.

mod atom;
pub mod fm;
pub mod grid;
mod poly;
mod print;
pub mod sat;
pub mod simplex;
pub mod show;
pub mod simplify;

use std::collections::BTreeSet;

pub use atom::{atom_to_linear, canonical_conj, poly_to_term, term_to_poly, Conj, Dnf, LinRel, LinearAtom, Norm};
pub use fm::{eliminate, prune_bounds, EliminationConfig, DEFAULT_MAX_CASES};
pub use grid::{default_grid, equiv_on_grid, equiv_on_grid_under, grid_counterexample};
pub use poly::{rat, Monomial, Poly, Rat};
pub use print::{poly_to_string, term_key};
pub use simplex::simplex_sat;
pub use sat::{entails, entails_conj, first_model, is_sat, solve_parts, Model, SatResult, SearchMode};
pub use show::{clause_to_string, cnf_to_string};
pub use simplify::{remove_redundant, simplify, simplify_clause, simplify_conj};

use crate::error::{Error, Result};
use crate::logic::{Formula, Symbol};

/// Bound on the number of conjuncts produced when distributing a formula
/// into DNF.
pub const MAX_DNF_CONJUNCTS: usize = 100_000;

fn dnf_of(f: &Formula) -> Result<Dnf> {
    Ok(match f {
        Formula::True => Dnf::verum(),
        Formula::False => Dnf::falsum(),
        Formula::Atom(a) => match atom_to_linear(a) {
            Norm::True => Dnf::verum(),
            Norm::False => Dnf::falsum(),
            Norm::Atom(l) => Dnf::conjunct(vec![l]),
        },
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(a) => match atom_to_linear(a) {
                Norm::True => Dnf::falsum(),
                Norm::False => Dnf::verum(),
                Norm::Atom(l) => Dnf(l.negate().into_iter().map(|n| vec![n]).collect()),
            },
            other => dnf_of(&Formula::Not(Box::new(other.clone())).nnf())?,
        },
        Formula::And(fs) => {
            let mut acc = Dnf::verum();
            for g in fs {
                let d = dnf_of(g)?;
                let mut next = Vec::new();
                for a in &acc.0 {
                    for b in &d.0 {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        if let Some(c) = prune_bounds(c) {
                            next.push(c);
                        }
                    }
                }
                if next.len() > MAX_DNF_CONJUNCTS {
                    return Err(Error::CaseExplosion(MAX_DNF_CONJUNCTS));
                }
                acc = Dnf(next).dedup();
            }
            acc
        }
        Formula::Or(fs) => {
            let mut acc = Dnf::falsum();
            for g in fs {
                acc = acc.or(dnf_of(g)?);
            }
            acc
        }
        Formula::Implies(..) => dnf_of(&f.nnf())?,
        Formula::Forall(..) | Formula::Exists(..) => {
            return Err(Error::Unsupported(format!("quantifier in ground formula `{f}`")))
        }
    })
}

/// Ground formula to DNF of normalized atoms. Symbols in `eliminable` must
/// occur linearly (never multiplied with each other or themselves).
pub fn to_linear(phi: &Formula, eliminable: &BTreeSet<Symbol>) -> Result<Dnf> {
    let d = dnf_of(&phi.nnf())?;
    for c in &d.0 {
        fm::check_linear(c, eliminable)?;
    }
    Ok(d)
}

/// Top-level conjuncts of a ground formula, each as its own DNF (keeps
/// clause structure instead of distributing the whole conjunction).
pub fn to_parts(phi: &Formula) -> Result<Vec<Dnf>> {
    match phi.nnf() {
        Formula::And(fs) => fs.iter().map(dnf_of).collect(),
        other => Ok(vec![dnf_of(&other)?]),
    }
}

/// Satisfiability of a ground formula: a model, or `None` if unsatisfiable.
/// Products of constants are treated as opaque atoms (sound for UNSAT
/// answers on linear inputs, which is what the reductions produce).
pub fn ground_model(phi: &Formula) -> Result<Option<Model>> {
    Ok(first_model(&to_parts(phi)?))
}

/// Outcome of [`decide_exact`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Satisfiable, with a witness when one was computed.
    Sat(Option<Model>),
    Unsat,
}

/// Exact satisfiability of a ground formula. Linear formulas are decided
/// directly. When symbols are multiplied with each other, the opaque-product
/// check only settles UNSAT; otherwise every symbol is eliminated in turn
/// (those in `first` first) with case splits on the signs of parametric
/// coefficients, which decides the formula but yields no witness.
/// Errors with `NONLINEAR` when a symbol must be eliminated from a product
/// with itself.
pub fn decide_exact(phi: &Formula, first: &[Symbol], max_cases: usize) -> Result<Decision> {
    let parts = to_parts(phi)?;
    let Some(m) = first_model(&parts) else { return Ok(Decision::Unsat) };
    let nonlinear = parts.iter().flat_map(|d| d.0.iter()).flatten().any(|a| a.poly.max_degree() > 1);
    if !nonlinear {
        return Ok(Decision::Sat(Some(m)));
    }
    let mut d = to_linear(phi, &BTreeSet::new())?;
    let cfg = EliminationConfig { max_cases, simplify: false, parallel: false };
    let symbols = |d: &Dnf| -> BTreeSet<Symbol> { d.0.iter().flatten().flat_map(|a| a.symbols()).collect() };
    let mut order: Vec<Symbol> = first.to_vec();
    order.extend(symbols(&d).into_iter().filter(|s| !first.contains(s)));
    for v in &order {
        if symbols(&d).contains(v) {
            d = eliminate(std::slice::from_ref(v), &d, &[], &cfg)?;
        }
    }
    // Leftover symbols only come from products introduced while combining
    // bounds; eliminate them as well.
    while let Some(v) = symbols(&d).into_iter().next() {
        d = eliminate(&[v], &d, &[], &cfg)?;
    }
    let empty = Model::new();
    let sat = d.0.iter().any(|c| c.iter().all(|a| a.eval(&empty) == Some(true)));
    Ok(if sat { Decision::Sat(None) } else { Decision::Unsat })
}
