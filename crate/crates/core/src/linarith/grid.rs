//! Grid-equivalence oracle: compares two quantifier-free formulas on every
//! point of a finite rational grid plus vertices found by `is_sat`.

use std::collections::BTreeSet;

use super::atom::{Dnf, LinRel, LinearAtom};
use super::poly::{rat, Rat};
use super::sat::{is_sat, Model};
use crate::error::{Error, Result};
use crate::logic::Symbol;
use crate::par;

/// Largest grid that will be enumerated.
pub const MAX_GRID_POINTS: u128 = 100_000;

/// `{-2, -1, -1/2, 0, 1/2, 1, 2}`.
pub fn default_grid() -> Vec<Rat> {
    vec![rat(-2), rat(-1), Rat::new((-1).into(), 2.into()), rat(0), Rat::new(1.into(), 2.into()), rat(1), rat(2)]
}

/// Extra points: witnesses of every atom, and every pair of atoms, of both
/// formulas turned into equations (vertices of the arrangement).
fn vertex_points(phi: &Dnf, psi: &Dnf, symbols: &[Symbol]) -> Vec<Model> {
    let atoms: Vec<LinearAtom> = phi
        .atoms()
        .into_iter()
        .chain(psi.atoms())
        .map(|a| LinearAtom { poly: a.poly, rel: LinRel::Eq })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = Vec::new();
    let mut push = |c: &[LinearAtom]| {
        if let Some(m) = is_sat(c).model() {
            out.push(symbols.iter().map(|s| (s.clone(), m.get(s).cloned().unwrap_or_else(|| rat(0)))).collect());
        }
    };
    for (i, a) in atoms.iter().enumerate() {
        push(std::slice::from_ref(a));
        for b in &atoms[i + 1..] {
            push(&[a.clone(), b.clone()]);
        }
    }
    out
}

fn point(symbols: &[Symbol], grid: &[Rat], mut idx: u128) -> Model {
    let n = grid.len() as u128;
    let mut m = Model::new();
    for s in symbols {
        m.insert(s.clone(), grid[(idx % n) as usize].clone());
        idx /= n;
    }
    m
}

/// A point where the formulas disagree (restricted to points satisfying
/// `assumptions`), or `None` if they agree everywhere checked.
pub fn grid_counterexample(
    phi: &Dnf,
    psi: &Dnf,
    symbols: &[Symbol],
    grid: &[Rat],
    assumptions: &[LinearAtom],
) -> Result<Option<Model>> {
    let total = (grid.len() as u128).checked_pow(symbols.len() as u32).unwrap_or(u128::MAX);
    if total > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge(total));
    }
    let differs = |m: &Model| -> bool {
        if !assumptions.iter().all(|a| a.eval(m) == Some(true)) {
            return false;
        }
        phi.eval(m) != psi.eval(m)
    };
    const CHUNK: u128 = 4096;
    let chunks: Vec<u128> = (0..total.div_ceil(CHUNK)).collect();
    let found = par::map(true, &chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(total);
        (lo..hi).map(|i| point(symbols, grid, i)).find(|m| differs(m))
    });
    if let Some(m) = found.into_iter().flatten().next() {
        return Ok(Some(m));
    }
    Ok(vertex_points(phi, psi, symbols).into_iter().find(|m| differs(m)))
}

/// `true` iff the formulas agree on every grid and vertex point.
pub fn equiv_on_grid(phi: &Dnf, psi: &Dnf, symbols: &[Symbol], grid: &[Rat]) -> Result<bool> {
    Ok(grid_counterexample(phi, psi, symbols, grid, &[])?.is_none())
}

/// As [`equiv_on_grid`], only counting points that satisfy the assumptions.
pub fn equiv_on_grid_under(
    phi: &Dnf,
    psi: &Dnf,
    symbols: &[Symbol],
    grid: &[Rat],
    assumptions: &[LinearAtom],
) -> Result<bool> {
    Ok(grid_counterexample(phi, psi, symbols, grid, assumptions)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linarith::fm::{eliminate, EliminationConfig};
    use crate::linarith::poly::Poly;
    use crate::logic::sym;

    fn v(s: &str) -> Poly {
        Poly::var(sym(s))
    }

    #[test]
    fn negation_of_strict_bound() {
        let le = Dnf::conjunct(vec![LinearAtom::new(v("x").sub(&Poly::int(1)), LinRel::Le)]);
        let gt = LinearAtom::new(Poly::int(1).sub(&v("x")), LinRel::Lt);
        let not_gt = Dnf(gt.negate().into_iter().map(|a| vec![a]).collect());
        assert!(equiv_on_grid(&le, &not_gt, &[sym("x")], &default_grid()).unwrap());
    }

    #[test]
    fn different_orders_are_told_apart() {
        let ab = Dnf::conjunct(vec![LinearAtom::new(v("a").sub(&v("b")), LinRel::Le)]);
        let ba = Dnf::conjunct(vec![LinearAtom::new(v("b").sub(&v("a")), LinRel::Le)]);
        let syms = [sym("a"), sym("b")];
        assert!(!equiv_on_grid(&ab, &ba, &syms, &default_grid()).unwrap());
    }

    #[test]
    fn elimination_matches_bound() {
        let c = vec![
            LinearAtom::new(v("a").sub(&v("x")), LinRel::Le),
            LinearAtom::new(v("x").sub(&v("b")), LinRel::Le),
        ];
        let e = eliminate(&[sym("x")], &Dnf(vec![c]), &[], &EliminationConfig::default()).unwrap();
        let ab = Dnf::conjunct(vec![LinearAtom::new(v("a").sub(&v("b")), LinRel::Le)]);
        assert!(equiv_on_grid(&e, &ab, &[sym("a"), sym("b")], &default_grid()).unwrap());
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let syms: Vec<Symbol> = (0..7).map(|i| sym(&format!("p{i}"))).collect();
        assert!(matches!(
            equiv_on_grid(&Dnf::verum(), &Dnf::verum(), &syms, &default_grid()),
            Err(Error::GridTooLarge(823543))
        ));
    }
}
