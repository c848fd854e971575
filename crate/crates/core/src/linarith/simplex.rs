//! Exact two-phase simplex (Bland's rule) over the rationals, used as the
//! fallback decision procedure when Fourier–Motzkin projection grows too
//! large. Strict inequalities are handled by maximising a common slack δ:
//! `p < 0` becomes `p + δ <= 0`, and the system is satisfiable iff the
//! non-strict part is feasible and the optimal δ is positive.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use super::atom::{LinRel, LinearAtom};
use super::poly::Rat;
use super::sat::{Model, SatResult};
use crate::logic::Symbol;

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rat>>,
    /// Basic column of each row.
    basis: Vec<usize>,
    /// Reduced-cost row of the current objective (to be maximised); the last
    /// entry is the objective value.
    obj: Vec<Rat>,
    /// Columns allowed to enter the basis.
    allowed: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pr = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, q) in row.iter_mut().zip(&pr) {
                if !q.is_zero() {
                    *v -= &f * q;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, q) in self.obj.iter_mut().zip(&pr) {
                if !q.is_zero() {
                    *v -= &f * q;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Set the objective `max Σ cost_j z_j` in reduced form.
    fn set_objective(&mut self, cost: &BTreeMap<usize, Rat>) {
        let w = self.width();
        let mut obj = vec![Rat::zero(); w + 1];
        for (j, c) in cost {
            obj[*j] = -c.clone();
        }
        for (r, &b) in self.basis.iter().enumerate() {
            if !obj[b].is_zero() {
                let f = obj[b].clone();
                for (v, q) in obj.iter_mut().zip(&self.rows[r]) {
                    if !q.is_zero() {
                        *v -= &f * q;
                    }
                }
            }
        }
        self.obj = obj;
    }

    /// Run to optimality; `false` if unbounded.
    fn optimise(&mut self) -> bool {
        let w = self.width();
        loop {
            let Some(c) = (0..w).find(|&j| self.allowed[j] && self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(Rat, usize, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[w] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((q, _, b)) => ratio < *q || (ratio == *q && self.basis[r] < *b),
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn value(&self, col: usize) -> Rat {
        let w = self.width();
        self.basis.iter().position(|&b| b == col).map_or_else(Rat::zero, |r| self.rows[r][w].clone())
    }
}

/// Decide a conjunction of linear atoms (symbols are free rational
/// unknowns; products must already be opaque).
pub fn simplex_sat(conj: &[LinearAtom]) -> SatResult {
    let symbols: Vec<Symbol> = {
        let mut s = std::collections::BTreeSet::new();
        for a in conj {
            s.extend(a.symbols());
        }
        s.into_iter().collect()
    };
    let index: BTreeMap<&Symbol, usize> = symbols.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = symbols.len();
    let delta = 2 * n;
    let strict = conj.iter().any(|a| a.rel.is_strict());
    // Rows: a·x (+ δ) ≤ b, a·x = b, and δ ≤ 1.
    let mut specs: Vec<(Vec<(usize, Rat)>, LinRel, Rat)> = Vec::new();
    for a in conj {
        let mut coeffs = Vec::new();
        for s in a.poly.symbols() {
            let c = a.poly.coefficient_of(&s).as_constant().expect("linear atom");
            let i = index[&s];
            coeffs.push((2 * i, c.clone()));
            coeffs.push((2 * i + 1, -c));
        }
        if a.rel == LinRel::Lt {
            coeffs.push((delta, Rat::one()));
        }
        specs.push((coeffs, a.rel, -a.poly.constant_term()));
    }
    specs.push((vec![(delta, Rat::one())], LinRel::Le, Rat::one()));
    let slacks = specs.iter().filter(|(_, r, _)| *r != LinRel::Eq).count();
    let first_slack = delta + 1;
    let first_art = first_slack + slacks;
    let mut rows = Vec::new();
    let mut basis = Vec::new();
    let mut arts = Vec::new();
    let mut slack = first_slack;
    for (coeffs, rel, b) in &specs {
        let mut row: Vec<(usize, Rat)> = coeffs.clone();
        let mut b = b.clone();
        let mut own = None;
        if *rel != LinRel::Eq {
            row.push((slack, Rat::one()));
            own = Some(slack);
            slack += 1;
        }
        if b.is_negative() {
            for (_, c) in row.iter_mut() {
                *c = -c.clone();
            }
            b = -b;
            own = None;
        }
        match own {
            Some(s) => basis.push(s),
            None => {
                let a = first_art + arts.len();
                arts.push(a);
                row.push((a, Rat::one()));
                basis.push(a);
            }
        }
        rows.push((row, b));
    }
    let w = first_art + arts.len();
    let dense: Vec<Vec<Rat>> = rows
        .into_iter()
        .map(|(row, b)| {
            let mut v = vec![Rat::zero(); w + 1];
            for (j, c) in row {
                v[j] += c;
            }
            v[w] = b;
            v
        })
        .collect();
    let mut t = Tableau { rows: dense, basis, obj: vec![Rat::zero(); w + 1], allowed: vec![true; w] };
    if !arts.is_empty() {
        t.set_objective(&arts.iter().map(|&a| (a, -Rat::one())).collect());
        t.optimise();
        if t.obj[w].is_negative() {
            return SatResult::Unsat;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= first_art {
                match (0..first_art).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for a in arts {
            t.allowed[a] = false;
        }
    }
    if strict {
        t.set_objective(&[(delta, Rat::one())].into_iter().collect());
        t.optimise();
        if !t.value(delta).is_positive() {
            return SatResult::Unsat;
        }
    }
    let model: Model = symbols.iter().enumerate().map(|(i, s)| (s.clone(), t.value(2 * i) - t.value(2 * i + 1))).collect();
    debug_assert!(conj.iter().all(|a| a.eval(&model) == Some(true)));
    SatResult::Sat(model)
}
