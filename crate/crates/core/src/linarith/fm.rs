//! Fourier–Motzkin quantifier elimination with exact strict/non-strict
//! bookkeeping and sign case-splits on parametric coefficients.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use super::atom::{canonical_conj, Conj, Dnf, LinRel, LinearAtom, Norm};
use super::poly::{Poly, Rat};
use super::sat::is_sat;
use super::simplify::{remove_redundant, simplify};
use crate::error::{Error, Result};
use crate::logic::Symbol;
use crate::par;

pub const DEFAULT_MAX_CASES: usize = 10_000;

/// Upper bound on the number of atoms in one conjunct during elimination.
pub const MAX_CONJ_ATOMS: usize = 20_000;

/// Upper bound on the atoms held by all pending and finished case branches
/// of one conjunct; keeps memory bounded on symbolic-coefficient problems.
pub const MAX_BRANCH_ATOMS: usize = 400_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationConfig {
    /// Upper bound on the number of conjuncts produced by sign case-splits.
    pub max_cases: usize,
    /// Simplify the result under the assumptions.
    pub simplify: bool,
    /// Process conjuncts in parallel (when compiled with `parallel`).
    pub parallel: bool,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig { max_cases: DEFAULT_MAX_CASES, simplify: true, parallel: false }
    }
}

/// Merge all bounds on the same linear form: keeps the tightest lower and
/// upper bound, fuses matching bounds into an equation, and detects empty
/// intervals. Returns `None` when the conjunction is infeasible.
pub fn prune_bounds(atoms: Vec<LinearAtom>) -> Option<Conj> {
    #[derive(Default)]
    struct Bounds {
        lo: Option<(Rat, bool)>,
        hi: Option<(Rat, bool)>,
        eq: Option<Rat>,
    }
    let mut by_form: BTreeMap<Poly, Bounds> = BTreeMap::new();
    for a in atoms {
        let form = a.poly.non_constant();
        let c = a.poly.constant_term();
        let (_, lead) = form.leading().expect("non-constant atom");
        let (form, c, flipped) = if lead.is_negative() { (form.neg(), -c, true) } else { (form, c, false) };
        // Now the atom reads `form + c rel 0` (rel reversed when flipped).
        let b = by_form.entry(form).or_default();
        let v = -c;
        match (a.rel, flipped) {
            (LinRel::Eq, _) => {
                if let Some(e) = &b.eq {
                    if *e != v {
                        return None;
                    }
                }
                b.eq = Some(v);
            }
            (rel, false) => {
                let s = rel.is_strict();
                if b.hi.as_ref().map_or(true, |(h, hs)| v < *h || (v == *h && s && !hs)) {
                    b.hi = Some((v, s));
                }
            }
            (rel, true) => {
                let s = rel.is_strict();
                if b.lo.as_ref().map_or(true, |(l, ls)| v > *l || (v == *l && s && !ls)) {
                    b.lo = Some((v, s));
                }
            }
        }
    }
    let mut out = Vec::new();
    for (form, b) in by_form {
        if let Some(e) = b.eq {
            if let Some((l, s)) = &b.lo {
                if e < *l || (e == *l && *s) {
                    return None;
                }
            }
            if let Some((h, s)) = &b.hi {
                if e > *h || (e == *h && *s) {
                    return None;
                }
            }
            out.push(LinearAtom::new(form.sub(&Poly::constant(e)), LinRel::Eq));
            continue;
        }
        match (b.lo, b.hi) {
            (Some((l, ls)), Some((h, hs))) if l == h => {
                if ls || hs {
                    return None;
                }
                out.push(LinearAtom::new(form.sub(&Poly::constant(l)), LinRel::Eq));
            }
            (lo, hi) => {
                if let (Some((l, _)), Some((h, _))) = (&lo, &hi) {
                    if l > h {
                        return None;
                    }
                }
                if let Some((l, s)) = lo {
                    let rel = if s { LinRel::Lt } else { LinRel::Le };
                    out.push(LinearAtom::new(Poly::constant(l).sub(&form), rel));
                }
                if let Some((h, s)) = hi {
                    let rel = if s { LinRel::Lt } else { LinRel::Le };
                    out.push(LinearAtom::new(form.sub(&Poly::constant(h)), rel));
                }
            }
        }
    }
    Some(canonical_conj(out))
}

/// Possible signs of a parameter polynomial under a context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignSet {
    pub pos: bool,
    pub neg: bool,
    pub zero: bool,
}

impl SignSet {
    fn exact(q: &Rat) -> SignSet {
        SignSet { pos: q.is_positive(), neg: q.is_negative(), zero: q.is_zero() }
    }

    pub fn count(self) -> usize {
        self.pos as usize + self.neg as usize + self.zero as usize
    }

    /// The unique sign (+1, -1 or 0) if determined.
    pub fn determined(self) -> Option<i8> {
        match (self.pos, self.neg, self.zero) {
            (true, false, false) => Some(1),
            (false, true, false) => Some(-1),
            (false, false, true) => Some(0),
            _ => None,
        }
    }

    fn mul(self, o: SignSet) -> SignSet {
        SignSet {
            pos: (self.pos && o.pos) || (self.neg && o.neg),
            neg: (self.pos && o.neg) || (self.neg && o.pos),
            zero: self.zero || o.zero,
        }
    }
}

fn feasible_with(ctx: &[LinearAtom], p: &Poly, rel: LinRel) -> bool {
    match LinearAtom::build(p.clone(), rel) {
        Norm::True => is_sat(ctx).is_sat(),
        Norm::False => false,
        Norm::Atom(a) => {
            let mut c = ctx.to_vec();
            c.push(a);
            is_sat(&c).is_sat()
        }
    }
}

/// Which signs of `c` are consistent with `ctx` (products are decided by the
/// signs of their factors when the whole product is not decided directly).
pub fn sign_under(c: &Poly, ctx: &[LinearAtom]) -> SignSet {
    if let Some(q) = c.as_constant() {
        return SignSet::exact(&q);
    }
    let direct = SignSet {
        pos: feasible_with(ctx, &c.neg(), LinRel::Lt),
        neg: feasible_with(ctx, c, LinRel::Lt),
        zero: feasible_with(ctx, c, LinRel::Eq),
    };
    if direct.count() <= 1 || c.len() != 1 {
        return direct;
    }
    let (m, q) = c.terms().next().expect("single monomial");
    if m.degree() < 2 {
        return direct;
    }
    let mut s = SignSet::exact(q);
    for f in m.symbols() {
        s = s.mul(sign_under(&Poly::var(f.clone()), ctx));
    }
    SignSet { pos: s.pos && direct.pos, neg: s.neg && direct.neg, zero: s.zero && direct.zero }
}

/// Check that every variable to eliminate occurs linearly, with
/// coefficients free of other eliminable symbols.
pub fn check_linear(conj: &[LinearAtom], vars: &BTreeSet<Symbol>) -> Result<()> {
    for a in conj {
        for (m, _) in a.poly.terms() {
            let n = m.symbols().iter().filter(|s| vars.contains(*s)).count();
            if n >= 2 {
                return Err(Error::NonLinear(format!("`{m}` in `{a}`")));
            }
        }
    }
    Ok(())
}

struct Split {
    /// Remaining conjuncts still to process.
    work: Vec<Conj>,
    done: Vec<Conj>,
    created: usize,
}

/// `∃ vars. conj` as a DNF over the remaining symbols.
pub fn eliminate_conj(
    vars: &[Symbol],
    conj: &Conj,
    assumptions: &[LinearAtom],
    max_cases: usize,
) -> Result<Vec<Conj>> {
    let var_set: BTreeSet<Symbol> = vars.iter().cloned().collect();
    check_linear(conj, &var_set)?;
    let Some(start) = prune_bounds(conj.clone()) else {
        return Ok(vec![]);
    };
    let mut st = Split { work: vec![start], done: Vec::new(), created: 1 };
    while let Some(c) = st.work.pop() {
        step(vars, &var_set, c, assumptions, max_cases, &mut st)?;
        let held: usize = st.work.iter().chain(&st.done).map(Vec::len).sum();
        if held > MAX_BRANCH_ATOMS {
            return Err(Error::CaseExplosion(max_cases));
        }
    }
    st.done.reverse();
    Ok(st.done)
}

fn is_param_atom(a: &LinearAtom, vars: &BTreeSet<Symbol>) -> bool {
    !a.symbols().iter().any(|s| vars.contains(s))
}

fn step(
    vars: &[Symbol],
    var_set: &BTreeSet<Symbol>,
    mut c: Conj,
    assumptions: &[LinearAtom],
    max_cases: usize,
    st: &mut Split,
) -> Result<()> {
    loop {
        // Occurrences of each remaining variable, in declaration order.
        let occ: Vec<(usize, &Symbol, usize)> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v, c.iter().filter(|a| a.mentions(v)).count()))
            .filter(|(_, _, n)| *n > 0)
            .collect();
        if occ.is_empty() {
            let c = remove_redundant(&c, &[]);
            st.done.push(c);
            return Ok(());
        }
        // Gaussian pivot on an equation with a nonzero rational coefficient.
        let pivot = occ.iter().find_map(|(_, v, _)| {
            c.iter().position(|a| {
                a.rel == LinRel::Eq && a.poly.coefficient_of(v).as_constant().is_some_and(|q| !q.is_zero())
            })
            .map(|i| ((*v).clone(), i))
        });
        if let Some((v, i)) = pivot {
            let eq = c.remove(i);
            let ce = eq.poly.coefficient_of(&v);
            let sign = if ce.as_constant().is_some_and(|q| q.is_negative()) { -1 } else { 1 };
            match substitute_eq(&c, &v, &ce, sign, &eq.poly.without_symbol(&v)) {
                Some(next) => {
                    c = next;
                    continue;
                }
                None => return Ok(()),
            }
        }
        let (_, var, _) = *occ.iter().min_by_key(|(i, _, n)| (*n, *i)).expect("nonempty");
        let var = var.clone();
        // Signs of all coefficients of `var`.
        let mut ctx: Vec<LinearAtom> = assumptions.to_vec();
        ctx.extend(c.iter().filter(|a| is_param_atom(a, var_set)).cloned());
        let mut signs = Vec::with_capacity(c.len());
        let mut split: Option<Poly> = None;
        for a in &c {
            let co = a.poly.coefficient_of(&var);
            if co.is_zero() {
                signs.push(None);
                continue;
            }
            let s = sign_under(&co, &ctx);
            match s.determined() {
                Some(d) => signs.push(Some(d)),
                None if s.count() == 0 => {
                    // Context itself is infeasible.
                    return Ok(());
                }
                None => {
                    split = Some(co);
                    break;
                }
            }
        }
        if let Some(co) = split {
            let cases = [(co.neg(), LinRel::Lt), (co.clone(), LinRel::Lt), (co, LinRel::Eq)];
            let mut branches = Vec::new();
            for (p, rel) in cases {
                if !feasible_with(&ctx, &p, rel) {
                    continue;
                }
                if let Norm::Atom(lit) = LinearAtom::build(p, rel) {
                    let mut b = c.clone();
                    b.push(lit);
                    if let Some(b) = prune_bounds(b) {
                        branches.push(b);
                    }
                }
            }
            st.created += branches.len().saturating_sub(1);
            if st.created > max_cases {
                return Err(Error::CaseExplosion(max_cases));
            }
            // Pushed in reverse so the `> 0` case is processed first.
            st.work.extend(branches.into_iter().rev());
            return Ok(());
        }
        // Equations whose coefficient has a known nonzero parametric sign.
        if let Some(i) = c.iter().enumerate().position(|(i, a)| a.rel == LinRel::Eq && matches!(signs[i], Some(1 | -1))) {
            let sign = signs[i].expect("known");
            let eq = c.remove(i);
            let ce = eq.poly.coefficient_of(&var);
            match substitute_eq(&c, &var, &ce, sign, &eq.poly.without_symbol(&var)) {
                Some(next) => {
                    c = next;
                    continue;
                }
                None => return Ok(()),
            }
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut next = Vec::new();
        for (a, s) in c.iter().zip(&signs) {
            match s {
                None => next.push(a.clone()),
                Some(0) => match LinearAtom::build(a.poly.without_symbol(&var), a.rel) {
                    Norm::True => {}
                    Norm::False => return Ok(()),
                    Norm::Atom(b) => next.push(b),
                },
                Some(1) => upper.push(a),
                Some(_) => lower.push(a),
            }
        }
        for l in &lower {
            let cl = l.poly.coefficient_of(&var).neg();
            let rl = l.poly.without_symbol(&var);
            for u in &upper {
                let cu = u.poly.coefficient_of(&var);
                let ru = u.poly.without_symbol(&var);
                let p = cl.mul(&ru).add(&cu.mul(&rl));
                let rel = if l.rel.is_strict() || u.rel.is_strict() { LinRel::Lt } else { LinRel::Le };
                match LinearAtom::build(p, rel) {
                    Norm::True => {}
                    Norm::False => return Ok(()),
                    Norm::Atom(b) => next.push(b),
                }
            }
        }
        if next.len() > MAX_CONJ_ATOMS {
            return Err(Error::CaseExplosion(max_cases));
        }
        match prune_bounds(next) {
            Some(n) => c = remove_redundant(&n, &[]),
            None => return Ok(()),
        }
    }
}

/// Replace `var` using `ce*var + re = 0` where `sign` is the sign of `ce`.
fn substitute_eq(c: &[LinearAtom], var: &Symbol, ce: &Poly, sign: i8, re: &Poly) -> Option<Conj> {
    let mut out = Vec::with_capacity(c.len());
    for a in c {
        let co = a.poly.coefficient_of(var);
        if co.is_zero() {
            out.push(a.clone());
            continue;
        }
        let rest = a.poly.without_symbol(var);
        let p = ce.mul(&rest).sub(&co.mul(re));
        let p = if sign < 0 { p.neg() } else { p };
        match LinearAtom::build(p, a.rel) {
            Norm::True => {}
            Norm::False => return None,
            Norm::Atom(b) => out.push(b),
        }
    }
    prune_bounds(out)
}

/// `∃ vars. φ` under the assumptions, conjunct by conjunct.
pub fn eliminate(vars: &[Symbol], phi: &Dnf, assumptions: &[LinearAtom], cfg: &EliminationConfig) -> Result<Dnf> {
    // Chunked so that the case bound is enforced while results accumulate.
    let mut out = Vec::new();
    for chunk in phi.0.chunks(64) {
        let per: Vec<Result<Vec<Conj>>> = par::map(cfg.parallel, chunk, |c| eliminate_conj(vars, c, assumptions, cfg.max_cases));
        for r in per {
            out.extend(r?);
            if out.len() > cfg.max_cases {
                return Err(Error::CaseExplosion(cfg.max_cases));
            }
        }
    }
    let d = Dnf(out).dedup();
    Ok(if cfg.simplify { simplify(&d, assumptions) } else { d })
}
