use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigRational, One, Signed, Zero};

use crate::logic::{sym, Symbol};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Commutative product of symbols in sorted order; the empty product is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<Symbol>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol) -> Monomial {
        Monomial(vec![s])
    }

    pub fn from_symbols(mut v: Vec<Symbol>) -> Monomial {
        v.sort();
        Monomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn count(&self, s: &str) -> usize {
        self.0.iter().filter(|x| x.as_ref() == s).count()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Monomial::from_symbols(v)
    }

    /// Remove one occurrence of `s`.
    pub fn without(&self, s: &str) -> Monomial {
        let mut v = self.0.clone();
        if let Some(pos) = v.iter().position(|x| x.as_ref() == s) {
            v.remove(pos);
        }
        Monomial(v)
    }

    pub fn eval(&self, model: &BTreeMap<Symbol, Rat>) -> Option<Rat> {
        let mut acc = Rat::one();
        for s in &self.0 {
            acc *= model.get(s)?;
        }
        Some(acc)
    }

    /// Opaque name used when a product is treated as a single unknown.
    pub fn opaque_name(&self) -> Symbol {
        if self.0.len() == 1 {
            self.0[0].clone()
        } else {
            sym(&self.0.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(" * "))
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "_1")
        } else {
            write!(f, "{}", self.opaque_name())
        }
    }
}

/// Polynomial with exact rational coefficients; no zero coefficient is ever
/// stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly(BTreeMap<Monomial, Rat>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    pub fn constant(q: Rat) -> Poly {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(Monomial::one(), q);
        }
        Poly(m)
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(rat(n))
    }

    pub fn var(s: Symbol) -> Poly {
        Poly::monomial(Monomial::var(s), Rat::one())
    }

    pub fn monomial(m: Monomial, q: Rat) -> Poly {
        let mut p = BTreeMap::new();
        if !q.is_zero() {
            p.insert(m, q);
        }
        Poly(p)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(c)` iff the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.0.len() {
            0 => Some(Rat::zero()),
            1 => self.0.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rat {
        self.0.get(&Monomial::one()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn non_constant(&self) -> Poly {
        Poly(self.0.iter().filter(|(m, _)| !m.is_one()).map(|(m, q)| (m.clone(), q.clone())).collect())
    }

    /// First non-constant monomial with its coefficient.
    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.0.iter().find(|(m, _)| !m.is_one())
    }

    fn add_term(&mut self, m: Monomial, q: Rat) {
        if q.is_zero() {
            return;
        }
        match self.0.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += q;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(q);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in &other.0 {
            out.add_term(m.clone(), q.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in &other.0 {
            out.add_term(m.clone(), -q.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, q)| (m.clone(), -q.clone())).collect())
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, q)| (m.clone(), q * k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, q1) in &self.0 {
            for (m2, q2) in &other.0 {
                out.add_term(m1.mul(m2), q1 * q2);
            }
        }
        out
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.0.keys().flat_map(|m| m.symbols().iter().cloned()).collect()
    }

    pub fn mentions(&self, s: &str) -> bool {
        self.0.keys().any(|m| m.count(s) > 0)
    }

    /// Coefficient of `s`: the sum of all monomials containing `s`, with one
    /// occurrence of `s` removed.
    pub fn coefficient_of(&self, s: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.0 {
            if m.count(s) > 0 {
                out.add_term(m.without(s), q.clone());
            }
        }
        out
    }

    /// Monomials not containing `s`.
    pub fn without_symbol(&self, s: &str) -> Poly {
        Poly(self.0.iter().filter(|(m, _)| m.count(s) == 0).map(|(m, q)| (m.clone(), q.clone())).collect())
    }

    /// Replace `s` (assumed to occur with degree <= 1 per monomial) by `p`.
    pub fn substitute(&self, s: &str, p: &Poly) -> Poly {
        let coeff = self.coefficient_of(s);
        if coeff.is_zero() {
            return self.clone();
        }
        self.without_symbol(s).add(&coeff.mul(p))
    }

    /// Map every symbol through `f`, multiplying out the images.
    pub fn substitute_all(&self, f: &impl Fn(&Symbol) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.0 {
            let mut acc = Poly::constant(q.clone());
            for s in m.symbols() {
                let img = f(s).unwrap_or_else(|| Poly::var(s.clone()));
                acc = acc.mul(&img);
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn eval(&self, model: &BTreeMap<Symbol, Rat>) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (m, q) in &self.0 {
            acc += q * m.eval(model)?;
        }
        Some(acc)
    }

    /// Highest number of symbols from `set` (with multiplicity) in one monomial.
    pub fn degree_in(&self, set: &BTreeSet<Symbol>) -> usize {
        self.0
            .keys()
            .map(|m| m.symbols().iter().filter(|s| set.contains(*s)).count())
            .max()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Replace every non-linear monomial by an opaque symbol.
    pub fn opaque(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .map(|(m, q)| {
                    if m.degree() >= 2 {
                        (Monomial::var(m.opaque_name()), q.clone())
                    } else {
                        (m.clone(), q.clone())
                    }
                })
                .collect(),
        )
    }

    /// Divide by the absolute value of the leading coefficient.
    pub fn normalize_positive(&self) -> Poly {
        match self.leading() {
            Some((_, q)) => {
                let k = q.abs().recip();
                self.scale(&k)
            }
            None => self.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Poly {
        Poly::var(sym(s))
    }

    #[test]
    fn arithmetic_cancels() {
        let p = v("x").add(&v("y")).sub(&v("x"));
        assert_eq!(p, v("y"));
        assert!(v("x").sub(&v("x")).is_zero());
    }

    #[test]
    fn coefficient_with_parameters() {
        // dmin*t - x1p + x1
        let p = v("dmin").mul(&v("t")).sub(&v("x1p")).add(&v("x1"));
        assert_eq!(p.coefficient_of("t"), v("dmin"));
        assert_eq!(p.coefficient_of("x1p"), Poly::int(-1));
        assert_eq!(p.without_symbol("t"), v("x1").sub(&v("x1p")));
    }

    #[test]
    fn substitute_linear() {
        let p = v("x").scale(&rat(2)).add(&v("y"));
        let q = p.substitute("x", &v("z").add(&Poly::int(1)));
        assert_eq!(q, v("z").scale(&rat(2)).add(&v("y")).add(&Poly::int(2)));
    }

    #[test]
    fn monomials_sort_symbols() {
        let m = Monomial::from_symbols(vec![sym("epsilon"), sym("dmax")]);
        assert_eq!(m.to_string(), "dmax * epsilon");
    }
}
