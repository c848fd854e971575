//! Linear hybrid automata: invariant-checking verification conditions
//! (flows relaxed to their endpoints) and chatter-freedom conditions.
//!
//! Naming conventions inside the generated formulas: `x` is the value at
//! the start of a flow or before a jump, `xp` the value at the end of the
//! flow or after the jump, `t` the flow duration (the flow starts at 0).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::linarith::{term_to_poly, to_linear, LinRel, LinearAtom, Norm, Poly, Rat};
use crate::logic::{sym, Formula, Rel, Symbol, Term};

/// Name of the flow-duration constant.
pub const DURATION: &str = "t";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mode {
    pub name: String,
    pub inv: Vec<Formula>,
    /// Conjunction of non-strict linear atoms over `d(x)` and parameters.
    pub flow: Vec<Formula>,
    /// `None`: not an initial mode.
    pub init: Option<Vec<Formula>>,
    pub inenv: Option<Vec<Formula>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: String,
    pub target: String,
    /// 1-based position among the edges with the same endpoints.
    pub index: usize,
    pub guard: Vec<Formula>,
    /// Over `x` and `xp`.
    pub jump: Vec<Formula>,
}

impl Edge {
    pub fn name(&self) -> String {
        format!("{}_{}_{}", self.source, self.target, self.index)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HybridAutomaton {
    pub variables: Vec<Symbol>,
    pub parameters: Vec<Symbol>,
    pub modes: Vec<Mode>,
    pub edges: Vec<Edge>,
    /// Minimal dwelling time (a parameter or a number).
    pub epsilon: Option<Term>,
    /// Candidate invariant Φ (a convex conjunction over the variables).
    pub property: Vec<Formula>,
    /// Conditions on the parameters conjoined to every verification
    /// condition.
    pub assumptions: Vec<Formula>,
}

/// A named ground verification condition; the property it encodes holds
/// iff the formula is unsatisfiable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedVc {
    pub name: String,
    pub formula: Formula,
}

pub fn primed_name(x: &str) -> Symbol {
    sym(&format!("{x}p"))
}

pub fn derivative_name(x: &str) -> Symbol {
    sym(&format!("d({x})"))
}

fn invalid(msg: String) -> Error {
    Error::Automaton(msg)
}

fn convex(f: &Formula, what: &str) -> Result<Vec<LinearAtom>> {
    let d = to_linear(f, &BTreeSet::new())?;
    match d.0.len() {
        0 => Ok(vec![LinearAtom::new(Poly::int(1), LinRel::Le)]),
        1 => Ok(d.0[0].clone()),
        _ => Err(invalid(format!("{what}: `{f}` is not a convex conjunction"))),
    }
}

impl HybridAutomaton {
    pub fn mode(&self, q: &str) -> Option<&Mode> {
        self.modes.iter().find(|m| m.name == q)
    }

    fn post_state(&self) -> BTreeMap<Symbol, Symbol> {
        self.variables.iter().map(|x| (x.clone(), primed_name(x))).collect()
    }

    /// Same predicate over the post-state copies `xp`.
    pub fn at_post(&self, fs: &[Formula]) -> Vec<Formula> {
        let r = self.post_state();
        fs.iter().map(|f| f.rename(&r)).collect()
    }

    /// Check well-formedness: declared symbols, convex predicates,
    /// flow independence and non-strict flows, edge endpoints.
    pub fn validate(&self) -> Result<()> {
        let vars: BTreeSet<Symbol> = self.variables.iter().cloned().collect();
        let post: BTreeSet<Symbol> = self.variables.iter().map(|x| primed_name(x)).collect();
        let ders: BTreeSet<Symbol> = self.variables.iter().map(|x| derivative_name(x)).collect();
        let mut params: BTreeSet<Symbol> = self.parameters.iter().cloned().collect();
        if let Some(Term::Const(e)) = &self.epsilon {
            params.insert(e.clone());
        }
        let reserved = sym(DURATION);
        for s in vars.iter().chain(params.iter()) {
            if post.contains(s) {
                return Err(invalid(format!("`{s}` clashes with the primed copy of a variable")));
            }
            if *s == reserved {
                return Err(invalid(format!("`{DURATION}` is reserved for the flow duration")));
            }
        }
        for p in &params {
            if vars.contains(p) {
                return Err(invalid(format!("`{p}` declared both as variable and parameter")));
            }
        }
        let check = |fs: &[Formula], allowed: &[&BTreeSet<Symbol>], what: &str| -> Result<()> {
            for f in fs {
                for c in f.consts() {
                    if !allowed.iter().any(|s| s.contains(&c)) {
                        return Err(invalid(format!("{what}: undeclared symbol `{c}`")));
                    }
                }
                convex(f, what)?;
            }
            Ok(())
        };
        let state: [&BTreeSet<Symbol>; 2] = [&vars, &params];
        check(&self.property, &state, "property")?;
        check(&self.assumptions, &[&params], "assumptions")?;
        let mut names = BTreeSet::new();
        for m in &self.modes {
            if !names.insert(m.name.clone()) {
                return Err(invalid(format!("mode `{}` declared twice", m.name)));
            }
            check(&m.inv, &state, &format!("inv of mode {}", m.name))?;
            check(m.init.as_deref().unwrap_or(&[]), &state, &format!("init of mode {}", m.name))?;
            check(m.inenv.as_deref().unwrap_or(&[]), &state, &format!("inenv of mode {}", m.name))?;
            let what = format!("flow of mode {}", m.name);
            check(&m.flow, &[&ders, &params], &what)?;
            for f in &m.flow {
                for a in convex(f, &what)? {
                    if a.rel == LinRel::Lt {
                        return Err(invalid(format!("{what}: strict atom `{a}` (flows must be non-strict)")));
                    }
                    for (mono, _) in a.poly.terms() {
                        if mono.symbols().iter().filter(|s| ders.contains(*s)).count() > 1 {
                            return Err(invalid(format!("{what}: `{a}` is not linear in the derivatives")));
                        }
                    }
                }
            }
        }
        for e in &self.edges {
            for q in [&e.source, &e.target] {
                if self.mode(q).is_none() {
                    return Err(invalid(format!("edge {}: unknown mode `{q}`", e.name())));
                }
            }
            check(&e.guard, &state, &format!("guard of edge {}", e.name()))?;
            check(&e.jump, &[&vars, &post, &params], &format!("jump of edge {}", e.name()))?;
        }
        Ok(())
    }

    /// Replace constant parameters by numbers (e.g. `dmin = 1`).
    pub fn instantiate(&self, values: &BTreeMap<Symbol, Rat>) -> HybridAutomaton {
        let map: BTreeMap<Symbol, Term> = values.iter().map(|(k, v)| (k.clone(), Term::Num(v.clone()))).collect();
        let sub = |fs: &[Formula]| fs.iter().map(|f| f.replace_consts(&map)).collect::<Vec<_>>();
        let sub_opt = |fs: &Option<Vec<Formula>>| fs.as_ref().map(|v| sub(v));
        HybridAutomaton {
            variables: self.variables.clone(),
            parameters: self.parameters.iter().filter(|p| !values.contains_key(*p)).cloned().collect(),
            modes: self
                .modes
                .iter()
                .map(|m| Mode {
                    name: m.name.clone(),
                    inv: sub(&m.inv),
                    flow: sub(&m.flow),
                    init: sub_opt(&m.init),
                    inenv: sub_opt(&m.inenv),
                })
                .collect(),
            edges: self.edges.iter().map(|e| Edge { guard: sub(&e.guard), jump: sub(&e.jump), ..e.clone() }).collect(),
            epsilon: self.epsilon.as_ref().map(|t| t.replace_consts(&map)),
            property: sub(&self.property),
            assumptions: sub(&self.assumptions),
        }
    }

    /// Endpoint relaxation of the flow of `q` between times `t0` and `t`:
    /// every atom `Σ cᵢ·d(xᵢ) ⋈ c` becomes `Σ cᵢ·(xpᵢ − xᵢ) ⋈ c·(t − t0)`.
    pub fn flow_relax(&self, q: &str, t0: &Term, t: &Term) -> Result<Vec<Formula>> {
        let mode = self.mode(q).ok_or_else(|| invalid(format!("unknown mode `{q}`")))?;
        let ders: BTreeMap<Symbol, &Symbol> = self.variables.iter().map(|x| (derivative_name(x), x)).collect();
        let span = term_to_poly(t).sub(&term_to_poly(t0));
        let mut out = Vec::new();
        for f in &mode.flow {
            for a in convex(f, "flow")? {
                let mut p = Poly::zero();
                for (mono, q) in a.poly.terms() {
                    let d = mono.symbols().iter().find(|s| ders.contains_key(*s)).cloned();
                    let piece = match d {
                        Some(d) => {
                            let x = ders[&d];
                            let delta = Poly::var(primed_name(x)).sub(&Poly::var(x.clone()));
                            Poly::monomial(mono.without(&d), q.clone()).mul(&delta)
                        }
                        None => Poly::monomial(mono.clone(), q.clone()).mul(&span),
                    };
                    p = p.add(&piece);
                }
                match LinearAtom::build(p, a.rel) {
                    Norm::True => {}
                    Norm::False => out.push(Formula::False),
                    Norm::Atom(b) => out.push(Formula::Atom(b.to_atom(&|s: &Symbol| Term::Const(s.clone())))),
                }
            }
        }
        Ok(out)
    }

    fn with_assumptions(&self, mut parts: Vec<Formula>) -> Formula {
        parts.extend(self.assumptions.iter().cloned());
        Formula::and(parts)
    }

    fn relax_from_zero(&self, q: &str) -> Result<Vec<Formula>> {
        self.flow_relax(q, &Term::int(0), &Term::cnst(DURATION))
    }

    fn not_all(fs: Vec<Formula>) -> Formula {
        Formula::not(Formula::and(fs))
    }

    /// `I_q`, `F_flow(q)` for every mode and `F_jump(e)` for every edge.
    pub fn vcs_invariant(&self, phi: &[Formula]) -> Result<Vec<NamedVc>> {
        self.validate()?;
        let t = Term::cnst(DURATION);
        let mut out = Vec::new();
        for m in &self.modes {
            let mut parts: Vec<Formula> = m.init.clone().unwrap_or_else(|| vec![Formula::False]);
            parts.push(Self::not_all(phi.to_vec()));
            out.push(NamedVc { name: format!("I_{}", m.name), formula: self.with_assumptions(parts) });
        }
        for m in &self.modes {
            let mut parts: Vec<Formula> = phi.to_vec();
            parts.extend(m.inv.iter().cloned());
            parts.extend(self.relax_from_zero(&m.name)?);
            parts.push(Formula::atom(t.clone(), Rel::Ge, Term::int(0)));
            parts.extend(self.at_post(&m.inv));
            parts.push(Self::not_all(self.at_post(phi)));
            out.push(NamedVc { name: format!("F_flow_{}", m.name), formula: self.with_assumptions(parts) });
        }
        for e in &self.edges {
            let target = self.mode(&e.target).expect("validated");
            let mut parts: Vec<Formula> = phi.to_vec();
            parts.extend(e.guard.iter().cloned());
            parts.extend(e.jump.iter().cloned());
            parts.extend(self.at_post(&target.inv));
            parts.push(Self::not_all(self.at_post(phi)));
            out.push(NamedVc { name: format!("F_jump_{}", e.name()), formula: self.with_assumptions(parts) });
        }
        Ok(out)
    }

    /// `CF1_e` (every jump lands in the inner envelope of its target) and
    /// `CF2_e` (no guard becomes true within the dwelling time after
    /// entering the inner envelope of the source) for every edge.
    pub fn vcs_chatterfree(&self) -> Result<Vec<NamedVc>> {
        self.vcs_chatterfree_where(|_| true)
    }

    /// As [`vcs_chatterfree`](Self::vcs_chatterfree), restricted to the VCs
    /// whose name satisfies `keep`; inner envelopes are only required for
    /// the VCs generated.
    pub fn vcs_chatterfree_where(&self, keep: impl Fn(&str) -> bool) -> Result<Vec<NamedVc>> {
        self.validate()?;
        let eps = self.epsilon.clone().ok_or_else(|| invalid("chatter-freedom needs `epsilon`".into()))?;
        let t = Term::cnst(DURATION);
        let envelope = |q: &str| -> Result<Vec<Formula>> {
            self.mode(q)
                .and_then(|m| m.inenv.clone())
                .ok_or_else(|| invalid(format!("mode `{q}` has no inner envelope (inenv)")))
        };
        let mut out = Vec::new();
        for e in &self.edges {
            let source = self.mode(&e.source).expect("validated");
            let cf1 = format!("CF1_{}", e.name());
            if keep(&cf1) {
                let mut parts: Vec<Formula> = source.inv.clone();
                parts.extend(e.guard.iter().cloned());
                parts.extend(e.jump.iter().cloned());
                parts.push(Self::not_all(self.at_post(&envelope(&e.target)?)));
                out.push(NamedVc { name: cf1, formula: self.with_assumptions(parts) });
            }
            let cf2 = format!("CF2_{}", e.name());
            if !keep(&cf2) {
                continue;
            }
            let mut parts: Vec<Formula> = envelope(&e.source)?;
            parts.extend(source.inv.iter().cloned());
            parts.extend(self.relax_from_zero(&e.source)?);
            parts.extend(self.at_post(&e.guard));
            parts.push(Formula::atom(t.clone(), Rel::Le, eps.clone()));
            parts.push(Formula::atom(Term::int(0), Rel::Lt, t.clone()));
            out.push(NamedVc { name: cf2, formula: self.with_assumptions(parts) });
        }
        Ok(out)
    }

    /// Symbols eliminated when turning a verification condition into a
    /// constraint on the parameters: `x`, `xp` and `t`.
    pub fn state_symbols(&self) -> Vec<Symbol> {
        let mut v = self.variables.clone();
        v.extend(self.variables.iter().map(|x| primed_name(x)));
        v.push(sym(DURATION));
        v
    }
}
