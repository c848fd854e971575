use std::collections::{BTreeMap, BTreeSet};

use super::formula::Formula;
use super::term::{sym, Symbol};
use crate::error::{Error, Result};

/// Default (and only) numeric sort.
pub const REAL: &str = "real";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionFn {
    pub arity: usize,
    pub level: usize,
}

/// Base functions, leveled extension functions, relations and parameters.
/// Constants are implicitly declared by use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub sorts: BTreeSet<Symbol>,
    pub base_functions: BTreeMap<Symbol, usize>,
    pub extension_functions: BTreeMap<Symbol, ExtensionFn>,
    pub relations: BTreeMap<Symbol, usize>,
    pub parameters: BTreeSet<Symbol>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature {
            sorts: [sym(REAL)].into_iter().collect(),
            base_functions: BTreeMap::new(),
            extension_functions: BTreeMap::new(),
            relations: BTreeMap::new(),
            parameters: BTreeSet::new(),
        }
    }
}

impl Signature {
    /// `+ - *` and the four order relations, as in every example input.
    pub fn arithmetic() -> Signature {
        let mut s = Signature::default();
        for f in ["+", "-", "*"] {
            s.base_functions.insert(sym(f), 2);
        }
        for r in ["<=", "<", ">=", ">"] {
            s.relations.insert(sym(r), 2);
        }
        s
    }

    pub fn level(&self, f: &str) -> Option<usize> {
        self.extension_functions.get(f).map(|e| e.level)
    }

    pub fn is_extension(&self, f: &str) -> bool {
        self.extension_functions.contains_key(f)
    }

    pub fn max_level(&self) -> usize {
        self.extension_functions.values().map(|e| e.level).max().unwrap_or(0)
    }

    pub fn arity(&self, f: &str) -> Option<usize> {
        self.base_functions
            .get(f)
            .copied()
            .or_else(|| self.extension_functions.get(f).map(|e| e.arity))
    }

    pub fn validate(&self) -> Result<()> {
        for f in self.base_functions.keys() {
            if self.extension_functions.contains_key(f) || self.relations.contains_key(f) {
                return Err(Error::Signature(format!("symbol `{f}` declared twice")));
            }
        }
        for (f, e) in &self.extension_functions {
            if self.relations.contains_key(f) {
                return Err(Error::Signature(format!("symbol `{f}` declared twice")));
            }
            if e.level == 0 {
                return Err(Error::Signature(format!("extension `{f}` has level 0")));
            }
        }
        for p in &self.parameters {
            if self.base_functions.contains_key(p) || self.relations.contains_key(p) {
                return Err(Error::Signature(format!("parameter `{p}` is not a function or constant")));
            }
        }
        Ok(())
    }
}

/// Injective, arity-preserving map between symbols (x -> x', f -> f',
/// x -> x_i).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolRenaming {
    map: BTreeMap<Symbol, Symbol>,
}

impl SymbolRenaming {
    pub fn new(map: BTreeMap<Symbol, Symbol>) -> Result<SymbolRenaming> {
        let targets: BTreeSet<&Symbol> = map.values().collect();
        if targets.len() != map.len() {
            return Err(Error::Signature("symbol renaming is not injective".into()));
        }
        Ok(SymbolRenaming { map })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<SymbolRenaming> {
        SymbolRenaming::new(pairs.into_iter().map(|(a, b)| (sym(a), sym(b))).collect())
    }

    pub fn map(&self) -> &BTreeMap<Symbol, Symbol> {
        &self.map
    }

    pub fn get(&self, s: &str) -> Option<&Symbol> {
        self.map.get(s)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Check the renaming against a signature: function symbols must map to
    /// declared functions of the same arity.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        for (from, to) in &self.map {
            match (sig.arity(from), sig.arity(to)) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::Signature(format!("renaming `{from}` -> `{to}` changes arity")))
                }
                (Some(_), None) => {
                    return Err(Error::Undeclared { symbol: to.to_string(), line: 0, col: 0 })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Homomorphic renaming of constants and function symbols, checked against
/// the signature.
pub fn rename_symbols(phi: &Formula, r: &SymbolRenaming, sig: &Signature) -> Result<Formula> {
    r.check(sig)?;
    Ok(phi.rename(r.map()))
}
