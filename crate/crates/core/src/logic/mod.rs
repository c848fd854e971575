//! Many-sorted (in practice single-sorted, numeric) terms, literals,
//! clauses and formulas.
//!
//! Values are immutable after construction; every transformation returns a
//! new tree.

mod formula;
mod signature;
mod term;

pub use formula::{negate_clauses, negate_universal, skolem_name, Atom, Clause, Formula, Literal, Rel};
pub use signature::{rename_symbols, ExtensionFn, Signature, SymbolRenaming, REAL};
pub use term::{fmt_rational, rational_to_string, sym, Symbol, Term, ADD, MUL, SUB};
