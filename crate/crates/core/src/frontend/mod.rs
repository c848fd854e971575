//! Input languages: specifications, task files and hybrid automata.

pub mod automaton;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod task;

pub use parser::{
    clause_level, parse_extension_decls, parse_formula, parse_function_decls, parse_spec, parse_spec_at,
    parse_statements, parse_statements_at, parse_statements_with, parse_terms, spec_constants, Dialect, ProblemSpec,
};
pub use automaton::parse_lha;
pub use printer::{print_formula, print_statements};
pub use task::{parse_task_file, Pts, Specification, Task, TaskFile, TaskMode, TaskOptions, Theory};
