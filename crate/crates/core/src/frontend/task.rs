//! Task files: a YAML map of named tasks, each with a mode, options and a
//! specification body (an inline problem, a transition system, or a hybrid
//! automaton).
//!
//! ```yaml
//! task_options:
//!     print_steps: true
//! tasks:
//!     example:
//!         mode: GENERATE_CONSTRAINTS
//!         options:
//!             parameter: [a, d1, d2]
//!         specification_type: HPILOT
//!         specification:
//!             file: |
//!                 ...
//! ```
//!
//! Unknown keys are reported as warnings. Embedded specifications report
//! errors at their position in the task file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde_yaml::{Mapping, Value};

use super::automaton::parse_lha;
use super::parser::{
    parse_extension_decls, parse_function_decls, parse_spec_at, parse_statements_at, Dialect, ProblemSpec,
};
use crate::error::{Error, Result};
use crate::lha::HybridAutomaton;
use crate::linarith::{Rat, DEFAULT_MAX_CASES};
use crate::logic::{sym, Formula, Signature, Symbol, SymbolRenaming};
use crate::systems::TransitionSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskMode {
    GenerateConstraints,
    InvariantStrengthening,
    CheckInvariant,
    Bmc,
    ChatterFree,
}

impl TaskMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskMode::GenerateConstraints => "GENERATE_CONSTRAINTS",
            TaskMode::InvariantStrengthening => "INVARIANT_STRENGTHENING",
            TaskMode::CheckInvariant => "CHECK_INVARIANT",
            TaskMode::Bmc => "BMC",
            TaskMode::ChatterFree => "CHATTER_FREE",
        }
    }
}

impl FromStr for TaskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<TaskMode> {
        Ok(match s {
            "GENERATE_CONSTRAINTS" => TaskMode::GenerateConstraints,
            "INVARIANT_STRENGTHENING" => TaskMode::InvariantStrengthening,
            "CHECK_INVARIANT" => TaskMode::CheckInvariant,
            "BMC" => TaskMode::Bmc,
            "CHATTER_FREE" => TaskMode::ChatterFree,
            other => return Err(Error::Task(format!("unknown mode `{other}`"))),
        })
    }
}

/// Base theory named by the task. Both are decided over the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Theory {
    #[default]
    RealClosedFields,
    PresburgerArithmetic,
}

/// Transition system with its candidate invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pts {
    pub system: TransitionSystem,
    pub query: Vec<Formula>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Specification {
    Hpilot(ProblemSpec),
    Pts(Pts),
    Lha(HybridAutomaton),
}

impl Specification {
    pub fn signature(&self) -> Signature {
        match self {
            Specification::Hpilot(s) => s.signature.clone(),
            Specification::Pts(p) => p.system.signature.clone(),
            Specification::Lha(_) => Signature::arithmetic(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Specification::Hpilot(_) => "HPILOT",
            Specification::Pts(_) => "PTS",
            Specification::Lha(_) => "LHA",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskOptions {
    pub parameters: Option<Vec<Symbol>>,
    pub eliminate: Option<Vec<Symbol>>,
    /// Simplify generated constraints under the assumptions.
    pub slfq_query: bool,
    pub inv_str_max_iter: usize,
    pub bound: usize,
    /// Conditions on the parameters, in concrete syntax (parsed against the
    /// task's signature by the runner).
    pub assumptions: Vec<String>,
    pub instantiate: BTreeMap<Symbol, Rat>,
    pub print_steps: bool,
    /// Restrict automaton VCs to these names; an edge name `<q>_<q'>_<k>`
    /// selects every VC of that edge.
    pub vcs: Option<Vec<String>>,
    pub max_cases: usize,
}

impl Default for TaskOptions {
    fn default() -> Self {
        TaskOptions {
            parameters: None,
            eliminate: None,
            slfq_query: true,
            inv_str_max_iter: 10,
            bound: 3,
            assumptions: Vec::new(),
            instantiate: BTreeMap::new(),
            print_steps: false,
            vcs: None,
            max_cases: DEFAULT_MAX_CASES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    pub mode: TaskMode,
    pub theory: Theory,
    pub options: TaskOptions,
    pub spec: Specification,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TaskFile {
    pub tasks: Vec<Task>,
    pub warnings: Vec<String>,
}

const TOP_KEYS: [&str; 3] = ["tasks", "sehpilot_options", "task_options"];
const GLOBAL_KEYS: [&str; 1] = ["keep_files"];
const TASK_KEYS: [&str; 5] = ["mode", "options", "specification_type", "specification_theory", "specification"];
const OPTION_KEYS: [&str; 11] = [
    "parameter",
    "eliminate",
    "slfq_query",
    "inv_str_max_iter",
    "bound",
    "assumptions",
    "instantiate",
    "print_steps",
    "vcs",
    "max_cases",
    "parameters",
];
const PTS_KEYS: [&str; 7] = ["base_functions", "extension_functions", "relations", "init", "update", "query", "update_vars"];

fn task_err(task: &str, msg: impl std::fmt::Display) -> Error {
    Error::Task(format!("task `{task}`: {msg}"))
}

fn key_str(k: &Value) -> Result<String> {
    match k {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(Error::Task(format!("unsupported key {other:?}"))),
    }
}

fn warn_unknown(map: &Mapping, known: &[&str], ctx: &str, warnings: &mut Vec<String>) -> Result<()> {
    for k in map.keys() {
        let k = key_str(k)?;
        if !known.contains(&k.as_str()) {
            warnings.push(format!("{ctx}: unknown key `{k}` ignored"));
        }
    }
    Ok(())
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn symbol_list(v: &Value, what: &str) -> std::result::Result<Vec<Symbol>, String> {
    match v {
        Value::Sequence(xs) => xs
            .iter()
            .map(|x| scalar_string(x).map(|s| sym(&s)).ok_or_else(|| format!("`{what}` entries must be names")))
            .collect(),
        Value::String(s) => Ok(s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(sym).collect()),
        _ => Err(format!("`{what}` must be a list of names")),
    }
}

fn string_list(v: &Value, what: &str) -> std::result::Result<Vec<String>, String> {
    match v {
        Value::Sequence(xs) => {
            xs.iter().map(|x| scalar_string(x).ok_or_else(|| format!("`{what}` entries must be strings"))).collect()
        }
        Value::String(s) => Ok(vec![s.clone()]),
        _ => Err(format!("`{what}` must be a string or a list of strings")),
    }
}

/// `3`, `-1`, `"3/2"`, `"_3/2"` → exact rational. Floats are rejected.
pub fn parse_rational(v: &Value) -> std::result::Result<Rat, String> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(Rat::from_integer(n.as_i64().unwrap().into())),
        Value::Number(n) if n.is_u64() => Ok(Rat::from_integer(n.as_u64().unwrap().into())),
        Value::Number(n) => Err(format!("`{n}` is not exact; write it as a fraction string such as \"3/2\"")),
        Value::String(s) => {
            let t = s.trim();
            let (neg, t) = match t.strip_prefix('-') {
                Some(rest) => (true, rest.trim()),
                None => (false, t),
            };
            let t = t.strip_prefix('_').unwrap_or(t);
            let q = Rat::from_str(t).map_err(|_| format!("`{s}` is not a rational number"))?;
            Ok(if neg { -q } else { q })
        }
        other => Err(format!("{other:?} is not a rational number")),
    }
}

fn as_bool(v: &Value, what: &str) -> std::result::Result<bool, String> {
    v.as_bool().ok_or_else(|| format!("`{what}` must be true or false"))
}

fn as_count(v: &Value, what: &str) -> std::result::Result<usize, String> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| format!("`{what}` must be a non-negative integer"))
}

fn apply_options(opts: &mut TaskOptions, map: &Mapping) -> std::result::Result<(), String> {
    for (k, v) in map {
        let k = key_str(k).map_err(|e| e.to_string())?;
        match k.as_str() {
            "parameter" | "parameters" => opts.parameters = Some(symbol_list(v, &k)?),
            "eliminate" => opts.eliminate = Some(symbol_list(v, &k)?),
            "slfq_query" => opts.slfq_query = as_bool(v, &k)?,
            "print_steps" => opts.print_steps = as_bool(v, &k)?,
            "inv_str_max_iter" => opts.inv_str_max_iter = as_count(v, &k)?,
            "bound" => opts.bound = as_count(v, &k)?,
            "max_cases" => opts.max_cases = as_count(v, &k)?,
            "assumptions" => opts.assumptions.extend(string_list(v, &k)?),
            "vcs" => opts.vcs = Some(string_list(v, &k)?),
            "instantiate" => {
                let Value::Mapping(m) = v else { return Err("`instantiate` must map names to numbers".into()) };
                for (name, val) in m {
                    let name = key_str(name).map_err(|e| e.to_string())?;
                    opts.instantiate.insert(sym(&name), parse_rational(val).map_err(|e| format!("instantiate {name}: {e}"))?);
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Position of an embedded block in the raw file: `(line offset, column
/// offset)` such that block line `k` (1-based) is file line `offset + k`.
fn locate(raw: &[&str], block: &str, from: usize) -> (usize, usize) {
    let Some((k, first)) = block.lines().enumerate().find(|(_, l)| !l.trim().is_empty()) else { return (0, 0) };
    let needle = first.trim();
    for (i, line) in raw.iter().enumerate().skip(from) {
        if line.trim() == needle && i >= k {
            let indent = line.len() - line.trim_start().len();
            let local = first.len() - first.trim_start().len();
            return (i - k, indent.saturating_sub(local));
        }
    }
    (0, 0)
}

fn shift_columns(e: Error, cols: usize) -> Error {
    match e {
        Error::Syntax { line, col, msg } => Error::Syntax { line, col: col + cols, msg },
        Error::Undeclared { symbol, line, col } => Error::Undeclared { symbol, line, col: col + cols },
        Error::Arity { symbol, expected, found, line, col } => Error::Arity { symbol, expected, found, line, col: col + cols },
        other => other,
    }
}

struct Ctx<'a> {
    raw: Vec<&'a str>,
    base_dir: Option<&'a Path>,
}

impl Ctx<'_> {
    fn task_line(&self, name: &str) -> usize {
        let head = format!("{name}:");
        self.raw.iter().position(|l| l.trim() == head).unwrap_or(0)
    }

    /// Text of `file:` (inline) or `path:` (relative to the task file),
    /// with its line/column offsets.
    fn body_text(&self, task: &str, spec: &Mapping, from: usize) -> Result<(String, usize, usize)> {
        if let Some(v) = spec.get("file") {
            let text = v.as_str().ok_or_else(|| task_err(task, "`file` must be a text block"))?.to_string();
            let (l, c) = locate(&self.raw, &text, from);
            return Ok((text, l, c));
        }
        if let Some(v) = spec.get("path") {
            let p = v.as_str().ok_or_else(|| task_err(task, "`path` must be a string"))?;
            let full = match self.base_dir {
                Some(d) => d.join(p),
                None => Path::new(p).to_path_buf(),
            };
            let text = std::fs::read_to_string(&full).map_err(|e| task_err(task, format!("{}: {e}", full.display())))?;
            return Ok((text, 0, 0));
        }
        Err(task_err(task, "specification needs `file` or `path`"))
    }

    fn pts(&self, task: &str, spec: &Mapping, from: usize, warnings: &mut Vec<String>) -> Result<Pts> {
        warn_unknown(spec, &PTS_KEYS, &format!("task `{task}` specification"), warnings)?;
        let text = |k: &str| -> Result<Option<String>> {
            match spec.get(k) {
                None => Ok(None),
                Some(v) => scalar_string(v).map(Some).ok_or_else(|| task_err(task, format!("`{k}` must be text"))),
            }
        };
        let decls = |k: &str| -> Result<BTreeMap<Symbol, usize>> {
            text(k)?.map(|t| parse_function_decls(&t)).transpose().map(Option::unwrap_or_default)
        };
        let mut sig = Signature::default();
        sig.base_functions = decls("base_functions")?;
        sig.relations = decls("relations")?;
        if let Some(t) = text("extension_functions")? {
            sig.extension_functions = parse_extension_decls(&t)?;
        }
        sig.validate()?;
        let formulas = |k: &str| -> Result<Vec<Formula>> {
            let Some(t) = text(k)? else { return Ok(Vec::new()) };
            let (l, c) = locate(&self.raw, &t, from);
            parse_statements_at(&t, &sig, Dialect::default(), l).map_err(|e| shift_columns(e, c))
        };
        let init = formulas("init")?;
        let update = formulas("update")?;
        let query = formulas("query")?;
        if query.is_empty() {
            return Err(task_err(task, "PTS specification needs a `query` (the candidate invariant)"));
        }
        let mut pairs = BTreeMap::new();
        match spec.get("update_vars") {
            Some(Value::Mapping(m)) => {
                for (a, b) in m {
                    let b = scalar_string(b).ok_or_else(|| task_err(task, "`update_vars` values must be names"))?;
                    pairs.insert(sym(&key_str(a)?), sym(&b));
                }
            }
            Some(Value::Null) | None => {}
            Some(_) => return Err(task_err(task, "`update_vars` must map names to names")),
        }
        let renaming = SymbolRenaming::new(pairs)?;
        let system = TransitionSystem::new(sig, init, update, renaming)?;
        Ok(Pts { system, query })
    }

    fn task(&self, name: &str, body: &Value, defaults: &TaskOptions, warnings: &mut Vec<String>) -> Result<Task> {
        let Value::Mapping(m) = body else { return Err(task_err(name, "expected a map")) };
        warn_unknown(m, &TASK_KEYS, &format!("task `{name}`"), warnings)?;
        let from = self.task_line(name);
        let mode: TaskMode = m
            .get("mode")
            .and_then(Value::as_str)
            .ok_or_else(|| task_err(name, "missing `mode`"))?
            .parse()
            .map_err(|e: Error| task_err(name, e))?;
        let mut options = defaults.clone();
        match m.get("options") {
            Some(Value::Mapping(o)) => {
                warn_unknown(o, &OPTION_KEYS, &format!("task `{name}` options"), warnings)?;
                apply_options(&mut options, o).map_err(|e| task_err(name, e))?;
            }
            Some(Value::Null) | None => {}
            Some(_) => return Err(task_err(name, "`options` must be a map")),
        }
        let theory = match m.get("specification_theory").and_then(Value::as_str) {
            None | Some("REAL_CLOSED_FIELDS") => Theory::RealClosedFields,
            Some("PRESBURGER_ARITHMETIC") => Theory::PresburgerArithmetic,
            Some(other) => return Err(task_err(name, format!("unknown specification_theory `{other}`"))),
        };
        let kind = m.get("specification_type").and_then(Value::as_str).ok_or_else(|| task_err(name, "missing `specification_type`"))?;
        let Some(Value::Mapping(spec)) = m.get("specification") else {
            return Err(task_err(name, "missing `specification` map"));
        };
        let spec = match kind {
            "HPILOT" => {
                warn_unknown(spec, &["file", "path"], &format!("task `{name}` specification"), warnings)?;
                let (text, l, c) = self.body_text(name, spec, from)?;
                Specification::Hpilot(parse_spec_at(&text, l).map_err(|e| shift_columns(e, c))?)
            }
            "LHA" => {
                warn_unknown(spec, &["file", "path"], &format!("task `{name}` specification"), warnings)?;
                let (text, l, c) = self.body_text(name, spec, from)?;
                Specification::Lha(parse_lha(&text, l).map_err(|e| shift_columns(e, c))?)
            }
            "PTS" => Specification::Pts(self.pts(name, spec, from, warnings)?),
            other => return Err(task_err(name, format!("unknown specification_type `{other}`"))),
        };
        check_options(name, mode, &spec, &options)?;
        Ok(Task { name: name.to_string(), mode, theory, options, spec })
    }
}

fn check_options(name: &str, mode: TaskMode, spec: &Specification, o: &TaskOptions) -> Result<()> {
    let both = o.parameters.is_some() && o.eliminate.is_some();
    if both {
        return Err(task_err(name, "give either `parameter` or `eliminate`, not both"));
    }
    let supported = matches!(
        (mode, spec),
        (TaskMode::GenerateConstraints, _)
            | (TaskMode::InvariantStrengthening, Specification::Pts(_))
            | (TaskMode::CheckInvariant, Specification::Pts(_) | Specification::Lha(_))
            | (TaskMode::Bmc, Specification::Pts(_))
            | (TaskMode::ChatterFree, Specification::Lha(_))
    );
    if !supported {
        return Err(task_err(name, format!("mode {} is not available for {} specifications", mode.as_str(), spec.kind())));
    }
    let needs_selection = matches!(spec, Specification::Hpilot(_) | Specification::Pts(_))
        && matches!(mode, TaskMode::GenerateConstraints | TaskMode::InvariantStrengthening);
    if needs_selection && o.parameters.is_none() && o.eliminate.is_none() {
        return Err(task_err(name, "needs `parameter` or `eliminate`"));
    }
    if mode == TaskMode::InvariantStrengthening && o.parameters.is_none() {
        return Err(task_err(name, "invariant strengthening needs a `parameter` list"));
    }
    if mode == TaskMode::InvariantStrengthening && o.inv_str_max_iter == 0 {
        return Err(task_err(name, "`inv_str_max_iter` must be at least 1"));
    }
    Ok(())
}

/// Parse a task file. `base_dir` resolves `path:` specifications.
pub fn parse_task_file(text: &str, base_dir: Option<&Path>) -> Result<TaskFile> {
    let mut root: Value = serde_yaml::from_str(text).map_err(|e| Error::Task(e.to_string()))?;
    root.apply_merge().map_err(|e| Error::Task(e.to_string()))?;
    let Value::Mapping(top) = root else {
        return Err(Error::Task("expected a map with a `tasks` entry".into()));
    };
    let mut warnings = Vec::new();
    warn_unknown(&top, &TOP_KEYS, "task file", &mut warnings)?;
    if let Some(Value::Mapping(g)) = top.get("sehpilot_options") {
        warn_unknown(g, &GLOBAL_KEYS, "sehpilot_options", &mut warnings)?;
    }
    let mut defaults = TaskOptions::default();
    match top.get("task_options") {
        Some(Value::Mapping(o)) => {
            warn_unknown(o, &OPTION_KEYS, "task_options", &mut warnings)?;
            apply_options(&mut defaults, o).map_err(|e| Error::Task(format!("task_options: {e}")))?;
        }
        Some(Value::Null) | None => {}
        Some(_) => return Err(Error::Task("`task_options` must be a map".into())),
    }
    let tasks = match top.get("tasks") {
        Some(Value::Mapping(t)) => t.clone(),
        Some(Value::Null) | None => Mapping::new(),
        Some(_) => return Err(Error::Task("`tasks` must be a map".into())),
    };
    if tasks.is_empty() {
        return Err(Error::Task("no tasks".into()));
    }
    let ctx = Ctx { raw: text.lines().collect(), base_dir };
    let mut out = Vec::new();
    for (k, v) in &tasks {
        let name = key_str(k)?;
        out.push(ctx.task(&name, v, &defaults, &mut warnings)?);
    }
    Ok(TaskFile { tasks: out, warnings })
}
