//! Task runner: executes the tasks of a task file by mode and assembles the
//! report.
//!
//! ```text
//! Metadata:
//!     Date: '2023-07-24 15:04:48'
//!     Number of Tasks: 1
//!     Runtime Sum: 0.4339
//! example constraint generation:
//!     Runtime: 0.4339
//!     Result: (FORALL i). OR(a(i + _1) - a(i) >= _0, d1 - d2 > _0)
//! ```
//!
//! Multi-line results are printed before the runtime, single-line results
//! after it. Exit codes: 0 when every task completed, 1 when a task failed
//! in the engine, 2 on parse errors (no report is produced).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::frontend::{
    parse_statements, parse_task_file, parse_terms, print_formula, print_statements, ProblemSpec, Pts, Specification,
    Task, TaskFile, TaskMode,
};
use crate::hier::{canonical_term, reduce_chain_with, GroundTermSet, ReduceOptions};
use crate::lha::{HybridAutomaton, NamedVc};
use crate::linarith::{decide_exact, Decision, EliminationConfig, LinearAtom, Model, Rat};
use crate::logic::{Formula, Signature, Symbol, Term};
use crate::par;
use crate::smtlib::export_smtlib;
use crate::symelim::{assumptions_from, eliminate_reduction, is_definitional, ConstraintResult, GenerateOptions, Selection};
use crate::systems::{strengthen, Outcome, StrengthenOptions, TransitionSystem, Verdict};

/// Run-wide settings (command-line flags).
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Run only these tasks (in file order).
    pub tasks: Option<Vec<String>>,
    pub dump_reduction: bool,
    pub dump_smtlib: Option<PathBuf>,
    /// Extra instantiation terms, `;`-separated, parsed per task.
    pub seed_closure: Option<String>,
    pub max_cases: Option<usize>,
    /// Parameter assumptions added to every task.
    pub assume: Vec<String>,
    pub parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResultBody {
    Line(String),
    Block(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskReport {
    pub name: String,
    pub runtime: f64,
    pub result: ResultBody,
    pub extra: Vec<String>,
    /// The task stopped with an engine error.
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub date: String,
    pub tasks: Vec<TaskReport>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let sum: f64 = self.tasks.iter().map(|t| t.runtime).sum();
        let _ = writeln!(s, "Metadata:");
        let _ = writeln!(s, "    Date: '{}'", self.date);
        let _ = writeln!(s, "    Number of Tasks: {}", self.tasks.len());
        let _ = writeln!(s, "    Runtime Sum: {sum:.4}");
        for t in &self.tasks {
            let _ = writeln!(s, "{}:", t.name);
            match &t.result {
                ResultBody::Line(l) => {
                    let _ = writeln!(s, "    Runtime: {:.4}", t.runtime);
                    let _ = writeln!(s, "    Result: {l}");
                }
                ResultBody::Block(lines) => {
                    let _ = writeln!(s, "    Result:");
                    for l in lines {
                        let _ = writeln!(s, "        {l}");
                    }
                    let _ = writeln!(s, "    Runtime: {:.4}", t.runtime);
                }
            }
            if !t.extra.is_empty() {
                let _ = writeln!(s, "    Extra:");
                for l in &t.extra {
                    let _ = writeln!(s, "        {l}");
                }
            }
        }
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.tasks.iter().any(|t| t.failed) {
            1
        } else {
            0
        }
    }
}

/// Replace the date and every runtime by fixed placeholders.
pub fn mask_volatile(report: &str) -> String {
    let mut out = String::new();
    for line in report.lines() {
        let trimmed = line.trim_start();
        let indent = &line[..line.len() - trimmed.len()];
        let masked = if trimmed.starts_with("Date: ") {
            format!("{indent}Date: '<masked>'")
        } else if let Some(key) = ["Runtime Sum: ", "Runtime: "].iter().find(|k| trimmed.starts_with(**k)) {
            format!("{indent}{key}<masked>")
        } else {
            line.to_string()
        };
        out.push_str(&masked);
        out.push('\n');
    }
    out
}

/// Everything a task needs besides its specification, resolved against the
/// task's signature.
#[derive(Clone)]
struct Prepared {
    assumptions: Vec<Formula>,
    seed: GroundTermSet,
}

fn prepare(task: &Task, opts: &RunOptions) -> Result<Prepared> {
    let sig = task.spec.signature();
    let mut assumptions = Vec::new();
    for text in task.options.assumptions.iter().chain(&opts.assume) {
        let fs = parse_statements(text, &sig).map_err(|e| Error::Task(format!("task `{}`: assumption: {e}", task.name)))?;
        assumptions.extend(fs);
    }
    let mut seed = GroundTermSet::new();
    if let Some(text) = &opts.seed_closure {
        if !matches!(task.spec, Specification::Lha(_)) {
            let ts = parse_terms(text, &sig).map_err(|e| Error::Task(format!("task `{}`: seed terms: {e}", task.name)))?;
            seed.extend(ts.iter().filter(|t| t.is_ground()).map(canonical_term));
        }
    }
    Ok(Prepared { assumptions, seed })
}

fn instantiated(f: &Formula, values: &BTreeMap<Symbol, Term>) -> Formula {
    if values.is_empty() {
        f.clone()
    } else {
        f.replace_consts(values)
    }
}

fn value_terms(values: &BTreeMap<Symbol, Rat>) -> BTreeMap<Symbol, Term> {
    values.iter().map(|(k, v)| (k.clone(), Term::Num(v.clone()))).collect()
}

fn file_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn model_line(m: &Model) -> String {
    if m.is_empty() {
        return "(empty model)".into();
    }
    m.iter().map(|(k, v)| format!("{k} = {}", crate::logic::rational_to_string(v))).collect::<Vec<_>>().join(", ")
}

/// Execution context of a single task.
struct Exec<'a> {
    task: &'a Task,
    run: &'a RunOptions,
    prep: Prepared,
    extra: Vec<String>,
}

impl Exec<'_> {
    fn generate_options(&self) -> GenerateOptions {
        GenerateOptions {
            elimination: EliminationConfig {
                max_cases: self.run.max_cases.unwrap_or(self.task.options.max_cases),
                simplify: self.task.options.slfq_query,
                parallel: self.run.parallel,
            },
            reduce: ReduceOptions { seed: self.prep.seed.clone() },
        }
    }

    fn assumption_atoms(&self) -> Result<Vec<LinearAtom>> {
        assumptions_from(&self.prep.assumptions)
    }

    fn selection(&self, default: Option<Vec<Symbol>>) -> Result<Selection> {
        let o = &self.task.options;
        match (&o.parameters, &o.eliminate, default) {
            (Some(p), _, _) => Ok(Selection::Parameters(p.clone())),
            (None, Some(e), _) => Ok(Selection::Eliminate(e.clone())),
            (None, None, Some(d)) => Ok(Selection::Eliminate(d)),
            (None, None, None) => Err(Error::Task(format!("task `{}` needs `parameter` or `eliminate`", self.task.name))),
        }
    }

    fn dump_smtlib(&self, suffix: Option<&str>, formulas: &[Formula]) -> Result<()> {
        let Some(dir) = &self.run.dump_smtlib else { return Ok(()) };
        let name = match suffix {
            Some(s) => format!("{}_{s}", self.task.name),
            None => self.task.name.clone(),
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{}.smt2", file_name(&name)));
        std::fs::write(&path, export_smtlib(formulas)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Reduce, eliminate and dump as requested.
    fn constraint(&mut self, spec: &ProblemSpec, sel: &Selection, label: Option<&str>) -> Result<ConstraintResult> {
        let gopts = self.generate_options();
        let red = reduce_chain_with(spec, &gopts.reduce)?;
        if self.run.dump_reduction {
            match label {
                Some(l) => self.extra.push(format!("Reduction {l}: |-")),
                None => self.extra.push("Reduction: |-".into()),
            }
            self.extra.extend(red.dump().lines().map(|l| format!("    {l}")));
        }
        self.dump_smtlib(label, &red.formulas())?;
        let mut res = eliminate_reduction(&red, sel, &self.assumption_atoms()?, &gopts.elimination)?;
        res.weakest = is_definitional(spec);
        Ok(res)
    }

    fn note_steps(&mut self, label: Option<&str>, res: &ConstraintResult) {
        if !self.task.options.print_steps {
            return;
        }
        let ind = match label {
            Some(l) => {
                self.extra.push(format!("{l}:"));
                "    "
            }
            None => "",
        };
        for s in &res.steps {
            self.extra.push(format!("{ind}(step) {s}"));
        }
        self.extra.push(format!("{ind}(step) weakest constraint: {}", res.weakest));
    }

    fn run(&mut self) -> Result<ResultBody> {
        let values = value_terms(&self.task.options.instantiate);
        match &self.task.spec {
            Specification::Hpilot(spec) => {
                let spec = ProblemSpec {
                    signature: spec.signature.clone(),
                    clauses: spec.clauses.iter().map(|f| instantiated(f, &values)).collect(),
                    query: spec.query.iter().map(|f| instantiated(f, &values)).collect(),
                };
                let sel = self.selection(None)?;
                let res = self.constraint(&spec, &sel, None)?;
                self.note_steps(None, &res);
                Ok(ResultBody::Line(res.to_string()))
            }
            Specification::Pts(p) => {
                let sys = &p.system;
                let sys = TransitionSystem::new(
                    sys.signature.clone(),
                    sys.init.iter().map(|f| instantiated(f, &values)).collect(),
                    sys.update.iter().map(|f| instantiated(f, &values)).collect(),
                    sys.update_vars.clone(),
                )?;
                let query: Vec<Formula> = p.query.iter().map(|f| instantiated(f, &values)).collect();
                self.run_pts(&Pts { system: sys, query })
            }
            Specification::Lha(h) => {
                let mut h = h.instantiate(&self.task.options.instantiate);
                h.assumptions.extend(self.prep.assumptions.iter().cloned());
                self.run_lha(&h)
            }
        }
    }

    fn with_assumptions(&self, sys: &TransitionSystem) -> Result<TransitionSystem> {
        let mut init = sys.init.clone();
        let mut update = sys.update.clone();
        init.extend(self.prep.assumptions.iter().cloned());
        update.extend(self.prep.assumptions.iter().cloned());
        TransitionSystem::new(sys.signature.clone(), init, update, sys.update_vars.clone())
    }

    fn complete_instantiation_note(&mut self, sig: &Signature) {
        if !sig.extension_functions.is_empty() {
            self.extra.push("note: satisfiable under the complete instantiation assumption".into());
        }
    }

    fn run_pts(&mut self, p: &Pts) -> Result<ResultBody> {
        let sys = &p.system;
        match self.task.mode {
            TaskMode::GenerateConstraints => {
                let vc = sys.vc_consecution(&p.query)?;
                let sel = self.selection(None)?;
                let res = self.constraint(&vc, &sel, None)?;
                self.note_steps(None, &res);
                Ok(ResultBody::Line(res.to_string()))
            }
            TaskMode::InvariantStrengthening => {
                let params = self.task.options.parameters.clone().unwrap_or_default();
                let sopts = StrengthenOptions {
                    max_iter: self.task.options.inv_str_max_iter,
                    assumptions: self.assumption_atoms()?,
                    generate: self.generate_options(),
                };
                let st = strengthen(sys, &p.query, &params, &self.task.name, &sopts)?;
                if self.task.options.print_steps {
                    self.extra.extend(st.log.iter().cloned());
                }
                Ok(match st.outcome {
                    Outcome::Invariant(fs) => {
                        // Independent re-check of the result.
                        match sys.check_inductive(&fs)? {
                            Verdict::Inductive => {}
                            other => {
                                return Err(Error::Unsupported(format!("strengthened candidate failed re-check: {other:?}")))
                            }
                        }
                        let mut lines = vec!["Inductive Invariant: |-".to_string()];
                        lines.extend(print_statements(&fs).into_iter().map(|l| format!("    {l}")));
                        ResultBody::Block(lines)
                    }
                    Outcome::NoUniversalInvariant => ResultBody::Line(
                        "No universal inductive invariant: the strengthened candidate fails in the initial states"
                            .into(),
                    ),
                    Outcome::Exhausted(fs) => {
                        let mut lines = vec![format!("Not inductive after {} iterations: |-", st.iterations)];
                        lines.extend(print_statements(&fs).into_iter().map(|l| format!("    {l}")));
                        ResultBody::Block(lines)
                    }
                })
            }
            TaskMode::CheckInvariant => {
                let sys = self.with_assumptions(sys)?;
                if self.run.dump_smtlib.is_some() || self.run.dump_reduction {
                    let init = sys.vc_initiation(&p.query)?;
                    let cons = sys.vc_consecution(&p.query)?;
                    for (label, vc) in [("init", &init), ("consecution", &cons)] {
                        let red = reduce_chain_with(vc, &ReduceOptions { seed: self.prep.seed.clone() })?;
                        if self.run.dump_reduction {
                            self.extra.push(format!("Reduction {label}: |-"));
                            self.extra.extend(red.dump().lines().map(|l| format!("    {l}")));
                        }
                        self.dump_smtlib(Some(label), &red.formulas())?;
                    }
                }
                Ok(ResultBody::Line(match sys.check_inductive(&p.query)? {
                    Verdict::Inductive => "Inductive".into(),
                    Verdict::InitFails(m) => {
                        self.extra.push(format!("witness: {}", model_line(&m)));
                        self.complete_instantiation_note(&sys.signature);
                        "Not inductive: initiation fails".into()
                    }
                    Verdict::ConsecutionFails(m) => {
                        self.extra.push(format!("witness: {}", model_line(&m)));
                        self.complete_instantiation_note(&sys.signature);
                        "Not inductive: consecution fails".into()
                    }
                    Verdict::Unknown(why) => format!("Unknown: {why}"),
                }))
            }
            TaskMode::Bmc => {
                let sys = self.with_assumptions(sys)?;
                let k = self.task.options.bound;
                if self.run.dump_smtlib.is_some() {
                    for j in 0..=k {
                        let vc = sys.bmc_formula(&p.query, j)?;
                        let red = reduce_chain_with(&vc, &ReduceOptions::default())?;
                        self.dump_smtlib(Some(&format!("depth_{j}")), &red.formulas())?;
                    }
                }
                let steps = sys.bmc(&p.query, k, self.run.parallel)?;
                let mut first = None;
                for s in &steps {
                    match &s.counterexample {
                        None => self.extra.push(format!("depth {}: UNSAT", s.depth)),
                        Some(m) => {
                            self.extra.push(format!("depth {}: SAT", s.depth));
                            self.extra.push(format!("    witness: {}", model_line(m)));
                            first.get_or_insert(s.depth);
                        }
                    }
                }
                Ok(ResultBody::Line(match first {
                    None => format!("No counterexample up to depth {k}"),
                    Some(j) => {
                        self.complete_instantiation_note(&sys.signature);
                        format!("Counterexample at depth {j}")
                    }
                }))
            }
            TaskMode::ChatterFree => unreachable!("rejected when the task file is read"),
        }
    }

    /// VC selection: a VC is kept when its name or its edge is listed.
    fn keeps(&self, vc: &str) -> bool {
        match &self.task.options.vcs {
            None => true,
            Some(names) => names.iter().any(|n| vc == n || vc.ends_with(&format!("_{n}"))),
        }
    }

    fn selected(&self, vcs: Vec<NamedVc>) -> Vec<NamedVc> {
        vcs.into_iter().filter(|vc| self.keeps(&vc.name)).collect()
    }

    fn run_lha(&mut self, h: &HybridAutomaton) -> Result<ResultBody> {
        let vcs = match self.task.mode {
            TaskMode::ChatterFree => h.vcs_chatterfree_where(|name| self.keeps(name))?,
            _ => h.vcs_invariant(&h.property)?,
        };
        let vcs = self.selected(vcs);
        if vcs.is_empty() {
            return Err(Error::Task(format!("task `{}`: no verification conditions selected", self.task.name)));
        }
        if self.run.dump_reduction {
            for vc in &vcs {
                self.extra.push(format!("{}: {}", vc.name, print_formula(&vc.formula)));
            }
        }
        for vc in &vcs {
            self.dump_smtlib(Some(&vc.name), std::slice::from_ref(&vc.formula))?;
        }
        match self.task.mode {
            TaskMode::CheckInvariant => {
                let first = h.state_symbols();
                let max_cases = self.run.max_cases.unwrap_or(self.task.options.max_cases);
                let decisions = par::map(self.run.parallel, &vcs, |vc| decide_exact(&vc.formula, &first, max_cases));
                let mut lines = Vec::new();
                let mut all = true;
                for (vc, d) in vcs.iter().zip(decisions) {
                    match d? {
                        Decision::Unsat => lines.push(format!("{}: UNSAT", vc.name)),
                        Decision::Sat(m) => {
                            all = false;
                            lines.push(format!("{}: SAT", vc.name));
                            if let Some(m) = m {
                                self.extra.push(format!("witness {}: {}", vc.name, model_line(&m)));
                            }
                        }
                    }
                }
                lines.insert(0, format!("Inductive: {all}"));
                Ok(ResultBody::Block(lines))
            }
            _ => {
                let sel = self.selection(Some(h.state_symbols()))?;
                let gopts = self.generate_options();
                let atoms = self.assumption_atoms()?;
                let results = par::map(self.run.parallel, &vcs, |vc| {
                    let mut spec = ProblemSpec::new(Signature::arithmetic());
                    spec.query = vec![vc.formula.clone()];
                    let red = reduce_chain_with(&spec, &gopts.reduce)?;
                    eliminate_reduction(&red, &sel, &atoms, &gopts.elimination)
                });
                let mut lines = Vec::new();
                for (vc, res) in vcs.iter().zip(results) {
                    let res = res?;
                    lines.push(format!("{}: {}", vc.name, res));
                    self.note_steps(Some(&vc.name), &res);
                }
                Ok(ResultBody::Block(lines))
            }
        }
    }
}

fn run_task(task: &Task, prep: Prepared, opts: &RunOptions) -> TaskReport {
    let start = Instant::now();
    let mut exec = Exec { task, run: opts, prep, extra: Vec::new() };
    let outcome = exec.run();
    let runtime = start.elapsed().as_secs_f64();
    let (result, failed) = match outcome {
        Ok(r) => (r, false),
        Err(e) => (ResultBody::Line(format!("Error: {e}")), true),
    };
    TaskReport { name: task.name.clone(), runtime, result, extra: exec.extra, failed }
}

/// Run the tasks of a parsed file. Errors are parse-stage errors (unknown
/// task names, unparsable assumptions or seed terms); engine errors are
/// recorded in the report.
pub fn run_task_file(tf: &TaskFile, opts: &RunOptions) -> Result<Report> {
    let selected: Vec<&Task> = match &opts.tasks {
        None => tf.tasks.iter().collect(),
        Some(names) => {
            for n in names {
                if !tf.tasks.iter().any(|t| &t.name == n) {
                    return Err(Error::Task(format!("no task named `{n}`")));
                }
            }
            tf.tasks.iter().filter(|t| names.contains(&t.name)).collect()
        }
    };
    let jobs = selected.iter().map(|t| Ok((*t, prepare(t, opts)?))).collect::<Result<Vec<_>>>()?;
    let tasks = par::map(opts.parallel, &jobs, |(t, p)| run_task(t, p.clone(), opts));
    let date = chrono::Local::now().format("%Y-%m-%d %H:%M:%S").to_string();
    Ok(Report { date, tasks, warnings: tf.warnings.clone() })
}

/// Outcome of running a task file from disk.
pub struct RunOutcome {
    /// Rendered report (empty on parse errors).
    pub report: String,
    /// Warnings and errors for standard error.
    pub diagnostics: Vec<String>,
    pub exit_code: i32,
}

/// Read, parse and run a task file.
pub fn run_path(path: &Path, opts: &RunOptions) -> RunOutcome {
    let fail = |msg: String, code: i32| RunOutcome { report: String::new(), diagnostics: vec![msg], exit_code: code };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(format!("error: {}: {e}", path.display()), 2),
    };
    let tf = match parse_task_file(&text, path.parent()) {
        Ok(tf) => tf,
        Err(e) => return fail(format!("error: {}: {e}", path.display()), 2),
    };
    let mut diagnostics: Vec<String> = tf.warnings.iter().map(|w| format!("warning: {w}")).collect();
    match run_task_file(&tf, opts) {
        Ok(report) => {
            for t in report.tasks.iter().filter(|t| t.failed) {
                diagnostics.push(format!("error: task `{}` failed", t.name));
            }
            RunOutcome { report: report.render(), diagnostics, exit_code: report.exit_code() }
        }
        Err(e) => {
            diagnostics.push(format!("error: {}: {e}", path.display()));
            RunOutcome { report: String::new(), diagnostics, exit_code: 2 }
        }
    }
}
