//! The `empath` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use empath_core::action::parse_steps;
use empath_core::empathy::{
    actor_execution_problem, actor_problem, assistive_dominance, check_selective_task_empathy, projected_problem,
    solve_emp, sympathetic_problem, EmpProblem, EmpathyError,
};
use empath_core::kripke::{find_countermodel, OracleBounds, OracleError, DEFAULT_MODEL_BUDGET};
use empath_core::logic::{to_canonical, Formula};
use empath_core::oracle_check::{grid_vocabulary, probe_larger_models, run_grid, GridBounds};
use empath_core::planner::{solve_optimal, trace_plan, validate_plan, PlanError, Solution};
use empath_core::problem::{to_problem_file, ProblemError};
use empath_core::recognition::{solve_empr, Perspective, RecognitionError};
use empath_core::syntax::{lint, parse_formula, parse_problem, serialize_problem, Diagnostic, ProblemFile};
use empath_core::{KnowledgeBase, MepProblem, Plan, Problem, SearchConfig};

pub mod output;

use output::*;

#[derive(Parser, Debug)]
#[command(name = "empath", version, about = "Empathetic epistemic planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Belief depth bound, overriding the file's `:depth`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=16))]
    pub depth: Option<u8>,
    /// Recognition rationality parameter, overriding the file's `:beta`.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Report every optimal plan, not just the first.
    #[arg(long, global = true)]
    pub all_optimal: bool,
    /// Search budget in expanded states.
    #[arg(long, global = true, env = "EMPATH_MAX_NODES", default_value_t = 1_000_000)]
    pub max_nodes: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Print the KB after every step to stderr.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for search (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerspectiveArg {
    Actor,
    Observer,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal plan for the file's goal in the observer's model.
    Plan { file: PathBuf },
    /// Empathetic plan: the observer plans toward the actor's goal.
    Empathize { file: PathBuf },
    /// Sympathetic baseline: the actor is assumed to share the observer's view.
    Sympathize { file: PathBuf },
    /// Empathetic, sympathetic and actor plans side by side.
    Compare {
        file: PathBuf,
        /// Actor ground-truth model (default: `<stem>.actor.eplan`).
        #[arg(long)]
        actor: Option<PathBuf>,
    },
    /// Goal posterior from the observed actions, and a plan for the best goal.
    Recognize {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = PerspectiveArg::Actor)]
        perspective: PerspectiveArg,
    },
    /// Compare projected optimal plans with the actor's true optimal plans.
    CheckEmpathy {
        file: PathBuf,
        #[arg(long)]
        actor: Option<PathBuf>,
    },
    /// Print the actor's domain as the observer imagines it.
    Project { file: PathBuf },
    /// Lint a problem file, and optionally check a plan such as `a,b:pos`.
    Validate {
        file: PathBuf,
        #[arg(long)]
        plan: Option<String>,
    },
    /// Cross-check KB reasoning against bounded Kripke models.
    OracleCheck(OracleArgs),
    /// Run the fixture corpus against its goldens.
    Scenarios {
        #[arg(long, default_value = "scenarios")]
        dir: PathBuf,
        /// Rewrite the goldens instead of comparing.
        #[arg(long)]
        regen: bool,
    },
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 2)]
    pub agents: usize,
    #[arg(long, default_value_t = 2)]
    pub atoms: usize,
    #[arg(long = "rml-depth", default_value_t = 2)]
    pub rml_depth: usize,
    #[arg(long, default_value_t = 2)]
    pub max_premises: usize,
    #[arg(long, default_value_t = 4)]
    pub max_worlds: usize,
    /// Random larger models checked for types missing from the bounded table.
    #[arg(long, default_value_t = 2000)]
    pub probes: usize,
    /// Emit the countermodel of every reported case that has one.
    #[arg(long)]
    pub dump_countermodel: bool,
    /// Check a single entailment instead of the grid: premise formulas.
    #[arg(long = "premise")]
    pub premises: Vec<String>,
    /// Conclusion for single-entailment mode.
    #[arg(long)]
    pub conclusion: Option<String>,
    /// Agents and atoms for single-entailment mode (default: those used).
    #[arg(long = "vocab-file")]
    pub vocab_file: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn negative(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        let code = match e {
            PlanError::NoSolution { .. } => 1,
            PlanError::BudgetExceeded { .. } => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<EmpathyError> for Failure {
    fn from(e: EmpathyError) -> Self {
        match e {
            EmpathyError::Plan(p) => p.into(),
            EmpathyError::Projection(p) => Failure { code: 3, message: p.to_string() },
        }
    }
}

impl From<RecognitionError> for Failure {
    fn from(e: RecognitionError) -> Self {
        match e {
            RecognitionError::Plan(p) => p.into(),
            RecognitionError::Projection(p) => Failure { code: 3, message: p.to_string() },
            RecognitionError::NoGoalFeasible | RecognitionError::NoConsistentGoal => Failure::negative(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = if matches!(e, OracleError::BudgetExceeded { .. }) { 3 } else { 2 };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<i32, Failure>;

struct Ctx<'a> {
    g: &'a Global,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn cfg(&self, all_optimal: bool) -> SearchConfig {
        SearchConfig {
            all_optimal: all_optimal || self.g.all_optimal,
            max_nodes: self.g.max_nodes,
            threads: self.g.threads,
            ..SearchConfig::default()
        }
    }

    fn emit<T: Serialize>(&mut self, value: &T, text: impl FnOnce() -> String) -> Result<(), Failure> {
        let s = match self.g.format {
            Format::Json => serde_json::to_string_pretty(value).expect("output records serialize"),
            Format::Text => text(),
        };
        writeln!(self.out, "{}", s.trim_end()).map_err(|e| Failure::usage(e.to_string()))
    }

    fn trace(&mut self, p: &MepProblem, plan: &Plan) {
        if !self.g.trace {
            return;
        }
        match trace_plan(p, plan) {
            Ok(lines) => {
                for l in lines {
                    let _ = writeln!(self.err, "{l}");
                }
            }
            Err(e) => {
                let _ = writeln!(self.err, "trace: {e}");
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_file(path: &Path, g: &Global) -> Result<ProblemFile, Failure> {
    let text = read(path)?;
    let mut file = parse_problem(&text).map_err(|e| Failure::usage(e.render(&text, &path.display().to_string())))?;
    if let Some(d) = g.depth {
        file.config.depth = Some(d as usize);
    }
    if let Some(b) = g.beta {
        if !(b.is_finite() && b > 0.0) {
            return Err(Failure::usage(format!("--beta must be a positive finite number, got {b}")));
        }
        file.config.beta = Some(b);
    }
    Ok(file)
}

fn render_diagnostics(path: &Path, ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n")
}

fn load(path: &Path, g: &Global, err: &mut dyn Write) -> Result<Problem, Failure> {
    let file = parse_file(path, g)?;
    let p = Problem::from_file(&file).map_err(|e| match e {
        ProblemError::Invalid(ds) => Failure::usage(render_diagnostics(path, &ds)),
        other => Failure::usage(format!("{}: {other}", path.display())),
    })?;
    if !p.warnings.is_empty() {
        let _ = writeln!(err, "{}", render_diagnostics(path, &p.warnings));
    }
    Ok(p)
}

fn emp(p: &Problem, path: &Path) -> Result<EmpProblem, Failure> {
    p.emp().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn actor_path(file: &Path, actor: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    if let Some(a) = actor {
        return Ok(a.clone());
    }
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let guess = file.with_file_name(format!("{stem}.actor.eplan"));
    if guess.exists() {
        Ok(guess)
    } else {
        Err(Failure::usage(format!("no actor model: pass --actor or provide {}", guess.display())))
    }
}

fn plan_text(p: &Plan) -> String {
    if p.steps.is_empty() {
        "(empty plan)".into()
    } else {
        steps(p).join(" ")
    }
}

fn opt_steps(s: &Option<Steps>) -> String {
    s.as_ref().map_or("none".into(), |s| if s.is_empty() { "(empty plan)".into() } else { s.join(" ") })
}

fn report_solution(ctx: &mut Ctx, p: &MepProblem, sol: &Solution, all: bool) -> Outcome {
    let first = sol.first();
    ctx.trace(p, first);
    let out = PlanOut {
        plan: steps(first),
        cost: sol.cost(),
        plans: all.then(|| sol.plans.iter().map(steps).collect()),
        truncated: all.then_some(sol.truncated),
        states: sol.states,
    };
    ctx.emit(&out, || {
        let mut s = String::new();
        if all {
            for plan in &sol.plans {
                let _ = writeln!(s, "{}", plan_text(plan));
            }
            if sol.truncated {
                let _ = writeln!(s, "(more optimal plans exist)");
            }
        } else {
            let _ = writeln!(s, "{}", plan_text(first));
        }
        let _ = write!(s, "cost {}", sol.cost());
        s
    })?;
    Ok(0)
}

fn solve_and_report(ctx: &mut Ctx, p: &MepProblem) -> Outcome {
    let cfg = ctx.cfg(false);
    let sol = solve_optimal(p, &cfg)?;
    report_solution(ctx, p, &sol, cfg.all_optimal)
}

fn compare_record(z: &EmpProblem, truth: &Problem, cfg: &SearchConfig) -> Result<CompareOut, Failure> {
    let truth = truth.as_ground_truth();
    let single = SearchConfig { all_optimal: false, ..*cfg };
    let optional = |r: Result<Plan, PlanError>| match r {
        Ok(p) => Ok(Some(p)),
        Err(PlanError::NoSolution { .. }) => Ok(None),
        Err(e) => Err(Failure::from(e)),
    };
    let emp = optional(solve_emp(z, &single))?;
    let sym_problem = sympathetic_problem(z);
    let sym = optional(solve_optimal(&sym_problem, &single).map(|s| s.first().clone()))?;
    let own = optional(solve_optimal(&actor_problem(z, &truth), &single).map(|s| s.first().clone()))?;
    let exec = actor_execution_problem(z, &truth);
    let runs = |p: &Option<Plan>| p.as_ref().is_some_and(|p| validate_plan(&exec, p).is_ok());
    Ok(CompareOut {
        costs: Costs {
            empathetic: emp.as_ref().map(Plan::cost),
            sympathetic: sym.as_ref().map(Plan::cost),
            actor_self: own.as_ref().map(Plan::cost),
        },
        executable_in_actor_model: Executable { empathetic: runs(&emp), sympathetic: runs(&sym) },
        empathetic_plan: emp.as_ref().map(steps),
        sympathetic_plan: sym.as_ref().map(steps),
        actor_self_plan: own.as_ref().map(steps),
    })
}

fn compare_text(c: &CompareOut) -> String {
    let cost = |c: Option<usize>| c.map_or("-".into(), |c| c.to_string());
    format!(
        "empathetic   {} (cost {}, runs for actor: {})\nsympathetic  {} (cost {}, runs for actor: {})\nactor alone  {} (cost {})",
        opt_steps(&c.empathetic_plan),
        cost(c.costs.empathetic),
        c.executable_in_actor_model.empathetic,
        opt_steps(&c.sympathetic_plan),
        cost(c.costs.sympathetic),
        c.executable_in_actor_model.sympathetic,
        opt_steps(&c.actor_self_plan),
        cost(c.costs.actor_self),
    )
}

fn check_record(z: &EmpProblem, truth: &Problem, cfg: &SearchConfig) -> Result<CheckOut, Failure> {
    let truth = truth.as_ground_truth();
    let r = check_selective_task_empathy(z, &truth, cfg)?;
    let d = assistive_dominance(z, &truth, cfg)?;
    Ok(CheckOut {
        selectively_task_empathetic: r.selectively_task_empathetic,
        inconclusive: r.inconclusive,
        witness: r.witness.as_ref().map(steps),
        projected_plans: r.pi_proj_star.iter().map(steps).collect(),
        actor_plans: r.pi_act_star.iter().map(steps).collect(),
        empathetic_cost: d.emp_cost,
        dominance_holds: d.holds,
    })
}

fn check_text(c: &CheckOut) -> String {
    let mut s = String::new();
    let verdict = if c.inconclusive {
        "inconclusive (plan enumeration truncated)"
    } else if c.selectively_task_empathetic {
        "selectively task-empathetic"
    } else {
        "NOT selectively task-empathetic"
    };
    let _ = writeln!(s, "{verdict}");
    for p in &c.projected_plans {
        let _ = writeln!(s, "  projected  {}", opt_steps(&Some(p.clone())));
    }
    for p in &c.actor_plans {
        let _ = writeln!(s, "  actor      {}", opt_steps(&Some(p.clone())));
    }
    if let Some(w) = &c.witness {
        let _ = writeln!(s, "witness: {}", opt_steps(&Some(w.clone())));
    }
    s
}

fn recognize_record(p: &Problem, perspective: Perspective, cfg: &SearchConfig) -> Result<RecognizeOut, Failure> {
    let r = p.empr().map_err(|e| Failure::usage(e.to_string()))?;
    let s = solve_empr(&r, p.beta, perspective, cfg)?;
    Ok(RecognizeOut {
        beta: s.posterior.beta,
        perspective: match perspective {
            Perspective::Actor => "actor".into(),
            Perspective::Observer => "observer".into(),
        },
        prior: s.posterior.prior,
        goals: s
            .posterior
            .goals
            .iter()
            .map(|g| GoalOut {
                name: g.name.clone(),
                constrained_cost: g.constrained_cost,
                complement_cost: g.complement_cost,
                delta: g.delta.into(),
                likelihood: g.likelihood,
                posterior: g.posterior,
            })
            .collect(),
        chosen: s.chosen.clone(),
        plan: steps(&s.plan),
        matching: s.matching.clone(),
    })
}

fn recognize_text(r: &RecognizeOut) -> String {
    let mut s = format!("{:<28} {:>8} {:>12} {:>10}\n", "goal", "delta", "likelihood", "posterior");
    let mut order: Vec<&GoalOut> = r.goals.iter().collect();
    order.sort_by(|a, b| b.posterior.total_cmp(&a.posterior).then_with(|| a.name.cmp(&b.name)));
    for g in order {
        let _ = writeln!(s, "{:<28} {:>8} {:>12.6} {:>10.6}", g.name, g.delta.to_string(), g.likelihood, g.posterior);
    }
    let _ = write!(s, "chosen {}: {}", r.chosen, opt_steps(&Some(r.plan.clone())));
    s
}

fn cmd_recognize(ctx: &mut Ctx, file: &Path, perspective: PerspectiveArg) -> Outcome {
    let p = load(file, ctx.g, ctx.err)?;
    let perspective = match perspective {
        PerspectiveArg::Actor => Perspective::Actor,
        PerspectiveArg::Observer => Perspective::Observer,
    };
    let r = recognize_record(&p, perspective, &ctx.cfg(false))?;
    ctx.emit(&r, || recognize_text(&r))?;
    Ok(0)
}

fn cmd_project(ctx: &mut Ctx, file: &Path) -> Outcome {
    let p = load(file, ctx.g, ctx.err)?;
    let z = p.emp_for(p.mep_with_goal(p.goal.clone().unwrap_or_default())).map_err(|e| Failure::usage(e.to_string()))?;
    let projected = projected_problem(&z).map_err(|e| Failure { code: 3, message: e.to_string() })?;
    let depth = p.depth.saturating_sub(1);
    let mut pf = to_problem_file(&p.vocab, &projected, depth);
    pf.config.observer = Some(z.observer.clone());
    pf.config.actor = Some(z.actor.clone());
    let text = serialize_problem(&pf);
    let out = ProjectOut { agent: z.actor.to_string(), depth, problem: text.clone() };
    ctx.emit(&out, || text)?;
    Ok(0)
}

fn cmd_validate(ctx: &mut Ctx, file: &Path, plan: &Option<String>) -> Outcome {
    let pf = parse_file(file, ctx.g)?;
    let ds = lint(&pf);
    let has_errors = ds.iter().any(|d| d.severity == empath_core::syntax::Severity::Error);
    let diagnostics: Vec<DiagnosticOut> = ds
        .iter()
        .map(|d| DiagnosticOut {
            severity: match d.severity {
                empath_core::syntax::Severity::Error => "error".into(),
                empath_core::syntax::Severity::Warning => "warning".into(),
            },
            line: d.span.line,
            column: d.span.column,
            message: d.message.clone(),
        })
        .collect();
    let mut code = if has_errors { 2 } else { 0 };
    let mut check = None;
    if let (Some(text), false) = (plan, has_errors) {
        let st = parse_steps(text).map_err(|e| Failure::usage(format!("--plan: {e}")))?;
        let p = Problem::from_file(&pf).map_err(|e| Failure::usage(e.to_string()))?;
        let mep = p.mep().map_err(|e| Failure::usage(e.to_string()))?;
        let plan = Plan::new(st);
        ctx.trace(&mep, &plan);
        let res = validate_plan(&mep, &plan);
        if res.is_err() {
            code = 1;
        }
        check = Some(PlanCheckOut { plan: steps(&plan), valid: res.is_ok(), error: res.err().map(|e| e.to_string()) });
    }
    let out = ValidateOut { diagnostics, plan: check };
    ctx.emit(&out, || {
        let mut s = render_diagnostics(file, &ds);
        if ds.is_empty() {
            s = format!("{}: ok", file.display());
        }
        if let Some(c) = &out.plan {
            let verdict = match &c.error {
                None => "plan valid".to_string(),
                Some(e) => format!("plan invalid: {e}"),
            };
            let _ = write!(s, "\n{verdict}");
        }
        s
    })?;
    Ok(code)
}

fn cmd_oracle(ctx: &mut Ctx, a: &OracleArgs) -> Outcome {
    let bounds = OracleBounds { max_worlds: a.max_worlds, budget: DEFAULT_MODEL_BUDGET };
    if !a.premises.is_empty() || a.conclusion.is_some() {
        return oracle_query(ctx, a, bounds);
    }
    if a.agents == 0 || a.atoms == 0 {
        return Err(Failure::usage("--agents and --atoms must be at least 1"));
    }
    let (grid, table) = run_grid(&GridBounds {
        agents: a.agents,
        atoms: a.atoms,
        depth: a.rml_depth,
        max_premises: a.max_premises,
        oracle: bounds,
    })?;
    let vocab = grid_vocabulary(a.agents, a.atoms);
    let probes = probe_larger_models(&table, &vocab, a.max_premises, ctx.g.seed, a.probes, (a.max_worlds + 1, a.max_worlds + 2));
    let mut countermodels = Vec::new();
    if a.dump_countermodel {
        for case in &grid.sound_violations {
            let idx = |s: &String| {
                let f = parse_formula(s).expect("rendered RMLs reparse");
                let r = to_canonical(&f, usize::MAX).expect("in fragment");
                table.index_of(&r[0]).expect("in universe")
            };
            let prem: Vec<usize> = case.premises.iter().map(idx).collect();
            if let Some(m) = table.countermodel(&prem, idx(&case.conclusion)) {
                countermodels.push(CountermodelOut { case: case.clone(), model: m.model.to_dump(Some(m.point)) });
            }
        }
    }
    let out = OracleOut { grid, probes, countermodels };
    let g = &out.grid;
    ctx.emit(&out, || {
        let mut s = format!(
            "{} agents, {} atoms, depth {}, premise sets of size <= {}, models <= {} worlds\n",
            g.agents, g.atoms, g.depth, g.max_premises, g.max_worlds
        );
        let _ = writeln!(s, "rmls {}  types {}  premise sets {} ({} inconsistent)", g.rmls, g.types, g.premise_sets, g.inconsistent_premise_sets);
        let _ = writeln!(s, "cases {}  oracle-entailed {}", g.cases, g.oracle_entailed);
        let _ = writeln!(s, "sound violations {}", g.sound_violations.len());
        let _ = writeln!(s, "incomplete cases {} ({:.4}%)", g.incomplete_cases.len(), 100.0 * g.incompleteness_rate);
        for c in g.incomplete_cases.iter().take(20) {
            let _ = writeln!(s, "  {{{}}} |= {}", c.premises.join(", "), c.conclusion);
        }
        let _ = writeln!(s, "consistency mismatches {}", g.consistency_mismatches.len());
        let pr = &out.probes;
        let _ = write!(
            s,
            "probes: {} random models of {}-{} worlds (seed {}): {} worlds satisfy a {}-RML combination unseen within the bound; {} worlds have a full type unseen within it",
            pr.models, pr.min_worlds, pr.max_worlds, pr.seed, pr.missed_combinations, pr.combination_size, pr.new_full_types
        );
        for c in &out.countermodels {
            let _ = write!(s, "\ncountermodel for {{{}}} |= {}:\n{}", c.case.premises.join(", "), c.case.conclusion, serde_json::to_string(&c.model).unwrap());
        }
        s
    })?;
    let bad = !g.sound_violations.is_empty() || !g.consistency_mismatches.is_empty() || out.probes.missed_combinations > 0;
    Ok(if bad { 1 } else { 0 })
}

fn oracle_query(ctx: &mut Ctx, a: &OracleArgs, bounds: OracleBounds) -> Outcome {
    let conclusion_text = a.conclusion.as_ref().ok_or_else(|| Failure::usage("--premise needs --conclusion"))?;
    let parse = |s: &str| parse_formula(s).map_err(|e| Failure::usage(e.render(s, "<formula>")));
    let premises: Vec<Formula> = a.premises.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
    let conclusion = parse(conclusion_text)?;
    let vocab = match &a.vocab_file {
        Some(path) => {
            let pf = parse_file(path, ctx.g)?;
            empath_core::Vocabulary { agents: pf.agents, atoms: pf.atoms }
        }
        None => {
            let (mut agents, mut atoms) = (Default::default(), Default::default());
            for f in premises.iter().chain([&conclusion]) {
                f.collect_agents(&mut agents);
                f.collect_atoms(&mut atoms);
            }
            empath_core::Vocabulary { agents: agents.into_iter().collect(), atoms: atoms.into_iter().collect() }
        }
    };
    let counter = find_countermodel(&premises, &conclusion, &vocab, bounds)?;
    let kb_entails = (|| {
        let kb = KnowledgeBase::from_formulas(&premises, usize::MAX).ok()?;
        kb.entails(&conclusion).ok()
    })();
    let out = QueryOut {
        premises: premises.iter().map(|f| f.to_string()).collect(),
        conclusion: conclusion.to_string(),
        max_worlds: bounds.max_worlds,
        oracle_entails: counter.is_none(),
        kb_entails,
        countermodel: if a.dump_countermodel { counter.as_ref().map(|m| m.model.to_dump(Some(m.point))) } else { None },
    };
    ctx.emit(&out, || {
        let mut s = format!(
            "oracle (<= {} worlds): {}\nknowledge base: {}",
            out.max_worlds,
            if out.oracle_entails { "entailed" } else { "not entailed" },
            match out.kb_entails {
                Some(true) => "entailed",
                Some(false) => "not entailed",
                None => "outside the fragment",
            }
        );
        if let Some(m) = &out.countermodel {
            let _ = write!(s, "\ncountermodel:\n{}", serde_json::to_string_pretty(m).unwrap());
        }
        s
    })?;
    let sound = !(out.kb_entails == Some(true) && !out.oracle_entails);
    Ok(if sound { 0 } else { 1 })
}

/// One fixture of the corpus, listed in `<dir>/fixtures.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureEntry {
    pub name: String,
    pub problem: String,
    pub actor: String,
    #[serde(default)]
    pub recognition: bool,
}

pub fn golden_for(dir: &Path, f: &FixtureEntry, g: &Global) -> Result<Golden, Failure> {
    let mut sink = std::io::sink();
    let p = load(&dir.join(&f.problem), g, &mut sink)?;
    let actor = load(&dir.join(&f.actor), g, &mut sink)?;
    let cfg = SearchConfig { max_nodes: g.max_nodes, threads: g.threads, ..SearchConfig::default() };
    let z = emp(&p, &dir.join(&f.problem))?;
    let compare = compare_record(&z, &actor, &cfg)?;
    let empathy = check_record(&z, &actor, &cfg)?;
    let recognition = if f.recognition { Some(recognize_record(&p, Perspective::Actor, &cfg)?) } else { None };
    Ok(Golden { name: f.name.clone(), problem: f.problem.clone(), actor: f.actor.clone(), compare, empathy, recognition })
}

pub fn golden_text(g: &Golden) -> String {
    serde_json::to_string_pretty(g).expect("goldens serialize") + "\n"
}

fn cmd_scenarios(ctx: &mut Ctx, dir: &Path, regen: bool) -> Outcome {
    let manifest = read(&dir.join("fixtures.json"))?;
    let entries: Vec<FixtureEntry> =
        serde_json::from_str(&manifest).map_err(|e| Failure::usage(format!("fixtures.json: {e}")))?;
    let goldens = dir.join("goldens");
    let mut statuses = Vec::new();
    for f in &entries {
        let text = golden_text(&golden_for(dir, f, ctx.g)?);
        let path = goldens.join(format!("{}.json", f.name));
        let status = if regen {
            std::fs::create_dir_all(&goldens).map_err(|e| Failure::usage(e.to_string()))?;
            std::fs::write(&path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            "written"
        } else {
            match std::fs::read_to_string(&path) {
                Ok(old) if old == text => "ok",
                Ok(_) => "mismatch",
                Err(_) => "missing",
            }
        };
        statuses.push(ScenarioStatus { name: f.name.clone(), status: status.into() });
    }
    let failed = statuses.iter().any(|s| s.status == "mismatch" || s.status == "missing");
    let out = ScenariosOut { fixtures: statuses };
    ctx.emit(&out, || out.fixtures.iter().map(|s| format!("{:<20} {}", s.name, s.status)).collect::<Vec<_>>().join("\n"))?;
    Ok(if failed { 1 } else { 0 })
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Outcome {
    match cmd {
        Command::Plan { file } => {
            let p = load(file, ctx.g, ctx.err)?;
            let mep = p.mep().map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            solve_and_report(ctx, &mep)
        }
        Command::Empathize { file } => {
            let p = load(file, ctx.g, ctx.err)?;
            let z = emp(&p, file)?;
            solve_and_report(ctx, &z.problem)
        }
        Command::Sympathize { file } => {
            let p = load(file, ctx.g, ctx.err)?;
            let z = emp(&p, file)?;
            solve_and_report(ctx, &sympathetic_problem(&z))
        }
        Command::Compare { file, actor } => {
            let p = load(file, ctx.g, ctx.err)?;
            let ap = actor_path(file, actor)?;
            let truth = load(&ap, ctx.g, ctx.err)?;
            let z = emp(&p, file)?;
            let c = compare_record(&z, &truth, &ctx.cfg(false))?;
            ctx.emit(&c, || compare_text(&c))?;
            Ok(if c.empathetic_plan.is_some() { 0 } else { 1 })
        }
        Command::CheckEmpathy { file, actor } => {
            let p = load(file, ctx.g, ctx.err)?;
            let truth = load(&actor_path(file, actor)?, ctx.g, ctx.err)?;
            let z = emp(&p, file)?;
            let c = check_record(&z, &truth, &ctx.cfg(false))?;
            ctx.emit(&c, || check_text(&c))?;
            Ok(if c.selectively_task_empathetic && !c.inconclusive { 0 } else { 1 })
        }
        Command::Recognize { file, perspective } => cmd_recognize(ctx, file, *perspective),
        Command::Project { file } => cmd_project(ctx, file),
        Command::Validate { file, plan } => cmd_validate(ctx, file, plan),
        Command::OracleCheck(a) => cmd_oracle(ctx, a),
        Command::Scenarios { dir, regen } => cmd_scenarios(ctx, dir, *regen),
    }
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if cli.global.threads == Some(0) {
        let _ = writeln!(err, "error: --threads must be at least 1");
        return 2;
    }
    let mut ctx = Ctx { g: &cli.global, out, err };
    match dispatch(&mut ctx, &cli.command) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "{}", f.message);
            f.code
        }
    }
}
