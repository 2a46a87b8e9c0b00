//! Optimal forward search over knowledge-base states.
//!
//! Costs are unit, so breadth-first search is optimal. Search proceeds layer
//! by layer: successors of a whole layer are generated in parallel, then
//! merged sequentially in (parent, action name) order, so state numbering and
//! the returned plans are the same for every thread count. All shortest-path
//! parents are kept, which lets the search enumerate every optimal plan.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::action::{progress, progress_seq, trace_seq, Action, ActionKind, ActionLibrary, ChangeKind, SensingResult, Step, Undefined};
use crate::kb::KnowledgeBase;
use crate::logic::CanonicalRml;

pub const DEFAULT_MAX_PLANS: usize = 64;
pub const DEFAULT_MAX_NODES: usize = 1_000_000;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MepProblem {
    pub actions: ActionLibrary,
    pub init: KnowledgeBase,
    pub goal: Vec<CanonicalRml>,
    /// Result of each sensing action, known to the planning agent.
    pub outcomes: BTreeMap<String, SensingResult>,
}

impl MepProblem {
    pub fn step_for(&self, a: &Action) -> Result<Step, PlanError> {
        match a.kind {
            ActionKind::Deterministic { .. } => Ok(Step::new(&a.name)),
            ActionKind::Sensing { .. } => self
                .outcomes
                .get(&a.name)
                .map(|&o| Step::sensed(&a.name, o))
                .ok_or_else(|| PlanError::MissingOutcome(a.name.clone())),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Plan {
    pub steps: Vec<Step>,
}

impl Plan {
    pub fn new(steps: Vec<Step>) -> Self {
        Plan { steps }
    }

    pub fn cost(&self) -> usize {
        self.steps.len()
    }

    pub fn step_names(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.to_string()).collect()
    }
}

/// Serialized as the list of rendered steps.
impl Serialize for Plan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.steps.iter().map(|x| x.to_string()))
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.step_names().join(", "))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub all_optimal: bool,
    pub max_plans: usize,
    pub max_nodes: usize,
    /// Worker threads for successor generation; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { all_optimal: false, max_plans: DEFAULT_MAX_PLANS, max_nodes: DEFAULT_MAX_NODES, threads: None }
    }
}

impl SearchConfig {
    pub fn all_optimal() -> Self {
        SearchConfig { all_optimal: true, ..Default::default() }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum PlanError {
    #[error("no solution")]
    NoSolution { expanded: usize },
    #[error("search budget of {max_nodes} states exceeded")]
    BudgetExceeded { max_nodes: usize },
    #[error("sensing action `{0}` has no declared result")]
    MissingOutcome(String),
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Solution {
    /// Optimal plans in lexicographic order of step names.
    pub plans: Vec<Plan>,
    /// More optimal plans exist than were returned.
    pub truncated: bool,
    /// Distinct states generated.
    pub states: usize,
}

impl Solution {
    pub fn cost(&self) -> usize {
        self.plans[0].cost()
    }

    pub fn first(&self) -> &Plan {
        &self.plans[0]
    }
}

struct Node {
    kb: KnowledgeBase,
    depth: usize,
    /// Shortest-path incoming edges: (parent, action index).
    parents: Vec<(usize, usize)>,
}

pub fn solve_optimal(p: &MepProblem, cfg: &SearchConfig) -> Result<Solution, PlanError> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PlanError::ThreadPool(e.to_string()))?
            .install(|| search(p, cfg)),
        None => search(p, cfg),
    }
}

fn search(p: &MepProblem, cfg: &SearchConfig) -> Result<Solution, PlanError> {
    let actions: Vec<&Action> = p.actions.iter().collect();
    let steps: Vec<Step> = actions.iter().map(|a| p.step_for(a)).collect::<Result<_, _>>()?;

    let mut nodes = vec![Node { kb: p.init.clone(), depth: 0, parents: Vec::new() }];
    let mut index: HashMap<KnowledgeBase, usize> = HashMap::new();
    index.insert(p.init.clone(), 0);
    if p.init.entails_all(&p.goal) {
        return Ok(Solution { plans: vec![Plan::default()], truncated: false, states: 1 });
    }

    let mut layer: Vec<usize> = vec![0];
    let mut depth = 0;
    while !layer.is_empty() {
        let expanded: Vec<Vec<(usize, KnowledgeBase, bool)>> = layer
            .par_iter()
            .map(|&n| {
                let kb = &nodes[n].kb;
                actions
                    .iter()
                    .enumerate()
                    .filter_map(|(ai, a)| {
                        let next = progress(kb, a, steps[ai].outcome).ok()?;
                        let goal = next.entails_all(&p.goal);
                        Some((ai, next, goal))
                    })
                    .collect()
            })
            .collect();

        depth += 1;
        let mut next_layer = Vec::new();
        let mut goals = Vec::new();
        for (&parent, succ) in layer.iter().zip(expanded) {
            for (ai, kb, is_goal) in succ {
                match index.get(&kb) {
                    Some(&id) => {
                        if nodes[id].depth == depth && !nodes[id].parents.contains(&(parent, ai)) {
                            nodes[id].parents.push((parent, ai));
                        }
                    }
                    None => {
                        if nodes.len() >= cfg.max_nodes {
                            return Err(PlanError::BudgetExceeded { max_nodes: cfg.max_nodes });
                        }
                        let id = nodes.len();
                        index.insert(kb.clone(), id);
                        nodes.push(Node { kb, depth, parents: vec![(parent, ai)] });
                        next_layer.push(id);
                        if is_goal {
                            goals.push(id);
                        }
                    }
                }
            }
        }
        if !goals.is_empty() {
            let (plans, truncated) = extract(&nodes, &goals, &actions, &steps, cfg);
            return Ok(Solution { plans, truncated, states: nodes.len() });
        }
        layer = next_layer;
    }
    Err(PlanError::NoSolution { expanded: nodes.len() })
}

/// Enumerates optimal plans in lexicographic order by walking forward over
/// the shortest-path DAG restricted to states that reach a goal.
fn extract(
    nodes: &[Node],
    goals: &[usize],
    actions: &[&Action],
    steps: &[Step],
    cfg: &SearchConfig,
) -> (Vec<Plan>, bool) {
    let mut useful = vec![false; nodes.len()];
    let mut stack: Vec<usize> = goals.to_vec();
    for &g in goals {
        useful[g] = true;
    }
    while let Some(n) = stack.pop() {
        for &(par, _) in &nodes[n].parents {
            if !useful[par] {
                useful[par] = true;
                stack.push(par);
            }
        }
    }
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for (id, node) in nodes.iter().enumerate() {
        if useful[id] {
            for &(par, ai) in &node.parents {
                children[par].push((ai, id));
            }
        }
    }
    for c in &mut children {
        c.sort_by(|a, b| actions[a.0].name.cmp(&actions[b.0].name));
    }
    let is_goal: Vec<bool> = {
        let mut v = vec![false; nodes.len()];
        for &g in goals {
            v[g] = true;
        }
        v
    };
    let cap = if cfg.all_optimal { cfg.max_plans.max(1) } else { 1 };
    let mut plans = Vec::new();
    let mut truncated = false;
    let mut path = Vec::new();
    walk(0, &children, &is_goal, steps, &mut path, &mut plans, cap, &mut truncated);
    (plans, truncated && cfg.all_optimal)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    n: usize,
    children: &[Vec<(usize, usize)>],
    is_goal: &[bool],
    steps: &[Step],
    path: &mut Vec<Step>,
    plans: &mut Vec<Plan>,
    cap: usize,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    if is_goal[n] {
        if plans.len() == cap {
            *truncated = true;
            return;
        }
        plans.push(Plan::new(path.clone()));
        return;
    }
    for &(ai, child) in &children[n] {
        path.push(steps[ai].clone());
        walk(child, children, is_goal, steps, path, plans, cap, truncated);
        path.pop();
        if *truncated {
            return;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum InvalidPlan {
    #[error(transparent)]
    Step(#[from] Undefined),
    #[error("goal conjunct {0} not entailed after the last step")]
    GoalNotReached(CanonicalRml),
}

pub fn validate_plan(p: &MepProblem, plan: &Plan) -> Result<KnowledgeBase, InvalidPlan> {
    let end = progress_seq(&p.init, &p.actions, &plan.steps)?;
    match end.first_unentailed(&p.goal) {
        Some(r) => Err(InvalidPlan::GoalNotReached(r.clone())),
        None => Ok(end),
    }
}

/// One rendered trace line per state, starting with the initial KB.
pub fn trace_plan(p: &MepProblem, plan: &Plan) -> Result<Vec<TraceLine>, Undefined> {
    let mut out = vec![TraceLine { step: None, change: None, kb: p.init.render_lines() }];
    for ((kind, kb), step) in trace_seq(&p.init, &p.actions, &plan.steps)?.into_iter().zip(&plan.steps) {
        out.push(TraceLine { step: Some(step.to_string()), change: Some(kind), kb: kb.render_lines() });
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TraceLine {
    pub step: Option<String>,
    pub change: Option<ChangeKind>,
    pub kb: Vec<String>,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.step, self.change) {
            (Some(s), Some(c)) => write!(f, "{s} ({c}): {{{}}}", self.kb.join(", ")),
            _ => write!(f, "init: {{{}}}", self.kb.join(", ")),
        }
    }
}
