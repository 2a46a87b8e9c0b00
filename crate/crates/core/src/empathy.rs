//! Empathetic planning, the sympathetic baseline, and the check that the
//! observer's projected view of the actor reproduces the actor's own optimal
//! plans.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::action::ActionLibrary;
use crate::kb::KnowledgeBase;
use crate::logic::{Agent, CanonicalRml, ModalStep, Vocabulary};
use crate::planner::{solve_optimal, MepProblem, Plan, PlanError, SearchConfig, Solution};
use crate::projection::{proj_actions, proj_kb, ProjectionError};

/// An observer-side planning problem for the actor's goal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmpProblem {
    pub vocab: Vocabulary,
    pub problem: MepProblem,
    pub observer: Agent,
    pub actor: Agent,
    pub closure_budget: u128,
}

/// The actor's own domain and beliefs, from the actor's perspective.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ActorGroundTruth {
    pub actions: ActionLibrary,
    pub init: KnowledgeBase,
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum EmpathyError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

pub fn solve_emp(z: &EmpProblem, cfg: &SearchConfig) -> Result<Plan, PlanError> {
    Ok(solve_optimal(&z.problem, cfg)?.first().clone())
}

/// The observer's KB with the actor assumed to share every root literal:
/// each root literal `l` overwrites whatever the actor was believed to hold
/// about it with `B_actor l`.
pub fn sympathize_kb(kb: &KnowledgeBase, actor: &Agent) -> KnowledgeBase {
    let shared: Vec<CanonicalRml> =
        kb.facts().iter().filter(|r| r.depth() == 0).map(|r| r.under(ModalStep::pos(actor.clone()))).collect();
    kb.update(&shared)
}

pub fn sympathetic_problem(z: &EmpProblem) -> MepProblem {
    MepProblem { init: sympathize_kb(&z.problem.init, &z.actor), ..z.problem.clone() }
}

pub fn solve_sympathetic(z: &EmpProblem, cfg: &SearchConfig) -> Result<Plan, PlanError> {
    Ok(solve_optimal(&sympathetic_problem(z), cfg)?.first().clone())
}

/// The actor's domain as the observer imagines it.
pub fn projected_problem(z: &EmpProblem) -> Result<MepProblem, ProjectionError> {
    Ok(MepProblem {
        actions: proj_actions(&z.problem.actions, &z.actor),
        init: proj_kb(&z.problem.init, &z.actor, &z.vocab, z.closure_budget)?,
        goal: z.problem.goal.clone(),
        outcomes: z.problem.outcomes.clone(),
    })
}

/// The actor's true problem, restricted to what the actor can do itself.
pub fn actor_problem(z: &EmpProblem, truth: &ActorGroundTruth) -> MepProblem {
    MepProblem {
        actions: truth.actions.owned_by(&z.actor),
        init: truth.init.clone(),
        goal: z.problem.goal.clone(),
        outcomes: z.problem.outcomes.clone(),
    }
}

/// The full actor domain including other agents' actions on the actor, used
/// to check whether a plan would run in the actor's true model.
pub fn actor_execution_problem(z: &EmpProblem, truth: &ActorGroundTruth) -> MepProblem {
    MepProblem { actions: truth.actions.clone(), ..actor_problem(z, truth) }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct EmpathyReport {
    pub pi_proj_star: Vec<Plan>,
    pub pi_act_star: Vec<Plan>,
    pub selectively_task_empathetic: bool,
    /// A plan in exactly one of the two sets.
    pub witness: Option<Plan>,
    /// Either plan set hit the enumeration cap, so equality is unknown.
    pub inconclusive: bool,
}

fn plan_set(r: Result<Solution, PlanError>) -> Result<(Vec<Plan>, bool), PlanError> {
    match r {
        Ok(s) => Ok((s.plans, s.truncated)),
        Err(PlanError::NoSolution { .. }) => Ok((Vec::new(), false)),
        Err(e) => Err(e),
    }
}

pub fn check_selective_task_empathy(
    z: &EmpProblem,
    truth: &ActorGroundTruth,
    cfg: &SearchConfig,
) -> Result<EmpathyReport, EmpathyError> {
    let all = SearchConfig { all_optimal: true, ..*cfg };
    let (proj, t1) = plan_set(solve_optimal(&projected_problem(z)?, &all))?;
    let (act, t2) = plan_set(solve_optimal(&actor_problem(z, truth), &all))?;
    let a: BTreeSet<&Plan> = proj.iter().collect();
    let b: BTreeSet<&Plan> = act.iter().collect();
    let witness = a.symmetric_difference(&b).min().map(|p| (*p).clone());
    Ok(EmpathyReport {
        selectively_task_empathetic: a == b,
        witness,
        inconclusive: t1 || t2,
        pi_proj_star: proj,
        pi_act_star: act,
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Dominance {
    pub emp_cost: Option<usize>,
    pub actor_cost: Option<usize>,
    pub selectively_task_empathetic: bool,
    /// `emp_cost <= actor_cost` whenever the empathy check passed.
    pub holds: bool,
}

pub fn assistive_dominance(z: &EmpProblem, truth: &ActorGroundTruth, cfg: &SearchConfig) -> Result<Dominance, EmpathyError> {
    let report = check_selective_task_empathy(z, truth, cfg)?;
    let emp_cost = match solve_optimal(&z.problem, cfg) {
        Ok(s) => Some(s.cost()),
        Err(PlanError::NoSolution { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let actor_cost = report.pi_act_star.first().map(Plan::cost);
    let empathetic = report.selectively_task_empathetic && !report.inconclusive;
    let holds = !empathetic
        || match (emp_cost, actor_cost) {
            (Some(e), Some(a)) => e <= a,
            (_, None) => true,
            (None, Some(_)) => false,
        };
    Ok(Dominance { emp_cost, actor_cost, selectively_task_empathetic: empathetic, holds })
}
