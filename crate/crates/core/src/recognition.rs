//! Goal recognition by planning.
//!
//! Observed actions are compiled into the domain with fresh marker atoms so
//! the planner can be asked for the cheapest plan that embeds the
//! observations and the cheapest plan that avoids them. The cost gap between
//! the two gives each goal a likelihood, and Bayes with a uniform prior gives
//! the posterior.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::action::{progress_step, ActionKind, ActionLibrary, ConditionalEffect, Step};
use crate::empathy::{projected_problem, EmpProblem};
use crate::kb::KnowledgeBase;
use crate::logic::{Atom, CanonicalRml, Literal, Vocabulary};
use crate::planner::{solve_optimal, validate_plan, MepProblem, Plan, PlanError, SearchConfig};
use crate::projection::ProjectionError;

pub const DEFAULT_BETA: f64 = 1.0;

/// An observed action, a condition on the state after it, or both.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Observation {
    pub action: Option<String>,
    pub condition: Vec<CanonicalRml>,
}

impl Observation {
    pub fn action(name: impl Into<String>) -> Self {
        Observation { action: Some(name.into()), condition: Vec::new() }
    }
}

#[derive(Clone, PartialEq, Debug, Error)]
pub enum RecognitionError {
    #[error("action `{0}` is observed more than once")]
    DuplicateObservedAction(String),
    #[error("observed action `{0}` is not in the domain")]
    UnknownAction(String),
    #[error("no goal is reachable with or without the observations")]
    NoGoalFeasible,
    #[error("no goal is consistent with the observations")]
    NoConsistentGoal,
    #[error("beta must be a positive finite number, got {0}")]
    BadBeta(f64),
    #[error("at least one goal is required")]
    NoGoals,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// Greedy earliest matching of observations against a plan's steps.
///
/// Returns the 1-based step index matched by each observation. An
/// observation without an action may match index 0, the initial state.
pub fn satisfies(plan: &Plan, obs: &[Observation], init: &KnowledgeBase, lib: &ActionLibrary) -> Option<Vec<usize>> {
    let mut states = vec![init.clone()];
    for step in &plan.steps {
        let next = progress_step(states.last().expect("non-empty"), lib, step).ok()?.0;
        states.push(next);
    }
    let mut out = Vec::with_capacity(obs.len());
    let mut from = 0usize;
    for o in obs {
        let start = if o.action.is_some() { from.max(1) } else { from };
        let hit = (start..states.len()).find(|&k| {
            let action_ok = match &o.action {
                Some(a) => plan.steps[k - 1].action == *a,
                None => true,
            };
            action_ok && states[k].entails_all(&o.condition)
        })?;
        out.push(hit);
        from = hit + 1;
    }
    Some(out)
}

/// The marker atoms added by [`compile_observations`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ObservationAtoms {
    pub start: Atom,
    pub per_action: Vec<Atom>,
    pub last: Atom,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Compiled {
    pub constrained: MepProblem,
    pub complement: MepProblem,
    pub atoms: ObservationAtoms,
}

fn fresh_prefix(vocab: &Vocabulary) -> String {
    let mut prefix = String::from("__obs_");
    while vocab.atoms.iter().any(|a| a.as_str().starts_with(&prefix)) {
        prefix.insert(0, '_');
    }
    prefix
}

/// Compiles an action-only observation sequence into the domain.
///
/// The j-th observed action needs the marker of observation j-1 (the start
/// marker for the first) and sets its own marker; the last one also sets the
/// `last` marker. Markers start false except the start marker.
pub fn compile_observations(p: &MepProblem, vocab: &Vocabulary, obs: &[String]) -> Result<Compiled, RecognitionError> {
    let mut seen = BTreeSet::new();
    for a in obs {
        if p.actions.get(a).is_none() {
            return Err(RecognitionError::UnknownAction(a.clone()));
        }
        if !seen.insert(a) {
            return Err(RecognitionError::DuplicateObservedAction(a.clone()));
        }
    }
    let prefix = fresh_prefix(vocab);
    let start = Atom::new(format!("{prefix}0"));
    let last = Atom::new(format!("{prefix}last"));
    let per_action: Vec<Atom> = obs.iter().map(|a| Atom::new(format!("{prefix}{a}"))).collect();
    let pos = |a: &Atom| CanonicalRml::literal(Literal::pos(a.clone()));
    let neg = |a: &Atom| CanonicalRml::literal(Literal::neg(a.clone()));

    let mut actions = p.actions.clone();
    for (j, name) in obs.iter().enumerate() {
        let gate = if j == 0 { &start } else { &per_action[j - 1] };
        let mut marks = vec![pos(&per_action[j])];
        if j + 1 == obs.len() {
            marks.push(pos(&last));
        }
        let mut a = actions.get(name).expect("checked above").clone();
        a.pre.push(pos(gate));
        match &mut a.kind {
            ActionKind::Deterministic { effects } => {
                effects.push(ConditionalEffect { condition: Vec::new(), effect: marks });
            }
            ActionKind::Sensing { pos: sp, neg: sn } => {
                sp.extend(marks.iter().cloned());
                sn.extend(marks);
            }
        }
        actions = actions.without(name);
        actions.insert(a).expect("replacing an existing action");
    }

    let mut init = p.init.update(&[pos(&start)]);
    init = init.update(&per_action.iter().map(neg).collect::<Vec<_>>());
    if obs.is_empty() {
        // Nothing to embed: the constrained problem is the original one.
        init = init.update(&[pos(&last)]);
    } else {
        init = init.update(&[neg(&last)]);
    }
    let mut constrained = MepProblem { actions: actions.clone(), init: init.clone(), goal: p.goal.clone(), outcomes: p.outcomes.clone() };
    constrained.goal.push(pos(&last));
    let mut complement = MepProblem { actions, init, goal: p.goal.clone(), outcomes: p.outcomes.clone() };
    complement.goal.push(neg(&last));
    Ok(Compiled { constrained, complement, atoms: ObservationAtoms { start, per_action, last } })
}

/// `1 / (1 + exp(beta * delta))`, which is exactly 0.5 at zero and handles
/// infinite gaps.
pub fn likelihood(delta: f64, beta: f64) -> f64 {
    1.0 / (1.0 + (beta * delta).exp())
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct GoalScore {
    pub name: String,
    pub constrained_cost: Option<usize>,
    pub complement_cost: Option<usize>,
    /// Infinite when one side is unsolvable; NaN when both are.
    pub delta: f64,
    pub likelihood: f64,
    pub posterior: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct GoalPosterior {
    pub beta: f64,
    pub prior: f64,
    pub goals: Vec<GoalScore>,
}

impl GoalPosterior {
    /// Goal indices by decreasing posterior, ties by name.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.goals.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ga, gb) = (&self.goals[a], &self.goals[b]);
            gb.posterior.total_cmp(&ga.posterior).then_with(|| ga.name.cmp(&gb.name))
        });
        idx
    }
}

/// Whose model the goal posterior is computed in.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    /// The observer's own model of the world.
    Observer,
    /// The actor's model as projected by the observer: the actor is assumed
    /// to act rationally with respect to what it believes.
    #[default]
    Actor,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmprProblem {
    pub emp: EmpProblem,
    pub goals: Vec<(String, Vec<CanonicalRml>)>,
    pub observations: Vec<String>,
}

impl EmprProblem {
    fn for_goal(&self, base: &MepProblem, goal: &[CanonicalRml]) -> MepProblem {
        MepProblem { goal: goal.to_vec(), ..base.clone() }
    }

    fn base(&self, perspective: Perspective) -> Result<MepProblem, RecognitionError> {
        Ok(match perspective {
            Perspective::Observer => self.emp.problem.clone(),
            Perspective::Actor => projected_problem(&self.emp)?,
        })
    }
}

fn cost(r: Result<crate::planner::Solution, PlanError>) -> Result<Option<usize>, PlanError> {
    match r {
        Ok(s) => Ok(Some(s.cost())),
        Err(PlanError::NoSolution { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn posterior(
    r: &EmprProblem,
    beta: f64,
    perspective: Perspective,
    cfg: &SearchConfig,
) -> Result<GoalPosterior, RecognitionError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(RecognitionError::BadBeta(beta));
    }
    if r.goals.is_empty() {
        return Err(RecognitionError::NoGoals);
    }
    let base = r.base(perspective)?;
    let cfg = SearchConfig { all_optimal: false, ..*cfg };
    let costs: Vec<(Option<usize>, Option<usize>)> = r
        .goals
        .par_iter()
        .map(|(_, g)| {
            let c = compile_observations(&r.for_goal(&base, g), &r.emp.vocab, &r.observations)?;
            Ok((cost(solve_optimal(&c.constrained, &cfg))?, cost(solve_optimal(&c.complement, &cfg))?))
        })
        .collect::<Result<_, RecognitionError>>()?;
    if costs.iter().all(|c| *c == (None, None)) {
        return Err(RecognitionError::NoGoalFeasible);
    }
    let prior = 1.0 / r.goals.len() as f64;
    let mut goals: Vec<GoalScore> = r
        .goals
        .iter()
        .zip(costs)
        .map(|((name, _), (c, n))| {
            let delta = match (c, n) {
                (Some(c), Some(n)) => c as f64 - n as f64,
                (None, Some(_)) => f64::INFINITY,
                (Some(_), None) => f64::NEG_INFINITY,
                (None, None) => f64::NAN,
            };
            let l = if delta.is_nan() { 0.0 } else { likelihood(delta, beta) };
            GoalScore { name: name.clone(), constrained_cost: c, complement_cost: n, delta, likelihood: l, posterior: 0.0 }
        })
        .collect();
    let z: f64 = goals.iter().map(|g| g.likelihood * prior).sum();
    if z <= 0.0 {
        return Err(RecognitionError::NoConsistentGoal);
    }
    for g in &mut goals {
        g.posterior = g.likelihood * prior / z;
    }
    Ok(GoalPosterior { beta, prior, goals })
}

#[derive(Clone, PartialEq, Debug)]
pub struct EmprSolution {
    pub posterior: GoalPosterior,
    pub chosen: String,
    pub plan: Plan,
    /// Step index matched by each observation.
    pub matching: Vec<usize>,
}

/// Ranks goals by posterior and returns an optimal observation-embedding
/// plan, in the observer's model, for the best goal that admits one.
pub fn solve_empr(
    r: &EmprProblem,
    beta: f64,
    perspective: Perspective,
    cfg: &SearchConfig,
) -> Result<EmprSolution, RecognitionError> {
    let post = posterior(r, beta, perspective, cfg)?;
    let observed: Vec<Observation> = r.observations.iter().map(Observation::action).collect();
    let cfg = SearchConfig { all_optimal: false, ..*cfg };
    for i in post.ranking() {
        if post.goals[i].posterior <= 0.0 {
            break;
        }
        let (name, goal) = &r.goals[i];
        let base = r.for_goal(&r.emp.problem, goal);
        let c = compile_observations(&base, &r.emp.vocab, &r.observations)?;
        let plan = match solve_optimal(&c.constrained, &cfg) {
            Ok(s) => s.first().clone(),
            Err(PlanError::NoSolution { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        debug_assert!(validate_plan(&base, &plan).is_ok());
        let matching = satisfies(&plan, &observed, &base.init, &base.actions)
            .expect("compiled plans embed the observations");
        return Ok(EmprSolution { posterior: post, chosen: name.clone(), plan, matching });
    }
    Err(RecognitionError::NoConsistentGoal)
}

/// Whether `steps` is a valid plan of `p` that satisfies the observations.
pub fn explains(p: &MepProblem, steps: &[Step], obs: &[Observation]) -> bool {
    let plan = Plan::new(steps.to_vec());
    validate_plan(p, &plan).is_ok() && satisfies(&plan, obs, &p.init, &p.actions).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::logic::{Agent, Formula};

    fn lib() -> ActionLibrary {
        let mk = |n: &str| Action::deterministic(n, "act", &Formula::top(), &[], 2).unwrap();
        ActionLibrary::with_actions(vec![Agent::new("act")], ["a", "b", "c"].map(mk)).unwrap()
    }

    fn plan(names: &[&str]) -> Plan {
        Plan::new(names.iter().map(|n| Step::new(*n)).collect())
    }

    #[test]
    fn satisfies_examples() {
        let kb = KnowledgeBase::default();
        assert_eq!(satisfies(&plan(&["a"]), &[], &kb, &lib()), Some(vec![]));
        let obs = [Observation::action("a"), Observation::action("c")];
        assert_eq!(satisfies(&plan(&["a", "b", "c"]), &obs, &kb, &lib()), Some(vec![1, 3]));
        let obs = [Observation::action("a"), Observation::action("b")];
        assert_eq!(satisfies(&plan(&["b", "a"]), &obs, &kb, &lib()), None);
    }

    #[test]
    fn likelihood_shape() {
        assert_eq!(likelihood(0.0, 1.0), 0.5);
        assert_eq!(likelihood(f64::INFINITY, 1.0), 0.0);
        assert_eq!(likelihood(f64::NEG_INFINITY, 1.0), 1.0);
        for beta in [0.5, 1.0, 2.0, 4.0] {
            assert!(likelihood(1.0, beta) > likelihood(2.0, beta));
        }
        assert!(likelihood(1.0, 2.0) < likelihood(1.0, 1.0));
    }

    #[test]
    fn compilation_shape() {
        let p = MepProblem {
            actions: lib(),
            init: KnowledgeBase::default(),
            goal: vec![],
            outcomes: Default::default(),
        };
        let v = Vocabulary::new(["act"], ["p"]);
        let c = compile_observations(&p, &v, &["a".into(), "b".into()]).unwrap();
        let b = c.constrained.actions.get("b").unwrap();
        assert!(b.pre.contains(&CanonicalRml::literal(Literal::pos(c.atoms.per_action[0].clone()))));
        let a = c.constrained.actions.get("a").unwrap();
        let ActionKind::Deterministic { effects } = &a.kind else { unreachable!() };
        assert!(!effects[0].effect.contains(&CanonicalRml::literal(Literal::pos(c.atoms.last.clone()))));
        assert!(matches!(
            compile_observations(&p, &v, &["a".into(), "a".into()]),
            Err(RecognitionError::DuplicateObservedAction(_))
        ));
        assert!(c.constrained.init.contains(&CanonicalRml::literal(Literal::pos(c.atoms.start.clone()))));
    }
}
