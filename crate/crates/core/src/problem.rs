//! Turning a parsed problem file into planner inputs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::action::{Action, ActionKind, ActionLibrary, ConditionalEffect, SensingResult};
use crate::empathy::{ActorGroundTruth, EmpProblem};
use crate::kb::{KnowledgeBase, DEFAULT_CLOSURE_BUDGET, DEFAULT_DEPTH};
use crate::logic::{to_canonical, Agent, CanonicalRml, Formula, Vocabulary};
use crate::planner::MepProblem;
use crate::recognition::{EmprProblem, DEFAULT_BETA};
use crate::syntax::{lint, parse_problem, ActionBody, ActionDecl, Config, Diagnostic, EffectDecl, ParseError, ProblemFile, Severity};

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Parse(ParseError),
    #[error("{} error(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
    #[error("the problem has no `goal`")]
    NoGoal,
    #[error("the problem has no `goals` for recognition")]
    NoGoals,
    #[error("cannot tell observer from actor: declare two agents or set :observer and :actor")]
    Roles,
}

/// A checked problem.
#[derive(Clone, PartialEq, Debug)]
pub struct Problem {
    pub vocab: Vocabulary,
    pub actions: ActionLibrary,
    pub init: KnowledgeBase,
    pub goal: Option<Vec<CanonicalRml>>,
    /// Recognition goals with their display names.
    pub goals: Vec<(String, Vec<CanonicalRml>)>,
    pub observations: Vec<String>,
    pub outcomes: BTreeMap<String, SensingResult>,
    pub depth: usize,
    pub beta: f64,
    pub observer: Option<Agent>,
    pub actor: Option<Agent>,
    pub warnings: Vec<Diagnostic>,
}

fn canon(f: &Formula, depth: usize) -> Vec<CanonicalRml> {
    to_canonical(f, depth).expect("lint rejects formulas outside the fragment")
}

impl Problem {
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let file = parse_problem(text).map_err(ProblemError::Parse)?;
        Problem::from_file(&file)
    }

    pub fn from_file(file: &ProblemFile) -> Result<Self, ProblemError> {
        let (errors, warnings): (Vec<_>, Vec<_>) =
            lint(file).into_iter().partition(|d| d.severity == Severity::Error);
        if !errors.is_empty() {
            return Err(ProblemError::Invalid(errors));
        }
        let depth = file.config.depth.unwrap_or(DEFAULT_DEPTH);
        let mut actions = ActionLibrary::new(file.agents.clone());
        for (name, decl) in &file.actions {
            let kind = match &decl.body {
                ActionBody::Deterministic(effects) => ActionKind::Deterministic {
                    effects: effects
                        .iter()
                        .map(|e| ConditionalEffect {
                            condition: e.condition.as_ref().map(|c| canon(c, depth)).unwrap_or_default(),
                            effect: canon(&e.effect, depth),
                        })
                        .collect(),
                },
                ActionBody::Sensing { pos, neg } => ActionKind::Sensing { pos: canon(pos, depth), neg: canon(neg, depth) },
            };
            actions
                .insert(Action { name: name.clone(), owner: decl.owner.clone(), pre: canon(&decl.pre, depth), kind })
                .expect("names are unique and owners declared");
        }
        let init = KnowledgeBase::from_formulas(&file.init, depth).expect("lint checks init consistency");
        let (observer, actor) = match (&file.config.observer, &file.config.actor) {
            (Some(o), Some(a)) => (Some(o.clone()), Some(a.clone())),
            (Some(o), None) => (Some(o.clone()), file.agents.iter().find(|x| *x != o).cloned()),
            (None, Some(a)) => (file.agents.iter().find(|x| *x != a).cloned(), Some(a.clone())),
            (None, None) => (file.agents.first().cloned(), file.agents.get(1).cloned()),
        };
        Ok(Problem {
            vocab: Vocabulary { agents: file.agents.clone(), atoms: file.atoms.clone() },
            actions,
            init,
            goal: file.goal.as_ref().map(|g| canon(g, depth)),
            goals: file.goals.iter().map(|g| (g.to_string(), canon(g, depth))).collect(),
            observations: file.observations.clone(),
            outcomes: file.outcomes.clone(),
            depth,
            beta: file.config.beta.unwrap_or(DEFAULT_BETA),
            observer,
            actor,
            warnings,
        })
    }

    pub fn mep(&self) -> Result<MepProblem, ProblemError> {
        let goal = self.goal.clone().ok_or(ProblemError::NoGoal)?;
        Ok(self.mep_with_goal(goal))
    }

    pub fn mep_with_goal(&self, goal: Vec<CanonicalRml>) -> MepProblem {
        MepProblem { actions: self.actions.clone(), init: self.init.clone(), goal, outcomes: self.outcomes.clone() }
    }

    fn roles(&self) -> Result<(Agent, Agent), ProblemError> {
        match (&self.observer, &self.actor) {
            (Some(o), Some(a)) if o != a => Ok((o.clone(), a.clone())),
            _ => Err(ProblemError::Roles),
        }
    }

    pub fn emp_for(&self, problem: MepProblem) -> Result<EmpProblem, ProblemError> {
        let (observer, actor) = self.roles()?;
        Ok(EmpProblem { vocab: self.vocab.clone(), problem, observer, actor, closure_budget: DEFAULT_CLOSURE_BUDGET })
    }

    pub fn emp(&self) -> Result<EmpProblem, ProblemError> {
        self.emp_for(self.mep()?)
    }

    pub fn empr(&self) -> Result<EmprProblem, ProblemError> {
        if self.goals.is_empty() {
            return Err(ProblemError::NoGoals);
        }
        Ok(EmprProblem {
            emp: self.emp_for(self.mep_with_goal(Vec::new()))?,
            goals: self.goals.clone(),
            observations: self.observations.clone(),
        })
    }

    /// This problem read as an actor's own model.
    pub fn as_ground_truth(&self) -> ActorGroundTruth {
        ActorGroundTruth { actions: self.actions.clone(), init: self.init.clone() }
    }
}

/// Writes a semantic problem back out as a problem file, e.g. after
/// projection. Init facts are listed one per line in sorted order.
pub fn to_problem_file(vocab: &Vocabulary, p: &MepProblem, depth: usize) -> ProblemFile {
    let actions = p
        .actions
        .iter()
        .map(|a| {
            let body = match &a.kind {
                ActionKind::Deterministic { effects } => ActionBody::Deterministic(
                    effects
                        .iter()
                        .map(|e| EffectDecl {
                            condition: (!e.condition.is_empty()).then(|| Formula::conjunction(&e.condition)),
                            effect: Formula::conjunction(&e.effect),
                        })
                        .collect(),
                ),
                ActionKind::Sensing { pos, neg } => {
                    ActionBody::Sensing { pos: Formula::conjunction(pos), neg: Formula::conjunction(neg) }
                }
            };
            (a.name.clone(), ActionDecl { owner: a.owner.clone(), pre: Formula::conjunction(&a.pre), body })
        })
        .collect();
    ProblemFile {
        agents: vocab.agents.clone(),
        atoms: vocab.atoms.clone(),
        actions,
        init: p.init.facts().iter().map(CanonicalRml::to_formula).collect(),
        goal: Some(Formula::conjunction(&p.goal)),
        outcomes: p.outcomes.iter().filter(|(k, _)| p.actions.get(k).is_some_and(|a| a.is_sensing())).map(|(k, v)| (k.clone(), *v)).collect(),
        config: Config { depth: Some(depth), ..Config::default() },
        ..ProblemFile::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_semantic_problem() {
        let p = Problem::parse(
            "(problem (agents obs act) (atoms p q)
              (action x :owner act :pre (B act p) :effect (and q (B act q)))
              (init (B act p)) (goal q) (goals q p))",
        )
        .unwrap();
        assert_eq!(p.actor, Some(Agent::new("act")));
        assert_eq!(p.mep().unwrap().goal.len(), 1);
        assert_eq!(p.goals.iter().map(|g| g.0.as_str()).collect::<Vec<_>>(), vec!["q", "p"]);
        let z = p.emp().unwrap();
        assert_eq!(z.observer, Agent::new("obs"));
    }

    #[test]
    fn rejects_lint_errors_and_missing_roles() {
        assert!(matches!(Problem::parse("(problem (agents a) (atoms p) (init q))"), Err(ProblemError::Invalid(_))));
        let p = Problem::parse("(problem (agents a) (atoms p) (goal p))").unwrap();
        assert_eq!(p.emp().unwrap_err(), ProblemError::Roles);
    }

    #[test]
    fn written_problem_reparses() {
        let p = Problem::parse(
            "(problem (agents obs act) (atoms p q)
              (action x :owner act :pre (B act p) :effect (when p (and q (B act q))))
              (sensing s :owner act :pos (B act q) :neg (B act (not q)))
              (init (B act p) p) (goal q) (outcome s pos))",
        )
        .unwrap();
        let f = to_problem_file(&p.vocab, &p.mep().unwrap(), p.depth);
        let text = crate::syntax::serialize_problem(&f);
        let q = Problem::parse(&text).unwrap();
        assert_eq!(q.actions, p.actions);
        assert_eq!(q.init, p.init);
        assert_eq!(q.goal, p.goal);
        assert_eq!(q.outcomes, p.outcomes);
    }
}
