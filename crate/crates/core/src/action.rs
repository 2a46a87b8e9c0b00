//! Deterministic and sensing actions, and progression of knowledge bases
//! through them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::logic::{to_canonical, Agent, CanonicalRml, Formula, FragmentError};

/// A conjunction of RMLs; empty is true.
pub type Conjunction = Vec<CanonicalRml>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConditionalEffect {
    pub condition: Conjunction,
    pub effect: Conjunction,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ActionKind {
    Deterministic { effects: Vec<ConditionalEffect> },
    Sensing { pos: Conjunction, neg: Conjunction },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Action {
    pub name: String,
    pub owner: Agent,
    pub pre: Conjunction,
    pub kind: ActionKind,
}

impl Action {
    pub fn deterministic(
        name: impl Into<String>,
        owner: impl Into<Agent>,
        pre: &Formula,
        effects: &[(Formula, Formula)],
        depth: usize,
    ) -> Result<Self, FragmentError> {
        let effects = effects
            .iter()
            .map(|(c, e)| Ok(ConditionalEffect { condition: to_canonical(c, depth)?, effect: to_canonical(e, depth)? }))
            .collect::<Result<_, FragmentError>>()?;
        Ok(Action {
            name: name.into(),
            owner: owner.into(),
            pre: to_canonical(pre, depth)?,
            kind: ActionKind::Deterministic { effects },
        })
    }

    pub fn sensing(
        name: impl Into<String>,
        owner: impl Into<Agent>,
        pre: &Formula,
        pos: &Formula,
        neg: &Formula,
        depth: usize,
    ) -> Result<Self, FragmentError> {
        Ok(Action {
            name: name.into(),
            owner: owner.into(),
            pre: to_canonical(pre, depth)?,
            kind: ActionKind::Sensing { pos: to_canonical(pos, depth)?, neg: to_canonical(neg, depth)? },
        })
    }

    pub fn is_sensing(&self) -> bool {
        matches!(self.kind, ActionKind::Sensing { .. })
    }

    /// Every RML mentioned anywhere in the action.
    pub fn rmls(&self) -> impl Iterator<Item = &CanonicalRml> {
        let rest: Vec<&CanonicalRml> = match &self.kind {
            ActionKind::Deterministic { effects } => {
                effects.iter().flat_map(|e| e.condition.iter().chain(&e.effect)).collect()
            }
            ActionKind::Sensing { pos, neg } => pos.iter().chain(neg).collect(),
        };
        self.pre.iter().chain(rest)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum LibraryError {
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("action `{action}` is owned by unknown agent `{owner}`")]
    UnknownOwner { action: String, owner: Agent },
}

/// Actions by name, iterated in name order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ActionLibrary {
    agents: Vec<Agent>,
    actions: BTreeMap<String, Action>,
}

impl ActionLibrary {
    pub fn new(agents: Vec<Agent>) -> Self {
        ActionLibrary { agents, actions: BTreeMap::new() }
    }

    pub fn with_actions(agents: Vec<Agent>, actions: impl IntoIterator<Item = Action>) -> Result<Self, LibraryError> {
        let mut lib = ActionLibrary::new(agents);
        for a in actions {
            lib.insert(a)?;
        }
        Ok(lib)
    }

    pub fn insert(&mut self, a: Action) -> Result<(), LibraryError> {
        if !self.agents.contains(&a.owner) {
            return Err(LibraryError::UnknownOwner { action: a.name, owner: a.owner });
        }
        if self.actions.contains_key(&a.name) {
            return Err(LibraryError::DuplicateAction(a.name));
        }
        self.actions.insert(a.name.clone(), a);
        Ok(())
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn get(&self, name: &str) -> Option<&Action> {
        self.actions.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Action> {
        self.actions.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.actions.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Keeps only actions owned by `agent`.
    pub fn owned_by(&self, agent: &Agent) -> Self {
        ActionLibrary {
            agents: self.agents.clone(),
            actions: self.actions.iter().filter(|(_, a)| &a.owner == agent).map(|(k, a)| (k.clone(), a.clone())).collect(),
        }
    }

    pub fn without(&self, name: &str) -> Self {
        let mut lib = self.clone();
        lib.actions.remove(name);
        lib
    }

    pub(crate) fn map_actions(&self, f: impl Fn(&Action) -> Option<Action>) -> Self {
        ActionLibrary {
            agents: self.agents.clone(),
            actions: self.actions.values().filter_map(|a| f(a).map(|b| (b.name.clone(), b))).collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensingResult {
    Pos,
    Neg,
}

impl fmt::Display for SensingResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensingResult::Pos => "pos",
            SensingResult::Neg => "neg",
        })
    }
}

impl FromStr for SensingResult {
    type Err = StepParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" => Ok(SensingResult::Pos),
            "neg" => Ok(SensingResult::Neg),
            other => Err(StepParseError::BadOutcome(other.to_string())),
        }
    }
}

/// One plan step: an action, with its result if it is a sensing action.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Step {
    pub action: String,
    pub outcome: Option<SensingResult>,
}

impl Step {
    pub fn new(action: impl Into<String>) -> Self {
        Step { action: action.into(), outcome: None }
    }

    pub fn sensed(action: impl Into<String>, outcome: SensingResult) -> Self {
        Step { action: action.into(), outcome: Some(outcome) }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.outcome {
            Some(o) => write!(f, "{}:{}", self.action, o),
            None => f.write_str(&self.action),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum StepParseError {
    #[error("empty step at position {0}")]
    EmptyStep(usize),
    #[error("invalid action name `{0}`")]
    BadName(String),
    #[error("unknown sensing result `{0}`, expected pos or neg")]
    BadOutcome(String),
}

impl FromStr for Step {
    type Err = StepParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, outcome) = match s.split_once(':') {
            Some((n, o)) => (n.trim(), Some(o.trim().parse()?)),
            None => (s, None),
        };
        if name.is_empty() {
            return Err(StepParseError::EmptyStep(0));
        }
        if !crate::syntax::is_symbol(name) {
            return Err(StepParseError::BadName(name.to_string()));
        }
        Ok(Step { action: name.to_string(), outcome })
    }
}

/// Parses a comma-separated step list such as `a,b:pos`. The empty string
/// is the empty plan.
pub fn parse_steps(s: &str) -> Result<Vec<Step>, StepParseError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .enumerate()
        .map(|(i, part)| {
            part.parse::<Step>().map_err(|e| match e {
                StepParseError::EmptyStep(_) => StepParseError::EmptyStep(i + 1),
                e => e,
            })
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ProgressError {
    #[error("`{action}` is not executable: precondition {failed} not entailed")]
    NotExecutable { action: String, failed: CanonicalRml },
    #[error("sensing action `{0}` needs a result")]
    MissingOutcome(String),
    #[error("`{0}` is not a sensing action but a result was given")]
    UnexpectedOutcome(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

/// How a step changed the KB.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Update,
    Revision,
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChangeKind::Update => "update",
            ChangeKind::Revision => "revision",
        })
    }
}

pub fn executable(kb: &KnowledgeBase, a: &Action) -> bool {
    kb.entails_all(&a.pre)
}

/// Progresses `kb` through one action. Conditions are evaluated in `kb`
/// before any effect applies; triggered effects are applied in declaration
/// order.
pub fn progress(kb: &KnowledgeBase, a: &Action, outcome: Option<SensingResult>) -> Result<KnowledgeBase, ProgressError> {
    progress_labelled(kb, a, outcome).map(|(k, _)| k)
}

pub fn progress_labelled(
    kb: &KnowledgeBase,
    a: &Action,
    outcome: Option<SensingResult>,
) -> Result<(KnowledgeBase, ChangeKind), ProgressError> {
    if let Some(failed) = kb.first_unentailed(&a.pre) {
        return Err(ProgressError::NotExecutable { action: a.name.clone(), failed: failed.clone() });
    }
    match (&a.kind, outcome) {
        (ActionKind::Deterministic { effects }, None) => {
            let mut out = kb.clone();
            for e in effects.iter().filter(|e| kb.entails_all(&e.condition)) {
                out = out.update(&e.effect);
            }
            Ok((out, ChangeKind::Update))
        }
        (ActionKind::Deterministic { .. }, Some(_)) => Err(ProgressError::UnexpectedOutcome(a.name.clone())),
        (ActionKind::Sensing { pos, neg }, Some(o)) => {
            let obs = if o == SensingResult::Pos { pos } else { neg };
            Ok((kb.revise(obs), ChangeKind::Revision))
        }
        (ActionKind::Sensing { .. }, None) => Err(ProgressError::MissingOutcome(a.name.clone())),
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("progression undefined at step {index}: {reason}")]
pub struct Undefined {
    /// 1-based index of the failing step.
    pub index: usize,
    pub reason: ProgressError,
}

pub fn progress_seq(kb: &KnowledgeBase, lib: &ActionLibrary, steps: &[Step]) -> Result<KnowledgeBase, Undefined> {
    let mut cur = kb.clone();
    for (i, step) in steps.iter().enumerate() {
        cur = progress_step(&cur, lib, step).map_err(|reason| Undefined { index: i + 1, reason })?.0;
    }
    Ok(cur)
}

pub fn progress_step(
    kb: &KnowledgeBase,
    lib: &ActionLibrary,
    step: &Step,
) -> Result<(KnowledgeBase, ChangeKind), ProgressError> {
    let a = lib.get(&step.action).ok_or_else(|| ProgressError::UnknownAction(step.action.clone()))?;
    progress_labelled(kb, a, step.outcome)
}

/// The KB after each step, with the kind of change it underwent.
pub fn trace_seq(
    kb: &KnowledgeBase,
    lib: &ActionLibrary,
    steps: &[Step],
) -> Result<Vec<(ChangeKind, KnowledgeBase)>, Undefined> {
    let mut cur = kb.clone();
    let mut out = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let (next, kind) = progress_step(&cur, lib, step).map_err(|reason| Undefined { index: i + 1, reason })?;
        out.push((kind, next.clone()));
        cur = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::atom("p")
    }

    fn kb(fs: &[Formula]) -> KnowledgeBase {
        KnowledgeBase::from_formulas(fs, 2).unwrap()
    }

    #[test]
    fn executable_examples() {
        let a = Action::deterministic("go", "act", &Formula::atom("at_home"), &[], 2).unwrap();
        assert!(executable(&kb(&[Formula::atom("at_home")]), &a));
        assert!(!executable(&kb(&[]), &a));
        let not_crowded = Formula::believes("act", Formula::not(Formula::atom("crowded_bus")));
        let board = Action::deterministic("board_bus", "act", &not_crowded, &[], 2).unwrap();
        assert!(executable(&kb(std::slice::from_ref(&not_crowded)), &board));
    }

    #[test]
    fn deterministic_progression() {
        let eff = Formula::and([p(), Formula::believes("act", p())]);
        let a = Action::deterministic("a", "act", &Formula::top(), &[(Formula::top(), eff.clone())], 2).unwrap();
        let start = kb(&[Formula::not(p()), Formula::believes("act", Formula::not(p()))]);
        assert_eq!(progress(&start, &a, None).unwrap(), kb(&[eff]));

        let a = Action::deterministic("a", "act", &Formula::top(), &[(Formula::atom("r"), p())], 2).unwrap();
        let q = kb(&[Formula::atom("q")]);
        assert_eq!(progress(&q, &a, None).unwrap(), q);

        let a = Action::deterministic("a", "act", &p(), &[], 2).unwrap();
        assert!(matches!(progress(&q, &a, None), Err(ProgressError::NotExecutable { .. })));
    }

    #[test]
    fn sensing_progression() {
        let crowded = Formula::atom("crowded");
        let s = Action::sensing("sense_bus", "act", &Formula::top(), &Formula::not(crowded.clone()), &crowded, 2).unwrap();
        assert_eq!(progress(&kb(&[]), &s, Some(SensingResult::Pos)).unwrap(), kb(&[Formula::not(crowded.clone())]));
        assert_eq!(progress(&kb(&[]), &s, Some(SensingResult::Neg)).unwrap(), kb(&[crowded]));
        assert!(matches!(progress(&kb(&[]), &s, None), Err(ProgressError::MissingOutcome(_))));

        let bp = Formula::believes("act", p());
        let s = Action::sensing("s", "act", &Formula::top(), &bp, &Formula::top(), 2).unwrap();
        let doubt = kb(&[Formula::not(bp.clone())]);
        assert_eq!(progress(&doubt, &s, Some(SensingResult::Pos)).unwrap(), kb(&[bp]));
    }

    #[test]
    fn sequences() {
        let lib = ActionLibrary::with_actions(
            vec![Agent::new("act")],
            [
                Action::deterministic("a", "act", &Formula::top(), &[(Formula::top(), p())], 2).unwrap(),
                Action::deterministic("b", "act", &Formula::atom("q"), &[], 2).unwrap(),
            ],
        )
        .unwrap();
        let start = kb(&[]);
        assert_eq!(progress_seq(&start, &lib, &[]).unwrap(), start);
        let err = progress_seq(&start, &lib, &[Step::new("a"), Step::new("b")]).unwrap_err();
        assert_eq!(err.index, 2);
        let err = progress_seq(&start, &lib, &[Step::new("zzz")]).unwrap_err();
        assert_eq!(err.reason, ProgressError::UnknownAction("zzz".into()));
    }

    #[test]
    fn step_parsing() {
        assert_eq!(parse_steps("").unwrap(), vec![]);
        assert_eq!(
            parse_steps("a, b:pos").unwrap(),
            vec![Step::new("a"), Step::sensed("b", SensingResult::Pos)]
        );
        assert_eq!(parse_steps("a,,b").unwrap_err(), StepParseError::EmptyStep(2));
        assert!(matches!(parse_steps("a:maybe"), Err(StepParseError::BadOutcome(_))));
        assert!(matches!(parse_steps("(a)"), Err(StepParseError::BadName(_))));
        assert_eq!(Step::sensed("x", SensingResult::Neg).to_string(), "x:neg");
    }

    #[test]
    fn library_rejects_duplicates_and_unknown_owners() {
        let a = Action::deterministic("a", "act", &Formula::top(), &[], 2).unwrap();
        let mut lib = ActionLibrary::new(vec![Agent::new("act")]);
        lib.insert(a.clone()).unwrap();
        assert_eq!(lib.insert(a).unwrap_err(), LibraryError::DuplicateAction("a".into()));
        let b = Action::deterministic("b", "obs", &Formula::top(), &[], 2).unwrap();
        assert!(matches!(lib.insert(b), Err(LibraryError::UnknownOwner { .. })));
    }
}
