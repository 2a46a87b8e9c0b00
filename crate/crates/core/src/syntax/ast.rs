//! The parsed form of a problem file, before semantic checks.

use std::collections::BTreeMap;

use crate::action::SensingResult;
use crate::logic::{Agent, Atom, Formula};

use super::sexp::SourceSpan;

#[derive(Clone, PartialEq, Debug, Default)]
pub struct ProblemFile {
    pub agents: Vec<Agent>,
    pub atoms: Vec<Atom>,
    pub actions: BTreeMap<String, ActionDecl>,
    pub init: Vec<Formula>,
    pub goal: Option<Formula>,
    pub goals: Vec<Formula>,
    pub observations: Vec<String>,
    pub outcomes: BTreeMap<String, SensingResult>,
    pub config: Config,
    pub spans: SourceMap,
}

#[derive(Clone, PartialEq, Debug)]
pub struct ActionDecl {
    pub owner: Agent,
    pub pre: Formula,
    pub body: ActionBody,
}

#[derive(Clone, PartialEq, Debug)]
pub enum ActionBody {
    Deterministic(Vec<EffectDecl>),
    Sensing { pos: Formula, neg: Formula },
}

#[derive(Clone, PartialEq, Debug)]
pub struct EffectDecl {
    /// `None` for an unconditional effect.
    pub condition: Option<Formula>,
    pub effect: Formula,
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct Config {
    pub depth: Option<usize>,
    pub beta: Option<f64>,
    pub observer: Option<Agent>,
    pub actor: Option<Agent>,
}

/// Where things came from. Ignored by equality so that a parsed file equals
/// its re-parsed serialization.
#[derive(Clone, Debug, Default)]
pub struct SourceMap {
    pub agents: Vec<SourceSpan>,
    pub atoms: Vec<SourceSpan>,
    pub actions: BTreeMap<String, SourceSpan>,
    pub init: Vec<SourceSpan>,
    pub goal: Option<SourceSpan>,
    pub goals: Vec<SourceSpan>,
    pub observations: Vec<SourceSpan>,
    pub outcomes: BTreeMap<String, SourceSpan>,
    pub config: Option<SourceSpan>,
    pub observer: Option<SourceSpan>,
    pub actor: Option<SourceSpan>,
    /// Every atom occurrence inside a formula.
    pub atom_uses: Vec<(Atom, SourceSpan)>,
    /// Every agent occurrence inside a formula or as an action owner.
    pub agent_uses: Vec<(Agent, SourceSpan)>,
}

impl PartialEq for SourceMap {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl SourceMap {
    pub fn atom_use(&self, a: &Atom) -> Option<SourceSpan> {
        self.atom_uses.iter().find(|(x, _)| x == a).map(|(_, s)| *s)
    }

    pub fn agent_use(&self, a: &Agent) -> Option<SourceSpan> {
        self.agent_uses.iter().find(|(x, _)| x == a).map(|(_, s)| *s)
    }
}
