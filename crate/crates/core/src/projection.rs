//! Taking an agent's perspective: strip one leading `B_i` from everything the
//! root agent believes, and from the actions that agent can perform.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::action::{Action, ActionKind, ActionLibrary, ConditionalEffect, Conjunction};
use crate::kb::{KbError, KnowledgeBase};
use crate::logic::{rml_entails, Agent, CanonicalRml, Sign, Vocabulary};

#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("{rml} does not start with a positive belief of {agent}")]
pub struct NotProjectable {
    pub rml: CanonicalRml,
    pub agent: Agent,
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ProjectionError {
    #[error("closure failed: {0}")]
    Closure(#[from] KbError),
    #[error("projection exposed a conflict between {0} and {1}")]
    Internal(CanonicalRml, CanonicalRml),
}

pub fn proj_formula(r: &CanonicalRml, agent: &Agent) -> Result<CanonicalRml, NotProjectable> {
    match r.strip_outer() {
        Some((step, rest)) if &step.agent == agent && step.sign == Sign::Pos => Ok(rest),
        _ => Err(NotProjectable { rml: r.clone(), agent: agent.clone() }),
    }
}

/// Projects each conjunct, dropping the ones that do not project.
pub fn proj_conjunction(conj: &[CanonicalRml], agent: &Agent) -> Conjunction {
    conj.iter().filter_map(|r| proj_formula(r, agent).ok()).collect()
}

/// The agent's view of `kb`: the bounded closure projected through `B_agent`,
/// then reduced to members not entailed by other members.
///
/// The result has depth bound one less than the source.
pub fn proj_kb(kb: &KnowledgeBase, agent: &Agent, vocab: &Vocabulary, budget: u128) -> Result<KnowledgeBase, ProjectionError> {
    let d = kb.depth_bound();
    let bound = d.saturating_sub(1);
    if d == 0 {
        return Ok(KnowledgeBase::new(0));
    }
    let projected: BTreeSet<CanonicalRml> =
        kb.closure(vocab, d, budget)?.iter().filter_map(|r| proj_formula(r, agent).ok()).collect();
    let reduced = minimize(projected);
    let out = KnowledgeBase::from_set_unchecked(reduced, bound);
    if let Some((a, b)) = out.find_conflict() {
        return Err(ProjectionError::Internal(a.clone(), b.clone()));
    }
    Ok(out)
}

/// Drops members entailed by another member. Of two equivalent members the
/// smaller one is kept.
pub fn minimize(set: BTreeSet<CanonicalRml>) -> BTreeSet<CanonicalRml> {
    let v: Vec<CanonicalRml> = set.into_iter().collect();
    v.iter()
        .enumerate()
        .filter(|(i, r)| {
            !v.iter().enumerate().any(|(j, s)| j != *i && rml_entails(s, r) && (!rml_entails(r, s) || j < *i))
        })
        .map(|(_, r)| r.clone())
        .collect()
}

/// The actions `agent` can perform, as that agent sees them.
pub fn proj_action(a: &Action, agent: &Agent) -> Option<Action> {
    if &a.owner != agent {
        return None;
    }
    let kind = match &a.kind {
        ActionKind::Deterministic { effects } => ActionKind::Deterministic {
            effects: effects
                .iter()
                .filter_map(|e| {
                    let effect = proj_conjunction(&e.effect, agent);
                    (!effect.is_empty())
                        .then(|| ConditionalEffect { condition: proj_conjunction(&e.condition, agent), effect })
                })
                .collect(),
        },
        ActionKind::Sensing { pos, neg } => {
            ActionKind::Sensing { pos: proj_conjunction(pos, agent), neg: proj_conjunction(neg, agent) }
        }
    };
    Some(Action { name: a.name.clone(), owner: a.owner.clone(), pre: proj_conjunction(&a.pre, agent), kind })
}

pub fn proj_actions(lib: &ActionLibrary, agent: &Agent) -> ActionLibrary {
    lib.map_actions(|a| proj_action(a, agent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Formula, Literal, ModalStep};
    use crate::kb::DEFAULT_CLOSURE_BUDGET;

    fn act() -> Agent {
        Agent::new("act")
    }

    fn lit(a: &str) -> CanonicalRml {
        CanonicalRml::literal(Literal::pos(a))
    }

    fn b(agent: &str, r: CanonicalRml) -> CanonicalRml {
        r.under(ModalStep::pos(agent))
    }

    #[test]
    fn formula_examples() {
        let not_crowded = CanonicalRml::literal(Literal::neg("crowded"));
        assert_eq!(proj_formula(&b("act", not_crowded.clone()), &act()).unwrap(), not_crowded);
        assert!(proj_formula(&lit("p"), &act()).is_err());
        assert!(proj_formula(&lit("p").under(ModalStep::neg("act")), &act()).is_err());
        assert_eq!(proj_formula(&b("act", b("obs", lit("q"))), &act()).unwrap(), b("obs", lit("q")));
    }

    #[test]
    fn kb_examples() {
        let v = Vocabulary::new(["obs", "act"], ["at_home", "crowded", "p", "q"]);
        let not_crowded = CanonicalRml::literal(Literal::neg("crowded"));
        let kb = KnowledgeBase::from_rmls([lit("at_home"), b("act", not_crowded.clone())], 2).unwrap();
        let out = proj_kb(&kb, &act(), &v, DEFAULT_CLOSURE_BUDGET).unwrap();
        assert_eq!(out.facts().iter().cloned().collect::<Vec<_>>(), vec![not_crowded]);
        assert_eq!(out.depth_bound(), 1);

        assert!(proj_kb(&KnowledgeBase::new(2), &act(), &v, DEFAULT_CLOSURE_BUDGET).unwrap().is_empty());

        let kb = KnowledgeBase::from_rmls([b("act", lit("p")), b("act", b("obs", lit("q")))], 2).unwrap();
        let out = proj_kb(&kb, &act(), &v, DEFAULT_CLOSURE_BUDGET).unwrap();
        assert_eq!(out.facts(), &[lit("p"), b("obs", lit("q"))].into_iter().collect());
    }

    #[test]
    fn action_examples() {
        let bnc = Formula::believes("act", Formula::not(Formula::atom("crowded")));
        let board = Action::deterministic("board_bus", "act", &bnc, &[], 2).unwrap();
        let pb = proj_action(&board, &act()).unwrap();
        assert_eq!(pb.pre, vec![CanonicalRml::literal(Literal::neg("crowded"))]);

        let walk = Action::deterministic(
            "walk",
            "act",
            &Formula::believes("act", Formula::atom("at_home")),
            &[(Formula::top(), Formula::believes("act", Formula::atom("at_work")))],
            2,
        )
        .unwrap();
        let pw = proj_action(&walk, &act()).unwrap();
        assert_eq!(pw.pre, vec![lit("at_home")]);
        assert_eq!(
            pw.kind,
            ActionKind::Deterministic { effects: vec![ConditionalEffect { condition: vec![], effect: vec![lit("at_work")] }] }
        );

        let inform = Action::deterministic("inform", "obs", &Formula::top(), &[], 2).unwrap();
        assert!(proj_action(&inform, &act()).is_none());

        let ontic = Action::deterministic("x", "act", &Formula::atom("p"), &[(Formula::top(), Formula::atom("q"))], 2).unwrap();
        let px = proj_action(&ontic, &act()).unwrap();
        assert!(px.pre.is_empty());
        assert_eq!(px.kind, ActionKind::Deterministic { effects: vec![] });
    }
}
