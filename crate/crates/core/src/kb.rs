//! Knowledge bases: conflict-free sets of canonical RMLs.
//!
//! A KB is stored from the root agent's perspective, so the outer belief
//! operator of the agent doing the planning is left implicit. `B_obs p` in a
//! narrative becomes the fact `p`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::logic::{conflict, rml_entails, to_canonical, CanonicalRml, Formula, FragmentError, Vocabulary};

/// Default depth bound for KB members.
pub const DEFAULT_DEPTH: usize = 2;

/// Default cap on the RML universe enumerated by [`KnowledgeBase::closure`].
pub const DEFAULT_CLOSURE_BUDGET: u128 = 1 << 20;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum KbError {
    #[error("{incoming} conflicts with {existing}")]
    Inconsistent { existing: CanonicalRml, incoming: CanonicalRml },
    #[error("{rml} has depth {depth}, bound is {bound}")]
    DepthExceeded { rml: CanonicalRml, depth: usize, bound: usize },
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("closure needs {needed} candidate RMLs, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct KnowledgeBase {
    facts: BTreeSet<CanonicalRml>,
    depth_bound: usize,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        KnowledgeBase::new(DEFAULT_DEPTH)
    }
}

impl KnowledgeBase {
    pub fn new(depth_bound: usize) -> Self {
        KnowledgeBase { facts: BTreeSet::new(), depth_bound }
    }

    pub fn from_rmls(rmls: impl IntoIterator<Item = CanonicalRml>, depth_bound: usize) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase::new(depth_bound);
        for r in rmls {
            kb.insert(r)?;
        }
        Ok(kb)
    }

    pub fn from_formulas(formulas: &[Formula], depth_bound: usize) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase::new(depth_bound);
        for f in formulas {
            for r in to_canonical(f, depth_bound)? {
                kb.insert(r)?;
            }
        }
        Ok(kb)
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    pub fn facts(&self) -> &BTreeSet<CanonicalRml> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, r: &CanonicalRml) -> bool {
        self.facts.contains(r)
    }

    fn insert(&mut self, r: CanonicalRml) -> Result<(), KbError> {
        if r.depth() > self.depth_bound {
            return Err(KbError::DepthExceeded { depth: r.depth(), bound: self.depth_bound, rml: r });
        }
        if let Some(existing) = self.facts.iter().find(|m| conflict(m, &r)) {
            return Err(KbError::Inconsistent { existing: existing.clone(), incoming: r });
        }
        self.facts.insert(r);
        Ok(())
    }

    pub fn tell(&self, r: CanonicalRml) -> Result<Self, KbError> {
        let mut kb = self.clone();
        kb.insert(r)?;
        Ok(kb)
    }

    pub fn entails_rml(&self, r: &CanonicalRml) -> bool {
        self.facts.contains(r) || self.facts.iter().any(|m| rml_entails(m, r))
    }

    /// Every conjunct entailed. The empty conjunction is true.
    pub fn entails_all(&self, conj: &[CanonicalRml]) -> bool {
        conj.iter().all(|r| self.entails_rml(r))
    }

    /// The first conjunct not entailed, if any.
    pub fn first_unentailed<'a>(&self, conj: &'a [CanonicalRml]) -> Option<&'a CanonicalRml> {
        conj.iter().find(|r| !self.entails_rml(r))
    }

    pub fn entails(&self, phi: &Formula) -> Result<bool, FragmentError> {
        Ok(self.entails_all(&to_canonical(phi, usize::MAX)?))
    }

    /// All RMLs of depth at most `depth` over `vocab` that the KB entails.
    pub fn closure(&self, vocab: &Vocabulary, depth: usize, budget: u128) -> Result<BTreeSet<CanonicalRml>, KbError> {
        let needed = vocab.rml_count(depth);
        if needed > budget {
            return Err(KbError::BudgetExceeded { needed, budget });
        }
        if self.facts.is_empty() {
            return Ok(BTreeSet::new());
        }
        Ok(vocab.enumerate_rmls(depth).into_iter().filter(|r| self.entails_rml(r)).collect())
    }

    /// The update operator: each conjunct, in order, evicts the members it
    /// conflicts with and is then inserted.
    pub fn update(&self, effect: &[CanonicalRml]) -> Self {
        let mut kb = self.clone();
        for e in effect {
            kb.facts.retain(|m| !conflict(m, e));
            kb.facts.insert(e.clone());
        }
        kb
    }

    /// The revision operator. Within conflict-free RML sets it has the same
    /// mechanics as [`update`](Self::update); callers label it differently in
    /// traces.
    pub fn revise(&self, observation: &[CanonicalRml]) -> Self {
        self.update(observation)
    }

    pub fn update_formula(&self, effect: &Formula) -> Result<Self, FragmentError> {
        Ok(self.update(&to_canonical(effect, self.depth_bound)?))
    }

    /// Members rendered and sorted as strings.
    pub fn render_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.facts.iter().map(|r| r.to_string()).collect();
        lines.sort();
        lines
    }

    pub fn with_depth_bound(mut self, depth_bound: usize) -> Self {
        self.depth_bound = depth_bound;
        self
    }

    /// Direct construction without conflict checks, for callers that have
    /// already established consistency.
    pub(crate) fn from_set_unchecked(facts: BTreeSet<CanonicalRml>, depth_bound: usize) -> Self {
        KnowledgeBase { facts, depth_bound }
    }

    /// A pair of conflicting members, if any.
    pub fn find_conflict(&self) -> Option<(&CanonicalRml, &CanonicalRml)> {
        let v: Vec<&CanonicalRml> = self.facts.iter().collect();
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                if conflict(a, b) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.render_lines().join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Literal, ModalStep};

    fn lit(a: &str) -> CanonicalRml {
        CanonicalRml::literal(Literal::pos(a))
    }

    fn nlit(a: &str) -> CanonicalRml {
        CanonicalRml::literal(Literal::neg(a))
    }

    fn b(agent: &str, r: CanonicalRml) -> CanonicalRml {
        r.under(ModalStep::pos(agent))
    }

    fn nb(agent: &str, r: CanonicalRml) -> CanonicalRml {
        r.under(ModalStep::neg(agent))
    }

    #[test]
    fn tell_examples() {
        let kb = KnowledgeBase::default().tell(lit("p")).unwrap();
        assert_eq!(kb.len(), 1);
        let kb = KnowledgeBase::default().tell(b("act", lit("p"))).unwrap();
        let err = kb.tell(b("act", nlit("p"))).unwrap_err();
        assert!(matches!(err, KbError::Inconsistent { existing, .. } if existing == b("act", lit("p"))));
        let kb = KnowledgeBase::default().tell(lit("p")).unwrap().tell(b("act", nlit("p"))).unwrap();
        assert_eq!(kb.len(), 2);
    }

    #[test]
    fn entails_examples() {
        let kb = KnowledgeBase::from_rmls([b("act", lit("p"))], 2).unwrap();
        assert!(kb.entails_rml(&nb("act", nlit("p"))));
        let kb = KnowledgeBase::from_rmls([lit("p"), lit("q")], 2).unwrap();
        assert!(kb.entails(&Formula::and([Formula::atom("p"), Formula::atom("q")])).unwrap());
        let kb = KnowledgeBase::from_rmls([nb("act", lit("p"))], 2).unwrap();
        assert!(!kb.entails_rml(&b("act", nlit("p"))));
        assert!(kb.entails(&Formula::top()).unwrap());
    }

    #[test]
    fn closure_examples() {
        let v = Vocabulary::new(["act"], ["p"]);
        let kb = KnowledgeBase::from_rmls([b("act", lit("p"))], 2).unwrap();
        let c = kb.closure(&v, 1, DEFAULT_CLOSURE_BUDGET).unwrap();
        assert_eq!(c, [b("act", lit("p")), nb("act", nlit("p"))].into_iter().collect());
        assert!(KnowledgeBase::default().closure(&v, 2, DEFAULT_CLOSURE_BUDGET).unwrap().is_empty());
        let kb = KnowledgeBase::from_rmls([lit("p")], 2).unwrap();
        assert_eq!(kb.closure(&v, 1, DEFAULT_CLOSURE_BUDGET).unwrap(), [lit("p")].into_iter().collect());
        assert!(matches!(kb.closure(&v, 1, 3), Err(KbError::BudgetExceeded { .. })));
    }

    #[test]
    fn update_examples() {
        let kb = KnowledgeBase::from_rmls([nlit("p"), b("act", nlit("p"))], 2).unwrap();
        let out = kb.update(&[lit("p"), b("act", lit("p"))]);
        assert_eq!(out, KnowledgeBase::from_rmls([lit("p"), b("act", lit("p"))], 2).unwrap());

        let kb = KnowledgeBase::from_rmls([lit("q")], 2).unwrap();
        assert_eq!(kb.update(&[lit("p")]).len(), 2);

        let deep = |l| b("obs", b("act", l));
        let kb = KnowledgeBase::from_rmls([deep(nlit("p"))], 2).unwrap();
        assert_eq!(kb.update(&[deep(lit("p"))]).facts().iter().collect::<Vec<_>>(), vec![&deep(lit("p"))]);
    }

    #[test]
    fn revise_examples() {
        let kb = KnowledgeBase::from_rmls([nb("act", lit("p"))], 2).unwrap();
        assert_eq!(kb.revise(&[b("act", lit("p"))]).render_lines(), vec!["(B act p)"]);
        let kb = KnowledgeBase::from_rmls([lit("q")], 2).unwrap();
        assert_eq!(kb.revise(&[lit("q")]), kb);
        let kb = KnowledgeBase::from_rmls([lit("p")], 2).unwrap();
        assert_eq!(kb.revise(&[b("act", lit("p"))]).len(), 2);
    }

    #[test]
    fn rendering_is_sorted() {
        let kb = KnowledgeBase::from_rmls([lit("q"), b("act", lit("p")), nlit("a")], 2).unwrap();
        assert_eq!(kb.to_string(), "{(B act p), (not a), q}");
    }
}
