//! The epistemic formula language and its restricted-modal-literal fragment.
//!
//! Every knowledge base, precondition, condition, effect and goal is reduced to
//! a conjunction of [`CanonicalRml`]s: a literal under an agent-alternating
//! prefix of possibly negated belief operators. Under KD45 a run of belief
//! operators of the same agent collapses to one operator whose sign is the
//! product of the run's signs (`B_i B_i φ ≡ B_i φ`, `¬B_i ¬B_i φ ≡ B_i φ`, ...),
//! so alternation loses nothing.
//!
//! [`rml_entails`] and [`conflict`] decide pairwise entailment and joint
//! unsatisfiability by structural recursion on the two prefixes. Positive steps
//! recurse covariantly, negative steps contravariantly, and a positive step
//! facing a negative step of the same agent is the place where the D axiom
//! (`B_i φ → ¬B_i ¬φ`) applies.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::symbol::{Agent, Atom};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: impl Into<Atom>) -> Self {
        Literal { atom: atom.into(), positive: true }
    }

    pub fn neg(atom: impl Into<Atom>) -> Self {
        Literal { atom: atom.into(), positive: false }
    }

    pub fn negate(&self) -> Self {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

/// A formula of the full language. `And(vec![])` is the constant true.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Believes(Agent, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<Atom>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(fs.into_iter().collect())
    }

    pub fn believes(agent: impl Into<Agent>, f: Formula) -> Self {
        Formula::Believes(agent.into(), Box::new(f))
    }

    pub fn top() -> Self {
        Formula::And(Vec::new())
    }

    /// `a → b`, written as `¬(a ∧ ¬b)`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and([a, Formula::not(b)]))
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::And(cs) if cs.is_empty())
    }

    pub fn literal(l: &Literal) -> Self {
        let a = Formula::Atom(l.atom.clone());
        if l.positive {
            a
        } else {
            Formula::not(a)
        }
    }

    /// Conjunction of canonical RMLs, flattened: a single conjunct is not
    /// wrapped in `and`.
    pub fn conjunction(rmls: &[CanonicalRml]) -> Self {
        if rmls.len() == 1 {
            rmls[0].to_formula()
        } else {
            Formula::And(rmls.iter().map(CanonicalRml::to_formula).collect())
        }
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) | Formula::Believes(_, f) => f.collect_atoms(out),
            Formula::And(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    pub fn collect_agents(&self, out: &mut BTreeSet<Agent>) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(f) => f.collect_agents(out),
            Formula::Believes(a, f) => {
                out.insert(a.clone());
                f.collect_agents(out);
            }
            Formula::And(fs) => fs.iter().for_each(|f| f.collect_agents(out)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) => {
                f.write_str("(and")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            Formula::Believes(a, g) => write!(f, "(B {a} {g})"),
        }
    }
}

/// Maximum nesting of belief operators.
pub fn modal_depth(phi: &Formula) -> usize {
    match phi {
        Formula::Atom(_) => 0,
        Formula::Not(g) => modal_depth(g),
        Formula::And(gs) => gs.iter().map(modal_depth).max().unwrap_or(0),
        Formula::Believes(_, g) => 1 + modal_depth(g),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Sign {
    /// `B_i`
    Pos,
    /// `¬B_i`
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct ModalStep {
    pub agent: Agent,
    pub sign: Sign,
}

impl ModalStep {
    pub fn pos(agent: impl Into<Agent>) -> Self {
        ModalStep { agent: agent.into(), sign: Sign::Pos }
    }

    pub fn neg(agent: impl Into<Agent>) -> Self {
        ModalStep { agent: agent.into(), sign: Sign::Neg }
    }
}

/// A restricted modal literal with an agent-alternating prefix.
///
/// The prefix is read outermost first: `[(obs,+), (act,-)]` over `q` is
/// `B_obs ¬B_act q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct CanonicalRml {
    prefix: Vec<ModalStep>,
    body: Literal,
}

impl CanonicalRml {
    /// Builds an RML, collapsing adjacent same-agent steps.
    pub fn new(prefix: impl IntoIterator<Item = ModalStep>, body: Literal) -> Self {
        let mut out: Vec<ModalStep> = Vec::new();
        // Walk innermost-first so each run keeps its innermost agent position and
        // takes the product of the signs in the run.
        let steps: Vec<ModalStep> = prefix.into_iter().collect();
        for step in steps.into_iter().rev() {
            match out.last_mut() {
                Some(last) if last.agent == step.agent => last.sign = last.sign.times(step.sign),
                _ => out.push(step),
            }
        }
        out.reverse();
        CanonicalRml { prefix: out, body }
    }

    pub fn literal(body: Literal) -> Self {
        CanonicalRml { prefix: Vec::new(), body }
    }

    pub fn prefix(&self) -> &[ModalStep] {
        &self.prefix
    }

    pub fn body(&self) -> &Literal {
        &self.body
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    /// `step` applied outside this RML, collapsing if the agent matches.
    pub fn under(&self, step: ModalStep) -> Self {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(step);
        prefix.extend(self.prefix.iter().cloned());
        CanonicalRml::new(prefix, self.body.clone())
    }

    /// Drops the outermost step. Returns `None` for a bare literal.
    pub fn strip_outer(&self) -> Option<(ModalStep, CanonicalRml)> {
        let (first, rest) = self.prefix.split_first()?;
        Some((first.clone(), CanonicalRml { prefix: rest.to_vec(), body: self.body.clone() }))
    }

    pub fn to_formula(&self) -> Formula {
        let mut f = Formula::literal(&self.body);
        for step in self.prefix.iter().rev() {
            f = Formula::Believes(step.agent.clone(), Box::new(f));
            if step.sign == Sign::Neg {
                f = Formula::not(f);
            }
        }
        f
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.prefix.iter().map(|s| &s.agent)
    }

    /// Every step positive, so conjunctions may be distributed under it.
    pub fn is_positive(&self) -> bool {
        self.prefix.iter().all(|s| s.sign == Sign::Pos)
    }
}

impl fmt::Display for CanonicalRml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FragmentErrorKind {
    Disjunction,
    DepthExceeded { depth: usize, bound: usize },
    NestedNegationOfConjunction,
}

impl fmt::Display for FragmentErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentErrorKind::Disjunction => f.write_str("disjunction"),
            FragmentErrorKind::DepthExceeded { depth, bound } => {
                write!(f, "modal depth {depth} exceeds bound {bound}")
            }
            FragmentErrorKind::NestedNegationOfConjunction => {
                f.write_str("conjunction under a negated belief")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("formula outside the RML fragment ({kind}): {subformula}")]
pub struct FragmentError {
    pub kind: FragmentErrorKind,
    pub subformula: Formula,
}

/// Reduces `phi` to its conjunct set of canonical RMLs of depth at most `bound`.
///
/// The result is deduplicated and keeps first-occurrence order, which is the
/// order effects are applied in.
pub fn to_canonical(phi: &Formula, bound: usize) -> Result<Vec<CanonicalRml>, FragmentError> {
    let mut out = Vec::new();
    let mut ctx = Vec::new();
    canon(phi, &mut ctx, false, false, &mut out)?;
    let mut seen = BTreeSet::new();
    let mut result = Vec::with_capacity(out.len());
    for r in out {
        if r.depth() > bound {
            return Err(FragmentError {
                kind: FragmentErrorKind::DepthExceeded { depth: r.depth(), bound },
                subformula: r.to_formula(),
            });
        }
        if seen.insert(r.clone()) {
            result.push(r);
        }
    }
    Ok(result)
}

fn canon(
    phi: &Formula,
    ctx: &mut Vec<ModalStep>,
    negated: bool,
    under_neg_step: bool,
    out: &mut Vec<CanonicalRml>,
) -> Result<(), FragmentError> {
    match phi {
        Formula::Atom(a) => {
            let body = Literal { atom: a.clone(), positive: !negated };
            out.push(CanonicalRml::new(ctx.iter().cloned(), body));
            Ok(())
        }
        Formula::Not(g) => canon(g, ctx, !negated, under_neg_step, out),
        Formula::And(gs) => {
            if gs.len() == 1 {
                return canon(&gs[0], ctx, negated, under_neg_step, out);
            }
            // A negated conjunction is a disjunction; a conjunction (or true)
            // inside a negated belief does not distribute.
            if negated || under_neg_step {
                let kind = if under_neg_step {
                    FragmentErrorKind::NestedNegationOfConjunction
                } else {
                    FragmentErrorKind::Disjunction
                };
                return Err(FragmentError { kind, subformula: phi.clone() });
            }
            for g in gs {
                canon(g, ctx, false, false, out)?;
            }
            Ok(())
        }
        Formula::Believes(agent, g) => {
            let sign = if negated { Sign::Neg } else { Sign::Pos };
            ctx.push(ModalStep { agent: agent.clone(), sign });
            let r = canon(g, ctx, false, under_neg_step || negated, out);
            ctx.pop();
            r
        }
    }
}

/// Classical negation within the fragment.
pub fn negate(r: &CanonicalRml) -> CanonicalRml {
    match r.prefix.split_first() {
        None => CanonicalRml::literal(r.body.negate()),
        Some((first, rest)) => {
            let mut prefix = Vec::with_capacity(r.prefix.len());
            prefix.push(ModalStep { agent: first.agent.clone(), sign: first.sign.flip() });
            prefix.extend(rest.iter().cloned());
            CanonicalRml { prefix, body: r.body.clone() }
        }
    }
}

/// Whether `premise` entails `conclusion` in KD45ₙ.
pub fn rml_entails(premise: &CanonicalRml, conclusion: &CanonicalRml) -> bool {
    entails_at(&premise.prefix, &premise.body, &conclusion.prefix, &conclusion.body)
}

/// Whether `{a, b}` is jointly unsatisfiable in KD45ₙ.
pub fn conflict(a: &CanonicalRml, b: &CanonicalRml) -> bool {
    conflict_at(&a.prefix, &a.body, &b.prefix, &b.body)
}

fn entails_at(pa: &[ModalStep], la: &Literal, pb: &[ModalStep], lb: &Literal) -> bool {
    match (pa.split_first(), pb.split_first()) {
        (None, None) => la == lb,
        (Some((sa, ra)), Some((sb, rb))) if sa.agent == sb.agent => match (sa.sign, sb.sign) {
            (Sign::Pos, Sign::Pos) => entails_at(ra, la, rb, lb),
            // B_i X ⊨ ¬B_i Y iff X and Y clash (D).
            (Sign::Pos, Sign::Neg) => conflict_at(ra, la, rb, lb),
            // ¬B_i X ⊨ ¬B_i Y iff B_i Y ⊨ B_i X.
            (Sign::Neg, Sign::Neg) => entails_at(rb, lb, ra, la),
            (Sign::Neg, Sign::Pos) => false,
        },
        _ => false,
    }
}

fn conflict_at(pa: &[ModalStep], la: &Literal, pb: &[ModalStep], lb: &Literal) -> bool {
    match (pa.split_first(), pb.split_first()) {
        (None, None) => la.atom == lb.atom && la.positive != lb.positive,
        (Some((sa, ra)), Some((sb, rb))) if sa.agent == sb.agent => match (sa.sign, sb.sign) {
            (Sign::Pos, Sign::Pos) => conflict_at(ra, la, rb, lb),
            (Sign::Pos, Sign::Neg) => entails_at(ra, la, rb, lb),
            (Sign::Neg, Sign::Pos) => entails_at(rb, lb, ra, la),
            (Sign::Neg, Sign::Neg) => false,
        },
        _ => false,
    }
}

/// The agents and atoms a problem is stated over.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Vocabulary {
    pub agents: Vec<Agent>,
    pub atoms: Vec<Atom>,
}

impl Vocabulary {
    pub fn new(
        agents: impl IntoIterator<Item = impl Into<Agent>>,
        atoms: impl IntoIterator<Item = impl Into<Atom>>,
    ) -> Self {
        Vocabulary {
            agents: agents.into_iter().map(Into::into).collect(),
            atoms: atoms.into_iter().map(Into::into).collect(),
        }
    }

    /// Number of canonical RMLs of depth at most `depth`, saturating.
    pub fn rml_count(&self, depth: usize) -> u128 {
        let lits = 2 * self.atoms.len() as u128;
        let n = self.agents.len() as u128;
        let mut prefixes: u128 = 1;
        let mut at_len: u128 = 1;
        for k in 1..=depth {
            at_len = if k == 1 {
                2 * n
            } else {
                at_len.saturating_mul(2 * n.saturating_sub(1))
            };
            prefixes = prefixes.saturating_add(at_len);
        }
        prefixes.saturating_mul(lits)
    }

    /// All canonical RMLs of depth at most `depth`, ordered by depth then
    /// prefix then literal.
    pub fn enumerate_rmls(&self, depth: usize) -> Vec<CanonicalRml> {
        let mut literals = Vec::with_capacity(self.atoms.len() * 2);
        for a in &self.atoms {
            literals.push(Literal::pos(a.clone()));
            literals.push(Literal::neg(a.clone()));
        }
        let mut layer: Vec<Vec<ModalStep>> = vec![Vec::new()];
        let mut out = Vec::new();
        for d in 0..=depth {
            for prefix in &layer {
                for l in &literals {
                    out.push(CanonicalRml { prefix: prefix.clone(), body: l.clone() });
                }
            }
            if d == depth {
                break;
            }
            let mut next = Vec::new();
            for prefix in &layer {
                for agent in &self.agents {
                    if prefix.last().is_some_and(|s| &s.agent == agent) {
                        continue;
                    }
                    for sign in [Sign::Pos, Sign::Neg] {
                        let mut p = prefix.clone();
                        p.push(ModalStep { agent: agent.clone(), sign });
                        next.push(p);
                    }
                }
            }
            layer = next;
        }
        out
    }
}
