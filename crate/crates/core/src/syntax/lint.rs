use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::kb::{KnowledgeBase, DEFAULT_DEPTH};
use crate::logic::{conflict, rml_entails, to_canonical, CanonicalRml, Formula};

use super::ast::{ActionBody, ProblemFile};
use super::sexp::SourceSpan;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}: {s}: {}", self.span, self.message)
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn error(&mut self, span: SourceSpan, message: String) {
        self.0.push(Diagnostic { severity: Severity::Error, span, message });
    }

    fn warn(&mut self, span: SourceSpan, message: String) {
        self.0.push(Diagnostic { severity: Severity::Warning, span, message });
    }
}

/// Semantic checks on a parsed file. Errors make the file unusable;
/// warnings flag likely modelling mistakes.
pub fn lint(p: &ProblemFile) -> Vec<Diagnostic> {
    let mut out = Sink(Vec::new());
    let depth = p.config.depth.unwrap_or(DEFAULT_DEPTH);
    let sp = &p.spans;

    let mut reported = BTreeSet::new();
    for (agent, span) in &sp.agent_uses {
        if !p.agents.contains(agent) && reported.insert(agent.to_string()) {
            out.error(*span, format!("unknown agent `{agent}`"));
        }
    }
    reported.clear();
    for (atom, span) in &sp.atom_uses {
        if !p.atoms.contains(atom) && reported.insert(atom.to_string()) {
            out.error(*span, format!("unknown atom `{atom}`"));
        }
    }
    if let (Some(o), Some(a)) = (&p.config.observer, &p.config.actor) {
        if o == a {
            out.error(sp.actor.unwrap_or_default(), format!("observer and actor are both `{a}`"));
        }
    }

    let mut canon = |f: &Formula, span: SourceSpan, what: &str| -> Option<Vec<CanonicalRml>> {
        match to_canonical(f, depth) {
            Ok(c) => Some(c),
            Err(e) => {
                out.error(span, format!("{what}: {e}"));
                None
            }
        }
    };

    let mut init = Vec::new();
    for (i, f) in p.init.iter().enumerate() {
        if let Some(c) = canon(f, sp.init.get(i).copied().unwrap_or_default(), "init") {
            init.extend(c);
        }
    }
    if let Some(g) = &p.goal {
        canon(g, sp.goal.unwrap_or_default(), "goal");
    }
    for (i, g) in p.goals.iter().enumerate() {
        canon(g, sp.goals.get(i).copied().unwrap_or_default(), "goal");
    }

    // Canonical action parts: (name, span, pre, established conjuncts, sensing pos/neg).
    struct Parts {
        name: String,
        span: SourceSpan,
        pre: Vec<CanonicalRml>,
        sensing: Option<(Vec<CanonicalRml>, Vec<CanonicalRml>)>,
        produced: Vec<CanonicalRml>,
    }
    let mut parts = Vec::new();
    for (name, a) in &p.actions {
        let span = sp.actions.get(name).copied().unwrap_or_default();
        let what = format!("action `{name}`");
        let pre = canon(&a.pre, span, &what).unwrap_or_default();
        let mut produced = Vec::new();
        let mut sensing = None;
        match &a.body {
            ActionBody::Deterministic(effects) => {
                for e in effects {
                    if let Some(c) = &e.condition {
                        canon(c, span, &what);
                    }
                    produced.extend(canon(&e.effect, span, &what).unwrap_or_default());
                }
            }
            ActionBody::Sensing { pos, neg } => {
                let pc = canon(pos, span, &what);
                let nc = canon(neg, span, &what);
                if let (Some(pc), Some(nc)) = (pc, nc) {
                    produced.extend(pc.iter().chain(&nc).cloned());
                    sensing = Some((pc, nc));
                }
            }
        }
        parts.push(Parts { name: name.clone(), span, pre, sensing, produced });
    }

    match KnowledgeBase::from_rmls(init.iter().cloned(), usize::MAX) {
        Ok(kb) => {
            let produced: Vec<&CanonicalRml> = parts.iter().flat_map(|x| &x.produced).collect();
            for x in &parts {
                for r in &x.pre {
                    if !kb.entails_rml(r) && !produced.iter().any(|e| rml_entails(e, r)) {
                        out.warn(x.span, format!("precondition {r} of `{}` is never established", x.name));
                    }
                }
            }
        }
        Err(e) => out.error(sp.init.first().copied().unwrap_or_default(), format!("inconsistent init: {e}")),
    }

    for x in &parts {
        if let Some((pos, neg)) = &x.sensing {
            if !pos.iter().any(|a| neg.iter().any(|b| conflict(a, b))) {
                out.warn(x.span, format!("the two results of sensing action `{}` do not contradict each other", x.name));
            }
            if !p.outcomes.contains_key(&x.name) {
                out.warn(x.span, format!("sensing action `{}` has no outcome", x.name));
            }
        }
    }

    let mut observed = BTreeSet::new();
    for (i, name) in p.observations.iter().enumerate() {
        let span = sp.observations.get(i).copied().unwrap_or_default();
        if !p.actions.contains_key(name) {
            out.error(span, format!("observed action `{name}` is not declared"));
        } else if !observed.insert(name) {
            out.error(span, format!("action `{name}` is observed more than once"));
        }
    }
    for name in p.outcomes.keys() {
        let span = sp.outcomes.get(name).copied().unwrap_or_default();
        match p.actions.get(name).map(|a| &a.body) {
            None => out.error(span, format!("outcome for undeclared action `{name}`")),
            Some(ActionBody::Deterministic(_)) => out.error(span, format!("outcome for non-sensing action `{name}`")),
            Some(ActionBody::Sensing { .. }) => {}
        }
    }
    let mut diags = out.0;
    diags.sort_by_key(|d| (d.span.start, d.severity));
    diags
}

#[cfg(test)]
mod tests {
    use super::super::parse_problem;
    use super::*;

    fn lints(src: &str) -> Vec<Diagnostic> {
        lint(&parse_problem(src).unwrap())
    }

    #[test]
    fn sensing_with_equal_results_warns() {
        let d = lints("(problem (agents a) (atoms p) (sensing s :owner a :pos p :neg p) (outcome s pos))");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
    }

    #[test]
    fn unknown_observation_is_an_error() {
        let d = lints("(problem (agents a) (atoms p) (obs nope))");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Error);
    }

    #[test]
    fn clean_file_is_clean() {
        let d = lints(
            "(problem (agents obs act) (atoms p)
              (action x :owner act :pre (B act p) :effect p)
              (init (B act p)) (goal p))",
        );
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn symbol_and_fragment_errors_have_spans() {
        let src = "(problem (agents a) (atoms p) (init q (B zed p)) (goal (not (and p p))))";
        let d = lints(src);
        let msgs: Vec<_> = d.iter().map(|x| (x.span.slice(src), x.message.as_str())).collect();
        assert!(msgs.iter().any(|(s, m)| *s == "q" && m.contains("unknown atom")));
        assert!(msgs.iter().any(|(s, m)| *s == "zed" && m.contains("unknown agent")));
        assert!(msgs.iter().any(|(s, m)| s.contains("and") && m.contains("disjunction")));
    }

    #[test]
    fn depth_bound_and_unreachable_preconditions() {
        let d = lints("(problem (agents a b) (atoms p) (init (B a (B b (B a p)))) (config :depth 2))");
        assert!(d.iter().any(|x| x.message.contains("exceeds bound")));
        let d = lints("(problem (agents a) (atoms p) (action x :owner a :pre p))");
        assert!(d.iter().any(|x| x.severity == Severity::Warning && x.message.contains("never established")));
    }
}
