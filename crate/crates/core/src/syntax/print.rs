use std::fmt::Write;

use super::ast::{ActionBody, ProblemFile};

/// Canonical text: fixed section order, actions and outcomes sorted by name,
/// two-space indentation, empty sections omitted.
pub fn serialize_problem(p: &ProblemFile) -> String {
    let mut out = String::from("(problem");
    let mut line = |s: String| {
        out.push_str("\n  ");
        out.push_str(&s);
    };
    if !p.agents.is_empty() {
        line(words("agents", p.agents.iter().map(|a| a.to_string())));
    }
    if !p.atoms.is_empty() {
        line(words("atoms", p.atoms.iter().map(|a| a.to_string())));
    }
    for (name, a) in &p.actions {
        let kw = match a.body {
            ActionBody::Deterministic(_) => "action",
            ActionBody::Sensing { .. } => "sensing",
        };
        let mut s = format!("({kw} {name}\n    :owner {}", a.owner);
        if !a.pre.is_top() {
            write!(s, "\n    :pre {}", a.pre).expect("write to string");
        }
        match &a.body {
            ActionBody::Deterministic(effects) => {
                for e in effects {
                    match &e.condition {
                        Some(c) => write!(s, "\n    :effect (when {c} {})", e.effect),
                        None => write!(s, "\n    :effect {}", e.effect),
                    }
                    .expect("write to string");
                }
            }
            ActionBody::Sensing { pos, neg } => {
                write!(s, "\n    :pos {pos}\n    :neg {neg}").expect("write to string");
            }
        }
        s.push(')');
        line(s);
    }
    if !p.init.is_empty() {
        line(block("init", p.init.iter().map(|f| f.to_string())));
    }
    if let Some(g) = &p.goal {
        line(format!("(goal {g})"));
    }
    if !p.goals.is_empty() {
        line(block("goals", p.goals.iter().map(|f| f.to_string())));
    }
    if !p.observations.is_empty() {
        line(words("obs", p.observations.iter().cloned()));
    }
    for (a, r) in &p.outcomes {
        line(format!("(outcome {a} {r})"));
    }
    let c = &p.config;
    let mut cfg = Vec::new();
    if let Some(d) = c.depth {
        cfg.push(format!(":depth {d}"));
    }
    if let Some(b) = c.beta {
        cfg.push(format!(":beta {b:?}"));
    }
    if let Some(a) = &c.observer {
        cfg.push(format!(":observer {a}"));
    }
    if let Some(a) = &c.actor {
        cfg.push(format!(":actor {a}"));
    }
    if !cfg.is_empty() {
        line(format!("(config {})", cfg.join(" ")));
    }
    out.push_str(")\n");
    out
}

fn words(head: &str, items: impl Iterator<Item = String>) -> String {
    let mut s = format!("({head}");
    for i in items {
        s.push(' ');
        s.push_str(&i);
    }
    s.push(')');
    s
}

fn block(head: &str, items: impl Iterator<Item = String>) -> String {
    let mut s = format!("({head}");
    for i in items {
        s.push_str("\n    ");
        s.push_str(&i);
    }
    s.push(')');
    s
}
