use std::collections::BTreeSet;

use crate::action::SensingResult;
use crate::logic::{Agent, Atom, Formula};

use super::ast::{ActionBody, ActionDecl, Config, EffectDecl, ProblemFile, SourceMap};
use super::sexp::{read_all, read_one, Sexp, SourceSpan};
use super::{is_symbol, ParseError, RESERVED};

const SECTIONS: &[&str] = &["agents", "atoms", "action", "sensing", "init", "goal", "goals", "obs", "outcome", "config"];

fn err<T>(span: SourceSpan, msg: impl Into<String>, expected: &[&str]) -> Result<T, ParseError> {
    Err(ParseError::new(span, msg, expected))
}

fn symbol(s: &Sexp, what: &str) -> Result<String, ParseError> {
    match s {
        Sexp::Word(w, span) => {
            if !is_symbol(w) {
                return err(*span, format!("`{w}` is not a valid {what}"), &[what]);
            }
            Ok(w.clone())
        }
        Sexp::List(_, span) => err(*span, format!("expected {what}, found a list"), &[what]),
    }
}

fn name(s: &Sexp, what: &str) -> Result<String, ParseError> {
    let w = symbol(s, what)?;
    if RESERVED.contains(&w.as_str()) {
        return err(s.span(), format!("`{w}` is reserved and cannot be used as {what}"), &[what]);
    }
    Ok(w)
}

/// Keyword arguments `:key value ...` in order.
fn keywords<'a>(items: &'a [Sexp], allowed: &[&str]) -> Result<Vec<(&'a str, &'a Sexp, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let key = match &items[i] {
            Sexp::Word(w, _) if allowed.contains(&w.as_str()) => w.as_str(),
            other => return err(other.span(), format!("unexpected {}", other.describe()), allowed),
        };
        let Some(value) = items.get(i + 1) else {
            return err(items[i].span(), format!("`{key}` needs a value"), &["a value"]);
        };
        out.push((key, value, items[i].span()));
        i += 2;
    }
    Ok(out)
}

struct Parser {
    spans: SourceMap,
}

impl Parser {
    fn formula(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        match s {
            Sexp::Word(w, span) => {
                let a = name(s, "an atom")?;
                let atom = Atom::new(a);
                debug_assert_eq!(atom.as_str(), w);
                self.spans.atom_uses.push((atom.clone(), *span));
                Ok(Formula::Atom(atom))
            }
            Sexp::List(items, span) => {
                let Some(head) = items.first() else {
                    return err(*span, "empty formula", &["not", "and", "B", "an atom"]);
                };
                match head.word() {
                    Some("not") => {
                        if items.len() != 2 {
                            return err(*span, "`not` takes exactly one formula", &[]);
                        }
                        Ok(Formula::not(self.formula(&items[1])?))
                    }
                    Some("and") => Ok(Formula::And(
                        items[1..].iter().map(|i| self.formula(i)).collect::<Result<_, _>>()?,
                    )),
                    Some("B") => {
                        if items.len() != 3 {
                            return err(*span, "`B` takes an agent and a formula", &[]);
                        }
                        let agent = Agent::new(name(&items[1], "an agent")?);
                        self.spans.agent_uses.push((agent.clone(), items[1].span()));
                        Ok(Formula::believes(agent, self.formula(&items[2])?))
                    }
                    Some("or") => err(*span, "disjunction is outside the supported fragment", &["not", "and", "B"]),
                    _ => err(head.span(), format!("unexpected {} in formula", head.describe()), &["not", "and", "B"]),
                }
            }
        }
    }

    fn action(&mut self, items: &[Sexp], span: SourceSpan, file: &mut ProblemFile, sensing: bool) -> Result<(), ParseError> {
        let kw = if sensing { "sensing" } else { "action" };
        let Some(name_s) = items.get(1) else {
            return err(span, format!("`{kw}` needs a name"), &["an action name"]);
        };
        let action_name = symbol(name_s, "an action name")?;
        if file.actions.contains_key(&action_name) {
            return err(name_s.span(), format!("duplicate action `{action_name}`"), &[]);
        }
        let allowed: &[&str] = if sensing { &[":owner", ":pre", ":pos", ":neg"] } else { &[":owner", ":pre", ":effect"] };
        let mut owner = None;
        let mut pre = None;
        let mut pos = None;
        let mut neg = None;
        let mut effects = Vec::new();
        for (key, value, key_span) in keywords(&items[2..], allowed)? {
            let twice = match key {
                ":owner" => owner.is_some(),
                ":pre" => pre.is_some(),
                ":pos" => pos.is_some(),
                ":neg" => neg.is_some(),
                _ => false,
            };
            if twice {
                return err(key_span, format!("`{key}` given twice"), &[]);
            }
            match key {
                ":owner" => {
                    let a = Agent::new(name(value, "an agent")?);
                    self.spans.agent_uses.push((a.clone(), value.span()));
                    owner = Some(a);
                }
                ":pre" => {
                    pre = Some(self.formula(value)?);
                }
                ":pos" => {
                    pos = Some(self.formula(value)?);
                }
                ":neg" => {
                    neg = Some(self.formula(value)?);
                }
                _ => effects.push(self.effect(value)?),
            }
        }
        let Some(owner) = owner else {
            return err(span, format!("`{kw} {action_name}` needs `:owner`"), &[":owner"]);
        };
        let body = if sensing {
            match (pos, neg) {
                (Some(pos), Some(neg)) => ActionBody::Sensing { pos, neg },
                (None, _) => return err(span, format!("sensing action `{action_name}` needs `:pos`"), &[":pos"]),
                (_, None) => return err(span, format!("sensing action `{action_name}` needs `:neg`"), &[":neg"]),
            }
        } else {
            ActionBody::Deterministic(effects)
        };
        self.spans.actions.insert(action_name.clone(), span);
        file.actions.insert(action_name, ActionDecl { owner, pre: pre.unwrap_or_else(Formula::top), body });
        Ok(())
    }

    fn effect(&mut self, s: &Sexp) -> Result<EffectDecl, ParseError> {
        if let Sexp::List(items, span) = s {
            if items.first().and_then(Sexp::word) == Some("when") {
                if items.len() != 3 {
                    return err(*span, "`when` takes a condition and an effect", &[]);
                }
                return Ok(EffectDecl { condition: Some(self.formula(&items[1])?), effect: self.formula(&items[2])? });
            }
        }
        Ok(EffectDecl { condition: None, effect: self.formula(s)? })
    }

    fn config(&mut self, items: &[Sexp], file: &mut ProblemFile) -> Result<(), ParseError> {
        let mut cfg = Config::default();
        for (key, value, key_span) in keywords(&items[1..], &[":depth", ":beta", ":observer", ":actor"])? {
            let text = match value {
                Sexp::Word(w, _) => w.as_str(),
                Sexp::List(_, s) => return err(*s, format!("`{key}` expects a word"), &[]),
            };
            let dup = match key {
                ":depth" => cfg.depth.is_some(),
                ":beta" => cfg.beta.is_some(),
                ":observer" => cfg.observer.is_some(),
                _ => cfg.actor.is_some(),
            };
            if dup {
                return err(key_span, format!("`{key}` given twice"), &[]);
            }
            match key {
                ":depth" => match text.parse::<usize>() {
                    Ok(d) if d <= 16 => cfg.depth = Some(d),
                    _ => return err(value.span(), format!("`{text}` is not a depth between 0 and 16"), &["an integer"]),
                },
                ":beta" => match text.parse::<f64>() {
                    Ok(b) if b.is_finite() && b > 0.0 && text.chars().all(|c| c.is_ascii_digit() || ".eE+-".contains(c)) => {
                        cfg.beta = Some(b)
                    }
                    _ => return err(value.span(), format!("`{text}` is not a positive number"), &["a number"]),
                },
                ":observer" => {
                    let a = Agent::new(name(value, "an agent")?);
                    self.spans.observer = Some(value.span());
                    self.spans.agent_uses.push((a.clone(), value.span()));
                    cfg.observer = Some(a);
                }
                _ => {
                    let a = Agent::new(name(value, "an agent")?);
                    self.spans.actor = Some(value.span());
                    self.spans.agent_uses.push((a.clone(), value.span()));
                    cfg.actor = Some(a);
                }
            }
        }
        file.config = cfg;
        Ok(())
    }
}

fn declare<T: Clone + Ord>(
    items: &[Sexp],
    what: &str,
    make: impl Fn(String) -> T,
    out: &mut Vec<T>,
    spans: &mut Vec<SourceSpan>,
) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for s in items {
        let v = make(name(s, what)?);
        if !seen.insert(v.clone()) {
            return err(s.span(), format!("duplicate declaration of {}", s.describe()), &[]);
        }
        out.push(v);
        spans.push(s.span());
    }
    Ok(())
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let top = read_all(text)?;
    let root = match top.as_slice() {
        [one] => one,
        [] => return err(SourceSpan::default(), "empty input", &["(problem ...)"]),
        [_, second, ..] => return err(second.span(), "only one `problem` form is allowed per file", &["end of input"]),
    };
    let Sexp::List(items, root_span) = root else {
        return err(root.span(), format!("unexpected {}", root.describe()), &["(problem ...)"]);
    };
    if items.first().and_then(Sexp::word) != Some("problem") {
        let span = items.first().map(Sexp::span).unwrap_or(*root_span);
        return err(span, "a problem file starts with `problem`", &["problem"]);
    }
    let mut file = ProblemFile::default();
    let mut p = Parser { spans: SourceMap::default() };
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for section in &items[1..] {
        let Sexp::List(parts, span) = section else {
            return err(section.span(), format!("unexpected {}", section.describe()), SECTIONS);
        };
        let head = match parts.first().and_then(Sexp::word) {
            Some(h) if SECTIONS.contains(&h) => h,
            _ => {
                let s = parts.first().map(Sexp::span).unwrap_or(*span);
                return err(s, "unknown section", SECTIONS);
            }
        };
        let repeatable = matches!(head, "action" | "sensing" | "outcome");
        if !repeatable && !seen.insert(head) {
            return err(parts[0].span(), format!("section `{head}` given twice"), &[]);
        }
        let rest = &parts[1..];
        match head {
            "agents" => declare(rest, "an agent", Agent::new, &mut file.agents, &mut p.spans.agents)?,
            "atoms" => declare(rest, "an atom", Atom::new, &mut file.atoms, &mut p.spans.atoms)?,
            "action" => p.action(parts, *span, &mut file, false)?,
            "sensing" => p.action(parts, *span, &mut file, true)?,
            "init" => {
                for f in rest {
                    file.init.push(p.formula(f)?);
                    p.spans.init.push(f.span());
                }
            }
            "goal" => {
                if rest.len() != 1 {
                    return err(*span, "`goal` takes exactly one formula", &["a formula"]);
                }
                file.goal = Some(p.formula(&rest[0])?);
                p.spans.goal = Some(rest[0].span());
            }
            "goals" => {
                for f in rest {
                    file.goals.push(p.formula(f)?);
                    p.spans.goals.push(f.span());
                }
            }
            "obs" => {
                for s in rest {
                    file.observations.push(symbol(s, "an action name")?);
                    p.spans.observations.push(s.span());
                }
            }
            "outcome" => {
                let [a, r] = rest else {
                    return err(*span, "`outcome` takes an action and pos or neg", &["pos", "neg"]);
                };
                let action = symbol(a, "an action name")?;
                let result = match r.word() {
                    Some("pos") => SensingResult::Pos,
                    Some("neg") => SensingResult::Neg,
                    _ => return err(r.span(), format!("unexpected {}", r.describe()), &["pos", "neg"]),
                };
                if file.outcomes.insert(action.clone(), result).is_some() {
                    return err(a.span(), format!("second outcome for `{action}`"), &[]);
                }
                p.spans.outcomes.insert(action, *span);
            }
            _ => {
                p.config(parts, &mut file)?;
                p.spans.config = Some(*span);
            }
        }
    }
    file.spans = p.spans;
    Ok(file)
}

/// Parses a single formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let s = read_one(text)?;
    Parser { spans: SourceMap::default() }.formula(&s)
}
