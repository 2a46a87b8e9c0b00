//! Random problem generators shared by the property and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use empath_core::action::{Action, ActionKind, ConditionalEffect, Conjunction};
use empath_core::empathy::{ActorGroundTruth, EmpProblem};
use empath_core::kb::DEFAULT_CLOSURE_BUDGET;
use empath_core::logic::{conflict, Agent, CanonicalRml, Formula, Literal, ModalStep};
use empath_core::planner::MepProblem;
use empath_core::{ActionLibrary, KnowledgeBase, Problem, SensingResult, Step, Vocabulary};

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load(name: &str) -> Problem {
    let text = std::fs::read_to_string(scenario_dir().join(name)).unwrap();
    Problem::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn vocab(agents: usize, atoms: usize) -> Vocabulary {
    Vocabulary::new(["obs", "act", "c"].into_iter().take(agents), ["p", "q", "r", "s", "t"].into_iter().take(atoms))
}

pub fn formula<R: Rng>(rng: &mut R, v: &Vocabulary, depth: usize) -> Formula {
    let pick = rng.gen_range(0..if depth == 0 { 3 } else { 5 });
    match pick {
        0 | 1 => Formula::atom(v.atoms.choose(rng).unwrap().clone()),
        2 if depth == 0 => Formula::not(Formula::atom(v.atoms.choose(rng).unwrap().clone())),
        2 => Formula::not(formula(rng, v, depth)),
        3 => Formula::and([formula(rng, v, depth), formula(rng, v, depth)]),
        _ => Formula::believes(v.agents.choose(rng).unwrap().clone(), formula(rng, v, depth - 1)),
    }
}

pub fn rml<R: Rng>(rng: &mut R, universe: &[CanonicalRml]) -> CanonicalRml {
    universe.choose(rng).unwrap().clone()
}

/// Up to `n` pairwise consistent RMLs.
pub fn conjunction<R: Rng>(rng: &mut R, universe: &[CanonicalRml], n: usize) -> Conjunction {
    let mut out: Conjunction = Vec::new();
    for _ in 0..n {
        let r = rml(rng, universe);
        if !out.iter().any(|x| conflict(x, &r) || *x == r) {
            out.push(r);
        }
    }
    out
}

pub fn kb<R: Rng>(rng: &mut R, universe: &[CanonicalRml], n: usize, depth: usize) -> KnowledgeBase {
    KnowledgeBase::from_rmls(conjunction(rng, universe, n), depth).expect("pairwise consistent")
}

/// A library mixing conditional, unconditional and sensing actions.
pub fn library<R: Rng>(rng: &mut R, v: &Vocabulary, universe: &[CanonicalRml], n: usize) -> ActionLibrary {
    let mut lib = ActionLibrary::new(v.agents.clone());
    for i in 0..n {
        let owner = v.agents.choose(rng).unwrap().clone();
        let pre_len = rng.gen_range(0..=2);
        let pre = conjunction(rng, universe, pre_len);
        let kind = if rng.gen_bool(0.2) {
            let pos = conjunction(rng, universe, 1);
            let neg = pos.iter().map(empath_core::logic::negate).collect();
            ActionKind::Sensing { pos, neg }
        } else {
            let k = rng.gen_range(1..=2);
            let effects = (0..k)
                .map(|_| {
                    let cond_len = if rng.gen_bool(0.3) { 1 } else { 0 };
                    let eff_len = rng.gen_range(1..=2);
                    ConditionalEffect {
                        condition: conjunction(rng, universe, cond_len),
                        effect: conjunction(rng, universe, eff_len),
                    }
                })
                .collect();
            ActionKind::Deterministic { effects }
        };
        lib.insert(Action { name: format!("a{i}"), owner, pre, kind }).unwrap();
    }
    lib
}

pub fn outcomes<R: Rng>(rng: &mut R, lib: &ActionLibrary) -> BTreeMap<String, SensingResult> {
    lib.iter()
        .filter(|a| a.is_sensing())
        .map(|a| (a.name.clone(), if rng.gen_bool(0.5) { SensingResult::Pos } else { SensingResult::Neg }))
        .collect()
}

pub fn step_of(a: &Action, outcomes: &BTreeMap<String, SensingResult>) -> Step {
    match outcomes.get(&a.name) {
        Some(&o) if a.is_sensing() => Step::sensed(&a.name, o),
        _ => Step::new(&a.name),
    }
}

/// A random walk through executable actions, at most `len` long.
pub fn walk<R: Rng>(
    rng: &mut R,
    start: &KnowledgeBase,
    lib: &ActionLibrary,
    outcomes: &BTreeMap<String, SensingResult>,
    len: usize,
) -> Vec<Step> {
    let mut kb = start.clone();
    let mut out = Vec::new();
    for _ in 0..len {
        let options: Vec<&Action> = lib.iter().filter(|a| empath_core::action::executable(&kb, a)).collect();
        let Some(a) = options.choose(rng) else { break };
        let step = step_of(a, outcomes);
        kb = empath_core::action::progress(&kb, a, step.outcome).unwrap();
        out.push(step);
    }
    out
}

fn lit(atom: &str, positive: bool) -> CanonicalRml {
    CanonicalRml::literal(if positive { Literal::pos(atom) } else { Literal::neg(atom) })
}

fn believed(r: &CanonicalRml) -> CanonicalRml {
    r.under(ModalStep::pos("act"))
}

fn lift(conj: &[CanonicalRml]) -> Conjunction {
    conj.iter().cloned().chain(conj.iter().map(believed)).collect()
}

/// A small empathetic planning problem and a candidate actor model.
pub struct RandomEmp {
    pub z: EmpProblem,
    pub truth: ActorGroundTruth,
}

/// Observer model in the style of the fixtures: the world state is complete,
/// actor actions change world and actor beliefs together, and the observer
/// can inform the actor or act on the world. With `sound_beliefs` the actor
/// never believes anything false, only fails to know things.
///
/// The candidate actor model is the faithful one, randomly perturbed with
/// probability `perturb`.
pub fn lifted_domain<R: Rng>(rng: &mut R, sound_beliefs: bool, perturb: f64) -> RandomEmp {
    let atoms = ["p", "q", "r", "s"];
    let v = Vocabulary::new(["obs", "act"], atoms);
    let world: Vec<bool> = atoms.iter().map(|_| rng.gen_bool(0.5)).collect();
    let mut init: Vec<CanonicalRml> = atoms.iter().zip(&world).map(|(a, &b)| lit(a, b)).collect();
    let mut beliefs = Vec::new();
    for (a, &b) in atoms.iter().zip(&world) {
        if rng.gen_bool(0.6) {
            let value = if sound_beliefs { b } else { rng.gen_bool(0.5) };
            beliefs.push(lit(a, value));
        }
    }
    init.extend(beliefs.iter().map(believed));

    let random_lits = |rng: &mut R, n: usize| -> Conjunction {
        let mut chosen: Vec<&str> = atoms.to_vec();
        chosen.shuffle(rng);
        chosen.into_iter().take(n).map(|a| lit(a, rng.gen_bool(0.5))).collect()
    };

    let mut observer_lib = ActionLibrary::new(v.agents.clone());
    let mut actor_lib = ActionLibrary::new(v.agents.clone());
    for i in 0..rng.gen_range(3..=5) {
        let pre_len = rng.gen_range(0..=2);
        let pre = random_lits(rng, pre_len);
        let eff_len = rng.gen_range(1..=2);
        let eff = random_lits(rng, eff_len);
        let name = format!("act{i}");
        let det = |pre: Conjunction, eff: Conjunction| Action {
            name: name.clone(),
            owner: Agent::new("act"),
            pre,
            kind: ActionKind::Deterministic { effects: vec![ConditionalEffect { condition: Vec::new(), effect: eff }] },
        };
        observer_lib.insert(det(lift(&pre), lift(&eff))).unwrap();
        actor_lib.insert(det(pre, eff)).unwrap();
    }
    for i in 0..rng.gen_range(1..=2) {
        let l = random_lits(rng, 1);
        let (pre, eff) = if rng.gen_bool(0.6) { (l.clone(), l.iter().map(believed).collect()) } else { (Vec::new(), lift(&l)) };
        let action = Action {
            name: format!("obs{i}"),
            owner: Agent::new("obs"),
            pre,
            kind: ActionKind::Deterministic { effects: vec![ConditionalEffect { condition: Vec::new(), effect: eff }] },
        };
        observer_lib.insert(action).unwrap();
    }
    let goal = random_lits(rng, 1);
    let z = EmpProblem {
        vocab: v,
        problem: MepProblem {
            actions: observer_lib,
            init: KnowledgeBase::from_rmls(init, 2).unwrap(),
            goal,
            outcomes: BTreeMap::new(),
        },
        observer: Agent::new("obs"),
        actor: Agent::new("act"),
        closure_budget: DEFAULT_CLOSURE_BUDGET,
    };

    let mut truth_init = beliefs;
    let mut truth_lib = actor_lib;
    if rng.gen_bool(perturb) {
        match rng.gen_range(0..3) {
            0 if !truth_init.is_empty() => {
                let i = rng.gen_range(0..truth_init.len());
                truth_init[i] = empath_core::logic::negate(&truth_init[i]);
            }
            1 if !truth_init.is_empty() => {
                let i = rng.gen_range(0..truth_init.len());
                truth_init.remove(i);
            }
            _ => {
                let names: Vec<String> = truth_lib.names().map(String::from).collect();
                truth_lib = truth_lib.without(names.choose(rng).unwrap());
            }
        }
    }
    let truth = ActorGroundTruth { actions: truth_lib, init: KnowledgeBase::from_rmls(truth_init, 1).unwrap() };
    RandomEmp { z, truth }
}
