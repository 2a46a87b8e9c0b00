//! Explicit finite Kripke semantics, used as ground truth for the syntactic
//! reasoning in [`crate::logic`] and [`crate::kb`].
//!
//! Worlds are indices `0..n` with `n <= 64`; each agent's accessibility
//! relation is stored as one successor bitmask per world and each atom as the
//! mask of worlds where it holds. Formulas evaluate to the mask of worlds that
//! satisfy them.
//!
//! Bounded enumeration walks models by world count, then by the tuple of
//! relation bitmaps in lexicographic order, then by valuation, so results and
//! the first countermodel found are deterministic. Enumeration is parallel
//! over relation tuples, and `find_first` keeps the answer independent of the
//! thread count.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Agent, Atom, CanonicalRml, Formula, Sign, Vocabulary};

pub const MAX_WORLDS: usize = 64;

/// Default cap on the number of models a bounded query may enumerate.
pub const DEFAULT_MODEL_BUDGET: u128 = 200_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameProperty {
    Serial,
    Transitive,
    Euclidean,
}

impl std::fmt::Display for FrameProperty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrameProperty::Serial => "serial",
            FrameProperty::Transitive => "transitive",
            FrameProperty::Euclidean => "Euclidean",
        })
    }
}

/// `witness` lists the worlds involved: `[w]` for a world without successor,
/// `[w, v, u]` for `wRv, vRu, not wRu` (transitivity) or
/// `wRv, wRu, not vRu` (Euclideanness).
#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("relation of agent {agent} is not {property} (witness worlds {witness:?})")]
pub struct FrameError {
    pub agent: Agent,
    pub property: FrameProperty,
    pub witness: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ModelError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(Atom),
    #[error("unknown agent `{0}`")]
    UnknownAgent(Agent),
    #[error("world {0} out of range")]
    WorldOutOfRange(usize),
    #[error("a model needs between 1 and {MAX_WORLDS} worlds, got {0}")]
    WorldCount(usize),
    #[error("valuation lists {got} worlds, model has {expected}")]
    ValuationLength { expected: usize, got: usize },
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum OracleError {
    #[error("enumeration needs {needed} models, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("max_worlds must be at least 1")]
    NoWorlds,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KripkeModel {
    agents: Vec<Agent>,
    atoms: Vec<Atom>,
    worlds: usize,
    /// `relations[agent][world]` = successor mask.
    relations: Vec<Vec<u64>>,
    /// `truth[atom]` = mask of worlds where the atom holds.
    truth: Vec<u64>,
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

impl KripkeModel {
    /// Builds a model from edge lists and per-world atom sets. Agents without
    /// an entry in `edges` get the empty relation.
    pub fn new(
        agents: Vec<Agent>,
        atoms: Vec<Atom>,
        worlds: usize,
        edges: &BTreeMap<Agent, Vec<(usize, usize)>>,
        valuation: &[BTreeSet<Atom>],
    ) -> Result<Self, ModelError> {
        if worlds == 0 || worlds > MAX_WORLDS {
            return Err(ModelError::WorldCount(worlds));
        }
        check_unique(agents.iter().map(Agent::as_str))?;
        check_unique(atoms.iter().map(Atom::as_str))?;
        if valuation.len() != worlds {
            return Err(ModelError::ValuationLength { expected: worlds, got: valuation.len() });
        }
        let mut relations = vec![vec![0u64; worlds]; agents.len()];
        for (agent, list) in edges {
            let i = agents
                .iter()
                .position(|a| a == agent)
                .ok_or_else(|| ModelError::UnknownAgent(agent.clone()))?;
            for &(w, v) in list {
                if w >= worlds {
                    return Err(ModelError::WorldOutOfRange(w));
                }
                if v >= worlds {
                    return Err(ModelError::WorldOutOfRange(v));
                }
                relations[i][w] |= 1 << v;
            }
        }
        let mut truth = vec![0u64; atoms.len()];
        for (w, set) in valuation.iter().enumerate() {
            for atom in set {
                let k = atoms
                    .iter()
                    .position(|a| a == atom)
                    .ok_or_else(|| ModelError::UnknownAtom(atom.clone()))?;
                truth[k] |= 1 << w;
            }
        }
        Ok(KripkeModel { agents, atoms, worlds, relations, truth })
    }

    fn from_masks(vocab: &Vocabulary, worlds: usize, relations: Vec<Vec<u64>>, truth: Vec<u64>) -> Self {
        KripkeModel {
            agents: vocab.agents.clone(),
            atoms: vocab.atoms.clone(),
            worlds,
            relations,
            truth,
        }
    }

    pub fn worlds(&self) -> usize {
        self.worlds
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn successors(&self, agent: &Agent, world: usize) -> Option<Vec<usize>> {
        let i = self.agents.iter().position(|a| a == agent)?;
        self.relations[i].get(world).map(|&m| bits(m).collect())
    }

    pub fn holds(&self, atom: &Atom, world: usize) -> Option<bool> {
        let k = self.atoms.iter().position(|a| a == atom)?;
        Some(self.truth[k] >> world & 1 == 1)
    }

    pub fn edges(&self) -> BTreeMap<Agent, Vec<(usize, usize)>> {
        self.agents
            .iter()
            .zip(&self.relations)
            .map(|(a, rel)| {
                let list = rel
                    .iter()
                    .enumerate()
                    .flat_map(|(w, &m)| bits(m).map(move |v| (w, v)))
                    .collect();
                (a.clone(), list)
            })
            .collect()
    }

    pub fn valuation(&self) -> Vec<BTreeSet<Atom>> {
        (0..self.worlds)
            .map(|w| {
                self.atoms
                    .iter()
                    .zip(&self.truth)
                    .filter(|(_, &m)| m >> w & 1 == 1)
                    .map(|(a, _)| a.clone())
                    .collect()
            })
            .collect()
    }

    /// Mask of worlds satisfying `phi`.
    pub fn eval(&self, phi: &Formula) -> Result<u64, ModelError> {
        let all = full_mask(self.worlds);
        Ok(match phi {
            Formula::Atom(a) => {
                let k = self
                    .atoms
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| ModelError::UnknownAtom(a.clone()))?;
                self.truth[k]
            }
            Formula::Not(g) => !self.eval(g)? & all,
            Formula::And(gs) => {
                let mut m = all;
                for g in gs {
                    m &= self.eval(g)?;
                }
                m
            }
            Formula::Believes(agent, g) => {
                let i = self
                    .agents
                    .iter()
                    .position(|x| x == agent)
                    .ok_or_else(|| ModelError::UnknownAgent(agent.clone()))?;
                box_mask(&self.relations[i], self.eval(g)?, self.worlds)
            }
        })
    }

    /// Mask of worlds satisfying a canonical RML. Unknown symbols are errors.
    pub fn eval_rml(&self, r: &CanonicalRml) -> Result<u64, ModelError> {
        let all = full_mask(self.worlds);
        let body = r.body();
        let k = self
            .atoms
            .iter()
            .position(|x| *x == body.atom)
            .ok_or_else(|| ModelError::UnknownAtom(body.atom.clone()))?;
        let mut m = if body.positive { self.truth[k] } else { !self.truth[k] & all };
        for step in r.prefix().iter().rev() {
            let i = self
                .agents
                .iter()
                .position(|x| *x == step.agent)
                .ok_or_else(|| ModelError::UnknownAgent(step.agent.clone()))?;
            m = box_mask(&self.relations[i], m, self.worlds);
            if step.sign == Sign::Neg {
                m = !m & all;
            }
        }
        Ok(m)
    }

    pub fn to_dump(&self, point: Option<usize>) -> ModelDump {
        ModelDump {
            agents: self.agents.iter().map(|a| a.to_string()).collect(),
            atoms: self.atoms.iter().map(|a| a.to_string()).collect(),
            worlds: (0..self.worlds).map(|w| format!("w{w}")).collect(),
            relations: self
                .edges()
                .into_iter()
                .map(|(a, es)| (a.to_string(), es.into_iter().map(|(w, v)| [w, v]).collect()))
                .collect(),
            valuation: self
                .valuation()
                .into_iter()
                .map(|s| s.into_iter().map(|a| a.to_string()).collect())
                .collect(),
            point,
        }
    }

    pub fn from_dump(d: &ModelDump) -> Result<(Self, Option<usize>), ModelError> {
        for name in d.agents.iter().chain(&d.atoms) {
            if name.is_empty() {
                return Err(ModelError::DuplicateSymbol(String::new()));
            }
        }
        let agents: Vec<Agent> = d.agents.iter().map(Agent::new).collect();
        let atoms: Vec<Atom> = d.atoms.iter().map(Atom::new).collect();
        let mut edges = BTreeMap::new();
        for (a, es) in &d.relations {
            if a.is_empty() {
                return Err(ModelError::UnknownAgent(Agent::new("?")));
            }
            edges.insert(Agent::new(a), es.iter().map(|[w, v]| (*w, *v)).collect::<Vec<_>>());
        }
        let mut valuation = Vec::with_capacity(d.valuation.len());
        for set in &d.valuation {
            let mut s = BTreeSet::new();
            for a in set {
                if a.is_empty() {
                    return Err(ModelError::UnknownAtom(Atom::new("?")));
                }
                s.insert(Atom::new(a));
            }
            valuation.push(s);
        }
        let m = KripkeModel::new(agents, atoms, d.worlds.len(), &edges, &valuation)?;
        if let Some(p) = d.point {
            if p >= m.worlds {
                return Err(ModelError::WorldOutOfRange(p));
            }
        }
        Ok((m, d.point))
    }
}

fn check_unique<'a>(names: impl Iterator<Item = &'a str>) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::DuplicateSymbol(n.to_string()));
        }
    }
    Ok(())
}

fn box_mask(rel: &[u64], inner: u64, worlds: usize) -> u64 {
    let mut out = 0u64;
    for (w, &succ) in rel.iter().enumerate().take(worlds) {
        if succ & !inner == 0 {
            out |= 1 << w;
        }
    }
    out
}

/// JSON form of a model: worlds, per-agent edge lists and valuations.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDump {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub worlds: Vec<String>,
    pub relations: BTreeMap<String, Vec<[usize; 2]>>,
    pub valuation: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointedModel {
    pub model: KripkeModel,
    pub point: usize,
}

impl PointedModel {
    pub fn new(model: KripkeModel, point: usize) -> Result<Self, ModelError> {
        if point >= model.worlds {
            return Err(ModelError::WorldOutOfRange(point));
        }
        Ok(PointedModel { model, point })
    }

    pub fn satisfies(&self, phi: &Formula) -> Result<bool, ModelError> {
        model_check(&self.model, self.point, phi)
    }
}

/// Checks seriality, transitivity and Euclideanness, in that order, agent by
/// agent, and reports the first violation found.
pub fn validate_frame(m: &KripkeModel) -> Result<(), FrameError> {
    for (agent, rel) in m.agents.iter().zip(&m.relations) {
        if let Some(prop) = frame_violation(rel, m.worlds) {
            return Err(FrameError { agent: agent.clone(), property: prop.0, witness: prop.1 });
        }
    }
    Ok(())
}

fn frame_violation(rel: &[u64], n: usize) -> Option<(FrameProperty, Vec<usize>)> {
    for (w, &succ) in rel.iter().enumerate().take(n) {
        if succ == 0 {
            return Some((FrameProperty::Serial, vec![w]));
        }
    }
    for (w, &succ) in rel.iter().enumerate().take(n) {
        for v in bits(succ) {
            let missing = rel[v] & !succ;
            if missing != 0 {
                return Some((FrameProperty::Transitive, vec![w, v, missing.trailing_zeros() as usize]));
            }
        }
    }
    for (w, &succ) in rel.iter().enumerate().take(n) {
        for v in bits(succ) {
            let missing = succ & !rel[v];
            if missing != 0 {
                return Some((FrameProperty::Euclidean, vec![w, v, missing.trailing_zeros() as usize]));
            }
        }
    }
    None
}

fn is_kd45(rel: &[u64], n: usize) -> bool {
    frame_violation(rel, n).is_none()
}

pub fn model_check(m: &KripkeModel, world: usize, phi: &Formula) -> Result<bool, ModelError> {
    if world >= m.worlds {
        return Err(ModelError::WorldOutOfRange(world));
    }
    Ok(m.eval(phi)? >> world & 1 == 1)
}

/// Every KD45 relation on `n` worlds, as per-world successor masks, in
/// increasing order of the row-major relation bitmap.
pub fn kd45_relations(n: usize) -> Vec<Vec<u64>> {
    assert!((1..=8).contains(&n), "relation enumeration supports 1..=8 worlds");
    // R is KD45 iff every R(w) is non-empty and every v in R(w) has R(v) = R(w).
    fn go(w: usize, n: usize, rel: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if w == n {
            if is_kd45(rel, n) {
                out.push(rel.clone());
            }
            return;
        }
        if rel[w] != 0 {
            return go(w + 1, n, rel, out);
        }
        for s in 1..(1u64 << n) {
            // Successors that are already fixed must agree with s.
            if bits(s).any(|v| v < w && rel[v] != s) {
                continue;
            }
            let mut forced = Vec::new();
            let mut ok = true;
            for v in bits(s).filter(|&v| v > w) {
                if rel[v] == 0 {
                    rel[v] = s;
                    forced.push(v);
                } else if rel[v] != s {
                    ok = false;
                    break;
                }
            }
            if ok {
                rel[w] = s;
                go(w + 1, n, rel, out);
                rel[w] = 0;
            }
            for v in forced {
                rel[v] = 0;
            }
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut vec![0; n], &mut out);
    let key = |r: &Vec<u64>| r.iter().enumerate().fold(0u128, |acc, (w, &m)| acc | (m as u128) << (w * n));
    out.sort_by_key(key);
    out.dedup();
    out
}

/// The bounded space of validated models over a vocabulary.
pub struct ModelSpace {
    vocab: Vocabulary,
    layers: Vec<(usize, Vec<Vec<u64>>)>,
}

impl ModelSpace {
    pub fn new(vocab: &Vocabulary, max_worlds: usize, budget: u128) -> Result<Self, OracleError> {
        if max_worlds == 0 {
            return Err(OracleError::NoWorlds);
        }
        let mut layers = Vec::new();
        let mut needed: u128 = 0;
        for n in 1..=max_worlds {
            if n > 8 {
                return Err(OracleError::BudgetExceeded { needed: u128::MAX, budget });
            }
            let rels = kd45_relations(n);
            let tuples = (rels.len() as u128).saturating_pow(vocab.agents.len() as u32);
            let vals = 1u128.checked_shl((vocab.atoms.len() * n) as u32).unwrap_or(u128::MAX);
            needed = needed.saturating_add(tuples.saturating_mul(vals));
            if needed > budget {
                return Err(OracleError::BudgetExceeded { needed, budget });
            }
            layers.push((n, rels));
        }
        Ok(ModelSpace { vocab: vocab.clone(), layers })
    }

    pub fn model_count(&self) -> u128 {
        self.layers
            .iter()
            .map(|(n, rels)| {
                (rels.len() as u128).pow(self.vocab.agents.len() as u32) << (self.vocab.atoms.len() * n)
            })
            .sum()
    }

    fn tuple_count(&self, layer: usize) -> usize {
        self.layers[layer].1.len().pow(self.vocab.agents.len() as u32)
    }

    fn relations_for(&self, layer: usize, mut index: usize) -> Vec<Vec<u64>> {
        let rels = &self.layers[layer].1;
        let mut out = vec![Vec::new(); self.vocab.agents.len()];
        // Last agent varies fastest.
        for slot in out.iter_mut().rev() {
            *slot = rels[index % rels.len()].clone();
            index /= rels.len();
        }
        out
    }

    fn truth_for(&self, n: usize, valuation: u64) -> Vec<u64> {
        let m = full_mask(n);
        (0..self.vocab.atoms.len()).map(|k| valuation >> (k * n) & m).collect()
    }

    pub fn model(&self, id: ModelId) -> KripkeModel {
        let n = self.layers[id.layer].0;
        KripkeModel::from_masks(
            &self.vocab,
            n,
            self.relations_for(id.layer, id.tuple),
            self.truth_for(n, id.valuation),
        )
    }

    /// Finds the first model, in enumeration order, where `test` returns a
    /// non-zero world mask, and the lowest such world.
    pub fn find_first<F>(&self, test: F) -> Option<(ModelId, usize)>
    where
        F: Fn(&KripkeModel) -> u64 + Sync,
    {
        for (layer, (n, _)) in self.layers.iter().enumerate() {
            let vals = 1u64 << (self.vocab.atoms.len() * n);
            let hit = (0..self.tuple_count(layer)).into_par_iter().find_map_first(|tuple| {
                let relations = self.relations_for(layer, tuple);
                let mut m = KripkeModel::from_masks(&self.vocab, *n, relations, Vec::new());
                for valuation in 0..vals {
                    m.truth = self.truth_for(*n, valuation);
                    let mask = test(&m);
                    if mask != 0 {
                        return Some((ModelId { layer, tuple, valuation }, mask.trailing_zeros() as usize));
                    }
                }
                None
            });
            if hit.is_some() {
                return hit;
            }
        }
        None
    }

    /// Calls `visit` on every model; per-thread accumulators are merged in
    /// enumeration order.
    pub fn fold<A, F, M>(&self, init: impl Fn() -> A + Sync + Send, visit: F, merge: M) -> A
    where
        A: Send,
        F: Fn(&mut A, &KripkeModel, ModelId) + Sync,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let mut acc = init();
        for (layer, (n, _)) in self.layers.iter().enumerate() {
            let vals = 1u64 << (self.vocab.atoms.len() * n);
            let part = (0..self.tuple_count(layer))
                .into_par_iter()
                .fold(&init, |mut a, tuple| {
                    let relations = self.relations_for(layer, tuple);
                    let mut m = KripkeModel::from_masks(&self.vocab, *n, relations, Vec::new());
                    for valuation in 0..vals {
                        m.truth = self.truth_for(*n, valuation);
                        visit(&mut a, &m, ModelId { layer, tuple, valuation });
                    }
                    a
                })
                .reduce(&init, &merge);
            acc = merge(acc, part);
        }
        acc
    }
}

/// Position of a model in the enumeration order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ModelId {
    pub layer: usize,
    pub tuple: usize,
    pub valuation: u64,
}

fn check_vocab(phi: &Formula, vocab: &Vocabulary) -> Result<(), ModelError> {
    let mut atoms = BTreeSet::new();
    phi.collect_atoms(&mut atoms);
    if let Some(a) = atoms.into_iter().find(|a| !vocab.atoms.contains(a)) {
        return Err(ModelError::UnknownAtom(a));
    }
    let mut agents = BTreeSet::new();
    phi.collect_agents(&mut agents);
    if let Some(a) = agents.into_iter().find(|a| !vocab.agents.contains(a)) {
        return Err(ModelError::UnknownAgent(a));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct OracleBounds {
    pub max_worlds: usize,
    pub budget: u128,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds { max_worlds: 4, budget: DEFAULT_MODEL_BUDGET }
    }
}

/// First pointed model (in enumeration order) satisfying every formula in
/// `gamma`, if any exists within the bound.
pub fn find_model(
    gamma: &[Formula],
    vocab: &Vocabulary,
    bounds: OracleBounds,
) -> Result<Option<PointedModel>, OracleError> {
    for phi in gamma {
        check_vocab(phi, vocab)?;
    }
    let space = ModelSpace::new(vocab, bounds.max_worlds, bounds.budget)?;
    let hit = space.find_first(|m| {
        let mut mask = full_mask(m.worlds);
        for phi in gamma {
            mask &= m.eval(phi).expect("vocabulary checked");
            if mask == 0 {
                break;
            }
        }
        mask
    });
    Ok(hit.map(|(id, w)| PointedModel { model: space.model(id), point: w }))
}

pub fn oracle_satisfiable(
    gamma: &[Formula],
    vocab: &Vocabulary,
    bounds: OracleBounds,
) -> Result<bool, OracleError> {
    Ok(find_model(gamma, vocab, bounds)?.is_some())
}

/// A pointed model of `gamma ∧ ¬phi`, if one exists within the bound.
pub fn find_countermodel(
    gamma: &[Formula],
    phi: &Formula,
    vocab: &Vocabulary,
    bounds: OracleBounds,
) -> Result<Option<PointedModel>, OracleError> {
    let mut all: Vec<Formula> = gamma.to_vec();
    all.push(Formula::not(phi.clone()));
    find_model(&all, vocab, bounds)
}

pub fn oracle_entails(
    gamma: &[Formula],
    phi: &Formula,
    vocab: &Vocabulary,
    bounds: OracleBounds,
) -> Result<bool, OracleError> {
    Ok(find_countermodel(gamma, phi, vocab, bounds)?.is_none())
}

/// The set of RML "types" realised in a bounded model space: for every
/// pointed model, the set of RMLs (of the enumerated universe) true there.
///
/// Entailment between RML sets reduces to a scan over the types, which makes
/// exhaustive sweeps over premise sets cheap.
pub struct RmlTypes {
    pub universe: Vec<CanonicalRml>,
    index: HashMap<CanonicalRml, usize>,
    /// Type bitset -> first pointed model realising it.
    types: BTreeMap<Vec<u64>, (ModelId, usize)>,
    space: ModelSpace,
}

impl RmlTypes {
    pub fn build(vocab: &Vocabulary, depth: usize, bounds: OracleBounds) -> Result<Self, OracleError> {
        let universe = vocab.enumerate_rmls(depth);
        let space = ModelSpace::new(vocab, bounds.max_worlds, bounds.budget)?;
        let words = universe.len().div_ceil(64);
        let types = space.fold(
            HashMap::<Vec<u64>, (ModelId, usize)>::new,
            |acc, m, id| {
                let masks: Vec<u64> =
                    universe.iter().map(|r| m.eval_rml(r).expect("universe within vocabulary")).collect();
                for w in 0..m.worlds {
                    let mut t = vec![0u64; words];
                    for (k, mask) in masks.iter().enumerate() {
                        if mask >> w & 1 == 1 {
                            t[k / 64] |= 1 << (k % 64);
                        }
                    }
                    acc.entry(t).and_modify(|e| *e = (*e).min((id, w))).or_insert((id, w));
                }
            },
            |mut a, b| {
                for (k, v) in b {
                    a.entry(k).and_modify(|e| *e = (*e).min(v)).or_insert(v);
                }
                a
            },
        );
        let index = universe.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        Ok(RmlTypes { universe, index, types: types.into_iter().collect(), space })
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn index_of(&self, r: &CanonicalRml) -> Option<usize> {
        self.index.get(r).copied()
    }

    fn has(t: &[u64], k: usize) -> bool {
        t[k / 64] >> (k % 64) & 1 == 1
    }

    fn witness(&self, premises: &[usize], excluded: Option<usize>) -> Option<(ModelId, usize)> {
        self.types
            .iter()
            .filter(|(t, _)| premises.iter().all(|&k| Self::has(t, k)))
            .filter(|(t, _)| excluded.is_none_or(|k| !Self::has(t, k)))
            .map(|(_, id)| *id)
            .min()
    }

    /// The realised types as sorted member index lists.
    pub fn type_members(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let n = self.universe.len();
        self.types.keys().map(move |t| (0..n).filter(|&k| Self::has(t, k)).collect())
    }

    /// Whether some bounded pointed model makes exactly `members` true.
    pub fn realised(&self, members: &[usize]) -> bool {
        let mut t = vec![0u64; self.universe.len().div_ceil(64)];
        for &k in members {
            t[k / 64] |= 1 << (k % 64);
        }
        self.types.contains_key(&t)
    }

    pub fn satisfiable(&self, premises: &[usize]) -> bool {
        self.witness(premises, None).is_some()
    }

    pub fn entails(&self, premises: &[usize], conclusion: usize) -> bool {
        self.witness(premises, Some(conclusion)).is_none()
    }

    pub fn countermodel(&self, premises: &[usize], conclusion: usize) -> Option<PointedModel> {
        self.witness(premises, Some(conclusion))
            .map(|(id, w)| PointedModel { model: self.space.model(id), point: w })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn voc() -> Vocabulary {
        Vocabulary::new(["act"], ["p"])
    }

    fn model(worlds: usize, edges: &[(usize, usize)], p_worlds: &[usize]) -> KripkeModel {
        let mut e = BTreeMap::new();
        e.insert(Agent::new("act"), edges.to_vec());
        let val = (0..worlds)
            .map(|w| if p_worlds.contains(&w) { [Atom::new("p")].into() } else { BTreeSet::new() })
            .collect::<Vec<_>>();
        KripkeModel::new(vec![Agent::new("act")], vec![Atom::new("p")], worlds, &e, &val).unwrap()
    }

    #[test]
    fn frame_validation_examples() {
        assert!(validate_frame(&model(1, &[(0, 0)], &[])).is_ok());
        let err = validate_frame(&model(2, &[], &[])).unwrap_err();
        assert_eq!(err.property, FrameProperty::Serial);
        let err = validate_frame(&model(2, &[(0, 1)], &[])).unwrap_err();
        assert_eq!((err.property, err.witness), (FrameProperty::Serial, vec![1]));
        let err = validate_frame(&model(2, &[(0, 1), (1, 0)], &[])).unwrap_err();
        assert_eq!(err.property, FrameProperty::Transitive);
        let err = validate_frame(&model(3, &[(0, 1), (0, 2), (1, 1), (2, 2)], &[])).unwrap_err();
        assert_eq!(err.property, FrameProperty::Euclidean);
    }

    #[test]
    fn model_check_examples() {
        let m = model(1, &[(0, 0)], &[0]);
        assert!(model_check(&m, 0, &Formula::atom("p")).unwrap());
        let m = model(2, &[(0, 0), (0, 1), (1, 1), (1, 0)], &[0]);
        let bp = Formula::believes("act", Formula::atom("p"));
        assert!(!model_check(&m, 0, &bp).unwrap());
        let undecided = Formula::and([
            Formula::not(bp.clone()),
            Formula::not(Formula::believes("act", Formula::not(Formula::atom("p")))),
        ]);
        assert!(model_check(&m, 0, &undecided).unwrap());
        assert_eq!(
            model_check(&m, 0, &Formula::atom("q")).unwrap_err(),
            ModelError::UnknownAtom(Atom::new("q"))
        );
    }

    #[test]
    fn kd45_relation_counts_match_brute_force() {
        for n in 1..=3 {
            let brute: Vec<Vec<u64>> = (0u64..1 << (n * n))
                .map(|b| (0..n).map(|w| b >> (w * n) & ((1 << n) - 1)).collect::<Vec<u64>>())
                .filter(|r| is_kd45(r, n))
                .collect();
            assert_eq!(kd45_relations(n), brute, "n = {n}");
        }
    }

    #[test]
    fn oracle_examples() {
        let b = OracleBounds::default();
        let p = Formula::atom("p");
        let bp = Formula::believes("act", p.clone());
        let b_not_p = Formula::believes("act", Formula::not(p.clone()));
        assert!(oracle_entails(std::slice::from_ref(&bp), &Formula::not(b_not_p.clone()), &voc(), b).unwrap());
        assert!(!oracle_entails(std::slice::from_ref(&p), &bp, &voc(), b).unwrap());
        assert!(!oracle_entails(&[], &bp, &voc(), b).unwrap());
        assert!(!oracle_satisfiable(&[bp.clone(), b_not_p], &voc(), b).unwrap());
        assert!(oracle_satisfiable(&[p.clone(), Formula::not(bp)], &voc(), b).unwrap());
        assert!(oracle_satisfiable(&[], &voc(), b).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let v = Vocabulary::new(["a", "b"], ["p", "q", "r"]);
        let err = ModelSpace::new(&v, 4, 1000).err().unwrap();
        assert!(matches!(err, OracleError::BudgetExceeded { .. }));
    }

    #[test]
    fn dump_round_trip() {
        let m = model(2, &[(0, 1), (1, 1)], &[1]);
        let d = m.to_dump(Some(0));
        let json = serde_json::to_string(&d).unwrap();
        let back: ModelDump = serde_json::from_str(&json).unwrap();
        let (m2, point) = KripkeModel::from_dump(&back).unwrap();
        assert_eq!(m2, m);
        assert_eq!(point, Some(0));
    }
}
