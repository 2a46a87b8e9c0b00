//! Exhaustive comparison of syntactic KB reasoning against the Kripke oracle.
//!
//! For a small vocabulary, every premise set of up to `max_premises` RMLs is
//! checked against every RML conclusion: the KB's verdict must never claim an
//! entailment the oracle refutes (soundness), and cases the oracle confirms
//! but the KB misses are listed as incomplete. Pairwise conflict detection is
//! compared with oracle satisfiability too.
//!
//! The oracle is bounded by a world count. Random probes over larger models
//! check that they realise no RML type missing from the bounded table, which
//! is the empirical evidence that the bound loses nothing for this fragment.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kb::KnowledgeBase;
use crate::kripke::{KripkeModel, OracleBounds, OracleError, RmlTypes};
use crate::logic::{conflict, CanonicalRml, Vocabulary};

#[derive(Clone, Copy, Debug)]
pub struct GridBounds {
    pub agents: usize,
    pub atoms: usize,
    pub depth: usize,
    pub max_premises: usize,
    pub oracle: OracleBounds,
}

impl Default for GridBounds {
    fn default() -> Self {
        GridBounds { agents: 2, atoms: 2, depth: 2, max_premises: 2, oracle: OracleBounds::default() }
    }
}

pub fn grid_vocabulary(agents: usize, atoms: usize) -> Vocabulary {
    let agent_names = ["obs", "act"].iter().map(|s| s.to_string()).chain((2..).map(|i| format!("a{i}")));
    let atom_names = ["p", "q", "r", "s"].iter().map(|s| s.to_string()).chain((4..).map(|i| format!("x{i}")));
    Vocabulary::new(agent_names.take(agents), atom_names.take(atoms))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub premises: Vec<String>,
    pub conclusion: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridReport {
    pub agents: usize,
    pub atoms: usize,
    pub depth: usize,
    pub max_premises: usize,
    pub max_worlds: usize,
    pub rmls: usize,
    pub types: usize,
    pub premise_sets: usize,
    pub inconsistent_premise_sets: usize,
    pub cases: usize,
    pub oracle_entailed: usize,
    pub sound_violations: Vec<Case>,
    pub incomplete_cases: Vec<Case>,
    /// Premise sets the oracle finds unsatisfiable but no pair conflicts, or
    /// the other way round.
    pub consistency_mismatches: Vec<Vec<String>>,
    pub incompleteness_rate: f64,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let from = s.last().map_or(0, |&x: &usize| x + 1);
            for i in from..n {
                let mut t: Vec<usize> = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn run_grid(bounds: &GridBounds) -> Result<(GridReport, RmlTypes), OracleError> {
    let vocab = grid_vocabulary(bounds.agents, bounds.atoms);
    let table = RmlTypes::build(&vocab, bounds.depth, bounds.oracle)?;
    let universe = &table.universe;
    let sets = subsets(universe.len(), bounds.max_premises);

    struct Partial {
        inconsistent: usize,
        cases: usize,
        entailed: usize,
        unsound: Vec<Case>,
        incomplete: Vec<Case>,
        mismatches: Vec<Vec<String>>,
    }
    let render = |idx: &[usize]| idx.iter().map(|&i| universe[i].to_string()).collect::<Vec<_>>();
    let parts: Vec<Partial> = sets
        .par_iter()
        .map(|set| {
            let mut p = Partial {
                inconsistent: 0,
                cases: 0,
                entailed: 0,
                unsound: Vec::new(),
                incomplete: Vec::new(),
                mismatches: Vec::new(),
            };
            let members: Vec<CanonicalRml> = set.iter().map(|&i| universe[i].clone()).collect();
            let syntactic_conflict =
                members.iter().enumerate().any(|(i, a)| members[i + 1..].iter().any(|b| conflict(a, b)));
            let sat = table.satisfiable(set);
            if sat == syntactic_conflict {
                p.mismatches.push(render(set));
            }
            if !sat {
                p.inconsistent += 1;
                return p;
            }
            let kb = KnowledgeBase::from_rmls(members, usize::MAX).expect("consistent set");
            for (c, r) in universe.iter().enumerate() {
                p.cases += 1;
                let oracle = table.entails(set, c);
                let syntactic = kb.entails_rml(r);
                if oracle {
                    p.entailed += 1;
                }
                let case = || Case { premises: render(set), conclusion: r.to_string() };
                if syntactic && !oracle {
                    p.unsound.push(case());
                } else if oracle && !syntactic {
                    p.incomplete.push(case());
                }
            }
            p
        })
        .collect();

    let mut report = GridReport {
        agents: bounds.agents,
        atoms: bounds.atoms,
        depth: bounds.depth,
        max_premises: bounds.max_premises,
        max_worlds: bounds.oracle.max_worlds,
        rmls: universe.len(),
        types: table.type_count(),
        premise_sets: sets.len(),
        inconsistent_premise_sets: 0,
        cases: 0,
        oracle_entailed: 0,
        sound_violations: Vec::new(),
        incomplete_cases: Vec::new(),
        consistency_mismatches: Vec::new(),
        incompleteness_rate: 0.0,
    };
    for p in parts {
        report.inconsistent_premise_sets += p.inconsistent;
        report.cases += p.cases;
        report.oracle_entailed += p.entailed;
        report.sound_violations.extend(p.unsound);
        report.incomplete_cases.extend(p.incomplete);
        report.consistency_mismatches.extend(p.mismatches);
    }
    report.incompleteness_rate =
        if report.cases == 0 { 0.0 } else { report.incomplete_cases.len() as f64 / report.cases as f64 };
    Ok((report, table))
}

/// A random KD45 relation on `n` worlds: disjoint clusters that see
/// themselves, with every other world pointing into one cluster.
pub fn random_kd45<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let clustered = rng.gen_range(1..=n);
    let k = rng.gen_range(1..=clustered);
    let mut clusters = vec![0u64; k];
    for (j, &w) in order[..clustered].iter().enumerate() {
        let c = if j < k { j } else { rng.gen_range(0..k) };
        clusters[c] |= 1 << w;
    }
    let mut rel = vec![0u64; n];
    for &c in &clusters {
        for (w, r) in rel.iter_mut().enumerate() {
            if c >> w & 1 == 1 {
                *r = c;
            }
        }
    }
    for &w in &order[clustered..] {
        rel[w] = clusters[rng.gen_range(0..k)];
    }
    rel
}

pub fn random_model<R: Rng>(rng: &mut R, vocab: &Vocabulary, n: usize) -> KripkeModel {
    use std::collections::{BTreeMap, BTreeSet};
    let mut edges = BTreeMap::new();
    for a in &vocab.agents {
        let rel = random_kd45(rng, n);
        let mut list = Vec::new();
        for (w, r) in rel.iter().enumerate() {
            list.extend((0..n).filter(|v| r >> v & 1 == 1).map(|v| (w, v)));
        }
        edges.insert(a.clone(), list);
    }
    let valuation: Vec<BTreeSet<_>> =
        (0..n).map(|_| vocab.atoms.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()).collect();
    KripkeModel::new(vocab.agents.clone(), vocab.atoms.clone(), n, &edges, &valuation).expect("well-formed")
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeReport {
    pub seed: u64,
    pub models: usize,
    pub min_worlds: usize,
    pub max_worlds: usize,
    /// Size of the RML combinations checked, one more than the premise bound.
    pub combination_size: usize,
    /// Pointed models satisfying a combination of that size that no bounded
    /// model satisfies. Nonzero means the bound is too small for the grid.
    pub missed_combinations: usize,
    /// Pointed models whose full RML type is absent from the bounded table.
    /// Informational: full types may need more worlds than any grid query.
    pub new_full_types: usize,
}

fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn go(items: &[usize], k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if !f(cur) {
            return false;
        }
        if cur.len() == k {
            return true;
        }
        for (i, &x) in items.iter().enumerate() {
            cur.push(x);
            let ok = go(&items[i + 1..], k, cur, f);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    go(items, k, &mut Vec::new(), f)
}

/// Samples random models larger than the table's bound. Every combination
/// of up to `premises + 1` RMLs true at some world must already be
/// satisfiable within the bound, otherwise grid verdicts could be wrong.
pub fn probe_larger_models(
    table: &RmlTypes,
    vocab: &Vocabulary,
    premises: usize,
    seed: u64,
    models: usize,
    worlds: (usize, usize),
) -> ProbeReport {
    let k = premises + 1;
    let mut known: HashSet<Vec<usize>> = HashSet::new();
    for members in table.type_members() {
        for_each_subset(&members, k, &mut |s| {
            known.insert(s.to_vec());
            true
        });
    }
    let (missed, new_full) = (0..models)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let n = rng.gen_range(worlds.0..=worlds.1);
            let m = random_model(&mut rng, vocab, n);
            let masks: Vec<u64> = table.universe.iter().map(|r| m.eval_rml(r).expect("in vocabulary")).collect();
            let (mut missed, mut new_full) = (0, 0);
            for w in 0..n {
                let members: Vec<usize> = (0..masks.len()).filter(|&j| masks[j] >> w & 1 == 1).collect();
                if !table.realised(&members) {
                    new_full += 1;
                }
                if !for_each_subset(&members, k, &mut |s| known.contains(s)) {
                    missed += 1;
                }
            }
            (missed, new_full)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    ProbeReport {
        seed,
        models,
        min_worlds: worlds.0,
        max_worlds: worlds.1,
        combination_size: k,
        missed_combinations: missed,
        new_full_types: new_full,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::validate_frame;

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(4, 2).len(), 1 + 4 + 6);
    }

    #[test]
    fn random_relations_are_kd45() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = grid_vocabulary(2, 2);
        for n in 1..=7 {
            for _ in 0..50 {
                assert!(validate_frame(&random_model(&mut rng, &v, n)).is_ok());
            }
        }
    }

    #[test]
    fn small_grid_is_sound() {
        let b = GridBounds { agents: 1, atoms: 1, depth: 1, max_premises: 2, oracle: OracleBounds { max_worlds: 3, ..Default::default() } };
        let (r, _) = run_grid(&b).unwrap();
        assert!(r.sound_violations.is_empty());
        assert!(r.consistency_mismatches.is_empty());
        assert!(r.cases > 0);
    }

    #[test]
    fn subset_walk_visits_all_small_subsets() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 2, 3], 2, &mut |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen.len(), 1 + 3 + 3);
    }
}
