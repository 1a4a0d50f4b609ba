//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxalign::{
    CandidateSet, ConstraintPack, Direction, NodeId, Scope, TaxNode, TaxonomyGraph, WeightTable,
};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn load(name: &str) -> TaxonomyGraph {
    TaxonomyGraph::load_path(data(name)).unwrap()
}

/// Random DAG whose index order equals creation order (ids are zero padded).
/// Node `i` gets up to `max_parents` hypernyms among earlier nodes, or none
/// with probability `p_root`.
pub fn random_dag(
    rng: &mut ChaCha8Rng,
    prefix: &str,
    n: usize,
    max_parents: usize,
    p_root: f64,
) -> TaxonomyGraph {
    let nodes = (0..n)
        .map(|i| {
            TaxNode::new(
                format!("{prefix}{i:04}"),
                format!("w{}", rng.gen_range(0..4)),
            )
        })
        .collect();
    let mut edges = Vec::new();
    for i in 1..n {
        if rng.gen_bool(p_root) {
            continue;
        }
        let k = rng.gen_range(1..=max_parents.min(i));
        let mut parents: Vec<usize> = (0..i).collect();
        parents.shuffle(rng);
        for &p in &parents[..k] {
            edges.push((
                NodeId::new(format!("{prefix}{p:04}")),
                NodeId::new(format!("{prefix}{i:04}")),
            ));
        }
    }
    TaxonomyGraph::new(nodes, edges).unwrap()
}

pub struct Instance {
    pub source: TaxonomyGraph,
    pub target: TaxonomyGraph,
    pub candidates: CandidateSet,
}

/// Random alignment problem: up to `max_src` source nodes, each with up to
/// `max_cands` candidates drawn from a random target DAG.
pub fn random_instance(seed: u64, max_src: usize, max_cands: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_src = rng.gen_range(2..=max_src);
    let n_tgt = rng.gen_range(max_cands.max(4)..=3 * max_src.max(4));
    let source = random_dag(&mut rng, "s", n_src, 2, 0.1);
    let target = random_dag(&mut rng, "t", n_tgt, 2, 0.05);
    let all: Vec<usize> = (0..n_tgt).collect();
    let lists = (0..n_src)
        .map(|_| {
            let k = rng.gen_range(0..=max_cands.min(n_tgt));
            all.choose_multiple(&mut rng, k).copied().collect()
        })
        .collect();
    Instance {
        source,
        target,
        candidates: CandidateSet::from_lists(n_tgt, lists),
    }
}

/// Random positive weights for every candidate list.
pub fn random_weights(seed: u64, cand: &CandidateSet) -> WeightTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    WeightTable::from_rows(
        (0..cand.len())
            .map(|s| {
                (0..cand.candidates(s).len())
                    .map(|_| rng.gen_range(0.01..1.0))
                    .collect()
            })
            .collect(),
    )
}

/// Reachability by repeated composition of the edge relation:
/// `R_1 = E`, `R_{k+1} = R_k ∪ (R_k ∘ E)` until nothing changes.
/// `reach[a][b]` is true iff `a` is a proper ancestor of `b`.
pub fn naive_reach(g: &TaxonomyGraph) -> Vec<Vec<bool>> {
    let n = g.len();
    let mut edge = vec![vec![false; n]; n];
    for (h, c) in g.edges() {
        edge[h][c] = true;
    }
    let mut reach = edge.clone();
    loop {
        let mut next = reach.clone();
        for a in 0..n {
            for m in 0..n {
                if reach[a][m] {
                    for b in 0..n {
                        if edge[m][b] {
                            next[a][b] = true;
                        }
                    }
                }
            }
        }
        if next == reach {
            return reach;
        }
        reach = next;
    }
}

pub struct Relations {
    pub edge: Vec<Vec<bool>>,
    pub reach: Vec<Vec<bool>>,
}

impl Relations {
    pub fn of(g: &TaxonomyGraph) -> Self {
        let n = g.len();
        let mut edge = vec![vec![false; n]; n];
        for (h, c) in g.edges() {
            edge[h][c] = true;
        }
        Relations {
            edge,
            reach: naive_reach(g),
        }
    }

    /// Is `other` above `node` (`up`) or below it (`!up`) within `scope`?
    pub fn related(&self, other: usize, node: usize, scope: Scope, up: bool) -> bool {
        let m = match scope {
            Scope::Immediate => &self.edge,
            Scope::Any => &self.reach,
        };
        if up {
            m[other][node]
        } else {
            m[node][other]
        }
    }
}

/// Straight loop over (rule, side, context node, context label).
#[allow(clippy::too_many_arguments)]
pub fn naive_support(
    pack: &ConstraintPack,
    src: usize,
    tgt: usize,
    cand: &CandidateSet,
    w: &WeightTable,
    src_rel: &Relations,
    tgt_rel: &Relations,
    s_max: f64,
) -> f64 {
    let mut total = 0.0;
    for (i, rule) in pack.rules().iter().enumerate() {
        let mut side_sums = [0.0f64; 2];
        for (k, up) in [true, false].into_iter().enumerate() {
            for other in 0..cand.len() {
                if !src_rel.related(other, src, rule.src_scope, up) {
                    continue;
                }
                for (pos, &label) in cand.candidates(other).iter().enumerate() {
                    if tgt_rel.related(label, tgt, rule.tgt_scope, up) {
                        side_sums[k] += w.weight(other, pos);
                    }
                }
            }
        }
        let value = match rule.direction {
            Direction::Hypernym => side_sums[0],
            Direction::Hyponym => side_sums[1],
            Direction::Both => side_sums[0].min(side_sums[1]),
        };
        total += pack.strength(i) * value;
    }
    total.clamp(0.0, s_max)
}

pub const PACKS: [&str; 4] = ["II*", "AI*", "IA*", "AA*"];
