//! PageRank over a HON, with aggregation of higher-order node scores onto the
//! physical entities they represent.

use crate::error::{HonError, Result};
use crate::ingest::{EntityId, Vocab};
use crate::wiring::HonNetwork;
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;

/// Where teleportation (and dangling mass) lands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Teleport {
    /// Uniform over HON nodes: the graph is fed to the unmodified algorithm.
    #[default]
    NodeUniform,
    /// Uniform over physical entities, split evenly among each entity's nodes.
    EntityUniform,
}

#[derive(Debug, Clone)]
pub struct RankVector {
    pub node_scores: Vec<f64>,
    pub entity_scores: BTreeMap<EntityId, f64>,
    pub damping: f64,
    pub iterations: usize,
}

/// Power iteration with uniform redistribution of dangling mass.
pub fn pagerank(
    g: &HonNetwork,
    damping: f64,
    tol: f64,
    max_iter: usize,
    teleport: Teleport,
) -> Result<RankVector> {
    let n = g.node_count();
    assert!(n >= 1);
    let v = teleport_vector(g, teleport);
    let mut r = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for iter in 1..=max_iter {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for node in g.nodes() {
            let edges = g.out_edges(node);
            let total: f64 = edges.values().sum();
            let mass = r[node as usize];
            if total == 0.0 {
                dangling += mass;
                continue;
            }
            for (&t, &w) in edges {
                next[t as usize] += damping * mass * w / total;
            }
        }
        for (x, &vi) in next.iter_mut().zip(&v) {
            *x += (damping * dangling + 1.0 - damping) * vi;
        }
        let diff: f64 = r.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut r, &mut next);
        if diff < tol {
            let entity_scores = aggregate_scores(&r, g);
            return Ok(RankVector {
                node_scores: r,
                entity_scores,
                damping,
                iterations: iter,
            });
        }
    }
    Err(HonError::NonConvergence(max_iter))
}

fn teleport_vector(g: &HonNetwork, teleport: Teleport) -> Vec<f64> {
    let n = g.node_count();
    match teleport {
        Teleport::NodeUniform => vec![1.0 / n as f64; n],
        Teleport::EntityUniform => {
            let mut multiplicity: FxHashMap<EntityId, usize> = FxHashMap::default();
            for node in g.nodes() {
                *multiplicity.entry(g.projection(node)).or_insert(0) += 1;
            }
            let entities = multiplicity.len() as f64;
            g.nodes()
                .map(|node| 1.0 / (entities * multiplicity[&g.projection(node)] as f64))
                .collect()
        }
    }
}

/// Sum node scores by the entity each node projects to.
pub fn aggregate_scores(node_scores: &[f64], g: &HonNetwork) -> BTreeMap<EntityId, f64> {
    let mut out = BTreeMap::new();
    for node in g.nodes() {
        *out.entry(g.projection(node)).or_insert(0.0) += node_scores[node as usize];
    }
    out
}

#[derive(Debug, Clone)]
pub struct RankDelta {
    pub entity: EntityId,
    pub score_base: f64,
    pub score_other: f64,
    pub delta: f64,
    /// (base rank - other rank) / base rank; positive means the entity moved
    /// up. Ranks are 1-based, ordered by descending score, ties by label.
    pub rel_rank_change: f64,
}

fn ranks(scores: &BTreeMap<EntityId, f64>, vocab: &Vocab) -> FxHashMap<EntityId, usize> {
    let mut order: Vec<EntityId> = scores.keys().copied().collect();
    order.sort_by(|&a, &b| {
        scores[&b]
            .partial_cmp(&scores[&a])
            .unwrap()
            .then_with(|| vocab.label(a).cmp(vocab.label(b)))
    });
    order.into_iter().enumerate().map(|(i, e)| (e, i + 1)).collect()
}

/// Per-entity score and rank changes, sorted by |delta| descending, ties by
/// label.
pub fn rank_delta(
    base: &BTreeMap<EntityId, f64>,
    other: &BTreeMap<EntityId, f64>,
    vocab: &Vocab,
) -> Result<Vec<RankDelta>> {
    if base.len() != other.len() || base.keys().any(|e| !other.contains_key(e)) {
        return Err(HonError::UniverseMismatch);
    }
    let base_ranks = ranks(base, vocab);
    let other_ranks = ranks(other, vocab);
    let mut out: Vec<RankDelta> = base
        .keys()
        .map(|&e| {
            let rb = base_ranks[&e] as f64;
            let ro = other_ranks[&e] as f64;
            RankDelta {
                entity: e,
                score_base: base[&e],
                score_other: other[&e],
                delta: other[&e] - base[&e],
                rel_rank_change: (rb - ro) / rb,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.delta
            .abs()
            .partial_cmp(&a.delta.abs())
            .unwrap()
            .then_with(|| vocab.label(a.entity).cmp(vocab.label(b.entity)))
    });
    Ok(out)
}
