//! Wiring dependency rules into a weighted directed graph.
//!
//! Rules are processed in ascending order of context length. Each rule source
//! becomes a node; rule targets initially point at first-order nodes. Two
//! rewiring passes then (a) redirect each higher-order node's prefix edge to
//! it so it has an in-edge, and (b) redirect rule edges to the
//! highest-order existing node whose context is a suffix of the traversed
//! path. Both passes move edges without changing their weights.

use crate::error::{HonError, Result};
use crate::ingest::{Corpus, EntityId, Vocab};
use crate::rules::{RuleSet, SourcePath};
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;

pub type NodeId = u32;

/// A weighted directed graph whose nodes are entity-plus-history contexts.
/// A node's path is chronological: the last element is the physical entity it
/// projects to, earlier elements are the remembered history.
#[derive(Debug, Clone, Default)]
pub struct HonNetwork {
    paths: Vec<SourcePath>,
    index: FxHashMap<SourcePath, NodeId>,
    /// Out-edges per node; BTreeMap keeps target iteration deterministic.
    adjacency: Vec<BTreeMap<NodeId, f64>>,
}

impl HonNetwork {
    pub fn node_count(&self) -> usize {
        self.paths.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|m| m.len()).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.adjacency
            .iter()
            .flat_map(|m| m.values())
            .sum()
    }

    /// Directed density: edges / (nodes * (nodes - 1)).
    pub fn density(&self) -> f64 {
        let n = self.node_count() as f64;
        if n <= 1.0 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1.0))
    }

    pub fn node(&self, path: &[EntityId]) -> Option<NodeId> {
        self.index.get(path).copied()
    }

    pub fn path(&self, node: NodeId) -> &SourcePath {
        &self.paths[node as usize]
    }

    /// The physical entity a node represents.
    pub fn projection(&self, node: NodeId) -> EntityId {
        *self.paths[node as usize].last().unwrap()
    }

    pub fn order(&self, node: NodeId) -> usize {
        self.paths[node as usize].len()
    }

    pub fn max_order(&self) -> usize {
        self.paths.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    pub fn out_edges(&self, node: NodeId) -> &BTreeMap<NodeId, f64> {
        &self.adjacency[node as usize]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.paths.len() as NodeId
    }

    /// Node label: `entity` for order-1 nodes, `entity|h1,h2,...` with the
    /// history most-recent-first for higher orders.
    pub fn label(&self, node: NodeId, vocab: &Vocab) -> String {
        let path = self.path(node);
        let mut s = vocab.label(path[path.len() - 1]).to_string();
        if path.len() > 1 {
            s.push('|');
            for (i, &h) in path[..path.len() - 1].iter().rev().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(vocab.label(h));
            }
        }
        s
    }

    fn ensure_node(&mut self, path: &[EntityId]) -> NodeId {
        if let Some(&id) = self.index.get(path) {
            return id;
        }
        let id = self.paths.len() as NodeId;
        self.paths.push(path.to_vec());
        self.index.insert(path.to_vec(), id);
        self.adjacency.push(BTreeMap::new());
        id
    }

    fn add_edge(&mut self, from: NodeId, to: NodeId, weight: f64) {
        self.adjacency[from as usize].insert(to, weight);
    }

    fn edge_weight(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.adjacency[from as usize].get(&to).copied()
    }

    fn remove_edge(&mut self, from: NodeId, to: NodeId) {
        self.adjacency[from as usize].remove(&to);
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut degrees = vec![0usize; self.node_count()];
        for targets in &self.adjacency {
            for &t in targets.keys() {
                degrees[t as usize] += 1;
            }
        }
        degrees
    }

    /// Sum edge weights by (projected source entity, projected target entity).
    pub fn project_first_order(&self) -> BTreeMap<(EntityId, EntityId), f64> {
        let mut out = BTreeMap::new();
        for from in self.nodes() {
            let pf = self.projection(from);
            for (&to, &w) in self.out_edges(from) {
                *out.entry((pf, self.projection(to))).or_insert(0.0) += w;
            }
        }
        out
    }
}

fn sorted_sources<'a>(rules: &'a RuleSet, vocab: &Vocab) -> Vec<&'a SourcePath> {
    let mut sources: Vec<&SourcePath> = rules.rules.keys().collect();
    sources.sort_by_cached_key(|s| {
        (
            s.len(),
            s.iter()
                .map(|&e| vocab.label(e).to_string())
                .collect::<Vec<_>>(),
        )
    });
    sources
}

/// Convert a rule set into a HON graph (Fig. S2 steps A-D).
pub fn build_network(rules: &RuleSet, vocab: &Vocab) -> Result<HonNetwork> {
    let mut g = HonNetwork::default();
    let sources = sorted_sources(rules, vocab);

    // Steps A-C: rules become edges toward first-order nodes; each new
    // higher-order node steals its prefix edge, keeping the weight.
    for &source in &sources {
        let from = g.ensure_node(source);
        for &(target, count) in &rules.rules[source] {
            let to = g.ensure_node(&[target]);
            g.add_edge(from, to, count as f64);
        }
        if source.len() > 1 {
            let prev_source = g
                .node(&source[..source.len() - 1])
                .ok_or_else(|| HonError::DanglingPrefix(format!("{source:?}")))?;
            let prev_target = g.ensure_node(&[source[source.len() - 1]]);
            if g.edge_weight(prev_source, from).is_none() {
                let weight = g
                    .edge_weight(prev_source, prev_target)
                    .ok_or_else(|| HonError::DanglingPrefix(format!("{source:?}")))?;
                g.add_edge(prev_source, from, weight);
                g.remove_edge(prev_source, prev_target);
            }
        }
    }

    // Step D: point each rule edge at the highest-order node whose context is
    // a suffix of source-path + target.
    let mut to_add = Vec::new();
    let mut to_remove = Vec::new();
    for &source in &sources {
        for &(target, count) in &rules.rules[source] {
            let mut full: SourcePath = source.clone();
            full.push(target);
            let mut start = 0;
            while full.len() - start > 1 {
                if rules.rules.contains_key(&full[start..]) {
                    let from = g.node(source).unwrap();
                    let new_to = g.node(&full[start..]).unwrap();
                    let old_to = g.node(&[target]).unwrap();
                    to_remove.push((from, old_to));
                    to_add.push((from, new_to, count as f64));
                    break;
                }
                start += 1;
            }
        }
    }
    for (from, to) in to_remove {
        g.remove_edge(from, to);
    }
    for (from, to, w) in to_add {
        g.add_edge(from, to, w);
    }
    Ok(g)
}

/// First-order baseline: entities as nodes, pair counts (at or above
/// min_support) as edge weights.
pub fn build_first_order(corpus: &Corpus, min_support: u64) -> HonNetwork {
    let mut pair_counts: FxHashMap<(EntityId, EntityId), u64> = FxHashMap::default();
    for t in &corpus.trajectories {
        for w in t.entities.windows(2) {
            *pair_counts.entry((w[0], w[1])).or_insert(0) += 1;
        }
    }
    let mut rules = RuleSet::default();
    for (&(a, b), &c) in &pair_counts {
        if c >= min_support {
            rules.rules.entry(vec![a]).or_default().push((b, c));
        }
    }
    for targets in rules.rules.values_mut() {
        targets.sort_unstable_by_key(|&(t, _)| t);
    }
    build_network(&rules, &corpus.vocab).expect("order-1 rules cannot dangle")
}

/// Fixed-order baseline: every node is a full k-entity context; edges connect
/// a context to its one-step-shifted context, weighted by (k+1)-window counts.
pub fn build_fixed_order(corpus: &Corpus, k: usize, min_support: u64) -> HonNetwork {
    assert!(k >= 2);
    let mut window_counts: FxHashMap<SourcePath, u64> = FxHashMap::default();
    for t in &corpus.trajectories {
        for w in t.entities.windows(k + 1) {
            *window_counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&SourcePath, u64)> = window_counts
        .iter()
        .filter(|&(_, &c)| c >= min_support)
        .map(|(w, &c)| (w, c))
        .collect();
    kept.sort_unstable_by_key(|&(w, _)| w.clone());
    let mut g = HonNetwork::default();
    for (w, c) in kept {
        let from = g.ensure_node(&w[..k]);
        let to = g.ensure_node(&w[1..]);
        g.add_edge(from, to, c as f64);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_trajectories, ParseOptions};
    use crate::rules::{extract_rules, ExtractionParams};

    fn corpus(text: &str) -> Corpus {
        parse_trajectories(text, ParseOptions::default()).unwrap()
    }

    fn simple_rules(pairs: &[(&[&str], &[(&str, u64)])], vocab: &mut Vocab) -> RuleSet {
        let mut rules = RuleSet::default();
        for (source, targets) in pairs {
            let path: SourcePath = source.iter().map(|l| vocab.intern(l)).collect();
            let mut ts: Vec<(EntityId, u64)> = targets
                .iter()
                .map(|&(l, c)| (vocab.intern(l), c))
                .collect();
            ts.sort_unstable_by_key(|&(t, _)| t);
            rules.rules.insert(path, ts);
        }
        rules
    }

    #[test]
    fn single_first_order_rule() {
        let mut vocab = Vocab::new();
        let rules = simple_rules(&[(&["Shanghai"], &[("Singapore", 7)])], &mut vocab);
        let g = build_network(&rules, &vocab).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        let sh = g.node(&[vocab.get("Shanghai").unwrap()]).unwrap();
        let si = g.node(&[vocab.get("Singapore").unwrap()]).unwrap();
        assert_eq!(g.out_edges(sh)[&si], 7.0);
    }

    #[test]
    fn second_order_rewire() {
        let mut vocab = Vocab::new();
        let rules = simple_rules(
            &[
                (&["Shanghai"], &[("Singapore", 7)]),
                (
                    &["Shanghai", "Singapore"],
                    &[("LosAngeles", 4), ("Seattle", 3)],
                ),
            ],
            &mut vocab,
        );
        let g = build_network(&rules, &vocab).unwrap();
        let sh = vocab.get("Shanghai").unwrap();
        let si = vocab.get("Singapore").unwrap();
        let hi = g.node(&[sh, si]).unwrap();
        assert_eq!(g.label(hi, &vocab), "Singapore|Shanghai");
        let shn = g.node(&[sh]).unwrap();
        let sin = g.node(&[si]).unwrap();
        // Prefix edge redirected with unchanged weight.
        assert_eq!(g.edge_weight(shn, hi), Some(7.0));
        assert_eq!(g.edge_weight(shn, sin), None);
        assert_eq!(g.out_edges(hi).len(), 2);
        // Projection recovers the rule weights.
        let proj = g.project_first_order();
        assert_eq!(proj[&(sh, si)], 7.0);
        assert_eq!(proj[&(si, vocab.get("LosAngeles").unwrap())], 4.0);
        assert_eq!(proj[&(si, vocab.get("Seattle").unwrap())], 3.0);
    }

    fn canal_corpus(n: usize) -> Corpus {
        let mut text = String::new();
        for _ in 0..n {
            text.push_str("d f g h\ne f g i\n");
        }
        corpus(&text)
    }

    #[test]
    fn canal_network_has_higher_order_path() {
        let c = canal_corpus(20);
        let r = extract_rules(
            &c,
            ExtractionParams {
                max_order: 3,
                min_support: 5,
            },
        );
        let g = build_network(&r, &c.vocab).unwrap();
        let id = |l: &str| c.vocab.get(l).unwrap();
        let d = g.node(&[id("d")]).unwrap();
        let fd = g.node(&[id("d"), id("f")]).unwrap();
        let gfd = g.node(&[id("d"), id("f"), id("g")]).unwrap();
        let h = g.node(&[id("h")]).unwrap();
        assert_eq!(g.label(gfd, &c.vocab), "g|f,d");
        assert!(g.edge_weight(d, fd).is_some());
        assert!(g.edge_weight(fd, gfd).is_some());
        assert!(g.edge_weight(gfd, h).is_some());
        // First-order f and g nodes keep their aggregate out-edges.
        let f = g.node(&[id("f")]).unwrap();
        assert!(g.edge_weight(f, g.node(&[id("g")]).unwrap()).is_some());
        // Weight conservation through rewiring.
        assert_eq!(g.total_weight(), r.total_weight() as f64);
        // Every higher-order node has an in-edge.
        let degrees = g.in_degrees();
        for n in g.nodes() {
            if g.order(n) >= 2 {
                assert!(degrees[n as usize] >= 1, "{}", g.label(n, &c.vocab));
            }
        }
        // No source feeds two nodes projecting to the same entity.
        for n in g.nodes() {
            let mut seen = std::collections::HashSet::new();
            for &t in g.out_edges(n).keys() {
                assert!(seen.insert(g.projection(t)));
            }
        }
    }

    #[test]
    fn order_one_ruleset_matches_first_order_builder() {
        let c = corpus("a b a b a\n");
        let r = extract_rules(
            &c,
            ExtractionParams {
                max_order: 1,
                min_support: 1,
            },
        );
        let hon = build_network(&r, &c.vocab).unwrap();
        let first = build_first_order(&c, 1);
        assert_eq!(hon.project_first_order(), first.project_first_order());
    }

    #[test]
    fn first_order_counts() {
        let c = corpus("a b a b a\n");
        let g = build_first_order(&c, 1);
        let (a, b) = (c.vocab.get("a").unwrap(), c.vocab.get("b").unwrap());
        let proj = g.project_first_order();
        assert_eq!(proj[&(a, b)], 2.0);
        assert_eq!(proj[&(b, a)], 2.0);

        let g = build_first_order(&corpus("a b c\n"), 2);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn fixed_order_small() {
        let c = corpus("a b a b a\n");
        let g = build_fixed_order(&c, 2, 1);
        let (a, b) = (c.vocab.get("a").unwrap(), c.vocab.get("b").unwrap());
        let ab = g.node(&[a, b]).unwrap();
        let ba = g.node(&[b, a]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.label(ab, &c.vocab), "b|a");
        assert_eq!(g.edge_weight(ab, ba), Some(2.0));
        assert_eq!(g.edge_weight(ba, ab), Some(1.0));
    }

    #[test]
    fn fixed_order_short_trajectory_contributes_nothing() {
        let c = corpus("a b\nc d e f\n");
        let g = build_fixed_order(&c, 3, 1);
        assert_eq!(g.edge_count(), 1); // only c d e f yields one 4-window
    }
}
