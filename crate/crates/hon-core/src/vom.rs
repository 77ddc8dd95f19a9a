//! Variable-order Markov baseline: the same supported contexts and
//! distributions as rule extraction, arranged as a context tree and pruned
//! top-down from the deepest order, for comparison against the bottom-up rule
//! growing of the HON pipeline.

use crate::ingest::EntityId;
use crate::rules::{
    build_distributions, kl_divergence, significance_threshold, CountTable, DistributionTable,
    RuleSet, SourcePath,
};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use std::collections::BTreeMap;

/// Context tree over all supported contexts. A context's parent is the
/// one-shorter suffix (oldest entity removed); parents of order-1 contexts
/// form the root, which carries the unconditioned next-step distribution.
#[derive(Debug, Clone)]
pub struct ContextTree {
    pub distrs: DistributionTable,
    /// Root marginal as (target, count) pairs aggregated over order-1 contexts.
    pub root: Vec<(EntityId, u64)>,
    children: FxHashMap<SourcePath, Vec<SourcePath>>,
}

impl ContextTree {
    pub fn contexts(&self) -> impl Iterator<Item = &SourcePath> {
        self.distrs.distrs.keys()
    }

    pub fn children(&self, context: &[EntityId]) -> &[SourcePath] {
        self.children
            .get(context)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Build the tree from raw counts with the same min-support filtering and
/// normalization as rule extraction, so both methods see identical numbers.
pub fn build_context_tree(counts: &CountTable, min_support: u64) -> ContextTree {
    let distrs = build_distributions(counts, min_support);
    let mut children: FxHashMap<SourcePath, Vec<SourcePath>> = FxHashMap::default();
    let mut root: BTreeMap<EntityId, u64> = BTreeMap::new();
    for (source, d) in &distrs.distrs {
        if source.len() >= 2 {
            children
                .entry(source[1..].to_vec())
                .or_default()
                .push(source.clone());
        } else {
            for &(t, c) in &d.targets {
                *root.entry(t).or_insert(0) += c;
            }
        }
    }
    for c in children.values_mut() {
        c.sort_unstable();
    }
    ContextTree {
        distrs,
        root: root.into_iter().collect(),
        children,
    }
}

/// Prune the tree from the deepest order down to order 1. A context is
/// retained iff it has a retained child, or its distribution diverges from
/// its parent's by more than the adaptive threshold for its own order and
/// support.
pub fn prune_vom(tree: &ContextTree) -> FxHashSet<SourcePath> {
    let mut retained: FxHashSet<SourcePath> = FxHashSet::default();
    let max_order = tree.contexts().map(|c| c.len()).max().unwrap_or(0);
    let root_total: u64 = tree.root.iter().map(|&(_, c)| c).sum();
    for order in (1..=max_order).rev() {
        for context in tree.contexts().filter(|c| c.len() == order) {
            if tree.children(context).iter().any(|ch| retained.contains(ch)) {
                retained.insert(context.clone());
                continue;
            }
            let d = &tree.distrs.distrs[context];
            let divergence = if order == 1 {
                let root = &tree.root;
                let prob = |t: EntityId| {
                    root.iter()
                        .find(|&&(rt, _)| rt == t)
                        .map(|&(_, c)| c as f64 / root_total as f64)
                };
                d.iter_probs()
                    .map(|(t, p)| p * (p / prob(t).expect("order-1 targets are in the root")).log2())
                    .sum::<f64>()
                    .max(0.0)
            } else {
                let parent = &tree.distrs.distrs[&context[1..]];
                kl_divergence(d.iter_probs(), parent)
                    .expect("child support is contained in parent support")
            };
            if divergence > significance_threshold(order, d.total) {
                retained.insert(context.clone());
            }
        }
    }
    retained
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub order: usize,
    pub hon: usize,
    pub vom: usize,
    pub hon_only: usize,
    pub vom_only: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub totals: ComparisonRow,
}

/// Per-order counts of contexts retained by HON, by VOM, and by exactly one
/// of the two.
pub fn compare_rulesets(hon: &RuleSet, vom: &FxHashSet<SourcePath>) -> ComparisonReport {
    let max_order = hon
        .rules
        .keys()
        .chain(vom.iter())
        .map(|s| s.len())
        .max()
        .unwrap_or(0);
    let mut rows = Vec::new();
    let mut totals = ComparisonRow {
        order: 0,
        hon: 0,
        vom: 0,
        hon_only: 0,
        vom_only: 0,
    };
    for order in 1..=max_order {
        let hon_set: FxHashSet<&SourcePath> =
            hon.rules.keys().filter(|s| s.len() == order).collect();
        let vom_set: FxHashSet<&SourcePath> = vom.iter().filter(|s| s.len() == order).collect();
        let row = ComparisonRow {
            order,
            hon: hon_set.len(),
            vom: vom_set.len(),
            hon_only: hon_set.difference(&vom_set).count(),
            vom_only: vom_set.difference(&hon_set).count(),
        };
        totals.hon += row.hon;
        totals.vom += row.vom;
        totals.hon_only += row.hon_only;
        totals.vom_only += row.vom_only;
        rows.push(row);
    }
    ComparisonReport { rows, totals }
}
