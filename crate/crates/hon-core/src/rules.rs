//! Variable-order dependency rule extraction.
//!
//! Counts subsequence frequencies, filters them by minimum support,
//! normalizes into conditional next-step distributions, and then grows rules
//! from first order upward: a longer context replaces a shorter one only when
//! its next-step distribution diverges from the currently assumed context by
//! more than an adaptive threshold that scales with the context's order and
//! shrinks with its support.

use crate::error::{HonError, Result};
use crate::ingest::{extract_subsequences, Corpus, EntityId};
use rustc_hash::{FxHashMap, FxHashSet};

/// A conditioning context in chronological order; the last element is the
/// current entity, earlier elements are the remembered history.
pub type SourcePath = Vec<EntityId>;

#[derive(Debug, Clone, Copy)]
pub struct ExtractionParams {
    pub max_order: usize,
    pub min_support: u64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            max_order: 5,
            min_support: 5,
        }
    }
}

/// Raw subsequence counts: source path -> target entity -> occurrences.
#[derive(Debug, Clone, Default)]
pub struct CountTable {
    pub counts: FxHashMap<SourcePath, FxHashMap<EntityId, u64>>,
}

/// Per-source next-step distribution over targets, kept as filtered counts so
/// that probabilities, supports and rule weights all see the same data.
#[derive(Debug, Clone)]
pub struct SourceDistr {
    /// (target, count), sorted by target id; every count >= min_support.
    pub targets: Vec<(EntityId, u64)>,
    pub total: u64,
}

impl SourceDistr {
    pub fn prob(&self, target: EntityId) -> Option<f64> {
        self.targets
            .iter()
            .find(|&&(t, _)| t == target)
            .map(|&(_, c)| c as f64 / self.total as f64)
    }

    pub fn iter_probs(&self) -> impl Iterator<Item = (EntityId, f64)> + '_ {
        self.targets
            .iter()
            .map(move |&(t, c)| (t, c as f64 / self.total as f64))
    }
}

#[derive(Debug, Clone, Default)]
pub struct DistributionTable {
    pub distrs: FxHashMap<SourcePath, SourceDistr>,
}

/// Output of rule extraction. `rules` maps every retained source (including
/// all prefixes of retained higher-order sources) to its filtered target
/// counts; `valid` is the subset of sources that were confirmed as
/// maximal-order contexts rather than added only as a prefix.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    pub rules: FxHashMap<SourcePath, Vec<(EntityId, u64)>>,
    pub valid: FxHashSet<SourcePath>,
}

impl RuleSet {
    pub fn total_weight(&self) -> u64 {
        self.rules
            .values()
            .map(|ts| ts.iter().map(|&(_, c)| c).sum::<u64>())
            .sum()
    }

    pub fn max_order(&self) -> usize {
        self.rules.keys().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn count_by_order(&self) -> Vec<usize> {
        let max = self.max_order();
        let mut counts = vec![0usize; max + 1];
        for s in self.rules.keys() {
            counts[s.len()] += 1;
        }
        counts
    }
}

/// Count all subsequence windows of length 2..=max_order+1. A window of
/// length L contributes one observation of its last entity conditioned on the
/// preceding L-1 entities, so max_order=5 can yield fifth-order rules.
pub fn build_observations(corpus: &Corpus, max_order: usize) -> CountTable {
    let mut table = CountTable::default();
    for t in &corpus.trajectories {
        for len in 2..=max_order + 1 {
            if t.entities.len() < len {
                break;
            }
            for w in extract_subsequences(&t.entities, len) {
                let (target, source) = (w[len - 1], &w[..len - 1]);
                match table.counts.get_mut(source) {
                    Some(m) => *m.entry(target).or_insert(0) += 1,
                    None => {
                        table
                            .counts
                            .entry(source.to_vec())
                            .or_default()
                            .insert(target, 1);
                    }
                }
            }
        }
    }
    table
}

/// Drop (source, target) pairs observed fewer than min_support times, drop
/// sources left without targets, and normalize the rest.
pub fn build_distributions(table: &CountTable, min_support: u64) -> DistributionTable {
    let mut distrs = FxHashMap::default();
    for (source, targets) in &table.counts {
        let mut kept: Vec<(EntityId, u64)> = targets
            .iter()
            .filter(|&(_, &c)| c >= min_support)
            .map(|(&t, &c)| (t, c))
            .collect();
        if kept.is_empty() {
            continue;
        }
        kept.sort_unstable_by_key(|&(t, _)| t);
        let total = kept.iter().map(|&(_, c)| c).sum();
        distrs.insert(source.clone(), SourceDistr { targets: kept, total });
    }
    DistributionTable { distrs }
}

/// Kullback-Leibler divergence in bits between two sparse distributions given
/// as (id, probability) pairs sorted by id. Every point of P's support must
/// also be in Q's support.
pub fn kl_divergence(
    p: impl Iterator<Item = (EntityId, f64)>,
    q: &SourceDistr,
) -> Result<f64> {
    let mut sum = 0.0;
    for (id, pp) in p {
        if pp == 0.0 {
            continue;
        }
        let qq = q.prob(id).ok_or(HonError::SupportViolation)?;
        sum += pp * (pp / qq).log2();
    }
    Ok(sum.max(0.0))
}

/// The adaptive significance threshold: order / log2(support). A context
/// observed once can never be significant (the threshold is infinite).
pub fn significance_threshold(order: usize, support: u64) -> f64 {
    if support <= 1 {
        return f64::INFINITY;
    }
    order as f64 / (support as f64).log2()
}

struct Extractor<'a> {
    distrs: &'a DistributionTable,
    /// source path -> all one-longer paths ending with it (one older entity
    /// prepended), sorted for deterministic traversal.
    extensions: FxHashMap<&'a [EntityId], Vec<&'a SourcePath>>,
    rules: RuleSet,
}

impl<'a> Extractor<'a> {
    fn new(distrs: &'a DistributionTable) -> Self {
        let mut extensions: FxHashMap<&[EntityId], Vec<&SourcePath>> = FxHashMap::default();
        for source in distrs.distrs.keys() {
            if source.len() >= 2 {
                extensions.entry(&source[1..]).or_default().push(source);
            }
        }
        for exts in extensions.values_mut() {
            exts.sort_unstable();
        }
        Self {
            distrs,
            extensions,
            rules: RuleSet::default(),
        }
    }

    fn add_to_rules(&mut self, source: &[EntityId]) {
        if source.is_empty() || self.rules.rules.contains_key(source) {
            return;
        }
        let distr = &self.distrs.distrs[source];
        self.rules
            .rules
            .insert(source.to_vec(), distr.targets.clone());
        self.add_to_rules(&source[..source.len() - 1]);
    }

    fn add_valid(&mut self, source: &[EntityId]) {
        self.rules.valid.insert(source.to_vec());
        self.add_to_rules(source);
    }

    fn extend_rule(&mut self, valid: &'a SourcePath, curr: &'a SourcePath, order: usize, max_order: usize) {
        if order >= max_order {
            self.add_valid(valid);
            return;
        }
        let Some(extended) = self.extensions.get(curr.as_slice()) else {
            self.add_valid(valid);
            return;
        };
        let valid_distr = &self.distrs.distrs[valid];
        let new_order = order + 1;
        // The borrow checker cannot see that `extensions` is never mutated.
        let extended: Vec<&SourcePath> = extended.clone();
        for ext in extended {
            let ext_distr = &self.distrs.distrs[ext];
            let divergence = kl_divergence(ext_distr.iter_probs(), valid_distr)
                .expect("higher-order support is contained in lower-order support");
            if divergence > significance_threshold(new_order, ext_distr.total) {
                self.extend_rule(ext, ext, new_order, max_order);
            } else {
                self.extend_rule(valid, ext, new_order, max_order);
            }
        }
    }
}

/// Run the full rule-extraction pass over a corpus.
pub fn extract_rules(corpus: &Corpus, params: ExtractionParams) -> RuleSet {
    let counts = build_observations(corpus, params.max_order);
    let distrs = build_distributions(&counts, params.min_support);
    extract_rules_from_distributions(&distrs, params.max_order)
}

/// Rule growing over an already-built distribution table. Exposed separately
/// so the VOM baseline can share the exact same distributions.
pub fn extract_rules_from_distributions(
    distrs: &DistributionTable,
    max_order: usize,
) -> RuleSet {
    let mut roots: Vec<&SourcePath> = distrs
        .distrs
        .keys()
        .filter(|s| s.len() == 1)
        .collect();
    roots.sort_unstable();
    let mut ex = Extractor::new(distrs);
    for root in roots {
        ex.add_valid(root);
        ex.extend_rule(root, root, 1, max_order);
    }
    ex.rules
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_trajectories, ParseOptions};

    fn corpus(text: &str) -> Corpus {
        parse_trajectories(text, ParseOptions::default()).unwrap()
    }

    fn path(corpus: &Corpus, labels: &[&str]) -> SourcePath {
        labels.iter().map(|l| corpus.vocab.get(l).unwrap()).collect()
    }

    #[test]
    fn observations_single_trajectory() {
        let c = corpus("a b c\n");
        let t = build_observations(&c, 2);
        let a = path(&c, &["a"]);
        let b = path(&c, &["b"]);
        let ab = path(&c, &["a", "b"]);
        let (ia, ib, ic) = (a[0], b[0], c.vocab.get("c").unwrap());
        assert_eq!(t.counts[&a][&ib], 1);
        assert_eq!(t.counts[&b][&ic], 1);
        assert_eq!(t.counts[&ab][&ic], 1);
        assert_eq!(t.counts.len(), 3);
        let _ = ia;
    }

    #[test]
    fn observations_short_trajectories() {
        let c = corpus("a b\na b\n");
        let t = build_observations(&c, 5);
        assert_eq!(t.counts.len(), 1);
        let a = path(&c, &["a"]);
        assert_eq!(t.counts[&a][&c.vocab.get("b").unwrap()], 2);
    }

    #[test]
    fn distributions_filter_and_normalize() {
        let c = corpus("a b\na c\n");
        let mut t = CountTable::default();
        let a = path(&c, &["a"]);
        let (b, cc) = (c.vocab.get("b").unwrap(), c.vocab.get("c").unwrap());
        t.counts.insert(a.clone(), [(b, 9), (cc, 1)].into_iter().collect());
        let d = build_distributions(&t, 5);
        assert_eq!(d.distrs[&a].targets, vec![(b, 9)]);
        assert!((d.distrs[&a].prob(b).unwrap() - 1.0).abs() < 1e-12);

        t.counts.insert(a.clone(), [(b, 3), (cc, 1)].into_iter().collect());
        let d = build_distributions(&t, 5);
        assert!(d.distrs.is_empty());

        let d = build_distributions(&t, 1);
        assert!((d.distrs[&a].prob(b).unwrap() - 0.75).abs() < 1e-12);
        assert!((d.distrs[&a].prob(cc).unwrap() - 0.25).abs() < 1e-12);
    }

    fn distr(pairs: &[(EntityId, u64)]) -> SourceDistr {
        let mut targets = pairs.to_vec();
        targets.sort_unstable_by_key(|&(t, _)| t);
        let total = targets.iter().map(|&(_, c)| c).sum();
        SourceDistr { targets, total }
    }

    #[test]
    fn kl_identity_is_zero() {
        let q = distr(&[(0, 1), (1, 1)]);
        let d = kl_divergence(q.iter_probs(), &q).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn kl_point_mass_vs_uniform() {
        let q = distr(&[(0, 1), (1, 1)]);
        let p = distr(&[(0, 1)]);
        let d = kl_divergence(p.iter_probs(), &q).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kl_hand_computed() {
        let q = distr(&[(0, 1), (1, 1)]);
        let p = distr(&[(0, 7), (1, 3)]);
        let expected = 0.7 * (1.4f64).log2() + 0.3 * (0.6f64).log2();
        let d = kl_divergence(p.iter_probs(), &q).unwrap();
        assert!((d - expected).abs() < 1e-12);
    }

    #[test]
    fn kl_support_violation() {
        let q = distr(&[(0, 1)]);
        let p = distr(&[(0, 1), (1, 1)]);
        assert!(matches!(
            kl_divergence(p.iter_probs(), &q),
            Err(HonError::SupportViolation)
        ));
    }

    #[test]
    fn threshold_values() {
        assert!((significance_threshold(1, 2) - 1.0).abs() < 1e-12);
        assert!((significance_threshold(2, 16) - 0.5).abs() < 1e-12);
        assert!(significance_threshold(3, 1).is_infinite());
        assert!(significance_threshold(3, 0).is_infinite());
    }

    fn canal_corpus(n: usize) -> Corpus {
        let mut text = String::new();
        for _ in 0..n {
            text.push_str("d f g h\n");
            text.push_str("e f g i\n");
        }
        corpus(&text)
    }

    #[test]
    fn canal_rules() {
        let c = canal_corpus(20);
        let r = extract_rules(
            &c,
            ExtractionParams {
                max_order: 3,
                min_support: 5,
            },
        );
        let dfg = path(&c, &["d", "f", "g"]);
        let efg = path(&c, &["e", "f", "g"]);
        let df = path(&c, &["d", "f"]);
        let fg = path(&c, &["f", "g"]);
        assert!(r.valid.contains(&dfg));
        assert!(r.valid.contains(&efg));
        assert!(r.rules.contains_key(&df), "prefix of a valid rule is kept");
        assert!(r.rules.contains_key(&path(&c, &["d"])));
        assert!(
            !r.rules.contains_key(&fg),
            "f,g matches g's distribution and is not a prefix of any valid rule"
        );
    }

    #[test]
    fn prefix_closure_holds() {
        let c = canal_corpus(20);
        let r = extract_rules(&c, ExtractionParams::default());
        for source in r.rules.keys() {
            if source.len() >= 2 {
                assert!(r.rules.contains_key(&source[..source.len() - 1]));
            }
        }
    }

    #[test]
    fn determinism_across_trajectory_order() {
        let a = corpus("d f g h\ne f g i\nd f g h\ne f g i\nd f g h\ne f g i\nd f g h\ne f g i\nd f g h\ne f g i\n");
        let b = corpus("e f g i\nd f g h\ne f g i\nd f g h\ne f g i\nd f g h\ne f g i\nd f g h\ne f g i\nd f g h\n");
        let params = ExtractionParams {
            max_order: 3,
            min_support: 3,
        };
        let ra = extract_rules(&a, params);
        let rb = extract_rules(&b, params);
        // Compare on labels: interning order differs between the two corpora.
        let keyed = |c: &Corpus, r: &RuleSet| {
            let mut v: Vec<Vec<String>> = r
                .rules
                .keys()
                .map(|s| s.iter().map(|&e| c.vocab.label(e).to_string()).collect())
                .collect();
            v.sort();
            v
        };
        assert_eq!(keyed(&a, &ra), keyed(&b, &rb));
    }

    #[test]
    fn min_support_filter_containment() {
        let c = canal_corpus(7);
        let counts = build_observations(&c, 3);
        let loose = build_distributions(&counts, 3);
        let strict = build_distributions(&counts, 10);
        for (source, d) in &strict.distrs {
            let l = &loose.distrs[source];
            for &(t, _) in &d.targets {
                assert!(l.prob(t).is_some());
            }
        }
    }
}
