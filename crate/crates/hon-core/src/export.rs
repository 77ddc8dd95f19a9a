//! Deterministic text serializations: edge lists, Pajek `.net` files, rule
//! dumps, and CSV reports.

use crate::ingest::Vocab;
use crate::rank::RankDelta;
use crate::rules::RuleSet;
use crate::synth::RecoveryReport;
use crate::vom::ComparisonReport;
use crate::walk::AccuracyReport;
use crate::wiring::HonNetwork;
use std::collections::BTreeMap;
use std::fmt::Write;

/// `source_label,target_label,weight` lines sorted lexicographically by
/// (source, target). Weights print as shortest round-trip decimals.
pub fn edge_list_csv(g: &HonNetwork, vocab: &Vocab) -> String {
    let mut edges: Vec<(String, String, f64)> = Vec::with_capacity(g.edge_count());
    for from in g.nodes() {
        let fl = g.label(from, vocab);
        for (&to, &w) in g.out_edges(from) {
            edges.push((fl.clone(), g.label(to, vocab), w));
        }
    }
    edges.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut out = String::new();
    for (s, t, w) in edges {
        let _ = writeln!(out, "{s},{t},{w}");
    }
    out
}

/// Pajek export: `*Vertices N` with quoted labels, then `*Arcs` with 1-based
/// indices and weights. Vertices are listed in sorted label order.
pub fn pajek(g: &HonNetwork, vocab: &Vocab) -> String {
    let mut labels: Vec<(String, u32)> = g.nodes().map(|n| (g.label(n, vocab), n)).collect();
    labels.sort();
    let mut pajek_index = vec![0usize; g.node_count()];
    for (i, &(_, node)) in labels.iter().enumerate() {
        pajek_index[node as usize] = i + 1;
    }
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", labels.len());
    for (i, (label, _)) in labels.iter().enumerate() {
        let _ = writeln!(out, "{} \"{}\"", i + 1, label);
    }
    let _ = writeln!(out, "*Arcs");
    let mut arcs: Vec<(usize, usize, f64)> = Vec::with_capacity(g.edge_count());
    for from in g.nodes() {
        for (&to, &w) in g.out_edges(from) {
            arcs.push((pajek_index[from as usize], pajek_index[to as usize], w));
        }
    }
    arcs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for (f, t, w) in arcs {
        let _ = writeln!(out, "{f} {t} {w}");
    }
    out
}

/// Diagnostic rule dump: the source path joined chronologically by dots,
/// then `-> target count`; lines sorted lexicographically.
pub fn rule_dump(rules: &RuleSet, vocab: &Vocab) -> String {
    let mut lines = Vec::new();
    for (source, targets) in &rules.rules {
        let key = source
            .iter()
            .map(|&e| vocab.label(e))
            .collect::<Vec<_>>()
            .join(".");
        for &(t, c) in targets {
            lines.push(format!("{key} -> {} {c}", vocab.label(t)));
        }
    }
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

pub fn accuracy_csv(report: &AccuracyReport) -> String {
    let mut out = String::from("horizon,mean_accuracy,std_dev\n");
    for h in 0..report.holdout {
        let _ = writeln!(out, "{},{},{}", h + 1, report.means[h], report.std_devs[h]);
    }
    out
}

pub fn rank_csv(scores: &BTreeMap<u32, f64>, vocab: &Vocab) -> String {
    let mut order: Vec<u32> = scores.keys().copied().collect();
    order.sort_by(|&a, &b| {
        scores[&b]
            .partial_cmp(&scores[&a])
            .unwrap()
            .then_with(|| vocab.label(a).cmp(vocab.label(b)))
    });
    let mut out = String::from("entity,score,rank\n");
    for (i, &e) in order.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", vocab.label(e), scores[&e], i + 1);
    }
    out
}

pub fn rank_delta_csv(deltas: &[RankDelta], vocab: &Vocab) -> String {
    let mut out = String::from("entity,score_base,score_other,delta,rel_rank_change\n");
    for d in deltas {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            vocab.label(d.entity),
            d.score_base,
            d.score_other,
            d.delta,
            d.rel_rank_change
        );
    }
    out
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("order,hon,vom,hon_only,vom_only\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.order, r.hon, r.vom, r.hon_only, r.vom_only);
    }
    let t = &report.totals;
    let _ = writeln!(out, "total,{},{},{},{}", t.hon, t.vom, t.hon_only, t.vom_only);
    out
}

pub fn recovery_csv(report: &RecoveryReport) -> String {
    let mut out = String::from("order,true_positives,false_positives,false_negatives\n");
    for (order, c) in &report.per_order {
        let _ = writeln!(
            out,
            "{order},{},{},{}",
            c.true_positives, c.false_positives, c.false_negatives
        );
    }
    let _ = writeln!(out, "exact_match,{},,", report.exact_match);
    out
}
