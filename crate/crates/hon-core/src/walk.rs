//! Random-walk simulation on a HON and the fidelity metrics built on it:
//! held-out-tail accuracy, stationary distribution, entropy rate, and k-step
//! return probability.

use crate::error::{HonError, Result};
use crate::ingest::{Corpus, EntityId, Trajectory};
use crate::wiring::{HonNetwork, NodeId};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A deterministic named stream: walks with the same (seed, stream) are
/// identical; different streams are independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stream.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// Normalized out-edge distribution of a node. Empty for dangling nodes.
pub fn transition_distribution(g: &HonNetwork, node: NodeId) -> Vec<(NodeId, f64)> {
    let edges = g.out_edges(node);
    let total: f64 = edges.values().sum();
    if total == 0.0 {
        return Vec::new();
    }
    edges.iter().map(|(&t, &w)| (t, w / total)).collect()
}

fn sample_next(g: &HonNetwork, node: NodeId, rng: &mut ChaCha8Rng) -> Option<NodeId> {
    let edges = g.out_edges(node);
    let total: f64 = edges.values().sum();
    if total == 0.0 {
        return None;
    }
    let mut draw = rng.gen::<f64>() * total;
    let mut last = None;
    for (&t, &w) in edges {
        last = Some(t);
        if draw < w {
            return Some(t);
        }
        draw -= w;
    }
    last
}

/// The highest-order node whose context matches a suffix of `history`,
/// falling back to the order-1 node of the last entity.
pub fn locate_context(g: &HonNetwork, history: &[EntityId], corpus: &Corpus) -> Result<NodeId> {
    assert!(!history.is_empty());
    let longest = history.len().min(g.max_order());
    for k in (1..=longest).rev() {
        if let Some(n) = g.node(&history[history.len() - k..]) {
            return Ok(n);
        }
    }
    Err(HonError::UnknownEntity(
        corpus.vocab.label(history[history.len() - 1]).to_string(),
    ))
}

/// Walk up to `steps` steps, recording the projected entity at each step.
/// Stops early at a dangling node.
pub fn simulate_walk(
    g: &HonNetwork,
    start: NodeId,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<EntityId> {
    let mut out = Vec::with_capacity(steps);
    let mut node = start;
    for _ in 0..steps {
        match sample_next(g, node, rng) {
            Some(next) => {
                out.push(g.projection(next));
                node = next;
            }
            None => break,
        }
    }
    out
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AccuracyReport {
    pub holdout: usize,
    pub repeats: usize,
    pub test_trajectories: usize,
    /// Mean fraction of trials correct at horizon h (index h-1). A trial is
    /// correct at horizon h iff its first h generated entities all match.
    pub means: Vec<f64>,
    /// Sample standard deviation of the per-repeat means.
    pub std_devs: Vec<f64>,
}

/// Hold out the last `holdout` entities of each trajectory, train a network
/// on the rest, and measure how often seeded random walks reproduce the
/// held-out tails. Trajectories not longer than the holdout still train (in
/// full) but are not tested.
pub fn evaluate_accuracy<F>(
    corpus: &Corpus,
    build: F,
    holdout: usize,
    repeats: usize,
    seed: u64,
) -> Result<AccuracyReport>
where
    F: Fn(&Corpus) -> HonNetwork,
{
    let mut train = Vec::with_capacity(corpus.trajectories.len());
    let mut tests: Vec<(Vec<EntityId>, &[EntityId])> = Vec::new();
    for t in &corpus.trajectories {
        if t.entities.len() > holdout {
            let split = t.entities.len() - holdout;
            train.push(Trajectory {
                id: t.id.clone(),
                entities: t.entities[..split].to_vec(),
            });
            tests.push((t.entities[..split].to_vec(), &t.entities[split..]));
        } else {
            train.push(t.clone());
        }
    }
    if tests.is_empty() {
        return Err(HonError::EmptyTestSet);
    }
    let train_corpus = Corpus {
        vocab: corpus.vocab.clone(),
        trajectories: train,
    };
    let g = build(&train_corpus);
    let starts: Vec<Option<NodeId>> = tests
        .iter()
        .map(|(ctx, _)| locate_context(&g, ctx, corpus).ok())
        .collect();

    let per_repeat: Vec<Vec<f64>> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut correct = vec![0usize; holdout];
            for (i, (start, (_, truth))) in starts.iter().zip(&tests).enumerate() {
                let mut rng = stream_rng(seed, ((r as u64) << 32) | i as u64);
                let walked = match start {
                    Some(s) => simulate_walk(&g, *s, holdout, &mut rng),
                    None => Vec::new(),
                };
                for h in 1..=holdout {
                    if walked.len() >= h && walked[..h] == truth[..h] {
                        correct[h - 1] += 1;
                    }
                }
            }
            correct
                .iter()
                .map(|&c| c as f64 / tests.len() as f64)
                .collect()
        })
        .collect();

    let mut means = vec![0.0; holdout];
    for rep in &per_repeat {
        for (m, v) in means.iter_mut().zip(rep) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= repeats as f64;
    }
    let mut std_devs = vec![0.0; holdout];
    if repeats > 1 {
        for rep in &per_repeat {
            for ((s, v), m) in std_devs.iter_mut().zip(rep).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut std_devs {
            *s = (*s / (repeats as f64 - 1.0)).sqrt();
        }
    }
    Ok(AccuracyReport {
        holdout,
        repeats,
        test_trajectories: tests.len(),
        means,
        std_devs,
    })
}

/// Stationary distribution of the teleport-smoothed walk: with probability
/// beta (or from a dangling node, always) the walker jumps to a uniformly
/// random node.
pub fn stationary_distribution(
    g: &HonNetwork,
    beta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = g.node_count();
    assert!(n >= 1);
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut dangling = 0.0;
        for node in g.nodes() {
            let edges = g.out_edges(node);
            let total: f64 = edges.values().sum();
            let mass = x[node as usize];
            if total == 0.0 {
                dangling += mass;
                continue;
            }
            for (&t, &w) in edges {
                next[t as usize] += (1.0 - beta) * mass * w / total;
            }
        }
        let base = ((1.0 - beta) * dangling + beta) / n as f64;
        for v in &mut next {
            *v += base;
        }
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff < tol {
            return Ok(x);
        }
    }
    Err(HonError::NonConvergence(max_iter))
}

/// Expected per-step uncertainty in bits of a walker at stationarity. The
/// stationary weights use the teleport-smoothed chain; the per-node entropy
/// uses the raw transition probabilities so deterministic structure scores 0.
pub fn entropy_rate(g: &HonNetwork, beta: f64, tol: f64) -> Result<f64> {
    let pi = stationary_distribution(g, beta, tol, 10_000)?;
    let mut rate = 0.0;
    for node in g.nodes() {
        let edges = g.out_edges(node);
        let total: f64 = edges.values().sum();
        if total == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for &w in edges.values() {
            let p = w / total;
            h -= p * p.log2();
        }
        rate += pi[node as usize] * h;
    }
    Ok(rate.max(0.0))
}

/// Monte Carlo estimate of the probability that a stationary-start walker's
/// projected entity after exactly `steps` steps equals its start entity.
/// Early termination at a dangling node counts as a non-return.
pub fn return_probability(
    g: &HonNetwork,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let pi = stationary_distribution(g, 0.01, 1e-12, 10_000)?;
    let mut cumulative = Vec::with_capacity(pi.len());
    let mut acc = 0.0;
    for &p in &pi {
        acc += p;
        cumulative.push(acc);
    }
    let returned: usize = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, 0x5252_0000_0000_0000 | i as u64);
            let draw = rng.gen::<f64>() * acc;
            let start = match cumulative.partition_point(|&c| c <= draw) {
                i if i >= pi.len() => (pi.len() - 1) as NodeId,
                i => i as NodeId,
            };
            let walked = simulate_walk(g, start, steps, &mut rng);
            usize::from(walked.len() == steps && walked[steps - 1] == g.projection(start))
        })
        .sum();
    Ok(returned as f64 / samples as f64)
}

/// Exact k-step return probability by dense enumeration; an oracle for the
/// Monte Carlo estimator on small graphs.
pub fn return_probability_exact(g: &HonNetwork, steps: usize) -> Result<f64> {
    let pi = stationary_distribution(g, 0.01, 1e-12, 10_000)?;
    let n = g.node_count();
    let mut total = 0.0;
    for start in g.nodes() {
        // Distribution over nodes after `steps` unsmoothed steps; mass lost
        // at dangling nodes counts as non-return.
        let mut dist = vec![0.0; n];
        dist[start as usize] = 1.0;
        for _ in 0..steps {
            let mut next = vec![0.0; n];
            for node in g.nodes() {
                let mass: f64 = dist[node as usize];
                if mass == 0.0 {
                    continue;
                }
                let edges = g.out_edges(node);
                let sum: f64 = edges.values().sum();
                if sum == 0.0 {
                    continue;
                }
                for (&t, &w) in edges {
                    next[t as usize] += mass * w / sum;
                }
            }
            dist = next;
        }
        let ret: f64 = g
            .nodes()
            .filter(|&m| g.projection(m) == g.projection(start))
            .map(|m| dist[m as usize])
            .sum();
        total += pi[start as usize] * ret;
    }
    Ok(total)
}
