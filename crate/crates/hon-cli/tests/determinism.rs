//! End-to-end determinism: every subcommand must produce byte-identical
//! output when rerun with the same configuration, regardless of the worker
//! thread count.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn run(dir: &Path, threads: &str, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_hon"))
        .current_dir(dir)
        .args(["--threads", threads])
        .args(args)
        .status()
        .expect("spawn hon");
    assert!(status.success(), "hon {args:?} failed");
}

/// Run every subcommand into `dir`, returning the bytes of each output file.
fn pipeline(dir: &Path, threads: &str) -> BTreeMap<String, Vec<u8>> {
    let outputs = [
        "manifest.json",
        "walks.txt",
        "edges.csv",
        "net.pajek",
        "accuracy.csv",
        "accuracy.json",
        "metrics.csv",
        "rank.csv",
        "rank_delta.csv",
        "recovery.csv",
        "recovery.json",
        "vom.csv",
        "sweep.csv",
        "rules.txt",
    ];
    let t = threads;
    run(dir, t, &[
        "synth", "--walkers", "500", "--steps", "50", "--rule-counts", "3,3,3",
        "--seed", "7", "--manifest-out", "manifest.json", "--trajectories-out", "walks.txt",
    ]);
    run(dir, t, &[
        "build", "--input", "walks.txt", "--has-id", "--output", "edges.csv",
        "--pajek", "net.pajek",
    ]);
    run(dir, t, &[
        "eval", "--input", "walks.txt", "--has-id", "--repeats", "50", "--seed", "7",
        "--output", "accuracy.csv", "--json-out", "accuracy.json",
    ]);
    run(dir, t, &[
        "metrics", "--input", "walks.txt", "--has-id", "--return-steps", "2,4",
        "--samples", "20000", "--seed", "7", "--output", "metrics.csv",
    ]);
    run(dir, t, &[
        "rank", "--input", "walks.txt", "--has-id", "--output", "rank.csv",
        "--delta-out", "rank_delta.csv",
    ]);
    run(dir, t, &[
        "validate", "--input", "walks.txt", "--has-id", "--manifest", "manifest.json",
        "--output", "recovery.csv", "--json-out", "recovery.json",
    ]);
    run(dir, t, &[
        "vom-compare", "--input", "walks.txt", "--has-id", "--output", "vom.csv",
    ]);
    run(dir, t, &[
        "sweep", "--input", "walks.txt", "--has-id", "--param", "max-order",
        "--values", "1,3,5", "--repeats", "20", "--seed", "7", "--output", "sweep.csv",
    ]);
    run(dir, t, &[
        "export", "--input", "walks.txt", "--has-id", "--format", "rules",
        "--output", "rules.txt",
    ]);
    outputs
        .iter()
        .map(|name| (name.to_string(), std::fs::read(dir.join(name)).unwrap()))
        .collect()
}

#[test]
fn criterion_09_cli_determinism() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let first = pipeline(dirs[0].path(), "1");
    let rerun = pipeline(dirs[1].path(), "1");
    let threaded = pipeline(dirs[2].path(), "4");

    let mismatches: Vec<&str> = first
        .iter()
        .filter(|(name, bytes)| {
            rerun[name.as_str()] != **bytes || threaded[name.as_str()] != **bytes
        })
        .map(|(name, _)| name.as_str())
        .collect();

    let ok = mismatches.is_empty();
    println!(
        "criterion 9: {} — cli determinism: {} artifacts byte-identical across rerun and \
         1-vs-4 worker threads{}",
        if ok { "PASS" } else { "FAIL" },
        first.len(),
        if ok {
            String::new()
        } else {
            format!("; mismatched: {mismatches:?}")
        }
    );
    assert!(ok);
}
