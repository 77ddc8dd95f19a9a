//! `hon` — build higher-order networks from trajectory files and report on
//! them. Every knob has a documented default except `--seed`, which randomized
//! commands require explicitly. Flags can also be set through `HON_*`
//! environment variables where noted in `--help`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hon_core::export;
use hon_core::rank::{pagerank, rank_delta, Teleport};
use hon_core::rules::{
    build_distributions, build_observations, extract_rules, extract_rules_from_distributions,
};
use hon_core::synth::{
    generate_manifest, generate_trajectories, validate_recovery, GridConfig, InjectedRule,
    RuleCounts,
};
use hon_core::vom::{build_context_tree, compare_rulesets, prune_vom};
use hon_core::walk::{entropy_rate, evaluate_accuracy, return_probability};
use hon_core::wiring::{build_first_order, build_fixed_order, build_network};
use hon_core::{Corpus, ExtractionParams, HonNetwork, ParseOptions};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hon", version, about = "Higher-order network construction and analysis")]
struct Cli {
    /// Bound worker parallelism; output is identical for any value.
    #[arg(long, global = true, env = "HON_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputOpts {
    /// Trajectory file: one trajectory per line, whitespace-separated entities.
    #[arg(long)]
    input: PathBuf,
    /// Treat the first token of each line as a trajectory id.
    #[arg(long)]
    has_id: bool,
    /// Collapse runs of identical consecutive entities.
    #[arg(long)]
    dedup: bool,
    /// Drop trajectories with more entities than this (crawler filter).
    #[arg(long)]
    max_trajectory_len: Option<usize>,
}

impl InputOpts {
    fn read(&self) -> Result<Corpus, CliError> {
        let text = std::fs::read_to_string(&self.input)
            .map_err(|e| CliError(format!("{}: {e}", self.input.display())))?;
        let options = ParseOptions {
            has_id: self.has_id,
            dedup_consecutive: self.dedup,
            max_trajectory_len: self.max_trajectory_len,
        };
        Ok(hon_core::ingest::parse_trajectories(&text, options)?)
    }
}

#[derive(Args)]
struct ExtractOpts {
    /// Maximum dependency order to test.
    #[arg(long, default_value_t = 5, env = "HON_MAX_ORDER")]
    max_order: usize,
    /// Minimum observations of a (source, target) pair.
    #[arg(long, default_value_t = 5, env = "HON_MIN_SUPPORT")]
    min_support: u64,
}

impl ExtractOpts {
    fn params(&self) -> ExtractionParams {
        ExtractionParams {
            max_order: self.max_order,
            min_support: self.min_support,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Representation {
    /// Plain first-order network of pair counts.
    First,
    /// Fixed-order network: every context has exactly max_order entities.
    FixedK,
    /// Variable-order network with KL-gated rule extraction.
    Hon,
}

#[derive(Clone, Copy, ValueEnum)]
enum TeleportMode {
    Node,
    Entity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    MaxOrder,
    MinSupport,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Edges,
    Pajek,
    Rules,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network and write its weighted edge list.
    Build {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long, value_enum, default_value_t = Representation::Hon)]
        representation: Representation,
        /// Edge-list CSV destination (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write a Pajek .net file here.
        #[arg(long)]
        pajek: Option<PathBuf>,
    },
    /// Held-out-tail random-walk accuracy.
    Eval {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long, value_enum, default_value_t = Representation::Hon)]
        representation: Representation,
        #[arg(long, default_value_t = 3)]
        holdout: usize,
        #[arg(long, default_value_t = 1000)]
        repeats: usize,
        #[arg(long, env = "HON_SEED")]
        seed: u64,
        /// Accuracy CSV destination (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the full report as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Entropy rate and k-step return probabilities.
    Metrics {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long, value_enum, default_value_t = Representation::Hon)]
        representation: Representation,
        /// Teleport smoothing for the stationary distribution.
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Return-probability horizons; repeatable.
        #[arg(long, default_values_t = [2usize], value_delimiter = ',')]
        return_steps: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "HON_SEED")]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// PageRank with entity aggregation, plus deltas against first-order.
    Rank {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = TeleportMode::Node)]
        teleport: TeleportMode,
        /// Entity rank CSV destination (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-entity delta report against the first-order ranking.
        #[arg(long)]
        delta_out: Option<PathBuf>,
    },
    /// Generate a synthetic grid corpus with injected higher-order rules.
    Synth {
        #[arg(long, default_value_t = 10)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
        #[arg(long, default_value_t = 100_000)]
        walkers: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Injected rule counts at orders 2, 3 and 4, comma-separated.
        #[arg(long, default_values_t = [10usize, 10, 10], value_delimiter = ',')]
        rule_counts: Vec<usize>,
        #[arg(long, env = "HON_SEED")]
        seed: u64,
        #[arg(long)]
        manifest_out: PathBuf,
        #[arg(long)]
        trajectories_out: PathBuf,
    },
    /// Check rule recovery against a synthetic manifest.
    Validate {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        /// Manifest JSON written by `synth`.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Contrast HON rule extraction with a pruned variable-order Markov tree.
    VomCompare {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep max-order or min-support; report edge counts and accuracy.
    Sweep {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated parameter values to sweep.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        holdout: usize,
        #[arg(long, default_value_t = 1000)]
        repeats: usize,
        #[arg(long, env = "HON_SEED")]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-emit a built network or rule set in another format.
    Export {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        extract: ExtractOpts,
        #[arg(long, value_enum, default_value_t = Representation::Hon)]
        representation: Representation,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

struct CliError(String);

impl From<hon_core::HonError> for CliError {
    fn from(e: hon_core::HonError) -> Self {
        CliError(e.to_string())
    }
}

fn build_graph(
    corpus: &Corpus,
    representation: Representation,
    params: ExtractionParams,
) -> HonNetwork {
    match representation {
        Representation::First => build_first_order(corpus, params.min_support),
        Representation::FixedK => build_fixed_order(corpus, params.max_order, params.min_support),
        Representation::Hon => {
            let rules = extract_rules(corpus, params);
            // Extraction emits prefix-closed rule sets, which always wire.
            build_network(&rules, &corpus.vocab).expect("prefix-closed rules")
        }
    }
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError(format!("{}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build {
            input,
            extract,
            representation,
            output,
            pajek,
        } => {
            let corpus = input.read()?;
            let g = build_graph(&corpus, representation, extract.params());
            emit(output.as_deref(), &export::edge_list_csv(&g, &corpus.vocab))?;
            if let Some(p) = pajek {
                emit(Some(&p), &export::pajek(&g, &corpus.vocab))?;
            }
            if output.is_some() {
                println!("nodes {}", g.node_count());
                println!("edges {}", g.edge_count());
                println!("density {:.6}", g.density());
            }
            Ok(())
        }
        Command::Eval {
            input,
            extract,
            representation,
            holdout,
            repeats,
            seed,
            output,
            json_out,
        } => {
            let corpus = input.read()?;
            let params = extract.params();
            let report = evaluate_accuracy(
                &corpus,
                |train| build_graph(train, representation, params),
                holdout,
                repeats,
                seed,
            )?;
            emit(output.as_deref(), &export::accuracy_csv(&report))?;
            if let Some(p) = json_out {
                let json = serde_json::to_string_pretty(&report).unwrap();
                emit(Some(&p), &format!("{json}\n"))?;
            }
            Ok(())
        }
        Command::Metrics {
            input,
            extract,
            representation,
            beta,
            tol,
            return_steps,
            samples,
            seed,
            output,
        } => {
            let corpus = input.read()?;
            let g = build_graph(&corpus, representation, extract.params());
            let mut csv = String::from("metric,value\n");
            csv.push_str(&format!("entropy_rate,{}\n", entropy_rate(&g, beta, tol)?));
            for &k in &return_steps {
                let p = return_probability(&g, k, samples, seed)?;
                csv.push_str(&format!("return_prob_{k},{p}\n"));
            }
            emit(output.as_deref(), &csv)
        }
        Command::Rank {
            input,
            extract,
            damping,
            tol,
            max_iter,
            teleport,
            output,
            delta_out,
        } => {
            let corpus = input.read()?;
            let teleport = match teleport {
                TeleportMode::Node => Teleport::NodeUniform,
                TeleportMode::Entity => Teleport::EntityUniform,
            };
            let g = build_graph(&corpus, Representation::Hon, extract.params());
            let hon = pagerank(&g, damping, tol, max_iter, teleport)?;
            emit(
                output.as_deref(),
                &export::rank_csv(&hon.entity_scores, &corpus.vocab),
            )?;
            if let Some(p) = delta_out {
                let first = build_first_order(&corpus, extract.min_support);
                let base = pagerank(&first, damping, tol, max_iter, teleport)?;
                let deltas = rank_delta(&base.entity_scores, &hon.entity_scores, &corpus.vocab)?;
                emit(Some(&p), &export::rank_delta_csv(&deltas, &corpus.vocab))?;
            }
            Ok(())
        }
        Command::Synth {
            rows,
            cols,
            walkers,
            steps,
            rule_counts,
            seed,
            manifest_out,
            trajectories_out,
        } => {
            let cfg = GridConfig {
                rows,
                cols,
                n_walkers: walkers,
                steps_per_walker: steps,
                seed,
            };
            let [order2, order3, order4] = rule_counts[..] else {
                return Err(CliError("--rule-counts takes exactly three values".into()));
            };
            let counts = RuleCounts {
                order2,
                order3,
                order4,
            };
            let manifest = generate_manifest(&cfg, counts, seed)?;
            let json = serde_json::to_string_pretty(&manifest).unwrap();
            emit(Some(&manifest_out), &format!("{json}\n"))?;
            let corpus = generate_trajectories(&cfg, &manifest);
            emit(
                Some(&trajectories_out),
                &hon_core::ingest::serialize_trajectories(&corpus),
            )
        }
        Command::Validate {
            input,
            extract,
            manifest,
            output,
            json_out,
        } => {
            let corpus = input.read()?;
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| CliError(format!("{}: {e}", manifest.display())))?;
            let manifest: Vec<InjectedRule> = serde_json::from_str(&text)
                .map_err(|e| CliError(format!("manifest: {e}")))?;
            let rules = extract_rules(&corpus, extract.params());
            let report = validate_recovery(&rules, &manifest, &corpus.vocab);
            emit(output.as_deref(), &export::recovery_csv(&report))?;
            if let Some(p) = json_out {
                let json = serde_json::to_string_pretty(&report).unwrap();
                emit(Some(&p), &format!("{json}\n"))?;
            }
            if output.is_some() {
                println!("exact_match {}", report.exact_match);
            }
            Ok(())
        }
        Command::VomCompare {
            input,
            extract,
            output,
        } => {
            let corpus = input.read()?;
            let params = extract.params();
            let counts = build_observations(&corpus, params.max_order);
            let distrs = build_distributions(&counts, params.min_support);
            let hon = extract_rules_from_distributions(&distrs, params.max_order);
            let tree = build_context_tree(&counts, params.min_support);
            let vom = prune_vom(&tree);
            let report = compare_rulesets(&hon, &vom);
            emit(output.as_deref(), &export::comparison_csv(&report))
        }
        Command::Sweep {
            input,
            extract,
            param,
            values,
            holdout,
            repeats,
            seed,
            output,
        } => {
            let corpus = input.read()?;
            let mut csv = String::from("value,edge_count");
            for h in 1..=holdout {
                csv.push_str(&format!(",acc_h{h}"));
            }
            csv.push('\n');
            for &value in &values {
                let mut params = extract.params();
                match param {
                    SweepParam::MaxOrder => params.max_order = value as usize,
                    SweepParam::MinSupport => params.min_support = value,
                }
                let g = build_graph(&corpus, Representation::Hon, params);
                let report = evaluate_accuracy(
                    &corpus,
                    |train| build_graph(train, Representation::Hon, params),
                    holdout,
                    repeats,
                    seed,
                )?;
                csv.push_str(&format!("{value},{}", g.edge_count()));
                for m in &report.means {
                    csv.push_str(&format!(",{m}"));
                }
                csv.push('\n');
            }
            emit(output.as_deref(), &csv)
        }
        Command::Export {
            input,
            extract,
            representation,
            format,
            output,
        } => {
            let corpus = input.read()?;
            let content = match format {
                ExportFormat::Rules => {
                    let rules = extract_rules(&corpus, extract.params());
                    export::rule_dump(&rules, &corpus.vocab)
                }
                ExportFormat::Edges => {
                    let g = build_graph(&corpus, representation, extract.params());
                    export::edge_list_csv(&g, &corpus.vocab)
                }
                ExportFormat::Pajek => {
                    let g = build_graph(&corpus, representation, extract.params());
                    export::pajek(&g, &corpus.vocab)
                }
            };
            emit(output.as_deref(), &content)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore the error from configuring twice (tests call run() directly).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError(msg)) => {
            eprintln!("{}", serde_json::json!({ "error": msg }));
            ExitCode::FAILURE
        }
    }
}
