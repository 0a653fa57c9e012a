//! Command-line driver: offline indexing, online querying, the benchmark
//! protocol, and data generators.
//!
//! Machine-readable results (match lists, statistics, CSV) go to stdout;
//! human diagnostics (timings, summaries, warnings) go to stderr, so
//! pipelines can consume stdout directly.
//!
//! Parameter precedence: command-line flag, then environment variable
//! (`SIGMATCH_*`), then `--config` TOML file, then built-in default.
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use sigmatch::evalbench::{
    build_query, generate_barabasi_albert, run_benchmark, NoiseType, Protocol,
};
use sigmatch::{
    load_graph, load_index, persist_index, render_matches, save_graph, EngineConfig, IndexSet,
    QueryContext, SimilarityMode,
};

/// Query sizes the benchmark protocol is defined over.
const PROTOCOL_SIZES: [usize; 6] = [3, 5, 7, 9, 11, 13];

#[derive(Parser)]
#[command(
    name = "sigmatch",
    version,
    about = "Top-k approximate subgraph matching by chi-square significance",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by all subcommands. Every flag has a `SIGMATCH_*` environment
/// twin; unset values fall back to the `--config` file, then to defaults.
#[derive(Args)]
struct Overrides {
    /// Penalty exponent on unrecalled query labels (>= 1)
    #[arg(long, global = true, env = "SIGMATCH_GAMMA")]
    gamma: Option<f64>,
    /// Symbol band width in standard deviations (> 0)
    #[arg(long, global = true, env = "SIGMATCH_KAPPA")]
    kappa: Option<f64>,
    /// Number of matches to return
    #[arg(long, global = true, env = "SIGMATCH_K")]
    k: Option<usize>,
    /// Neighborhood label semantics
    #[arg(long, global = true, env = "SIGMATCH_MODE", value_enum)]
    mode: Option<ModeArg>,
    /// Cap on vertex pairs evaluated by the offline distribution pass
    #[arg(long, global = true, env = "SIGMATCH_SAMPLE_PAIRS")]
    sample_pairs: Option<u64>,
    /// Master seed for sampling and generators
    #[arg(long, global = true, env = "SIGMATCH_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "SIGMATCH_THREADS")]
    threads: Option<usize>,
    /// Output format for stdout results
    #[arg(long, global = true, env = "SIGMATCH_FORMAT", value_enum)]
    format: Option<Format>,
    /// TOML file supplying defaults for the flags above
    #[arg(long, global = true, env = "SIGMATCH_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Multiset,
    Set,
}

impl From<ModeArg> for SimilarityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Multiset => SimilarityMode::Multiset,
            ModeArg::Set => SimilarityMode::Set,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and persist the offline index for a target graph
    Index {
        /// Target graph in the text format
        graph: PathBuf,
        /// Where to write the index file
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Match a query graph against a persisted index
    Query {
        /// Index file written by `index`
        index: PathBuf,
        /// Query graph in the text format
        query: PathBuf,
    },
    /// Run the noise-robustness benchmark protocol against an index
    Bench {
        /// Index file written by `index`
        index: PathBuf,
        /// Where to write the CSV report (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Query sizes, comma-separated (subset of 3,5,7,9,11,13)
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Noise types, comma-separated (exact,nLabel,nVAdd,nVDel,nEAdd,nEDel)
        #[arg(long, value_delimiter = ',')]
        noise_types: Option<Vec<String>>,
        /// Queries per (size, noise type) cell
        #[arg(long, default_value_t = 20)]
        queries_per_cell: usize,
        /// Write 0 in the latency column so repeated runs compare byte-identically
        #[arg(long)]
        zero_latency: bool,
    },
    /// Generate target graphs and query corpora
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Scale-free (preferential attachment) target graph
    Ba {
        /// Vertex count
        #[arg(long)]
        n: usize,
        /// Average degree (attachment count = ceil(avg_degree / 2))
        #[arg(long)]
        avg_degree: usize,
        /// Number of distinct labels (L0..)
        #[arg(long)]
        labels: usize,
        /// Where to write the graph
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Query corpus (exact bases plus perturbed queries) with a manifest
    Queries {
        /// Target graph to extract from
        graph: PathBuf,
        /// Query sizes, comma-separated (subset of 3,5,7,9,11,13)
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Noise types, comma-separated
        #[arg(long, value_delimiter = ',')]
        noise_types: Option<Vec<String>>,
        /// Queries per (size, noise type) cell
        #[arg(long, default_value_t = 20)]
        queries_per_cell: usize,
        /// Directory for query files and manifest.csv
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CliResult<T> = Result<T, Failure>;

fn usage_error(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

impl From<sigmatch::Error> for Failure {
    fn from(e: sigmatch::Error) -> Self {
        Failure {
            code: if e.is_usage() { 2 } else { 1 },
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let (config, format) = resolve_config(&cli.overrides)?;
    if let Some(threads) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("initializing the worker pool")?;
    }
    match cli.command {
        Command::Index { graph, out } => cmd_index(&graph, &out, &config, format),
        Command::Query { index, query } => cmd_query(&index, &query, &cli.overrides, &config, format),
        Command::Bench {
            index,
            out,
            sizes,
            noise_types,
            queries_per_cell,
            zero_latency,
        } => cmd_bench(
            &index,
            out.as_deref(),
            sizes,
            noise_types,
            queries_per_cell,
            zero_latency,
            &cli.overrides,
            &config,
        ),
        Command::Gen(g) => cmd_gen(g, &config),
    }
}

/// Layer the precedence chain: defaults, then the config file, then
/// flag/environment values (clap already gives flags priority over env).
fn resolve_config(overrides: &Overrides) -> CliResult<(EngineConfig, Format)> {
    let mut config = match &overrides.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))
                .map_err(usage_error)?;
            toml::from_str::<EngineConfig>(&text)
                .with_context(|| format!("parsing config file {}", path.display()))
                .map_err(usage_error)?
        }
        None => EngineConfig::default(),
    };
    if let Some(v) = overrides.gamma {
        config.gamma = v;
    }
    if let Some(v) = overrides.kappa {
        config.kappa = v;
    }
    if let Some(v) = overrides.k {
        config.k = v;
    }
    if let Some(v) = overrides.mode {
        config.mode = v.into();
    }
    if let Some(v) = overrides.sample_pairs {
        config.sample_pairs = Some(v);
    }
    if let Some(v) = overrides.seed {
        config.seed = v;
    }
    if let Some(v) = overrides.threads {
        config.threads = Some(v);
    }
    config.validate()?;
    Ok((config, overrides.format.unwrap_or(Format::Text)))
}

fn cmd_index(graph: &Path, out: &Path, config: &EngineConfig, format: Format) -> CliResult<()> {
    let g = load_graph(graph)?;
    eprintln!(
        "indexing {} ({} vertices, {} edges, {} labels)",
        graph.display(),
        g.vertex_count(),
        g.edge_count(),
        g.label_count()
    );
    let started = Instant::now();
    let index = sigmatch::build_index(g, &config.offline())?;
    let elapsed = started.elapsed().as_secs_f64();
    persist_index(&index, out)?;
    eprintln!("offline phase took {elapsed:.3} s; index written to {}", out.display());

    match format {
        Format::Text => {
            println!("psi {}", index.stats.psi);
            println!("delta {}", index.stats.delta);
            println!("max-dev {}", index.stats.max_dev);
            println!("tau {}", index.table.tau());
            println!(
                "pairs {} {}",
                index.stats.pair_count,
                if index.stats.sampled { "sampled" } else { "exact" }
            );
        }
        Format::Json => {
            let summary = serde_json::json!({
                "psi": index.stats.psi,
                "delta": index.stats.delta,
                "max_dev": index.stats.max_dev,
                "tau": index.table.tau(),
                "pair_count": index.stats.pair_count,
                "sampled": index.stats.sampled,
                "offline_seconds": elapsed,
            });
            println!("{summary}");
        }
    }
    Ok(())
}

/// Apply per-run overrides to a loaded index. A different `kappa` only
/// rebuilds the symbol table from the persisted statistics; `gamma` and
/// `mode` shape the persisted statistics themselves, so changing them
/// requires re-indexing and is rejected here.
fn adapt_index(index: IndexSet, overrides: &Overrides) -> CliResult<IndexSet> {
    if let Some(gamma) = overrides.gamma {
        if gamma != index.config.gamma {
            return Err(usage_error(anyhow::anyhow!(
                "the index was built with gamma = {}; rebuild it with `index --gamma {gamma}`",
                index.config.gamma
            )));
        }
    }
    if let Some(mode) = overrides.mode {
        if SimilarityMode::from(mode) != index.config.mode {
            return Err(usage_error(anyhow::anyhow!(
                "the index was built in {:?} mode; rebuild it to change modes",
                index.config.mode
            )));
        }
    }
    match overrides.kappa {
        Some(kappa) if kappa != index.config.kappa => Ok(index.with_kappa(kappa)?),
        _ => Ok(index),
    }
}

fn cmd_query(
    index_path: &Path,
    query_path: &Path,
    overrides: &Overrides,
    config: &EngineConfig,
    format: Format,
) -> CliResult<()> {
    let index = adapt_index(load_index(index_path)?, overrides)?;
    let query = load_graph(query_path)?;
    let started = Instant::now();
    let matches = QueryContext::new(&index, &query).top_k(config.k)?;
    let elapsed = started.elapsed().as_secs_f64();
    eprintln!("online phase took {elapsed:.6} s");
    match format {
        Format::Text => print!("{}", render_matches(&matches)),
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&matches).context("serializing matches")?
            );
        }
    }
    Ok(())
}

fn parse_protocol(
    sizes: Option<Vec<usize>>,
    noise_types: Option<Vec<String>>,
    queries_per_cell: usize,
    master_seed: u64,
) -> CliResult<Protocol> {
    let sizes = sizes.unwrap_or_else(|| PROTOCOL_SIZES.to_vec());
    for &s in &sizes {
        if !PROTOCOL_SIZES.contains(&s) {
            return Err(usage_error(anyhow::anyhow!(
                "query size {s} is not part of the protocol; pick from {PROTOCOL_SIZES:?}"
            )));
        }
    }
    let noise_types = match noise_types {
        None => NoiseType::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| n.parse::<NoiseType>())
            .collect::<sigmatch::Result<Vec<_>>>()?,
    };
    if sizes.is_empty() || noise_types.is_empty() {
        return Err(usage_error(anyhow::anyhow!(
            "the protocol needs at least one size and one noise type"
        )));
    }
    Ok(Protocol {
        sizes,
        noise_types,
        queries_per_cell,
        master_seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    index_path: &Path,
    out: Option<&Path>,
    sizes: Option<Vec<usize>>,
    noise_types: Option<Vec<String>>,
    queries_per_cell: usize,
    zero_latency: bool,
    overrides: &Overrides,
    config: &EngineConfig,
) -> CliResult<()> {
    let index = adapt_index(load_index(index_path)?, overrides)?;
    let protocol = parse_protocol(sizes, noise_types, queries_per_cell, config.seed)?;
    let report = run_benchmark(&index, &protocol, config.k)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} queries: mean accuracy {:.4}, mean latency {:.6} s",
        report.rows.len(),
        report.mean_accuracy(),
        report.mean_latency_s()
    );
    let csv = report.to_csv(zero_latency);
    match out {
        Some(path) => {
            std::fs::write(path, &csv)
                .with_context(|| format!("writing report to {}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_gen(command: GenCommand, config: &EngineConfig) -> CliResult<()> {
    match command {
        GenCommand::Ba {
            n,
            avg_degree,
            labels,
            out,
        } => {
            let g = generate_barabasi_albert(n, avg_degree, labels, config.seed)?;
            save_graph(&g, &out)?;
            eprintln!(
                "wrote {} ({} vertices, {} edges)",
                out.display(),
                g.vertex_count(),
                g.edge_count()
            );
            Ok(())
        }
        GenCommand::Queries {
            graph,
            sizes,
            noise_types,
            queries_per_cell,
            out_dir,
        } => {
            let g = load_graph(&graph)?;
            let protocol = parse_protocol(sizes, noise_types, queries_per_cell, config.seed)?;
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let mut manifest =
                String::from("file,exact_file,size,noise_type,noise_count,seed\n");
            let mut written = 0usize;
            for &size in &protocol.sizes {
                for &noise_type in &protocol.noise_types {
                    for j in 0..protocol.queries_per_cell {
                        let item = build_query(&g, size, noise_type, j, protocol.master_seed)?;
                        for w in &item.warnings {
                            eprintln!("warning: {w}");
                        }
                        let stem = format!("q{size}_{noise_type}_{j}");
                        let query_file = format!("{stem}.g");
                        let exact_file = format!("{stem}.exact.g");
                        save_graph(&item.query, out_dir.join(&query_file))?;
                        save_graph(&item.exact.graph, out_dir.join(&exact_file))?;
                        use std::fmt::Write;
                        let _ = writeln!(
                            manifest,
                            "{query_file},{exact_file},{size},{noise_type},{},{}",
                            item.spec.noise_count, item.spec.seed
                        );
                        written += 1;
                    }
                }
            }
            let manifest_path = out_dir.join("manifest.csv");
            std::fs::write(&manifest_path, manifest)
                .with_context(|| format!("writing {}", manifest_path.display()))?;
            eprintln!(
                "wrote {written} queries and {} to {}",
                manifest_path.file_name().unwrap().to_string_lossy(),
                out_dir.display()
            );
            Ok(())
        }
    }
}
