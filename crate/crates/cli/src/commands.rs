//! The `gen`, `detect`, `score` and `experiment` subcommands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use diamondperc::diamond::{diamond_percolation_with_stats, DiamondConfig};
use diamondperc::graph::{sample_ppm, Graph, PpmParams};
use diamondperc::metrics::score;
use diamondperc::partition::{
    balanced_partition, multinomial_partition, powerlaw_partition, uniform_partition_boltzmann, Partition,
};
use diamondperc::rng::seeded;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::experiment::{summary_path, write_csv, Experiment, ExperimentConfig};
use crate::rule::Rule;

#[derive(Debug, Parser)]
#[command(name = "diamondperc", version, about = "Planted partition graphs and Diamond Percolation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a partition and a PPM graph; writes <out>.edges and <out>.partition.
    Gen(GenArgs),
    /// Run Diamond Percolation on an edge list.
    Detect(DetectArgs),
    /// Compare a detected partition with the ground truth.
    Score(ScoreArgs),
    /// Run an experiment described by a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionKind {
    Balanced,
    Powerlaw,
    Multinomial,
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub partition: PartitionKind,
    /// Vertex count (the expected vertex count for `uniform`).
    #[arg(long)]
    pub n: usize,
    /// Community count, literal or a rule in n such as 'n^(2/3)'.
    #[arg(long)]
    pub k: Option<Rule>,
    /// Community size for `balanced`.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Comma-separated community probabilities for `multinomial`.
    #[arg(long)]
    pub probs: Option<String>,
    #[arg(long)]
    pub p: f64,
    /// Inter-community probability, literal or a rule such as '5/n'.
    #[arg(long)]
    pub q: Rule,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub threshold: u32,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Detected partition file.
    pub detected: PathBuf,
    /// Ground-truth partition file.
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-trial CSV path; the summary goes next to it as *_summary.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path) -> impl Fn(diamondperc::Error) -> CliError + '_ {
    move |e| match e {
        diamondperc::Error::Parse { .. } | diamondperc::Error::Io(_) | diamondperc::Error::InvalidArgument(_) => {
            CliError::input(format!("{}: {e}", path.display()))
        }
        other => other.into(),
    }
}

fn read_partition(path: &Path) -> Result<Partition, CliError> {
    Partition::read_from(open(path)?).map_err(in_file(path))
}

fn parse_probs(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad probability '{x}' in --probs")))
        })
        .collect()
}

pub fn cmd_gen(args: &GenArgs) -> Result<Value, CliError> {
    let mut rng = seeded(args.seed);
    let n = args.n;
    let need_k = || {
        args.k
            .as_ref()
            .ok_or_else(|| CliError::usage("--k is required for this partition"))
            .and_then(|k| k.count(n))
    };
    let t = match args.partition {
        PartitionKind::Balanced => {
            let s = args.s.ok_or_else(|| CliError::usage("--s is required for balanced partitions"))?;
            balanced_partition(n, need_k()?, s)?
        }
        PartitionKind::Powerlaw => {
            let tau = args.tau.ok_or_else(|| CliError::usage("--tau is required for power-law partitions"))?;
            powerlaw_partition(tau, need_k()?, n, &mut rng)?
        }
        PartitionKind::Multinomial => {
            let raw = args
                .probs
                .as_deref()
                .ok_or_else(|| CliError::usage("--probs is required for multinomial partitions"))?;
            multinomial_partition(n, &parse_probs(raw)?, &mut rng)?
        }
        PartitionKind::Uniform => uniform_partition_boltzmann(n, &mut rng)?,
    };
    let actual_n = t.n();
    let params = PpmParams::new(args.p, args.q.probability(actual_n)?)?;
    let g = sample_ppm(&t, params, &mut rng)?;
    let edges_path = with_suffix(&args.out, ".edges");
    let partition_path = with_suffix(&args.out, ".partition");
    let mut w = create(&edges_path)?;
    g.write_edge_list(&mut w)?;
    w.flush()?;
    let mut w = create(&partition_path)?;
    t.write_to(&mut w)?;
    w.flush()?;
    Ok(json!({
        "n": actual_n,
        "edges": g.edge_count(),
        "blocks": t.num_blocks(),
        "seed": args.seed,
        "edges_path": edges_path.display().to_string(),
        "partition_path": partition_path.display().to_string(),
    }))
}

pub fn cmd_detect(args: &DetectArgs) -> Result<Value, CliError> {
    let cfg = DiamondConfig::new(args.threshold)?;
    let g = Graph::read_edge_list(open(&args.edges)?).map_err(in_file(&args.edges))?;
    let (c, stats) = diamond_percolation_with_stats(&g, cfg);
    let mut w = create(&args.out)?;
    c.write_to(&mut w)?;
    w.flush()?;
    Ok(json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "kept_edges": stats.edges_kept,
        "blocks": c.num_blocks(),
        "threshold": args.threshold,
    }))
}

pub fn cmd_score(args: &ScoreArgs) -> Result<Value, CliError> {
    let c = read_partition(&args.detected)?;
    let t = read_partition(&args.truth)?;
    if c.n() != t.n() {
        return Err(CliError::input(format!(
            "partitions have different vertex counts ({} in {}, {} in {})",
            c.n(),
            args.detected.display(),
            t.n(),
            args.truth.display()
        )));
    }
    if c.n() < 2 {
        return Err(CliError::input("scoring needs at least two vertices"));
    }
    let report = score(&c, &t)?;
    serde_json::to_value(report).map_err(|e| CliError::input(e.to_string()))
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::input(format!("{}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out_path = Some(out.display().to_string());
    }
    let out_path = PathBuf::from(
        config
            .out_path
            .clone()
            .ok_or_else(|| CliError::usage("no output path: set 'out_path' or pass --out"))?,
    );
    let exp = Experiment::new(config)?;
    let output = exp.run()?;
    let summary_file = summary_path(&out_path);
    write_csv(&out_path, &output.rows)?;
    write_csv(&summary_file, &output.summary)?;
    Ok(json!({
        "rows": out_path.display().to_string(),
        "summary": summary_file.display().to_string(),
        "per_n": output.summary,
    }))
}

/// Dispatches a parsed command line and returns the JSON to print.
pub fn run(cli: &Cli) -> Result<Value, CliError> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Score(a) => cmd_score(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}
