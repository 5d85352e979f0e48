//! Command-line front end for DQBF symmetry detection and breaking.
//!
//! Exit codes: `solve` follows the solver convention - 10 for true, 20 for
//! false, 30 when a budget is exceeded. Parse and I/O failures exit with 1,
//! usage errors with 2.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use dqbf_core::autom::SearchLimits;
use dqbf_core::dqdimacs::{self, SourceFormat};
use dqbf_core::formula::Dqbf;
use dqbf_core::generators::{kbkf, parity, random_dqbf, RandomParams};
use dqbf_core::oracle::{brute_truth, Budget, OracleError};
use dqbf_core::pipeline::{break_symmetries, detect, format_order, format_order_scientific, PipelineError};

const EXIT_TRUE: u8 = 10;
const EXIT_FALSE: u8 = 20;
const EXIT_BUDGET: u8 = 30;

#[derive(Parser)]
#[command(name = "dqbf", version, about = "Symmetry detection and static symmetry breaking for (D)QBFs")]
struct Cli {
    /// Print per-phase wall-clock timings to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the syntactic symmetry group of a formula.
    Detect(DetectArgs),
    /// Write the formula extended with a symmetry breaker.
    Break(BreakArgs),
    /// Decide the truth of a formula by brute force.
    Solve(SolveArgs),
    /// Group-order statistics over a directory of formulas.
    Stats(StatsArgs),
    /// Generate benchmark formulas.
    Gen(GenArgs),
}

#[derive(Args)]
struct DetectArgs {
    file: PathBuf,
    /// Line-oriented key=value report only.
    #[arg(long)]
    machine: bool,
    /// Write the formula graph in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Node budget for the automorphism search.
    #[arg(long, default_value_t = SearchLimits::default().max_nodes)]
    max_nodes: u64,
}

#[derive(Args)]
struct BreakArgs {
    file: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Use at most this many eligible generators (default: all).
    #[arg(long)]
    max_generators: Option<usize>,
    /// Output format (defaults to the input's format; qdimacs requires
    /// chain-shaped dependency sets).
    #[arg(long, value_parser = ["qdimacs", "dqdimacs"])]
    format: Option<String>,
    #[arg(long, default_value_t = SearchLimits::default().max_nodes)]
    max_nodes: u64,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Guard on 2^n universal-assignment enumeration.
    #[arg(long, default_value_t = 24)]
    max_universals: u32,
    /// Guard on the number of interpretations scanned.
    #[arg(long, default_value_t = 1 << 20)]
    max_interpretations: u128,
    /// Print the model witness when true.
    #[arg(long)]
    witness: bool,
}

#[derive(Args)]
struct StatsArgs {
    dir: PathBuf,
    /// Worker pool size (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = SearchLimits::default().max_nodes)]
    max_nodes: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
}

#[derive(Subcommand)]
enum GenFamily {
    /// The KBKF family of false QBFs (4N variables, 4N+1 clauses).
    Kbkf {
        n: u32,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_parser = ["qdimacs", "dqdimacs"], default_value = "qdimacs")]
        format: String,
    },
    /// The parity family (2N variables, 4N-2 clauses).
    Parity {
        n: u32,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_parser = ["qdimacs", "dqdimacs"], default_value = "qdimacs")]
        format: String,
    },
    /// Seeded random DQBFs.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        universals: u32,
        #[arg(long, default_value_t = 2)]
        existentials: u32,
        #[arg(long, default_value_t = 2)]
        max_deps: u32,
        #[arg(long, default_value_t = 6)]
        clauses: u32,
        #[arg(long, default_value_t = 3)]
        clause_len: u32,
        /// Plant a guaranteed x1↔x2 swap symmetry.
        #[arg(long)]
        plant: bool,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_parser = ["qdimacs", "dqdimacs"], default_value = "dqdimacs")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = cli.verbose;
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if verbose {
                eprintln!("(see --help for usage)");
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Detect(args) => cmd_detect(args, cli.verbose),
        Command::Break(args) => cmd_break(args, cli.verbose),
        Command::Solve(args) => cmd_solve(args, cli.verbose),
        Command::Stats(args) => cmd_stats(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn load(path: &Path, verbose: bool) -> Result<(Dqbf, SourceFormat)> {
    let start = Instant::now();
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let outcome = dqdimacs::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    for w in &outcome.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    if verbose {
        eprintln!("parse: {:?}", start.elapsed());
    }
    Ok((outcome.dqbf, outcome.format))
}

fn limits_with(max_nodes: u64) -> SearchLimits {
    SearchLimits {
        max_nodes,
        ..SearchLimits::default()
    }
}

fn cmd_detect(args: DetectArgs, verbose: bool) -> Result<ExitCode> {
    let (dqbf, format) = load(&args.file, verbose)?;
    if let Some(dot) = &args.dot {
        let graph = dqbf_core::graph::build_graph(&dqbf);
        fs::write(dot, graph.to_dot()).with_context(|| format!("writing {}", dot.display()))?;
    }
    let start = Instant::now();
    let detection = match detect(&dqbf, &limits_with(args.max_nodes)) {
        Ok(d) => d,
        Err(PipelineError::Autom(e)) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_BUDGET));
        }
        Err(e) => return Err(e.into()),
    };
    if verbose {
        eprintln!("detect: {:?}", start.elapsed());
    }

    let mut nontrivial_sizes: Vec<usize> = detection
        .group
        .orbits
        .iter()
        .map(|o| o.len())
        .filter(|&l| l > 1)
        .collect();
    nontrivial_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let sizes = nontrivial_sizes
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    if args.machine {
        println!("format={}", format_name(format));
        println!("vars={}", dqbf.variable_count());
        println!("universals={}", dqbf.prefix().universal_count());
        println!("existentials={}", dqbf.prefix().existential_count());
        println!("clauses={}", dqbf.clause_count());
        println!("graph_vertices={}", detection.graph_vertices);
        println!("graph_edges={}", detection.graph_edges);
        println!("generators={}", detection.generators.len());
        println!("eligible={}", detection.eligible_count());
        println!("order={}", detection.group.order);
        println!("order_sci={}", format_order_scientific(&detection.group.order));
        println!("orbit_count={}", detection.group.orbits.len());
        println!("nontrivial_orbits={}", nontrivial_sizes.len());
        println!("orbit_sizes={sizes}");
    } else {
        println!("file: {}", args.file.display());
        println!(
            "variables: {} ({} universal, {} existential), clauses: {}",
            dqbf.variable_count(),
            dqbf.prefix().universal_count(),
            dqbf.prefix().existential_count(),
            dqbf.clause_count()
        );
        println!(
            "graph: {} vertices, {} edges",
            detection.graph_vertices, detection.graph_edges
        );
        println!(
            "generators: {} ({} eligible of {})",
            detection.generators.len(),
            detection.eligible_count(),
            detection.generators.len()
        );
        println!("group order: {}", format_order(&detection.group.order));
        if nontrivial_sizes.is_empty() {
            println!("orbits: {} (all trivial)", detection.group.orbits.len());
        } else {
            println!(
                "orbits: {} ({} nontrivial, sizes {})",
                detection.group.orbits.len(),
                nontrivial_sizes.len(),
                sizes
            );
        }
        for (i, (g, v)) in detection.generators.iter().zip(&detection.verdicts).enumerate() {
            println!("generator {}: {} [{}]", i + 1, g, v);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_break(args: BreakArgs, verbose: bool) -> Result<ExitCode> {
    let (dqbf, source_format) = load(&args.file, verbose)?;
    let start = Instant::now();
    let outcome = match break_symmetries(&dqbf, args.max_generators, &limits_with(args.max_nodes)) {
        Ok(o) => o,
        Err(PipelineError::Autom(e)) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_BUDGET));
        }
        Err(e) => return Err(e.into()),
    };
    if verbose {
        eprintln!("break: {:?}", start.elapsed());
    }
    let format = match args.format.as_deref() {
        Some("qdimacs") => SourceFormat::Qdimacs,
        Some("dqdimacs") => SourceFormat::Dqdimacs,
        _ => source_format,
    };
    let text = dqdimacs::write(&outcome.broken, format)?;
    fs::write(&args.output, text).with_context(|| format!("writing {}", args.output.display()))?;
    println!("generators={}", outcome.detection.generators.len());
    println!("eligible={}", outcome.detection.eligible_count());
    println!("used_generators={}", outcome.artifact.used_generator_count());
    println!("added_vars={}", outcome.artifact.added_variable_count());
    println!("added_clauses={}", outcome.artifact.added_clause_count());
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs, verbose: bool) -> Result<ExitCode> {
    let (dqbf, _) = load(&args.file, verbose)?;
    let budget = Budget {
        max_universals: args.max_universals,
        max_interpretations: args.max_interpretations,
        // the CLI solver runs single-threaded end to end
        parallel: false,
        ..Budget::default()
    };
    let start = Instant::now();
    match brute_truth(&dqbf, &budget) {
        Ok((truth, witness)) => {
            if verbose {
                eprintln!("solve: {:?}", start.elapsed());
            }
            println!("result={}", if truth { "true" } else { "false" });
            if args.witness {
                if let Some(w) = witness {
                    println!("witness: {w}");
                }
            }
            Ok(ExitCode::from(if truth { EXIT_TRUE } else { EXIT_FALSE }))
        }
        Err(e @ OracleError::BudgetExceeded { .. }) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(EXIT_BUDGET))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)
        .with_context(|| format!("reading directory {}", args.dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();

    let limits = limits_with(args.max_nodes);
    let order_of = |path: &PathBuf| -> (PathBuf, Result<BigUint>) {
        let result = (|| {
            let text = fs::read_to_string(path)?;
            let outcome = dqdimacs::parse(&text)?;
            let detection = detect(&outcome.dqbf, &limits)?;
            Ok(detection.group.order)
        })();
        (path.clone(), result)
    };

    #[cfg(feature = "parallel")]
    let results: Vec<(PathBuf, Result<BigUint>)> = {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs.unwrap_or(0))
            .build()
            .map_err(|e| anyhow!("worker pool: {e}"))?;
        pool.install(|| files.par_iter().map(order_of).collect())
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(PathBuf, Result<BigUint>)> = {
        let _ = args.jobs;
        files.iter().map(order_of).collect()
    };

    // buckets: =1, (1,10], (10,100], (100,1000], >1000
    let mut buckets = [0usize; 5];
    let mut failures = 0usize;
    for (path, result) in &results {
        match result {
            Ok(order) => {
                println!("{}: order={}", path.display(), format_order(order));
                let b = if *order <= BigUint::from(1u32) {
                    0
                } else if *order <= BigUint::from(10u32) {
                    1
                } else if *order <= BigUint::from(100u32) {
                    2
                } else if *order <= BigUint::from(1000u32) {
                    3
                } else {
                    4
                };
                buckets[b] += 1;
            }
            Err(e) => {
                eprintln!("warning: {}: {e:#}", path.display());
                failures += 1;
            }
        }
    }
    println!(
        "histogram: <=1:{} <=10:{} <=100:{} <=1000:{} >1000:{}",
        buckets[0], buckets[1], buckets[2], buckets[3], buckets[4]
    );
    if failures > 0 {
        eprintln!("warning: {failures} file(s) skipped");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let (dqbf, output, format) = match args.family {
        GenFamily::Kbkf { n, output, format } => {
            if n == 0 {
                return Err(anyhow!("N must be at least 1"));
            }
            (kbkf(n), output, format)
        }
        GenFamily::Parity { n, output, format } => {
            if n == 0 {
                return Err(anyhow!("N must be at least 1"));
            }
            (parity(n), output, format)
        }
        GenFamily::Random {
            seed,
            universals,
            existentials,
            max_deps,
            clauses,
            clause_len,
            plant,
            output,
            format,
        } => {
            let params = RandomParams {
                universals,
                existentials,
                max_dependencies: max_deps,
                clause_count: clauses,
                max_clause_len: clause_len,
                plant_symmetry: plant,
            };
            (random_dqbf(seed, &params), output, format)
        }
    };
    let format = match format.as_str() {
        "qdimacs" => SourceFormat::Qdimacs,
        _ => SourceFormat::Dqdimacs,
    };
    let text = dqdimacs::write(&dqbf, format)?;
    fs::write(&output, text).with_context(|| format!("writing {}", output.display()))?;
    println!(
        "vars={} clauses={}",
        dqbf.variable_count(),
        dqbf.clause_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn format_name(format: SourceFormat) -> &'static str {
    match format {
        SourceFormat::Qdimacs => "qdimacs",
        SourceFormat::Dqdimacs => "dqdimacs",
    }
}
