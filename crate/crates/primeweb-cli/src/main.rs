use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use primeweb::appendix::DESK_LIMIT;
use primeweb::sequences::FilterKind;
use primeweb_cli::commands::{
    self, CacheAction, Law, MatrixArgs, MatrixFormat, Outcome, Session, VerifyTarget, WebArgs, WebKind, EXIT_ERROR,
};
use primeweb_cli::config::RunConfig;
use primeweb_cli::error::CliError;

#[derive(Parser)]
#[command(name = "primeweb", version, about = "Prime-index progressions, their laws and spiral webs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// key = value run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Ray cache file (also PRIMEWEB_CACHE).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    hard_limit: Option<u64>,
    #[arg(long, global = true)]
    quadrature_tol: Option<f64>,
    #[arg(long, global = true)]
    angle_tol: Option<f64>,
    #[arg(long, global = true)]
    root_tol: Option<f64>,
    /// Print the effective configuration before running.
    #[arg(long, global = true)]
    echo_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the matrix of a prime family.
    Matrix {
        /// Family tag: P, T1, T2, T3, T4, S, D4n-1, D4n+1, D6n-1, D6n+1, E, H.
        filter: String,
        #[arg(default_value_t = 7)]
        rows: usize,
        #[arg(default_value_t = 4)]
        cols: usize,
        /// Largest value written.
        #[arg(long, default_value_t = DESK_LIMIT)]
        limit: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Compare against the printed table of the family.
        #[arg(long)]
        appendix: bool,
        /// Allow values up to 10^12.
        #[arg(long)]
        deep: bool,
        /// Time budget of a deep comparison.
        #[arg(long, default_value_t = 1800)]
        budget_secs: u64,
    },
    /// Check an identity; exit 1 when it fails.
    Verify {
        #[arg(value_enum)]
        what: Verify,
        #[arg(default_value_t = 1_000_000)]
        bound: u64,
        #[arg(long, default_value = "P")]
        filter: String,
        /// Random address pairs for eq6.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate an analytic law.
    Laws {
        #[arg(value_enum)]
        law: LawName,
        /// Generator bound for eq8.
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
        #[arg(long, default_value_t = 4)]
        generator: u64,
        #[arg(long, short = 's', default_value_t = 2.0)]
        exponent: f64,
        #[arg(long, default_value_t = 8)]
        terms: usize,
        /// Prime bound for zeta.
        #[arg(long, default_value_t = 1_000_000)]
        prime_bound: u64,
    },
    /// Build a spiral web and write SVG and JSON.
    Web {
        #[arg(value_enum)]
        variant: Variant,
        /// Pitch angle in degrees.
        #[arg(long)]
        phi: Option<f64>,
        /// Overlay the three-rotation trapezoid at this index.
        #[arg(long)]
        trapezoid: Option<u64>,
        /// Turns of the pure web.
        #[arg(long, default_value_t = 3)]
        rotations: usize,
        #[arg(long)]
        labels: bool,
    },
    /// Write the three-turn equation system.
    ExportW3System { path: PathBuf },
    /// Inspect or maintain the ray cache.
    Cache {
        #[arg(value_enum)]
        action: CacheCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Verify {
    Partition,
    Eq6,
    Theorem2,
    Theorem3,
    Q1,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawName {
    Eq7,
    Eq8,
    Eta,
    Zeta,
    Predict,
    Conj3,
    Triplets,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Pure,
    W3,
    W4,
    Degenerate,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheCmd {
    Audit,
    Clear,
    Stats,
}

fn config(g: &Global) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?.parse()?,
        None => RunConfig::default(),
    };
    cfg.apply_env();
    if let Some(v) = &g.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = g.threads {
        cfg.threads = v;
    }
    if let Some(v) = &g.cache {
        cfg.cache_path = Some(v.clone());
    }
    if let Some(v) = g.hard_limit {
        cfg.hard_limit = v;
    }
    if let Some(v) = g.quadrature_tol {
        cfg.quadrature_tol = v;
    }
    if let Some(v) = g.angle_tol {
        cfg.angle_tol = v;
    }
    if let Some(v) = g.root_tol {
        cfg.root_tol = v;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cfg = config(&cli.global)?;
    if cli.global.echo_config {
        print!("{cfg}");
    }
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let session = Session::new(cfg);
    let kind = |s: &str| -> Result<FilterKind, CliError> { Ok(s.parse()?) };
    match cli.command {
        Command::Matrix { filter, rows, cols, limit, format, appendix, deep, budget_secs } => commands::matrix(
            &session,
            &MatrixArgs {
                filter: kind(&filter)?,
                rows,
                cols,
                value_limit: limit,
                format: match format {
                    Format::Csv => MatrixFormat::Csv,
                    Format::Json => MatrixFormat::Json,
                },
                appendix,
                deep,
                budget: deep.then(|| Duration::from_secs(budget_secs)),
            },
        ),
        Command::Verify { what, bound, filter, pairs, seed } => {
            let target = match what {
                Verify::Partition => VerifyTarget::Partition,
                Verify::Eq6 => VerifyTarget::Eq6,
                Verify::Theorem2 => VerifyTarget::Theorem2,
                Verify::Theorem3 => VerifyTarget::Theorem3,
                Verify::Q1 => VerifyTarget::Q1,
            };
            commands::verify(&session, target, kind(&filter)?, bound, pairs, seed)
        }
        Command::Laws { law, bound, generator, exponent, terms, prime_bound } => {
            let law = match law {
                LawName::Eq7 => Law::RayDistribution,
                LawName::Eq8 => Law::ColumnDistribution { bound },
                LawName::Eta => Law::Eta { generator, s: exponent, terms },
                LawName::Zeta => Law::Zeta { s: exponent, generator_bound: prime_bound, prime_bound },
                LawName::Predict => Law::Predict,
                LawName::Conj3 => Law::Conjecture3,
                LawName::Triplets => Law::Triplets,
            };
            commands::laws(&session, law)
        }
        Command::Web { variant, phi, trapezoid, rotations, labels } => {
            let kind = match variant {
                Variant::Pure => WebKind::Pure,
                Variant::W3 => WebKind::ThreeTurns,
                Variant::W4 => WebKind::FourTurns,
                Variant::Degenerate => WebKind::Degenerate,
            };
            commands::web(&session, &WebArgs { kind, pitch_degrees: phi, trapezoid, rotations, labels })
        }
        Command::ExportW3System { path } => commands::export_w3_system(&session, &path),
        Command::Cache { action } => commands::cache(
            &session,
            match action {
                CacheCmd::Audit => CacheAction::Audit,
                CacheCmd::Clear => CacheAction::Clear,
                CacheCmd::Stats => CacheAction::Stats,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
