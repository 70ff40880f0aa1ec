use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shaforge_cli::commands::{cmd_analyze, cmd_ap, cmd_localdata, CurveInput};
use shaforge_cli::scan::{run_scan, OnError, ScanConfig, ScanFormat};
use shaforge_cli::{parse_range, CliError, CliResult};
use shaforge_core::lseries::DEFAULT_MAX_TERMS;
use shaforge_core::AnalyzeOptions;

#[derive(Parser)]
#[command(name = "shaforge", version, about = "Analytic Sha of rank-zero elliptic curves over Q")]
struct Cli {
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Refuse L-series needing more terms than this
    #[arg(long, global = true, env = "SHAFORGE_MAX_TERMS", default_value_t = DEFAULT_MAX_TERMS)]
    max_terms: u64,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(clap::Args)]
struct CurveArgs {
    /// Weierstrass model `[a1,a2,a3,a4,a6]`
    #[arg(long, allow_hyphen_values = true)]
    curve: Option<String>,

    /// Family member `i,n,p`
    #[arg(long, allow_hyphen_values = true)]
    family: Option<String>,
}

impl CurveArgs {
    fn input(&self) -> CliResult<CurveInput> {
        CurveInput::parse(self.curve.as_deref(), self.family.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline for one curve
    Analyze {
        #[command(flatten)]
        curve: CurveArgs,
        /// L(E,1) is computed to within 10^-k
        #[arg(long, default_value_t = 10)]
        k: u32,
        /// Print the series length and a time estimate without summing
        #[arg(long)]
        dry_run: bool,
        #[arg(long, value_enum, default_value = "text")]
        out: TextFormat,
    },
    /// Scan E_i(n,p) over a grid
    Scan {
        /// Range `a..b` of n, inclusive
        #[arg(long, allow_hyphen_values = true)]
        n: String,
        /// Range `a..b` of p, inclusive
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, default_value_t = 3)]
        k: u32,
        /// Journal of completed classes; an existing one is resumed
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        out: ScanFormat,
        /// Table file (stdout if absent)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Only conductors and Tamagawa products
        #[arg(long)]
        conductor_only: bool,
        #[arg(long, value_enum, default_value = "skip")]
        on_error: OnError,
    },
    /// Dump a_p for primes up to a limit
    Ap {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 1000)]
        limit: u64,
        /// Also write a binary a_p cache file
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        out: TextFormat,
    },
    /// Dump Tate's algorithm output at every bad prime
    Localdata {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value = "text")]
        out: TextFormat,
    },
}

fn run(cli: Cli) -> CliResult<Option<CliError>> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global().ok();
    }
    let print = |s: &str| {
        let mut out = std::io::stdout();
        out.write_all(s.as_bytes()).and_then(|_| out.flush()).map_err(CliError::io("<stdout>"))
    };
    match cli.cmd {
        Command::Analyze { curve, k, dry_run, out } => {
            let opts = AnalyzeOptions { k, max_terms: cli.max_terms };
            let res = cmd_analyze(&curve.input()?, opts, out == TextFormat::Json, dry_run)?;
            print(&res.text)?;
            Ok(res.error)
        }
        Command::Scan { n, p, k, checkpoint, out, output, conductor_only, on_error } => {
            let cfg = ScanConfig {
                n: parse_range(&n).map_err(CliError::Usage)?,
                p: parse_range(&p).map_err(CliError::Usage)?,
                k,
                max_terms: cli.max_terms,
                conductor_only,
                on_error,
                workers: cli.workers,
                format: out,
                checkpoint,
                output,
            };
            let s = run_scan(&cfg)?;
            log::info!("{} rows ({} ok), {} of {} classes resumed", s.rows, s.ok_rows, s.resumed, s.classes);
            Ok(None)
        }
        Command::Ap { curve, limit, cache, out } => {
            print(&cmd_ap(&curve.input()?, limit, out == TextFormat::Json, cache.as_deref())?)?;
            Ok(None)
        }
        Command::Localdata { curve, out } => {
            print(&cmd_localdata(&curve.input()?, out == TextFormat::Json)?)?;
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let err = match run(cli) {
        Ok(None) => return ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => e,
    };
    eprintln!("error[{}]: {err}", err.kind());
    ExitCode::from(err.exit_code() as u8)
}
