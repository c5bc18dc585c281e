use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rnfs::apstats::{bad_fraction_report_near, to_csv};
use rnfs::linalg::Solver;
use rnfs::params::{derive_params, dickman_rho, NfsParams, ParamOverrides};
use rnfs::pipeline::{factor, parse_biguint, Algo, FactorConfig, Status};
use rnfs::smooth::{psi_count, psi_count_ap};

#[derive(Parser)]
#[command(name = "rnfs", version, about = "Randomised number field sieve and smooth-number statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor N completely.
    Factor(FactorArgs),
    /// Dickman's rho at U.
    Rho {
        #[arg(long)]
        u: f64,
    },
    /// Derived parameters for N as key=value lines.
    Params {
        #[arg(long)]
        n: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Exact smooth-number statistics.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Ψ(x, y), or Ψ(x, y; r, s) with --r and --s.
    Psi {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        #[arg(long, requires = "s")]
        r: Option<u64>,
        #[arg(long, requires = "r")]
        s: Option<u64>,
    },
    /// Good/bad census over smooth moduli.
    Ap(ApArgs),
}

#[derive(Args)]
struct ApArgs {
    /// Upper end of the F range.
    #[arg(long)]
    x: u64,
    /// Lower end of the F range; defaults to --x (single point).
    #[arg(long)]
    x_lo: Option<u64>,
    #[arg(long)]
    y: u64,
    #[arg(long)]
    rmin: u64,
    #[arg(long)]
    rmax: u64,
    #[arg(long)]
    smooth: u64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Nfs,
    Dixon,
}

#[derive(Args)]
struct FactorArgs {
    n: String,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Polynomial degree.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// File of key=value lines, applied before --set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    relations_out: Option<PathBuf>,
    #[arg(long)]
    relations_in: Option<PathBuf>,
    /// Search threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    faithful_characters: bool,
    /// Wiedemann instead of Gaussian elimination for dependencies.
    #[arg(long)]
    wiedemann: bool,
    /// Dixon factor base bound.
    #[arg(long)]
    dixon_bound: Option<u64>,
    /// Include wall-clock timings in the JSON report.
    #[arg(long)]
    timing: bool,
}

/// Failure exit codes: 1 for usage and input errors, 2 for exhausted runs.
enum Failure {
    Usage(String),
    Exhausted,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Exhausted => 2,
        }
    }
}

impl From<rnfs::Error> for Failure {
    fn from(e: rnfs::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// `%g`-style formatting with `sig` significant digits.
fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if exp < -5 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, v);
        let (mant, e) = s.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(mant), e)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn overrides(config: Option<&PathBuf>, sets: &[String]) -> Result<ParamOverrides, Failure> {
    let mut o = ParamOverrides::new();
    if let Some(path) = config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        o.parse_config(&text)?;
    }
    for s in sets {
        o.set_assignment(s)?;
    }
    Ok(o)
}

fn params_lines(p: &NfsParams) -> String {
    let lines = [
        ("n", p.n.to_string()),
        ("d", p.d.to_string()),
        ("delta", p.delta.to_string()),
        ("kappa", p.kappa.to_string()),
        ("sigma", p.sigma.to_string()),
        ("beta", p.beta.to_string()),
        ("beta_prime", p.beta_prime.to_string()),
        ("B", p.b.to_string()),
        ("B_prime", p.b_prime.to_string()),
        ("H", p.h.to_string()),
        ("A", p.a.to_string()),
        ("char_count", p.char_count.to_string()),
        ("deepening_levels", p.deepening_levels.to_string()),
        ("budget_per_level", p.budget_per_level.to_string()),
        ("batch_k", p.batch_k.to_string()),
        ("early_abort", p.early_abort.to_string()),
        ("faithful_characters", p.faithful_characters.to_string()),
        ("max_rounds", p.max_rounds.to_string()),
        ("kernel_retries", p.kernel_retries.to_string()),
    ];
    lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn run_factor(a: FactorArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let n: BigUint = parse_biguint(&a.n)?;
    let mut o = overrides(a.config.as_ref(), &a.set)?;
    if let Some(d) = a.d {
        o.set("d", &d.to_string())?;
    }
    if a.faithful_characters {
        o.set("faithful_characters", "true")?;
    }
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |w| w.get()));
    if workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let cfg = FactorConfig {
        algo: match a.algo {
            None => Algo::Auto,
            Some(AlgoArg::Nfs) => Algo::Nfs,
            Some(AlgoArg::Dixon) => Algo::Dixon,
        },
        seed: a.seed,
        overrides: o,
        workers,
        dixon_bound: a.dixon_bound,
        solver: if a.wiedemann { Solver::Wiedemann } else { Solver::Gauss },
        relations_in: a.relations_in,
        relations_out: a.relations_out,
        timing: a.timing,
    };
    let report = factor(&n, &cfg)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        let fs: Vec<String> = report.factors.iter().map(|f| f.to_string()).collect();
        writeln!(out, "{}", fs.join(" "))?;
    }
    match report.status {
        Status::Exhausted => Err(Failure::Exhausted),
        _ => Ok(()),
    }
}

fn run_ap(a: ApArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let lo = a.x_lo.unwrap_or(a.x);
    let rep = bad_fraction_report_near(a.rmin, a.rmax, a.smooth, lo, a.x, a.y, a.eps)?;
    if let Some(path) = &a.csv {
        fs::write(path, to_csv(&rep)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    } else {
        writeln!(out, "moduli={}", rep.moduli.len())?;
        writeln!(out, "psi={}", rep.psi)?;
        writeln!(out, "good={} bad={} indeterminate={}", rep.good, rep.bad, rep.indeterminate)?;
        writeln!(out, "good_fraction={:.6}", rep.good_fraction)?;
        writeln!(out, "bad_fraction={:.6}", rep.bad_fraction)?;
        writeln!(out, "restricted_deviation_sum={:.3}", rep.restricted_deviation_sum)?;
        writeln!(out, "partition_identity={}", rep.partition_identity_holds)?;
    }
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Factor(a) => run_factor(a, out),
        Command::Rho { u } => {
            writeln!(out, "{}", format_sig(dickman_rho(u)?, 6))?;
            Ok(())
        }
        Command::Params { n, set } => {
            let n = parse_biguint(&n)?;
            let p = derive_params(&n, &overrides(None, &set)?)?;
            write!(out, "{}", params_lines(&p))?;
            Ok(())
        }
        Command::Stats(StatsCommand::Psi { x, y, r, s }) => {
            let count = match (r, s) {
                (Some(r), Some(s)) => psi_count_ap(x, y, r, s)?,
                _ => psi_count(x, y)?,
            };
            writeln!(out, "{count}")?;
            Ok(())
        }
        Command::Stats(StatsCommand::Ap(a)) => run_ap(a, out),
    }
}

/// Help and version requests exit 0; anything else clap rejects is a usage error.
fn parse_exit_code(e: &clap::Error) -> u8 {
    if e.use_stderr() {
        1
    } else {
        0
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(parse_exit_code(&e));
        }
    };
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("rnfs: {msg}"),
                Failure::Exhausted => eprintln!("rnfs: search exhausted before a complete factorization"),
            }
            ExitCode::from(f.code())
        }
    }
}
