use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magnetic_ncg::report::{
    dixmier_ladder, exit_code, invariant_report, ladder_csv, parse_ladder, plan, verify_all, Invariant,
    OutputFormat, Report, RunConfig,
};
use magnetic_ncg::Result;

#[derive(Parser)]
#[command(name = "magnetic-ncg", version, about = "Checks of the Landau spectral triple and its cyclic pairings")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Flat key = value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    lb: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    mmax: Option<usize>,
    #[arg(long, global = true)]
    buffer: Option<usize>,
    /// Comma-separated truncation points, e.g. 1e3,1e4,1e5.
    #[arg(long, global = true)]
    ladder: Option<String>,
    #[arg(long, global = true)]
    tol_exact: Option<f64>,
    #[arg(long, global = true)]
    tol_dixmier: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print the resolved configuration and the plan without computing.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum InvariantArg {
    GapLabel,
    Chern,
    NcIntegral,
    Psi,
    Ch,
    Tau2,
}

#[derive(Subcommand)]
enum Command {
    /// Run every acceptance check.
    VerifyAll,
    /// Evaluate one invariant on `pi:j`, `pi-sum:j..k` or a JSON element file.
    Invariant {
        #[arg(value_enum)]
        which: InvariantArg,
        /// Element, or three comma-separated elements for psi, ch and tau2.
        input: String,
    },
    /// Partial sums and extrapolation for `d4`, `ncint:<element>` or `ch:<triple>`.
    DixmierLadder { target: String },
}

fn resolve(o: &Options) -> Result<RunConfig> {
    let mut c = match &o.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.lb {
        c.lb = v;
    }
    if let Some(v) = o.eps {
        c.eps = v;
    }
    if let Some(v) = o.nmax {
        c.n_max = v;
    }
    if let Some(v) = o.mmax {
        c.m_max = v;
    }
    if let Some(v) = o.buffer {
        c.buffer = v;
    }
    if let Some(v) = &o.ladder {
        c.ladder = parse_ladder(v)?;
    }
    if let Some(v) = o.tol_exact {
        c.tol_exact = v;
    }
    if let Some(v) = o.tol_dixmier {
        c.tol_dixmier = v;
    }
    if let Some(v) = o.seed {
        c.seed = v;
    }
    if o.out.is_some() {
        c.out = o.out.clone();
    }
    if let Some(f) = o.format {
        c.format = Some(match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        });
    }
    Ok(c)
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn checks_csv(r: &Report) -> String {
    let mut out = String::from("name,expected,got,error,tolerance,pass\n");
    for c in &r.checks {
        let q = |v| serde_json::to_string(&v).unwrap_or_default().replace(',', ";");
        out.push_str(&format!("{},{},{},{},{},{}\n", c.name, q(c.expected), q(c.got), c.error, c.tolerance, c.pass));
    }
    out
}

fn write_report(config: &RunConfig, r: &Report) -> Result<u8> {
    let text = match config.format {
        Some(OutputFormat::Csv) => checks_csv(r),
        _ => serde_json::to_string_pretty(r)? + "\n",
    };
    emit(config, &text)?;
    for c in &r.checks {
        eprintln!("{} {} (error {:.3e}, tolerance {:.1e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.error, c.tolerance);
    }
    if let Some(a) = &r.aborted {
        eprintln!("aborted: {a}");
        return Ok(3);
    }
    Ok(if r.pass { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    let config = resolve(&cli.opts)?;
    if cli.opts.dry_run {
        let ctx_ok = config.context().map(|_| "valid".to_string()).unwrap_or_else(|e| e.to_string());
        let steps: Vec<String> = match &cli.command {
            Command::VerifyAll => plan().into_iter().map(|(n, r)| format!("{n}: {r}")).collect(),
            Command::Invariant { input, .. } => vec![format!("invariant on {input}")],
            Command::DixmierLadder { target } => vec![format!("ladder for {target}")],
        };
        let v = serde_json::json!({ "config": config, "configuration": ctx_ok, "plan": steps });
        emit(&config, &(serde_json::to_string_pretty(&v)? + "\n"))?;
        return Ok(0);
    }
    match cli.command {
        Command::VerifyAll => write_report(&config, &verify_all(&config)?),
        Command::Invariant { which, input } => {
            let which = match which {
                InvariantArg::GapLabel => Invariant::GapLabel,
                InvariantArg::Chern => Invariant::Chern,
                InvariantArg::NcIntegral => Invariant::NcIntegral,
                InvariantArg::Psi => Invariant::Psi,
                InvariantArg::Ch => Invariant::Ch,
                InvariantArg::Tau2 => Invariant::Tau2,
            };
            write_report(&config, &invariant_report(&config, which, &input)?)
        }
        Command::DixmierLadder { target } => {
            let e = dixmier_ladder(&config, &target)?;
            let text = match config.format {
                Some(OutputFormat::Json) => serde_json::to_string_pretty(&e)? + "\n",
                _ => ladder_csv(&e),
            };
            emit(&config, &text)?;
            Ok(if e.measurable { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
