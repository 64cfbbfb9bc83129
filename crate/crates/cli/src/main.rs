mod cplx;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use loopb::distcalc::BracketTable;
use loopb::elliptic::EllipticContext;
use loopb::error::Error;
use loopb::models::{appendix_table, lemma1_descend, thm3_extract};
use loopb::symexpr::Field;
use loopb::verify::{self, IdentityOptions, PoissonOptions, SuiteReport};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "loopb", version, about = "Elliptic Poisson structures on loop spaces")]
struct Cli {
    /// Seed for every randomized command.
    #[arg(long, global = true, env = "LOOPB_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a special function.
    Elliptic {
        #[command(subcommand)]
        action: EllipticCmd,
    },
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Emit the structure constants for n fields.
    Table {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descend the extracted table to affine coordinates.
    Descend {
        #[arg(long)]
        n: usize,
        /// Field used as denominator, e.g. z0.
        #[arg(long, value_parser = parse_field)]
        denominator: Field,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EllipticCmd {
    Eval {
        #[arg(long = "fn", value_enum)]
        function: Function,
        #[arg(long, value_parser = cplx::parse)]
        z: Option<Complex64>,
        #[arg(long, value_parser = cplx::parse)]
        v: Option<Complex64>,
        #[arg(long, value_parser = cplx::parse)]
        tau: Complex64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Function {
    Wp,
    Zeta,
    Sigma,
    G1,
    G2,
    G3,
    Q,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Extract,
    Appendix,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Identities,
    Poisson,
    Thm2,
    Nogo,
    Cp2,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    /// Sample points (identities, thm2) or jets per tau (poisson).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_parser = cplx::parse)]
    s: Option<Complex64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_parser = cplx::parse, default_value = "1")]
    g2: Complex64,
    #[arg(long, value_parser = cplx::parse, default_value = "0.5")]
    g3: Complex64,
    /// Plant a sign flip in the extracted table (poisson).
    #[arg(long)]
    corrupt: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_field(s: &str) -> Result<Field, String> {
    let k = |t: &str| t.parse::<u16>().map_err(|_| format!("invalid field '{s}', expected z<k>"));
    match s.strip_prefix('z') {
        Some(t) => Ok(Field::Z(k(t)?)),
        None => Err(format!("invalid field '{s}', expected z<k>")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` signals a failed verification.
fn run(cli: Cli) -> Result<bool, Error> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match cli.command {
        Command::Elliptic { action: EllipticCmd::Eval { function, z, v, tau } } => {
            say(&cplx::render(evaluate(function, z, v, tau)?));
            Ok(true)
        }
        Command::Verify(args) => run_verify(args, seed),
        Command::Table { n, source, out } => {
            let consts = match source {
                Source::Extract => thm3_extract(n)?,
                Source::Appendix => appendix_table(n)?,
            };
            emit(out.as_deref(), &consts.to_json()?)?;
            Ok(true)
        }
        Command::Descend { n, denominator, out } => {
            let table = lemma1_descend(&thm3_extract(n)?.to_table(), denominator)?;
            let doc = descent_doc(n, denominator, &table);
            emit(out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
            Ok(true)
        }
    }
}

fn required(v: Option<Complex64>, name: &str) -> Result<Complex64, Error> {
    v.ok_or_else(|| Error::Domain(format!("--{name} is required for this function")))
}

fn evaluate(f: Function, z: Option<Complex64>, v: Option<Complex64>, tau: Complex64) -> Result<Complex64, Error> {
    let ctx = EllipticContext::new(tau, 1e-14)?;
    match f {
        Function::Wp => ctx.wp(required(z, "z")?),
        Function::Zeta => ctx.zeta(required(z, "z")?),
        Function::Sigma => ctx.sigma(required(z, "z")?),
        Function::G1 => Ok(ctx.g1()),
        Function::G2 => Ok(ctx.g2()),
        Function::G3 => Ok(ctx.g3()),
        Function::Q => ctx.q_weight(required(z, "z")?, required(v, "v")?),
    }
}

fn run_verify(a: VerifyArgs, seed: u64) -> Result<bool, Error> {
    let report: SuiteReport = match a.suite {
        Suite::Identities => {
            say(&format!("seed: {seed}"));
            let d = IdentityOptions::default();
            let opts = IdentityOptions { trials: a.trials.unwrap_or(d.trials), tol: a.tol.unwrap_or(d.tol), ..d };
            verify::run_identity_suite_with(seed, &opts)
        }
        Suite::Poisson => {
            say(&format!("seed: {seed}"));
            let n = a.n.unwrap_or(2);
            let d = PoissonOptions::new(n);
            let opts = PoissonOptions {
                jets: a.trials.unwrap_or(d.jets),
                tol: a.tol.unwrap_or(d.tol),
                corrupt: a.corrupt,
                ..d
            };
            verify::run_poisson_suite_with(seed, &opts)
        }
        Suite::Thm2 => {
            say(&format!("seed: {seed}"));
            verify::run_thm2_suite_with(a.n.unwrap_or(2), a.trials.unwrap_or(10), seed, a.tol.unwrap_or(1e-8))
        }
        Suite::Nogo => {
            say(&format!("seed: {seed}"));
            verify::run_nogo_suite(a.s.unwrap_or(Complex64::new(2.0, 0.0)), a.restarts.unwrap_or(100), seed)
        }
        Suite::Cp2 => verify::run_cp2_suite(a.g2, a.g3),
    };
    say(report.summary().trim_end());
    if let Some(path) = &a.json {
        emit(Some(path), &report.to_json()?)?;
    }
    Ok(report.passed)
}

fn descent_doc(n: usize, denominator: Field, t: &BracketTable) -> serde_json::Value {
    let entries: Vec<serde_json::Value> = t
        .entries()
        .map(|((a, b), coeffs)| {
            serde_json::json!({
                "a": a.to_string(),
                "b": b.to_string(),
                "coeffs": coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::json!({
        "n": n,
        "denominator": denominator.to_string(),
        "fields": t.gens().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "entries": entries,
    })
}

/// Prints a line; a closed stdout is not an error.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

/// Writes `text` to `path` through a sibling temporary file, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    let Some(path) = path else {
        say(text);
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}
