mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use commands::{read_json, Failure, GhInput, Outcome, EXIT_IDENTITY, EXIT_INVARIANT};
use output::{write_atomic, ReportDocument, Settings};
use twistorlab_core::ward::{WardOptions, DEFAULT_NODES, DEFAULT_QUAD_TOL};
use twistorlab_core::Error;

const EXIT_CODES: &str = "Exit codes:
  0  every check passed
  1  output could not be written
  2  usage or input parse error
  3  invariant violation
  4  identity check FAIL

Environment:
  TWISTORLAB_THREADS  worker threads for parallel quadrature and grid sweeps";

#[derive(Parser, Debug)]
#[command(name = "twistorlab", version, about = "Twistor transforms over the Riemann sphere", after_help = EXIT_CODES)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Quadrature tolerance (default 1e-10 for ward, 1e-8 for penrose).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Trapezoid nodes on the unit circle.
    #[arg(long, global = true, default_value_t = DEFAULT_NODES, value_parser = positive)]
    nodes: usize,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Holomorphic bundles on CP1.
    #[command(subcommand)]
    Bundle(BundleCmd),
    /// Extensions by trivial bundles and the infinitesimal Ward transform.
    #[command(subcommand)]
    Ward(WardCmd),
    /// Penrose transform of Laurent germs.
    #[command(subcommand)]
    Penrose(PenroseCmd),
    /// Gibbons-Hawking verification.
    #[command(subcommand)]
    Gh(GhCmd),
    /// Representations of sl(2).
    #[command(subcommand)]
    Rep(RepCmd),
}

#[derive(Subcommand, Debug)]
enum BundleCmd {
    /// Splitting type with its gauge certificate.
    Split { input: PathBuf },
    /// h0 and h1 by direct solve and from the splitting.
    Cohomology { input: PathBuf },
}

#[derive(Subcommand, Debug)]
enum WardCmd {
    /// Splitting type of the extension bundle.
    Extend { input: PathBuf },
    /// Checks the identity for the class, or for N random classes over its base.
    Identity {
        input: PathBuf,
        #[arg(long, value_name = "N")]
        random: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum PenroseCmd {
    /// Exact and quadrature values of the transform.
    Eval {
        germ: PathBuf,
        space: PathBuf,
        /// Point of U as `re` or `re:im` rationals separated by commas; origin when absent.
        #[arg(long)]
        at: Option<String>,
    },
    /// Gradient identity and hypercomplex certificate at a point.
    Certify {
        germ: PathBuf,
        space: PathBuf,
        #[arg(long)]
        at: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum GhCmd {
    /// Residual suite and refinement table.
    Verify {
        input: PathBuf,
        /// Also write the refinement table as CSV.
        #[arg(long, value_name = "CSV")]
        plot: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum RepCmd {
    /// Clebsch-Gordan split of U1 (x) U_{k-1}.
    Clebsch { k: u32 },
    /// Invariant symmetric form on U_k.
    Form { k: u32 },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn label(p: &Path) -> String {
    p.display().to_string()
}

/// Command label, inputs, outcome, plot path and effective tolerance.
type Run = (String, Vec<String>, Outcome, Option<PathBuf>, Option<f64>);

fn run(cli: &Cli) -> Result<Run, Failure> {
    let g = &cli.global;
    let ward_opts = WardOptions { nodes: g.nodes, quad_tol: g.tol.unwrap_or(DEFAULT_QUAD_TOL) };
    let penrose_tol = g.tol.unwrap_or(1e-8);
    Ok(match &cli.command {
        Command::Bundle(BundleCmd::Split { input }) => {
            let b = read_json(input)?;
            ("bundle split".into(), vec![label(input)], commands::bundle_split(&b), None, None)
        }
        Command::Bundle(BundleCmd::Cohomology { input }) => {
            let b = read_json(input)?;
            ("bundle cohomology".into(), vec![label(input)], commands::bundle_cohomology(&b), None, None)
        }
        Command::Ward(WardCmd::Extend { input }) => {
            let c = read_json(input)?;
            ("ward extend".into(), vec![label(input)], commands::ward_extend(&c)?, None, None)
        }
        Command::Ward(WardCmd::Identity { input, random }) => {
            let c = read_json(input)?;
            let o = commands::ward_identity(&c, *random, g.seed, ward_opts)?;
            ("ward identity".into(), vec![label(input)], o, None, Some(ward_opts.quad_tol))
        }
        Command::Penrose(PenroseCmd::Eval { germ, space, at }) => {
            let (gm, sp) = (read_json(germ)?, read_json(space)?);
            let o = commands::penrose_eval(&gm, &sp, at.as_deref(), g.nodes, penrose_tol)?;
            ("penrose eval".into(), vec![label(germ), label(space)], o, None, Some(penrose_tol))
        }
        Command::Penrose(PenroseCmd::Certify { germ, space, at }) => {
            let (gm, sp) = (read_json(germ)?, read_json(space)?);
            let o = commands::penrose_certify(&gm, &sp, at.as_deref(), g.nodes, penrose_tol)?;
            ("penrose certify".into(), vec![label(germ), label(space)], o, None, Some(penrose_tol))
        }
        Command::Gh(GhCmd::Verify { input, plot }) => {
            let gi: GhInput = read_json(input)?;
            let o = commands::gh_verify(&gi, plot.is_some())?;
            ("gh verify".into(), vec![label(input)], o, plot.clone(), None)
        }
        Command::Rep(RepCmd::Clebsch { k }) => ("rep clebsch".into(), vec![k.to_string()], commands::rep_clebsch(*k)?, None, None),
        Command::Rep(RepCmd::Form { k }) => ("rep form".into(), vec![k.to_string()], commands::rep_form(*k)?, None, None),
    })
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TWISTORLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("TWISTORLAB_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("TWISTORLAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (command, inputs, outcome, plot_path, tol) = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::QuadratureMismatch { .. } | Error::IdentityViolation { .. } => EXIT_IDENTITY,
                _ => EXIT_INVARIANT,
            };
            return ExitCode::from(code as u8);
        }
    };
    let settings = Settings {
        tol,
        nodes: cli.global.nodes,
        seed: outcome.seeded.then_some(cli.global.seed),
    };
    let doc = ReportDocument::new(&command, inputs, settings, outcome.checks, outcome.result);
    if let (Some(p), Some(csv)) = (plot_path.as_deref(), outcome.plot.as_deref()) {
        if let Err(e) = write_atomic(p, csv.as_bytes()) {
            eprintln!("error: {}: {e}", p.display());
            return ExitCode::from(1);
        }
    }
    if let Err(e) = emit(cli.global.out.as_deref(), &doc.to_json()) {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(1);
    }
    if doc.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{command}: FAIL");
        ExitCode::from(outcome.fail_code as u8)
    }
}
