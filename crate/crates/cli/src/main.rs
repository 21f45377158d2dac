//! `padic-resolvent`: run verification suites, emit tables, compute resolvents
//! and evaluate the closed-form valuation formulas.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error,
//! 3 only precision shortfalls.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use padic_resolvent::formulas::{
    corollary_bound, delta_valuation_rhs, identity_checks, lvalue_valuation_rhs,
    root_number_parity, FormulaInput, Sign,
};
use padic_resolvent::padic::rat;
use padic_resolvent::resolvent::{all_characters, resolvent, GaloisCharacter};
use padic_resolvent::suite::{
    build_table, combined_exit_code, run_suite, Grid, SuiteConfig, SuiteName, SuiteReport,
    TableKind, TableParams, SCHEMA_VERSION,
};
use padic_resolvent::{Error, PrimeProfile, TowerRing, Valuation};

use config::{FileConfig, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "padic-resolvent",
    version,
    about = "Resolvent valuations in cyclotomic towers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verification suites.
    Suite {
        #[command(subcommand)]
        action: SuiteAction,
    },
    /// Emit a table as CSV or JSON.
    Table(TableArgs),
    /// Ramification data of the tower.
    Ramification {
        #[command(subcommand)]
        action: RamificationAction,
    },
    /// Resolvents of one element.
    Resolvent {
        #[command(subcommand)]
        action: ResolventAction,
    },
    /// Closed-form valuation formulas.
    Formula {
        #[command(subcommand)]
        action: FormulaAction,
    },
}

#[derive(Subcommand, Debug)]
enum SuiteAction {
    /// Run one suite, or `all`, over a parameter grid.
    Run(Box<SuiteRunArgs>),
    /// List suite names with the statement each one checks.
    List,
}

#[derive(Args, Debug)]
struct SuiteRunArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    name: String,
    /// Primes, comma separated.
    #[arg(long = "p", value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Tower levels, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// Residue degrees (1 or 2), comma separated.
    #[arg(long = "f", value_delimiter = ',')]
    degrees: Option<Vec<u32>>,
    /// Skip grid points whose ring degree f·p^n(p-1) exceeds this.
    #[arg(long)]
    max_degree: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random elements per grid point for the lower-bound check.
    #[arg(long)]
    samples: Option<usize>,
    /// Random uniformizers per layer for the congruence check.
    #[arg(long)]
    uniformizer_samples: Option<usize>,
    /// Working precision beyond the tower level.
    #[arg(long)]
    extra_precision: Option<u32>,
    /// Record per-case wall-clock time (reports are then not reproducible).
    #[arg(long)]
    timing: bool,
    /// key=value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; defaults to a file under $PADIC_RESOLVENT_OUT_DIR, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// valuation-growth, ramification or omega.
    #[arg(long)]
    kind: String,
    #[command(flatten)]
    common: TableCommon,
}

#[derive(Args, Debug)]
struct TableCommon {
    #[arg(long)]
    p: u64,
    /// Largest level.
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    lambda: u64,
    #[arg(long, default_value_t = 0)]
    mu: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum RamificationAction {
    /// Herbrand breakpoints and different exponents, closed form against brute force.
    Table(TableCommon),
}

#[derive(Subcommand, Debug)]
enum ResolventAction {
    Compute(ResolventArgs),
}

#[derive(Args, Debug)]
struct ResolventArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    f: u32,
    /// `pi`, `zeta`, `frobenius` (uniformizer of the top Z_p-layer) or a JSON element file.
    #[arg(long, default_value = "frobenius")]
    alpha: String,
    /// Exponent of the Teichmüller character; with --wild selects one character.
    #[arg(long, allow_hyphen_values = true)]
    tame: Option<i64>,
    /// Exponent c of the wild character ψ(γ) = ζ_{p^n}^c.
    #[arg(long, allow_hyphen_values = true)]
    wild: Option<i64>,
    /// Shorthand for `--tame T --wild W`, written `T,W`.
    #[arg(long = "char", value_name = "TAME,WILD", conflicts_with_all = ["tame", "wild"], allow_hyphen_values = true)]
    character: Option<String>,
    /// Coefficient precision exponent N.
    #[arg(long)]
    precision: Option<u32>,
    /// Include the resolvent elements themselves.
    #[arg(long)]
    elements: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum FormulaAction {
    Eval(FormulaArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Delta,
    Lvalue,
    Bound,
    Parity,
}

#[derive(Args, Debug)]
struct FormulaArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    lambda: u64,
    #[arg(long, default_value_t = 0)]
    mu: u64,
    /// Root number, +1 or -1. Defaults to (-1)^{n-1}.
    #[arg(long = "W", allow_hyphen_values = true)]
    w: Option<i64>,
    /// Level from which the invariants are assumed to control the valuation.
    #[arg(long, default_value_t = 1)]
    n0: u32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}

/// Violations map to 1, precision shortfalls to 3, everything else is a usage error.
fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::TheoremViolation { .. }) | Some(Error::Internal(_)) => 1,
        Some(Error::PrecisionExhausted(_)) | Some(Error::TruncationTooShort(_)) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Suite {
            action: SuiteAction::Run(args),
        } => suite_run(args),
        Command::Suite {
            action: SuiteAction::List,
        } => {
            for s in SuiteName::ALL {
                println!("{:<22} {}", s.as_str(), s.statement());
            }
            Ok(0)
        }
        Command::Table(args) => {
            let kind: TableKind = args.kind.parse()?;
            table(kind, args.common)
        }
        Command::Ramification {
            action: RamificationAction::Table(common),
        } => table(TableKind::Ramification, common),
        Command::Resolvent {
            action: ResolventAction::Compute(args),
        } => resolvent_compute(args),
        Command::Formula {
            action: FormulaAction::Eval(args),
        } => formula_eval(args),
    }
}

/// Explicit path, else `default_name` under the output directory, else stdout.
fn emit(out: Option<&Path>, default_name: &str, text: &str) -> Result<()> {
    let target = match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)),
    };
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .with_context(|| format!("creating directory {}", dir.display()))?;
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn suite_run(args: Box<SuiteRunArgs>) -> Result<i32> {
    let suites: Vec<SuiteName> = if args.name == "all" {
        SuiteName::ALL.to_vec()
    } else {
        vec![args.name.parse()?]
    };
    let defaults = Grid::default();
    let grid = Grid {
        primes: args.primes.unwrap_or(defaults.primes),
        levels: args.levels.unwrap_or(defaults.levels),
        residue_degrees: args.degrees.unwrap_or(defaults.residue_degrees),
        max_degree: args.max_degree.unwrap_or(defaults.max_degree),
    };
    grid.validate()?;
    if grid.points().is_empty() {
        bail!(
            "the grid is empty after applying the degree limit {}",
            grid.max_degree
        );
    }

    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut cfg = file.apply(SuiteConfig::default());
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.samples {
        cfg.random_samples = v;
    }
    if let Some(v) = args.uniformizer_samples {
        cfg.uniformizer_samples = v;
    }
    if args.extra_precision.is_some() {
        cfg.extra_precision = args.extra_precision;
    }
    if args.timing {
        cfg.include_timing = true;
    }

    let mut reports: Vec<SuiteReport> = Vec::new();
    for s in suites {
        let report = run_suite(s, &grid, &cfg)?;
        eprintln!(
            "{:<22} pass {:>4}  fail {:>4}  precision {:>4}",
            s.as_str(),
            report.summary.pass,
            report.summary.fail,
            report.summary.precision_insufficient
        );
        reports.push(report);
    }
    let (text, name) = if reports.len() == 1 {
        (
            reports[0].to_json_string(),
            format!("suite-{}.json", reports[0].suite),
        )
    } else {
        let mut s = serde_json::to_string_pretty(&reports)?;
        s.push('\n');
        (s, "suite-all.json".to_string())
    };
    emit(args.out.as_deref(), &name, &text)?;
    Ok(combined_exit_code(&reports))
}

fn table(kind: TableKind, args: TableCommon) -> Result<i32> {
    let params = TableParams {
        p: args.p,
        n: args.n,
        lambda_inv: args.lambda,
        mu_inv: args.mu,
    };
    let t = build_table(kind, &params)?;
    let (text, ext) = match args.format {
        Format::Csv => (t.to_csv()?, "csv"),
        Format::Json => (t.to_json(), "json"),
    };
    let name = format!("table-{}-p{}-n{}.{ext}", kind.as_str(), args.p, args.n);
    emit(args.out.as_deref(), &name, &text)?;
    Ok(0)
}

fn resolvent_compute(args: ResolventArgs) -> Result<i32> {
    let profile = match args.precision {
        Some(prec) => PrimeProfile::with_precision(args.p, args.f, args.n, prec)?,
        None => PrimeProfile::new(args.p, args.f, args.n)?,
    };
    let ring = TowerRing::new(profile);
    let alpha = match args.alpha.as_str() {
        "pi" => ring.pi(),
        "zeta" => ring.zeta(),
        "frobenius" => ring
            .frobenius_uniformizer_system()?
            .pop()
            .ok_or_else(|| anyhow!("empty uniformizer system"))?,
        path => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading element file {path}"))?;
            let v: Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing element file {path}"))?;
            ring.from_json(&v)?
        }
    };
    let (tame, wild) = match &args.character {
        Some(spec) => {
            let (t, w) = spec
                .split_once(',')
                .ok_or_else(|| anyhow!("--char expects TAME,WILD, got {spec:?}"))?;
            let t: i64 = t
                .trim()
                .parse()
                .with_context(|| format!("bad tame exponent {t:?}"))?;
            let w: i64 = w
                .trim()
                .parse()
                .with_context(|| format!("bad wild exponent {w:?}"))?;
            (Some(t), Some(w))
        }
        None => (args.tame, args.wild),
    };
    let characters = match (tame, wild) {
        (None, None) => all_characters(args.p, args.n),
        (t, w) => vec![GaloisCharacter::new(
            args.p,
            args.n,
            t.unwrap_or(0),
            w.unwrap_or(0),
        )],
    };

    let half = rat(args.n as i64 + 1, 2);
    let mut violated = false;
    let mut undecided = false;
    let mut rows = Vec::with_capacity(characters.len());
    for chi in &characters {
        let r = resolvent(&ring, &alpha, chi)?;
        let v = ring.valuation_of(&r);
        // the (n+1)/2 bound applies to characters of full conductor
        let meets_bound = (chi.conductor_exponent() == args.n + 1).then(|| v.at_least(&half));
        match meets_bound {
            Some(Some(false)) => violated = true,
            Some(None) => undecided = true,
            _ => {}
        }
        let mut row = json!({
            "tame_exponent": chi.tame_exponent,
            "wild_exponent": chi.wild_exponent,
            "order": chi.order(),
            "conductor_exponent": chi.conductor_exponent(),
            "valuation": v.render(),
            "meets_bound": meets_bound.flatten(),
            // equality with (n+1)/2, only meaningful for full conductor
            "equality": meets_bound.is_some().then(|| v == Valuation::Finite(half.clone())),
        });
        if args.elements {
            row["resolvent"] = ring.to_json(&r);
        }
        rows.push(row);
    }
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "p": args.p,
        "n": args.n,
        "f": args.f,
        "precision": ring.precision(),
        "alpha": args.alpha,
        "alpha_valuation": ring.valuation_of(&alpha).render(),
        "bound": padic_resolvent::padic::format_rational(&half),
        "characters": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    let name = format!("resolvent-p{}-n{}-f{}.json", args.p, args.n, args.f);
    emit(args.out.as_deref(), &name, &text)?;
    Ok(if violated {
        1
    } else if undecided {
        3
    } else {
        0
    })
}

fn formula_eval(args: FormulaArgs) -> Result<i32> {
    let w = args.w.map(Sign::from_int).transpose()?;
    let mut input = FormulaInput {
        lambda_inv: args.lambda,
        mu_inv: args.mu,
        n0: args.n0,
        ..FormulaInput::new(args.p, args.n)
    };
    let (key, mut doc) = match args.which {
        Which::Delta => (
            "delta",
            json!({ "value": delta_valuation_rhs(args.p, args.n)?.render() }),
        ),
        Which::Lvalue => {
            if let Some(w) = w {
                input.epsilon = w;
            }
            (
                "lvalue",
                json!({ "value": lvalue_valuation_rhs(&input)?.render() }),
            )
        }
        Which::Bound => (
            "bound",
            json!({ "value": corollary_bound(args.p)?.render() }),
        ),
        Which::Parity => {
            let w = w.ok_or_else(|| anyhow!("--W is required for the parity rule"))?;
            input.epsilon = w;
            let (sign, vanishing) = root_number_parity(w, args.n)?;
            (
                "parity",
                json!({ "value": format!("{}/1", sign.as_int()), "vanishing": vanishing }),
            )
        }
    };
    let checks = identity_checks(key, &input)?;
    let ok = checks.values().all(|&b| b);
    doc["formula"] = json!(key);
    doc["p"] = json!(args.p);
    doc["n"] = json!(args.n);
    doc["identity_checks"] = json!(checks);
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(if ok { 0 } else { 1 })
}
