//! `iwasawa`: characteristic elements, Akashi series, Euler characteristics,
//! Stickelberger elements and the Selmer formula from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 precision exhaustion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use iwasawa_core::akashi::{akashi_series_with, dual_selmer_euler_characteristic, euler_characteristic, euler_from_akashi};
use iwasawa_core::io;
use iwasawa_core::lfun::{
    enumerate_places, euler_char_prediction, p_adic_l, stickelberger_element, stickelberger_series, FiniteField,
    FrobeniusAssignment, Place, PlaceTable, TwistMatrix,
};
use iwasawa_core::module::{char_element, full_homology_log_sizes, Route};
use iwasawa_core::padic::PadicContext;
use iwasawa_core::ring::TruncationProfile;
use iwasawa_core::selmer::{cross_check_with_l, evaluate, Corollary};
use iwasawa_core::verify::{run_verify_suite, SuiteConfig, DEFAULT_SEED};
use iwasawa_core::Error;

#[derive(Parser)]
#[command(name = "iwasawa", version, about = "Iwasawa modules, Akashi series and Stickelberger elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Finite,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Arithmetic,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorollaryArg {
    Zp,
    EllipticArith,
}

#[derive(clap::Args)]
struct SeriesArgs {
    /// Size of the constant field.
    #[arg(long)]
    q: u64,
    /// Largest place degree, and truncation degree in u.
    #[arg(long)]
    max_degree: u32,
    /// Place to exclude: `inf` or monic coefficients `c0,c1,...,1`; repeatable.
    #[arg(long = "exclude")]
    exclude: Vec<String>,
    #[arg(long, value_enum, default_value = "arithmetic")]
    rule: RuleArg,
    /// Frobenius assignment JSON, for `--rule file`.
    #[arg(long)]
    frobenius: Option<PathBuf>,
    /// Place table JSON; places are enumerated when absent.
    #[arg(long)]
    places: Option<PathBuf>,
    /// p-adic precision N.
    #[arg(long, env = "IWASAWA_PRECISION", default_value_t = 6)]
    precision: u32,
    /// Truncation degree M.
    #[arg(long, env = "IWASAWA_TRUNC", default_value_t = 8)]
    trunc: usize,
    /// Number of variables d.
    #[arg(long, default_value_t = 1)]
    vars: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic element of a presented module.
    Charel {
        #[arg(long)]
        module: PathBuf,
    },
    /// Akashi series of a presented module with respect to `ker(G -> Gamma_1)`.
    Akashi {
        #[arg(long)]
        module: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
    },
    /// Euler characteristic of a finite G-module, or of a presented module via
    /// its full-group homology.
    Euler {
        /// Finite G-module JSON.
        #[arg(long, conflicts_with = "presentation", required_unless_present = "presentation")]
        module: Option<PathBuf>,
        /// Module presentation JSON.
        #[arg(long)]
        presentation: Option<PathBuf>,
        /// First cohomological degree in the product.
        #[arg(long, default_value_t = 0)]
        from: usize,
    },
    /// Truncated Stickelberger series, or theta^+ with `--trace`.
    Stickelberger {
        #[command(flatten)]
        series: SeriesArgs,
        /// Trace of Frobenius of a constant ordinary elliptic curve.
        #[arg(long, allow_hyphen_values = true)]
        trace: Option<i64>,
    },
    /// p-adic L-element `theta^+ (theta^+)^#` and its Euler characteristic prediction.
    Lfunction {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, allow_hyphen_values = true)]
        trace: i64,
        /// Write the L-element as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the Selmer Euler characteristic formula.
    EulerFormula {
        #[arg(long)]
        datum: PathBuf,
        #[arg(long, value_enum)]
        corollary: Option<CorollaryArg>,
        /// L-element JSON to compare against.
        #[arg(long)]
        cross_check: Option<PathBuf>,
    },
    /// Seeded verification suite.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Instances per criterion (defaults per criterion when absent).
        #[arg(long)]
        count: Option<usize>,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
        /// Test mode: perturb every oracle so the suite must fail.
        #[arg(long)]
        corrupt_oracle: bool,
    },
}

enum Failure {
    Error(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = Result<Vec<String>, Failure>;

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T, Error>) -> Result<T, Error> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        Error::SchemaMismatch(m) => Error::SchemaMismatch(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn series_setup(
    a: &SeriesArgs,
) -> Result<(PlaceTable, Vec<Place>, FrobeniusAssignment, TruncationProfile), Error> {
    let p = FiniteField::new(a.q)?.p();
    let profile = TruncationProfile::new(PadicContext::new(p, a.precision)?, a.vars, a.trunc)?;
    let table = match &a.places {
        Some(path) => with_path(path, io::place_table_from_json(&read(path)?))?,
        None => enumerate_places(a.q, a.max_degree)?,
    };
    if table.q != a.q {
        return Err(Error::InvalidArgument(format!("place table is over F_{}, not F_{}", table.q, a.q)));
    }
    let frob = match (a.rule, &a.frobenius) {
        (RuleArg::Arithmetic, None) => FrobeniusAssignment::arithmetic(a.vars)?,
        (RuleArg::File, Some(path)) => with_path(path, io::frobenius_from_json(&read(path)?))?,
        (RuleArg::Arithmetic, Some(_)) => {
            return Err(Error::InvalidArgument("--frobenius needs --rule file".into()))
        }
        (RuleArg::File, None) => return Err(Error::InvalidArgument("--rule file needs --frobenius".into())),
    };
    let exclude = a.exclude.iter().map(|s| Place::parse(s)).collect::<Result<Vec<_>, _>>()?;
    Ok((table, exclude, frob, profile))
}

fn run(cmd: Command) -> CmdResult {
    let mut out = Vec::new();
    match cmd {
        Command::Charel { module } => {
            let m = with_path(&module, io::presentation_from_json(&read(&module)?))?;
            let ch = char_element(&m)?;
            out.push(format!("mu={}", ch.mu()));
            out.push(format!("lambda={}", ch.lambda()));
            out.push(format!("ch={ch}"));
            out.push(format!("canonical_precision={}", ch.canonical_precision()));
        }
        Command::Akashi { module, route } => {
            let m = with_path(&module, io::presentation_from_json(&read(&module)?))?;
            let route = match route {
                RouteArg::Auto => Route::Auto,
                RouteArg::Finite => Route::Finite,
            };
            let f = akashi_series_with(&m, route)?;
            out.push(format!("akashi={f}"));
            for (i, c) in f.factors.iter().enumerate() {
                out.push(format!("ch_H{i}={c}"));
            }
            match euler_from_akashi(&f) {
                Ok(chi) => out.push(format!("chi={chi}")),
                Err(Error::PrecisionExhausted(_)) => out.push("chi=undefined".into()),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Euler { module, presentation, from } => match (module, presentation) {
            (Some(path), None) => {
                let m = with_path(&path, io::finite_module_from_json(&read(&path)?))?;
                out.push(format!("cohomology_log_sizes={:?}", m.cohomology_sizes()?));
                out.push(format!("chi={}", euler_characteristic(&m, from)?));
            }
            (None, Some(path)) => {
                let m = with_path(&path, io::presentation_from_json(&read(&path)?))?;
                out.push(format!("homology_log_sizes={:?}", full_homology_log_sizes(&m)?));
                out.push(format!("chi={}", dual_selmer_euler_characteristic(&m)?));
            }
            _ => return Err(Error::InvalidArgument("give exactly one of --module or --presentation".into()).into()),
        },
        Command::Stickelberger { series, trace } => {
            let (table, s, frob, prof) = series_setup(&series)?;
            match trace {
                None => {
                    let theta = stickelberger_series(&table, &s, &frob, series.max_degree, prof)?;
                    for (n, c) in theta.coeffs.iter().enumerate() {
                        out.push(format!("u^{n}={c}"));
                    }
                }
                Some(a) => {
                    let twist = TwistMatrix::from_trace(prof.context(), a, series.q)?;
                    let th = stickelberger_element(&table, &s, &frob, &twist, series.max_degree, prof)?;
                    out.push(format!("unit_root={}", twist.entries()[0][0]));
                    out.push(format!("theta_plus={}", th.element));
                }
            }
        }
        Command::Lfunction { series, trace, output } => {
            let (table, s, frob, prof) = series_setup(&series)?;
            let twist = TwistMatrix::from_trace(prof.context(), trace, series.q)?;
            let th = stickelberger_element(&table, &s, &frob, &twist, series.max_degree, prof)?;
            let l = p_adic_l(&th.element);
            out.push(format!("theta_plus={}", th.element));
            out.push(format!("L={l}"));
            out.push(format!("prediction={}", euler_char_prediction(&l)?));
            if let Some(path) = output {
                std::fs::write(&path, io::element_to_json(&l))
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            }
        }
        Command::EulerFormula { datum, corollary, cross_check } => {
            let d = with_path(&datum, io::datum_from_json(&read(&datum)?))?;
            let mode = match corollary {
                None => Corollary::General,
                Some(CorollaryArg::Zp) => Corollary::Zp,
                Some(CorollaryArg::EllipticArith) => Corollary::EllipticArithmetic,
            };
            let eval = evaluate(&d, mode)?;
            out.extend(eval.lines());
            if let Some(path) = cross_check {
                let l = with_path(&path, io::element_from_json(&read(&path)?))?;
                let c = cross_check_with_l(&d, &l)?;
                out.push(format!("cross_check {c}"));
            }
        }
        Command::Verify { seed, count, criteria, corrupt_oracle } => {
            let mut config = SuiteConfig { seed, count, corrupt_oracle, ..SuiteConfig::default() };
            if !criteria.is_empty() {
                config.criteria = criteria;
            }
            let report = run_verify_suite(&config);
            out.extend(report.records.iter().map(|r| r.to_string()));
            out.push(format!(
                "summary total={} failed={} precision={}",
                report.records.len(),
                report.failures(),
                report.precision_issues()
            ));
            flush(&out);
            return match report.exit_code() {
                0 => Ok(Vec::new()),
                1 => Err(Failure::Verification),
                _ => Err(Failure::Error(Error::PrecisionExhausted(format!(
                    "{} instances ran out of precision",
                    report.precision_issues()
                )))),
            };
        }
    }
    Ok(out)
}

fn flush(lines: &[String]) {
    for l in lines {
        println!("{l}");
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted(_) => 3,
        _ => 2,
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
    match run(cli.command) {
        Ok(lines) => {
            flush(&lines);
            ExitCode::SUCCESS
        }
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
