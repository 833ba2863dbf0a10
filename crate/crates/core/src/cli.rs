//! Command-line front end.
//!
//! Exit status: 0 on success or MATCH, 2 when any verified case is MISMATCH
//! or FORMULA_ANOMALY, 1 on operational failure.

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::codes::{defining_set, weight_distribution, CodeError, DEFAULT_BUDGET};
use crate::gf::FieldCtx;
use crate::report::{render_csv, render_text, CaseRecord, Envelope, Kind};
use crate::theory::{length_closed, verify, TheoryError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "codeweights",
    version,
    about = "Weight distributions of trace codes over F_{p^e}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Maximum q·n scalar operations per case.
    #[arg(long, env = "CODEWEIGHTS_BUDGET", default_value_t = DEFAULT_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Characteristic (odd prime).
    #[arg(short = 'p')]
    p: u32,
    /// Extension degree.
    #[arg(short = 'e')]
    e: usize,
    /// Modulus coefficients c0,c1,…,1 from the constant term up.
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build C_{D_i} and print its parameters and weight enumerator.
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        /// Cyclotomic class index (0 squares, 1 non-squares).
        #[arg(short = 'i', default_value_t = 0)]
        i: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the predicted table against enumeration.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(short = 'i', default_value_t = 0)]
        i: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Verify every case of a (p, e, i) grid.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [3u32, 5, 7])]
        primes: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5])]
        degrees: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0u8, 1])]
        classes: Vec<u8>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Describe the field F_{p^e} and its modulus.
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Gf(#[from] crate::gf::GfError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("{0}")]
    Usage(String),
}

fn field(args: &FieldArgs) -> Result<FieldCtx, CliError> {
    match &args.modulus {
        None => Ok(FieldCtx::new(args.p, args.e)?),
        Some(m) => {
            if m.len() != args.e + 1 {
                return Err(CliError::Usage(format!(
                    "modulus has degree {} but -e is {}",
                    m.len().saturating_sub(1),
                    args.e
                )));
            }
            Ok(FieldCtx::with_modulus(args.p, m.clone())?)
        }
    }
}

fn emit(env: &Envelope, kind: Kind, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", env.to_json()),
        Format::Csv => write!(out, "{}", render_csv(env, kind)),
        Format::Text => write!(out, "{}", render_text(env, kind)),
    }
}

fn status_code(env: &Envelope) -> i32 {
    let s = &env.summary;
    if s.mismatched + s.anomalous > 0 {
        EXIT_MISMATCH
    } else if s.errors > 0 {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

/// `q·n` for the case, from the closed-form length.
fn work_estimate(p: u32, e: usize, i: u8) -> Result<Option<u128>, TheoryError> {
    let n = length_closed(p, e, i)?;
    let q = BigInt::from(p).pow(e as u32);
    Ok((q * n).to_u128())
}

fn sweep_case(p: u32, e: usize, i: u8, budget: u64) -> CaseRecord {
    let start = Instant::now();
    let ctx = match FieldCtx::new(p, e) {
        Ok(ctx) => ctx,
        Err(err) => return CaseRecord::failed(p, e, Some(i), Vec::new(), err.to_string()),
    };
    let modulus = ctx.modulus().to_vec();
    match work_estimate(p, e, i) {
        Err(err) => return CaseRecord::failed(p, e, Some(i), modulus, err.to_string()),
        Ok(w) if w.is_none_or(|w| w > budget as u128) => {
            let required = w
                .map(|w| w.to_string())
                .unwrap_or_else(|| "overflow".into());
            return CaseRecord::skipped(
                p,
                e,
                i,
                modulus,
                format!("work estimate {required} exceeds the budget of {budget} operations"),
            );
        }
        Ok(_) => {}
    }
    let rec = match verify(&ctx, i, budget) {
        Ok(rep) => CaseRecord::verify(&rep),
        Err(TheoryError::Code(err @ CodeError::WorkBudgetExceeded { .. })) => {
            CaseRecord::skipped(p, e, i, modulus, err.to_string())
        }
        Err(TheoryError::Code(CodeError::Gf(err @ crate::gf::GfError::FieldTooLarge { .. }))) => {
            CaseRecord::skipped(p, e, i, modulus, err.to_string())
        }
        Err(err) => CaseRecord::failed(p, e, Some(i), modulus, err.to_string()),
    };
    rec.with_wall_time(start.elapsed())
}

/// Runs every `(p, e, i)` case in ascending order; output order is fixed
/// regardless of the thread count.
pub fn sweep(
    primes: &[u32],
    degrees: &[usize],
    classes: &[u8],
    budget: u64,
    jobs: Option<usize>,
) -> Envelope {
    let mut grid: Vec<(u32, usize, u8)> = primes
        .iter()
        .flat_map(|&p| {
            degrees
                .iter()
                .flat_map(move |&e| classes.iter().map(move |&i| (p, e, i)))
        })
        .collect();
    grid.sort_unstable();
    grid.dedup();
    let run = || -> Vec<CaseRecord> {
        grid.par_iter()
            .map(|&(p, e, i)| sweep_case(p, e, i, budget))
            .collect()
    };
    let cases = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    Envelope::new(cases)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let write_failed = |e: std::io::Error| CliError::Usage(format!("cannot write output: {e}"));
    match cli.command {
        Command::Construct {
            field: f,
            i,
            common,
        } => {
            let start = Instant::now();
            let ctx = field(&f)?;
            let set = defining_set(&ctx, i)?;
            let wd = weight_distribution(&set, common.budget)?;
            let env = Envelope::new(vec![
                CaseRecord::construct(&ctx, i, &wd).with_wall_time(start.elapsed())
            ]);
            emit(&env, Kind::Construct, common.format, out).map_err(write_failed)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            field: f,
            i,
            common,
        } => {
            let start = Instant::now();
            let ctx = field(&f)?;
            let rep = verify(&ctx, i, common.budget)?;
            let env = Envelope::new(vec![
                CaseRecord::verify(&rep).with_wall_time(start.elapsed())
            ]);
            emit(&env, Kind::Verify, common.format, out).map_err(write_failed)?;
            Ok(status_code(&env))
        }
        Command::Sweep {
            primes,
            degrees,
            classes,
            jobs,
            common,
        } => {
            let env = sweep(
                &primes,
                &degrees,
                &classes,
                common.budget,
                jobs.map(|j| j as usize),
            );
            emit(&env, Kind::Sweep, common.format, out).map_err(write_failed)?;
            Ok(status_code(&env))
        }
        Command::FieldInfo { field: f, format } => {
            let ctx = field(&f)?;
            let env = Envelope::new(vec![CaseRecord::field_info(&ctx)]);
            emit(&env, Kind::FieldInfo, format, out).map_err(write_failed)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Data goes to
/// `out`, diagnostics to `err`; the return value is the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_FAILURE
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("codeweights").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn construct_text() {
        let (code, out, _) = call(&["construct", "-p", "3", "-e", "3", "-i", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("[6,3,3] 1+6z^3+12z^4+6z^5+2z^6"));
        assert!(out.contains("griesmer-optimal-candidate"));
    }

    #[test]
    fn even_characteristic_is_rejected() {
        let (code, out, err) = call(&["construct", "-p", "2", "-e", "3"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("p must be an odd prime"));
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn modulus_degree_must_match() {
        let (code, _, err) = call(&["field-info", "-p", "3", "-e", "3", "--modulus", "1,1,1"]);
        assert_eq!(code, 1);
        assert!(err.contains("degree 2"));
    }

    #[test]
    fn tiny_budget_skips_everything() {
        let env = sweep(&[3, 5], &[2, 3], &[0, 1], 1, Some(2));
        assert_eq!(env.cases.len(), 8);
        assert!(env.cases.iter().all(|c| c.status == Status::Skipped));
        assert_eq!(status_code(&env), EXIT_OK);
    }

    #[test]
    fn out_of_scope_degree_is_an_error_record() {
        let env = sweep(&[3], &[1], &[0], DEFAULT_BUDGET, None);
        assert_eq!(env.cases[0].status, Status::Error);
        assert_eq!(status_code(&env), EXIT_FAILURE);
    }
}
