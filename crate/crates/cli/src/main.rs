use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use focalforge::focal::Side;
use focalforge::isofun::Domain;
use focalforge::loci::FamilySpec;
use focalforge::report::{self, Report, DEFAULT_PAIRS, DEFAULT_SAMPLES};
use focalforge::rng::DEFAULT_SEED;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "focalforge",
    version,
    about = "Verify normal scalar curvature identities on OT-FKM focal submanifolds"
)]
struct Cli {
    /// Cap on worker threads; overrides FOCALFORGE_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Octonion property suites.
    VerifyAlgebra {
        #[arg(long, default_value_t = DEFAULT_PAIRS)]
        pairs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        /// Run against a multiplication table with one flipped sign.
        #[arg(long, hide = true)]
        corrupt_table: bool,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the curvature loci of one family on one side.
    Audit {
        /// `m,k[,definite|indefinite]`.
        #[arg(long)]
        family: String,
        #[arg(long, value_parser = ["plus", "minus"])]
        side: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        /// Directory for report.json and the table CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the Clifford system matrices.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Identities of the isoparametric function on the (8,7) focal submanifold.
    Isofun {
        #[arg(long, default_value = "indefinite", value_parser = ["indefinite", "definite"])]
        variant: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Comma-separated levels in (-1, 1).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = report::DEFAULT_LEVELS)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge audit reports into table1.csv and table2.csv.
    Report {
        /// Directory holding audit JSON reports.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit every family on both sides and write reports and tables.
    Pipeline {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn configure_threads(cli: Option<usize>) -> Result<()> {
    let env = std::env::var("FOCALFORGE_THREADS").ok();
    let n = match (cli, env) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(v.trim().parse::<usize>().with_context(|| format!("FOCALFORGE_THREADS = '{v}'"))?),
        (None, None) => None,
    };
    if let Some(n) = n.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn print_rows(rep: &Report) {
    for r in &rep.rows {
        println!(
            "{:<12} {:<10} {:<6} {:<30} residual {:>12.4e}  tol {:>8.1e}  n {:>4}  {}",
            r.verdict, r.family, r.side, r.locus, r.max_residual, r.tolerance, r.samples, r.claim
        );
    }
    for e in &rep.errors {
        println!("error    {e}");
    }
}

fn finish(rep: &Report) -> ExitCode {
    print_rows(rep);
    match rep.first_failure() {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("verification failed: {f}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn write_report(rep: &Report, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        rep.write_json(p).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

enum Outcome {
    Done(ExitCode),
    Usage(anyhow::Error),
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Err(e) = configure_threads(cli.threads) {
        return Ok(Outcome::Usage(e));
    }
    match cli.command {
        Command::VerifyAlgebra { pairs, seed, corrupt_table, out } => {
            let rep = report::verify_algebra(pairs, seed, corrupt_table);
            write_report(&rep, out.as_deref())?;
            Ok(Outcome::Done(finish(&rep)))
        }
        Command::Audit { family, side, samples, seed, out, dump_matrices } => {
            let side: Side = side.parse()?;
            let spec = match FamilySpec::parse(&family, side) {
                Ok(s) => s,
                Err(e) => return Ok(Outcome::Usage(e.into())),
            };
            let rep = report::audit(&spec, samples, seed)?;
            if let Some(dir) = &out {
                rep.write_json(&dir.join("report.json"))?;
                report::write_tables(&rep.rows, dir)?;
                if dump_matrices {
                    let sys = spec.build()?.sys;
                    std::fs::write(dir.join("matrices.json"), serde_json::to_string(&sys.to_row_major())?)?;
                }
            }
            Ok(Outcome::Done(finish(&rep)))
        }
        Command::Isofun { variant, samples, levels, seed, out } => {
            if let Some(c) = levels.iter().find(|c| c.is_nan() || c.abs() >= 1.0) {
                return Ok(Outcome::Usage(anyhow::anyhow!("level {c} is outside (-1, 1)")));
            }
            let domain: Domain = variant.parse()?;
            let rep = report::isofun_report(domain, samples, &levels, seed)?;
            write_report(&rep, out.as_deref())?;
            Ok(Outcome::Done(finish(&rep)))
        }
        Command::Report { input, out } => match report::merge_reports(&input, &out) {
            Ok((t1, t2)) => {
                println!("wrote {} and {}", t1.display(), t2.display());
                Ok(Outcome::Done(ExitCode::SUCCESS))
            }
            Err(e) => Ok(Outcome::Usage(e.into())),
        },
        Command::Pipeline { samples, seed, out } => {
            let rep = report::pipeline(samples, seed, &out)?;
            Ok(Outcome::Done(finish(&rep)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done(code)) => code,
        Ok(Outcome::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
