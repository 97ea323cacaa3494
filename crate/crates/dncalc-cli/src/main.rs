use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dncalc_core::numth::{rat_from_str, rat_to_string, Rat};
use dncalc_core::series::FracSeries;
use dncalc_core::weyl::dn_build;
use dncalc_core::RatSeries;
use dncalc_core::{classify, curvature, modular, pfit};

use dncalc_cli::fixtures::{golden, GoldenFixture};
use dncalc_cli::formats::{MatrixJson, OperatorJson, SeriesJson};
use dncalc_cli::verify::{verify_all, verify_pair, PairReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
struct Global {
    /// Working precision: number of series terms.
    #[arg(long, global = true, default_value_t = 48)]
    terms: usize,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for fan-out work (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(name = "dncalc", about = "Exact determinantal differential operators and their modular verification", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check every golden row (or one) end to end.
    Verify {
        /// Verify all rows.
        #[arg(long, conflicts_with = "pair")]
        all: bool,
        /// Verify a single pair, written "N,d".
        #[arg(long, value_parser = parse_pair)]
        pair: Option<(u32, u32)>,
    },
    /// Recover the matrix and operator from the solution series.
    Recover {
        #[arg(long, value_parser = parse_pair)]
        pair: (u32, u32),
        /// Constant term of the uniformizer's reciprocal (default: built-in).
        #[arg(long)]
        c0: Option<String>,
        /// Instead of recovering, search for constant terms that admit a fit.
        #[arg(long)]
        auto_c0: bool,
    },
    /// Build the determinant operator of a matrix file.
    Dn {
        /// Path to a matrix JSON file.
        #[arg(long)]
        matrix: std::path::PathBuf,
    },
    /// Print a q-expansion.
    Qexp {
        #[arg(long, value_enum)]
        object: QObject,
        /// Pair "N,d" (for phi, t, tinv, b, i).
        #[arg(long, value_parser = parse_pair)]
        pair: Option<(u32, u32)>,
        /// Index for eta or the weight-one Eisenstein series.
        #[arg(long)]
        level: Option<u32>,
    },
    /// List the pairs surviving the modular-curve filters.
    Classify {
        #[arg(long, default_value_t = 200)]
        nmax: u64,
        #[arg(long, default_value_t = 6)]
        dmax: u64,
        /// Also list rejected pairs with their reason codes.
        #[arg(long)]
        rejected: bool,
    },
    /// p-curvature screening over a window of primes.
    Nilpotence {
        /// Use the golden operator of this pair.
        #[arg(long, value_parser = parse_pair, conflicts_with = "matrix")]
        pair: Option<(u32, u32)>,
        /// Or the determinant operator of a matrix file.
        #[arg(long)]
        matrix: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 5)]
        min_prime: u64,
        #[arg(long, default_value_t = 43)]
        max_prime: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QObject {
    /// Dedekind eta of the given level (fractional leading power).
    Eta,
    /// Weight-one Eisenstein series of the given level.
    E2,
    /// The weight-four Eisenstein series.
    E4,
    /// Holomorphic solution of the pair.
    Phi,
    /// Uniformizer T of the pair's level.
    T,
    /// Reciprocal uniformizer 1/T.
    Tinv,
    /// B = q/T.
    B,
    /// The normalized solution I.
    I,
}

fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| String::from("expected \"N,d\""))?;
    let n = a.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let d = b.trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok((n, d))
}

/// Usage errors exit 2 (matching the argument parser); computation errors
/// exit 1 and print the originating module's error name.
enum CliError {
    Usage(String),
    Compute(String),
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Compute(s)
    }
}

fn default_jobs(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn report_json(r: &PairReport) -> serde_json::Value {
    let checks: BTreeMap<&str, &str> = r
        .checks
        .iter()
        .map(|c| (c.name, if c.passed { "pass" } else { c.detail.as_str() }))
        .collect();
    json!({ "pair": [r.pair.0, r.pair.1], "passed": r.passed(), "checks": checks })
}

fn print_reports(reports: &[PairReport], format: Format) {
    match format {
        Format::Json => {
            let passed = reports.iter().filter(|r| r.passed()).count();
            let body = json!({
                "pairs": reports.iter().map(report_json).collect::<Vec<_>>(),
                "summary": format!("{passed}/{} pass", reports.len()),
            });
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
        }
        Format::Table => {
            for r in reports {
                let status = if r.passed() { "pass" } else { "FAIL" };
                let detail: Vec<String> = r
                    .checks
                    .iter()
                    .map(|c| format!("{}:{}", c.name, if c.passed { "ok" } else { "FAIL" }))
                    .collect();
                println!("({},{})  {status}  {}", r.pair.0, r.pair.1, detail.join(" "));
            }
        }
    }
}

fn find_fixture(fixtures: &[GoldenFixture], pair: (u32, u32)) -> Option<&GoldenFixture> {
    fixtures.iter().find(|f| f.pair == pair)
}

fn parse_c0(pair: (u32, u32), c0: &Option<String>) -> Result<Rat, String> {
    match c0 {
        Some(s) => rat_from_str(s).map_err(|e| format!("{e}")),
        None => modular::c0_for_level(pair.0).map_err(|e| format!("{e}")),
    }
}

fn print_rat_series(s: &RatSeries, format: Format) {
    let j = SeriesJson::from_series(s);
    print_series_json(&j, format);
}

fn print_frac_series(s: &FracSeries, format: Format) {
    let j = SeriesJson::from_frac(s);
    print_series_json(&j, format);
}

fn print_series_json(j: &SeriesJson, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(j).unwrap()),
        Format::Table => {
            let offset = rat_from_str(&j.offset).unwrap();
            for (i, c) in j.coeffs.iter().enumerate() {
                if c == "0" {
                    continue;
                }
                let e = rat_to_string(&(offset.clone() + Rat::from_integer(i.into())));
                println!("q^{e:<8} {c}");
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let terms = cli.global.terms;
    let format = cli.global.format;
    let fixtures = golden();
    match cli.cmd {
        Cmd::Verify { all, pair } => {
            let reports = if all || pair.is_none() {
                verify_all(&fixtures, terms, default_jobs(cli.global.jobs))
            } else {
                let pair = pair.unwrap();
                let f = find_fixture(&fixtures, pair)
                    .ok_or_else(|| format!("UnsupportedPair({},{})", pair.0, pair.1))?;
                vec![verify_pair(f, terms)]
            };
            print_reports(&reports, format);
            if reports.iter().all(|r| r.passed()) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Cmd::Recover { pair, c0, auto_c0 } => {
            if auto_c0 {
                let candidates =
                    pfit::auto_c0(pair.0, pair.1, terms).map_err(|e| format!("{e}"))?;
                let list: Vec<String> = candidates.iter().map(rat_to_string).collect();
                match format {
                    Format::Json => println!(
                        "{}",
                        serde_json::to_string_pretty(
                            &json!({ "pair": [pair.0, pair.1], "candidates": list })
                        )
                        .unwrap()
                    ),
                    Format::Table => {
                        for c in list {
                            println!("{c}");
                        }
                    }
                }
                return Ok(ExitCode::SUCCESS);
            }
            let c0 = parse_c0(pair, &c0)?;
            let (m, l) =
                pfit::recover(pair.0, pair.1, &c0, terms).map_err(|e| format!("{e}"))?;
            let mj = MatrixJson::from_matrix(&m);
            let oj = OperatorJson::from_op(&l);
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "pair": [pair.0, pair.1],
                        "c0": rat_to_string(&c0),
                        "matrix": mj,
                        "operator": oj,
                        "residuals": "all-zero",
                    }))
                    .unwrap()
                ),
                Format::Table => {
                    println!("pair      ({},{})", pair.0, pair.1);
                    println!("c0        {}", rat_to_string(&c0));
                    for (key, val) in &mj.a {
                        println!("a_{key}      {val}");
                    }
                    println!("operator  {}", oj.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Dn { matrix } => {
            let text = std::fs::read_to_string(&matrix).map_err(|e| e.to_string())?;
            let mj: MatrixJson = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let m = mj.to_matrix()?;
            let l = dn_build(&m).map_err(|e| format!("{e}"))?;
            let oj = OperatorJson::from_op(&l);
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "operator": oj.display(), "terms": oj.terms }))
                        .unwrap()
                ),
                Format::Table => println!("{}", oj.display()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Qexp {
            object,
            pair,
            level,
        } => {
            let need_pair = || pair.ok_or_else(|| CliError::Usage(String::from("this object needs --pair N,d")));
            let need_level =
                || level.ok_or_else(|| CliError::Usage(String::from("this object needs --level J")));
            match object {
                QObject::Eta => {
                    print_frac_series(&modular::eta_h(need_level()?, terms), format)
                }
                QObject::E2 => {
                    print_rat_series(&modular::eisenstein_e2(need_level()?, terms), format)
                }
                QObject::E4 => print_rat_series(&modular::e4(terms), format),
                QObject::Phi => {
                    let (n, d) = need_pair()?;
                    print_rat_series(
                        &modular::phi_q(n, d, terms).map_err(|e| format!("{e}"))?,
                        format,
                    )
                }
                QObject::T | QObject::Tinv | QObject::B => {
                    let (n, _) = need_pair()?;
                    let c0 = modular::c0_for_level(n).map_err(|e| format!("{e}"))?;
                    match object {
                        QObject::T => print_rat_series(
                            &modular::t_series(n, &c0, terms).map_err(|e| format!("{e}"))?,
                            format,
                        ),
                        QObject::Tinv => print_frac_series(
                            &modular::t_inv_series(n, &c0, terms).map_err(|e| format!("{e}"))?,
                            format,
                        ),
                        _ => print_rat_series(
                            &modular::b_series(n, &c0, terms).map_err(|e| format!("{e}"))?,
                            format,
                        ),
                    }
                }
                QObject::I => {
                    let (n, d) = need_pair()?;
                    let c0 = modular::c0_for_level(n).map_err(|e| format!("{e}"))?;
                    print_frac_series(
                        &modular::i_function(n, d, &c0, terms).map_err(|e| format!("{e}"))?,
                        format,
                    )
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Classify {
            nmax,
            dmax,
            rejected,
        } => {
            let pairs = classify::necessary_pairs(nmax, dmax);
            match format {
                Format::Json => {
                    let mut body = json!({
                        "pairs": pairs.iter().map(|&(n, d)| json!([n, d])).collect::<Vec<_>>(),
                    });
                    if rejected {
                        let mut reasons = BTreeMap::new();
                        for n in 1..=nmax {
                            for d in 1..=dmax {
                                if let Err(code) = classify::pass_filter(n, d) {
                                    reasons.insert(format!("{n},{d}"), code);
                                }
                            }
                        }
                        body["rejected"] = serde_json::to_value(reasons).unwrap();
                    }
                    println!("{}", serde_json::to_string_pretty(&body).unwrap());
                }
                Format::Table => {
                    for (n, d) in &pairs {
                        println!("({n},{d})");
                    }
                    if rejected {
                        for n in 1..=nmax {
                            for d in 1..=dmax {
                                if let Err(code) = classify::pass_filter(n, d) {
                                    println!("({n},{d})  rejected: {code}");
                                }
                            }
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Nilpotence {
            pair,
            matrix,
            min_prime,
            max_prime,
        } => {
            let l = match (pair, matrix) {
                (Some(p), None) => {
                    let f = find_fixture(&fixtures, p)
                        .ok_or_else(|| format!("UnsupportedPair({},{})", p.0, p.1))?;
                    f.operator.to_op()?
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
                    let mj: MatrixJson = serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    dn_build(&mj.to_matrix()?).map_err(|e| format!("{e}"))?
                }
                _ => return Err(CliError::Usage(String::from("give exactly one of --pair or --matrix"))),
            };
            let primes = curvature::primes_in(min_prime, max_prime);
            let report = curvature::nilpotence_report(&l, &primes);
            let verdict = if report.consistent() {
                "consistent-with-nilpotence"
            } else {
                "not-nilpotent"
            };
            let oj = OperatorJson::from_op(&l);
            match format {
                Format::Json => {
                    let primes: BTreeMap<String, String> = report
                        .per_prime
                        .iter()
                        .map(|(p, s)| (p.to_string(), s.to_string()))
                        .collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "operator": oj.display(),
                            "primes": primes,
                            "verdict": verdict,
                        }))
                        .unwrap()
                    );
                }
                Format::Table => {
                    for (p, s) in &report.per_prime {
                        println!("{p:<4} {s}");
                    }
                    println!("verdict: {verdict}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
