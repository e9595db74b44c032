//! `gajd`: implication testing for generalized acyclic join dependencies.
//!
//! Exit codes: 0 success, 1 `--expect` mismatch or failed soundness check,
//! 2 parse or usage error, 3 chase row limit exceeded.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::RangedU64ValueParser;
use clap::{Parser, Subcommand, ValueEnum};
use gajd::chase::{implies, ChaseError, ChaseOptions, Verdict, DEFAULT_MAX_ROWS};
use gajd::oracle::{check_soundness, search_counterexample, OracleConfig, Status};
use gajd::problem::{parse, ProblemFile, Query};
use gajd::tableau::build_tr;
use serde_json::{json, Value};

const ROW_LIMIT_VAR: &str = "GAJD_CHASE_MAX_ROWS";

#[derive(Parser)]
#[command(
    name = "gajd",
    version,
    about = "Chase-based implication testing for GAJDs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide each query with the chase.
    Implies {
        /// Print every chase step.
        #[arg(long)]
        trace: bool,
        /// Print the factorization when the implication holds.
        #[arg(long)]
        factorize: bool,
        /// Print the initial tableau plus the rows that derive the
        /// all-distinguished row.
        #[arg(long)]
        proof: bool,
        /// Print the chased tableau.
        #[arg(long = "final")]
        final_tableau: bool,
        /// Exit with status 1 unless every verdict matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        /// Emit a JSON document instead of text.
        #[arg(long)]
        json: bool,
        file: PathBuf,
    },
    /// Cross-check each verdict numerically.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = OracleConfig::DEFAULT_TRIALS,
              value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
        trials: usize,
        file: PathBuf,
    },
    /// Print the tableau of a query's target.
    Tableau {
        /// 1-based query index.
        #[arg(long, default_value_t = 1)]
        query: usize,
        file: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    Yes,
    No,
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Implies {
            trace,
            factorize,
            proof,
            final_tableau,
            expect,
            json,
            file,
        } => cmd_implies(
            &file,
            &ImpliesFlags {
                trace,
                factorize,
                proof,
                final_tableau,
                expect,
                json,
            },
        ),
        Command::Verify { seed, trials, file } => cmd_verify(&file, seed, trials),
        Command::Tableau { query, file } => cmd_tableau(&file, query),
    };
    match result {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &PathBuf) -> Result<ProblemFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn chase_options() -> Result<ChaseOptions, Failure> {
    let max_rows = match std::env::var(ROW_LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Failure::usage(format!(
                    "{ROW_LIMIT_VAR} must be a positive integer, got {v:?}"
                ))
            })?,
        Err(_) => DEFAULT_MAX_ROWS,
    };
    Ok(ChaseOptions {
        max_rows,
        ..ChaseOptions::default()
    })
}

fn decide(file: &ProblemFile, q: &Query, opts: ChaseOptions) -> Result<Verdict, Failure> {
    implies(&file.given(q), &q.target, opts).map_err(|e| match e {
        ChaseError::RowLimit { limit, .. } => Failure {
            code: 3,
            message: format!(
                "chase exceeded {limit} rows (set {ROW_LIMIT_VAR} to raise the limit)"
            ),
        },
        other => Failure::usage(other.to_string()),
    })
}

fn query_header(i: usize, q: &Query) -> String {
    let mut s = format!("query {}: {}", i + 1, q.target);
    if !q.given.is_empty() {
        let _ = write!(s, " given {}", q.given.join(" "));
    }
    s
}

struct ImpliesFlags {
    trace: bool,
    factorize: bool,
    proof: bool,
    final_tableau: bool,
    expect: Option<Expect>,
    json: bool,
}

fn cmd_implies(path: &PathBuf, flags: &ImpliesFlags) -> Result<(String, u8), Failure> {
    let file = load(path)?;
    let opts = chase_options()?;
    let mut out = String::new();
    let mut records = Vec::new();
    let mut mismatch = false;
    for (i, q) in file.queries.iter().enumerate() {
        let v = decide(&file, q, opts)?;
        if let Some(e) = flags.expect {
            mismatch |= v.holds != (e == Expect::Yes);
        }
        if flags.json {
            records.push(verdict_json(i, q, &v));
            continue;
        }
        let _ = writeln!(out, "{}", query_header(i, q));
        if flags.trace {
            out.push_str(&v.trace.render(true));
            if let Some(row) = v.distinguished_row {
                let steps: Vec<String> = v
                    .trace
                    .derivation_of(row)
                    .iter()
                    .map(|s| (s + 1).to_string())
                    .collect();
                let _ = writeln!(out, "derivation: steps [{}]", steps.join(","));
            }
        }
        if flags.final_tableau {
            out.push_str(&v.trace.final_tableau.to_string());
        }
        if flags.proof {
            if let Some(row) = v.distinguished_row {
                out.push_str(&v.trace.proof_tableau(row).to_string());
            }
        }
        out.push_str(&v.summary(flags.factorize));
    }
    if flags.json {
        out = serde_json::to_string_pretty(&json!({ "queries": records })).expect("serializable")
            + "\n";
    }
    Ok((out, u8::from(mismatch)))
}

fn verdict_json(i: usize, q: &Query, v: &Verdict) -> Value {
    let steps: Vec<Value> = v
        .trace
        .steps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            json!({
                "step": k + 1,
                "rule": s.rule_name,
                "rows": s.selected.iter().map(|r| r + 1).collect::<Vec<_>>(),
                "row": s.row.pattern_string(),
                "expr": s.row.expr().to_string(),
                "rewrites": s.rewrites.iter().map(|log| {
                    log.iter().map(|r| r.to_string()).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            })
        })
        .collect();
    let derivation: Vec<usize> = v
        .distinguished_row
        .map(|r| v.trace.derivation_of(r).iter().map(|s| s + 1).collect())
        .unwrap_or_default();
    json!({
        "query": i + 1,
        "target": q.target.to_string(),
        "given": q.given,
        "implies": v.holds,
        "factorization": v.factorization.as_ref().map(|f| f.to_string()),
        "steps": steps,
        "derivation": derivation,
        "final_rows": v.trace.final_tableau.rows().iter().map(|r| r.pattern_string()).collect::<Vec<_>>(),
        "duplicate_derivations": v.trace.already_present,
    })
}

fn cmd_verify(path: &PathBuf, seed: u64, trials: usize) -> Result<(String, u8), Failure> {
    let file = load(path)?;
    let opts = chase_options()?;
    let domains = file.domain_spec();
    let mut cfg = OracleConfig::new(domains.clone(), seed);
    cfg.trials = trials;
    let mut out = String::new();
    let mut failed = false;
    for (i, q) in file.queries.iter().enumerate() {
        let v = decide(&file, q, opts)?;
        let _ = writeln!(out, "{}", query_header(i, q));
        out.push_str(&v.summary(false));
        let constraints: Vec<_> = file.given(q).into_iter().map(|(_, g)| g).collect();
        if v.holds {
            let r = check_soundness(&constraints, &q.target, &cfg)
                .map_err(|e| Failure::usage(e.to_string()))?;
            failed |= r.status == Status::Fail;
            out.push_str(&r.to_string());
        } else {
            match search_counterexample(&constraints, &q.target, &cfg)
                .map_err(|e| Failure::usage(e.to_string()))?
            {
                Some(cx) => out.push_str(&cx.render(&domains)),
                None => {
                    let _ = writeln!(
                        out,
                        "counterexample: not found in {trials} trials (inconclusive)"
                    );
                }
            }
        }
    }
    Ok((out, u8::from(failed)))
}

fn cmd_tableau(path: &PathBuf, query: usize) -> Result<(String, u8), Failure> {
    let file = load(path)?;
    let n = file.queries.len();
    let q = query
        .checked_sub(1)
        .and_then(|i| file.queries.get(i))
        .ok_or_else(|| Failure::usage(format!("query {query} out of range (file has {n})")))?;
    Ok((build_tr(&q.target).to_string(), 0))
}
