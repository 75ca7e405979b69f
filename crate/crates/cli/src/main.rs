//! `respdeg`: responsibility analysis over concurrent game structure files.
//!
//! Exit codes: 0 success; 1 when `--strict` is set and the analysis outcome
//! is undefined or empty; 2 usage errors; 3 unreadable or invalid models and
//! unresolvable query names.

mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use report::{
    build_report, coalition_names, distance_json, sequence_json, state_names,
    ResponsibilityReport,
};
use respdeg_core::oracle::{oracle_can_preclude, oracle_distance, DEFAULT_STRATEGY_BUDGET};
use respdeg_core::responsibility::{minimal_responsible_coalitions, responsible_coalitions};
use respdeg_core::{
    fdr, parse_affairs, parse_coalition, parse_model, sdr, validate_model, Cgs, Coalition,
    PreclusionSemantics, StateId, StateOfAffairs, ValidatedModel,
};

const EXIT_OK: u8 = 0;
const EXIT_STRICT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_MODEL: u8 = 3;

/// Report rows grow as 2^k; beyond this many agents a report is refused
/// unless --force is given.
const REPORT_AGENT_CAP: usize = 20;

#[derive(Parser)]
#[command(
    name = "respdeg",
    version,
    about = "Degrees of coalition responsibility in concurrent game structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and list every problem found
    Validate {
        /// Path to the model file
        #[arg(long)]
        model: PathBuf,
    },
    /// List the weakly responsible coalitions at a state
    Responsible {
        #[command(flatten)]
        query: QueryArgs,
        /// Print only the inclusion-minimal responsible coalitions
        #[arg(long)]
        minimal_only: bool,
    },
    /// Structural degree of responsibility of one coalition
    Sdr {
        #[command(flatten)]
        query: QueryArgs,
        /// Comma-separated agent names; empty string for the empty coalition
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        coalition: String,
    },
    /// Functional degree of responsibility of one coalition
    Fdr {
        #[command(flatten)]
        query: QueryArgs,
        /// Comma-separated agent names; empty string for the empty coalition
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        coalition: String,
    },
    /// Evaluate every non-empty coalition at a state
    Report {
        #[command(flatten)]
        query: QueryArgs,
        /// Worker threads for the per-coalition analyses
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..=512))]
        threads: u16,
        /// Allow reports over models with more than 20 agents
        #[arg(long)]
        force: bool,
    },
    /// Brute-force reference answers (slow; for debugging the engine)
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        query: QueryArgs,
        /// Comma-separated agent names; empty string for the empty coalition
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        coalition: String,
        /// Positional strategy budget
        #[arg(long, default_value_t = DEFAULT_STRATEGY_BUDGET)]
        budget: u64,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Path to the model file
    #[arg(long)]
    model: PathBuf,
    /// State name the query is evaluated at
    #[arg(long)]
    state: String,
    /// Comma-separated state names, or @label naming an affair of the model
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    affairs: String,
    #[arg(long, value_enum, default_value_t = SemanticsArg::Future)]
    semantics: SemanticsArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Decimal digits in rendered degree values
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(0..=18))]
    precision: u8,
    /// Exit with code 1 when the outcome is undefined or empty
    #[arg(long)]
    strict: bool,
    /// Print phase timings to stderr
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SemanticsArg {
    /// Plays must avoid the affair from the next step onward
    Future,
    /// Plays must avoid the affair from the current state onward
    IncludeInitial,
}

impl From<SemanticsArg> for PreclusionSemantics {
    fn from(arg: SemanticsArg) -> PreclusionSemantics {
        match arg {
            SemanticsArg::Future => PreclusionSemantics::FutureAvoidance,
            SemanticsArg::IncludeInitial => PreclusionSemantics::IncludeInitial,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}

fn run(argv: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders help/version as "errors" with a zero exit
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Command::Validate { model } => run_validate(&model),
        Command::Responsible {
            query,
            minimal_only,
        } => run_query(query, |ctx| run_responsible(ctx, minimal_only)),
        Command::Sdr { query, coalition } => run_query(query, |ctx| run_sdr(ctx, &coalition)),
        Command::Fdr { query, coalition } => run_query(query, |ctx| run_fdr(ctx, &coalition)),
        Command::Report {
            query,
            threads,
            force,
        } => run_query(query, |ctx| run_report(ctx, threads as usize, force)),
        Command::Oracle {
            query,
            coalition,
            budget,
        } => run_query(query, |ctx| run_oracle(ctx, &coalition, budget)),
    }
}

/// Everything a query subcommand needs after the model and the common
/// arguments have been resolved.
pub(crate) struct QueryContext {
    model: ValidatedModel,
    path: String,
    sha256: String,
    state: StateId,
    affairs: StateOfAffairs,
    semantics: PreclusionSemantics,
    format: OutputFormat,
    precision: usize,
    strict: bool,
    timings: bool,
}

impl QueryContext {
    fn cgs(&self) -> &Cgs {
        &self.model.cgs
    }
}

fn run_query(args: QueryArgs, body: impl FnOnce(&QueryContext) -> u8) -> u8 {
    let started = Instant::now();
    let (model, bytes) = match load_model(&args.model) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let state = match model.cgs.state_by_name(&args.state) {
        Some(q) => q,
        None => {
            eprintln!("error: unknown state name \"{}\"", args.state);
            return EXIT_MODEL;
        }
    };
    let affairs = match parse_affairs(&args.affairs, &model) {
        Ok(affairs) => affairs,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_MODEL;
        }
    };
    let ctx = QueryContext {
        path: args.model.display().to_string(),
        sha256: sha256_hex(&bytes),
        state,
        affairs,
        semantics: args.semantics.into(),
        format: args.format,
        precision: args.precision as usize,
        strict: args.strict,
        timings: args.timings,
        model,
    };
    if ctx.timings {
        eprintln!("timing: load {:.3}s", started.elapsed().as_secs_f64());
    }
    let analysis = Instant::now();
    let code = body(&ctx);
    if ctx.timings {
        eprintln!("timing: analysis {:.3}s", analysis.elapsed().as_secs_f64());
    }
    code
}

fn load_model(path: &Path) -> Result<(ValidatedModel, Vec<u8>), u8> {
    let shown = path.display();
    let bytes = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(err) => {
            eprintln!("error: cannot read {shown}: {err}");
            return Err(EXIT_MODEL);
        }
    };
    let text = match std::str::from_utf8(&bytes) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("{shown}: error: not valid UTF-8: {err}");
            return Err(EXIT_MODEL);
        }
    };
    let doc = match parse_model(text) {
        Ok(doc) => doc,
        Err(errors) => {
            for err in errors {
                eprintln!("{shown}: error: {err}");
            }
            return Err(EXIT_MODEL);
        }
    };
    match validate_model(&doc) {
        Ok(model) => Ok((model, bytes)),
        Err(errors) => {
            for err in errors {
                eprintln!("{shown}: error: {err}");
            }
            Err(EXIT_MODEL)
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn run_validate(path: &Path) -> u8 {
    let (model, _) = match load_model(path) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let cgs = &model.cgs;
    let transitions: usize = cgs.states().map(|q| cgs.num_profiles(q)).sum();
    println!(
        "ok: {} agents, {} states, {} actions, {} transitions, {} affairs",
        cgs.num_agents(),
        cgs.num_states(),
        cgs.num_actions(),
        transitions,
        model.affairs.len()
    );
    EXIT_OK
}

fn parse_query_coalition(ctx: &QueryContext, text: &str) -> Result<Coalition, u8> {
    parse_coalition(text, ctx.cgs()).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_MODEL
    })
}

fn strict_code(ctx: &QueryContext, degenerate: bool) -> u8 {
    if degenerate && ctx.strict {
        EXIT_STRICT
    } else {
        EXIT_OK
    }
}

fn run_responsible(ctx: &QueryContext, minimal_only: bool) -> u8 {
    let cgs = ctx.cgs();
    let set = responsible_coalitions(cgs, ctx.state, &ctx.affairs, ctx.semantics);
    let minimal = minimal_responsible_coalitions(&set);
    let listed: &[Coalition] = if minimal_only {
        &minimal
    } else {
        set.coalitions()
    };
    match ctx.format {
        OutputFormat::Table => {
            for &c in listed {
                println!("{}", cgs.coalition_string(c));
            }
        }
        OutputFormat::Json => {
            let value = json!({
                "state": cgs.state_name(ctx.state),
                "affairs": state_names(cgs, &ctx.affairs),
                "semantics": ctx.semantics.to_string(),
                "coalitions": listed
                    .iter()
                    .map(|&c| json!(coalition_names(cgs, c)))
                    .collect::<Vec<Value>>(),
                "minimal": minimal
                    .iter()
                    .map(|&c| json!(coalition_names(cgs, c)))
                    .collect::<Vec<Value>>(),
            });
            print_json(&value);
        }
        OutputFormat::Csv => {
            println!("coalition");
            for &c in listed {
                println!("\"{}\"", cgs.coalition_string(c));
            }
        }
    }
    strict_code(ctx, set.is_empty())
}

fn run_sdr(ctx: &QueryContext, coalition: &str) -> u8 {
    let cgs = ctx.cgs();
    let query = match parse_query_coalition(ctx, coalition) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = sdr(cgs, ctx.state, &ctx.affairs, query, ctx.semantics);
    match ctx.format {
        OutputFormat::Table => match result.value {
            Some(v) => println!("{} ({})", v.fraction(), v.decimal(ctx.precision)),
            None => println!("undefined"),
        },
        OutputFormat::Json => {
            let value = json!({
                "coalition": coalition_names(cgs, query),
                "sdr": match result.value {
                    Some(v) => Value::String(v.fraction()),
                    None => Value::String("undefined".to_string()),
                },
                "sdr_decimal": match result.value {
                    Some(v) => Value::String(v.decimal(ctx.precision)),
                    None => Value::Null,
                },
                "sdr_witness": match result.witness {
                    Some(w) => json!(coalition_names(cgs, w)),
                    None => Value::Null,
                },
            });
            print_json(&value);
        }
        OutputFormat::Csv => {
            let cell = match result.value {
                Some(v) => v.fraction(),
                None => "undefined".to_string(),
            };
            print!("coalition,sdr\n\"{}\",{}\n", cgs.coalition_string(query), cell);
        }
    }
    strict_code(ctx, result.value.is_none())
}

fn run_fdr(ctx: &QueryContext, coalition: &str) -> u8 {
    let cgs = ctx.cgs();
    let query = match parse_query_coalition(ctx, coalition) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = fdr(cgs, ctx.state, &ctx.affairs, query, ctx.semantics);
    match ctx.format {
        OutputFormat::Table => println!(
            "{} ({})",
            result.value.fraction(),
            result.value.decimal(ctx.precision)
        ),
        OutputFormat::Json => {
            let value = json!({
                "coalition": coalition_names(cgs, query),
                "fdr": result.value.fraction(),
                "fdr_decimal": result.value.decimal(ctx.precision),
                "distance": distance_json(result.distance),
                "fdr_witness": sequence_json(cgs, result.witness.as_ref()),
            });
            print_json(&value);
        }
        OutputFormat::Csv => print!(
            "coalition,fdr,distance\n\"{}\",{},{}\n",
            cgs.coalition_string(query),
            result.value.fraction(),
            result.distance
        ),
    }
    strict_code(ctx, !result.distance.is_finite())
}

fn run_report(ctx: &QueryContext, threads: usize, force: bool) -> u8 {
    let cgs = ctx.cgs();
    if cgs.num_agents() > REPORT_AGENT_CAP && !force {
        eprintln!(
            "error: {} agents make 2^{} - 1 report rows; pass --force to proceed",
            cgs.num_agents(),
            cgs.num_agents()
        );
        return EXIT_MODEL;
    }
    let report: ResponsibilityReport = build_report(ctx, threads);
    print!("{}", report.render(cgs, ctx.format));
    strict_code(ctx, report.is_degenerate())
}

fn run_oracle(ctx: &QueryContext, coalition: &str, budget: u64) -> u8 {
    let cgs = ctx.cgs();
    let query = match parse_query_coalition(ctx, coalition) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let responsible =
        match oracle_can_preclude(cgs, query, ctx.state, &ctx.affairs, ctx.semantics, budget) {
            Ok(answer) => answer,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_MODEL;
            }
        };
    let distance =
        match oracle_distance(cgs, query, ctx.state, &ctx.affairs, ctx.semantics, budget) {
            Ok(distance) => distance,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_MODEL;
            }
        };
    println!("responsible: {responsible}");
    println!("distance: {distance}");
    strict_code(ctx, !responsible && !distance.is_finite())
}

fn print_json(value: &Value) {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    print!("{text}");
}
