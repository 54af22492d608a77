//! `dqbfloc`: reads a closed prenex DQBF, localizes its quantifiers,
//! eliminates variables locally, and writes back a simplified prenex DQBF.
//!
//! Exit codes: 10 decided satisfiable, 20 decided unsatisfiable, 0 written
//! but undecided, 1 parse or configuration error, 2 oracle budget exceeded
//! under `--verify`, 3 internal soundness violation.

use dqbfloc::selftest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use dqbfloc_core::io::{parse_dqcir, parse_dqdimacs, tseitin_encode, write_dqcir, write_dqdimacs};
use dqbfloc_core::localize::SplitHeuristic;
use dqbfloc_core::oracle::{equisat, universe_size, OracleConfig, OracleError};
use dqbfloc_core::pipeline::{run, PipelineConfig};
use dqbfloc_core::wellformed::well_formed;
use dqbfloc_core::PrenexDqbf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dqdimacs,
    Dqcir,
}

#[derive(Debug, Parser)]
#[command(
    name = "dqbfloc",
    about = "DQBF preprocessor based on quantifier localization",
    disable_help_subcommand = true
)]
struct Args {
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write the simplified formula here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Check input and output for equisatisfiability with the built-in
    /// oracle, with this candidate budget.
    #[arg(long, value_name = "BUDGET")]
    verify: Option<u128>,

    /// Print a one-line JSON stats record to stdout.
    #[arg(long)]
    stats: bool,

    /// Elimination may not grow the graph beyond this factor.
    #[arg(long, value_name = "F", default_value_t = 2.0)]
    growth_limit: f64,

    /// Print one line per push, split, elimination, and refusal to stderr.
    #[arg(long)]
    trace_localize: bool,

    /// Incoming-edge split heuristic.
    #[arg(long, value_enum, default_value_t = SplitArg::Most)]
    split_heuristic: SplitArg,

    /// Write the rewrite receipts as JSON lines to this file.
    #[arg(long, value_name = "FILE")]
    audit_log: Option<PathBuf>,

    /// Run the built-in checks instead of processing a file. An optional
    /// `--selftest=SUBSTRING` filters checks by name.
    #[arg(long, value_name = "FILTER", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    selftest: Option<String>,

    /// Input file.
    input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Most,
    Fewest,
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            // keep clap's message but force the documented exit code
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    if let Some(filter) = &args.selftest {
        return run_selftest_cmd(filter);
    }

    let Some(input_path) = args.input.as_deref() else {
        return fail(1, "no input file (or use --selftest)");
    };
    let format = match args.format.or_else(|| detect_format(input_path)) {
        Some(f) => f,
        None => {
            return fail(
                1,
                "cannot infer the format from the extension; pass --format",
            )
        }
    };
    let text = match std::fs::read_to_string(input_path) {
        Ok(t) => t,
        Err(e) => return fail(1, &format!("cannot read {}: {}", input_path.display(), e)),
    };
    let parsed: Result<PrenexDqbf, String> = match format {
        Format::Dqdimacs => parse_dqdimacs(&text).map_err(|e| e.to_string()),
        Format::Dqcir => parse_dqcir(&text).map_err(|e| e.to_string()),
    };
    let input = match parsed {
        Ok(p) => p,
        Err(e) => return fail(1, &e),
    };
    if let Err(v) = well_formed(&input.to_dqbf()) {
        return fail(1, &format!("input is not well-formed: {:?}", v));
    }

    let cfg = PipelineConfig {
        localize: dqbfloc_core::localize::LocalizeConfig {
            split: match args.split_heuristic {
                SplitArg::Most => SplitHeuristic::MostIncoming,
                SplitArg::Fewest => SplitHeuristic::FewestIncoming,
            },
        },
        elim: dqbfloc_core::eliminate::ElimConfig {
            growth_limit: args.growth_limit,
        },
        capture_steps: false,
    };
    let started = Instant::now();
    let result = run(&input, &cfg);
    let wall_ms = started.elapsed().as_millis();

    if args.trace_localize {
        for ev in &result.log.events {
            eprintln!("{}", ev.trace_line());
        }
    }
    if let Some(path) = &args.audit_log {
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(1, &format!("cannot create {}: {}", path.display(), e)),
        };
        if let Err(e) = result.log.write_jsonl(file) {
            return fail(1, &format!("cannot write audit log: {}", e));
        }
    }

    if let Err(v) = well_formed(&result.output.to_dqbf()) {
        return fail(3, &format!("internal error: output is ill-formed: {:?}", v));
    }

    if let Some(budget) = args.verify {
        let oc = OracleConfig { budget };
        match equisat(&input.to_dqbf(), &result.output.to_dqbf(), &oc) {
            Ok(true) => {}
            Ok(false) => {
                return fail(3, "internal error: output is not equisatisfiable with the input");
            }
            Err(OracleError::BudgetExceeded { universe, budget }) => {
                let input_size = universe_size(&input.to_dqbf());
                eprintln!(
                    "verification budget exceeded: candidate universe {} > {} (input universe: {})",
                    universe,
                    budget,
                    input_size.map_or_else(|| "overflow".into(), |u| u.to_string())
                );
                return ExitCode::from(2);
            }
            Err(e) => return fail(3, &format!("oracle failure: {}", e)),
        }
    }

    let rendered = match format {
        Format::Dqdimacs => {
            let cnf_ready = write_dqdimacs(&result.output).ok();
            match cnf_ready {
                Some(t) => t,
                None => match write_dqdimacs(&tseitin_encode(&result.output)) {
                    Ok(t) => t,
                    Err(e) => return fail(3, &format!("internal error: {}", e)),
                },
            }
        }
        Format::Dqcir => write_dqcir(&result.output),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                return fail(1, &format!("cannot write {}: {}", path.display(), e));
            }
        }
        None => print!("{}", rendered),
    }

    if args.stats {
        let mut line = String::new();
        let _ = write!(
            line,
            "{{\"pushed\":{},\"local_eliminations\":{},\"variables_eliminated\":{},\"nodes_before\":{},\"nodes_after\":{},\"wall_ms\":{}}}",
            result.stats.pushed,
            result.stats.local_eliminations,
            result.stats.variables_eliminated,
            result.stats.nodes_before,
            result.stats.nodes_after,
            wall_ms
        );
        println!("{}", line);
    }

    match result.decided {
        Some(true) => {
            println!("s cnf SAT");
            ExitCode::from(10)
        }
        Some(false) => {
            println!("s cnf UNSAT");
            ExitCode::from(20)
        }
        None => ExitCode::SUCCESS,
    }
}

fn detect_format(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()? {
        "dqdimacs" => Some(Format::Dqdimacs),
        "dqcir" => Some(Format::Dqcir),
        _ => None,
    }
}

fn run_selftest_cmd(filter: &str) -> ExitCode {
    let filter = if filter.is_empty() { None } else { Some(filter) };
    let report = selftest::run_selftest(filter, selftest::Sabotage::None);
    for r in &report.results {
        println!(
            "{} {} ({})",
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    if report.results.is_empty() {
        eprintln!(
            "warning: the filter matched no checks ({} filtered out); vacuous pass",
            report.filtered_out
        );
        return ExitCode::SUCCESS;
    }
    if report.all_passed() {
        println!("selftest: {} checks passed", report.results.len());
        ExitCode::SUCCESS
    } else {
        let failed = report.results.iter().filter(|r| !r.passed).count();
        println!("selftest: {} of {} checks FAILED", failed, report.results.len());
        ExitCode::from(1)
    }
}
