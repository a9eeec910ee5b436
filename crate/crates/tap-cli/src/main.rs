//! Command-line front end: check matchings, run solvers, build reductions,
//! and generate test inputs. Exit codes are part of the contract:
//!
//! * `check`: 0 stable, 1 unstable, 2 input error
//! * `solve`: 0 matching found, 1 provably none, 2 input/precondition error,
//!   3 inconclusive (budget exhausted)
//! * `minbp`: 0 optimal, 2 input error, 3 inconclusive
//! * `reduce`: 0 written (witness verified stable when given), 2 input error
//! * `gen`: 0 written, 2 parameters out of range
//!
//! Primary documents go to stdout or `--output`; diagnostics and timing go
//! to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tap::gen::{random_instance, GenParams, MasterLists};
use tap::model::{validate_matching, Instance, Matching};
use tap::reductions::{
    parse_dimacs, random_223, reduce_to_tap, reduce_to_tapss, serialize_dimacs,
    tap_matching_from_assignment, tapss_matching_from_assignment, ReductionBundle,
};
use tap::solvers::{MinBpOutcome, SearchStatus};
use tap::{
    dual_serial_dictatorship, enumerate_stable, is_stable, min_blocking_pairs, parse_instance,
    parse_matching, serial_dictatorship, serialize_instance, serialize_matching, Mode,
};

const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "tap", version, about = "Teachers assignment problem toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a matching for validity and stability.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Find a stable matching with a dictatorship algorithm or by search.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Search-node budget for the exhaustive algorithm.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Find a matching with the minimum number of blocking pairs.
    Minbp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compile a (2,2)-E3-SAT formula into a market instance.
    Reduce {
        /// DIMACS file; every clause must have exactly three literals and
        /// every variable exactly two occurrences of each polarity.
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, value_enum)]
        variant: Variant,
        /// JSON array of booleans, one per variable. When given (and
        /// satisfying), the witness matching is written and verified.
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Instance file to write; the sidecar goes next to it as
        /// `<stem>.bundle.json`, the witness as `<stem>.witness.json`.
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate random instances or formulas, deterministic under --seed.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Sd,
    Dsd,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Tap,
    Tapss,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    TapRandom,
    Formula,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    Linear,
    SubjectSpecific,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMaster {
    Applicants,
    Schools,
    BySubject,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Applicant count for tap-random (at most 100).
    #[arg(long, default_value_t = 6)]
    applicants: usize,
    /// School count for tap-random (at most 100).
    #[arg(long, default_value_t = 4)]
    schools: usize,
    /// Subject count for tap-random (2 to 10).
    #[arg(long, default_value_t = 3)]
    subjects: usize,
    /// Longest preference list for tap-random.
    #[arg(long, default_value_t = 3)]
    max_prefs: usize,
    /// Largest partial capacity for tap-random.
    #[arg(long, default_value_t = 2)]
    max_capacity: u32,
    #[arg(long, value_enum, default_value_t = GenMode::Linear)]
    mode: GenMode,
    /// Derive all preference lists from random master lists.
    #[arg(long, value_enum)]
    master_list: Option<GenMaster>,
    /// Variable count for formula generation (positive multiple of 3, at
    /// most 30).
    #[arg(long, default_value_t = 3)]
    vars: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Check { instance, matching, output } => {
            cmd_check(&instance, &matching, output.as_deref())
        }
        Command::Solve { instance, algorithm, budget, output } => {
            cmd_solve(&instance, algorithm, budget, output.as_deref())
        }
        Command::Minbp { instance, budget, output } => {
            cmd_minbp(&instance, budget, output.as_deref())
        }
        Command::Reduce { formula, variant, assignment, output } => {
            cmd_reduce(&formula, variant, assignment.as_deref(), &output)
        }
        Command::Gen(args) => cmd_gen(&args),
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing instance {}", path.display()))
}

fn load_matching(path: &Path) -> Result<Matching> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matching(&text).with_context(|| format!("parsing matching {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}

fn report_wall(what: &str, wall: Duration) {
    eprintln!("{what} took {:.1} ms", wall.as_secs_f64() * 1e3);
}

fn cmd_check(instance: &Path, matching: &Path, output: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    let m = load_matching(matching)?;
    let report = is_stable(&inst, &m).context("classifying matching")?;
    emit(output, &pretty_json(&report))?;
    Ok(ExitCode::from(if report.stable { 0 } else { 1 }))
}

fn cmd_solve(
    instance: &Path,
    algorithm: Algorithm,
    budget: u64,
    output: Option<&Path>,
) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    match algorithm {
        Algorithm::Sd => {
            let m = serial_dictatorship(&inst)?;
            emit(output, &serialize_matching(&m))?;
            Ok(ExitCode::from(0))
        }
        Algorithm::Dsd => {
            let m = dual_serial_dictatorship(&inst)?;
            emit(output, &serialize_matching(&m))?;
            Ok(ExitCode::from(0))
        }
        Algorithm::Exhaustive => {
            let result = enumerate_stable(&inst, Some(1), Some(budget));
            report_wall("search", result.stats.wall);
            match (result.matchings.first(), result.status) {
                (Some(m), _) => {
                    emit(output, &serialize_matching(m))?;
                    Ok(ExitCode::from(0))
                }
                (None, SearchStatus::BudgetExhausted) => {
                    emit(output, &pretty_json(&serde_json::json!({"verdict": "inconclusive"})))?;
                    Ok(ExitCode::from(3))
                }
                (None, _) => {
                    emit(
                        output,
                        &pretty_json(&serde_json::json!({"verdict": "no_stable_matching"})),
                    )?;
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn cmd_minbp(instance: &Path, budget: u64, output: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    match min_blocking_pairs(&inst, Some(budget)) {
        MinBpOutcome::Optimal(result) => {
            report_wall("search", result.stats.wall);
            emit(output, &pretty_json(&result))?;
            Ok(ExitCode::from(0))
        }
        MinBpOutcome::Inconclusive(incumbent) => {
            emit(
                output,
                &pretty_json(&serde_json::json!({
                    "verdict": "inconclusive",
                    "incumbent": incumbent,
                })),
            )?;
            Ok(ExitCode::from(3))
        }
    }
}

fn cmd_reduce(
    formula: &Path,
    variant: Variant,
    assignment: Option<&Path>,
    output: &Path,
) -> Result<ExitCode> {
    let text =
        fs::read_to_string(formula).with_context(|| format!("reading {}", formula.display()))?;
    let f = parse_dimacs(&text).with_context(|| format!("parsing {}", formula.display()))?;
    let bundle: ReductionBundle = match variant {
        Variant::Tap => reduce_to_tap(&f)?,
        Variant::Tapss => reduce_to_tapss(&f)?,
    };
    fs::write(output, serialize_instance(&bundle.instance))
        .with_context(|| format!("writing {}", output.display()))?;
    let sidecar_path = sibling(output, "bundle.json");
    fs::write(&sidecar_path, bundle.sidecar_document())
        .with_context(|| format!("writing {}", sidecar_path.display()))?;
    eprintln!(
        "wrote {} ({} applicants, {} schools) and {}",
        output.display(),
        bundle.instance.applicants.len(),
        bundle.instance.schools.len(),
        sidecar_path.display()
    );

    if let Some(path) = assignment {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let values: Vec<bool> = serde_json::from_str(&text)
            .with_context(|| format!("parsing assignment {}", path.display()))?;
        let witness = match variant {
            Variant::Tap => tap_matching_from_assignment(&bundle, &values)?,
            Variant::Tapss => tapss_matching_from_assignment(&bundle, &values)?,
        };
        let report = is_stable(&bundle.instance, &witness)?;
        if !report.stable {
            bail!("constructed witness is not stable; construction defect");
        }
        let witness_path = sibling(output, "witness.json");
        fs::write(&witness_path, serialize_matching(&witness))
            .with_context(|| format!("writing {}", witness_path.display()))?;
        eprintln!("wrote stable witness {}", witness_path.display());
    }
    Ok(ExitCode::from(0))
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    output.with_extension(suffix)
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    match args.kind {
        GenKind::Formula => {
            if args.vars == 0 || args.vars % 3 != 0 || args.vars > 30 {
                bail!("--vars must be a positive multiple of 3, at most 30");
            }
            let f = random_223(args.vars, args.seed)?;
            emit(args.output.as_deref(), &serialize_dimacs(&f))?;
        }
        GenKind::TapRandom => {
            if args.applicants > 100 || args.schools > 100 {
                bail!("--applicants and --schools must be at most 100");
            }
            if !(2..=10).contains(&args.subjects) {
                bail!("--subjects must be between 2 and 10");
            }
            if args.max_prefs == 0 {
                bail!("--max-prefs must be positive");
            }
            let mode = match args.mode {
                GenMode::Linear => Mode::Linear,
                GenMode::SubjectSpecific => Mode::SubjectSpecific,
            };
            let master = match args.master_list {
                None => MasterLists::None,
                Some(GenMaster::Applicants) => MasterLists::Applicants,
                Some(GenMaster::Schools) => MasterLists::Schools,
                Some(GenMaster::BySubject) => MasterLists::BySubject,
            };
            match (mode, master) {
                (Mode::Linear, MasterLists::BySubject) => {
                    bail!("--master-list by-subject requires --mode subject-specific")
                }
                (Mode::SubjectSpecific, MasterLists::Applicants) => {
                    bail!("--master-list applicants requires --mode linear")
                }
                _ => {}
            }
            let params = GenParams {
                applicants: args.applicants,
                schools: args.schools,
                subjects: args.subjects,
                max_prefs: args.max_prefs,
                max_capacity: args.max_capacity,
                mode,
                master,
            };
            let inst = random_instance(&params, args.seed);
            emit(args.output.as_deref(), &serialize_instance(&inst))?;
            // Belt and braces: generated instances must validate and, for
            // matchings, classify cleanly.
            debug_assert!(validate_matching(&inst, &Matching::empty()).is_ok());
        }
    }
    Ok(ExitCode::from(0))
}
