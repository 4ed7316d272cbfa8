//! Batch CLI over the pstflow library. Every command reads one case file and
//! emits a machine-readable report (CSV by default, JSON on request); output
//! is byte-identical across repeated runs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pstflow::dc::{compute_atc, TransferDefinition};
use pstflow::model::{parse_case, BranchId, BusId, Network};
use pstflow::powerflow::{solve, SolveOptions};
use pstflow::studies::{angle_sweep, contingency_scan, scan_violations, SweepRequest};
use pstflow::{assemble_ybus, report};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_ANALYSIS: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "pstflow",
    version,
    about = "Power grid studies with phase-shifting transformers and impedance correction tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Drop all impedance-correction table references from the case before
    /// any analysis, as if the case file never contained them.
    #[arg(long, global = true)]
    no_correction: bool,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CaseArg {
    /// Case file (JSON).
    case: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// AC power flow: bus voltages, branch flows, losses.
    Solve {
        #[command(flatten)]
        case: CaseArg,
        /// Convergence tolerance on the per-unit mismatch.
        #[arg(long, value_name = "F")]
        tol: Option<f64>,
        /// Iteration cap.
        #[arg(long, value_name = "N")]
        max_iter: Option<usize>,
    },
    /// AC power flow followed by a voltage/thermal violation scan.
    Scan {
        #[command(flatten)]
        case: CaseArg,
    },
    /// Sweep a transformer's phase angle in both correction modes.
    Sweep {
        #[command(flatten)]
        case: CaseArg,
        /// Branch id of the phase-shifting transformer to sweep.
        #[arg(long, value_name = "ID")]
        pst: BranchId,
        #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
        from: f64,
        #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
        to: f64,
        #[arg(long, value_name = "DEG", default_value_t = 1.0)]
        step: f64,
        /// Branch whose flow is reported; defaults to the swept transformer.
        #[arg(long, value_name = "ID")]
        track_branch: Option<BranchId>,
        /// Buses whose voltage magnitude is reported (repeatable).
        #[arg(long = "track-bus", value_name = "ID")]
        track_buses: Vec<BusId>,
    },
    /// DC available transfer capability between two areas, both correction
    /// modes.
    Atc {
        #[command(flatten)]
        case: CaseArg,
        #[arg(long, value_name = "AREA")]
        seller: String,
        #[arg(long, value_name = "AREA")]
        buyer: String,
    },
    /// N-1 branch outage scan with AC re-solves.
    Contingency {
        #[command(flatten)]
        case: CaseArg,
        /// Outage every in-service branch.
        #[arg(long, conflicts_with = "branch")]
        all: bool,
        /// Outage specific branches (repeatable).
        #[arg(long = "branch", value_name = "ID")]
        branch: Vec<BranchId>,
    },
    /// Dump the bus admittance matrix as `i k re im` rows.
    Ybus {
        #[command(flatten)]
        case: CaseArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn usage_err(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn analysis_err(message: impl ToString) -> CliError {
    CliError {
        code: EXIT_ANALYSIS,
        message: message.to_string(),
    }
}

fn load_case(path: &PathBuf, no_correction: bool) -> Result<Network, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage_err(format!("cannot read {}: {e}", path.display())))?;
    let net = parse_case(&text).map_err(|e| usage_err(e.to_string()))?;
    Ok(if no_correction {
        net.without_correction_tables()
    } else {
        net
    })
}

fn emit(cli_output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match cli_output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| analysis_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Solve {
            case,
            tol,
            max_iter,
        } => {
            let net = load_case(&case.case, cli.no_correction)?;
            let mut opts = SolveOptions::default();
            if let Some(t) = tol {
                opts.tolerance_pu = *t;
            }
            if let Some(m) = max_iter {
                opts.max_iterations = *m;
            }
            let sol = solve(&net, &opts).map_err(analysis_err)?;
            match cli.format {
                Format::Csv => report::solution_csv(&sol),
                Format::Json => to_json(&sol),
            }
        }

        Command::Scan { case } => {
            let net = load_case(&case.case, cli.no_correction)?;
            let sol = solve(&net, &SolveOptions::default()).map_err(analysis_err)?;
            let violations = scan_violations(&net, &sol).map_err(analysis_err)?;
            match cli.format {
                Format::Csv => report::violations_csv(&violations),
                Format::Json => to_json(&violations),
            }
        }

        Command::Sweep {
            case,
            pst,
            from,
            to,
            step,
            track_branch,
            track_buses,
        } => {
            let net = load_case(&case.case, cli.no_correction)?;
            let request = SweepRequest {
                pst_branch: *pst,
                from_deg: *from,
                to_deg: *to,
                step_deg: *step,
                track_branch: *track_branch,
                track_buses: track_buses.clone(),
            };
            let rows = angle_sweep(&net, &request).map_err(analysis_err)?;
            match cli.format {
                Format::Csv => report::sweep_csv(&rows, track_buses),
                Format::Json => to_json(&rows),
            }
        }

        Command::Atc {
            case,
            seller,
            buyer,
        } => {
            let net = load_case(&case.case, cli.no_correction)?;
            let transfer =
                TransferDefinition::pro_rata(&net, seller, buyer).map_err(analysis_err)?;
            let mut entries = Vec::new();
            for corrected in [false, true] {
                let result = compute_atc(&net, &transfer, corrected).map_err(analysis_err)?;
                entries.push((transfer.name(), corrected, result));
            }
            match cli.format {
                Format::Csv => report::atc_csv(&entries),
                Format::Json => {
                    #[derive(Serialize)]
                    struct AtcEntry<'a> {
                        transfer: &'a str,
                        use_correction: bool,
                        result: &'a pstflow::dc::AtcResult,
                    }
                    let rows: Vec<AtcEntry> = entries
                        .iter()
                        .map(|(name, corrected, result)| AtcEntry {
                            transfer: name,
                            use_correction: *corrected,
                            result,
                        })
                        .collect();
                    to_json(&rows)
                }
            }
        }

        Command::Contingency { case, all, branch } => {
            let net = load_case(&case.case, cli.no_correction)?;
            let outages: Vec<BranchId> = if *all {
                let mut ids: Vec<BranchId> = net
                    .branches
                    .iter()
                    .filter(|b| b.status)
                    .map(|b| b.id)
                    .collect();
                ids.sort_unstable();
                ids
            } else if branch.is_empty() {
                return Err(usage_err("contingency requires --all or --branch ID"));
            } else {
                branch.clone()
            };
            let records =
                contingency_scan(&net, &outages, &SolveOptions::default()).map_err(analysis_err)?;
            match cli.format {
                Format::Csv => report::contingency_csv(&records),
                Format::Json => to_json(&records),
            }
        }

        Command::Ybus { case } => {
            let net = load_case(&case.case, cli.no_correction)?;
            let matrix = assemble_ybus(&net, true).map_err(analysis_err)?;
            match cli.format {
                Format::Csv => matrix.dump(),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Entry {
                        from_bus: BusId,
                        to_bus: BusId,
                        re: f64,
                        im: f64,
                    }
                    let order = matrix.bus_order().to_vec();
                    let entries: Vec<Entry> = matrix
                        .iter()
                        .map(|(&(i, k), v)| Entry {
                            from_bus: order[i],
                            to_bus: order[k],
                            re: v.re,
                            im: v.im,
                        })
                        .collect();
                    to_json(&entries)
                }
            }
        }
    };
    emit(&cli.output, &text)
}
