//! gridplan command line.
//!
//! Exit codes: 0 = schedule found / input valid, 1 = bad input, 2 = provably
//! infeasible instance, 3 = budget exhausted without a schedule.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gridplan::bench::{
    default_network, generate, run_comparison, rows_to_csv, Case, CompareOptions, Method,
    ScenarioSpec,
};
use gridplan::gantt::{build_document, render_ascii, render_svg};
use gridplan::model::{
    load_network, load_request, read_schedule_csv, validate, write_schedule_csv, Network, Request,
    Schedule,
};
use gridplan::p2p::{simulate, P2pError};
use gridplan::replay::{replay, ReplayOptions};
use gridplan::solver::{build_model, solve, Budget, BuildError, FakeTasks, ModelConfig};
use gridplan::strategies::{solve_chunked, solve_time_limited, ChunkedError, ChunkedOptions};

const EXIT_BAD_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NO_SCHEDULE: u8 = 3;

#[derive(Parser)]
#[command(name = "gridplan", version, about = "Makespan-minimal planning of bulk data transfers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigFlags {
    /// Allow multi-hop transfer paths through intermediate sites.
    #[arg(long)]
    transit: bool,
    /// Enforce shared link group capacities.
    #[arg(long)]
    shared_groups: bool,
    /// Enforce bounded storage at transit sites.
    #[arg(long)]
    storage: bool,
    /// Break symmetries between interchangeable demands.
    #[arg(long)]
    symmetry: bool,
}

impl ConfigFlags {
    fn to_config(&self) -> ModelConfig {
        ModelConfig {
            allow_transit: self.transit,
            enforce_shared_groups: self.shared_groups,
            enforce_storage: self.storage,
            symmetry_breaking: self.symmetry,
            ..ModelConfig::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlanMethod {
    Optimal,
    Chunked,
    Timelimited,
    P2p,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network and request for structural problems.
    Validate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        request: PathBuf,
    },
    /// Compute a transfer schedule.
    Plan {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        request: PathBuf,
        #[arg(long, value_enum, default_value = "optimal")]
        method: PlanMethod,
        /// Demands per chunk (method = chunked).
        #[arg(long, default_value_t = 1)]
        chunk_size: usize,
        /// Milliseconds of search per demand (method = timelimited).
        #[arg(long, default_value_t = 100)]
        time_coeff: u64,
        /// Overall wall-clock budget in milliseconds (optimal / chunked).
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Tie-break seed (method = p2p).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the schedule CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the search report JSON here instead of stderr.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigFlags,
    },
    /// Run the peer-to-peer baseline and print its event trace.
    Simulate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        request: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the resulting schedule CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare planning methods over generated scenarios (CSV to stdout).
    Bench {
        /// Network JSON; defaults to the built-in 4-source star network.
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long, default_value = "dest")]
        destination: String,
        #[arg(long, value_enum)]
        case: CaseArg,
        /// Request sizes to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 6])]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-source inclusion probabilities (case = weighted).
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.6, 0.01, 0.01])]
        weights: Vec<f64>,
        /// Methods: optimal, optimal-sym, timelimited:<ms>, chunked:<size>, p2p.
        #[arg(long, value_delimiter = ',', default_values_t = [String::from("optimal"), String::from("p2p")])]
        methods: Vec<String>,
        /// Wall-clock budget per solve in milliseconds.
        #[arg(long)]
        budget_ms: Option<u64>,
        #[command(flatten)]
        config: ConfigFlags,
    },
    /// Render a schedule as a Gantt chart (SVG by default).
    Gantt {
        #[arg(long)]
        network: PathBuf,
        /// Schedule CSV as produced by `plan`.
        #[arg(long)]
        schedule: PathBuf,
        /// Request JSON; enables path checks and storage lanes.
        #[arg(long)]
        request: Option<PathBuf>,
        /// Add one lane per bounded storage site (needs --request).
        #[arg(long)]
        storage_lanes: bool,
        /// Plain-text chart instead of SVG.
        #[arg(long)]
        ascii: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Distinct,
    Weighted,
    Shared,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Case {
        match c {
            CaseArg::Distinct => Case::Distinct,
            CaseArg::Weighted => Case::Weighted,
            CaseArg::Shared => Case::Shared,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn bad_input(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_BAD_INPUT,
        message: message.to_string(),
    }
}

fn load_inputs(network: &PathBuf, request: &PathBuf) -> Result<(Network, Request), Failure> {
    let network = load_network(network).map_err(bad_input)?;
    let request = load_request(request).map_err(bad_input)?;
    Ok((network, request))
}

fn emit_schedule(
    schedule: &Schedule,
    network: &Network,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(bad_input)?;
            write_schedule_csv(schedule, network, file).map_err(bad_input)
        }
        None => write_schedule_csv(schedule, network, std::io::stdout()).map_err(bad_input),
    }
}

fn emit_report(report: &serde_json::Value, dest: &Option<PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    match dest {
        Some(path) => std::fs::write(path, text + "\n").map_err(bad_input),
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { network, request } => {
            let (network, request) = load_inputs(&network, &request)?;
            let result = validate(&network, &request);
            for notice in &result.notices {
                eprintln!("notice: {notice}");
            }
            if result.is_ok() {
                println!(
                    "ok: {} demands to `{}`",
                    result.normalized.demands.len(),
                    result.normalized.destination
                );
                Ok(())
            } else {
                Err(bad_input(result.violations.join("\n")))
            }
        }

        Command::Plan {
            network,
            request,
            method,
            chunk_size,
            time_coeff,
            budget_ms,
            seed,
            out,
            report,
            config,
        } => {
            let (net, req) = load_inputs(&network, &request)?;
            let cfg = config.to_config();
            let budget = match budget_ms {
                Some(ms) => Budget::wall_ms(ms),
                None => Budget::unlimited(),
            };
            match method {
                PlanMethod::P2p => {
                    if cfg.allow_transit {
                        return Err(bad_input(
                            "--method p2p only supports direct connections; drop --transit",
                        ));
                    }
                    let (schedule, _) = simulate(&net, &req, seed).map_err(|e| match e {
                        P2pError::Invalid(_) => bad_input(e),
                        P2pError::NotDirect(_) => Failure {
                            code: EXIT_INFEASIBLE,
                            message: e.to_string(),
                        },
                    })?;
                    emit_schedule(&schedule, &net, &out)?;
                    emit_report(
                        &serde_json::json!({"method": "p2p", "seed": seed, "makespan": schedule.makespan}),
                        &report,
                    )
                }
                PlanMethod::Optimal => {
                    let model =
                        build_model(&net, &req, cfg, FakeTasks::default()).map_err(build_failure)?;
                    let (schedule, rep) = solve(&model, &budget);
                    emit_report(&rep.to_json(), &report)?;
                    let schedule = schedule.ok_or(Failure {
                        code: EXIT_NO_SCHEDULE,
                        message: "budget exhausted before any schedule was found".into(),
                    })?;
                    emit_schedule(&schedule, &net, &out)
                }
                PlanMethod::Chunked => {
                    let opts = ChunkedOptions {
                        per_chunk_budget: budget,
                        sort_by_origin_cardinality: false,
                    };
                    let (schedule, reps) = solve_chunked(&net, &req, chunk_size, &cfg, &opts)
                        .map_err(|e| match e {
                            ChunkedError::Build { source, .. } => build_failure(source),
                            ChunkedError::NoSchedule { .. } => Failure {
                                code: EXIT_NO_SCHEDULE,
                                message: e.to_string(),
                            },
                        })?;
                    let rep_json: Vec<_> = reps.iter().map(|r| r.to_json()).collect();
                    emit_report(&serde_json::json!({"chunks": rep_json}), &report)?;
                    emit_schedule(&schedule, &net, &out)
                }
                PlanMethod::Timelimited => {
                    let (schedule, rep) = solve_time_limited(&net, &req, time_coeff, &cfg)
                        .map_err(build_failure)?;
                    emit_report(&rep.to_json(), &report)?;
                    let schedule = schedule.ok_or(Failure {
                        code: EXIT_NO_SCHEDULE,
                        message: "time budget exhausted before any schedule was found".into(),
                    })?;
                    emit_schedule(&schedule, &net, &out)
                }
            }
        }

        Command::Simulate {
            network,
            request,
            seed,
            out,
        } => {
            let (net, req) = load_inputs(&network, &request)?;
            let (schedule, trace) = simulate(&net, &req, seed).map_err(|e| match e {
                P2pError::Invalid(_) => bad_input(e),
                P2pError::NotDirect(_) => Failure {
                    code: EXIT_INFEASIBLE,
                    message: e.to_string(),
                },
            })?;
            print!("{}", trace.to_text());
            eprintln!("makespan: {}", schedule.makespan);
            if out.is_some() {
                emit_schedule(&schedule, &net, &out)?;
            }
            Ok(())
        }

        Command::Bench {
            network,
            destination,
            case,
            ns,
            reps,
            seed,
            weights,
            methods,
            budget_ms,
            config,
        } => {
            let net = match network {
                Some(path) => load_network(&path).map_err(bad_input)?,
                None => default_network(),
            };
            let methods: Vec<Method> = methods
                .iter()
                .map(|s| s.parse().map_err(bad_input))
                .collect::<Result<_, _>>()?;
            let base = ScenarioSpec {
                case: case.into(),
                n_files: 0,
                weights,
                seed,
                network: net,
                destination: destination.as_str().into(),
            };
            // smoke-test the generator once so spec errors surface as input errors
            generate(&ScenarioSpec {
                n_files: 1,
                ..base.clone()
            })
            .map_err(bad_input)?;
            let opts = CompareOptions {
                ns,
                reps,
                seed0: seed,
                cell_budget: match budget_ms {
                    Some(ms) => Budget::wall_ms(ms),
                    None => Budget::unlimited(),
                },
            };
            let rows = run_comparison(&base, &methods, &config.to_config(), &opts)
                .map_err(bad_input)?;
            print!("{}", rows_to_csv(&rows));
            Ok(())
        }

        Command::Gantt {
            network,
            schedule,
            request,
            storage_lanes,
            ascii,
            out,
        } => {
            let net = load_network(&network).map_err(bad_input)?;
            let file = File::open(&schedule).map_err(bad_input)?;
            let sched = read_schedule_csv(file).map_err(bad_input)?;
            let req = match &request {
                Some(path) => Some(load_request(path).map_err(bad_input)?),
                None => None,
            };
            if storage_lanes && req.is_none() {
                return Err(bad_input("--storage-lanes needs --request"));
            }
            let opts = ReplayOptions {
                check_paths: req.is_some(),
                ..ReplayOptions::default()
            };
            replay(&sched, &net, req.as_ref(), &opts)
                .map_err(|v| bad_input(format!("schedule fails replay: {v}")))?;
            let doc = build_document(&sched, &net, req.as_ref(), storage_lanes);
            let text = if ascii {
                render_ascii(&doc)
            } else {
                render_svg(&doc)
            };
            match out {
                Some(path) => std::fs::write(&path, text).map_err(bad_input),
                None => {
                    let mut stdout = std::io::stdout();
                    stdout.write_all(text.as_bytes()).map_err(bad_input)
                }
            }
        }
    }
}

fn build_failure(e: BuildError) -> Failure {
    match e {
        BuildError::Infeasible(_) => Failure {
            code: EXIT_INFEASIBLE,
            message: e.to_string(),
        },
        _ => bad_input(e),
    }
}
