//! Command-line driver.
//!
//! Exit codes: 0 when the command ran to completion (whether or not a race
//! was found), 2 on unreadable or invalid input, 3 when the sync-preserving
//! search exceeds its budget, 4 when a checked artifact (trace, certificate
//! or witness) is rejected. Results go to standard output, diagnostics to
//! standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tracerace_core::gadgets::{
    construct_ov3_witness, gen_hs_to_lockset, gen_ov3_to_syncp, gen_ov_to_hb, gen_ov_to_lockcover,
    gen_random_trace, random_hs_instance, random_ov_instance, solve_ov3_bruteforce,
    RandomTraceParams,
};
use tracerace_core::hb::hb_racy_events_djit;
use tracerace_core::lockcover::export_singlevar_to_ov;
use tracerace_core::lockset::{
    emit_certificate, verify_certificate, CertificateRejection, VarVerdict,
};
use tracerace_core::syncp::check_syncp_witness;
use tracerace_core::{RaceKind, Trace};

use crate::bench::{parse_list, run_bench, write_csv, GenSpec};
use crate::detect::{timed, Algo};
use crate::format::{parse_trace, write_trace, ParseError};
use crate::instance::{parse_instance, write_instance, Instance};
use crate::json::{
    certificate_from_json, certificate_to_json, lock_label, CertificateJson, RunResult, TraceStats,
    WitnessJson,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_REJECT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tracerace",
    version,
    about = "Data-race detection over execution traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a trace file parses and is well-formed.
    Validate { file: PathBuf },
    /// Run a race detector and print the result as JSON.
    Detect {
        #[arg(long, value_enum)]
        algo: Algo,
        file: PathBuf,
        /// Also list every racy event (HB) or variable (lock-set).
        #[arg(long)]
        report_all: bool,
        /// Step limit for syncp-oracle.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Generate a trace from an instance or at random.
    Gen {
        #[arg(value_enum)]
        kind: GenKindArg,
        #[arg(long, conflicts_with_all = ["n", "d"])]
        instance: Option<PathBuf>,
        /// Vectors per part of a random instance.
        #[arg(long)]
        n: Option<usize>,
        /// Dimension of a random instance.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        events: usize,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        #[arg(long, default_value_t = 4)]
        locks: usize,
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 0.2)]
        acquire_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// ov3-syncp only: also write a witness for the first orthogonal
        /// triple, if any.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Export a single-variable trace as an orthogonal-vectors instance.
    ExportOv {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Emit or check a lock-set race-freeness certificate.
    Certify {
        #[arg(value_enum)]
        mode: CertifyMode,
        file: PathBuf,
        cert: Option<PathBuf>,
    },
    /// Check a sync-preserving race witness.
    VerifyWitness { trace: PathBuf, witness: PathBuf },
    /// Time detectors over generated traces and write CSV.
    Bench {
        #[arg(long)]
        algos: String,
        #[arg(long = "gen")]
        generator: String,
        #[arg(long)]
        sweep: String,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKindArg {
    OvHb,
    Ov3Syncp,
    OvLockcover,
    HsLockset,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CertifyMode {
    Emit,
    Check,
}

/// A failed command: exit code and message for standard error.
struct Failure(i32, String);

type CmdResult = Result<(), Failure>;

fn input<E: std::fmt::Display>(what: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure(EXIT_INPUT, format!("{what}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(input(path.display()))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(input(path.display()))
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    parse_trace(&read(path)?).map_err(input(path.display()))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(input(path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "tracerace: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Validate { file } => validate(&file, out),
        Command::Detect {
            algo,
            file,
            report_all,
            budget,
        } => detect(&file, algo, report_all, budget, out),
        Command::Gen {
            kind,
            instance,
            n,
            d,
            events,
            threads,
            locks,
            vars,
            acquire_prob,
            seed,
            output,
            witness,
        } => {
            let trace = match kind {
                GenKindArg::Random => gen_random_trace(&RandomTraceParams {
                    events,
                    threads,
                    locks,
                    vars,
                    acquire_prob,
                    seed,
                    ..RandomTraceParams::default()
                }),
                _ => {
                    let inst = match instance {
                        Some(path) => load_instance(&path)?,
                        None => {
                            let (n, d) = n.zip(d).ok_or_else(|| {
                                Failure(EXIT_INPUT, "need --instance or both --n and --d".into())
                            })?;
                            random_instance(kind, n, d, seed)
                        }
                    };
                    return gen_gadget(kind, &inst, &output, witness.as_deref(), err);
                }
            };
            write(&output, &write_trace(&trace))
        }
        Command::ExportOv { file, output } => {
            let trace = load_trace(&file)?;
            let ov = export_singlevar_to_ov(&trace).map_err(input(file.display()))?;
            write(&output, &write_instance(&Instance::Ov(ov.instance)))
        }
        Command::Certify { mode, file, cert } => {
            let trace = load_trace(&file)?;
            match mode {
                CertifyMode::Emit => {
                    let cert = certificate_to_json(&trace, &emit_certificate(&trace));
                    let _ = writeln!(out, "{}", to_json(&cert));
                    Ok(())
                }
                CertifyMode::Check => {
                    let path = cert.ok_or_else(|| {
                        Failure(EXIT_INPUT, "certify check needs a certificate file".into())
                    })?;
                    let json: CertificateJson =
                        serde_json::from_str(&read(&path)?).map_err(input(path.display()))?;
                    check_certificate(&trace, &json)
                }
            }
        }
        Command::VerifyWitness { trace, witness } => {
            let t = load_trace(&trace)?;
            let w: WitnessJson =
                serde_json::from_str(&read(&witness)?).map_err(input(witness.display()))?;
            check_syncp_witness(&t, &w.events, w.e1, w.e2)
                .map_err(|e| Failure(EXIT_REJECT, format!("witness rejected: {e}")))?;
            let _ = writeln!(out, "witness accepted: events {} and {} race", w.e1, w.e2);
            Ok(())
        }
        Command::Bench {
            algos,
            generator,
            sweep,
            reps,
            budget,
            output,
        } => {
            let algos = parse_list(&algos, |s| Algo::parse(s).ok())
                .ok_or_else(|| Failure(EXIT_INPUT, format!("bad algorithm list {algos:?}")))?;
            let spec = GenSpec::parse(&generator).map_err(input("--gen"))?;
            let sweep = parse_list(&sweep, |s| s.parse::<usize>().ok())
                .ok_or_else(|| Failure(EXIT_INPUT, format!("bad sweep {sweep:?}")))?;
            let rows = run_bench(&algos, &spec, &sweep, reps, budget);
            write(&output, &write_csv(&rows))
        }
    }
}

fn validate(file: &Path, out: &mut dyn Write) -> CmdResult {
    let src = read(file)?;
    match parse_trace(&src) {
        Ok(t) => {
            let _ = writeln!(out, "{}", to_json(&TraceStats::of(&t)));
            Ok(())
        }
        Err(e @ ParseError::IllFormed { .. }) => {
            Err(Failure(EXIT_REJECT, format!("{}: {e}", file.display())))
        }
        Err(e) => Err(Failure(EXIT_INPUT, format!("{}: {e}", file.display()))),
    }
}

fn detect(
    file: &Path,
    algo: Algo,
    report_all: bool,
    budget: Option<u64>,
    out: &mut dyn Write,
) -> CmdResult {
    let trace = load_trace(file)?;
    if report_all && !matches!(algo.kind(), RaceKind::HappensBefore | RaceKind::LockSet) {
        return Err(Failure(
            EXIT_INPUT,
            format!("--report-all is not supported by {}", algo.name()),
        ));
    }
    let (result, elapsed) = timed(&trace, algo, budget);
    let detection = result.map_err(|e| Failure(EXIT_BUDGET, e.to_string()))?;
    let mut r = RunResult::new(
        &trace,
        algo.kind().as_str(),
        algo.name(),
        detection.report.as_ref(),
        elapsed,
    );
    r.reordering = detection.reordering;
    if report_all {
        match algo.kind() {
            RaceKind::HappensBefore => r.racy_events = Some(hb_racy_events_djit(&trace)),
            _ => {
                let cert = emit_certificate(&trace);
                r.racy_vars = Some(
                    cert.verdicts
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v == VarVerdict::Racy)
                        .map(|(x, _)| trace.var_names()[x].clone())
                        .collect(),
                );
            }
        }
    }
    let _ = writeln!(out, "{}", to_json(&r));
    Ok(())
}

fn random_instance(kind: GenKindArg, n: usize, d: usize, seed: u64) -> Instance {
    match kind {
        GenKindArg::HsLockset => Instance::Hs(random_hs_instance(n, d, 0.5, seed)),
        GenKindArg::Ov3Syncp => Instance::Ov(random_ov_instance(3, n, d, 0.5, seed)),
        _ => Instance::Ov(random_ov_instance(2, n, d, 0.5, seed)),
    }
}

fn gen_gadget(
    kind: GenKindArg,
    inst: &Instance,
    output: &Path,
    witness: Option<&Path>,
    err: &mut dyn Write,
) -> CmdResult {
    let mismatch = || {
        Failure(
            EXIT_INPUT,
            format!(
                "generator {} does not take a {} instance",
                kind.to_possible_value().expect("named").get_name(),
                inst.kind()
            ),
        )
    };
    if witness.is_some() && !matches!(kind, GenKindArg::Ov3Syncp) {
        return Err(Failure(
            EXIT_INPUT,
            "--witness is only for ov3-syncp".into(),
        ));
    }
    let trace = match (kind, inst) {
        (GenKindArg::OvHb, Instance::Ov(i)) if i.k() == 2 => gen_ov_to_hb(i).expect("two parts"),
        (GenKindArg::OvLockcover, Instance::Ov(i)) if i.k() == 2 => {
            gen_ov_to_lockcover(i).expect("two parts")
        }
        (GenKindArg::HsLockset, Instance::Hs(i)) => gen_hs_to_lockset(i),
        (GenKindArg::Ov3Syncp, Instance::Ov(i)) if i.k() == 3 => {
            let g = gen_ov3_to_syncp(i).expect("three parts");
            if let Some(path) = witness {
                match solve_ov3_bruteforce(i).expect("three parts") {
                    Some((a, b, c)) => {
                        let events = construct_ov3_witness(&g, (a, b, c)).expect("orthogonal");
                        let w = WitnessJson {
                            events,
                            e1: g.layout.writes[a],
                            e2: g.layout.reads[b],
                        };
                        write(path, &to_json(&w))?;
                    }
                    None => {
                        let _ = writeln!(
                            err,
                            "tracerace: instance has no orthogonal triple; no witness written"
                        );
                    }
                }
            }
            g.trace
        }
        _ => return Err(mismatch()),
    };
    write(output, &write_trace(&trace))
}

fn check_certificate(trace: &Trace, json: &CertificateJson) -> CmdResult {
    let cert = certificate_from_json(trace, json)
        .map_err(|e| Failure(EXIT_REJECT, format!("certificate rejected: {e}")))?;
    verify_certificate(trace, &cert).map_err(|e| {
        let var = |x: tracerace_core::VarId| trace.var_name(x).to_string();
        let msg = match e {
            CertificateRejection::WrongLength { expected, found } => {
                format!("{found} verdicts for {expected} variables")
            }
            CertificateRejection::ClaimsRace { var: x } => {
                format!("variable {} is declared racy", var(x))
            }
            CertificateRejection::UnknownLock { var: x, lock } => {
                format!(
                    "variable {} claims unknown lock {}",
                    var(x),
                    lock_label(trace, lock)
                )
            }
            CertificateRejection::NotProtected {
                var: x,
                lock,
                event,
            } => format!(
                "variable {}: event {event} does not hold lock {}",
                var(x),
                lock_label(trace, lock)
            ),
            CertificateRejection::ConflictingPair {
                var: x,
                first,
                second,
            } => format!("variable {}: events {first} and {second} conflict", var(x)),
        };
        Failure(EXIT_REJECT, format!("certificate rejected: {msg}"))
    })
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}
