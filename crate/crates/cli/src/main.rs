use clap::{ArgGroup, Parser, ValueEnum};
use cluster_cli::{parse_m_values, run, Emit, Input, RunSpec, WidthFactor, WidthMode};
use cluster_compiler::bench::Benchmark;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EmitArg {
    Text,
    Json,
    Svg,
}

/// Compile a gate circuit into a depth-minimized photonic cluster-state measurement grid.
#[derive(Debug, Parser)]
#[command(name = "clusterc", version)]
#[command(group(ArgGroup::new("source").required(true).args(["circuit", "benchmark"])))]
#[command(group(ArgGroup::new("size").required(true).args(["width", "width_factor"])))]
struct Args {
    /// Circuit file in the line-based text format.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Benchmark family: bv, iqp, hwea, qft or hc.
    #[arg(long, requires = "qubits")]
    benchmark: Option<String>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 0)]
    bench_seed: u64,
    /// Cluster width in photons.
    #[arg(long)]
    width: Option<usize>,
    /// Width as a multiple of 2N-1: 1.25 or 1.5.
    #[arg(long)]
    width_factor: Option<String>,
    /// Candidates kept per width at each step.
    #[arg(long, default_value_t = 12)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    /// Place ready components in a seeded random order instead of lowest id first.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = EmitArg::Text)]
    emit: EmitArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep m over `a..b` or a comma list instead of a single compile.
    #[arg(long)]
    sweep_m: Option<String>,
    /// Also run the exhaustive search and compare depths.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 5_000_000)]
    oracle_budget: u64,
}

fn spec_from(args: Args) -> Result<RunSpec, String> {
    let input = match (args.circuit, args.benchmark) {
        (Some(p), None) => Input::Circuit(p),
        (None, Some(b)) => {
            let bench: Benchmark = b.parse().map_err(|e| format!("{e}"))?;
            Input::Benchmark { bench, qubits: args.qubits.expect("clap requires qubits"), seed: args.bench_seed }
        }
        _ => return Err("give exactly one of --circuit and --benchmark".into()),
    };
    let width = match (args.width, args.width_factor) {
        (Some(w), None) => WidthMode::Absolute(w),
        (None, Some(f)) => {
            WidthMode::Factor(WidthFactor::parse(&f).ok_or(format!("width factor must be 1.25 or 1.5, got {f}"))?)
        }
        _ => return Err("give exactly one of --width and --width-factor".into()),
    };
    let sweep = match args.sweep_m {
        Some(s) => Some(parse_m_values(&s).ok_or(format!("bad --sweep-m value {s}"))?),
        None => None,
    };
    if args.m == 0 || args.rounds == 0 {
        return Err("--m and --rounds must be positive".into());
    }
    Ok(RunSpec {
        input,
        width,
        m: args.m,
        rounds: args.rounds,
        seed: args.seed,
        emit: match args.emit {
            EmitArg::Text => Emit::Text,
            EmitArg::Json => Emit::Json,
            EmitArg::Svg => Emit::Svg,
        },
        out: args.out,
        sweep,
        oracle: args.oracle,
        oracle_budget: args.oracle_budget,
    })
}

fn main() -> ExitCode {
    let spec = match spec_from(Args::parse()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&spec) {
        Ok(outcome) => {
            if spec.out.is_none() {
                print!("{}", outcome.artifact);
            }
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
