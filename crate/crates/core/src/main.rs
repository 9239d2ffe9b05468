use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spinchain::evolution::{run_sequence, ExactOptions, Method, StateVector};
use spinchain::harness::{
    emit_csv, estimate_large_chain, plot_script, protocol_epsilon, sweep, unwanted_probability,
    write_csv, Grid, MethodSet, RabiSetting, Spacing, SweepSpec, SweepVariable,
};
use spinchain::perturbation::{gate_success_estimate, mu};
use spinchain::protocol::build_remote_cn_sequence;
use spinchain::{BasisState, ChainParams, Error, Result};

#[derive(Parser)]
#[command(
    name = "spinchain",
    version,
    about = "Remote CONTROL-NOT error analysis on an Ising spin chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol once and report the unwanted-state probability.
    Simulate(SimulateArgs),
    /// Sweep the frequency gradient δω and write CSV.
    SweepGradient(SweepArgs),
    /// Sweep the Rabi frequency Ω and write CSV.
    SweepRabi(SweepArgs),
    /// Analytic error budget only; works for any chain length.
    Estimate(EstimateArgs),
}

#[derive(Args, Clone)]
struct ChainArgs {
    /// Number of spins L.
    #[arg(long, default_value_t = 10)]
    length: usize,
    /// Ising coupling J.
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    /// Base Larmor frequency ω₀.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    omega0: f64,
}

#[derive(Args, Clone, Copy)]
#[group(multiple = false)]
struct RabiArgs {
    /// Rabi frequency Ω.
    #[arg(long)]
    rabi: Option<f64>,
    /// Use Ω = 2J/√(4K²-1), where the near-resonant error vanishes.
    #[arg(long = "two-pi-k", value_name = "K")]
    two_pi_k: Option<u32>,
}

impl RabiArgs {
    fn setting(self) -> RabiSetting {
        match (self.rabi, self.two_pi_k) {
            (Some(w), _) => RabiSetting::Value(w),
            (None, Some(k)) => RabiSetting::TwoPiK(k),
            (None, None) => RabiSetting::TwoPiK(8),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Blocked,
    Analytic,
    All,
}

impl MethodArg {
    fn set(self) -> MethodSet {
        match self {
            MethodArg::Exact => MethodSet {
                exact: true,
                blocked: false,
                analytic: false,
            },
            MethodArg::Blocked => MethodSet {
                exact: false,
                blocked: true,
                analytic: false,
            },
            MethodArg::Analytic => MethodSet {
                exact: false,
                blocked: false,
                analytic: true,
            },
            MethodArg::All => MethodSet::ALL,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Frequency gradient δω.
    #[arg(long, default_value_t = 100.0)]
    gradient: f64,
    #[command(flatten)]
    rabi: RabiArgs,
    /// Pulse phase φ shared by every pulse.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Target accuracy of the exact propagator.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the pulse table here.
    #[arg(long, value_name = "FILE")]
    dump_sequence: Option<PathBuf>,
    /// Write the final state (exact if run, else blocked) here.
    #[arg(long, value_name = "FILE")]
    dump_state: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Fixed gradient for Rabi sweeps.
    #[arg(long, default_value_t = 100.0)]
    gradient: f64,
    /// Fixed Rabi frequency for gradient sweeps.
    #[command(flatten)]
    rabi: RabiArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    start: f64,
    #[arg(long)]
    stop: f64,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
    spacing: SpacingArg,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long, value_name = "FILE", requires = "out")]
    plot: Option<PathBuf>,
    /// Leave the runtime columns empty so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 100.0)]
    gradient: f64,
    #[command(flatten)]
    rabi: RabiArgs,
    /// Near-resonant error per pulse; defaults to the protocol's π-pulse value.
    #[arg(long)]
    epsilon: Option<f64>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let c = &args.chain;
    let params = ChainParams::new(c.length, c.coupling, args.gradient, c.omega0)?;
    let rabi = args.rabi.setting().resolve(c.coupling)?;
    let methods = args.method.set();
    let seq = build_remote_cn_sequence(&params, rabi, args.phase)?;
    for w in &seq.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &args.dump_sequence {
        write_file(path, &seq.to_table())?;
    }
    let opts = ExactOptions {
        tol: args.tol,
        ..ExactOptions::default()
    };

    println!("length={}", c.length);
    println!("coupling={:e}", c.coupling);
    println!("gradient={:e}", args.gradient);
    println!("rabi={rabi:e}");
    println!("validity_ratio={:e}", params.validity_ratio());
    println!("epsilon={:e}", protocol_epsilon(rabi, c.coupling));
    println!(
        "mu_end={:e}",
        mu(c.length - 1, rabi, args.gradient, c.length)?
    );

    let mut dumped: Option<StateVector> = None;
    for (enabled, method, key) in [
        (methods.exact, Method::Exact, "p_exact"),
        (methods.blocked, Method::Blocked, "p_blocked"),
    ] {
        if !enabled {
            continue;
        }
        let state = run_sequence(BasisState::GROUND, &seq, method, &opts)?;
        println!("{key}={:e}", unwanted_probability(&state, c.length)?);
        dumped.get_or_insert(state);
    }
    if methods.analytic {
        let eps = protocol_epsilon(rabi, c.coupling);
        let budget = gate_success_estimate(c.length, rabi, args.gradient, c.coupling, eps)?;
        println!("p_analytic={:e}", budget.p_unwanted);
    }
    if let Some(path) = &args.dump_state {
        let state = dumped.ok_or_else(|| {
            Error::InvalidInput("--dump-state needs an exact or blocked run".into())
        })?;
        write_file(path, &state.to_dump(0.0))?;
    }
    Ok(())
}

fn run_sweep(args: SweepArgs, variable: SweepVariable) -> Result<()> {
    let grid = Grid {
        start: args.start,
        stop: args.stop,
        points: args.points,
        spacing: match args.spacing {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        },
    };
    let mut spec = SweepSpec::new(variable, grid);
    spec.length = args.chain.length;
    spec.coupling = args.chain.coupling;
    spec.omega0 = args.chain.omega0;
    spec.phase = args.phase;
    spec.gradient = args.gradient;
    spec.rabi = args.rabi.setting();
    spec.methods = args.method.set();
    spec.tol = args.tol;
    spec.record_timings = !args.no_timings;

    let rows = sweep(&spec)?;
    match &args.out {
        Some(path) => emit_csv(&rows, path)?,
        None => write_csv(&rows, std::io::stdout().lock()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?,
    }
    if let (Some(plot), Some(out)) = (&args.plot, &args.out) {
        write_file(plot, &plot_script(&out.to_string_lossy(), variable))?;
    }
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "error: {}={:e}: {}",
            variable.name(),
            r.value,
            r.error.as_deref().unwrap_or_default()
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{} of {} sweep points failed",
            failed.len(),
            rows.len()
        )))
    }
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let c = &args.chain;
    let rabi = args.rabi.setting().resolve(c.coupling)?;
    let budget = match args.epsilon {
        Some(eps) => gate_success_estimate(c.length, rabi, args.gradient, c.coupling, eps)?,
        None => estimate_large_chain(c.length, rabi, args.gradient, c.coupling)?,
    };
    print!("{}", budget.to_record());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::SweepGradient(a) => run_sweep(a, SweepVariable::Gradient),
        Command::SweepRabi(a) => run_sweep(a, SweepVariable::Rabi),
        Command::Estimate(a) => estimate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
