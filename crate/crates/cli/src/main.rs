//! `siglap` command-line front end. Every command prints pretty JSON with
//! sorted keys to stdout (or `--out`); CSV side outputs go to `--csv`.
//!
//! Exit codes: 0 success, 1 I/O error, 2 parse error or bad argument,
//! 3 premise violation, 4 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use siglap::consensus::{
    consensus_reached, default_dt, default_horizon, seeded_initial_state, simulate,
    DEFAULT_REL_TOL,
};
use siglap::perturbation::sensitive_pair_report;
use siglap::reach::reach_decomposition_with;
use siglap::report;
use siglap::robustness::{
    check_spectrum_condition, delta_star_with_grid, effective_resistance_directed,
    effective_resistance_undirected, sweep_csv,
};
use siglap::spectral::inf_norm;
use siglap::{
    eigenvalues, laplacian, null_basis, parse_edge_list, zero_multiplicity, EdgePerturbation,
    ReachMode, SignedDigraph,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] siglap::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use siglap::Error as E;
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::Parse { .. }
                | E::NodeOutOfRange { .. }
                | E::NodeCountMismatch(..)
                | E::InvalidArgument(_) => 2,
                E::Premise(_) => 3,
                E::Singular(_) | E::NoConvergence(_) | E::Invariant(_) | E::Dimension(_) => 4,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "siglap", version, about = "Spectral analysis of signed directed graph Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, reach decomposition and zero-eigenvalue bases.
    Analyze(AnalyzeArgs),
    /// Largest tolerable negative weight on a node pair.
    DeltaStar(DeltaStarArgs),
    /// Node pairs where a small negative weight destabilizes consensus.
    Sensitive(SensitiveArgs),
    /// RK4 simulation of the consensus dynamics.
    Simulate(SimulateArgs),
    /// Effective resistance between two nodes.
    Resistance(ResistanceArgs),
}

#[derive(Args)]
struct Common {
    /// Edge-list file: node count, then one `i j a_ij` line per edge.
    #[arg(long, value_name = "PATH")]
    graph: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// Perturbed node pair (1-based).
    #[arg(long, num_args = 2, value_names = ["U", "V"])]
    pair: Vec<usize>,
    /// Gains of the perturbation: a_uv = -δ q_uv, a_vu = -δ q_vu.
    #[arg(long, num_args = 2, value_names = ["QUV", "QVU"], default_values_t = [1.0, 1.0])]
    gains: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReachModeArg {
    /// Every nonzero weight is an edge.
    All,
    /// Only positive weights are edges.
    Positive,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "all")]
    mode: ReachModeArg,
}

#[derive(Args)]
struct DeltaStarArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pair: PairArgs,
    /// Write the frequency sweep as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SensitiveArgs {
    #[command(flatten)]
    common: Common,
    /// Magnitude of the negative test weight used for verification.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Optional perturbed pair; requires --delta.
    #[arg(long, num_args = 2, value_names = ["U", "V"])]
    pair: Option<Vec<usize>>,
    #[arg(long, num_args = 2, value_names = ["QUV", "QVU"], default_values_t = [1.0, 1.0])]
    gains: Vec<f64>,
    /// Perturbation magnitude on --pair.
    #[arg(long)]
    delta: Option<f64>,
    /// Seed for the uniform [-1, 1] initial state.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Explicit initial state, comma separated; overrides --seed.
    #[arg(long, value_delimiter = ',', value_name = "X1,X2,...")]
    x0: Option<Vec<f64>>,
    /// Integration horizon; defaults to 50 / (slowest decay rate), or 100.
    #[arg(long)]
    horizon: Option<f64>,
    /// Integration step; defaults to 0.01 / max(1, ‖L‖∞).
    #[arg(long)]
    dt: Option<f64>,
    /// Relative spread below which the trace counts as consensus.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Write the state trace as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResistanceMode {
    /// Closed form; needs a connected undirected nonnegative graph.
    Undirected,
    /// Lyapunov-based; any graph with a stable reduced Laplacian.
    Directed,
}

#[derive(Args)]
struct ResistanceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, num_args = 2, value_names = ["U", "V"], required = true)]
    pair: Vec<usize>,
    #[arg(long, value_enum, default_value = "directed")]
    mode: ResistanceMode,
}

fn read_graph(path: &Path) -> CliResult<SignedDigraph> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(parse_edge_list(&text)?)
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(common: &Common, v: &Value) -> CliResult<()> {
    let mut text = report::to_pretty(v);
    text.push('\n');
    write_text(common.out.as_deref(), &text)
}

fn perturbation(pair: &[usize], gains: &[f64], delta: f64) -> CliResult<EdgePerturbation> {
    Ok(EdgePerturbation::new(pair[0], pair[1], gains[0], gains[1], delta)?)
}

fn vectors(vs: &[nalgebra::DVector<f64>]) -> Value {
    Value::Array(vs.iter().map(|v| report::reals(v.iter())).collect())
}

fn analyze(args: &AnalyzeArgs) -> CliResult<Value> {
    let g = read_graph(&args.common.graph)?;
    let l = laplacian(&g);
    let spec = eigenvalues(&l)?;
    let mode = match args.mode {
        ReachModeArg::All => ReachMode::AllEdges,
        ReachModeArg::Positive => ReachMode::PositiveOnly,
    };
    let decomp = reach_decomposition_with(&g, mode);
    let decomp_json = serde_json::to_value(decomp.report()).expect("report serializes");
    // the bases are only defined for nonnegative weights
    let (gammas, mus) = match null_basis(&g, &decomp) {
        Ok(b) => (vectors(&b.gammas), vectors(&b.mus)),
        Err(siglap::Error::Premise(_)) => (Value::Null, Value::Null),
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "spectrum": report::complexes(&spec.values),
        "zero_multiplicity": zero_multiplicity(&spec, inf_norm(&l)),
        "d": decomp.d,
        "decomposition": decomp_json,
        "permutation": decomp.permutation,
        "gammas": gammas,
        "mus": mus,
        "spectrum_condition": check_spectrum_condition(&g),
    }))
}

fn delta_star_cmd(args: &DeltaStarArgs) -> CliResult<Value> {
    let g = read_graph(&args.common.graph)?;
    let pert = perturbation(&args.pair.pair, &args.pair.gains, 0.0)?;
    let (res, sweep) = delta_star_with_grid(&g, &pert, None)?;
    if let Some(path) = &args.csv {
        write_text(Some(path), &sweep_csv(&sweep))?;
    }
    Ok(res.to_json())
}

fn sensitive(args: &SensitiveArgs) -> CliResult<Value> {
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(siglap::Error::InvalidArgument("epsilon must be positive".into()).into());
    }
    let g = read_graph(&args.common.graph)?;
    let rows = sensitive_pair_report(&g, args.epsilon)?;
    Ok(json!({
        "epsilon": report::real(args.epsilon),
        "pairs": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    }))
}

fn simulate_cmd(args: &SimulateArgs) -> CliResult<Value> {
    let mut g = read_graph(&args.common.graph)?;
    let pert = match (&args.pair, args.delta) {
        (Some(pair), Some(delta)) => Some(perturbation(pair, &args.gains, delta)?),
        (None, None) => None,
        _ => {
            return Err(siglap::Error::InvalidArgument(
                "--pair and --delta must be given together".into(),
            )
            .into())
        }
    };
    if let Some(p) = &pert {
        g = p.apply(&g)?;
    }
    let l = laplacian(&g);
    let x0 = match &args.x0 {
        Some(v) if v.len() != g.n() => {
            return Err(siglap::Error::InvalidArgument(format!(
                "--x0 has {} entries for {} nodes",
                v.len(),
                g.n()
            ))
            .into())
        }
        Some(v) => nalgebra::DVector::from_column_slice(v),
        None => seeded_initial_state(g.n(), args.seed),
    };
    let dt = args.dt.unwrap_or_else(|| default_dt(&l));
    let horizon = match args.horizon {
        Some(h) => h,
        None => default_horizon(&l)?,
    };
    let trace = simulate(&l, &x0, dt, horizon)?;
    if let Some(path) = &args.csv {
        write_text(Some(path), &trace.to_csv())?;
    }
    let last = trace.states.last().expect("trace holds the initial state");
    Ok(json!({
        "consensus": consensus_reached(&trace, args.rel_tol)?,
        "diverged": trace.diverged,
        "dt": report::real(dt),
        "horizon": report::real(horizon),
        "rel_tol": report::real(args.rel_tol),
        "seed": args.x0.is_none().then_some(args.seed),
        "perturbation": pert.map(|p| report::normalize(serde_json::to_value(p).expect("serializes"))),
        "samples": trace.states.len(),
        "final_time": report::real(*trace.times.last().expect("nonempty")),
        "final_state": report::reals(last.iter()),
    }))
}

fn resistance(args: &ResistanceArgs) -> CliResult<Value> {
    let g = read_graph(&args.common.graph)?;
    let (u, v) = (args.pair[0], args.pair[1]);
    let r = match args.mode {
        ResistanceMode::Undirected => effective_resistance_undirected(&g, u, v)?,
        ResistanceMode::Directed => effective_resistance_directed(&g, u, v)?,
    };
    Ok(r.to_json())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(a) => emit(&a.common, &analyze(a)?),
        Command::DeltaStar(a) => emit(&a.common, &delta_star_cmd(a)?),
        Command::Sensitive(a) => emit(&a.common, &sensitive(a)?),
        Command::Simulate(a) => emit(&a.common, &simulate_cmd(a)?),
        Command::Resistance(a) => emit(&a.common, &resistance(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
