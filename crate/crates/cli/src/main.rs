mod commands;
mod io;
mod propsuite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_CODES: &str = "\
Exit codes:
  0  success (flow: converged)
  1  internal error (e.g. cannot write output)
  2  unreadable or ill-formed input, structural triangulation error, bad flags
  3  boundary hypothesis violated: some vertex link has Euler characteristic >= 0
  4  flow: a tetrahedron degenerated
  5  flow: t_max reached before convergence
  6  numerical failure: minimizer, volume maximizer or integrator did not converge,
     or the triangulation carries no angle structure (volmax)
  7  metric or angle assignment is not admissible
  8  propsuite: some invariant was violated";

/// Curvature flow, energy minimization and angle structures on ideal
/// triangulations by hyperideal tetrahedra.
#[derive(Parser, Debug)]
#[command(name = "hyperflow", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct TriArgs {
    /// Triangulation JSON: {"tet_count": N, "pairings": [[t, f, t2, f2, [s0, s1, s2, s3]], ...]}.
    #[arg(long)]
    pub tri: PathBuf,
    /// Accept vertex links with Euler characteristic >= 0.
    #[arg(long)]
    pub allow_nonhyperbolic: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Rkf45,
    Rk4,
}

#[derive(Copy, Clone, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateArg {
    /// One edge class and every vertex link with chi < 0.
    OneEdge,
    /// Every vertex link with chi < 0.
    Hyperbolic,
    /// Some vertex link with chi = 0.
    ZeroChi,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Edge classes, vertex classes and link Euler characteristics.
    Validate {
        #[arg(long)]
        tri: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-tetrahedron geometry and curvature of a metric.
    Shapes {
        #[command(flatten)]
        tri: TriArgs,
        /// Metric JSON: {"lengths": [...]}, one length per edge class.
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate dx/dt = K(x); writes a CSV trace and a status JSON.
    Flow {
        #[command(flatten)]
        tri: TriArgs,
        #[arg(long)]
        metric: PathBuf,
        /// Trace CSV.
        #[arg(long)]
        out: PathBuf,
        /// Status JSON; defaults to `<out>.status.json`.
        #[arg(long)]
        status: Option<PathBuf>,
        #[arg(long, default_value_t = 1000.0)]
        t_max: f64,
        /// Stop once max |K| falls below this.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Rkf45)]
        method: MethodArg,
        /// Stop once a tetrahedron comes this close to degenerating.
        #[arg(long, default_value_t = 1e-7)]
        margin: f64,
        /// Initial (rkf45) or fixed (rk4) step size.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-11)]
        atol: f64,
    },
    /// Newton minimization of the energy H; the output is a metric file.
    Minimize {
        #[command(flatten)]
        tri: TriArgs,
        /// Starting metric; defaults to all lengths equal to --initial.
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        initial: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximize the common slack of an angle structure by linear programming.
    Lp {
        #[command(flatten)]
        tri: TriArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximize total volume over angle structures; the output also holds the
    /// recovered metric under "lengths".
    Volmax {
        #[command(flatten)]
        tri: TriArgs,
        /// Start assignment JSON: {"angles": [[6 per tet], ...]}. Defaults to
        /// the LP witness, moved to a random interior point when --seed is set.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Random midpoint-concavity probes around the start.
        #[arg(long, default_value_t = 0)]
        probes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate closed orientable gluings of 1 or 2 tetrahedra.
    Search {
        #[arg(long)]
        tets: usize,
        #[arg(long, value_enum, default_value_t = PredicateArg::OneEdge)]
        predicate: PredicateArg,
        #[arg(long)]
        out: PathBuf,
        /// Also write each match as `<dir>/gluing_<i>.json`.
        #[arg(long)]
        emit_dir: Option<PathBuf>,
    },
    /// Search for admissible length pairs with an inadmissible midpoint.
    Convexity {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant battery across all modules.
    Propsuite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples per sampled check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { tri, out } => commands::validate(&tri, out.as_deref()),
        Command::Shapes { tri, metric, out } => commands::shapes(&tri, &metric, &out),
        Command::Flow { tri, metric, out, status, t_max, tol, method, margin, step, rtol, atol } => {
            let opts = commands::FlowOpts { t_max, tol, method, margin, step, rtol, atol };
            commands::flow(&tri, &metric, &out, status.as_deref(), opts)
        }
        Command::Minimize { tri, metric, initial, tol, out } => {
            commands::minimize(&tri, metric.as_deref(), initial, tol, &out)
        }
        Command::Lp { tri, out } => commands::lp(&tri, &out),
        Command::Volmax { tri, start, seed, tol, probes, out } => {
            commands::volmax(&tri, start.as_deref(), seed, tol, probes, &out)
        }
        Command::Search { tets, predicate, out, emit_dir } => {
            commands::search(tets, predicate, &out, emit_dir.as_deref())
        }
        Command::Convexity { trials, seed, out } => commands::convexity(trials, seed, &out),
        Command::Propsuite { seed, samples, out } => propsuite::run(seed, samples, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
