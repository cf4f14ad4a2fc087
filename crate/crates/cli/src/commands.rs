use std::path::Path;

use anyhow::anyhow;
use hyperideal::angles::{
    lp_feasibility, maximize_volume, probe_volume_concavity, random_structure, AngleAssignment, AngleFile,
    AnglesError, ConcavityReport,
};
use hyperideal::dynamics::{self, DynamicsError, FlowConfig, Method, TerminalStatus};
use hyperideal::metric::{ConeMetric, CurvatureState, MetricError};
use hyperideal::tetgeom::{self, Six};
use hyperideal::triangulation::{search_gluings, GluingFile, GluingSpec, Triangulation};
use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::io::{exit, read_json, sidecar, write_json, write_text, CliError, Run, WithCode};
use crate::{MethodArg, PredicateArg, TriArgs};

#[derive(Debug, Deserialize)]
struct MetricFile {
    lengths: Vec<f64>,
}

fn load_spec(path: &Path, run: &mut Run) -> Result<GluingSpec, CliError> {
    run.input(path);
    let file: GluingFile = read_json(path)?;
    GluingSpec::from_file(&file).code(exit::INPUT)
}

fn load_tri(args: &TriArgs, run: &mut Run) -> Result<Triangulation, CliError> {
    let spec = load_spec(&args.tri, run)?;
    let built = if args.allow_nonhyperbolic { Triangulation::analyze(spec) } else { Triangulation::build(spec) };
    built.map_err(|e| {
        let code = if e.is_boundary_hypothesis() { exit::BOUNDARY } else { exit::INPUT };
        CliError { code, error: e.into() }
    })
}

fn metric_error(e: MetricError) -> CliError {
    let code = match e {
        MetricError::DimensionMismatch { .. } => exit::INPUT,
        MetricError::Inadmissible { .. } => exit::INADMISSIBLE,
    };
    CliError { code, error: e.into() }
}

fn load_metric<'a>(tri: &'a Triangulation, path: &Path, run: &mut Run) -> Result<ConeMetric<'a>, CliError> {
    run.input(path);
    let file: MetricFile = read_json(path)?;
    ConeMetric::new(tri, file.lengths).map_err(metric_error)
}

fn dynamics_error(e: DynamicsError) -> CliError {
    let code = match e {
        DynamicsError::Config(_) => exit::INPUT,
        DynamicsError::Inadmissible(_) => exit::INADMISSIBLE,
        _ => exit::NUMERICAL,
    };
    CliError { code, error: e.into() }
}

fn angles_error(e: AnglesError) -> CliError {
    let code = match e {
        AnglesError::DimensionMismatch { .. } | AnglesError::Tolerance(_) => exit::INPUT,
        AnglesError::NonPositive { .. } | AnglesError::EdgeSum { .. } | AnglesError::VertexSum { .. } => {
            exit::INADMISSIBLE
        }
        _ => exit::NUMERICAL,
    };
    CliError { code, error: e.into() }
}

#[derive(Debug, Serialize)]
struct EdgeReport {
    id: usize,
    valence: usize,
    corners: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize)]
struct VertexReport {
    id: usize,
    corners: Vec<(usize, usize)>,
    link_euler_characteristic: i64,
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    tet_count: usize,
    boundary_hypothesis: bool,
    edges: Vec<EdgeReport>,
    vertices: Vec<VertexReport>,
}

pub fn validate(tri_path: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let mut run = Run::start("validate", json!({}));
    let spec = load_spec(tri_path, &mut run)?;
    let tri = Triangulation::analyze(spec).code(exit::INPUT)?;
    let chis = tri.boundary_euler_characteristics();
    let report = ValidateReport {
        tet_count: tri.tet_count(),
        boundary_hypothesis: chis.iter().all(|&c| c < 0),
        edges: tri
            .edge_classes()
            .iter()
            .map(|c| EdgeReport { id: c.id, valence: c.valence(), corners: c.corners.clone() })
            .collect(),
        vertices: tri
            .vertex_classes()
            .iter()
            .map(|v| VertexReport {
                id: v.id,
                corners: v.corners.clone(),
                link_euler_characteristic: v.link_euler_characteristic(),
            })
            .collect(),
    };
    if let Some(out) = out {
        write_json(out, &report)?;
        run.output(out);
        run.finish(out)?;
    }
    println!("{tri}");
    if report.boundary_hypothesis {
        Ok(exit::OK)
    } else {
        Triangulation::build(tri.spec().clone()).map(|_| exit::OK).code(exit::BOUNDARY)
    }
}

#[derive(Debug, Serialize)]
struct CurvatureReport {
    #[serde(rename = "K")]
    k: Vec<f64>,
    #[serde(rename = "S")]
    s: Vec<f64>,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "J_eigs")]
    j_eigs: Vec<f64>,
}

fn curvature_report(m: &ConeMetric) -> Result<CurvatureReport, CliError> {
    let state = CurvatureState::at(m).code(exit::NUMERICAL)?;
    Ok(CurvatureReport {
        j_eigs: state.jacobian_eigenvalues(),
        k: state.curvature.k,
        s: state.curvature.angle_sums,
        h: state.energy.value,
    })
}

fn rows(m: &Matrix6<f64>) -> Vec<Six> {
    (0..6).map(|r| std::array::from_fn(|c| m[(r, c)])).collect()
}

#[derive(Debug, Serialize)]
struct TetReport {
    lengths: Six,
    /// Ordered by vertex, then face.
    arcs: Vec<f64>,
    angles: Six,
    jac_ax: Vec<Six>,
    jac_xa: Vec<Six>,
    relative_volume: f64,
    quotient_margin: f64,
    vertex_slack: f64,
}

#[derive(Debug, Serialize)]
struct ShapesReport {
    tets: Vec<TetReport>,
    curvature: CurvatureReport,
}

pub fn shapes(args: &TriArgs, metric: &Path, out: &Path) -> Result<u8, CliError> {
    let mut run = Run::start("shapes", json!({ "allow_nonhyperbolic": args.allow_nonhyperbolic }));
    let tri = load_tri(args, &mut run)?;
    let m = load_metric(&tri, metric, &mut run)?;
    let tets = m
        .shapes()
        .into_iter()
        .map(|s| {
            let margin = tetgeom::admissibility_margin(&s.lengths).code(exit::INADMISSIBLE)?;
            Ok(TetReport {
                relative_volume: tetgeom::schlafli_potential(&s.lengths).code(exit::NUMERICAL)?,
                lengths: s.lengths,
                arcs: s.arcs.to_vec(),
                angles: s.angles,
                jac_ax: rows(&s.jac_ax),
                jac_xa: rows(&s.jac_xa),
                quotient_margin: margin.quotient,
                vertex_slack: margin.vertex_slack,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let report = ShapesReport { tets, curvature: curvature_report(&m)? };
    write_json(out, &report)?;
    run.output(out);
    run.finish(out)?;
    let k_max = report.curvature.k.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    println!("{} tetrahedra, max |K| = {k_max:e}, H = {}", report.tets.len(), report.curvature.h);
    Ok(exit::OK)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowOpts {
    pub t_max: f64,
    pub tol: f64,
    pub method: MethodArg,
    pub margin: f64,
    pub step: f64,
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Serialize)]
struct FlowStatus<'a> {
    #[serde(flatten)]
    status: &'a TerminalStatus,
    rejected_steps: usize,
    samples: usize,
    #[serde(rename = "final")]
    last: &'a dynamics::FlowSample,
}

pub fn flow(args: &TriArgs, metric: &Path, out: &Path, status: Option<&Path>, opts: FlowOpts) -> Result<u8, CliError> {
    let mut run = Run::start(
        "flow",
        json!({ "allow_nonhyperbolic": args.allow_nonhyperbolic, "flow": serde_json::to_value(opts).unwrap() }),
    );
    let tri = load_tri(args, &mut run)?;
    let m = load_metric(&tri, metric, &mut run)?;
    let cfg = FlowConfig {
        t_max: opts.t_max,
        initial_step: opts.step,
        curvature_tol: opts.tol,
        degeneration_margin: opts.margin,
        method: match opts.method {
            MethodArg::Rkf45 => Method::Rkf45Adaptive,
            MethodArg::Rk4 => Method::Rk4Fixed,
        },
        rtol: opts.rtol,
        atol: opts.atol,
        seed: 0,
    };
    let trace = dynamics::flow(&m, &cfg).map_err(dynamics_error)?;
    let status_path = status.map_or_else(|| sidecar(out, ".status.json"), Path::to_path_buf);
    write_text(out, &trace.to_csv())?;
    let last = trace.last();
    write_json(
        &status_path,
        &FlowStatus { status: &trace.status, rejected_steps: trace.rejected_steps, samples: trace.samples.len(), last },
    )?;
    run.output(out);
    run.output(&status_path);
    run.finish(out)?;
    let k_max = last.k.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (label, code) = match trace.status {
        TerminalStatus::Converged => ("converged", exit::OK),
        TerminalStatus::Degenerated { .. } => ("degenerated", exit::DEGENERATED),
        TerminalStatus::TMaxReached => ("t_max reached", exit::T_MAX),
    };
    println!("{label} at t = {} after {} samples, max |K| = {k_max:e}", last.t, trace.samples.len());
    Ok(code)
}

#[derive(Debug, Serialize)]
struct MinimizeOutput {
    lengths: Vec<f64>,
    iterations: usize,
    max_curvature: f64,
    energy: Vec<f64>,
    step_fractions: Vec<f64>,
    curvature: CurvatureReport,
}

pub fn minimize(args: &TriArgs, metric: Option<&Path>, initial: f64, tol: f64, out: &Path) -> Result<u8, CliError> {
    let mut run = Run::start(
        "minimize",
        json!({ "allow_nonhyperbolic": args.allow_nonhyperbolic, "initial": initial, "tol": tol }),
    );
    if !(tol > 0.0) {
        return Err(CliError { code: exit::INPUT, error: anyhow!("--tol must be positive") });
    }
    let tri = load_tri(args, &mut run)?;
    let m0 = match metric {
        Some(p) => load_metric(&tri, p, &mut run)?,
        None => ConeMetric::uniform(&tri, initial).map_err(metric_error)?,
    };
    let (m, report) = dynamics::minimize_energy(&m0, tol).map_err(dynamics_error)?;
    let output = MinimizeOutput {
        lengths: m.lengths().to_vec(),
        iterations: report.iterations,
        max_curvature: report.max_curvature,
        energy: report.energy,
        step_fractions: report.step_fractions,
        curvature: curvature_report(&m)?,
    };
    write_json(out, &output)?;
    run.output(out);
    run.finish(out)?;
    println!("converged in {} iterations, max |K| = {:e}", output.iterations, output.max_curvature);
    Ok(exit::OK)
}

pub fn lp(args: &TriArgs, out: &Path) -> Result<u8, CliError> {
    let mut run = Run::start("lp", json!({ "allow_nonhyperbolic": args.allow_nonhyperbolic }));
    let tri = load_tri(args, &mut run)?;
    let result = lp_feasibility(&tri);
    write_json(out, &result.report())?;
    run.output(out);
    run.finish(out)?;
    let verdict = if result.feasible { "feasible" } else { "infeasible" };
    println!("{verdict}, epsilon = {} ({} pivots)", result.epsilon, result.pivots);
    Ok(exit::OK)
}

#[derive(Debug, Serialize)]
struct VolmaxOutput {
    angles: Vec<Six>,
    /// Mean corner length per edge class: the recovered metric.
    lengths: Vec<f64>,
    spread: Vec<f64>,
    max_spread: f64,
    tet_lengths: Vec<Six>,
    iterations: usize,
    objective: Vec<f64>,
    projected_gradient: f64,
    concavity: Option<ConcavityReport>,
}

pub fn volmax(
    args: &TriArgs,
    start: Option<&Path>,
    seed: Option<u64>,
    tol: f64,
    probes: usize,
    out: &Path,
) -> Result<u8, CliError> {
    let mut run = Run::start(
        "volmax",
        json!({ "allow_nonhyperbolic": args.allow_nonhyperbolic, "seed": seed, "tol": tol, "probes": probes }),
    );
    let tri = load_tri(args, &mut run)?;
    let base = match start {
        Some(p) => {
            run.input(p);
            let file: AngleFile = read_json(p)?;
            AngleAssignment::from_file(&tri, &file).map_err(angles_error)?
        }
        None => lp_feasibility(&tri).witness.ok_or_else(|| CliError {
            code: exit::NUMERICAL,
            error: anyhow!("triangulation carries no angle structure"),
        })?,
    };
    let start = match seed {
        Some(s) => random_structure(&base, s).map_err(angles_error)?,
        None => base,
    };
    let concavity = if probes > 0 {
        Some(probe_volume_concavity(&start, probes, seed.unwrap_or(0)).map_err(angles_error)?)
    } else {
        None
    };
    let (end, report) = maximize_volume(&start, tol).map_err(angles_error)?;
    let real = report.realization;
    let output = VolmaxOutput {
        angles: end.angles().to_vec(),
        max_spread: real.max_spread(),
        lengths: real.class_lengths,
        spread: real.spread,
        tet_lengths: real.lengths,
        iterations: report.iterations,
        objective: report.objective,
        projected_gradient: report.projected_gradient,
        concavity,
    };
    write_json(out, &output)?;
    run.output(out);
    run.finish(out)?;
    println!(
        "converged in {} iterations, projected gradient {:e}, max length spread {:e}",
        output.iterations, output.projected_gradient, output.max_spread
    );
    Ok(exit::OK)
}

#[derive(Debug, Serialize)]
struct SearchOutput {
    tet_count: usize,
    predicate: PredicateArg,
    count: usize,
    gluings: Vec<GluingFile>,
}

pub fn search(tets: usize, predicate: PredicateArg, out: &Path, emit_dir: Option<&Path>) -> Result<u8, CliError> {
    let mut run = Run::start("search", json!({ "tets": tets, "predicate": predicate }));
    if !(1..=2).contains(&tets) {
        return Err(CliError { code: exit::INPUT, error: anyhow!("--tets must be 1 or 2") });
    }
    let chis = |t: &Triangulation| t.boundary_euler_characteristics();
    let specs = match predicate {
        PredicateArg::OneEdge => search_gluings(tets, hyperideal::triangulation::one_edge_hyperbolic),
        PredicateArg::Hyperbolic => search_gluings(tets, |t| chis(t).iter().all(|&c| c < 0)),
        PredicateArg::ZeroChi => search_gluings(tets, |t| chis(t).contains(&0)),
        PredicateArg::All => search_gluings(tets, |_| true),
    };
    let gluings: Vec<GluingFile> = specs.iter().map(GluingSpec::to_file).collect();
    if let Some(dir) = emit_dir {
        std::fs::create_dir_all(dir).code(exit::INTERNAL)?;
        for (i, g) in gluings.iter().enumerate() {
            let path = dir.join(format!("gluing_{i}.json"));
            write_json(&path, g)?;
            run.output(&path);
        }
    }
    let output = SearchOutput { tet_count: tets, predicate, count: gluings.len(), gluings };
    write_json(out, &output)?;
    run.output(out);
    run.finish(out)?;
    println!("{} gluings", output.count);
    Ok(exit::OK)
}

pub fn convexity(trials: usize, seed: u64, out: &Path) -> Result<u8, CliError> {
    let mut run = Run::start("convexity", json!({ "trials": trials, "seed": seed }));
    let report = tetgeom::probe_length_space_convexity(trials, seed);
    write_json(out, &report)?;
    run.output(out);
    run.finish(out)?;
    println!("{} non-convexity witnesses in {trials} trials", report.witness_count);
    Ok(exit::OK)
}
