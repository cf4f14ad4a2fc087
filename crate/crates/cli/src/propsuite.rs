//! Invariant battery across all modules, driven by one seed.

use std::f64::consts::PI;
use std::path::Path;

use hyperideal::angles::{
    lp_feasibility, maximize_volume, probe_volume_concavity, random_structure, AngleAssignment, CONCAVITY_TOL,
};
use hyperideal::dynamics::{flow, rigidity_probe, FlowConfig};
use hyperideal::metric::{curvature_jacobian, sorted_eigenvalues, ConeMetric};
use hyperideal::tetgeom::minkowski::minkowski_oracle;
use hyperideal::tetgeom::{
    admissibility_margin, angles_from_lengths, arcs_from_lengths, jacobian_a_wrt_x, jacobian_x_wrt_a,
    lengths_from_angles, probe_length_space_convexity, schlafli_segment, Six,
};
use hyperideal::triangulation::{search_gluings, Triangulation, EDGE_VERTICES};
use nalgebra::Matrix6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::io::{exit, write_json, CliError, Run};

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    samples: usize,
    /// Largest observed violation measure; compared against `tolerance`.
    worst: f64,
    tolerance: f64,
    passed: bool,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check { name, samples: 0, worst: 0.0, tolerance, passed: true }
    }

    fn observe(&mut self, value: f64) {
        self.samples += 1;
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
    }

    /// A sample that either holds or fails outright.
    fn holds(&mut self, ok: bool) {
        self.observe(if ok { 0.0 } else { f64::INFINITY });
    }

    fn close(mut self) -> Self {
        self.passed = self.worst <= self.tolerance;
        self
    }
}

#[derive(Debug, Serialize)]
struct SuiteReport {
    seed: u64,
    samples: usize,
    violations: usize,
    checks: Vec<Check>,
}

fn log_uniform(rng: &mut ChaCha8Rng) -> Six {
    std::array::from_fn(|_| rng.random_range(-4.0f64..1.5).exp())
}

fn admissible(rng: &mut ChaCha8Rng, margin: f64) -> Six {
    loop {
        let x = log_uniform(rng);
        if admissibility_margin(&x).is_ok_and(|m| m.min() > margin) {
            return x;
        }
    }
}

fn endpoint_angle(x: &Six, v: usize, w: usize) -> f64 {
    let arcs = arcs_from_lengths(x).expect("admissible");
    let f: Vec<usize> = (0..4).filter(|&i| i != v && i != w).collect();
    let (c1, c2) = (arcs.cosh_arc(v, f[0]), arcs.cosh_arc(v, f[1]));
    ((c1 * c2 - arcs.cosh_arc(v, w)) / ((c1 * c1 - 1.0).sqrt() * (c2 * c2 - 1.0).sqrt())).acos()
}

fn min_eig6(m: &Matrix6<f64>) -> f64 {
    ((m + m.transpose()) * 0.5).symmetric_eigenvalues().min()
}

fn tetgeom_checks(rng: &mut ChaCha8Rng, n: usize) -> Vec<Check> {
    let mut oracle = Check::new("minkowski oracle agreement", 1e-9);
    let mut endpoints = Check::new("endpoint consistency", 1e-10);
    let mut symmetry = Check::new("angle jacobian symmetry", 1e-8);
    let mut definite = Check::new("angle jacobian and inverse positive definite", 0.0);
    let mut fd = Check::new("angle jacobian finite differences", 1e-6);
    let mut roundtrip = Check::new("inverse round trip", 1e-9);
    for _ in 0..n {
        let x = log_uniform(rng);
        match (angles_from_lengths(&x), minkowski_oracle(&x)) {
            (Ok(a), Ok(b)) => oracle.observe((0..6).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)),
            (Err(_), Err(_)) => oracle.observe(0.0),
            _ => oracle.observe(f64::INFINITY),
        }

        let x = admissible(rng, 1e-3);
        let a = angles_from_lengths(&x).expect("admissible");
        for [v, w] in EDGE_VERTICES {
            endpoints.observe((endpoint_angle(&x, v, w) - endpoint_angle(&x, w, v)).abs());
        }
        let j = jacobian_a_wrt_x(&x).expect("admissible");
        let inv = jacobian_x_wrt_a(&x).expect("admissible");
        symmetry.observe((j - j.transpose()).amax());
        definite.holds(min_eig6(&j) > 0.0 && min_eig6(&inv) > 0.0);
        let h = 1e-5;
        let fd_j = Matrix6::from_fn(|r, c| {
            let (mut p, mut m) = (x, x);
            p[c] += h;
            m[c] -= h;
            (angles_from_lengths(&p).unwrap()[r] - angles_from_lengths(&m).unwrap()[r]) / (2.0 * h)
        });
        fd.observe((j - fd_j).amax());
        match lengths_from_angles(&a) {
            Ok(back) => roundtrip.observe((0..6).map(|i| (back[i] - x[i]).abs() / x[i].max(1.0)).fold(0.0, f64::max)),
            Err(_) => roundtrip.observe(f64::INFINITY),
        }
    }
    vec![oracle, endpoints, symmetry, definite, fd, roundtrip]
}

fn schlafli_checks(rng: &mut ChaCha8Rng, n: usize) -> Vec<Check> {
    let mut gradient = Check::new("schlafli gradient", 1e-6);
    let mut path = Check::new("schlafli path independence", 2e-9);
    let h = 1e-5;
    for _ in 0..n {
        let x = admissible(rng, 1e-2);
        let a = angles_from_lengths(&x).expect("admissible");
        let i = rng.random_range(0..6);
        let (mut p, mut m) = (a, a);
        p[i] += h;
        m[i] -= h;
        match schlafli_segment(&m, &p) {
            Ok(v) => gradient.observe((v / (2.0 * h) + 0.5 * x[i]).abs()),
            Err(_) => gradient.observe(f64::INFINITY),
        }
        let [b, c] = std::array::from_fn(|_| angles_from_lengths(&admissible(rng, 1e-2)).expect("admissible"));
        let gap = match (schlafli_segment(&a, &b), schlafli_segment(&a, &c), schlafli_segment(&c, &b)) {
            (Ok(d), Ok(e), Ok(f)) => (d - e - f).abs(),
            _ => f64::INFINITY,
        };
        path.observe(gap);
    }
    vec![gradient, path]
}

fn random_metric<'a>(tri: &'a Triangulation, rng: &mut ChaCha8Rng) -> ConeMetric<'a> {
    loop {
        let x = (0..tri.edge_count()).map(|_| rng.random_range(-2.0f64..1.5).exp()).collect();
        if let Ok(m) = ConeMetric::new(tri, x) {
            return m;
        }
    }
}

fn metric_checks(rng: &mut ChaCha8Rng, n: usize, instances: &[Triangulation]) -> Vec<Check> {
    let mut symmetry = Check::new("curvature jacobian symmetry", 1e-8);
    let mut definite = Check::new("curvature jacobian negative definite", 0.0);
    let mut rigid = Check::new("local rigidity", 0.0);
    for i in 0..n {
        let tri = &instances[i % instances.len()];
        let m = random_metric(tri, rng);
        let j = curvature_jacobian(&m);
        symmetry.observe((&j - j.transpose()).amax());
        definite.holds(*sorted_eigenvalues(&j).last().expect("non-empty") < 0.0);
        rigid.holds(rigidity_probe(&m).locally_rigid);
    }
    vec![symmetry, definite, rigid]
}

fn flow_checks(rng: &mut ChaCha8Rng, trajectories: usize, census: &Triangulation) -> Vec<Check> {
    let cfg = FlowConfig::default();
    let mut monotone = Check::new("flow lyapunov monotonicity", 10.0 * cfg.rtol);
    let mut converged = Check::new("census flow convergence", 0.0);
    for _ in 0..trajectories {
        let m = random_metric(census, rng);
        match flow(&m, &cfg) {
            Ok(trace) => {
                converged.holds(trace.status == hyperideal::dynamics::TerminalStatus::Converged);
                for w in trace.samples.windows(2) {
                    let curv = (w[1].total_curv - w[0].total_curv) / w[0].total_curv.max(1e-300);
                    let energy = (w[1].h - w[0].h) / w[0].h.abs().max(1.0);
                    monotone.observe(curv.max(energy).max(0.0));
                }
            }
            Err(_) => converged.holds(false),
        }
    }
    vec![monotone, converged]
}

fn angle_checks(seed: u64, n: usize, census: &Triangulation, gluings: &[Triangulation]) -> Vec<Check> {
    let mut witness = Check::new("lp witness substitution", 1e-12);
    let mut determinism = Check::new("simplex determinism", 0.0);
    for tri in gluings.iter().chain(std::iter::once(census)) {
        let r = lp_feasibility(tri);
        determinism.holds(r == lp_feasibility(tri));
        if let Some(w) = &r.witness {
            let edge_err = w.edge_sums().iter().map(|s| (s - 2.0 * PI).abs()).fold(0.0, f64::max);
            witness.observe(edge_err.max(r.epsilon - w.slack()).max(0.0));
        }
    }

    let mut concavity = Check::new("volume concavity (second difference)", CONCAVITY_TOL);
    let mut kkt = Check::new("kkt length spread / mean length", 1e-6);
    let base = AngleAssignment::uniform(census, PI / 6.0).expect("census carries the symmetric structure");
    match probe_volume_concavity(&base, n, seed) {
        Ok(r) => {
            concavity.samples = r.probes;
            concavity.worst = r.max_second_difference.max(0.0);
        }
        Err(_) => concavity.holds(false),
    }
    for s in 0..(n / 20).max(1) {
        let start = random_structure(&base, seed.wrapping_add(s as u64)).and_then(|st| maximize_volume(&st, 1e-10));
        match start {
            Ok((_, report)) => {
                let real = &report.realization;
                kkt.observe(real.max_spread() / real.class_lengths.iter().copied().fold(f64::INFINITY, f64::min));
            }
            Err(_) => kkt.holds(false),
        }
    }
    vec![witness, determinism, concavity, kkt]
}

fn triangulation_checks(gluings: &[Triangulation]) -> Vec<Check> {
    let mut rebuild = Check::new("triangulation rebuild idempotence", 0.0);
    let mut euler = Check::new("link euler characteristic total = 2(E - T)", 0.0);
    for tri in gluings {
        rebuild.holds(Triangulation::analyze(tri.spec().clone()).as_ref() == Ok(tri));
        let total: i64 = tri.boundary_euler_characteristics().iter().sum();
        euler.holds(total == 2 * (tri.edge_count() as i64 - tri.tet_count() as i64));
    }
    vec![rebuild, euler]
}

pub fn run(seed: u64, samples: usize, out: &Path) -> Result<u8, CliError> {
    let mut run = Run::start("propsuite", json!({ "seed": seed, "samples": samples }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gluings: Vec<Triangulation> =
        search_gluings(2, |_| true).into_iter().filter_map(|s| Triangulation::analyze(s).ok()).collect();
    let census = gluings
        .iter()
        .find(|t| hyperideal::triangulation::one_edge_hyperbolic(t))
        .cloned()
        .expect("search finds the census instance");

    let mut checks = Vec::new();
    checks.extend(tetgeom_checks(&mut rng, samples));
    checks.extend(schlafli_checks(&mut rng, (samples / 10).max(1)));
    checks.extend(metric_checks(&mut rng, samples, &gluings));
    checks.extend(flow_checks(&mut rng, (samples / 20).max(1), &census));
    checks.extend(angle_checks(seed, samples, &census, &gluings));
    checks.extend(triangulation_checks(&gluings));
    let mut convexity = Check::new("length-space non-convexity witness found", 0.0);
    convexity.holds(probe_length_space_convexity(samples * 25, seed).witness_count > 0);
    checks.push(convexity);

    let checks: Vec<Check> = checks.into_iter().map(Check::close).collect();
    let violations = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<48} n = {:<6} worst = {:.3e} (tol {:.0e})", c.name, c.samples, c.worst, c.tolerance);
    }
    let report = SuiteReport { seed, samples, violations, checks };
    write_json(out, &report)?;
    run.output(out);
    run.finish(out)?;
    Ok(if violations == 0 { exit::OK } else { exit::PROPERTY })
}
