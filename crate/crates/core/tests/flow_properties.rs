use hyperideal::dynamics::{flow, minimize_energy, rkf45_step, FlowConfig, FlowTrace, TerminalStatus};
use hyperideal::metric::{curvature, curvature_jacobian, energy, sorted_eigenvalues, ConeMetric};
use hyperideal::triangulation::{census_one_edge, search_gluings, Triangulation};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn multi_edge_instances() -> Vec<Triangulation> {
    search_gluings(2, |t| t.edge_count() >= 2).into_iter().map(|s| Triangulation::analyze(s).unwrap()).collect()
}

fn random_metric<'a>(tri: &'a Triangulation, rng: &mut ChaCha8Rng) -> ConeMetric<'a> {
    loop {
        let x = (0..tri.edge_count()).map(|_| rng.random_range(-1.5f64..1.2).exp()).collect();
        if let Ok(m) = ConeMetric::new(tri, x) {
            if m.margin().1.min() > 1e-3 {
                return m;
            }
        }
    }
}

fn fd_curvature_jacobian(m: &ConeMetric) -> DMatrix<f64> {
    let h = 1e-6;
    let n = m.dim();
    let mut j = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut plus = m.lengths().to_vec();
        let mut minus = plus.clone();
        plus[c] += h;
        minus[c] -= h;
        let kp = curvature(&ConeMetric::new(m.triangulation(), plus).unwrap()).k;
        let km = curvature(&ConeMetric::new(m.triangulation(), minus).unwrap()).k;
        for r in 0..n {
            j[(r, c)] = (kp[r] - km[r]) / (2.0 * h);
        }
    }
    j
}

#[test]
fn curvature_jacobian_is_symmetric_negative_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let census = census_one_edge();
    let others = multi_edge_instances();
    let mut instances = vec![&census];
    instances.extend(others.iter());
    for tri in instances {
        for _ in 0..5 {
            let m = random_metric(tri, &mut rng);
            let j = curvature_jacobian(&m);
            assert!((&j - j.transpose()).amax() < 1e-8);
            assert!(sorted_eigenvalues(&j).last().unwrap() < &0.0);
            let fd = fd_curvature_jacobian(&m);
            assert!((&j - &fd).amax() < 1e-6, "FD mismatch {:e}", (&j - &fd).amax());
        }
    }
}

#[test]
fn energy_gradient_is_minus_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for tri in multi_edge_instances().iter().take(6) {
        let m = random_metric(tri, &mut rng);
        let k = curvature(&m).k;
        let h = 1e-4;
        for i in 0..m.dim() {
            let mut plus = m.lengths().to_vec();
            let mut minus = plus.clone();
            plus[i] += h;
            minus[i] -= h;
            let hp = energy(&ConeMetric::new(tri, plus).unwrap()).unwrap().value;
            let hm = energy(&ConeMetric::new(tri, minus).unwrap()).unwrap().value;
            let fd = (hp - hm) / (2.0 * h);
            assert!((fd + k[i]).abs() < 1e-5, "edge {i}: {fd} vs {}", -k[i]);
        }
    }
}

/// Relative slack allowed on a monotone quantity between samples.
const MONOTONE_SLACK: f64 = 10.0 * 1e-9;

fn assert_lyapunov(trace: &FlowTrace) {
    for w in trace.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(b.total_curv <= a.total_curv + MONOTONE_SLACK * a.total_curv.max(1e-12), "ΣK² rose at t = {}", b.t);
        assert!(b.h <= a.h + MONOTONE_SLACK * a.h.abs().max(1.0), "H rose at t = {}: {} -> {}", b.t, a.h, b.h);
    }
}

#[test]
fn lyapunov_functions_decrease_along_flows() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let census = census_one_edge();
    for _ in 0..5 {
        let m = random_metric(&census, &mut rng);
        let trace = flow(&m, &FlowConfig::default()).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert_lyapunov(&trace);
    }
    for tri in multi_edge_instances().iter().take(8) {
        let m = random_metric(tri, &mut rng);
        let trace = flow(&m, &FlowConfig { t_max: 20.0, ..FlowConfig::default() }).unwrap();
        assert_lyapunov(&trace);
    }
}

#[test]
fn curvature_evolves_by_jacobian_times_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for tri in multi_edge_instances().iter().take(6) {
        let m = random_metric(tri, &mut rng);
        let x = m.lengths();
        let k = curvature(&m).k;
        let h = 1e-4;
        let forward = rkf45_step(tri, x, &k, h).unwrap().0;
        let back = rkf45_step(tri, x, &k, -h).unwrap().0;
        let kf = curvature(&ConeMetric::new(tri, forward).unwrap()).k;
        let kb = curvature(&ConeMetric::new(tri, back).unwrap()).k;
        let jk = curvature_jacobian(&m) * DVector::from_column_slice(&k);
        for i in 0..k.len() {
            let fd = (kf[i] - kb[i]) / (2.0 * h);
            assert!((fd - jk[i]).abs() < 1e-6 * jk.amax().max(1.0), "edge {i}: {fd} vs {}", jk[i]);
        }
    }
}

#[test]
fn degenerating_flow_reports_witness() {
    let tri = &multi_edge_instances()[0];
    let m = ConeMetric::uniform(tri, 1.0).unwrap();
    let cfg = FlowConfig { t_max: 200.0, ..FlowConfig::default() };
    let trace = flow(&m, &cfg).unwrap();
    match trace.status {
        TerminalStatus::Degenerated { tet, quotient_margin, vertex_slack, .. } => {
            assert!(tet < tri.tet_count());
            assert!(quotient_margin.min(vertex_slack) < cfg.degeneration_margin);
        }
        other => panic!("expected degeneration, got {other:?}"),
    }
}

#[test]
fn flow_is_deterministic() {
    let tri = census_one_edge();
    let m = ConeMetric::uniform(&tri, 1.3).unwrap();
    let a = flow(&m, &FlowConfig::default()).unwrap();
    let b = flow(&m, &FlowConfig::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn minimizer_output_is_a_flow_fixed_point() {
    let tri = census_one_edge();
    let (m, _) = minimize_energy(&ConeMetric::uniform(&tri, 2.0).unwrap(), 1e-12).unwrap();
    let trace = flow(&m, &FlowConfig::default()).unwrap();
    assert_eq!(trace.status, TerminalStatus::Converged);
    assert_eq!(trace.samples.len(), 1);
}
