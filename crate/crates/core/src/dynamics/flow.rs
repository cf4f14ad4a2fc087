use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::metric::{curvature, curvature_jacobian, sorted_eigenvalues, ConeMetric};
use crate::tetgeom::{self, Margin, Six};
use crate::triangulation::Triangulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rkf45Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub t_max: f64,
    pub initial_step: f64,
    /// Stop once `max |K_i|` falls below this.
    pub curvature_tol: f64,
    /// Stop once some tetrahedron comes this close to degenerating.
    pub degeneration_margin: f64,
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            t_max: 1000.0,
            initial_step: 1e-2,
            curvature_tol: 1e-12,
            degeneration_margin: 1e-7,
            method: Method::Rkf45Adaptive,
            rtol: 1e-9,
            atol: 1e-11,
            seed: 0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("t_max", self.t_max),
            ("initial_step", self.initial_step),
            ("curvature_tol", self.curvature_tol),
            ("degeneration_margin", self.degeneration_margin),
            ("rtol", self.rtol),
            ("atol", self.atol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DynamicsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.curvature_tol < 1e-13 {
            return Err(DynamicsError::Config(format!(
                "curvature_tol must be at least 1e-13, got {}",
                self.curvature_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub k: Vec<f64>,
    /// `Σ K_i²`.
    pub total_curv: f64,
    /// Relative energy `H`.
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TerminalStatus {
    Converged,
    Degenerated {
        tet: usize,
        /// `(vertex, local edge)` of the corner with the smallest quotient margin.
        corner: (usize, usize),
        quotient_margin: f64,
        vertex: usize,
        vertex_slack: f64,
    },
    TMaxReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    pub status: TerminalStatus,
    pub rejected_steps: usize,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("traces always hold the initial sample")
    }

    /// CSV with header `t,x_0..,K_0..,total_curv,H`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.x.len());
        let mut out = String::from("t");
        for i in 0..n {
            write!(out, ",x_{i}").unwrap();
        }
        for i in 0..n {
            write!(out, ",K_{i}").unwrap();
        }
        out.push_str(",total_curv,H\n");
        for s in &self.samples {
            write!(out, "{:.16e}", s.t).unwrap();
            for v in s.x.iter().chain(&s.k) {
                write!(out, ",{v:.16e}").unwrap();
            }
            writeln!(out, ",{:.16e},{:.16e}", s.total_curv, s.h).unwrap();
        }
        out
    }
}

/// Adaptive steps are capped at this multiple of `1 / ρ(∂K/∂x)`, inside the
/// real stability interval of the Fehlberg pair. Without the cap the error
/// controller parks the solution at tolerance level around the equilibrium.
const STABILITY_FRACTION: f64 = 2.0;

const RKF45_A: [[f64; 5]; 5] = [
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const RKF45_B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
const RKF45_B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];

/// Curvature at `x`, or `None` outside the space of cone metrics.
fn rhs(tri: &Triangulation, x: &[f64]) -> Option<Vec<f64>> {
    ConeMetric::new(tri, x.to_vec()).ok().map(|m| curvature(&m).k)
}

fn axpy(x: &[f64], h: f64, terms: &[(&[f64], f64)]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (k, c) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += h * c * v;
            }
        }
    }
    out
}

/// One Runge–Kutta–Fehlberg 4(5) step. Returns the fifth-order solution and
/// the difference to the embedded fourth-order one, or `None` when a stage
/// leaves the space of cone metrics.
pub fn rkf45_step(tri: &Triangulation, x: &[f64], k1: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut stages: Vec<Vec<f64>> = vec![k1.to_vec()];
    for row in RKF45_A {
        let terms: Vec<(&[f64], f64)> = stages.iter().zip(row).map(|(k, c)| (k.as_slice(), c)).collect();
        let y = axpy(x, h, &terms);
        stages.push(rhs(tri, &y)?);
    }
    let combine = |b: &[f64; 6]| {
        let terms: Vec<(&[f64], f64)> = stages.iter().zip(b).map(|(k, c)| (k.as_slice(), *c)).collect();
        axpy(x, h, &terms)
    };
    let y5 = combine(&RKF45_B5);
    let y4 = combine(&RKF45_B4);
    let err = y5.iter().zip(&y4).map(|(a, b)| a - b).collect();
    Some((y5, err))
}

fn rk4_step(tri: &Triangulation, x: &[f64], k1: &[f64], h: f64) -> Option<Vec<f64>> {
    let k2 = rhs(tri, &axpy(x, h, &[(k1, 0.5)]))?;
    let k3 = rhs(tri, &axpy(x, h, &[(&k2, 0.5)]))?;
    let k4 = rhs(tri, &axpy(x, h, &[(&k3, 1.0)]))?;
    Some(axpy(x, h, &[(k1, 1.0 / 6.0), (&k2, 1.0 / 3.0), (&k3, 1.0 / 3.0), (&k4, 1.0 / 6.0)]))
}

/// Per-tetrahedron relative volumes along a trajectory, advanced by
/// integrating the Schläfli form over the short angle segment between
/// consecutive samples instead of from the reference shape each time.
struct VolumeTracker {
    angles: Vec<Six>,
    lengths: Vec<Six>,
    volumes: Vec<f64>,
}

impl VolumeTracker {
    fn new(m: &ConeMetric) -> Result<Self, DynamicsError> {
        let shapes = m.shapes();
        let volumes = shapes.iter().map(|s| tetgeom::schlafli_potential(&s.lengths)).collect::<Result<_, _>>()?;
        Ok(VolumeTracker {
            angles: shapes.iter().map(|s| s.angles).collect(),
            lengths: shapes.iter().map(|s| s.lengths).collect(),
            volumes,
        })
    }

    fn advance(&mut self, m: &ConeMetric) -> Result<f64, DynamicsError> {
        for tet in 0..self.volumes.len() {
            let x = m.tet_lengths(tet);
            let a = tetgeom::angles_from_lengths(&x)?;
            self.volumes[tet] += tetgeom::schlafli_segment_from(&self.angles[tet], &a, &self.lengths[tet])?;
            self.angles[tet] = a;
            self.lengths[tet] = x;
        }
        Ok(self.volumes.iter().sum())
    }

    fn total(&self) -> f64 {
        self.volumes.iter().sum()
    }
}

fn sample(m: &ConeMetric, t: f64, volume: f64) -> FlowSample {
    let k = curvature(m).k;
    let h = 2.0 * volume - k.iter().zip(m.lengths()).map(|(k, x)| k * x).sum::<f64>();
    FlowSample { t, x: m.lengths().to_vec(), total_curv: k.iter().map(|v| v * v).sum(), k, h }
}

fn degenerated(tet: usize, margin: Margin) -> TerminalStatus {
    TerminalStatus::Degenerated {
        tet,
        corner: margin.quotient_corner,
        quotient_margin: margin.quotient,
        vertex: margin.slack_vertex,
        vertex_slack: margin.vertex_slack,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrates `dx/dt = K(x)` from `m0`.
///
/// Every stage point is checked for admissibility before `K` is evaluated
/// there; a step that leaves the space of cone metrics is retried with half
/// the step size.
pub fn flow(m0: &ConeMetric, cfg: &FlowConfig) -> Result<FlowTrace, DynamicsError> {
    cfg.validate()?;
    let tri = m0.triangulation();
    let mut current = m0.clone();
    let mut t = 0.0;
    let mut h = cfg.initial_step;
    let h_min = 1e-14 * cfg.t_max.max(1.0);
    let mut rejected_steps = 0;
    let mut volumes = VolumeTracker::new(&current)?;
    let mut samples = vec![sample(&current, t, volumes.total())];

    let finish = |samples, status, rejected_steps| Ok(FlowTrace { samples, status, rejected_steps });

    loop {
        let k = samples.last().map(|s: &FlowSample| s.k.clone()).expect("non-empty");
        if max_abs(&k) < cfg.curvature_tol {
            return finish(samples, TerminalStatus::Converged, rejected_steps);
        }
        let (tet, margin) = current.margin();
        if margin.min() < cfg.degeneration_margin {
            return finish(samples, degenerated(tet, margin), rejected_steps);
        }
        if t >= cfg.t_max {
            return finish(samples, TerminalStatus::TMaxReached, rejected_steps);
        }

        let x = current.lengths().to_vec();
        let mut step = h.min(cfg.t_max - t);
        if cfg.method == Method::Rkf45Adaptive {
            let spectral_radius = sorted_eigenvalues(&curvature_jacobian(&current))
                .iter()
                .fold(0.0, |m: f64, v| m.max(v.abs()));
            if spectral_radius > 0.0 {
                step = step.min(STABILITY_FRACTION / spectral_radius);
            }
        }
        let (proposal, growth) = match cfg.method {
            Method::Rk4Fixed => (rk4_step(tri, &x, &k, step), None),
            Method::Rkf45Adaptive => match rkf45_step(tri, &x, &k, step) {
                None => (None, None),
                Some((y, err)) => {
                    let norm = err
                        .iter()
                        .zip(&x)
                        .zip(&y)
                        .map(|((e, a), b)| e.abs() / (cfg.atol + cfg.rtol * a.abs().max(b.abs())))
                        .fold(0.0, f64::max);
                    let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                    if norm <= 1.0 {
                        (Some(y), Some(factor))
                    } else {
                        rejected_steps += 1;
                        h = step * factor;
                        if h < h_min {
                            return Err(DynamicsError::StepUnderflow { t, lengths: x });
                        }
                        continue;
                    }
                }
            },
        };

        match proposal.and_then(|y| ConeMetric::new(tri, y).ok()) {
            Some(next) => {
                t += step;
                current = next;
                let volume = volumes.advance(&current)?;
                samples.push(sample(&current, t, volume));
                if let Some(factor) = growth {
                    h = step * factor;
                }
            }
            None => {
                rejected_steps += 1;
                h = step * 0.5;
                if h < h_min {
                    return Err(DynamicsError::StepUnderflow { t, lengths: x });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::census_one_edge;

    fn x_star() -> f64 {
        (3f64.sqrt() / (2.0 * 3f64.sqrt() - 2.0)).acosh()
    }

    #[test]
    fn converges_from_unit_lengths() {
        let tri = census_one_edge();
        let m0 = ConeMetric::uniform(&tri, 1.0).unwrap();
        let trace = flow(&m0, &FlowConfig::default()).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert!((trace.last().x[0] - x_star()).abs() < 1e-8);
        for w in trace.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn equilibrium_start_converges_at_once() {
        let tri = census_one_edge();
        let m0 = ConeMetric::uniform(&tri, x_star()).unwrap();
        let cfg = FlowConfig::default();
        let trace = flow(&m0, &cfg).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert_eq!(trace.samples.len(), 1);
        assert!(trace.samples[0].total_curv <= cfg.curvature_tol.powi(2));
    }

    #[test]
    fn rk4_agrees_with_adaptive() {
        let tri = census_one_edge();
        let m0 = ConeMetric::uniform(&tri, 1.0).unwrap();
        let cfg = FlowConfig { method: Method::Rk4Fixed, initial_step: 0.005, ..FlowConfig::default() };
        let trace = flow(&m0, &cfg).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert!((trace.last().x[0] - x_star()).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = FlowConfig { curvature_tol: 1e-15, ..FlowConfig::default() };
        assert!(matches!(cfg.validate(), Err(DynamicsError::Config(_))));
        let cfg = FlowConfig { t_max: -1.0, ..FlowConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_has_expected_header() {
        let tri = census_one_edge();
        let m0 = ConeMetric::uniform(&tri, x_star()).unwrap();
        let csv = flow(&m0, &FlowConfig::default()).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x_0,K_0,total_curv,H");
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
    }
}
