//! Steady flow on the pipe-network representation of a fracture network.
//!
//! Each fracture is a node at its center. Each intersection is a pipe made
//! of two half-pipes in series, one per fracture, running from the fracture
//! center to the intersection midpoint. Boundary-touching fractures connect
//! to the inlet (`n`) or outlet (`n + 1`) reservoir with a half-pipe whose
//! width is the fracture's trace on the face.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dfn::FractureNetwork;
use crate::graph::blocks;
use crate::reactive::constants::{ChemistryConstants, SECONDS_PER_YEAR};

/// Water at 25 °C, Pa·s.
pub const WATER_VISCOSITY: f64 = 1e-3;
/// Shortest admissible pipe length, m.
pub const MIN_PIPE_LENGTH: f64 = 1e-9;
/// Damköhler number reported for stagnant fractures.
pub const DA_I_CAP: f64 = 1e12;

#[derive(Debug, Error, PartialEq)]
pub enum PipeError {
    #[error("singular flow system (disconnected pipe network)")]
    Singular,
    #[error("non-finite conductance on pipe {0}")]
    NonFinite(usize),
    #[error("inlet and outlet reservoirs are not connected")]
    NoPath,
}

/// Permeability of a parallel-plate channel, `b² / 12`.
pub fn cubic_law_permeability(aperture: f64) -> f64 {
    aperture * aperture / 12.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipe {
    pub a: usize,
    pub b: usize,
    /// Intersection length, or face trace length for reservoir pipes.
    pub width: f64,
    /// Length of the half-pipe inside fracture `a`.
    pub len_a: f64,
    /// Length inside `b`; zero when `b` is a reservoir.
    pub len_b: f64,
}

impl Pipe {
    pub fn length(&self) -> f64 {
        self.len_a + self.len_b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipeModel {
    pub n_fractures: usize,
    /// Pipes in graph edge order: intersections, inlet links, outlet links.
    pub pipes: Vec<Pipe>,
    pub apertures: Vec<f64>,
    pub viscosity: f64,
}

impl PipeModel {
    pub fn inlet(&self) -> usize {
        self.n_fractures
    }

    pub fn outlet(&self) -> usize {
        self.n_fractures + 1
    }

    pub fn node_count(&self) -> usize {
        self.n_fractures + 2
    }

    pub fn endpoints(&self) -> Vec<(usize, usize)> {
        self.pipes.iter().map(|p| (p.a, p.b)).collect()
    }

    /// Conductance of every pipe with per-fracture permeability multipliers.
    ///
    /// Half-pipes combine in series, so a pipe with unit multipliers has
    /// `g = b³ ℓ / (12 μ L)`.
    pub fn conductances(&self, factors: &[f64]) -> Vec<f64> {
        self.pipes
            .iter()
            .map(|p| {
                let half = |i: usize, len: f64| {
                    if len == 0.0 || i >= self.n_fractures {
                        0.0
                    } else {
                        let b = self.apertures[i];
                        12.0 * self.viscosity * len / (b * b * b * factors[i] * p.width)
                    }
                };
                1.0 / (half(p.a, p.len_a) + half(p.b, p.len_b))
            })
            .collect()
    }
}

/// Builds the pipe model of a pruned network.
pub fn build_pipe_model(network: &FractureNetwork, viscosity: f64) -> PipeModel {
    let n = network.len();
    let mut pipes = Vec::with_capacity(network.intersections.len() + 2 * n);
    let clamp = |la: f64, lb: f64, what: &str| {
        if la + lb < MIN_PIPE_LENGTH {
            log::warn!("{what}: pipe length {:.3e} m clamped to {MIN_PIPE_LENGTH:e} m", la + lb);
            if lb == 0.0 {
                (MIN_PIPE_LENGTH, 0.0)
            } else {
                (MIN_PIPE_LENGTH / 2.0, MIN_PIPE_LENGTH / 2.0)
            }
        } else {
            (la, lb)
        }
    };
    for s in &network.intersections {
        let m = s.midpoint();
        let la = (network.fractures[s.fracture_a].center - m).norm();
        let lb = (m - network.fractures[s.fracture_b].center).norm();
        let (len_a, len_b) = clamp(la, lb, "intersection");
        pipes.push(Pipe {
            a: s.fracture_a,
            b: s.fracture_b,
            width: s.length,
            len_a,
            len_b,
        });
    }
    let side = network.domain.side_length;
    for (wall, node, inlet) in [(0.0, n, true), (side, n + 1, false)] {
        for f in &network.fractures {
            if (inlet && f.touches_inlet) || (!inlet && f.touches_outlet) {
                let (len_a, _) = clamp((f.center.x - wall).abs(), 0.0, "reservoir");
                pipes.push(Pipe {
                    a: f.id,
                    b: node,
                    width: f.face_trace_length(wall),
                    len_a,
                    len_b: 0.0,
                });
            }
        }
    }
    // Keep the graph's (s, i) orientation for inlet links.
    for p in pipes.iter_mut() {
        if p.b == n {
            std::mem::swap(&mut p.a, &mut p.b);
            std::mem::swap(&mut p.len_a, &mut p.len_b);
        }
    }
    PipeModel {
        n_fractures: n,
        pipes,
        apertures: network.fractures.iter().map(|f| f.aperture).collect(),
        viscosity,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Pressure at every node (fractures, inlet, outlet), Pa.
    pub pressures: Vec<f64>,
    /// Signed flow from `pipe.a` to `pipe.b`, m³/s.
    pub pipe_flows: Vec<f64>,
    pub fracture_q: Vec<f64>,
    pub total_throughput: f64,
}

/// Per-fracture flow, half the summed absolute exchange with all neighbors.
pub fn fracture_flow_rate(pm: &PipeModel, pipe_flows: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; pm.n_fractures];
    for (p, &f) in pm.pipes.iter().zip(pipe_flows) {
        for i in [p.a, p.b] {
            if i < pm.n_fractures {
                q[i] += 0.5 * f.abs();
            }
        }
    }
    q
}

/// Solves for pressures with the outlet grounded, then rescales to `total_rate`.
pub fn solve_flow(pm: &PipeModel, total_rate: f64) -> Result<FlowSolution, PipeError> {
    solve_flow_with(pm, &vec![1.0; pm.n_fractures], total_rate)
}

/// As [`solve_flow`], with per-fracture permeability multipliers.
pub fn solve_flow_with(
    pm: &PipeModel,
    factors: &[f64],
    total_rate: f64,
) -> Result<FlowSolution, PipeError> {
    let g = pm.conductances(factors);
    if let Some(i) = g.iter().position(|x| !x.is_finite() || *x <= 0.0) {
        return Err(PipeError::NonFinite(i));
    }
    let endpoints = pm.endpoints();
    let (inlet, outlet) = (pm.inlet(), pm.outlet());
    let through = blocks::through_edges(pm.node_count(), &endpoints, inlet, outlet);
    if !through.iter().any(|&x| x) {
        return Err(PipeError::NoPath);
    }

    // Unknowns are fracture pressures; inlet at 1, outlet at 0.
    let n = pm.n_fractures;
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (p, &gp) in pm.pipes.iter().zip(&g) {
        let (a, b) = (p.a, p.b);
        if a < n {
            k[(a, a)] += gp;
        }
        if b < n {
            k[(b, b)] += gp;
        }
        if a < n && b < n {
            k[(a, b)] -= gp;
            k[(b, a)] -= gp;
        }
        if a == inlet && b < n {
            rhs[b] += gp;
        }
        if b == inlet && a < n {
            rhs[a] += gp;
        }
    }
    // Jacobi scaling keeps the Cholesky factorization well conditioned.
    let d: Vec<f64> = (0..n).map(|i| 1.0 / k[(i, i)].sqrt()).collect();
    if d.iter().any(|x| !x.is_finite()) {
        return Err(PipeError::Singular);
    }
    let ks = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * d[i] * d[j]);
    let rs = DVector::from_fn(n, |i, _| rhs[i] * d[i]);
    let chol = ks.cholesky().ok_or(PipeError::Singular)?;
    let y = chol.solve(&rs);
    let mut pressures: Vec<f64> = (0..n).map(|i| y[i] * d[i]).collect();
    pressures.push(1.0);
    pressures.push(0.0);
    blocks::snap_dead_ends(pm.node_count(), &endpoints, &through, &mut pressures);

    let mut flows: Vec<f64> = pm
        .pipes
        .iter()
        .zip(&g)
        .zip(&through)
        .map(|((p, &gp), &on)| if on { gp * (pressures[p.a] - pressures[p.b]) } else { 0.0 })
        .collect();
    let inflow: f64 = pm
        .pipes
        .iter()
        .zip(&flows)
        .filter(|(p, _)| p.a == inlet)
        .map(|(_, f)| *f)
        .sum();
    if !(inflow > 0.0) {
        return Err(PipeError::Singular);
    }
    let scale = total_rate / inflow;
    pressures.iter_mut().for_each(|p| *p *= scale);
    flows.iter_mut().for_each(|f| *f *= scale);
    let fracture_q = fracture_flow_rate(pm, &flows);
    Ok(FlowSolution {
        pressures,
        pipe_flows: flows,
        fracture_q,
        total_throughput: total_rate,
    })
}

/// Flow rate equal to the network's fracture volume per year, m³/s.
pub fn network_rate(network: &FractureNetwork) -> f64 {
    network.total_volume() / SECONDS_PER_YEAR
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroFeatures {
    pub volumetric_flow_rate: f64,
    pub peclet: f64,
    pub damkohler_advective: f64,
    pub damkohler_diffusive: f64,
}

/// Péclet and Damköhler numbers per fracture for rate constant `k`.
///
/// The surface rate constant enters as `k' = k Vm` (m/s). Truncated
/// fractures keep the radius of their generating disc.
pub fn hydro_features(
    fracture_q: &[f64],
    network: &FractureNetwork,
    k: f64,
    chem: &ChemistryConstants,
) -> Vec<HydroFeatures> {
    let kv = chem.rate_velocity(k);
    network
        .fractures
        .iter()
        .zip(fracture_q)
        .map(|(f, &q)| {
            let s = f.surface_area;
            let r = f.radius;
            HydroFeatures {
                volumetric_flow_rate: q,
                peclet: q * r / (s * chem.diffusion),
                damkohler_advective: if q > 0.0 { (kv * s / q).min(DA_I_CAP) } else { DA_I_CAP },
                damkohler_diffusive: kv * r / chem.diffusion,
            }
        })
        .collect()
}

/// Writes `fracture_id,Q,peclet,da1,da2,pressure_mean`.
pub fn write_flow_dump(
    path: &Path,
    features: &[HydroFeatures],
    fs: &FlowSolution,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fracture_id", "Q", "peclet", "da1", "da2", "pressure_mean"])?;
    for (i, h) in features.iter().enumerate() {
        w.write_record([
            i.to_string(),
            h.volumetric_flow_rate.to_string(),
            h.peclet.to_string(),
            h.damkohler_advective.to_string(),
            h.damkohler_diffusive.to_string(),
            fs.pressures[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, pipes: Vec<Pipe>) -> PipeModel {
        PipeModel {
            n_fractures: n,
            pipes,
            apertures: vec![1e-5; n],
            viscosity: WATER_VISCOSITY,
        }
    }

    fn pipe(a: usize, b: usize, len_a: f64, len_b: f64) -> Pipe {
        Pipe {
            a,
            b,
            width: 1.0,
            len_a,
            len_b,
        }
    }

    #[test]
    fn conductance_arithmetic() {
        let pm = model(2, vec![pipe(0, 1, 0.5, 0.5)]);
        let g = pm.conductances(&[1.0, 1.0])[0];
        assert!((g - 1e-15 / 12e-3).abs() < 1e-27);
        assert!((g - 8.333e-14).abs() < 1e-17);
        let mut wide = pm.clone();
        wide.apertures = vec![2e-5; 2];
        let g2 = wide.conductances(&[1.0, 1.0])[0];
        assert!((g2 / g - 8.0).abs() < 1e-12);
    }

    #[test]
    fn initial_permeability() {
        let k = cubic_law_permeability(1e-5);
        assert!((k - 8.333e-12).abs() < 1e-15);
    }

    #[test]
    fn series_pipes() {
        // inlet - 0 - outlet, two equal pipes.
        let pm = model(1, vec![pipe(1, 0, 0.0, 1.0), pipe(0, 2, 1.0, 0.0)]);
        let fs = solve_flow(&pm, 2e-6).unwrap();
        let p_in = fs.pressures[1];
        assert!((fs.pressures[0] - p_in / 2.0).abs() < 1e-12 * p_in);
        for f in &fs.pipe_flows {
            assert!((f - 2e-6).abs() < 1e-18);
        }
        assert!((fs.fracture_q[0] - 2e-6).abs() < 1e-18);
    }

    #[test]
    fn parallel_pipes_split_by_conductance() {
        // inlet - 0 - outlet and inlet - 1 - outlet; fracture 1 twice as permeable.
        let pm = model(
            2,
            vec![
                pipe(2, 0, 0.0, 1.0),
                pipe(2, 1, 0.0, 1.0),
                pipe(0, 3, 1.0, 0.0),
                pipe(1, 3, 1.0, 0.0),
            ],
        );
        let fs = solve_flow_with(&pm, &[1.0, 2.0], 3.0).unwrap();
        assert!((fs.fracture_q[0] - 1.0).abs() < 1e-12);
        assert!((fs.fracture_q[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dead_end_has_exactly_zero_flow() {
        let pm = model(
            2,
            vec![pipe(0, 1, 0.7, 0.3), pipe(2, 0, 0.0, 1.0), pipe(0, 3, 1.0, 0.0)],
        );
        let fs = solve_flow(&pm, 1e-6).unwrap();
        assert_eq!(fs.pipe_flows[0], 0.0);
        assert_eq!(fs.fracture_q[1], 0.0);
        assert_eq!(fs.pressures[1], fs.pressures[0]);
    }

    #[test]
    fn q_counts_each_exchange_once() {
        let pm = model(1, vec![pipe(1, 0, 0.0, 1.0), pipe(1, 0, 0.0, 1.0), pipe(0, 2, 1.0, 0.0)]);
        let q = fracture_flow_rate(&pm, &[2e-6, 1e-6, 3e-6]);
        assert!((q[0] - 3e-6).abs() < 1e-20);
    }

    #[test]
    fn hydro_arithmetic() {
        use crate::dfn::{DomainBox, Fracture, GenerationParams};
        use crate::geometry::Vec3;
        let f = Fracture::disc(0, Vec3::new(5.0, 5.0, 5.0), Vec3::z(), 1.5, 1e-5, 16);
        let net = FractureNetwork {
            params: GenerationParams::default(),
            domain: DomainBox::default(),
            rng_seed: 0,
            p32_generated: 0.0,
            p32_achieved: 0.0,
            fractures: vec![f.clone(), f],
            intersections: vec![],
        };
        let chem = ChemistryConstants::default();
        let h = hydro_features(&[0.0, 1e-9], &net, 1e-12, &chem);
        assert!((chem.rate_velocity(1e-12) - 2.2688e-17).abs() < 1e-30);
        assert!((h[0].damkohler_diffusive - 3.4032e-5).abs() < 1e-15);
        assert_eq!(h[0].damkohler_diffusive, h[1].damkohler_diffusive);
        assert_eq!(h[0].peclet, 0.0);
        assert_eq!(h[0].damkohler_advective, DA_I_CAP);
        let s = net.fractures[1].surface_area;
        assert_eq!(h[1].peclet, 1e-9 * 1.5 / (s * 1e-12));
        // Pe = 1 exactly at Q = S D / r.
        let q1 = s * 1e-12 / 1.5;
        let h1 = hydro_features(&[q1, q1 * 1.01], &net, 1e-12, &chem);
        assert!(h1[0].peclet < 1.0 + 1e-12 && h1[1].peclet >= 1.0);
    }
}
