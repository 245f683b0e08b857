//! Discrete fracture networks of mono-disperse disc fractures.
//!
//! A network is generated inside a cubic domain whose inlet is the face
//! `x = 0` and whose outlet is the face `x = side_length`. Discs are
//! represented as regular polygons, truncated to the domain, intersected
//! pairwise, and pruned down to the clusters that connect inlet and outlet.

mod generate;
mod intersect;
mod io;
mod prune;
mod truncate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Vec3};

pub use generate::{generate_network, generate_unpruned, intersect_all};
pub use intersect::disc_intersection;
pub use io::{read_network, write_network, NETWORK_FORMAT_VERSION};
pub use prune::prune_isolated;
pub use truncate::truncate_to_domain;

/// Distance under which a vertex is considered to lie on a domain face.
pub const FACE_TOL: f64 = 1e-9;
/// Polygons with less area than this are discarded.
pub const MIN_AREA: f64 = 1e-12;
/// Intersections shorter than this are treated as point contacts.
pub const MIN_INTERSECTION_LENGTH: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DfnError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("disconnected network: no inlet-to-outlet cluster (seed {seed})")]
    Disconnected { seed: u64 },
    #[error("fracture budget of {0} exhausted before reaching the target intensity")]
    Budget(usize),
    #[error("network file: {0}")]
    Io(#[from] std::io::Error),
    #[error("network json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported network format version {0}")]
    Version(u32),
}

impl DfnError {
    /// True for the non-percolating outcome that ensemble drivers skip.
    pub fn is_disconnected(&self) -> bool {
        matches!(self, DfnError::Disconnected { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub side_length: f64,
    pub generation_margin: f64,
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox {
            side_length: 10.0,
            generation_margin: 0.5,
        }
    }
}

impl DomainBox {
    pub fn volume(&self) -> f64 {
        self.side_length.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub side_length: f64,
    pub radius: f64,
    pub target_p32: f64,
    pub aperture: f64,
    pub margin: f64,
    /// Vertices of the regular polygon standing in for each disc.
    pub vertex_count: usize,
    /// Upper bound on accepted fractures before generation gives up.
    pub max_fractures: usize,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            side_length: 10.0,
            radius: 1.5,
            target_p32: 3.25,
            aperture: 1e-5,
            margin: 0.5,
            vertex_count: 16,
            max_fractures: 200_000,
        }
    }
}

impl GenerationParams {
    pub fn domain(&self) -> DomainBox {
        DomainBox {
            side_length: self.side_length,
            generation_margin: self.margin,
        }
    }

    pub fn validate(&self) -> Result<(), DfnError> {
        let bad = |m: &str| Err(DfnError::InvalidParams(m.to_string()));
        if !(self.side_length > 0.0) {
            return bad("side_length must be positive");
        }
        if !(self.margin >= 0.0) {
            return bad("margin must be non-negative");
        }
        if !(self.target_p32 > 0.0) {
            return bad("target_p32 must be positive");
        }
        if !(self.radius > 0.0 && self.radius < self.side_length / 2.0) {
            return bad("radius must lie in (0, side_length / 2)");
        }
        if !(self.aperture > 0.0) {
            return bad("aperture must be positive");
        }
        if self.vertex_count < 3 {
            return bad("vertex_count must be at least 3");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fracture {
    pub id: usize,
    pub center: Vec3,
    /// Unit normal of the fracture plane.
    pub normal: Vec3,
    /// Radius of the generating disc (kept after truncation).
    pub radius: f64,
    pub vertices: Vec<Vec3>,
    pub aperture: f64,
    pub surface_area: f64,
    pub total_volume: f64,
    pub projected_volume: f64,
    pub intersection_area: f64,
    pub touches_inlet: bool,
    pub touches_outlet: bool,
}

impl Fracture {
    /// Untruncated disc fracture.
    pub fn disc(
        id: usize,
        center: Vec3,
        normal: Vec3,
        radius: f64,
        aperture: f64,
        vertex_count: usize,
    ) -> Fracture {
        let normal = normal.normalize();
        let vertices = geometry::regular_polygon(&center, &normal, radius, vertex_count);
        let mut f = Fracture {
            id,
            center,
            normal,
            radius,
            vertices,
            aperture,
            surface_area: 0.0,
            total_volume: 0.0,
            projected_volume: 0.0,
            intersection_area: 0.0,
            touches_inlet: false,
            touches_outlet: false,
        };
        f.refresh_geometry();
        f
    }

    /// Recomputes area, volumes from the current polygon and aperture.
    pub fn refresh_geometry(&mut self) {
        self.surface_area = geometry::polygon_area(&self.vertices);
        self.total_volume = self.surface_area * self.aperture;
        self.projected_volume = projected_volume(self.total_volume, &self.normal);
    }

    /// Summed length of polygon edges lying on the face `x = x_face`.
    pub fn face_trace_length(&self, x_face: f64) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .filter_map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let on = (a.x - x_face).abs() <= FACE_TOL && (b.x - x_face).abs() <= FACE_TOL;
                on.then(|| (b - a).norm())
            })
            .sum()
    }
}

/// Volume component aligned with the mean flow direction (+x).
pub fn projected_volume(volume: f64, normal: &Vec3) -> f64 {
    volume * (normal.y * normal.y + normal.z * normal.z).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSegment {
    #[serde(rename = "a")]
    pub fracture_a: usize,
    #[serde(rename = "b")]
    pub fracture_b: usize,
    pub p0: Vec3,
    pub p1: Vec3,
    pub length: f64,
}

impl IntersectionSegment {
    pub fn midpoint(&self) -> Vec3 {
        (self.p0 + self.p1) * 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractureNetwork {
    pub params: GenerationParams,
    pub domain: DomainBox,
    pub rng_seed: u64,
    /// Intensity after truncation, before pruning.
    pub p32_generated: f64,
    /// Intensity of the fractures currently in the network.
    pub p32_achieved: f64,
    pub fractures: Vec<Fracture>,
    pub intersections: Vec<IntersectionSegment>,
}

impl FractureNetwork {
    pub fn len(&self) -> usize {
        self.fractures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractures.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.fractures.iter().map(|f| f.surface_area).sum()
    }

    pub fn total_volume(&self) -> f64 {
        self.fractures.iter().map(|f| f.total_volume).sum()
    }

    pub fn recompute_p32(&mut self) {
        self.p32_achieved = self.total_area() / self.domain.volume();
    }

    /// Sets each fracture's intersection area from the intersection list.
    pub fn recompute_intersection_areas(&mut self) {
        let mut lengths = vec![0.0; self.fractures.len()];
        for s in &self.intersections {
            lengths[s.fracture_a] += s.length;
            lengths[s.fracture_b] += s.length;
        }
        for (f, l) in self.fractures.iter_mut().zip(lengths) {
            f.intersection_area = f.aperture * l;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFeatures {
    pub surface_area: f64,
    pub total_volume: f64,
    pub projected_volume: f64,
    pub intersection_area: f64,
}

/// Per-fracture geometric features, indexed like `network.fractures`.
pub fn geometric_features(network: &FractureNetwork) -> Vec<GeometricFeatures> {
    let mut lengths = vec![0.0; network.fractures.len()];
    for s in &network.intersections {
        lengths[s.fracture_a] += s.length;
        lengths[s.fracture_b] += s.length;
    }
    network
        .fractures
        .iter()
        .zip(lengths)
        .map(|(f, l)| {
            let total_volume = f.surface_area * f.aperture;
            GeometricFeatures {
                surface_area: f.surface_area,
                total_volume,
                projected_volume: projected_volume(total_volume, &f.normal),
                intersection_area: f.aperture * l,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lone(normal: Vec3) -> FractureNetwork {
        let f = Fracture::disc(0, Vec3::new(5.0, 5.0, 5.0), normal, 1.5, 1e-5, 16);
        FractureNetwork {
            params: GenerationParams::default(),
            domain: DomainBox::default(),
            rng_seed: 0,
            p32_generated: 0.0,
            p32_achieved: 0.0,
            fractures: vec![f],
            intersections: vec![],
        }
    }

    #[test]
    fn projected_volume_follows_normal() {
        let g = geometric_features(&lone(Vec3::x()));
        assert_eq!(g[0].projected_volume, 0.0);
        let g = geometric_features(&lone(Vec3::z()));
        assert_eq!(g[0].projected_volume, g[0].total_volume);
        assert_eq!(g[0].intersection_area, 0.0);
    }

    #[test]
    fn intersection_area_sums_lengths() {
        let mut net = lone(Vec3::z());
        for i in 1..3 {
            let mut f = net.fractures[0].clone();
            f.id = i;
            net.fractures.push(f);
        }
        let seg = |a, b, length| IntersectionSegment {
            fracture_a: a,
            fracture_b: b,
            p0: Vec3::zeros(),
            p1: Vec3::zeros(),
            length,
        };
        net.intersections = vec![seg(0, 1, 1.2), seg(0, 2, 0.8)];
        let g = geometric_features(&net);
        assert!((g[0].intersection_area - 2.0e-5).abs() < 1e-18);
        assert!((g[1].intersection_area - 1.2e-5).abs() < 1e-18);
    }

    #[test]
    fn volume_is_area_times_aperture() {
        let f = Fracture::disc(0, Vec3::zeros(), Vec3::new(1.0, 2.0, 3.0), 1.5, 1e-5, 16);
        assert_eq!(f.total_volume, f.surface_area * f.aperture);
        assert!((f.normal.norm() - 1.0).abs() < 1e-12);
        let disc = std::f64::consts::PI * 1.5 * 1.5;
        let deficit = 1.0 - geometry::inscribed_area_ratio(16);
        assert!(f.surface_area <= disc);
        assert!((disc - f.surface_area) / disc <= deficit + 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(GenerationParams::default().validate().is_ok());
        let bad = GenerationParams {
            radius: 6.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GenerationParams {
            target_p32: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
