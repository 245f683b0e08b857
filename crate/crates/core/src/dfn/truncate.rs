use super::{DomainBox, Fracture, FACE_TOL, MIN_AREA};
use crate::geometry;

/// Clips a fracture to the domain box.
///
/// Returns `None` when nothing (or only a sliver below [`MIN_AREA`])
/// remains. Boundary flags are set from clipped edges lying on the inlet
/// (`x = 0`) or outlet (`x = side_length`) faces.
pub fn truncate_to_domain(f: &Fracture, domain: &DomainBox) -> Option<Fracture> {
    if f.vertices.is_empty() {
        return None;
    }
    let l = domain.side_length;
    let clipped = geometry::clip_to_box(&f.vertices, 0.0, l);
    if clipped.len() < 3 {
        return None;
    }
    let mut out = f.clone();
    out.vertices = clipped;
    out.refresh_geometry();
    if out.surface_area < MIN_AREA {
        return None;
    }
    out.touches_inlet = out.face_trace_length(0.0) > FACE_TOL;
    out.touches_outlet = out.face_trace_length(l) > FACE_TOL;
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use rand::Rng;

    #[test]
    fn interior_fracture_is_unchanged() {
        let f = Fracture::disc(3, Vec3::new(5.0, 5.0, 5.0), Vec3::new(1.0, 1.0, 0.2), 1.5, 1e-5, 16);
        let t = truncate_to_domain(&f, &DomainBox::default()).unwrap();
        assert_eq!(t, f);
    }

    #[test]
    fn disc_on_inlet_face_is_halved() {
        let f = Fracture::disc(0, Vec3::new(0.0, 5.0, 5.0), Vec3::y(), 1.5, 1e-5, 16);
        let t = truncate_to_domain(&f, &DomainBox::default()).unwrap();
        assert!((t.surface_area - f.surface_area / 2.0).abs() < 1e-12);
        assert!(t.touches_inlet);
        assert!(!t.touches_outlet);
        assert_eq!(t.total_volume, t.surface_area * t.aperture);
    }

    #[test]
    fn outside_fracture_is_discarded() {
        let f = Fracture::disc(0, Vec3::new(-3.0, 5.0, 5.0), Vec3::y(), 1.5, 1e-5, 16);
        assert!(truncate_to_domain(&f, &DomainBox::default()).is_none());
    }

    /// Monte-Carlo oracle: fraction of uniform samples from the untruncated
    /// polygon that fall inside the box.
    fn monte_carlo_area(f: &Fracture, side: f64, samples: usize) -> f64 {
        let (u, v) = geometry::plane_basis(&f.normal);
        let mut rng = crate::seed::rng(99);
        let mut hits = 0usize;
        let mut inside_poly = 0usize;
        while inside_poly < samples {
            let a: f64 = rng.random_range(-f.radius..f.radius);
            let b: f64 = rng.random_range(-f.radius..f.radius);
            let p = f.center + u * a + v * b;
            if !geometry::point_in_convex_polygon(&f.vertices, &f.normal, &p) {
                continue;
            }
            inside_poly += 1;
            if (0..3).all(|k| p[k] >= 0.0 && p[k] <= side) {
                hits += 1;
            }
        }
        f.surface_area * hits as f64 / samples as f64
    }

    #[test]
    fn corner_disc_matches_monte_carlo() {
        let f = Fracture::disc(0, Vec3::zeros(), Vec3::new(0.4, -0.7, 0.59), 1.5, 1e-5, 16);
        let t = truncate_to_domain(&f, &DomainBox::default()).unwrap();
        let oracle = monte_carlo_area(&f, 10.0, 200_000);
        assert!((t.surface_area - oracle).abs() / oracle < 0.01, "{} vs {}", t.surface_area, oracle);
        assert!(t.surface_area < f.surface_area / 2.0);
        assert!(t.touches_inlet);
    }
}
