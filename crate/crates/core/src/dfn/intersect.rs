use super::{Fracture, IntersectionSegment, MIN_INTERSECTION_LENGTH};
use crate::geometry;

/// Segment shared by two planar fracture polygons.
///
/// Returns `None` for parallel or coplanar fractures and for contacts
/// shorter than [`MIN_INTERSECTION_LENGTH`].
pub fn disc_intersection(fi: &Fracture, fj: &Fracture) -> Option<IntersectionSegment> {
    if fi.vertices.len() < 3 || fj.vertices.len() < 3 {
        return None;
    }
    // Bounding spheres about the generating centers.
    let reach = fi.radius + fj.radius;
    if (fi.center - fj.center).norm() > reach + MIN_INTERSECTION_LENGTH {
        return None;
    }
    let anchor = (fi.center + fj.center) * 0.5;
    let (origin, dir) =
        geometry::plane_plane_line(&fi.center, &fi.normal, &fj.center, &fj.normal, &anchor)?;
    let (a0, a1) = geometry::line_polygon_interval(&fi.vertices, &fi.normal, &origin, &dir)?;
    let (b0, b1) = geometry::line_polygon_interval(&fj.vertices, &fj.normal, &origin, &dir)?;
    let t0 = a0.max(b0);
    let t1 = a1.min(b1);
    if t1 - t0 <= MIN_INTERSECTION_LENGTH {
        return None;
    }
    let p0 = origin + dir * t0;
    let p1 = origin + dir * t1;
    Some(IntersectionSegment {
        fracture_a: fi.id,
        fracture_b: fj.id,
        p0,
        p1,
        length: (p1 - p0).norm(),
    })
}
