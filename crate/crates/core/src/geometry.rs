//! Planar-polygon geometry in 3D.
//!
//! Polygons are convex, stored as ordered vertex lists, and oriented
//! counter-clockwise about the plane normal of the fracture that owns them.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Two unit vectors spanning the plane orthogonal to `normal`.
///
/// The basis is a deterministic function of the normal.
pub fn plane_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let n = normal.normalize();
    // Seed with the axis least aligned with the normal.
    let abs = n.abs();
    let seed = if abs.x <= abs.y && abs.x <= abs.z {
        Vec3::x()
    } else if abs.y <= abs.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = (seed - n * n.dot(&seed)).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Regular `sides`-gon inscribed in the circle of `radius` about `center`.
pub fn regular_polygon(center: &Vec3, normal: &Vec3, radius: f64, sides: usize) -> Vec<Vec3> {
    let (u, v) = plane_basis(normal);
    (0..sides)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / sides as f64;
            center + (u * theta.cos() + v * theta.sin()) * radius
        })
        .collect()
}

/// Area of the inscribed regular `sides`-gon of unit radius divided by π.
pub fn inscribed_area_ratio(sides: usize) -> f64 {
    let n = sides as f64;
    0.5 * n * (std::f64::consts::TAU / n).sin() / std::f64::consts::PI
}

/// Vector area (Newell's method); its norm is the polygon area.
pub fn vector_area(polygon: &[Vec3]) -> Vec3 {
    let mut acc = Vec3::zeros();
    let n = polygon.len();
    if n < 3 {
        return acc;
    }
    // Shift to the first vertex to limit cancellation.
    let o = polygon[0];
    for i in 1..n - 1 {
        acc += (polygon[i] - o).cross(&(polygon[i + 1] - o));
    }
    acc * 0.5
}

pub fn polygon_area(polygon: &[Vec3]) -> f64 {
    vector_area(polygon).norm()
}

/// Clips a polygon against the half-space `sign * (p[axis] - offset) <= 0`.
///
/// Crossing points are snapped onto the plane so that boundary edges are
/// exactly coplanar with the clipping face.
pub fn clip_axis(polygon: &[Vec3], axis: usize, offset: f64, keep_below: bool) -> Vec<Vec3> {
    let dist = |p: &Vec3| {
        if keep_below {
            p[axis] - offset
        } else {
            offset - p[axis]
        }
    };
    let n = polygon.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let da = dist(&a);
        let db = dist(&b);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            let mut p = a + (b - a) * t;
            p[axis] = offset;
            out.push(p);
        }
    }
    dedup_ring(out, 1e-12)
}

/// Drops consecutive duplicates (including wrap-around).
fn dedup_ring(mut pts: Vec<Vec3>, tol: f64) -> Vec<Vec3> {
    pts.dedup_by(|a, b| (*a - *b).norm() <= tol);
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= tol {
        pts.pop();
    }
    pts
}

/// Clips a polygon to the axis-aligned box `[lo, hi]^3`.
pub fn clip_to_box(polygon: &[Vec3], lo: f64, hi: f64) -> Vec<Vec3> {
    let mut poly = polygon.to_vec();
    for axis in 0..3 {
        if poly.len() < 3 {
            break;
        }
        poly = clip_axis(&poly, axis, lo, false);
        if poly.len() < 3 {
            break;
        }
        poly = clip_axis(&poly, axis, hi, true);
    }
    if poly.len() < 3 {
        poly.clear();
    }
    poly
}

/// Parameter interval `[t0, t1]` of the line `origin + t * dir` inside a
/// convex polygon lying in the same plane (with plane normal `normal`).
///
/// Returns `None` when the line misses the polygon.
pub fn line_polygon_interval(
    polygon: &[Vec3],
    normal: &Vec3,
    origin: &Vec3,
    dir: &Vec3,
) -> Option<(f64, f64)> {
    let n = polygon.len();
    if n < 3 {
        return None;
    }
    // Orientation sign so that in-plane edge normals point inward.
    let orient = vector_area(polygon).dot(normal).signum();
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let inward = normal.cross(&(b - a)) * orient;
        // inward . (origin + t dir - a) >= 0
        let c0 = inward.dot(&(origin - a));
        let c1 = inward.dot(dir);
        if c1.abs() < 1e-300 {
            if c0 < 0.0 {
                return None;
            }
            continue;
        }
        let t = -c0 / c1;
        if c1 > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Intersection line of two planes given by point and unit normal.
///
/// The returned origin is the point of the line closest to `anchor`; the
/// direction is unit length. `None` for (near-)parallel planes.
pub fn plane_plane_line(
    p1: &Vec3,
    n1: &Vec3,
    p2: &Vec3,
    n2: &Vec3,
    anchor: &Vec3,
) -> Option<(Vec3, Vec3)> {
    let dir = n1.cross(n2);
    let s = dir.norm();
    if s < 1e-12 {
        return None;
    }
    let dir = dir / s;
    // Solve for the point x with n1.x = n1.p1, n2.x = n2.p2, dir.x = dir.anchor.
    let m = nalgebra::Matrix3::from_rows(&[n1.transpose(), n2.transpose(), dir.transpose()]);
    let rhs = Vec3::new(n1.dot(p1), n2.dot(p2), dir.dot(anchor));
    let origin = m.lu().solve(&rhs)?;
    Some((origin, dir))
}

/// Point-in-convex-polygon test for a point assumed to lie in the plane.
pub fn point_in_convex_polygon(polygon: &[Vec3], normal: &Vec3, p: &Vec3) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let orient = vector_area(polygon).dot(normal).signum();
    (0..n).all(|i| {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        normal.cross(&(b - a)).dot(&(p - a)) * orient >= -1e-12
    })
}
