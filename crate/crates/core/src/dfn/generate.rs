use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    disc_intersection, prune_isolated, truncate_to_domain, DfnError, Fracture, FractureNetwork,
    GenerationParams, IntersectionSegment,
};
use crate::geometry::Vec3;
use crate::seed;

/// Isotropic unit normal from three independent standard normals.
fn sample_normal<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Places truncated discs until the target intensity is reached.
///
/// Centers are uniform in the margin-expanded box; intensity is measured
/// over the un-expanded domain after truncation. Intersections are not
/// computed and nothing is pruned.
pub fn generate_unpruned(params: &GenerationParams, seed: u64) -> Result<FractureNetwork, DfnError> {
    params.validate()?;
    let domain = params.domain();
    let lo = -params.margin;
    let hi = params.side_length + params.margin;
    let target_area = params.target_p32 * domain.volume();
    let mut rng = seed::rng(seed);
    let mut fractures = Vec::new();
    let mut area = 0.0;
    while area < target_area {
        if fractures.len() >= params.max_fractures {
            return Err(DfnError::Budget(params.max_fractures));
        }
        let center = Vec3::new(
            rng.random_range(lo..hi),
            rng.random_range(lo..hi),
            rng.random_range(lo..hi),
        );
        let normal = sample_normal(&mut rng);
        let disc = Fracture::disc(
            fractures.len(),
            center,
            normal,
            params.radius,
            params.aperture,
            params.vertex_count,
        );
        if let Some(f) = truncate_to_domain(&disc, &domain) {
            area += f.surface_area;
            fractures.push(f);
        }
    }
    let mut net = FractureNetwork {
        params: *params,
        domain,
        rng_seed: seed,
        p32_generated: 0.0,
        p32_achieved: 0.0,
        fractures,
        intersections: Vec::new(),
    };
    net.recompute_p32();
    net.p32_generated = net.p32_achieved;
    Ok(net)
}

/// All pairwise intersections, ordered by `(a, b)` with `a < b`.
pub fn intersect_all(fractures: &[Fracture]) -> Vec<IntersectionSegment> {
    let per_row = crate::par::map_range(fractures.len(), |i| {
        let fi = &fractures[i];
        fractures[i + 1..]
            .iter()
            .filter_map(|fj| disc_intersection(fi, fj))
            .collect::<Vec<_>>()
    });
    per_row.into_iter().flatten().collect()
}

/// Generates, intersects and prunes a network.
///
/// A realization without an inlet-to-outlet cluster is reported as
/// [`DfnError::Disconnected`]; ensemble drivers skip it and move on to the
/// next seed.
pub fn generate_network(params: &GenerationParams, seed: u64) -> Result<FractureNetwork, DfnError> {
    let mut net = generate_unpruned(params, seed)?;
    net.intersections = intersect_all(&net.fractures);
    net.recompute_intersection_areas();
    prune_isolated(&net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaches_target_intensity() {
        let params = GenerationParams::default();
        let net = generate_unpruned(&params, 11).unwrap();
        assert!(net.p32_generated >= params.target_p32);
        let last = net.fractures.last().unwrap().surface_area / 1000.0;
        assert!(net.p32_generated - last < params.target_p32);
    }

    #[test]
    fn full_scale_network() {
        let params = GenerationParams::default();
        let net = generate_network(&params, 1).unwrap();
        assert!(net.p32_generated >= 3.25);
        assert!(net.p32_achieved <= net.p32_generated);
        assert!(net.len() >= 100 && net.len() < 1000, "{}", net.len());
    }

    #[test]
    fn deterministic_per_seed() {
        let params = GenerationParams {
            target_p32: 1.0,
            ..Default::default()
        };
        let a = generate_network(&params, 5).unwrap();
        let b = generate_network(&params, 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = generate_unpruned(&params, 6).unwrap();
        let d = generate_unpruned(&params, 5).unwrap();
        assert_ne!(c.fractures.len(), 0);
        assert_ne!(c.fractures[0].center, d.fractures[0].center);
        assert_eq!(c.params, d.params);
    }

    #[test]
    fn single_fracture_network() {
        // Huge domain: one polygon meets the target and cannot span it.
        let probe = Fracture::disc(0, Vec3::zeros(), Vec3::z(), 1.5, 1e-5, 16);
        let side: f64 = 1000.0;
        let params = GenerationParams {
            side_length: side,
            target_p32: probe.surface_area / side.powi(3),
            margin: 0.0,
            ..Default::default()
        };
        let net = generate_unpruned(&params, 3).unwrap();
        assert_eq!(net.fractures.len(), 1);
        assert!(intersect_all(&net.fractures).is_empty());
        let err = generate_network(&params, 3).unwrap_err();
        assert!(err.is_disconnected());
    }

    #[test]
    fn normals_are_isotropic() {
        let mut rng = seed::rng(42);
        let n = 20_000;
        let mut sum = Vec3::zeros();
        let mut sq = Vec3::zeros();
        for _ in 0..n {
            let v = sample_normal(&mut rng);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            sum += v;
            sq += v.component_mul(&v);
        }
        for k in 0..3 {
            let mean = sum[k] / n as f64;
            let var = sq[k] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!(mean.abs() < 3.0 * se, "component {k}: {mean} vs {se}");
        }
    }
}
