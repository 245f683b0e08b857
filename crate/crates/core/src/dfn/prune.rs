use std::collections::VecDeque;

use super::{DfnError, FractureNetwork};

fn reachable(adj: &[Vec<usize>], starts: impl Iterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in starts {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Keeps only the fractures of clusters that touch both inlet and outlet.
///
/// Surviving fractures are renumbered `0..n` in their original order and the
/// intersection list is remapped accordingly.
pub fn prune_isolated(network: &FractureNetwork) -> Result<FractureNetwork, DfnError> {
    let n = network.fractures.len();
    let mut adj = vec![Vec::new(); n];
    for s in &network.intersections {
        adj[s.fracture_a].push(s.fracture_b);
        adj[s.fracture_b].push(s.fracture_a);
    }
    let from_inlet = reachable(
        &adj,
        network.fractures.iter().filter(|f| f.touches_inlet).map(|f| f.id),
    );
    let from_outlet = reachable(
        &adj,
        network.fractures.iter().filter(|f| f.touches_outlet).map(|f| f.id),
    );
    let keep: Vec<bool> = (0..n).map(|i| from_inlet[i] && from_outlet[i]).collect();
    if !keep.iter().any(|&k| k) {
        return Err(DfnError::Disconnected {
            seed: network.rng_seed,
        });
    }
    let mut new_id = vec![usize::MAX; n];
    let mut fractures = Vec::new();
    for (i, f) in network.fractures.iter().enumerate() {
        if keep[i] {
            new_id[i] = fractures.len();
            let mut f = f.clone();
            f.id = new_id[i];
            fractures.push(f);
        }
    }
    let intersections = network
        .intersections
        .iter()
        .filter(|s| keep[s.fracture_a] && keep[s.fracture_b])
        .map(|s| {
            let mut s = s.clone();
            s.fracture_a = new_id[s.fracture_a];
            s.fracture_b = new_id[s.fracture_b];
            s
        })
        .collect();
    let mut out = FractureNetwork {
        fractures,
        intersections,
        ..network.clone()
    };
    out.recompute_intersection_areas();
    out.recompute_p32();
    Ok(out)
}
