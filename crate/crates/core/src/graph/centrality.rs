use std::collections::VecDeque;

use super::{GraphError, NetworkGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFeatures {
    pub degree: usize,
    pub degree_centrality: f64,
}

/// Degree over fracture–fracture edges, normalized by `n - 1`.
pub fn degree_and_centrality(g: &NetworkGraph) -> Result<Vec<DegreeFeatures>, GraphError> {
    let n = g.n_fractures();
    if n <= 1 {
        return Err(GraphError::Degenerate(n));
    }
    let mut degree = vec![0usize; n];
    for &(u, v) in g.internal_edges() {
        degree[u] += 1;
        degree[v] += 1;
    }
    Ok(degree
        .into_iter()
        .map(|d| DegreeFeatures {
            degree: d,
            degree_centrality: d as f64 / (n - 1) as f64,
        })
        .collect())
}

/// Shortest-path betweenness of every fracture node (Brandes).
///
/// Sums `σ_uv(i) / σ_uv` over ordered pairs and divides by `(n-1)(n-2)`.
/// By default only fracture nodes are endpoints or intermediates; with
/// `include_boundary` the source and target join the node set and `n`
/// counts them. Fewer than three nodes give all zeros.
pub fn betweenness(g: &NetworkGraph, include_boundary: bool) -> Vec<f64> {
    let n_frac = g.n_fractures();
    let n = if include_boundary { g.node_count() } else { n_frac };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let edges = if include_boundary { g.edges() } else { g.internal_edges() };
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    if n < 3 {
        return vec![0.0; n_frac];
    }

    let partial = crate::par::map_range(n, |s| single_source_dependency(&adj, s));
    let mut cb = vec![0.0; n];
    for delta in partial {
        for (c, d) in cb.iter_mut().zip(delta) {
            *c += d;
        }
    }
    let norm = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    cb.truncate(n_frac);
    cb.iter_mut().for_each(|c| *c *= norm);
    cb
}

/// Dependencies `δ_s(v)` accumulated from one BFS source.
fn single_source_dependency(adj: &[Vec<usize>], s: usize) -> Vec<f64> {
    let n = adj.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    sigma[s] = 1.0;
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    let mut delta = vec![0.0; n];
    for &w in order.iter().rev() {
        for &v in &adj[w] {
            if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
        }
    }
    delta[s] = 0.0;
    delta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, internal: &[(usize, usize)]) -> NetworkGraph {
        NetworkGraph::from_parts(n, internal, &[0], &[n - 1]).unwrap()
    }

    fn centralities(g: &NetworkGraph) -> Vec<f64> {
        degree_and_centrality(g).unwrap().iter().map(|d| d.degree_centrality).collect()
    }

    #[test]
    fn degree_examples() {
        assert_eq!(centralities(&graph(3, &[(0, 1), (1, 2), (2, 0)])), vec![1.0; 3]);
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(centralities(&star), vec![1.0, 0.25, 0.25, 0.25, 0.25]);
        let path = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(centralities(&path), vec![0.25, 0.5, 0.5, 0.5, 0.25]);
        // Boundary edges do not count towards degree.
        assert_eq!(degree_and_centrality(&path).unwrap()[0].degree, 1);
        let lone = NetworkGraph::from_parts(1, &[], &[0], &[0]).unwrap();
        assert_eq!(degree_and_centrality(&lone).unwrap_err(), GraphError::Degenerate(1));
    }

    #[test]
    fn betweenness_examples() {
        assert_eq!(betweenness(&graph(3, &[(0, 1), (1, 2)]), false), vec![0.0, 1.0, 0.0]);
        let c4 = betweenness(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), false);
        for b in c4 {
            assert!((b - 1.0 / 6.0).abs() < 1e-15);
        }
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(betweenness(&k4, false), vec![0.0; 4]);
        assert_eq!(betweenness(&graph(2, &[(0, 1)]), false), vec![0.0; 2]);
    }

    #[test]
    fn boundary_nodes_change_betweenness() {
        // s - 0 - 1 - t: with boundary nodes every path from s passes 0.
        let g = graph(2, &[(0, 1)]);
        assert_eq!(betweenness(&g, false), vec![0.0, 0.0]);
        let b = betweenness(&g, true);
        // Path of 4 nodes: inner nodes carry 2 unordered pairs each → 4/(3·2).
        assert!((b[0] - 4.0 / 6.0).abs() < 1e-15 && (b[1] - 4.0 / 6.0).abs() < 1e-15);
    }
}
