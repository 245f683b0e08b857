//! Intersection graph of a fracture network and its topological features.
//!
//! Fractures map to nodes `0..n`; two extra nodes stand for the inlet
//! (source `s = n`) and outlet (target `t = n + 1`) boundaries. Every
//! fracture–fracture intersection is one edge, and every boundary-touching
//! fracture gets one edge to `s` or `t`.

pub mod blocks;
mod centrality;
mod current;

use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::dfn::FractureNetwork;

pub use centrality::{betweenness, degree_and_centrality, DegreeFeatures};
pub use current::{current_flow, laplacian, laplacian_pseudoinverse, CurrentFlow};

/// Currents at or below this are treated as zero when extracting the backbone.
pub const BACKBONE_EPS: f64 = 1e-16;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph has no source/target attachment")]
    NoAttachment,
    #[error("degenerate graph: {0} fracture node(s)")]
    Degenerate(usize),
    #[error("no source-target path")]
    NoPath,
    #[error("fracture {0} has no path to the backbone")]
    Unreachable(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n_fractures: usize,
    /// Fracture–fracture edges first, then boundary attachments.
    edges: Vec<(usize, usize)>,
    n_internal: usize,
    adj: Vec<Vec<usize>>,
}

impl NetworkGraph {
    /// Builds a graph from fracture-node edges and boundary attachments.
    pub fn from_parts(
        n_fractures: usize,
        internal: &[(usize, usize)],
        inlet: &[usize],
        outlet: &[usize],
    ) -> Result<NetworkGraph, GraphError> {
        if inlet.is_empty() || outlet.is_empty() {
            return Err(GraphError::NoAttachment);
        }
        let s = n_fractures;
        let t = n_fractures + 1;
        let mut edges = internal.to_vec();
        edges.extend(inlet.iter().map(|&i| (s, i)));
        edges.extend(outlet.iter().map(|&i| (i, t)));
        let mut adj = vec![Vec::new(); n_fractures + 2];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(NetworkGraph {
            n_fractures,
            edges,
            n_internal: internal.len(),
            adj,
        })
    }

    pub fn n_fractures(&self) -> usize {
        self.n_fractures
    }

    pub fn node_count(&self) -> usize {
        self.n_fractures + 2
    }

    pub fn source(&self) -> usize {
        self.n_fractures
    }

    pub fn target(&self) -> usize {
        self.n_fractures + 1
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v >= self.n_fractures
    }

    /// All edges; the first [`Self::internal_edges`] are fracture–fracture.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn internal_edges(&self) -> &[(usize, usize)] {
        &self.edges[..self.n_internal]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn write_edge_list(&self, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let name = |v: usize| {
            if v == self.source() {
                "s".to_string()
            } else if v == self.target() {
                "t".to_string()
            } else {
                v.to_string()
            }
        };
        for &(u, v) in &self.edges {
            writeln!(out, "{} {}", name(u), name(v))?;
        }
        out.flush()
    }
}

/// Maps a pruned network onto its intersection graph.
pub fn to_graph(network: &FractureNetwork) -> Result<NetworkGraph, GraphError> {
    let internal: Vec<_> = network
        .intersections
        .iter()
        .map(|s| (s.fracture_a, s.fracture_b))
        .collect();
    let inlet: Vec<_> = network.fractures.iter().filter(|f| f.touches_inlet).map(|f| f.id).collect();
    let outlet: Vec<_> = network.fractures.iter().filter(|f| f.touches_outlet).map(|f| f.id).collect();
    NetworkGraph::from_parts(network.len(), &internal, &inlet, &outlet)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackbonePartition {
    pub primary: Vec<usize>,
    pub secondary: Vec<usize>,
    /// Membership flag per fracture node.
    pub in_primary: Vec<bool>,
    /// Current per edge of the graph, in edge order.
    pub edge_currents: Vec<f64>,
}

/// Splits fracture nodes into the current-carrying backbone and the rest.
///
/// Only edges with current strictly above `eps` are kept; a fracture is on
/// the backbone if those edges connect it to the source.
pub fn extract_backbone(g: &NetworkGraph, flow: &CurrentFlow, eps: f64) -> BackbonePartition {
    let mut adj = vec![Vec::new(); g.node_count()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if flow.edge_currents[e] > eps {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[g.source()] = true;
    let mut queue = VecDeque::from([g.source()]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let in_primary: Vec<bool> = seen[..g.n_fractures()].to_vec();
    let (primary, secondary): (Vec<usize>, Vec<usize>) =
        (0..g.n_fractures()).partition(|&i| in_primary[i]);
    BackbonePartition {
        primary,
        secondary,
        in_primary,
        edge_currents: flow.edge_currents.clone(),
    }
}

/// Hop count from each fracture to the nearest backbone fracture, along
/// fracture–fracture edges.
pub fn distance_to_backbone(
    g: &NetworkGraph,
    bp: &BackbonePartition,
) -> Result<Vec<usize>, GraphError> {
    let n = g.n_fractures();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &p in &bp.primary {
        dist[p] = 0;
        queue.push_back(p);
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if w < n && dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    match dist.iter().position(|&d| d == usize::MAX) {
        Some(i) => Err(GraphError::Unreachable(i)),
        None => Ok(dist),
    }
}

/// Per-fracture topological features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologicalFeatures {
    pub degree: usize,
    pub degree_centrality: f64,
    pub distance_to_backbone: usize,
    pub betweenness_centrality: f64,
    pub current_flow: f64,
}

/// All topological features plus the backbone they were derived from.
pub fn topological_features(
    g: &NetworkGraph,
) -> Result<(Vec<TopologicalFeatures>, BackbonePartition), GraphError> {
    let deg = degree_and_centrality(g)?;
    let btw = betweenness(g, false);
    let flow = current_flow(g)?;
    let bp = extract_backbone(g, &flow, BACKBONE_EPS);
    let dist = distance_to_backbone(g, &bp)?;
    let feats = (0..g.n_fractures())
        .map(|i| TopologicalFeatures {
            degree: deg[i].degree,
            degree_centrality: deg[i].degree_centrality,
            distance_to_backbone: dist[i],
            betweenness_centrality: btw[i],
            current_flow: flow.node_centrality[i],
        })
        .collect();
    Ok((feats, bp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backbone_of(n: usize, internal: &[(usize, usize)], inlet: &[usize], outlet: &[usize]) -> (NetworkGraph, BackbonePartition) {
        let g = NetworkGraph::from_parts(n, internal, inlet, outlet).unwrap();
        let flow = current_flow(&g).unwrap();
        let bp = extract_backbone(&g, &flow, BACKBONE_EPS);
        (g, bp)
    }

    #[test]
    fn chain_maps_to_path() {
        let g = NetworkGraph::from_parts(3, &[(0, 1), (1, 2)], &[0], &[2]).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.neighbors(g.source()), &[0]);
        assert_eq!(g.neighbors(g.target()), &[2]);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn missing_attachment_is_an_error() {
        assert_eq!(
            NetworkGraph::from_parts(2, &[(0, 1)], &[], &[1]).unwrap_err(),
            GraphError::NoAttachment
        );
    }

    #[test]
    fn dead_end_is_secondary() {
        // s - a(0) - t, a - b(1)
        let (g, bp) = backbone_of(2, &[(0, 1)], &[0], &[0]);
        assert_eq!(bp.primary, vec![0]);
        assert_eq!(bp.secondary, vec![1]);
        assert_eq!(bp.edge_currents[0], 0.0);
        assert_eq!(distance_to_backbone(&g, &bp).unwrap(), vec![0, 1]);
    }

    #[test]
    fn square_is_all_primary() {
        let (_, bp) = backbone_of(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[0], &[2]);
        assert_eq!(bp.primary, vec![0, 1, 2, 3]);
        assert!(bp.secondary.is_empty());
    }

    #[test]
    fn pendant_tree_is_secondary_with_hop_distances() {
        // Backbone 0 - 1, tree 1 - 2 - 3, 2 - 4, 3 - 5, 4 - 6.
        let internal = [(0, 1), (1, 2), (2, 3), (2, 4), (3, 5), (4, 6)];
        let (g, bp) = backbone_of(7, &internal, &[0], &[1]);
        assert_eq!(bp.primary, vec![0, 1]);
        assert_eq!(bp.secondary, vec![2, 3, 4, 5, 6]);
        assert_eq!(distance_to_backbone(&g, &bp).unwrap(), vec![0, 0, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn removing_secondary_keeps_primary() {
        let internal = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)];
        let (_, bp) = backbone_of(5, &internal, &[0], &[1]);
        assert_eq!(bp.primary, vec![0, 1, 2]);
        let (_, bp2) = backbone_of(4, &internal[..4], &[0], &[1]);
        assert_eq!(bp2.primary, vec![0, 1, 2]);
    }

    #[test]
    fn edge_list_dump() {
        let g = NetworkGraph::from_parts(2, &[(0, 1)], &[0], &[1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        g.write_edge_list(&path).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "0 1\ns 0\n1 t\n");
    }
}
