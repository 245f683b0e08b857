use nalgebra::{DMatrix, SymmetricEigen};

use super::{blocks, GraphError, NetworkGraph};

/// Combinatorial Laplacian `D - A` over all nodes, including s and t.
pub fn laplacian(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(u, v) in edges {
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
    }
    l
}

/// Moore–Penrose pseudoinverse of a symmetric positive semi-definite matrix.
pub fn laplacian_pseudoinverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let eig = SymmetricEigen::new(l.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = scale * n as f64 * f64::EPSILON * 16.0;
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > tol {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentFlow {
    /// Node potentials for one unit of current from s to t, all nodes.
    pub potentials: Vec<f64>,
    /// Absolute current on every edge, in the graph's edge order.
    pub edge_currents: Vec<f64>,
    /// Half the absolute current through each node; s and t read 1.
    pub node_centrality: Vec<f64>,
}

/// Unit-current flow from s to t on unit resistances.
///
/// Potentials come from the Laplacian pseudoinverse,
/// `p_i = L⁺_is - L⁺_it`. Edges outside the blocks joining s to t carry
/// exactly zero current.
pub fn current_flow(g: &NetworkGraph) -> Result<CurrentFlow, GraphError> {
    let n = g.node_count();
    let (s, t) = (g.source(), g.target());
    let through = blocks::through_edges(n, g.edges(), s, t);
    if !through.iter().any(|&x| x) {
        return Err(GraphError::NoPath);
    }
    let lp = laplacian_pseudoinverse(&laplacian(n, g.edges()));
    let mut potentials: Vec<f64> = (0..n).map(|i| lp[(i, s)] - lp[(i, t)]).collect();
    blocks::snap_dead_ends(n, g.edges(), &through, &mut potentials);
    let edge_currents: Vec<f64> = g
        .edges()
        .iter()
        .zip(&through)
        .map(|(&(u, v), &on)| if on { (potentials[u] - potentials[v]).abs() } else { 0.0 })
        .collect();
    let mut node_centrality = vec![0.0; n];
    for (&(u, v), &i) in g.edges().iter().zip(&edge_currents) {
        node_centrality[u] += 0.5 * i;
        node_centrality[v] += 0.5 * i;
    }
    node_centrality[s] = 1.0;
    node_centrality[t] = 1.0;
    Ok(CurrentFlow {
        potentials,
        edge_currents,
        node_centrality,
    })
}
