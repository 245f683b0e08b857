#![allow(dead_code)]

use fracnet_core::forest::{Dataset, Tree};
use fracnet_core::seed;
use fracnet_core::graph::laplacian;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// `y = x1` with `noise` independent uniform columns.
pub fn synthetic(n: usize, noise: usize, seed: u64) -> Dataset {
    let mut rng = seed::rng(seed);
    let mut names = vec!["x1".to_string()];
    let mut cols = vec![(0..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>()];
    for j in 0..noise {
        names.push(format!("noise{j}"));
        cols.push((0..n).map(|_| rng.random::<f64>()).collect());
    }
    let y = cols[0].clone();
    Dataset::new(names, cols, y, None).unwrap()
}

fn sse(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m).powi(2)).sum()
}

/// Lowest child SSE over every feature and every cut between distinct
/// values, by brute force.
pub fn best_split_sse(data: &Dataset, rows: &[usize]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for f in 0..data.n_features() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| data.value(r, f)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let cut = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<f64>, Vec<f64>) = {
                let l = rows.iter().filter(|&&i| data.value(i, f) <= cut).map(|&i| data.target[i]).collect();
                let r = rows.iter().filter(|&&i| data.value(i, f) > cut).map(|&i| data.target[i]).collect();
                (l, r)
            };
            let s = sse(&l) + sse(&r);
            if best.is_none_or(|b| s < b) {
                best = Some(s);
            }
        }
    }
    best
}

/// Checks every internal node of `tree` against the brute-force optimum on
/// the rows reaching it, and that every leaf is pure or unsplittable.
/// Returns the largest SSE discrepancy seen.
pub fn cart_discrepancy(tree: &Tree, data: &Dataset, rows: &[usize]) -> f64 {
    fn walk(tree: &Tree, data: &Dataset, node: usize, rows: &[usize], worst: &mut f64) {
        let y: Vec<f64> = rows.iter().map(|&r| data.target[r]).collect();
        if tree.is_leaf(node) {
            let splittable = best_split_sse(data, rows).is_some() && sse(&y) > 0.0;
            if splittable {
                *worst = f64::INFINITY;
            }
            return;
        }
        let f = tree.feature[node] as usize;
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| data.value(i, f) <= tree.threshold[node]);
        let ly: Vec<f64> = l.iter().map(|&i| data.target[i]).collect();
        let ry: Vec<f64> = r.iter().map(|&i| data.target[i]).collect();
        let got = sse(&ly) + sse(&ry);
        let want = best_split_sse(data, rows).expect("internal node has a split");
        *worst = worst.max((got - want).abs());
        walk(tree, data, tree.left[node] as usize, &l, worst);
        walk(tree, data, tree.right[node] as usize, &r, worst);
    }
    let mut worst = 0.0;
    walk(tree, data, 0, rows, &mut worst);
    worst
}

/// Betweenness by enumerating every simple path on a tiny graph.
pub fn brute_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    fn walk(adj: &[Vec<usize>], path: &mut Vec<usize>, goal: usize, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == goal {
            out.push(path.clone());
            return;
        }
        for &w in &adj[u] {
            if !path.contains(&w) {
                path.push(w);
                walk(adj, path, goal, out);
                path.pop();
            }
        }
    }
    let mut b = vec![0.0; n];
    if n < 3 {
        return b;
    }
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let mut paths = Vec::new();
            walk(&adj, &mut vec![s], t, &mut paths);
            let Some(shortest) = paths.iter().map(|p| p.len()).min() else { continue };
            let geo: Vec<_> = paths.into_iter().filter(|p| p.len() == shortest).collect();
            for (i, bi) in b.iter_mut().enumerate() {
                if i != s && i != t {
                    let through = geo.iter().filter(|p| p.contains(&i)).count();
                    *bi += through as f64 / geo.len() as f64;
                }
            }
        }
    }
    let norm = ((n - 1) * (n - 2)) as f64;
    b.iter().map(|x| x / norm).collect()
}

/// Potentials by grounding t and solving the reduced Kirchhoff system.
pub fn nodal_potentials(n: usize, edges: &[(usize, usize)], s: usize, t: usize) -> Vec<f64> {
    let l = laplacian(n, edges);
    let keep: Vec<usize> = (0..n).filter(|&i| i != t).collect();
    let m = DMatrix::from_fn(keep.len(), keep.len(), |i, j| l[(keep[i], keep[j])]);
    let rhs = DVector::from_fn(keep.len(), |i, _| if keep[i] == s { 1.0 } else { 0.0 });
    let x = m.lu().solve(&rhs).expect("connected graph");
    let mut p = vec![0.0; n];
    for (i, &k) in keep.iter().enumerate() {
        p[k] = x[i];
    }
    p
}

