//! Biconnected blocks and the block–cut path between two terminals.
//!
//! A steady two-terminal flow only runs through the blocks on the
//! block–cut tree path between the terminals. Everything else hangs off a
//! cut vertex and carries exactly zero net flow, which a dense solve only
//! reproduces up to roundoff. [`through_edges`] identifies the carrying
//! edges so callers can pin the rest to zero.

use std::collections::VecDeque;

/// Block id of every edge (Hopcroft–Tarjan, iterative).
pub fn biconnected_blocks(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    let mut block = vec![usize::MAX; edges.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut n_blocks = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    // Frames: (vertex, edge used to enter, next adjacency position).
    let mut frames: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        frames.push((root, usize::MAX, 0));
        while let Some(&mut (u, via, ref mut pos)) = frames.last_mut() {
            if *pos < adj[u].len() {
                let (w, e) = adj[u][*pos];
                *pos += 1;
                if e == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(e);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    frames.push((w, e, 0));
                } else if disc[w] < disc[u] {
                    edge_stack.push(e);
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(&(p, _, _)) = frames.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        while let Some(e) = edge_stack.pop() {
                            block[e] = n_blocks;
                            if e == via {
                                break;
                            }
                        }
                        n_blocks += 1;
                    }
                }
            }
        }
    }
    block
}

/// Marks the edges lying in a block on the block–cut path from `s` to `t`.
///
/// Returns all `false` when `s` and `t` are disconnected.
pub fn through_edges(n: usize, edges: &[(usize, usize)], s: usize, t: usize) -> Vec<bool> {
    let block = biconnected_blocks(n, edges);
    let n_blocks = block.iter().copied().filter(|&b| b != usize::MAX).max().map_or(0, |m| m + 1);
    // Block–vertex incidence tree: blocks are 0..n_blocks, vertex v is n_blocks + v.
    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); n_blocks + n];
    let mut seen = std::collections::HashSet::new();
    for (e, &(u, v)) in edges.iter().enumerate() {
        let b = block[e];
        for x in [u, v] {
            if seen.insert((b, x)) {
                tree[b].push(n_blocks + x);
                tree[n_blocks + x].push(b);
            }
        }
    }
    let start = n_blocks + s;
    let goal = n_blocks + t;
    let mut parent = vec![usize::MAX; tree.len()];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if x == goal {
            break;
        }
        for &y in &tree[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut on_path = vec![false; n_blocks];
    if s != t && parent[goal] != usize::MAX {
        let mut x = goal;
        while x != start {
            if x < n_blocks {
                on_path[x] = true;
            }
            x = parent[x];
        }
    }
    block.iter().map(|&b| b != usize::MAX && on_path[b]).collect()
}

/// Replaces the potential of every vertex hanging off the through-flow
/// blocks by the potential of the vertex it hangs from.
pub fn snap_dead_ends(n: usize, edges: &[(usize, usize)], through: &[bool], potential: &mut [f64]) {
    let mut anchored = vec![false; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        if through[e] {
            anchored[u] = true;
            anchored[v] = true;
        } else {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| anchored[v]).collect();
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !anchored[w] {
                anchored[w] = true;
                potential[w] = potential[u];
                queue.push_back(w);
            }
        }
    }
}
