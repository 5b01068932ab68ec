use crate::network::{NodeIx, TradeGraph};

/// Distinct in-neighbors plus distinct out-neighbors of `id`; 0 when the
/// node is not in the graph.
pub fn degree_centrality(graph: &TradeGraph, id: &str) -> usize {
    match graph.index_of(id) {
        Some(ix) => degrees(graph)[ix as usize],
        None => 0,
    }
}

/// [`degree_centrality`] of every node, by node index.
pub fn degrees(graph: &TradeGraph) -> Vec<usize> {
    let mut deg = vec![0usize; graph.n_nodes()];
    for e in graph.edges() {
        deg[e.src as usize] += 1;
        deg[e.dst as usize] += 1;
    }
    deg
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankOptions {
    pub damping: f64,
    /// Stop once the L1 error bound `d/(1−d)·‖xₖ − xₖ₋₁‖₁` drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        PageRankOptions { damping: 0.85, tol: 1e-9, max_iter: 1000 }
    }
}

/// Weighted PageRank by power iteration, by node index. A walker at `u`
/// follows out-edge `u→v` with probability `w(u,v)/s_out(u)`; dangling
/// nodes and the teleport share `1 − damping` spread uniformly. `init`
/// (any non-negative vector, renormalized) can warm-start the iteration.
pub fn pagerank(graph: &TradeGraph, opts: PageRankOptions, init: Option<&[f64]>) -> Vec<f64> {
    let n = graph.n_nodes();
    if n == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / n as f64;
    let mut x: Vec<f64> = match init {
        Some(v) if v.len() == n && v.iter().sum::<f64>() > 0.0 => {
            let s: f64 = v.iter().sum();
            v.iter().map(|p| p / s).collect()
        }
        _ => vec![uniform; n],
    };
    let inv_out: Vec<f64> =
        (0..n as NodeIx).map(|u| graph.out_strength(u)).map(|s| if s == 0 { 0.0 } else { 1.0 / s as f64 }).collect();
    let mut next = vec![0.0; n];
    for _ in 0..opts.max_iter {
        let dangling: f64 = (0..n).filter(|&u| inv_out[u] == 0.0).map(|u| x[u]).sum();
        let base = (1.0 - opts.damping) * uniform + opts.damping * dangling * uniform;
        next.iter_mut().for_each(|v| *v = base);
        for e in graph.edges() {
            next[e.dst as usize] += opts.damping * x[e.src as usize] * e.weight as f64 * inv_out[e.src as usize];
        }
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff * opts.damping / (1.0 - opts.damping) < opts.tol {
            break;
        }
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn degree_counts_unique_links() {
        let g = TradeGraph::from_weighted_edges(
            [("x", "s1", 1), ("x", "s2", 4), ("x", "s3", 1), ("b1", "x", 2), ("b2", "x", 1), ("y", "z", 100)],
            &[],
        )
        .unwrap();
        assert_eq!(degree_centrality(&g, "x"), 5);
        assert_eq!(degree_centrality(&g, "y"), 1);
        assert_eq!(degree_centrality(&g, "nobody"), 0);
    }

    #[test]
    fn two_cycle_is_uniform() {
        let g = TradeGraph::from_weighted_edges([("a", "b", 3), ("b", "a", 1)], &[]).unwrap();
        let pr = pagerank(&g, PageRankOptions::default(), None);
        assert!((pr[0] - 0.5).abs() < 1e-9 && (pr[1] - 0.5).abs() < 1e-9);
    }

    /// Stationary vector of the dense Google matrix from the linear system
    /// `(Gᵀ − I) x = 0`, `Σx = 1`.
    fn dense_pagerank(n: usize, edges: &[(usize, usize, f64)], d: f64) -> Vec<f64> {
        let mut p = DMatrix::<f64>::zeros(n, n);
        let mut out = vec![0.0; n];
        for &(u, _, w) in edges {
            out[u] += w;
        }
        for &(u, v, w) in edges {
            p[(u, v)] += w / out[u];
        }
        for u in 0..n {
            if out[u] == 0.0 {
                for v in 0..n {
                    p[(u, v)] = 1.0 / n as f64;
                }
            }
        }
        let g = p.map(|v| d * v).add_scalar((1.0 - d) / n as f64);
        let mut a = g.transpose() - DMatrix::identity(n, n);
        a.row_mut(n - 1).fill(1.0);
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        a.lu().solve(&b).unwrap().iter().copied().collect()
    }

    #[test]
    fn star_into_hub_matches_dense_solve() {
        let g = TradeGraph::from_weighted_edges(
            [("l1", "hub", 1), ("l2", "hub", 1), ("l3", "hub", 1), ("l4", "hub", 1)],
            &[],
        )
        .unwrap();
        let pr = pagerank(&g, PageRankOptions::default(), None);
        let hub = g.index_of("hub").unwrap() as usize;
        let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.src as usize, e.dst as usize, 1.0)).collect();
        let oracle = dense_pagerank(5, &edges, 0.85);
        for (a, b) in pr.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        // hub: x_h = 0.15/5 + 0.85 (4 x_l + x_h / 5), leaves: x_l = 0.15/5 + 0.85 x_h / 5
        let xl = pr[(hub + 1) % 5];
        assert!((pr[hub] - (0.03 + 0.85 * (4.0 * xl + pr[hub] / 5.0))).abs() < 1e-9);
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_random_graph_matches_dense_solve_and_scaling() {
        let edges = [(0, 1, 3u64), (1, 2, 1), (2, 0, 2), (2, 3, 5), (3, 1, 1), (4, 2, 7), (1, 4, 2), (0, 5, 1)];
        let names = ["a", "b", "c", "d", "e", "f"];
        let g = TradeGraph::from_weighted_edges(edges.iter().map(|&(u, v, w)| (names[u], names[v], w)), &[]).unwrap();
        let pr = pagerank(&g, PageRankOptions::default(), None);
        let dense: Vec<(usize, usize, f64)> = edges.iter().map(|&(u, v, w)| (u, v, w as f64)).collect();
        let oracle = dense_pagerank(6, &dense, 0.85);
        for (a, b) in pr.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
        let scaled =
            TradeGraph::from_weighted_edges(edges.iter().map(|&(u, v, w)| (names[u], names[v], w * 13)), &[]).unwrap();
        let pr2 = pagerank(&scaled, PageRankOptions::default(), None);
        assert!(pr.iter().zip(&pr2).all(|(a, b)| (a - b).abs() < 1e-9));
        let warm = pagerank(&g, PageRankOptions::default(), Some(&[1.0, 0.0, 0.0, 0.0, 0.0, 5.0]));
        assert!(pr.iter().zip(&warm).all(|(a, b)| (a - b).abs() < 1e-8));
    }
}
