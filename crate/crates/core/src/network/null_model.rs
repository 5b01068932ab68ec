//! Strength-preserving randomization by target swaps on the link multiset.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::graph::{NodeIx, TradeGraph};
use super::modularity::{modularity, Partition};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RandomizeStats {
    pub attempts: u64,
    pub swaps: u64,
}

/// RNG for realization `index` of a run seeded with `seed`; streams are
/// independent across indices.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Expands edges into a link multiset (one entry per unit of weight) and
/// performs `E` swap attempts, `E` the total weight. Each attempt draws two
/// links `a→b`, `c→d` uniformly; when all four endpoints differ they become
/// `a→d`, `c→b`. Every node keeps its in- and out-strength.
pub fn randomize_with_rng<R: Rng>(graph: &TradeGraph, rng: &mut R) -> (TradeGraph, RandomizeStats) {
    let mut links: Vec<(NodeIx, NodeIx)> = Vec::with_capacity(graph.total_weight() as usize);
    for e in graph.edges() {
        links.extend(std::iter::repeat_n((e.src, e.dst), e.weight as usize));
    }
    let total = links.len();
    let mut stats = RandomizeStats { attempts: 0, swaps: 0 };
    if total >= 2 {
        for _ in 0..total {
            stats.attempts += 1;
            let i = rng.random_range(0..total);
            let j = rng.random_range(0..total);
            let (a, b) = links[i];
            let (c, d) = links[j];
            if a != b && a != c && a != d && b != c && b != d && c != d {
                links[i] = (a, d);
                links[j] = (c, b);
                stats.swaps += 1;
            }
        }
    } else {
        stats.attempts = total as u64;
    }
    (graph.with_links(links), stats)
}

pub fn randomize(graph: &TradeGraph, seed: u64) -> (TradeGraph, RandomizeStats) {
    randomize_with_rng(graph, &mut realization_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullModelResult {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across realizations.
    pub std_dev: f64,
    /// Standard error of the mean.
    pub sem: f64,
    pub n_realizations: usize,
}

impl NullModelResult {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        let mean = if n == 0 { f64::NAN } else { values.iter().sum::<f64>() / n as f64 };
        let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let std_dev = var.sqrt();
        NullModelResult {
            mean,
            std_dev,
            sem: if n > 0 { std_dev / (n as f64).sqrt() } else { f64::NAN },
            values,
            n_realizations: n,
        }
    }

    /// Distance of `observed` from the null mean in null standard deviations.
    pub fn z_score(&self, observed: f64) -> f64 {
        (observed - self.mean) / self.std_dev
    }
}

/// Modularity of `n` independent randomizations; realization `k` uses
/// [`realization_rng`]`(seed, k)`, so results do not depend on thread count.
pub fn null_modularity(graph: &TradeGraph, partition: &Partition, n: usize, seed: u64) -> Result<NullModelResult> {
    let values = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let (g, _) = randomize_with_rng(graph, &mut realization_rng(seed, k));
            modularity(&g, partition)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullModelResult::from_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_valid_swap_leaves_graph_unchanged() {
        let g = TradeGraph::from_weighted_edges([("a", "b", 1), ("a", "c", 1)], &[]).unwrap();
        let (r, stats) = randomize(&g, 3);
        assert_eq!(r, g);
        assert_eq!(stats.attempts, 2);
        assert_eq!(stats.swaps, 0);
    }

    #[test]
    fn strengths_preserved_and_attempts_counted() {
        let g = TradeGraph::from_weighted_edges(
            [("a", "b", 3), ("c", "d", 2), ("e", "f", 4), ("b", "e", 1), ("f", "a", 2)],
            &[],
        )
        .unwrap();
        for seed in 0..20 {
            let (r, stats) = randomize(&g, seed);
            assert_eq!(r.out_strengths(), g.out_strengths());
            assert_eq!(r.in_strengths(), g.in_strengths());
            assert_eq!(stats.attempts, g.total_weight());
            assert!(r.edges().iter().all(|e| e.src != e.dst));
        }
    }

    #[test]
    fn single_community_null_is_zero() {
        let g = TradeGraph::from_weighted_edges([("a", "b", 3), ("c", "d", 2), ("e", "f", 4)], &[]).unwrap();
        let res = null_modularity(&g, &Partition::single(&g), 10, 1).unwrap();
        assert_eq!(res.values.len(), 10);
        assert!(res.mean.abs() < 1e-15 && res.std_dev < 1e-15);
    }

    #[test]
    fn realizations_are_reproducible() {
        let g = TradeGraph::from_weighted_edges([("a", "b", 3), ("c", "d", 2), ("e", "f", 4)], &[]).unwrap();
        let p = Partition::from_fn(&g, |id| Some(((id.as_bytes()[0] - b'a') / 2).to_string())).unwrap();
        let a = null_modularity(&g, &p, 8, 42).unwrap();
        let b = null_modularity(&g, &p, 8, 42).unwrap();
        assert_eq!(a, b);
    }
}
