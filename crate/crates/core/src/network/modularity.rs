use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use super::graph::TradeGraph;
use crate::error::{Error, Result};

/// Community label for every node of a graph, stored by node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<u32>,
    names: Vec<String>,
}

impl Partition {
    /// Every graph node must have a label.
    pub fn from_map(graph: &TradeGraph, map: &HashMap<String, String>) -> Result<Self> {
        Self::from_fn(graph, |id| map.get(id).cloned())
    }

    pub fn from_fn<F>(graph: &TradeGraph, mut label: F) -> Result<Self>
    where
        F: FnMut(&str) -> Option<String>,
    {
        let raw: Vec<String> = graph
            .ids()
            .iter()
            .map(|id| label(id).ok_or_else(|| Error::InvalidArgument(format!("node `{id}` has no community"))))
            .collect::<Result<_>>()?;
        let mut names: Vec<String> = raw.clone();
        names.sort();
        names.dedup();
        let ix: HashMap<&str, u32> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let labels = raw.iter().map(|r| ix[r.as_str()]).collect();
        Ok(Partition { labels, names })
    }

    /// Labels from node metadata `top_collection`.
    pub fn by_top_collection(graph: &TradeGraph) -> Result<Self> {
        Self::from_fn(graph, |id| {
            let ix = graph.index_of(id)?;
            graph.meta(ix).top_collection.clone()
        })
    }

    pub fn single(graph: &TradeGraph) -> Self {
        Partition { labels: vec![0; graph.n_nodes()], names: vec!["all".into()] }
    }

    pub fn label(&self, ix: u32) -> u32 {
        self.labels[ix as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn name(&self, label: u32) -> &str {
        &self.names[label as usize]
    }

    pub fn n_communities(&self) -> usize {
        self.names.len()
    }

    /// `node,community` CSV.
    pub fn write_csv<W: Write>(&self, graph: &TradeGraph, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node", "community"])?;
        for (i, id) in graph.ids().iter().enumerate() {
            w.write_record([id.as_str(), self.name(self.labels[i])])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Directed weighted modularity
/// `Q = (1/W) sum_ij [A_ij - s_i^out s_j^in / W] delta(c_i, c_j)`.
///
/// Computed per community as `sum_c [W_cc / W - S_c^out S_c^in / W^2]`.
pub fn modularity(graph: &TradeGraph, partition: &Partition) -> Result<f64> {
    if partition.labels.len() != graph.n_nodes() {
        return Err(Error::InvalidArgument("partition does not cover the graph".into()));
    }
    let w = graph.total_weight();
    if w == 0 {
        return Err(Error::EmptyGraph);
    }
    let w = w as f64;
    let k = partition.n_communities();
    let mut internal = vec![0u64; k];
    let mut s_out = vec![0u64; k];
    let mut s_in = vec![0u64; k];
    for e in graph.edges() {
        let (cs, cd) = (partition.label(e.src), partition.label(e.dst));
        if cs == cd {
            internal[cs as usize] += e.weight;
        }
    }
    for (i, &c) in partition.labels.iter().enumerate() {
        s_out[c as usize] += graph.out_strength(i as u32);
        s_in[c as usize] += graph.in_strength(i as u32);
    }
    let q = (0..k).map(|c| internal[c] as f64 / w - (s_out[c] as f64 / w) * (s_in[c] as f64 / w)).sum();
    Ok(q)
}

/// Community sizes by label name, for reports.
pub fn community_sizes(partition: &Partition) -> BTreeMap<String, usize> {
    let mut sizes = BTreeMap::new();
    for &l in &partition.labels {
        *sizes.entry(partition.name(l).to_string()).or_default() += 1;
    }
    sizes
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;

    /// Dense double sum over all ordered node pairs.
    fn brute_force(graph: &TradeGraph, p: &Partition) -> f64 {
        let n = graph.n_nodes();
        let mut a = vec![vec![0.0; n]; n];
        for e in graph.edges() {
            a[e.src as usize][e.dst as usize] += e.weight as f64;
        }
        let w: f64 = a.iter().flatten().sum();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if p.label(i as u32) == p.label(j as u32) {
                    let so = graph.out_strength(i as u32) as f64;
                    let si = graph.in_strength(j as u32) as f64;
                    q += a[i][j] - so * si / w;
                }
            }
        }
        q / w
    }

    #[test]
    fn two_reciprocal_pairs() {
        let g =
            TradeGraph::from_weighted_edges([("A", "B", 1), ("B", "A", 1), ("C", "D", 1), ("D", "C", 1)], &[]).unwrap();
        let map: HashMap<String, String> =
            [("A", "x"), ("B", "x"), ("C", "y"), ("D", "y")].map(|(a, b)| (a.into(), b.into())).into();
        let p = Partition::from_map(&g, &map).unwrap();
        // hand sum: each community has internal weight 2 and S_out = S_in = 2, W = 4
        // Q = 2 * (2/4 - (2/4)(2/4)) = 0.5
        assert!((modularity(&g, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!((brute_force(&g, &p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_community_is_zero() {
        let g =
            TradeGraph::from_weighted_edges([("a", "b", 3), ("b", "c", 1), ("c", "a", 2), ("a", "c", 5)], &[]).unwrap();
        assert!(modularity(&g, &Partition::single(&g)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn empty_graph_and_missing_labels_error() {
        let g = TradeGraph::from_weighted_edges(std::iter::empty(), &["a"]).unwrap();
        assert!(matches!(modularity(&g, &Partition::single(&g)), Err(Error::EmptyGraph)));
        let g = TradeGraph::from_weighted_edges([("a", "b", 1)], &[]).unwrap();
        assert!(Partition::from_map(&g, &HashMap::new()).is_err());
    }

    #[test]
    fn partition_csv() {
        let g = TradeGraph::from_weighted_edges([("a", "b", 1)], &[]).unwrap();
        let p = Partition::from_fn(&g, |id| Some(id.to_uppercase())).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "node,community\na,A\nb,B\n");
        assert_eq!(community_sizes(&p).len(), 2);
    }
}
