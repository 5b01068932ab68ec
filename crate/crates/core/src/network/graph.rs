use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeIx = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeIx,
    pub dst: NodeIx,
    pub weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeMeta {
    pub top_collection: Option<String>,
    pub active_days: u32,
    /// Blockchain (NFT nodes) or any other grouping tag.
    pub tag: Option<String>,
}

/// Directed graph with positive integer edge weights.
///
/// Nodes are indexed in sorted id order and edges are stored aggregated and
/// sorted by `(src, dst)`, so two graphs built from the same multiset of
/// links compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeGraph {
    ids: Vec<String>,
    index: HashMap<String, NodeIx>,
    meta: Vec<NodeMeta>,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    out_strength: Vec<u64>,
    in_strength: Vec<u64>,
}

impl TradeGraph {
    /// Builds from sorted unique ids and `(src, dst)` link multiset. Links
    /// repeated `k` times produce one edge of weight `k`.
    pub(crate) fn from_links(ids: Vec<String>, meta: Vec<NodeMeta>, mut links: Vec<(NodeIx, NodeIx)>) -> Self {
        links.sort_unstable();
        let mut edges: Vec<Edge> = Vec::new();
        for (src, dst) in links {
            match edges.last_mut() {
                Some(e) if e.src == src && e.dst == dst => e.weight += 1,
                _ => edges.push(Edge { src, dst, weight: 1 }),
            }
        }
        Self::from_edges(ids, meta, edges)
    }

    /// `edges` must be sorted by `(src, dst)` without duplicates.
    pub(crate) fn from_edges(ids: Vec<String>, meta: Vec<NodeMeta>, edges: Vec<Edge>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.windows(2).all(|w| (w[0].src, w[0].dst) < (w[1].src, w[1].dst)));
        let n = ids.len();
        let mut out_offsets = vec![0usize; n + 1];
        let mut out_strength = vec![0u64; n];
        let mut in_strength = vec![0u64; n];
        for e in &edges {
            out_offsets[e.src as usize + 1] += 1;
            out_strength[e.src as usize] += e.weight;
            in_strength[e.dst as usize] += e.weight;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i as NodeIx)).collect();
        TradeGraph { ids, index, meta, edges, out_offsets, out_strength, in_strength }
    }

    /// Builds a graph from `(src, dst, weight)` triples; nodes are the union
    /// of endpoints and `extra_nodes`.
    pub fn from_weighted_edges<'a, I>(edges: I, extra_nodes: &[&str]) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str, u64)>,
    {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut ids: Vec<String> = edges
            .iter()
            .flat_map(|(s, d, _)| [s.to_string(), d.to_string()])
            .chain(extra_nodes.iter().map(|s| s.to_string()))
            .collect();
        ids.sort();
        ids.dedup();
        let index: HashMap<&str, NodeIx> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i as NodeIx)).collect();
        let mut agg: HashMap<(NodeIx, NodeIx), u64> = HashMap::new();
        for (s, d, w) in edges {
            if w == 0 {
                return Err(Error::InvalidArgument(format!("edge {s}->{d} has zero weight")));
            }
            *agg.entry((index[s], index[d])).or_default() += w;
        }
        let mut list: Vec<Edge> = agg.into_iter().map(|((src, dst), weight)| Edge { src, dst, weight }).collect();
        list.sort_unstable();
        let meta = vec![NodeMeta::default(); ids.len()];
        Ok(Self::from_edges(ids, meta, list))
    }

    pub fn n_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.out_strength.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, ix: NodeIx) -> &str {
        &self.ids[ix as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<NodeIx> {
        self.index.get(id).copied()
    }

    pub fn meta(&self, ix: NodeIx) -> &NodeMeta {
        &self.meta[ix as usize]
    }

    pub fn set_meta(&mut self, ix: NodeIx, meta: NodeMeta) {
        self.meta[ix as usize] = meta;
    }

    pub fn out_edges(&self, ix: NodeIx) -> &[Edge] {
        let i = ix as usize;
        &self.edges[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    pub fn out_degree(&self, ix: NodeIx) -> usize {
        self.out_edges(ix).len()
    }

    pub fn out_strength(&self, ix: NodeIx) -> u64 {
        self.out_strength[ix as usize]
    }

    pub fn in_strength(&self, ix: NodeIx) -> u64 {
        self.in_strength[ix as usize]
    }

    pub fn out_strengths(&self) -> &[u64] {
        &self.out_strength
    }

    pub fn in_strengths(&self) -> &[u64] {
        &self.in_strength
    }

    /// Sum of incident edge weights, in plus out.
    pub fn strength(&self, id: &str) -> Result<u64> {
        let ix = self.index_of(id).ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        Ok(self.out_strength(ix) + self.in_strength(ix))
    }

    pub fn strengths(&self) -> Vec<u64> {
        self.out_strength.iter().zip(&self.in_strength).map(|(o, i)| o + i).collect()
    }

    /// Same nodes, new edge set.
    pub(crate) fn with_links(&self, links: Vec<(NodeIx, NodeIx)>) -> Self {
        Self::from_links(self.ids.clone(), self.meta.clone(), links)
    }

    /// `src,dst,weight` CSV.
    pub fn write_edge_list<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["src", "dst", "weight"])?;
        for e in &self.edges {
            w.write_record([self.id(e.src), self.id(e.dst), &e.weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
