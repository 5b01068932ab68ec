use serde::Serialize;

use super::graph::{NodeIx, TradeGraph};

/// Strongly connected components by iterative Tarjan, largest first; ties
/// broken by smallest member index. Members are sorted.
pub fn scc(graph: &TradeGraph) -> Vec<Vec<NodeIx>> {
    const UNSEEN: u32 = u32::MAX;
    let n = graph.n_nodes();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<NodeIx> = Vec::new();
    let mut components: Vec<Vec<NodeIx>> = Vec::new();
    let mut next = 0u32;
    // (node, position in its out-edge list)
    let mut call: Vec<(NodeIx, usize)> = Vec::new();

    for root in 0..n as NodeIx {
        if index[root as usize] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let out = graph.out_edges(v);
            if *pos < out.len() {
                let w = out[*pos].dst;
                *pos += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next;
                    low[w as usize] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    components
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SccSummary {
    pub n_components: usize,
    pub largest_fraction: f64,
    pub second_fraction: f64,
    /// Most frequent node tag in each of the two largest components.
    pub largest_tag: Option<String>,
    pub second_tag: Option<String>,
}

pub fn scc_summary(graph: &TradeGraph, components: &[Vec<NodeIx>]) -> SccSummary {
    let n = graph.n_nodes().max(1) as f64;
    let frac = |i: usize| components.get(i).map_or(0.0, |c| c.len() as f64 / n);
    let tag = |i: usize| {
        let comp = components.get(i)?;
        let mut counts = std::collections::BTreeMap::<&str, usize>::new();
        for &v in comp {
            if let Some(t) = graph.meta(v).tag.as_deref() {
                *counts.entry(t).or_default() += 1;
            }
        }
        counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0))).map(|(t, _)| t.to_string())
    };
    SccSummary {
        n_components: components.len(),
        largest_fraction: frac(0),
        second_fraction: frac(1),
        largest_tag: tag(0),
        second_tag: tag(1),
    }
}
