use std::collections::HashMap;

use super::graph::TradeGraph;
use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x` over `(x, y)` pairs.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of `ln s` against `ln d` over nodes with strength `s >= 1` and
/// active days `d >= 1`.
pub fn strength_activity_slope(graph: &TradeGraph, activity: &HashMap<String, u32>) -> Result<f64> {
    let points: Vec<(f64, f64)> = graph
        .ids()
        .iter()
        .enumerate()
        .filter_map(|(i, id)| {
            let s = graph.out_strength(i as u32) + graph.in_strength(i as u32);
            let d = *activity.get(id)?;
            (s >= 1 && d >= 1).then_some((d as f64, s as f64))
        })
        .collect();
    if points.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "strength/activity slope needs at least 10 active nodes, got {}",
            points.len()
        )));
    }
    log_log_slope(&points).map_err(|_| Error::Degenerate("every node has the same number of active days".into()))
}

pub(crate) fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Node-level Pearson correlation between out-strength and the mean
/// in-strength of the node's (distinct) out-neighbours, over nodes with at
/// least one out-neighbour.
pub fn assortativity(graph: &TradeGraph) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ix in 0..graph.n_nodes() as u32 {
        let out = graph.out_edges(ix);
        if out.is_empty() {
            continue;
        }
        xs.push(graph.out_strength(ix) as f64);
        let mean_in = out.iter().map(|e| graph.in_strength(e.dst) as f64).sum::<f64>() / out.len() as f64;
        ys.push(mean_in);
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateAssortativity("fewer than 3 nodes with out-neighbours"));
    }
    pearson(&xs, &ys).ok_or(Error::DegenerateAssortativity("zero variance"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(weights: impl Iterator<Item = (u64, u64)>) -> (TradeGraph, HashMap<String, u32>) {
        let rows: Vec<(String, u64, u64)> = weights.map(|(k, w)| (format!("n{k}"), k, w)).collect();
        let g = TradeGraph::from_weighted_edges(rows.iter().map(|(n, _, w)| (n.as_str(), "hub", *w)), &[]).unwrap();
        let activity = rows.iter().map(|(n, k, _)| (n.clone(), *k as u32)).collect();
        (g, activity)
    }

    #[test]
    fn exact_power_relation_slope() {
        let points: Vec<(f64, f64)> = (1..=20).map(|d| (d as f64, (d as f64).powf(1.3))).collect();
        assert!((log_log_slope(&points).unwrap() - 1.3).abs() < 1e-9);
        // integer strengths s = d^2 through the graph path
        let (g, activity) = star((1..=12).map(|k| (k, k * k)));
        assert!((strength_activity_slope(&g, &activity).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_strength_has_zero_slope() {
        let (g, activity) = star((1..=12).map(|k| (k, 3)));
        assert!(strength_activity_slope(&g, &activity).unwrap().abs() < 1e-12);
        let flat: HashMap<String, u32> = activity.keys().map(|k| (k.clone(), 4)).collect();
        assert!(matches!(strength_activity_slope(&g, &flat), Err(Error::Degenerate(_))));
        let (small, act) = star((1..=5).map(|k| (k, k)));
        assert!(matches!(strength_activity_slope(&small, &act), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn assortativity_of_aligned_strengths_is_one() {
        // out-strength k pointing at a node with in-strength k
        let g = TradeGraph::from_weighted_edges([("a", "x", 1), ("b", "y", 2), ("c", "z", 3)], &[]).unwrap();
        assert!((assortativity(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_strengths_are_degenerate() {
        let g = TradeGraph::from_weighted_edges([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)], &[]).unwrap();
        assert!(matches!(assortativity(&g), Err(Error::DegenerateAssortativity(_))));
        let two = TradeGraph::from_weighted_edges([("a", "b", 1), ("b", "c", 2)], &[]).unwrap();
        assert!(assortativity(&two).is_err());
    }
}
