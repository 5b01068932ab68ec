use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::graph::{NodeIx, NodeMeta, TradeGraph};
use crate::ingest::TradeRecord;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TraderBuildStats {
    pub self_trades: usize,
}

/// Share of a trader's transactions in their most- and two most-traded collections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Specialization {
    pub top_share: f64,
    pub top2_share: f64,
    pub top_collection: String,
    pub n_trades: usize,
}

fn specialization_from_counts(counts: &HashMap<&str, usize>) -> Option<Specialization> {
    let total: usize = counts.values().sum();
    if total == 0 {
        return None;
    }
    let mut ranked: Vec<(&str, usize)> = counts.iter().map(|(k, v)| (*k, *v)).collect();
    // most trades first, ties by collection name
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top = ranked[0].1;
    let top2 = top + ranked.get(1).map_or(0, |r| r.1);
    Some(Specialization {
        top_share: top as f64 / total as f64,
        top2_share: top2 as f64 / total as f64,
        top_collection: ranked[0].0.to_string(),
        n_trades: total,
    })
}

/// Specialization of one trader over every trade they bought or sold in.
/// `None` if the trader never traded.
pub fn specialization(trades: &[TradeRecord], trader: &str) -> Option<Specialization> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in trades.iter().filter(|t| t.buyer == trader || t.seller == trader) {
        *counts.entry(&t.collection).or_default() += 1;
    }
    specialization_from_counts(&counts)
}

/// [`specialization`] for every trader at once.
pub fn specialization_all(trades: &[TradeRecord]) -> BTreeMap<String, Specialization> {
    let mut counts: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for t in trades {
        *counts.entry(&t.buyer).or_default().entry(&t.collection).or_default() += 1;
        if t.seller != t.buyer {
            *counts.entry(&t.seller).or_default().entry(&t.collection).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter_map(|(trader, c)| specialization_from_counts(&c).map(|s| (trader.to_string(), s)))
        .collect()
}

/// Number of distinct UTC days each trader bought or sold on.
pub fn active_days(trades: &[TradeRecord]) -> HashMap<String, u32> {
    let mut days: HashMap<&str, HashSet<i64>> = HashMap::new();
    for t in trades {
        days.entry(&t.buyer).or_default().insert(t.day());
        days.entry(&t.seller).or_default().insert(t.day());
    }
    days.into_iter().map(|(k, v)| (k.to_string(), v.len() as u32)).collect()
}

/// Buyer → seller graph weighted by items bought. Self-trades are dropped
/// and counted. Node metadata carries top collection and active days.
pub fn build_trader_network(trades: &[TradeRecord]) -> (TradeGraph, TraderBuildStats) {
    let mut stats = TraderBuildStats::default();
    let kept: Vec<&TradeRecord> = trades
        .iter()
        .filter(|t| {
            let own = t.buyer == t.seller;
            stats.self_trades += own as usize;
            !own
        })
        .collect();

    let mut ids: Vec<&str> = kept.iter().flat_map(|t| [t.buyer.as_str(), t.seller.as_str()]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: HashMap<&str, NodeIx> = ids.iter().enumerate().map(|(i, s)| (*s, i as NodeIx)).collect();
    let links: Vec<(NodeIx, NodeIx)> =
        kept.iter().map(|t| (index[t.buyer.as_str()], index[t.seller.as_str()])).collect();

    let owned: Vec<TradeRecord> = kept.into_iter().cloned().collect();
    let spec = specialization_all(&owned);
    let days = active_days(&owned);
    let meta = ids
        .iter()
        .map(|id| NodeMeta {
            top_collection: spec.get(*id).map(|s| s.top_collection.clone()),
            active_days: days.get(*id).copied().unwrap_or(0),
            tag: None,
        })
        .collect();
    let ids = ids.into_iter().map(String::from).collect();
    (TradeGraph::from_links(ids, meta, links), stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NftNetworkOptions {
    /// Also link every ordered pair of distinct NFTs bought in the same event.
    pub clique_within_event: bool,
}

/// Links generated by one buyer's purchases, given `(ts, nft)` pairs sorted by time.
pub fn sequential_links(purchases: &[(i64, NodeIx)], opts: NftNetworkOptions) -> Vec<(NodeIx, NodeIx)> {
    let mut events: Vec<&[(i64, NodeIx)]> = Vec::new();
    let mut start = 0;
    for i in 1..=purchases.len() {
        if i == purchases.len() || purchases[i].0 != purchases[start].0 {
            events.push(&purchases[start..i]);
            start = i;
        }
    }
    let mut links = Vec::new();
    for pair in events.windows(2) {
        for &(_, a) in pair[0] {
            for &(_, b) in pair[1] {
                links.push((a, b));
            }
        }
    }
    if opts.clique_within_event {
        for ev in &events {
            for (i, &(_, a)) in ev.iter().enumerate() {
                for (j, &(_, b)) in ev.iter().enumerate() {
                    if i != j && a != b {
                        links.push((a, b));
                    }
                }
            }
        }
    }
    links
}

/// NFT → NFT graph of sequential purchases. Each buyer's purchases are
/// grouped into events of identical timestamp; every NFT of an event links
/// to every NFT of the buyer's next event. NFTs without any link are not
/// part of the graph. Node tags are the blockchain of the NFT's first trade.
pub fn build_nft_network(trades: &[TradeRecord], opts: NftNetworkOptions) -> TradeGraph {
    let mut all_ids: Vec<&str> = trades.iter().map(|t| t.nft_id.as_str()).collect();
    all_ids.sort_unstable();
    all_ids.dedup();
    let index: HashMap<&str, NodeIx> = all_ids.iter().enumerate().map(|(i, s)| (*s, i as NodeIx)).collect();

    let mut by_buyer: HashMap<&str, Vec<(i64, NodeIx)>> = HashMap::new();
    for t in trades {
        by_buyer.entry(&t.buyer).or_default().push((t.ts, index[t.nft_id.as_str()]));
    }
    let mut buyers: Vec<Vec<(i64, NodeIx)>> = by_buyer.into_values().collect();
    let links: Vec<(NodeIx, NodeIx)> = buyers
        .par_iter_mut()
        .flat_map_iter(|p| {
            p.sort_unstable();
            sequential_links(p, opts)
        })
        .collect();

    // keep only linked NFTs, reindex in sorted id order
    let mut used = vec![false; all_ids.len()];
    for &(a, b) in &links {
        used[a as usize] = true;
        used[b as usize] = true;
    }
    let mut remap = vec![NodeIx::MAX; all_ids.len()];
    let mut ids = Vec::new();
    for (old, id) in all_ids.iter().enumerate() {
        if used[old] {
            remap[old] = ids.len() as NodeIx;
            ids.push(id.to_string());
        }
    }
    let mut meta = vec![NodeMeta::default(); ids.len()];
    for t in trades {
        let new = remap[index[t.nft_id.as_str()] as usize];
        if new != NodeIx::MAX && meta[new as usize].top_collection.is_none() {
            meta[new as usize] = NodeMeta {
                top_collection: Some(t.collection.clone()),
                active_days: 0,
                tag: Some(t.source.blockchain().to_string()),
            };
        }
    }
    let links = links.into_iter().map(|(a, b)| (remap[a as usize], remap[b as usize])).collect();
    TradeGraph::from_links(ids, meta, links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Category, Source};

    pub(crate) fn trade(buyer: &str, seller: &str, nft: &str, ts: i64, coll: &str) -> TradeRecord {
        TradeRecord {
            buyer: buyer.into(),
            seller: seller.into(),
            ts,
            collection_raw: coll.into(),
            collection: coll.into(),
            category: Category::Art,
            nft_id: nft.into(),
            url: None,
            currency: "ETH".into(),
            amount: 1.0,
            source: Source::OpenSea,
            price_usd: Some(1.0),
        }
    }

    fn edges(g: &TradeGraph) -> Vec<(String, String, u64)> {
        g.edges().iter().map(|e| (g.id(e.src).to_string(), g.id(e.dst).to_string(), e.weight)).collect()
    }

    fn e(a: &str, b: &str, w: u64) -> (String, String, u64) {
        (a.into(), b.into(), w)
    }

    #[test]
    fn trader_edges_weighted_by_items() {
        let trades = [
            trade("A", "B", "n1", 1, "X"),
            trade("A", "B", "n2", 2, "X"),
            trade("A", "B", "n3", 3, "X"),
            trade("B", "A", "n4", 4, "X"),
            trade("A", "A", "n5", 5, "X"),
        ];
        let (g, stats) = build_trader_network(&trades);
        assert_eq!(edges(&g), vec![e("A", "B", 3), e("B", "A", 1)]);
        assert_eq!(stats.self_trades, 1);
        assert_eq!(g.meta(0).top_collection.as_deref(), Some("X"));
    }

    #[test]
    fn nft_sequence_rule_chain() {
        let trades = [trade("u", "s", "i", 1, "X"), trade("u", "s", "j", 2, "X"), trade("u", "s", "k", 3, "X")];
        let g = build_nft_network(&trades, NftNetworkOptions::default());
        assert_eq!(edges(&g), vec![e("i", "j", 1), e("j", "k", 1)]);
    }

    #[test]
    fn nft_sequence_rule_simultaneous_purchase() {
        let trades = [
            trade("u", "s", "i", 1, "X"),
            trade("u", "s", "j", 2, "X"),
            trade("u", "s", "k", 2, "X"),
            trade("u", "s", "h", 3, "X"),
        ];
        let g = build_nft_network(&trades, NftNetworkOptions::default());
        assert_eq!(edges(&g), vec![e("i", "j", 1), e("i", "k", 1), e("j", "h", 1), e("k", "h", 1)]);
        let cliq = build_nft_network(&trades, NftNetworkOptions { clique_within_event: true });
        assert_eq!(cliq.total_weight(), 6);
    }

    #[test]
    fn single_purchase_buyer_adds_nothing() {
        let trades = [trade("u", "s", "i", 1, "X"), trade("v", "s", "j", 1, "X"), trade("v", "s", "k", 2, "X")];
        let g = build_nft_network(&trades, NftNetworkOptions::default());
        assert_eq!(g.ids(), ["j", "k"]);
    }

    #[test]
    fn specialization_shares() {
        let mut trades: Vec<_> = (0..8).map(|i| trade("t", "o", &format!("x{i}"), i, "X")).collect();
        trades.extend((0..2).map(|i| trade("o2", "t", &format!("y{i}"), i, "Y")));
        let s = specialization(&trades, "t").unwrap();
        assert_eq!((s.top_share, s.top2_share, s.top_collection.as_str()), (0.8, 1.0, "X"));

        let tied = [trade("t", "o", "a", 1, "Z"), trade("t", "o", "b", 1, "Y"), trade("t", "o", "c", 1, "X")];
        let s = specialization(&tied, "t").unwrap();
        assert!((s.top_share - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.top_collection, "X");
        assert!(specialization(&tied, "nobody").is_none());
        assert_eq!(specialization_all(&tied)["t"], s);
    }

    #[test]
    fn active_days_counts_distinct_days() {
        let day = crate::ingest::SECONDS_PER_DAY;
        let trades = [trade("a", "b", "n", 10, "X"), trade("a", "c", "m", 20, "X"), trade("a", "b", "o", day + 1, "X")];
        let d = active_days(&trades);
        assert_eq!(d["a"], 2);
        assert_eq!(d["c"], 1);
    }
}
