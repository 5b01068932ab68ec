use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::rolling::TOTAL_GROUP;
use crate::ingest::{Category, TradeRecord};

pub const REPORTED_PERCENTILES: [f64; 4] = [50.0, 75.0, 99.0, 100.0];

/// Type-1 (inverse empirical CDF) quantile: the `ceil(n p)`-th smallest value.
pub fn quantile_lower(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let k = ((n as f64 * p).ceil() as usize).clamp(1, n);
    Some(sorted[k - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileRow {
    pub group: String,
    pub n_nfts: usize,
    /// Values at [`REPORTED_PERCENTILES`]; empty when the group has no NFTs.
    pub values: Vec<f64>,
}

/// Mean sale price per NFT, then percentiles of those means for the whole
/// market and each category. NFTs without any USD-priced sale are skipped.
pub fn price_percentiles(trades: &[TradeRecord]) -> Vec<PercentileRow> {
    let mut per_nft: HashMap<&str, (Category, f64, usize)> = HashMap::new();
    for t in trades {
        let Some(p) = t.price_usd else { continue };
        let e = per_nft.entry(&t.nft_id).or_insert((t.category, 0.0, 0));
        e.1 += p;
        e.2 += 1;
    }
    let mut groups: BTreeMap<Category, Vec<f64>> = Category::ALL.iter().map(|c| (*c, Vec::new())).collect();
    let mut all = Vec::with_capacity(per_nft.len());
    for (cat, sum, n) in per_nft.into_values() {
        let mean = sum / n as f64;
        all.push(mean);
        groups.get_mut(&cat).expect("all categories present").push(mean);
    }
    let row = |group: &str, mut xs: Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        PercentileRow {
            group: group.to_string(),
            n_nfts: xs.len(),
            values: REPORTED_PERCENTILES.iter().filter_map(|p| quantile_lower(&xs, p / 100.0)).collect(),
        }
    };
    std::iter::once(row(TOTAL_GROUP, all)).chain(groups.into_iter().map(|(c, xs)| row(c.as_str(), xs))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Source;

    fn sale(nft: &str, price: f64) -> TradeRecord {
        TradeRecord {
            buyer: "b".into(),
            seller: "s".into(),
            ts: 1,
            collection_raw: "c".into(),
            collection: "C".into(),
            category: Category::Art,
            nft_id: nft.into(),
            url: None,
            currency: "USD".into(),
            amount: price,
            source: Source::OpenSea,
            price_usd: Some(price),
        }
    }

    #[test]
    fn single_nft_mean() {
        let rows = price_percentiles(&[sale("a", 10.0), sale("a", 10.0)]);
        assert_eq!(rows[0].n_nfts, 1);
        assert_eq!(rows[0].values, vec![10.0; 4]);
    }

    #[test]
    fn p75_of_one_to_hundred() {
        let trades: Vec<_> = (1..=100).map(|i| sale(&format!("n{i}"), i as f64)).collect();
        let rows = price_percentiles(&trades);
        // oracle: sort, index ceil(100 * 0.75) = 75 (1-based)
        let mut xs: Vec<f64> = (1..=100).map(f64::from).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(rows[0].values[1], xs[74]);
        assert!((75.0..=76.0).contains(&rows[0].values[1]));
        assert_eq!(rows[0].values[3], 100.0);
    }

    #[test]
    fn empty_group_has_no_values() {
        let rows = price_percentiles(&[sale("a", 1.0)]);
        let games = rows.iter().find(|r| r.group == "Games").unwrap();
        assert_eq!(games.n_nfts, 0);
        assert!(games.values.is_empty());
    }
}
