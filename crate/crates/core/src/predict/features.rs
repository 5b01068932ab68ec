use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::centrality::{degrees, pagerank, PageRankOptions};
use crate::error::{Error, Result};
use crate::ingest::{utc_day, Category, TradeRecord};
use crate::network::TradeGraph;
use crate::stats::SaleTimeline;

/// Time window in whole UTC days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Window {
    #[serde(rename = "1w")]
    Week,
    #[serde(rename = "1m")]
    Month,
    #[serde(rename = "6m")]
    HalfYear,
    #[serde(rename = "1y")]
    Year,
    #[serde(rename = "2y")]
    TwoYears,
    #[serde(rename = "all")]
    All,
}

impl Window {
    pub const ALL: [Window; 6] =
        [Window::Week, Window::Month, Window::HalfYear, Window::Year, Window::TwoYears, Window::All];

    /// `None` for the unbounded window.
    pub fn days(self) -> Option<i64> {
        match self {
            Window::Week => Some(7),
            Window::Month => Some(30),
            Window::HalfYear => Some(182),
            Window::Year => Some(365),
            Window::TwoYears => Some(730),
            Window::All => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Window::Week => "1w",
            Window::Month => "1m",
            Window::HalfYear => "6m",
            Window::Year => "1y",
            Window::TwoYears => "2y",
            Window::All => "all",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Window::ALL
            .into_iter()
            .find(|w| w.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown window `{s}` (1w, 1m, 6m, 1y, 2y, all)")))
    }
}

/// Smoothed share of a collection's earlier NFTs that were resold: `0.5`
/// for the first NFT, else `0.5/(n+1) + n/(n+1) · s/n`.
pub fn p_resale(n: u64, s: u64) -> Result<f64> {
    if s > n {
        return Err(Error::InvalidArgument(format!("resold count {s} exceeds prior count {n}")));
    }
    if n == 0 {
        return Ok(0.5);
    }
    let (nf, sf) = (n as f64, s as f64);
    Ok(0.5 / (nf + 1.0) + nf / (nf + 1.0) * (sf / nf))
}

/// Median of a non-empty sample, averaging the two middle values.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { (values[m - 1] + values[m]) / 2.0 })
}

/// Median USD price of the collection's priced sales on UTC days
/// `[day(t_s) − window, day(t_s))`. `None` without prior sales.
pub fn median_collection_price(trades: &[TradeRecord], collection: &str, t_s: i64, window: Window) -> Option<f64> {
    let day = utc_day(t_s);
    let from = window.days().map_or(i64::MIN, |w| day - w);
    let mut prices: Vec<f64> = trades
        .iter()
        .filter(|t| t.collection == collection && t.day() < day && t.day() >= from)
        .filter_map(|t| t.price_usd)
        .collect();
    median(&mut prices)
}

/// One of the eleven predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    KBuyer,
    KSeller,
    PrBuyer,
    PrSeller,
    PResale,
    MedianPrice,
    VisPca(u8),
}

impl Feature {
    pub const ALL: [Feature; 11] = [
        Feature::KBuyer,
        Feature::KSeller,
        Feature::PrBuyer,
        Feature::PrSeller,
        Feature::PResale,
        Feature::MedianPrice,
        Feature::VisPca(0),
        Feature::VisPca(1),
        Feature::VisPca(2),
        Feature::VisPca(3),
        Feature::VisPca(4),
    ];

    pub fn name(self) -> String {
        match self {
            Feature::KBuyer => "k_buyer".into(),
            Feature::KSeller => "k_seller".into(),
            Feature::PrBuyer => "PR_buyer".into(),
            Feature::PrSeller => "PR_seller".into(),
            Feature::PResale => "p_resale".into(),
            Feature::MedianPrice => "median_price".into(),
            Feature::VisPca(i) => format!("vis_PCA{}", i + 1),
        }
    }
}

impl Serialize for Feature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature `{s}`")))
    }
}

/// Predictors of one NFT, computed from trades strictly before the UTC day
/// of its primary sale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRow {
    pub nft_id: String,
    pub t_s: i64,
    pub collection: String,
    pub category: Category,
    pub k_buyer: f64,
    pub k_seller: f64,
    pub pr_buyer: f64,
    pub pr_seller: f64,
    pub p_resale: f64,
    /// Prior median collection price for every [`Window`], in `Window::ALL` order.
    pub median_price: [Option<f64>; 6],
    pub vis_pca: Option<Vec<f64>>,
}

impl FeatureRow {
    pub fn median_price(&self, window: Window) -> Option<f64> {
        self.median_price[window.slot()]
    }

    /// Raw value of `feature`; the median price uses `window_before`.
    pub fn get(&self, feature: Feature, window_before: Window) -> Option<f64> {
        match feature {
            Feature::KBuyer => Some(self.k_buyer),
            Feature::KSeller => Some(self.k_seller),
            Feature::PrBuyer => Some(self.pr_buyer),
            Feature::PrSeller => Some(self.pr_seller),
            Feature::PResale => Some(self.p_resale),
            Feature::MedianPrice => self.median_price(window_before),
            Feature::VisPca(i) => self.vis_pca.as_ref().and_then(|v| v.get(i as usize).copied()),
        }
    }
}

/// Writes feature rows as CSV: identifiers, then one column per feature;
/// the median price appears once per window. Missing values are empty.
pub fn write_feature_rows<W: std::io::Write>(rows: &[FeatureRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> =
        ["nft_id", "t_s", "collection", "category", "k_buyer", "k_seller", "PR_buyer", "PR_seller", "p_resale"]
            .map(String::from)
            .to_vec();
    header.extend(Window::ALL.iter().map(|w| format!("median_price_{w}")));
    header.extend((1..=5).map(|i| format!("vis_PCA{i}")));
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.nft_id.clone(),
            r.t_s.to_string(),
            r.collection.clone(),
            r.category.to_string(),
            r.k_buyer.to_string(),
            r.k_seller.to_string(),
            r.pr_buyer.to_string(),
            r.pr_seller.to_string(),
            r.p_resale.to_string(),
        ];
        rec.extend(r.median_price.iter().map(|v| opt(*v)));
        rec.extend((0..5).map(|i| opt(r.vis_pca.as_ref().and_then(|v| v.get(i).copied()))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureOptions {
    pub pagerank: PageRankOptions,
}

struct Snapshot {
    graph: TradeGraph,
    degree: Vec<usize>,
    pagerank: Vec<f64>,
}

impl Snapshot {
    fn lookup(&self, id: &str) -> (f64, f64) {
        match self.graph.index_of(id) {
            Some(ix) => (self.degree[ix as usize] as f64, self.pagerank[ix as usize]),
            None => (0.0, 0.0),
        }
    }
}

/// Builds one [`FeatureRow`] per timeline. Centralities come from the
/// trader network of all trades before the primary-sale day, rebuilt once
/// per day that has primary sales, with PageRank warm-started from the
/// previous snapshot. `vis` maps object ids (timeline URLs) to PCA scores.
pub fn build_features(
    trades: &[TradeRecord],
    timelines: &[SaleTimeline],
    vis: Option<&HashMap<String, Vec<f64>>>,
    opts: FeatureOptions,
) -> Vec<FeatureRow> {
    let mut by_ts: Vec<&TradeRecord> = trades.iter().collect();
    by_ts.sort_by_key(|t| t.ts);

    let mut days: Vec<i64> = timelines.iter().map(|t| utc_day(t.primary().ts)).collect();
    days.sort_unstable();
    days.dedup();

    // centralities per primary-sale day
    let mut snapshots: HashMap<i64, HashMap<&str, (f64, f64)>> = HashMap::new();
    let mut wanted: HashMap<i64, Vec<&str>> = HashMap::new();
    for t in timelines {
        let p = t.primary();
        let e = wanted.entry(utc_day(p.ts)).or_default();
        e.push(&p.buyer);
        e.push(&p.seller);
    }
    let mut edges: HashMap<(&str, &str), u64> = HashMap::new();
    let mut next = 0;
    let mut prev: Option<Snapshot> = None;
    for &day in &days {
        let mut changed = prev.is_none();
        while next < by_ts.len() && by_ts[next].day() < day {
            let t = by_ts[next];
            if t.buyer != t.seller {
                *edges.entry((&t.buyer, &t.seller)).or_default() += 1;
                changed = true;
            }
            next += 1;
        }
        if changed {
            let graph = TradeGraph::from_weighted_edges(edges.iter().map(|((a, b), w)| (*a, *b, *w)), &[])
                .expect("trade counts are positive");
            let init = prev.as_ref().map(|p| {
                let fill = 1.0 / graph.n_nodes().max(1) as f64;
                graph
                    .ids()
                    .iter()
                    .map(|id| p.graph.index_of(id).map_or(fill, |ix| p.pagerank[ix as usize]))
                    .collect::<Vec<_>>()
            });
            let pr = pagerank(&graph, opts.pagerank, init.as_deref());
            prev = Some(Snapshot { degree: degrees(&graph), pagerank: pr, graph });
        }
        let snap = prev.as_ref().expect("snapshot exists after first day");
        let lookups = wanted[&day].iter().map(|id| (*id, snap.lookup(id))).collect();
        snapshots.insert(day, lookups);
    }

    // collection history: primary days, first-resale days, priced sales by day
    let mut primary_days: HashMap<&str, Vec<i64>> = HashMap::new();
    let mut resale_days: HashMap<&str, Vec<i64>> = HashMap::new();
    for t in timelines {
        primary_days.entry(&t.collection).or_default().push(utc_day(t.primary().ts));
        if let Some(s) = t.secondary().first() {
            resale_days.entry(&t.collection).or_default().push(utc_day(s.ts));
        }
    }
    let mut priced: HashMap<&str, Vec<(i64, f64)>> = HashMap::new();
    for t in trades {
        if let Some(p) = t.price_usd {
            priced.entry(&t.collection).or_default().push((t.day(), p));
        }
    }
    for v in primary_days.values_mut().chain(resale_days.values_mut()) {
        v.sort_unstable();
    }
    for v in priced.values_mut() {
        v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    let count_before = |v: Option<&Vec<i64>>, day: i64| v.map_or(0, |v| v.partition_point(|d| *d < day)) as u64;

    timelines
        .par_iter()
        .map(|t| {
            let p = t.primary();
            let day = utc_day(p.ts);
            let cent = &snapshots[&day];
            let (k_buyer, pr_buyer) = cent[p.buyer.as_str()];
            let (k_seller, pr_seller) = cent[p.seller.as_str()];
            let coll = t.collection.as_str();
            let n = count_before(primary_days.get(coll), day);
            let s = count_before(resale_days.get(coll), day);
            let sales = priced.get(coll).map_or(&[][..], |v| &v[..]);
            let end = sales.partition_point(|(d, _)| *d < day);
            let mut median_price = [None; 6];
            for w in Window::ALL {
                let start = w.days().map_or(0, |len| sales[..end].partition_point(|(d, _)| *d < day - len));
                let mut prices: Vec<f64> = sales[start..end].iter().map(|(_, p)| *p).collect();
                median_price[w.slot()] = median(&mut prices);
            }
            FeatureRow {
                nft_id: t.nft_id.clone(),
                t_s: p.ts,
                collection: t.collection.clone(),
                category: t.category,
                k_buyer,
                k_seller,
                pr_buyer,
                pr_seller,
                p_resale: p_resale(n, s).expect("first resale follows primary sale"),
                median_price,
                vis_pca: vis.and_then(|m| t.url.as_ref().and_then(|u| m.get(u).cloned())),
            }
        })
        .collect()
}
