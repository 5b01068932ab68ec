use std::collections::{BTreeMap, HashMap};

use chrono::Datelike;
use serde::Serialize;

use crate::ingest::{Category, TradeRecord, SECONDS_PER_DAY};

#[derive(Debug, Clone, PartialEq)]
pub struct Sale {
    pub ts: i64,
    pub price_usd: Option<f64>,
    pub buyer: String,
    pub seller: String,
}

/// Chronological sales of one NFT. The first sale is the primary sale.
#[derive(Debug, Clone, PartialEq)]
pub struct SaleTimeline {
    pub nft_id: String,
    pub collection: String,
    pub category: Category,
    /// Object reference of the NFT (first non-empty `url` seen).
    pub url: Option<String>,
    pub sales: Vec<Sale>,
}

impl SaleTimeline {
    pub fn primary(&self) -> &Sale {
        &self.sales[0]
    }

    pub fn secondary(&self) -> &[Sale] {
        &self.sales[1..]
    }

    pub fn has_secondary(&self) -> bool {
        self.sales.len() > 1
    }

    /// Price of each sale relative to the previous one; `None` for the
    /// primary sale or when either price is missing or the previous is 0.
    pub fn price_changes(&self) -> Vec<Option<f64>> {
        std::iter::once(None)
            .chain(self.sales.windows(2).map(|w| match (w[0].price_usd, w[1].price_usd) {
                (Some(prev), Some(cur)) if prev > 0.0 => Some(cur / prev),
                _ => None,
            }))
            .collect()
    }
}

fn sale_order(a: &Sale, b: &Sale) -> std::cmp::Ordering {
    // intra-second ties: price (missing first), then buyer address
    a.ts.cmp(&b.ts)
        .then_with(|| match (a.price_usd, b.price_usd) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (x, y) => x.is_some().cmp(&y.is_some()),
        })
        .then_with(|| a.buyer.cmp(&b.buyer))
        .then_with(|| a.seller.cmp(&b.seller))
}

/// Groups trades per NFT, ordered by NFT id.
pub fn sale_timelines(trades: &[TradeRecord]) -> Vec<SaleTimeline> {
    let mut by_nft: HashMap<&str, SaleTimeline> = HashMap::new();
    for t in trades {
        let tl = by_nft.entry(t.nft_id.as_str()).or_insert_with(|| SaleTimeline {
            nft_id: t.nft_id.clone(),
            collection: t.collection.clone(),
            category: t.category,
            url: None,
            sales: Vec::new(),
        });
        if tl.url.is_none() {
            tl.url = t.url.clone();
        }
        tl.sales.push(Sale { ts: t.ts, price_usd: t.price_usd, buyer: t.buyer.clone(), seller: t.seller.clone() });
    }
    let mut out: Vec<SaleTimeline> = by_nft.into_values().collect();
    for tl in &mut out {
        tl.sales.sort_by(sale_order);
    }
    out.sort_by(|a, b| a.nft_id.cmp(&b.nft_id));
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct YearBelowPrimary {
    pub secondary_sales: usize,
    pub below_primary: usize,
    pub share_below: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TimelineSummary {
    pub n_nfts: usize,
    pub n_with_secondary: usize,
    pub n_secondary_sales: usize,
    /// Calendar year of the secondary sale → share priced below the primary.
    pub below_primary_by_year: BTreeMap<i32, YearBelowPrimary>,
}

pub fn summarize_timelines(timelines: &[SaleTimeline]) -> TimelineSummary {
    let mut s = TimelineSummary { n_nfts: timelines.len(), ..Default::default() };
    for tl in timelines {
        if tl.has_secondary() {
            s.n_with_secondary += 1;
        }
        s.n_secondary_sales += tl.secondary().len();
        let Some(primary_price) = tl.primary().price_usd else { continue };
        for sale in tl.secondary() {
            let Some(price) = sale.price_usd else { continue };
            let year = chrono::DateTime::from_timestamp(sale.ts, 0).map(|d| d.year()).unwrap_or(1970);
            let y = s.below_primary_by_year.entry(year).or_default();
            y.secondary_sales += 1;
            if price < primary_price {
                y.below_primary += 1;
            }
        }
    }
    for y in s.below_primary_by_year.values_mut() {
        y.share_below = y.below_primary as f64 / y.secondary_sales as f64;
    }
    s
}

/// Which NFTs enter the denominator at each horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cohort {
    /// NFTs observable for at least `n` days at horizon `n`.
    #[default]
    PerHorizon,
    /// NFTs observable for the largest horizon, at every horizon; the curve
    /// is then non-decreasing by construction.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResalePoint {
    pub horizon_days: u32,
    pub fraction: f64,
    pub n_observable: usize,
}

/// Fraction of NFTs whose first secondary sale falls within `n` days of the
/// primary sale, for each horizon `n`. Only NFTs whose primary sale is at
/// least `n` days before `dataset_end` are counted.
pub fn resale_fraction_curve(
    timelines: &[SaleTimeline],
    horizons: &[u32],
    dataset_end: i64,
    cohort: Cohort,
) -> Vec<ResalePoint> {
    let max_h = horizons.iter().copied().max().unwrap_or(0);
    horizons
        .iter()
        .map(|&h| {
            let span = i64::from(h) * SECONDS_PER_DAY;
            let need = match cohort {
                Cohort::PerHorizon => span,
                Cohort::Fixed => i64::from(max_h) * SECONDS_PER_DAY,
            };
            let mut observable = 0usize;
            let mut resold = 0usize;
            for tl in timelines {
                let t0 = tl.primary().ts;
                if t0 + need > dataset_end {
                    continue;
                }
                observable += 1;
                if tl.secondary().first().is_some_and(|s| s.ts - t0 <= span) {
                    resold += 1;
                }
            }
            ResalePoint {
                horizon_days: h,
                fraction: if observable == 0 { 0.0 } else { resold as f64 / observable as f64 },
                n_observable: observable,
            }
        })
        .collect()
}
