use std::collections::HashMap;

use serde::Serialize;

use crate::ingest::{Category, TradeRecord};

pub const TOTAL_GROUP: &str = "All";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingOptions {
    pub window_days: u32,
    /// Centered instead of trailing windows.
    pub centered: bool,
    /// Days whose total rolling volume is below this are flagged `low_volume`.
    pub low_volume_usd: f64,
}

impl Default for RollingOptions {
    fn default() -> Self {
        RollingOptions { window_days: 30, centered: false, low_volume_usd: 1_000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyRow {
    pub day: i64,
    pub group: String,
    /// Window mean of daily USD volume.
    pub volume_usd: f64,
    /// Window mean of daily transaction count.
    pub n_transactions: f64,
    /// Distinct buyers and sellers in the window.
    pub n_traders: usize,
    /// Distinct collections in the window.
    pub n_collections: usize,
    /// Share of the day's total volume; `None` for the total row or zero volume.
    pub volume_share: Option<f64>,
    pub transaction_share: Option<f64>,
    /// Plot filter flag; the total row's volume is below the threshold.
    pub low_volume: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesReport {
    pub window_days: u32,
    pub centered: bool,
    /// Ordered by day, then the total group first, then categories.
    pub rows: Vec<DailyRow>,
}

impl TimeSeriesReport {
    pub fn group<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a DailyRow> + 'a {
        self.rows.iter().filter(move |r| r.group == group)
    }
}

struct DayBucket<'a> {
    volume: f64,
    count: f64,
    traders: Vec<&'a str>,
    collections: Vec<&'a str>,
}

/// Sliding multiset of distinct keys.
#[derive(Default)]
struct Distinct<'a>(HashMap<&'a str, usize>);

impl<'a> Distinct<'a> {
    fn add(&mut self, keys: &[&'a str]) {
        for k in keys {
            *self.0.entry(k).or_default() += 1;
        }
    }

    fn remove(&mut self, keys: &[&'a str]) {
        for k in keys {
            if let Some(c) = self.0.get_mut(k) {
                *c -= 1;
                if *c == 0 {
                    self.0.remove(k);
                }
            }
        }
    }
}

/// Rolling daily market series for the whole market and for each category
/// present in the data. Days without trades count as zero in the means.
#[allow(clippy::needless_range_loop)]
pub fn rolling_series(trades: &[TradeRecord], opts: RollingOptions) -> TimeSeriesReport {
    let window = opts.window_days.max(1) as i64;
    let (back, fwd) = if opts.centered { ((window - 1) / 2, window - 1 - (window - 1) / 2) } else { (window - 1, 0) };
    let mut report = TimeSeriesReport { window_days: window as u32, centered: opts.centered, rows: Vec::new() };
    let (Some(first), Some(last)) = (trades.iter().map(|t| t.day()).min(), trades.iter().map(|t| t.day()).max()) else {
        return report;
    };
    let n_days = (last - first + 1) as usize;

    let mut groups: Vec<Option<Category>> = vec![None];
    let mut present: Vec<Category> = trades.iter().map(|t| t.category).collect();
    present.sort();
    present.dedup();
    groups.extend(present.into_iter().map(Some));

    // per group, per day
    let mut buckets: Vec<Vec<DayBucket>> = groups
        .iter()
        .map(|_| {
            (0..n_days)
                .map(|_| DayBucket { volume: 0.0, count: 0.0, traders: Vec::new(), collections: Vec::new() })
                .collect()
        })
        .collect();
    for t in trades {
        let d = (t.day() - first) as usize;
        for (gi, g) in groups.iter().enumerate() {
            if g.is_some_and(|c| c != t.category) {
                continue;
            }
            let b = &mut buckets[gi][d];
            b.volume += t.price_usd.unwrap_or(0.0);
            b.count += 1.0;
            b.traders.push(&t.buyer);
            b.traders.push(&t.seller);
            b.collections.push(&t.collection);
        }
    }

    let mut series: Vec<Vec<(f64, f64, usize, usize)>> = Vec::with_capacity(groups.len());
    for days in &buckets {
        let mut traders = Distinct::default();
        let mut collections = Distinct::default();
        let mut out = Vec::with_capacity(n_days);
        // window for day d covers [d - back, d + fwd]
        let mut lo = 0i64;
        let mut hi = -1i64;
        for d in 0..n_days as i64 {
            let want_hi = (d + fwd).min(n_days as i64 - 1);
            while hi < want_hi {
                hi += 1;
                let b = &days[hi as usize];
                traders.add(&b.traders);
                collections.add(&b.collections);
            }
            let want_lo = (d - back).max(0);
            while lo < want_lo {
                let b = &days[lo as usize];
                traders.remove(&b.traders);
                collections.remove(&b.collections);
                lo += 1;
            }
            // exact window sums, no running total
            let (v, c) =
                days[lo as usize..=hi as usize].iter().fold((0.0, 0.0), |(v, c), b| (v + b.volume, c + b.count));
            out.push((v / window as f64, c / window as f64, traders.0.len(), collections.0.len()));
        }
        series.push(out);
    }

    for d in 0..n_days {
        let (total_vol, total_cnt, ..) = series[0][d];
        for (gi, g) in groups.iter().enumerate() {
            let (v, c, nt, nc) = series[gi][d];
            let share = |x: f64, tot: f64| (g.is_some() && tot > 0.0).then(|| x / tot);
            report.rows.push(DailyRow {
                day: first + d as i64,
                group: g.map_or(TOTAL_GROUP.to_string(), |c| c.as_str().to_string()),
                volume_usd: v,
                n_transactions: c,
                n_traders: nt,
                n_collections: nc,
                volume_share: share(v, total_vol),
                transaction_share: share(c, total_cnt),
                low_volume: total_vol < opts.low_volume_usd,
            });
        }
    }
    report
}
