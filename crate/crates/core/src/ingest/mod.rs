//! Raw trade exports to canonical, USD-priced and categorized trade records.
//!
//! The flow is `parse_trades` → `deduplicate` → [`clean`], which normalizes
//! collection names, converts amounts to USD with the daily rate table and
//! attaches a category. [`store`] holds the canonical CSV trade store that
//! every downstream stage reads.

mod config;
mod dedup;
mod normalize;
mod parse;
mod rates;
pub mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{CategoryMap, IngestConfig};
pub use dedup::deduplicate;
pub use normalize::{normalize_collection, NormalizeRules, MISCELLANEA};
pub use parse::{parse_trades, ParseOutcome, Schema, TRADE_COLUMNS};
pub use rates::{to_usd, ExchangeRate, RateTable};

use crate::error::Error;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// UTC day index (days since the Unix epoch) of a timestamp in seconds.
pub fn utc_day(ts: i64) -> i64 {
    ts.div_euclid(SECONDS_PER_DAY)
}

/// `YYYY-MM-DD` for a UTC day index.
pub fn format_day(day: i64) -> String {
    chrono::DateTime::from_timestamp(day * SECONDS_PER_DAY, 0)
        .map(|dt| dt.format("%Y-%m-%d").to_string())
        .unwrap_or_else(|| day.to_string())
}

/// Parses `YYYY-MM-DD` into a UTC day index.
pub fn parse_day(s: &str) -> Option<i64> {
    let date = chrono::NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()?;
    let epoch = chrono::NaiveDate::from_ymd_opt(1970, 1, 1)?;
    Some((date - epoch).num_days())
}

/// Data provider a trade was exported from.
///
/// Declaration order is the deduplication priority, highest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    NonFungible,
    CryptoKittiesSales,
    GodsUnchained,
    Decentraland,
    OpenSea,
    Atomic,
    Other,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::NonFungible,
        Source::CryptoKittiesSales,
        Source::GodsUnchained,
        Source::Decentraland,
        Source::OpenSea,
        Source::Atomic,
        Source::Other,
    ];

    /// Lower is preferred when duplicates collide.
    pub fn priority(self) -> u8 {
        self as u8
    }

    /// Chain the provider's trades settle on.
    pub fn blockchain(self) -> &'static str {
        match self {
            Source::Atomic => "WAX",
            _ => "Ethereum",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Source::NonFungible => "NonFungible",
            Source::CryptoKittiesSales => "CryptoKittiesSales",
            Source::GodsUnchained => "GodsUnchained",
            Source::Decentraland => "Decentraland",
            Source::OpenSea => "OpenSea",
            Source::Atomic => "Atomic",
            Source::Other => "Other",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Source::ALL
            .into_iter()
            .find(|src| src.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown source `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Art,
    Collectible,
    Games,
    Metaverse,
    Utility,
    Other,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Art,
        Category::Collectible,
        Category::Games,
        Category::Metaverse,
        Category::Utility,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Art => "Art",
            Category::Collectible => "Collectible",
            Category::Games => "Games",
            Category::Metaverse => "Metaverse",
            Category::Utility => "Utility",
            Category::Other => "Other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown category `{s}`")))
    }
}

/// One purchase event as exported by a provider.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrade {
    pub buyer: String,
    pub seller: String,
    /// UTC seconds.
    pub ts: i64,
    pub collection_raw: String,
    pub nft_id: String,
    pub url: Option<String>,
    pub currency: String,
    pub amount: f64,
    pub source: Source,
}

/// A cleaned purchase event.
///
/// `price_usd` is `None` when no exchange rate existed for the trade's
/// currency on its UTC day; such records still count for count-based
/// statistics but are skipped by anything denominated in USD.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub buyer: String,
    pub seller: String,
    pub ts: i64,
    pub collection_raw: String,
    pub collection: String,
    pub category: Category,
    pub nft_id: String,
    pub url: Option<String>,
    pub currency: String,
    pub amount: f64,
    pub source: Source,
    pub price_usd: Option<f64>,
}

impl TradeRecord {
    pub fn day(&self) -> i64 {
        utc_day(self.ts)
    }
}

/// Counters reported by [`clean`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanStats {
    pub input_records: usize,
    pub duplicates_removed: usize,
    pub missing_rate: usize,
    pub output_records: usize,
}

pub fn categorize(collection: &str, map: &CategoryMap) -> Category {
    map.get(collection)
}

/// Deduplicates, normalizes, prices and categorizes parsed trades.
///
/// The output is in canonical order: `(ts, nft_id, buyer, seller, source)`.
pub fn clean(raw: Vec<RawTrade>, config: &IngestConfig, rates: &RateTable) -> (Vec<TradeRecord>, CleanStats) {
    let input_records = raw.len();
    let deduped = deduplicate(raw);
    let duplicates_removed = input_records - deduped.len();

    let rules = config.rules();
    let mut name_cache: std::collections::HashMap<String, String> = Default::default();
    let mut missing_rate = 0;
    let mut records: Vec<TradeRecord> = deduped
        .into_iter()
        .map(|t| {
            let collection = name_cache
                .entry(t.collection_raw.clone())
                .or_insert_with(|| normalize_collection(&t.collection_raw, &rules))
                .clone();
            let category = categorize(&collection, &config.categories);
            let price_usd = to_usd(&t, rates);
            if price_usd.is_none() {
                missing_rate += 1;
            }
            TradeRecord {
                buyer: t.buyer,
                seller: t.seller,
                ts: t.ts,
                collection_raw: t.collection_raw,
                collection,
                category,
                nft_id: t.nft_id,
                url: t.url,
                currency: t.currency,
                amount: t.amount,
                source: t.source,
                price_usd,
            }
        })
        .collect();
    sort_canonical(&mut records);

    let stats = CleanStats { input_records, duplicates_removed, missing_rate, output_records: records.len() };
    (records, stats)
}

pub fn sort_canonical(records: &mut [TradeRecord]) {
    records.sort_by(|a, b| {
        (a.ts, &a.nft_id, &a.buyer, &a.seller, a.source).cmp(&(b.ts, &b.nft_id, &b.buyer, &b.seller, b.source))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn day_helpers_round_trip() {
        let day = parse_day("2021-03-01").unwrap();
        assert_eq!(format_day(day), "2021-03-01");
        assert_eq!(utc_day(day * SECONDS_PER_DAY + 86_399), day);
        assert_eq!(utc_day(-1), -1);
    }

    #[test]
    fn source_priority_follows_declaration() {
        assert!(Source::NonFungible.priority() < Source::OpenSea.priority());
        assert_eq!("opensea".parse::<Source>().unwrap(), Source::OpenSea);
        assert!("Rarible".parse::<Source>().is_err());
    }

    #[test]
    fn categorize_uses_map_and_default() {
        let mut map = CategoryMap::default();
        map.insert("Cryptokitties", Category::Art);
        map.insert("Decentraland", Category::Metaverse);
        assert_eq!(categorize("Cryptokitties", &map), Category::Art);
        assert_eq!(categorize("Decentraland", &map), Category::Metaverse);
        assert_eq!(categorize("Unknowncoll", &map), Category::Other);
    }
}
