use std::collections::HashMap;
use std::io::Read;

use serde::Deserialize;

use super::{parse_day, utc_day, RawTrade};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeRate {
    /// UTC day index.
    pub day: i64,
    pub currency: String,
    /// USD per unit of `currency`.
    pub usd_rate: f64,
}

/// Daily USD rates keyed by `(currency, UTC day)`. Currency symbols compare
/// case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct RateTable {
    rates: HashMap<(String, i64), f64>,
}

#[derive(Deserialize)]
struct RateRow {
    date: String,
    currency: String,
    usd_rate: f64,
}

impl RateTable {
    pub fn insert(&mut self, rate: ExchangeRate) -> Result<()> {
        if !(rate.usd_rate > 0.0 && rate.usd_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "usd_rate must be positive, got {} for {}",
                rate.usd_rate, rate.currency
            )));
        }
        self.rates.insert((rate.currency.trim().to_ascii_uppercase(), rate.day), rate.usd_rate);
        Ok(())
    }

    pub fn get(&self, currency: &str, day: i64) -> Option<f64> {
        self.rates.get(&(currency.trim().to_ascii_uppercase(), day)).copied()
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Reads a `date,currency,usd_rate` CSV with `date` as `YYYY-MM-DD`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut table = RateTable::default();
        for (i, row) in csv::Reader::from_reader(reader).deserialize::<RateRow>().enumerate() {
            let row = row?;
            let day = parse_day(&row.date).ok_or_else(|| Error::MalformedRow {
                row: i as u64 + 1,
                message: format!("invalid date `{}`", row.date),
            })?;
            table.insert(ExchangeRate { day, currency: row.currency, usd_rate: row.usd_rate })?;
        }
        Ok(table)
    }
}

/// Price in USD at the rate of the trade's UTC day, or `None` if the table
/// has no rate for that day and currency.
pub fn to_usd(record: &RawTrade, rates: &RateTable) -> Option<f64> {
    rates.get(&record.currency, utc_day(record.ts)).map(|rate| record.amount * rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Source;

    fn trade(currency: &str, amount: f64, ts: i64) -> RawTrade {
        RawTrade {
            buyer: "a".into(),
            seller: "b".into(),
            ts,
            collection_raw: "c".into(),
            nft_id: "n".into(),
            url: None,
            currency: currency.into(),
            amount,
            source: Source::OpenSea,
        }
    }

    #[test]
    fn converts_with_daily_rate() {
        let csv = "date,currency,usd_rate\n1970-01-02,ETH,2000\n1970-01-02,WAX,0.1\n";
        let rates = RateTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(to_usd(&trade("ETH", 2.0, 86_400 + 5), &rates), Some(4000.0));
        assert_eq!(to_usd(&trade("wax", 0.0, 86_400), &rates), Some(0.0));
        // day 0 has no rate
        assert_eq!(to_usd(&trade("ETH", 1.0, 100), &rates), None);
    }

    #[test]
    fn rejects_non_positive_rates() {
        let csv = "date,currency,usd_rate\n2021-01-01,ETH,0\n";
        assert!(RateTable::from_csv(csv.as_bytes()).is_err());
    }
}
