use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use log::debug;
use serde_json::Value;

use super::{RawTrade, Source};
use crate::error::{Error, Result};

/// Column names, in the order they appear in CSV exports.
pub const TRADE_COLUMNS: [&str; 9] =
    ["buyer", "seller", "ts", "collection", "nft_id", "url", "currency", "amount", "source"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Csv,
    Jsonl,
}

impl Schema {
    pub fn from_path(path: &Path) -> Option<Schema> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Schema::Csv),
            "jsonl" | "ndjson" => Some(Schema::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub trades: Vec<RawTrade>,
    /// Rows with a required field empty (every field but `url` is required).
    pub dropped_empty: usize,
    /// Rows that could not be decoded or violated a field invariant.
    pub malformed: usize,
}

impl ParseOutcome {
    pub fn rows_seen(&self) -> usize {
        self.trades.len() + self.dropped_empty + self.malformed
    }

    pub fn dropped(&self) -> usize {
        self.dropped_empty + self.malformed
    }
}

enum RowError {
    Empty(&'static str),
    Malformed(String),
}

/// Field values of one row, borrowed from the decoded record.
struct Fields<'a> {
    values: [Option<std::borrow::Cow<'a, str>>; 9],
}

impl Fields<'_> {
    fn into_trade(self) -> Result<RawTrade, RowError> {
        let [buyer, seller, ts, collection, nft_id, url, currency, amount, source] = self.values;
        let req = |v: Option<std::borrow::Cow<'_, str>>, name: &'static str| {
            v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).ok_or(RowError::Empty(name))
        };
        let buyer = req(buyer, "buyer")?;
        let seller = req(seller, "seller")?;
        let ts = req(ts, "ts")?;
        let collection_raw = req(collection, "collection")?;
        let nft_id = req(nft_id, "nft_id")?;
        let currency = req(currency, "currency")?;
        let amount = req(amount, "amount")?;
        let source = req(source, "source")?;
        let url = url.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());

        let ts: i64 = ts.parse().map_err(|_| RowError::Malformed(format!("invalid ts `{ts}`")))?;
        if ts <= 0 {
            return Err(RowError::Malformed(format!("ts must be positive, got {ts}")));
        }
        let amount: f64 = amount.parse().map_err(|_| RowError::Malformed(format!("invalid amount `{amount}`")))?;
        if !amount.is_finite() || amount < 0.0 {
            return Err(RowError::Malformed(format!("amount must be finite and non-negative, got {amount}")));
        }
        let source: Source = source.parse().map_err(|e: Error| RowError::Malformed(e.to_string()))?;

        Ok(RawTrade { buyer, seller, ts, collection_raw, nft_id, url, currency, amount, source })
    }
}

/// Reads a trade export. Rows with an empty required field are dropped and
/// counted; malformed rows are counted and skipped, or abort the parse with
/// their row number when `strict` is set. Input order is preserved.
pub fn parse_trades<R: Read>(reader: R, schema: Schema, strict: bool) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    let mut handle = |row: u64, result: Result<RawTrade, RowError>| -> Result<()> {
        match result {
            Ok(t) => out.trades.push(t),
            Err(RowError::Empty(field)) => {
                debug!("row {row}: empty `{field}`, dropped");
                out.dropped_empty += 1;
            }
            Err(RowError::Malformed(message)) => {
                if strict {
                    return Err(Error::MalformedRow { row, message });
                }
                debug!("row {row}: {message}, skipped");
                out.malformed += 1;
            }
        }
        Ok(())
    };

    match schema {
        Schema::Csv => {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
            let headers = rdr.headers()?.clone();
            let index: Vec<Option<usize>> =
                TRADE_COLUMNS.iter().map(|c| headers.iter().position(|h| h.trim() == *c)).collect();
            if let Some(missing) = TRADE_COLUMNS.iter().zip(&index).find_map(|(c, i)| i.is_none().then_some(*c)) {
                return Err(Error::Format { kind: "trades", message: format!("missing column `{missing}`") });
            }
            for (i, record) in rdr.records().enumerate() {
                let row = i as u64 + 1;
                let result = match record {
                    Ok(rec) if rec.len() != headers.len() => {
                        Err(RowError::Malformed(format!("expected {} fields, found {}", headers.len(), rec.len())))
                    }
                    Ok(rec) => {
                        let values =
                            std::array::from_fn(|k| index[k].and_then(|c| rec.get(c)).map(|s| s.to_string().into()));
                        Fields { values }.into_trade()
                    }
                    Err(e) => Err(RowError::Malformed(e.to_string())),
                };
                handle(row, result)?;
            }
        }
        Schema::Jsonl => {
            let mut row = 0u64;
            for line in BufReader::new(reader).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                row += 1;
                let result = match serde_json::from_str::<Value>(&line) {
                    Ok(Value::Object(map)) => {
                        let values = std::array::from_fn(|k| {
                            map.get(TRADE_COLUMNS[k]).and_then(|v| match v {
                                Value::Null => None,
                                Value::String(s) => Some(s.clone().into()),
                                other => Some(other.to_string().into()),
                            })
                        });
                        Fields { values }.into_trade()
                    }
                    Ok(_) => Err(RowError::Malformed("not a JSON object".into())),
                    Err(e) => Err(RowError::Malformed(e.to_string())),
                };
                handle(row, result)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "buyer,seller,ts,collection,nft_id,url,currency,amount,source\n";

    #[test]
    fn empty_stream_yields_nothing() {
        let out = parse_trades(HEADER.as_bytes(), Schema::Csv, false).unwrap();
        assert!(out.trades.is_empty());
        assert_eq!(out.dropped(), 0);
        let out = parse_trades("".as_bytes(), Schema::Jsonl, false).unwrap();
        assert_eq!(out.rows_seen(), 0);
    }

    #[test]
    fn valid_rows_pass_through_in_order() {
        let data = format!(
            "{HEADER}a,b,10,Punks,n1,,ETH,1.5,OpenSea\n\
             c,d,5,Punks,n2,http://x,ETH,2,NonFungible\n\
             e,f,7,Kitties,n3,,WAX,0,Atomic\n"
        );
        let out = parse_trades(data.as_bytes(), Schema::Csv, false).unwrap();
        let ids: Vec<_> = out.trades.iter().map(|t| t.nft_id.as_str()).collect();
        assert_eq!(ids, ["n1", "n2", "n3"]);
        assert_eq!(out.trades[0].url, None);
        assert_eq!(out.trades[1].url.as_deref(), Some("http://x"));
        assert_eq!(out.trades[2].source, Source::Atomic);
    }

    #[test]
    fn missing_seller_is_dropped_and_counted() {
        let data = format!("{HEADER}a,,10,Punks,n1,,ETH,1,OpenSea\na,b,11,Punks,n2,,ETH,1,OpenSea\n");
        let out = parse_trades(data.as_bytes(), Schema::Csv, false).unwrap();
        assert_eq!(out.trades.len(), 1);
        assert_eq!(out.dropped_empty, 1);
        assert_eq!(out.rows_seen(), 2);
    }

    #[test]
    fn malformed_rows_skip_or_abort_in_strict_mode() {
        let data = format!(
            "{HEADER}a,b,10,P,n1,,ETH,1,OpenSea\na,b,notanumber,P,n2,,ETH,1,OpenSea\na,b,-3,P,n3,,ETH,1,OpenSea\n"
        );
        let out = parse_trades(data.as_bytes(), Schema::Csv, false).unwrap();
        assert_eq!(out.trades.len(), 1);
        assert_eq!(out.malformed, 2);

        let err = parse_trades(data.as_bytes(), Schema::Csv, true).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_source_and_negative_amount_are_malformed() {
        let data = format!("{HEADER}a,b,10,P,n1,,ETH,1,Rarible\na,b,10,P,n1,,ETH,-1,OpenSea\n");
        let out = parse_trades(data.as_bytes(), Schema::Csv, false).unwrap();
        assert_eq!(out.malformed, 2);
    }

    #[test]
    fn jsonl_accepts_numbers_and_nulls() {
        let data = r#"{"buyer":"a","seller":"b","ts":10,"collection":"P","nft_id":"n1","url":null,"currency":"ETH","amount":1.25,"source":"OpenSea"}

{"buyer":"a","seller":"","ts":10,"collection":"P","nft_id":"n1","currency":"ETH","amount":1,"source":"OpenSea"}
[1,2]
"#;
        let out = parse_trades(data.as_bytes(), Schema::Jsonl, false).unwrap();
        assert_eq!(out.trades.len(), 1);
        assert_eq!(out.trades[0].amount, 1.25);
        assert_eq!(out.trades[0].url, None);
        assert_eq!(out.dropped_empty, 1);
        assert_eq!(out.malformed, 1);
    }

    #[test]
    fn missing_header_column_is_a_format_error() {
        let data = "buyer,seller,ts\na,b,1\n";
        assert!(matches!(parse_trades(data.as_bytes(), Schema::Csv, false), Err(Error::Format { .. })));
    }
}
