//! Canonical trade store: a sorted CSV with a fixed column order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Category, Source, TradeRecord};
use crate::error::Result;

#[derive(Debug, Serialize, Deserialize)]
struct StoreRow {
    ts: i64,
    buyer: String,
    seller: String,
    nft_id: String,
    collection: String,
    category: Category,
    price_usd: Option<f64>,
    currency: String,
    amount: f64,
    source: Source,
    url: Option<String>,
    collection_raw: String,
}

pub fn write_store<W: Write>(records: &[TradeRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(StoreRow {
            ts: r.ts,
            buyer: r.buyer.clone(),
            seller: r.seller.clone(),
            nft_id: r.nft_id.clone(),
            collection: r.collection.clone(),
            category: r.category,
            price_usd: r.price_usd,
            currency: r.currency.clone(),
            amount: r.amount,
            source: r.source,
            url: r.url.clone(),
            collection_raw: r.collection_raw.clone(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_store<R: Read>(reader: R) -> Result<Vec<TradeRecord>> {
    csv::Reader::from_reader(reader)
        .deserialize::<StoreRow>()
        .map(|row| {
            let r = row?;
            Ok(TradeRecord {
                buyer: r.buyer,
                seller: r.seller,
                ts: r.ts,
                collection_raw: r.collection_raw,
                collection: r.collection,
                category: r.category,
                nft_id: r.nft_id,
                url: r.url.filter(|u| !u.is_empty()),
                currency: r.currency,
                amount: r.amount,
                source: r.source,
                price_usd: r.price_usd,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_round_trips() {
        let rec = TradeRecord {
            buyer: "0xa".into(),
            seller: "0xb".into(),
            ts: 1_600_000_000,
            collection_raw: "punks-1".into(),
            collection: "Punks".into(),
            category: Category::Collectible,
            nft_id: "p1".into(),
            url: None,
            currency: "ETH".into(),
            amount: 0.1,
            source: Source::OpenSea,
            price_usd: None,
        };
        let mut priced = rec.clone();
        priced.price_usd = Some(123.456);
        priced.url = Some("obj/1".into());

        let mut buf = Vec::new();
        write_store(&[rec.clone(), priced.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "ts,buyer,seller,nft_id,collection,category,price_usd,currency,amount,source,url,collection_raw\n"
        ));
        assert_eq!(read_store(buf.as_slice()).unwrap(), vec![rec, priced]);
    }
}
