use std::collections::BTreeSet;

use nftmarket::ingest::{
    clean, deduplicate, parse_trades, Category, IngestConfig, RateTable, RawTrade, Schema, Source, TradeRecord,
    TRADE_COLUMNS,
};
use nftmarket::stats::{resale_fraction_curve, rolling_series, sale_timelines, Cohort, RollingOptions, TOTAL_GROUP};
use proptest::prelude::*;

const DAY: i64 = 86_400;
const T0: i64 = 1_600_000_000;

fn raw(key: (u8, i64, usize), source: Source) -> RawTrade {
    RawTrade {
        buyer: format!("b{}", key.0),
        seller: "s".into(),
        ts: T0 + key.1,
        collection_raw: "Coll".into(),
        nft_id: format!("n{}", key.0 % 3),
        url: None,
        currency: "ETH".into(),
        amount: 1.0,
        source,
    }
}

fn record(buyer: u8, nft: u8, day: i64, category: Category, price: Option<f64>) -> TradeRecord {
    TradeRecord {
        buyer: format!("b{buyer}"),
        seller: format!("s{}", nft % 4),
        ts: T0 + day * DAY + i64::from(nft),
        collection_raw: format!("C{}", nft % 3),
        collection: format!("C{}", nft % 3),
        category,
        nft_id: format!("n{nft}"),
        url: None,
        currency: "ETH".into(),
        amount: 1.0,
        source: Source::OpenSea,
        price_usd: price,
    }
}

fn records() -> impl Strategy<Value = Vec<TradeRecord>> {
    proptest::collection::vec(
        (0u8..6, 0u8..12, 0i64..120, 0usize..6, proptest::option::weighted(0.9, 0.0f64..500.0)),
        1..80,
    )
    .prop_map(|v| v.into_iter().map(|(b, n, d, c, p)| record(b, n, d, Category::ALL[c], p)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deduplication_is_idempotent(keys in proptest::collection::vec((0u8..5, 0i64..3, 0usize..7), 0..50)) {
        let input: Vec<RawTrade> = keys.iter().map(|&(b, t, s)| raw((b, t, s), Source::ALL[s])).collect();
        let once = deduplicate(input);
        prop_assert_eq!(deduplicate(once.clone()), once);
    }

    #[test]
    fn parsed_rows_are_conserved(rows in proptest::collection::vec((0u8..4, any::<bool>(), any::<bool>()), 0..60)) {
        let mut csv = TRADE_COLUMNS.join(",");
        csv.push('\n');
        for (i, (kind, empty, bad_ts)) in rows.iter().enumerate() {
            let buyer = if *empty { "" } else { "b" };
            let ts = if *bad_ts { "x".to_string() } else { (T0 + i as i64).to_string() };
            csv.push_str(&format!("{buyer},s,{ts},Coll,n{kind},,ETH,1.5,OpenSea\n"));
        }
        let out = parse_trades(csv.as_bytes(), Schema::Csv, false).unwrap();
        prop_assert_eq!(out.rows_seen(), rows.len());
        prop_assert_eq!(out.trades.len() + out.dropped(), rows.len());

        let n = out.trades.len();
        let (clean_rows, stats) = clean(out.trades, &IngestConfig::default(), &RateTable::default());
        prop_assert_eq!(stats.input_records, n);
        prop_assert_eq!(clean_rows.len() + stats.duplicates_removed, n);
    }

    #[test]
    fn category_shares_sum_to_one(trades in records(), window in 1u32..10) {
        let report = rolling_series(&trades, RollingOptions { window_days: window, ..RollingOptions::default() });
        let days: BTreeSet<i64> = report.rows.iter().map(|r| r.day).collect();
        for day in days {
            let rows: Vec<_> = report.rows.iter().filter(|r| r.day == day && r.group != TOTAL_GROUP).collect();
            let vol: Vec<f64> = rows.iter().filter_map(|r| r.volume_share).collect();
            if !vol.is_empty() {
                prop_assert!((vol.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            let cnt: Vec<f64> = rows.iter().filter_map(|r| r.transaction_share).collect();
            if !cnt.is_empty() {
                prop_assert!((cnt.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_primary_sale_per_nft(trades in records()) {
        let timelines = sale_timelines(&trades);
        let nfts: BTreeSet<&str> = trades.iter().map(|t| t.nft_id.as_str()).collect();
        prop_assert_eq!(timelines.len(), nfts.len());
        prop_assert_eq!(timelines.iter().map(|t| t.sales.len()).sum::<usize>(), trades.len());
        for tl in &timelines {
            let first = trades.iter().filter(|t| t.nft_id == tl.nft_id).map(|t| t.ts).min().unwrap();
            prop_assert_eq!(tl.primary().ts, first);
            prop_assert!(tl.secondary().iter().all(|s| s.ts >= first));
        }
    }

    #[test]
    fn fixed_cohort_resale_curve_is_monotone(trades in records(), extra in 0i64..200) {
        let timelines = sale_timelines(&trades);
        let end = trades.iter().map(|t| t.ts).max().unwrap() + extra * DAY;
        let curve = resale_fraction_curve(&timelines, &[1, 7, 30, 90], end, Cohort::Fixed);
        for w in curve.windows(2) {
            prop_assert!(w[0].fraction.is_nan() || w[1].fraction >= w[0].fraction);
            prop_assert_eq!(w[0].n_observable, w[1].n_observable);
        }
    }
}
