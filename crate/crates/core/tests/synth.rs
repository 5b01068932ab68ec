use std::collections::HashMap;

use nftmarket::ingest::{clean, parse_trades, RateTable, Schema, TradeRecord};
use nftmarket::network::{build_trader_network, modularity, Partition};
use nftmarket::synth::{generate_market, SynthConfig, SynthMarket};
use nftmarket::visual::{group_distance_matrix, DistanceOptions};

fn config(theta: f64) -> SynthConfig {
    SynthConfig {
        seed: 12,
        n_collections: 60,
        n_traders: 3_000,
        theta,
        span_days: 365,
        embedding_dim: 32,
        embedded_per_collection: 6,
        embedding_spread: 0.05,
        ..SynthConfig::default()
    }
}

fn ingest(m: &SynthMarket) -> (Vec<TradeRecord>, usize, usize) {
    let mut buf = Vec::new();
    m.write_trades(&mut buf).unwrap();
    let parsed = parse_trades(buf.as_slice(), Schema::Csv, true).unwrap();
    let dropped = parsed.dropped();
    let mut rbuf = Vec::new();
    m.write_rates(&mut rbuf).unwrap();
    let rates = RateTable::from_csv(rbuf.as_slice()).unwrap();
    let (records, stats) = clean(parsed.trades, &m.ingest_config, &rates);
    (records, dropped, stats.duplicates_removed + stats.missing_rate)
}

#[test]
fn generated_trades_ingest_without_drops() {
    let m = generate_market(&config(0.8)).unwrap();
    let (records, dropped, lost) = ingest(&m);
    assert_eq!(dropped, 0);
    assert_eq!(lost, 0);
    assert_eq!(records.len(), m.trades.len());
    assert!(records.iter().all(|r| r.price_usd.is_some()));
}

#[test]
fn modularity_grows_with_home_bias() {
    let q: Vec<f64> = [0.2, 0.5, 0.9]
        .iter()
        .map(|&theta| {
            let m = generate_market(&config(theta)).unwrap();
            let (records, _, _) = ingest(&m);
            let (g, _) = build_trader_network(&records);
            modularity(&g, &Partition::from_map(&g, &m.home_map()).unwrap()).unwrap()
        })
        .collect();
    assert!(q[0] < q[1] && q[1] < q[2], "{q:?}");
}

#[test]
fn embeddings_cluster_by_collection() {
    let m = generate_market(&config(0.8)).unwrap();
    let (records, _, _) = ingest(&m);
    let by_object: HashMap<String, String> =
        records.iter().filter_map(|r| Some((r.url.clone()?, r.collection.clone()))).collect();
    let summary = group_distance_matrix(&m.embeddings, &by_object, DistanceOptions::default());
    let intra = summary.pooled_intra().unwrap().mean;
    let inter = summary.pooled_inter().unwrap().mean;
    assert!(intra < inter, "intra {intra} inter {inter}");
}
