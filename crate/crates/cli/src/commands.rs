use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::{info, warn};
use nftmarket::ingest::store::{read_store, write_store};
use nftmarket::ingest::{clean, format_day, parse_trades, utc_day, IngestConfig, RateTable, Schema, TradeRecord};
use nftmarket::network::{
    active_days, assortativity, build_nft_network, build_trader_network, modularity, null_modularity, scc, scc_summary,
    specialization_all, strength_activity_slope, NftNetworkOptions, Partition, TradeGraph,
};
use nftmarket::predict::{build_features, run_experiments, write_feature_rows, FeatureOptions, TargetMode, Window};
use nftmarket::stats::{
    fit_power_law, price_percentiles, resale_fraction_curve, rolling_series, sale_timelines, summarize_timelines,
    Cohort, FitOptions, RollingOptions, SaleTimeline, TailKind, REPORTED_PERCENTILES,
};
use nftmarket::synth::generate_market;
use nftmarket::visual::{
    downsample_groups, fit_pca, group_distance_matrix, inter_intra_ratio, object_labels, DistanceOptions,
    EmbeddingMatrix, Metric, PcaModel, PcaOptions,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{require_file, RunConfig};
use crate::manifest;
use crate::Failure;

pub const STORE_FILE: &str = "trades.csv";
/// Subdirectories bundled by `report`, in pipeline order.
pub const STAGES: [&str; 5] = ["ingest", "stats", "network", "visual", "predict"];

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(anyhow::Error::from)?;
    w.write_all(b"\n").map_err(anyhow::Error::from)?;
    w.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

fn stage_dir(cfg: &RunConfig, stage: &str) -> Result<PathBuf, Failure> {
    let dir = cfg.dir(stage);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Header fields shared by every JSON output.
fn provenance(cfg: &RunConfig) -> Value {
    json!({ "seed": cfg.seed, "config_sha256": cfg.hash() })
}

fn with_provenance(cfg: &RunConfig, body: Value) -> Value {
    let mut v = provenance(cfg);
    if let (Some(m), Value::Object(b)) = (v.as_object_mut(), body) {
        m.extend(b);
    }
    v
}

fn fit_json(samples: &[f64], kind: TailKind, xmin: Option<f64>) -> Value {
    let opts = FitOptions { xmin, ..FitOptions::new(kind) };
    match fit_power_law(samples, opts) {
        Ok(fit) => serde_json::to_value(fit).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string(), "n_samples": samples.len() }),
    }
}

pub fn synth(cfg: &RunConfig) -> Result<(), Failure> {
    let mut sc = cfg.synth.clone();
    sc.seed = cfg.seed;
    let market = generate_market(&sc)?;
    let dir = stage_dir(cfg, "synth")?;
    let files = market.write_dir(&dir)?;
    info!(
        "synth: {} trades, {} collections, {} embeddings in {}",
        market.trades.len(),
        market.truth.collections.len(),
        market.embeddings.len(),
        dir.display()
    );
    write_json(&dir.join("synth_config.json"), &with_provenance(cfg, json!({ "synth": sc, "files": files })))
}

pub fn ingest(cfg: &RunConfig) -> Result<Vec<TradeRecord>, Failure> {
    let trades = cfg.trades();
    for p in &trades {
        require_file(p, "trades file")?;
    }
    let rates_path = cfg.rates();
    if let Some(p) = &rates_path {
        require_file(p, "rates file")?;
    }
    let config_path = cfg.ingest_config();
    if let Some(p) = &config_path {
        require_file(p, "ingest config")?;
    }
    let ingest_cfg = match &config_path {
        Some(p) => IngestConfig::load(p).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?,
        None => IngestConfig::default(),
    };
    let rates = match &rates_path {
        Some(p) => RateTable::from_csv(File::open(p).with_context(|| format!("opening {}", p.display()))?)?,
        None => {
            warn!("no rates file; USD prices will be missing");
            RateTable::default()
        }
    };

    let mut raw = Vec::new();
    let mut per_file = Vec::new();
    for p in &trades {
        let schema = Schema::from_path(p)
            .ok_or_else(|| Failure::Validation(format!("unknown trade file type: {}", p.display())))?;
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        let outcome = parse_trades(std::io::BufReader::new(f), schema, cfg.ingest.strict)?;
        info!(
            "ingest: {} rows from {}, {} empty, {} malformed",
            outcome.rows_seen(),
            p.display(),
            outcome.dropped_empty,
            outcome.malformed
        );
        per_file.push(json!({
            "path": manifest::display_path(cfg, p),
            "rows": outcome.rows_seen(),
            "dropped_empty": outcome.dropped_empty,
            "malformed": outcome.malformed,
        }));
        raw.extend(outcome.trades);
    }
    let (records, stats) = clean(raw, &ingest_cfg, &rates);
    info!(
        "ingest: {} records kept, {} duplicates, {} without rate",
        stats.output_records, stats.duplicates_removed, stats.missing_rate
    );
    let dir = stage_dir(cfg, "ingest")?;
    let mut w = create(&dir.join(STORE_FILE))?;
    write_store(&records, &mut w)?;
    w.flush().map_err(anyhow::Error::from)?;
    write_json(&dir.join("ingest_stats.json"), &with_provenance(cfg, json!({ "files": per_file, "clean": stats })))?;
    Ok(records)
}

/// The canonical store if `ingest` has run, otherwise a fresh ingest.
pub fn load_trades(cfg: &RunConfig) -> Result<Vec<TradeRecord>, Failure> {
    let store = cfg.dir("ingest").join(STORE_FILE);
    if store.is_file() {
        let f = File::open(&store).with_context(|| format!("opening {}", store.display()))?;
        let records = read_store(std::io::BufReader::new(f))?;
        info!("loaded {} records from {}", records.len(), store.display());
        Ok(records)
    } else {
        info!("no trade store at {}; ingesting", store.display());
        ingest(cfg)
    }
}

fn dataset_end(trades: &[TradeRecord]) -> i64 {
    trades.iter().map(|t| t.ts).max().unwrap_or(0)
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn stats(cfg: &RunConfig) -> Result<(), Failure> {
    let trades = load_trades(cfg)?;
    let dir = stage_dir(cfg, "stats")?;
    let o = &cfg.stats;

    let series = rolling_series(
        &trades,
        RollingOptions { window_days: o.window_days, centered: o.centered, low_volume_usd: o.low_volume_usd },
    );
    let mut w = csv::Writer::from_writer(create(&dir.join("daily_series.csv"))?);
    w.write_record([
        "date",
        "group",
        "volume_usd",
        "n_transactions",
        "n_traders",
        "n_collections",
        "volume_share",
        "transaction_share",
        "low_volume",
    ])
    .map_err(anyhow::Error::from)?;
    for r in &series.rows {
        w.write_record([
            format_day(r.day),
            r.group.clone(),
            r.volume_usd.to_string(),
            r.n_transactions.to_string(),
            r.n_traders.to_string(),
            r.n_collections.to_string(),
            opt_num(r.volume_share),
            opt_num(r.transaction_share),
            r.low_volume.to_string(),
        ])
        .map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;

    let mut w = csv::Writer::from_writer(create(&dir.join("price_percentiles.csv"))?);
    let mut header = vec!["group".to_string(), "n_nfts".to_string()];
    header.extend(REPORTED_PERCENTILES.iter().map(|p| format!("p{p}")));
    w.write_record(&header).map_err(anyhow::Error::from)?;
    for r in price_percentiles(&trades) {
        let mut rec = vec![r.group.clone(), r.n_nfts.to_string()];
        if r.values.is_empty() {
            rec.extend(REPORTED_PERCENTILES.iter().map(|_| String::new()));
        } else {
            rec.extend(r.values.iter().map(|v| v.to_string()));
        }
        w.write_record(&rec).map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;

    let timelines = sale_timelines(&trades);
    write_price_changes(&dir.join("price_changes.csv"), &timelines)?;
    let cohort = if o.fixed_cohort { Cohort::Fixed } else { Cohort::PerHorizon };
    let curve = resale_fraction_curve(&timelines, &o.resale_horizons, dataset_end(&trades), cohort);
    let mut w = csv::Writer::from_writer(create(&dir.join("resale_curve.csv"))?);
    w.write_record(["horizon_days", "fraction", "n_observable"]).map_err(anyhow::Error::from)?;
    for p in &curve {
        w.write_record([p.horizon_days.to_string(), p.fraction.to_string(), p.n_observable.to_string()])
            .map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;

    let mut per_collection: BTreeMap<&str, std::collections::BTreeSet<&str>> = BTreeMap::new();
    for t in &trades {
        per_collection.entry(&t.collection).or_default().insert(&t.nft_id);
    }
    let sizes: Vec<f64> = per_collection.values().map(|s| s.len() as f64).collect();
    let sales: Vec<f64> = timelines.iter().map(|t| t.sales.len() as f64).collect();
    write_json(
        &dir.join("stats_summary.json"),
        &with_provenance(
            cfg,
            json!({
                "n_records": trades.len(),
                "timelines": summarize_timelines(&timelines),
                "power_laws": {
                    "nfts_per_collection": fit_json(&sizes, TailKind::Discrete, None),
                    "sales_per_nft": fit_json(&sales, TailKind::Discrete, cfg.stats.sales_xmin),
                },
            }),
        ),
    )?;
    info!("stats: {} daily rows, {} timelines", series.rows.len(), timelines.len());
    Ok(())
}

fn write_price_changes(path: &Path, timelines: &[SaleTimeline]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["nft_id", "sale_index", "ts", "price_usd", "change_ratio"]).map_err(anyhow::Error::from)?;
    for t in timelines {
        for (i, (s, ratio)) in t.sales.iter().zip(t.price_changes()).enumerate() {
            w.write_record([t.nft_id.clone(), i.to_string(), s.ts.to_string(), opt_num(s.price_usd), opt_num(ratio)])
                .map_err(anyhow::Error::from)?;
        }
    }
    w.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

fn write_edges(path: &Path, g: &TradeGraph) -> Result<(), Failure> {
    let mut w = create(path)?;
    g.write_edge_list(&mut w)?;
    w.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

pub fn network(cfg: &RunConfig) -> Result<(), Failure> {
    let trades = load_trades(cfg)?;
    let dir = stage_dir(cfg, "network")?;

    let (tg, build_stats) = build_trader_network(&trades);
    write_edges(&dir.join("trader_edges.csv"), &tg)?;
    let strengths: Vec<f64> = tg.strengths().iter().filter(|s| **s > 0).map(|s| *s as f64).collect();
    let activity = active_days(&trades);
    let lambda2 = strength_activity_slope(&tg, &activity).map_err(|e| e.to_string());
    let assort = assortativity(&tg).map_err(|e| e.to_string());

    let spec = specialization_all(&trades);
    let mut w = csv::Writer::from_writer(create(&dir.join("specialization.csv"))?);
    w.write_record(["trader", "n_trades", "top_share", "top2_share", "top_collection"]).map_err(anyhow::Error::from)?;
    for (trader, s) in &spec {
        w.write_record([
            trader.clone(),
            s.n_trades.to_string(),
            s.top_share.to_string(),
            s.top2_share.to_string(),
            s.top_collection.clone(),
        ])
        .map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;
    let n_spec = spec.len().max(1) as f64;
    let mean_top = spec.values().map(|s| s.top_share).sum::<f64>() / n_spec;
    let mean_top2 = spec.values().map(|s| s.top2_share).sum::<f64>() / n_spec;

    let modularity_json = if tg.n_edges() == 0 {
        json!({ "error": "trader network has no edges" })
    } else {
        let partition = Partition::by_top_collection(&tg)?;
        let mut w = create(&dir.join("communities.csv"))?;
        partition.write_csv(&tg, &mut w)?;
        w.flush().map_err(anyhow::Error::from)?;
        let q = modularity(&tg, &partition)?;
        let nm = null_modularity(&tg, &partition, cfg.network.null_realizations, cfg.seed)?;
        info!("network: modularity {q:.4}, null {:.4} ± {:.4}", nm.mean, nm.std_dev);
        json!({
            "partition": "top_collection",
            "n_communities": partition.n_communities(),
            "observed": q,
            "null_mean": nm.mean,
            "null_std_dev": nm.std_dev,
            "null_sem": nm.sem,
            "n_realizations": nm.n_realizations,
            "z_score": if nm.std_dev > 0.0 { Some(nm.z_score(q)) } else { None },
        })
    };

    let ng = build_nft_network(&trades, NftNetworkOptions { clique_within_event: cfg.network.clique_within_event });
    write_edges(&dir.join("nft_edges.csv"), &ng)?;
    let nft_strengths: Vec<f64> = ng.strengths().iter().filter(|s| **s > 0).map(|s| *s as f64).collect();
    let components = scc(&ng);
    let summary = scc_summary(&ng, &components);

    write_json(
        &dir.join("network_summary.json"),
        &with_provenance(
            cfg,
            json!({
                "trader_network": {
                    "n_nodes": tg.n_nodes(),
                    "n_edges": tg.n_edges(),
                    "total_weight": tg.total_weight(),
                    "self_trades_excluded": build_stats.self_trades,
                    "strength_power_law": fit_json(&strengths, TailKind::Discrete, None),
                    "strength_activity_slope": lambda2.map_or_else(|e| json!({ "error": e }), |v| json!(v)),
                    "assortativity": assort.map_or_else(|e| json!({ "error": e }), |v| json!(v)),
                    "mean_top_share": mean_top,
                    "mean_top2_share": mean_top2,
                    "modularity": modularity_json,
                },
                "nft_network": {
                    "n_nodes": ng.n_nodes(),
                    "n_edges": ng.n_edges(),
                    "total_weight": ng.total_weight(),
                    "strength_power_law": fit_json(&nft_strengths, TailKind::Discrete, None),
                    "scc": summary,
                },
            }),
        ),
    )?;
    info!("network: trader graph {} nodes, NFT graph {} nodes", tg.n_nodes(), ng.n_nodes());
    Ok(())
}

/// Embeddings of objects that appear in `trades`, checked against the
/// configured dimension. `None` when no embedding file is configured.
fn load_embeddings(cfg: &RunConfig, trades: &[TradeRecord]) -> Result<Option<EmbeddingMatrix>, Failure> {
    let Some(path) = cfg.embeddings() else { return Ok(None) };
    require_file(&path, "embeddings file")?;
    let emb = EmbeddingMatrix::load(&path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    if emb.dim() != cfg.visual.expected_dim {
        return Err(Failure::Validation(format!(
            "{}: embedding length {} differs from the expected {}",
            path.display(),
            emb.dim(),
            cfg.visual.expected_dim
        )));
    }
    let objects: std::collections::HashSet<&str> = trades.iter().filter_map(|t| t.url.as_deref()).collect();
    let kept = emb.filter(|id| objects.contains(id));
    if kept.len() < emb.len() {
        info!("{} of {} embeddings belong to traded objects", kept.len(), emb.len());
    }
    Ok(Some(kept))
}

fn fit_model(cfg: &RunConfig, emb: &EmbeddingMatrix) -> Result<PcaModel, Failure> {
    Ok(fit_pca(emb, PcaOptions { k: cfg.visual.pca_k, seed: cfg.seed, ..PcaOptions::default() })?)
}

pub fn visual(cfg: &RunConfig) -> Result<(), Failure> {
    let trades = load_trades(cfg)?;
    let Some(emb) = load_embeddings(cfg, &trades)? else {
        return Err(Failure::Validation("visual needs an embeddings file (--embeddings)".into()));
    };
    let dir = stage_dir(cfg, "visual")?;
    let by_category = object_labels(&trades, |t| t.category.to_string());
    let by_collection = object_labels(&trades, |t| t.collection.clone());
    let sample = if cfg.visual.max_per_group > 0 {
        downsample_groups(&emb, &by_category, cfg.visual.max_per_group, cfg.seed)
    } else {
        emb.clone()
    };
    let dist = group_distance_matrix(
        &sample,
        &by_category,
        DistanceOptions { max_pairs_per_cell: cfg.visual.max_pairs_per_cell, seed: cfg.seed },
    );
    let mut w = create(&dir.join("distance_category.csv"))?;
    dist.write_csv(&mut w)?;
    w.flush().map_err(anyhow::Error::from)?;

    let model = fit_model(cfg, &emb)?;
    model.save(&dir.join("pca.pca1"))?;
    let scores = model.project_all(&emb)?;
    let mut w = csv::Writer::from_writer(create(&dir.join("pca_scores.csv"))?);
    let mut header = vec!["object_id".to_string(), "category".into(), "collection".into()];
    header.extend((1..=model.k()).map(|i| format!("pc{i}")));
    w.write_record(&header).map_err(anyhow::Error::from)?;
    for (id, s) in emb.ids().iter().zip(&scores) {
        let mut rec = vec![id.clone(), by_category[id].clone(), by_collection[id].clone()];
        rec.extend(s.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;

    let ratio = |grouping: &HashMap<String, String>| -> Value {
        let labels: Vec<&str> = emb.ids().iter().map(|id| grouping[id].as_str()).collect();
        match inter_intra_ratio(&scores, &labels, Metric::Euclidean, cfg.visual.max_pairs_per_cell, cfg.seed) {
            Ok(r) => serde_json::to_value(r).expect("ratio serializes"),
            Err(e) => json!({ "error": e.to_string() }),
        }
    };
    write_json(
        &dir.join("visual_summary.json"),
        &with_provenance(
            cfg,
            json!({
                "n_objects": emb.len(),
                "dim": emb.dim(),
                "negative_components": emb.negative_components(),
                "pooled_intra_category": dist.pooled_intra(),
                "pooled_inter_category": dist.pooled_inter(),
                "pca": {
                    "k": model.k(),
                    "explained_variance": model.explained_variance,
                    "explained_ratio": model.explained_ratio,
                    "total_variance": model.total_variance,
                },
                "separation_by_category": ratio(&by_category),
                "separation_by_collection": ratio(&by_collection),
            }),
        ),
    )?;
    info!("visual: {} objects, PC1 explains {:.3}", emb.len(), model.explained_ratio[0]);
    Ok(())
}

pub fn predict(cfg: &RunConfig) -> Result<(), Failure> {
    let trades = load_trades(cfg)?;
    let dir = stage_dir(cfg, "predict")?;
    let timelines = sale_timelines(&trades);
    let vis: Option<HashMap<String, Vec<f64>>> = match load_embeddings(cfg, &trades)? {
        Some(emb) if emb.len() > cfg.visual.pca_k => {
            let model = fit_model(cfg, &emb)?;
            let scores = model.project_all(&emb)?;
            Some(emb.ids().iter().cloned().zip(scores).collect())
        }
        Some(emb) => {
            warn!("{} embeddings are too few for PCA; visual features left out", emb.len());
            None
        }
        None => {
            info!("no embeddings; visual features left out");
            None
        }
    };
    let rows = build_features(&trades, &timelines, vis.as_ref(), FeatureOptions::default());
    let mut w = create(&dir.join("features.csv"))?;
    write_feature_rows(&rows, &mut w)?;
    w.flush().map_err(anyhow::Error::from)?;

    let mut spec = cfg.predict.clone();
    spec.seed = cfg.seed;
    let report = run_experiments(&rows, &timelines, dataset_end(&trades), &spec)?;

    let mut w = create(&dir.join("regression.csv"))?;
    report.write_regression_csv(&mut w)?;
    w.flush().map_err(anyhow::Error::from)?;
    if report.table.is_some() {
        let mut w = create(&dir.join("coefficients.csv"))?;
        report.write_coefficient_table(&mut w)?;
        w.flush().map_err(anyhow::Error::from)?;
    }
    if spec.regression.enabled {
        for &target in &spec.regression.targets {
            let afters: Vec<Option<Window>> = match target {
                TargetMode::Primary => vec![None],
                TargetMode::Secondary => spec.regression.windows_after.iter().map(|w| Some(*w)).collect(),
            };
            for wa in afters {
                for &wb in &spec.regression.windows_before {
                    let name = format!(
                        "r2_adj_{}_{}_{}.csv",
                        target.as_str(),
                        wa.map_or("na".to_string(), |w| w.to_string()),
                        wb
                    );
                    let mut w = create(&dir.join(name))?;
                    report.write_r2_grid(&mut w, target, wa, wb)?;
                    w.flush().map_err(anyhow::Error::from)?;
                }
            }
        }
    }
    if spec.classification.enabled {
        let mut w = create(&dir.join("classification.csv"))?;
        report.write_classification_csv(&mut w)?;
        w.flush().map_err(anyhow::Error::from)?;
    }
    write_json(
        &dir.join("experiment.json"),
        &with_provenance(
            cfg,
            json!({
                "n_feature_rows": rows.len(),
                "first_primary_day": rows.iter().map(|r| utc_day(r.t_s)).min().map(format_day),
                "report": report,
            }),
        ),
    )?;
    let ok = report.regression.iter().filter(|c| c.r2_adj.is_some()).count();
    info!(
        "predict: {} feature rows, {ok}/{} regressions fitted, {} classifiers",
        rows.len(),
        report.regression.len(),
        report.classification.len()
    );
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<(), Failure> {
    let m = manifest::bundle(cfg)?;
    info!("report: {} artifacts, manifest sha256 {}", m.artifacts, m.manifest_sha256);
    println!("{}", m.manifest_sha256);
    Ok(())
}
