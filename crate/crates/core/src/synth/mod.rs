//! Synthetic markets with known ground truth: power-law collection sizes,
//! sales per NFT and trader strengths, traders specialized in a home
//! collection, log-normal prices and clustered image embeddings. Output uses
//! the same file formats as real exports.

mod sampler;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Geometric, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

pub use sampler::{DiscretePowerLaw, MAX_SUPPORT};

use crate::error::{Error, Result};
use crate::ingest::{
    format_day, parse_day, Category, ExchangeRate, IngestConfig, RawTrade, Source, SECONDS_PER_DAY, TRADE_COLUMNS,
};
use crate::network::realization_rng;
use crate::visual::EmbeddingMatrix;

/// Generator parameters, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_collections: usize,
    pub n_traders: usize,
    /// Exponent of the NFTs-per-collection distribution.
    pub alpha: f64,
    /// Exponent of the sales-per-NFT distribution.
    pub beta: f64,
    /// Exponent of the trader-strength distribution.
    pub lambda1: f64,
    pub max_collection_size: u64,
    pub max_sales_per_nft: u64,
    pub max_trader_strength: u64,
    /// Probability that a trade participant is drawn from the collection's
    /// home traders rather than from all traders.
    pub theta: f64,
    /// Mean over collections of the log USD price.
    pub price_log_mean: f64,
    /// Standard deviation of collection log-price means.
    pub price_log_mean_spread: f64,
    /// Standard deviation of log price within a collection.
    pub price_log_sd: f64,
    /// First UTC day, `YYYY-MM-DD`.
    pub start_date: String,
    pub span_days: u32,
    /// Mean days between consecutive sales of one NFT.
    pub resale_gap_days: f64,
    /// Share of collections traded on WAX rather than Ethereum.
    pub wax_fraction: f64,
    pub embedding_dim: usize,
    /// NFTs per collection that get an embedding.
    pub embedded_per_collection: usize,
    /// Standard deviation of embeddings around their collection center;
    /// centers are uniform on `[0, 1]` per component.
    pub embedding_spread: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            n_collections: 700,
            n_traders: 40_000,
            alpha: -1.5,
            beta: -1.4,
            lambda1: -1.85,
            max_collection_size: 1000,
            max_sales_per_nft: 50,
            max_trader_strength: 10_000,
            theta: 0.8,
            price_log_mean: 4.0,
            price_log_mean_spread: 1.0,
            price_log_sd: 0.8,
            start_date: "2020-01-01".into(),
            span_days: 730,
            resale_gap_days: 30.0,
            wax_fraction: 0.2,
            embedding_dim: crate::visual::EMBEDDING_DIM,
            embedded_per_collection: 3,
            embedding_spread: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, e) in [("alpha", self.alpha), ("beta", self.beta), ("lambda1", self.lambda1)] {
            if !(e < -1.0) {
                return bad(format!("{name} must be below -1, got {e}"));
            }
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta must be in [0, 1], got {}", self.theta));
        }
        if !(0.0..=1.0).contains(&self.wax_fraction) {
            return bad(format!("wax_fraction must be in [0, 1], got {}", self.wax_fraction));
        }
        if self.n_collections == 0 {
            return bad("n_collections must be positive".into());
        }
        if parse_day(&self.start_date).is_none() {
            return bad(format!("invalid start_date `{}`", self.start_date));
        }
        if self.span_days == 0 {
            return bad("span_days must be positive".into());
        }
        if !(self.resale_gap_days >= 1.0) {
            return bad(format!("resale_gap_days must be at least 1, got {}", self.resale_gap_days));
        }
        if !(self.price_log_sd >= 0.0 && self.price_log_mean_spread >= 0.0 && self.embedding_spread >= 0.0) {
            return bad("spreads must be non-negative".into());
        }
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be positive".into());
        }
        for (name, m) in [
            ("max_collection_size", self.max_collection_size),
            ("max_sales_per_nft", self.max_sales_per_nft),
            ("max_trader_strength", self.max_trader_strength),
        ] {
            if m == 0 || m > MAX_SUPPORT {
                return bad(format!("{name} must be in 1..={MAX_SUPPORT}, got {m}"));
            }
        }
        Ok(())
    }

    pub fn collection_size_law(&self) -> Result<DiscretePowerLaw> {
        DiscretePowerLaw::new(self.alpha, 1, self.max_collection_size)
    }

    pub fn sales_law(&self) -> Result<DiscretePowerLaw> {
        DiscretePowerLaw::new(self.beta, 1, self.max_sales_per_nft)
    }

    pub fn strength_law(&self) -> Result<DiscretePowerLaw> {
        DiscretePowerLaw::new(self.lambda1, 1, self.max_trader_strength)
    }
}

/// `n` draws from each of the three generating laws, in the order
/// collection sizes, sales per NFT, trader strengths.
pub fn sample_exponent_laws(config: &SynthConfig, n: usize) -> Result<[Vec<f64>; 3]> {
    let laws = [config.collection_size_law()?, config.sales_law()?, config.strength_law()?];
    let mut out: [Vec<f64>; 3] = Default::default();
    for (k, (law, o)) in laws.iter().zip(out.iter_mut()).enumerate() {
        let mut rng = realization_rng(config.seed, 100 + k as u64);
        *o = (0..n).map(|_| law.sample(&mut rng) as f64).collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollectionTruth {
    pub name: String,
    pub category: Category,
    pub source: Source,
    pub n_nfts: u64,
    pub price_log_mean: f64,
}

/// Values the generator drew, for checking estimators against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub collections: Vec<CollectionTruth>,
    /// Sales per NFT, collection-major.
    pub sales_per_nft: Vec<u64>,
    /// Drawn strength of every trader, by trader index.
    pub trader_strengths: Vec<u64>,
    /// Trader id → home collection.
    pub homes: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct SynthMarket {
    /// Sorted by `(ts, nft_id)`.
    pub trades: Vec<RawTrade>,
    pub rates: Vec<ExchangeRate>,
    pub ingest_config: IngestConfig,
    pub embeddings: EmbeddingMatrix,
    pub truth: GroundTruth,
}

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Letters-only collection name that survives name cleaning unchanged.
fn collection_name(i: usize, n: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut syllables = 1;
    while base.pow(syllables) < n {
        syllables += 1;
    }
    let mut s = String::from("Syn");
    let mut v = i;
    for _ in 0..syllables {
        let d = v % base;
        v /= base;
        s.push(CONSONANTS[d / VOWELS.len()] as char);
        s.push(VOWELS[d % VOWELS.len()] as char);
    }
    s
}

fn trader_id(i: usize) -> String {
    format!("0x{i:08x}")
}

fn rate_walk<R: Rng>(rng: &mut R, start: f64, days: u32) -> Vec<f64> {
    let step = Normal::new(0.0, 0.03).expect("valid sd");
    let mut v = start;
    (0..days)
        .map(|_| {
            let out = v;
            v *= f64::exp(step.sample(rng));
            out
        })
        .collect()
}

/// Draws one participant for a trade in collection `c`, other than `avoid`.
fn draw_trader<R: Rng>(
    rng: &mut R,
    theta: f64,
    home: &(Vec<usize>, WeightedIndex<f64>),
    global: &WeightedIndex<f64>,
    avoid: Option<usize>,
) -> usize {
    let use_home = rng.random::<f64>() < theta;
    for _ in 0..10_000 {
        let t = if use_home { home.0[home.1.sample(rng)] } else { global.sample(rng) };
        if Some(t) != avoid {
            return t;
        }
    }
    // pathological weights: fall back to the first eligible home trader
    *home.0.iter().find(|t| Some(**t) != avoid).expect("home pools hold at least two traders")
}

/// Generates a market. Every random component uses its own seeded stream,
/// so the output is a function of `config` alone.
///
/// Fails with [`Error::Infeasible`] when traders cannot cover the sales:
/// fewer than two traders per collection, or total drawn strength below
/// twice the number of sales.
pub fn generate_market(config: &SynthConfig) -> Result<SynthMarket> {
    config.validate()?;
    let n_col = config.n_collections;
    let start_day = parse_day(&config.start_date).expect("validated");
    let start_ts = start_day * SECONDS_PER_DAY;
    let span_secs = config.span_days as i64 * SECONDS_PER_DAY;

    // collections
    let size_law = config.collection_size_law()?;
    let mut rng = realization_rng(config.seed, 0);
    let mean_noise = Normal::new(0.0, config.price_log_mean_spread).map_err(|e| Error::Config(e.to_string()))?;
    let collections: Vec<CollectionTruth> = (0..n_col)
        .map(|i| CollectionTruth {
            name: collection_name(i, n_col),
            category: Category::ALL[rng.random_range(0..Category::ALL.len())],
            source: if rng.random::<f64>() < config.wax_fraction { Source::Atomic } else { Source::OpenSea },
            n_nfts: size_law.sample(&mut rng),
            price_log_mean: config.price_log_mean + mean_noise.sample(&mut rng),
        })
        .collect();

    // sales per NFT
    let sales_law = config.sales_law()?;
    let mut rng = realization_rng(config.seed, 1);
    let sales_per_nft: Vec<u64> =
        collections.iter().flat_map(|c| 0..c.n_nfts).map(|_| sales_law.sample(&mut rng)).collect();
    let total_sales: u64 = sales_per_nft.iter().sum();
    let mut col_sales = vec![0u64; n_col];
    let mut k = 0;
    for (c, col) in collections.iter().enumerate() {
        for _ in 0..col.n_nfts {
            col_sales[c] += sales_per_nft[k];
            k += 1;
        }
    }

    // traders
    if config.n_traders < 2 * n_col {
        return Err(Error::Infeasible(format!(
            "{} traders cannot give each of {n_col} collections two home traders",
            config.n_traders
        )));
    }
    let strength_law = config.strength_law()?;
    let mut rng = realization_rng(config.seed, 2);
    let trader_strengths: Vec<u64> = (0..config.n_traders).map(|_| strength_law.sample(&mut rng)).collect();
    let capacity: u64 = trader_strengths.iter().sum();
    if capacity < 2 * total_sales {
        return Err(Error::Infeasible(format!(
            "trader capacity {capacity} is below the {} trade participations of {total_sales} sales",
            2 * total_sales
        )));
    }
    let col_pick = WeightedIndex::new(col_sales.iter().map(|s| *s as f64 + 1.0)).expect("positive weights");
    let homes_ix: Vec<usize> =
        (0..config.n_traders).map(|t| if t < 2 * n_col { t / 2 } else { col_pick.sample(&mut rng) }).collect();
    let strength_w =
        |ts: &[usize]| WeightedIndex::new(ts.iter().map(|t| trader_strengths[*t] as f64)).expect("positive strengths");
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_col];
    for (t, h) in homes_ix.iter().enumerate() {
        members[*h].push(t);
    }
    let home_pools: Vec<(Vec<usize>, WeightedIndex<f64>)> = members
        .into_iter()
        .map(|m| {
            let w = strength_w(&m);
            (m, w)
        })
        .collect();
    let all: Vec<usize> = (0..config.n_traders).collect();
    let global = strength_w(&all);
    let ids: Vec<String> = all.iter().map(|t| trader_id(*t)).collect();

    // exchange rates
    let mut rng = realization_rng(config.seed, 4);
    let eth = rate_walk(&mut rng, 1500.0, config.span_days);
    let wax = rate_walk(&mut rng, 0.1, config.span_days);
    let mut rates = Vec::with_capacity(2 * config.span_days as usize);
    for d in 0..config.span_days as usize {
        for (cur, walk) in [("ETH", &eth), ("WAX", &wax)] {
            rates.push(ExchangeRate { day: start_day + d as i64, currency: cur.into(), usd_rate: walk[d] });
        }
    }

    // sales
    let mut rng = realization_rng(config.seed, 3);
    let gap = Geometric::new(1.0 / config.resale_gap_days).map_err(|e| Error::Config(e.to_string()))?;
    let mut trades = Vec::with_capacity(total_sales as usize);
    let mut k = 0;
    for (c, col) in collections.iter().enumerate() {
        let price = Normal::new(col.price_log_mean, config.price_log_sd).map_err(|e| Error::Config(e.to_string()))?;
        let (currency, walk) = match col.source {
            Source::Atomic => ("WAX", &wax),
            _ => ("ETH", &eth),
        };
        for j in 0..col.n_nfts {
            let n_sales = sales_per_nft[k] as usize;
            k += 1;
            let mut gaps: Vec<i64> = (1..n_sales)
                .map(|_| (1 + gap.sample(&mut rng) as i64) * SECONDS_PER_DAY + rng.random_range(0..SECONDS_PER_DAY))
                .collect();
            let room = span_secs - n_sales as i64 - 1;
            let total: i64 = gaps.iter().sum();
            if total > room {
                let scale = room as f64 / total as f64;
                gaps.iter_mut().for_each(|g| *g = ((*g as f64 * scale) as i64).max(1));
            }
            let total: i64 = gaps.iter().sum();
            let mut ts = start_ts + rng.random_range(0..(span_secs - total).max(1));
            let nft_id = format!("{}#{j}", col.name);
            let url = format!("https://synth.invalid/{}/{j}.png", col.name);
            let mut owner = draw_trader(&mut rng, config.theta, &home_pools[c], &global, None);
            for s in 0..n_sales {
                if s > 0 {
                    ts += gaps[s - 1];
                }
                let buyer = draw_trader(&mut rng, config.theta, &home_pools[c], &global, Some(owner));
                let usd = price.sample(&mut rng).exp();
                let day = ((ts - start_ts) / SECONDS_PER_DAY) as usize;
                trades.push(RawTrade {
                    buyer: ids[buyer].clone(),
                    seller: ids[owner].clone(),
                    ts,
                    collection_raw: col.name.clone(),
                    nft_id: nft_id.clone(),
                    url: Some(url.clone()),
                    currency: currency.into(),
                    amount: usd / walk[day],
                    source: col.source,
                });
                owner = buyer;
            }
        }
    }
    trades.sort_by(|a, b| (a.ts, &a.nft_id).cmp(&(b.ts, &b.nft_id)));

    // embeddings
    let mut rng = realization_rng(config.seed, 5);
    let dim = config.embedding_dim;
    let mut embeddings = EmbeddingMatrix::new(dim);
    let mut row = vec![0f32; dim];
    for col in &collections {
        let center: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        for j in 0..(config.embedded_per_collection as u64).min(col.n_nfts) {
            for (v, c) in row.iter_mut().zip(&center) {
                let z: f64 = rng.sample(StandardNormal);
                *v = (c + config.embedding_spread * z).max(0.0) as f32;
            }
            embeddings.push(format!("https://synth.invalid/{}/{j}.png", col.name), &row)?;
        }
    }

    let mut ingest_config = IngestConfig::default();
    for col in &collections {
        ingest_config.categories.insert(&col.name, col.category);
    }
    let homes = homes_ix.iter().enumerate().map(|(t, h)| (ids[t].clone(), collections[*h].name.clone())).collect();

    Ok(SynthMarket {
        trades,
        rates,
        ingest_config,
        embeddings,
        truth: GroundTruth { collections, sales_per_nft, trader_strengths, homes },
    })
}

pub const TRADES_FILE: &str = "trades.csv";
pub const RATES_FILE: &str = "rates.csv";
pub const INGEST_CONFIG_FILE: &str = "ingest.toml";
pub const EMBEDDINGS_FILE: &str = "embeddings.emb";
pub const TRUTH_FILE: &str = "truth.json";

impl SynthMarket {
    pub fn write_trades<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRADE_COLUMNS)?;
        for t in &self.trades {
            w.write_record([
                t.buyer.as_str(),
                &t.seller,
                &t.ts.to_string(),
                &t.collection_raw,
                &t.nft_id,
                t.url.as_deref().unwrap_or(""),
                &t.currency,
                &t.amount.to_string(),
                t.source.as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_rates<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "currency", "usd_rate"])?;
        for r in &self.rates {
            w.write_record([format_day(r.day), r.currency.clone(), r.usd_rate.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes trades, rates, ingest config, embeddings and ground truth into
    /// `dir` and returns the paths written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let path = |f: &str| dir.join(f);
        let create = |f: &str| -> Result<std::io::BufWriter<std::fs::File>> {
            Ok(std::io::BufWriter::new(std::fs::File::create(path(f))?))
        };
        self.write_trades(create(TRADES_FILE)?)?;
        self.write_rates(create(RATES_FILE)?)?;
        std::fs::write(path(INGEST_CONFIG_FILE), self.ingest_config.to_toml_string())?;
        self.embeddings.save(&path(EMBEDDINGS_FILE))?;
        let mut truth = create(TRUTH_FILE)?;
        serde_json::to_writer_pretty(&mut truth, &self.truth)?;
        truth.write_all(b"\n")?;
        truth.flush()?;
        Ok([TRADES_FILE, RATES_FILE, INGEST_CONFIG_FILE, EMBEDDINGS_FILE, TRUTH_FILE].map(path).to_vec())
    }

    /// Trader id → home collection, for building partitions.
    pub fn home_map(&self) -> HashMap<String, String> {
        self.truth.homes.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{clean, parse_trades, RateTable, Schema};
    use crate::network::{build_trader_network, specialization_all};

    pub(crate) fn small(theta: f64, seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            n_collections: 20,
            n_traders: 600,
            theta,
            max_collection_size: 50,
            max_sales_per_nft: 20,
            span_days: 120,
            embedding_dim: 16,
            ..SynthConfig::default()
        }
    }

    fn ingest(m: &SynthMarket) -> (Vec<crate::ingest::TradeRecord>, crate::ingest::CleanStats, usize) {
        let mut buf = Vec::new();
        m.write_trades(&mut buf).unwrap();
        let parsed = parse_trades(buf.as_slice(), Schema::Csv, true).unwrap();
        let mut rbuf = Vec::new();
        m.write_rates(&mut rbuf).unwrap();
        let rates = RateTable::from_csv(rbuf.as_slice()).unwrap();
        let dropped = parsed.dropped();
        let (recs, stats) = clean(parsed.trades, &m.ingest_config, &rates);
        (recs, stats, dropped)
    }

    #[test]
    fn names_are_clean_and_unique() {
        let rules = IngestConfig::default().rules();
        let names: Vec<String> = (0..2000).map(|i| collection_name(i, 2000)).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for n in &names {
            assert_eq!(&crate::ingest::normalize_collection(n, &rules), n);
        }
    }

    #[test]
    fn generated_trades_ingest_without_loss() {
        let m = generate_market(&small(0.7, 1)).unwrap();
        let (recs, stats, dropped) = ingest(&m);
        assert_eq!(dropped, 0);
        assert_eq!(stats.duplicates_removed, 0);
        assert_eq!(stats.missing_rate, 0);
        assert_eq!(recs.len(), m.trades.len());
        assert_eq!(recs.len() as u64, m.truth.sales_per_nft.iter().sum::<u64>());
        let names: std::collections::HashSet<&str> = m.truth.collections.iter().map(|c| c.name.as_str()).collect();
        assert!(recs.iter().all(|r| names.contains(r.collection.as_str())));
        for r in &recs {
            let col = m.truth.collections.iter().find(|c| c.name == r.collection).unwrap();
            assert_eq!(r.category, col.category);
            assert!(r.buyer != r.seller);
        }
    }

    #[test]
    fn ownership_chains_and_timestamps_stay_in_span() {
        let cfg = small(0.5, 2);
        let m = generate_market(&cfg).unwrap();
        let start = parse_day(&cfg.start_date).unwrap() * SECONDS_PER_DAY;
        let end = start + cfg.span_days as i64 * SECONDS_PER_DAY;
        let mut by_nft: BTreeMap<&str, Vec<&RawTrade>> = BTreeMap::new();
        for t in &m.trades {
            assert!(t.ts >= start && t.ts < end);
            by_nft.entry(&t.nft_id).or_default().push(t);
        }
        for sales in by_nft.values() {
            for w in sales.windows(2) {
                assert!(w[1].ts > w[0].ts);
                assert_eq!(w[1].seller, w[0].buyer);
            }
        }
    }

    #[test]
    fn same_seed_gives_identical_files() {
        let cfg = small(0.5, 9);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let pa = generate_market(&cfg).unwrap().write_dir(a.path()).unwrap();
        let pb = generate_market(&cfg).unwrap().write_dir(b.path()).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{x:?}");
        }
        let other = generate_market(&small(0.5, 10)).unwrap();
        let mut t1 = Vec::new();
        other.write_trades(&mut t1).unwrap();
        assert_ne!(t1, std::fs::read(&pa[0]).unwrap());
    }

    #[test]
    fn full_specialization_confines_traders() {
        let m = generate_market(&small(1.0, 3)).unwrap();
        let (recs, _, _) = ingest(&m);
        for (trader, s) in specialization_all(&recs) {
            assert_eq!(s.top_share, 1.0);
            assert_eq!(s.top_collection, m.truth.homes[&trader]);
        }
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let mut cfg = small(0.5, 1);
        cfg.n_traders = 39;
        assert!(matches!(generate_market(&cfg), Err(Error::Infeasible(_))));
        let mut cfg = small(0.5, 1);
        cfg.n_traders = 40;
        cfg.max_trader_strength = 1;
        cfg.max_sales_per_nft = 20;
        assert!(matches!(generate_market(&cfg), Err(Error::Infeasible(_))));
        let mut cfg = small(0.5, 1);
        cfg.theta = 1.5;
        assert!(matches!(generate_market(&cfg), Err(Error::Config(_))));
        assert!(SynthConfig::from_toml_str("alpha = -0.5").is_err());
    }

    #[test]
    fn trader_network_has_a_node_per_active_trader() {
        let m = generate_market(&small(0.9, 4)).unwrap();
        let (recs, _, _) = ingest(&m);
        let (g, stats) = build_trader_network(&recs);
        assert_eq!(stats.self_trades, 0);
        assert_eq!(g.total_weight(), recs.len() as u64);
    }
}
