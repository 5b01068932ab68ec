//! Image-embedding analysis: the `EMB1` vector container, cosine-distance
//! structure within and between groups, PCA and inter/intra distance ratios.
//!
//! Embeddings are keyed by object id, the URL of the NFT's digital object.
//! Several NFTs may share one object; analyses count each object once.

mod distance;
mod emb;
mod pca;

use std::collections::{BTreeMap, HashMap};

pub use distance::{
    cosine_distance, downsample_groups, group_distance_matrix, inter_intra_ratio, DistanceCell, DistanceOptions,
    DistanceSummary, Metric, PooledDistance, SeparationRatio,
};
pub use emb::{EmbeddingMatrix, EMBEDDING_DIM, EMB_MAGIC, PCA_MAGIC};
pub use pca::{fit_pca, PcaModel, PcaOptions};

#[doc(hidden)]
pub use pca::dense_covariance_eigenvalues;

use crate::ingest::TradeRecord;

/// NFT id → object id, from the first trade of each NFT that carries a URL.
pub fn object_map(trades: &[TradeRecord]) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for t in trades {
        if let Some(url) = &t.url {
            map.entry(t.nft_id.clone()).or_insert_with(|| url.clone());
        }
    }
    map
}

/// Object id → label, taking the label of the first trade that references
/// the object. `label` picks the field, e.g. collection or category.
pub fn object_labels<F>(trades: &[TradeRecord], label: F) -> HashMap<String, String>
where
    F: Fn(&TradeRecord) -> String,
{
    let mut map = HashMap::new();
    for t in trades {
        if let Some(url) = &t.url {
            map.entry(url.clone()).or_insert_with(|| label(t));
        }
    }
    map
}
