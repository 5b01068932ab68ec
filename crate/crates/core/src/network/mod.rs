//! Trader and NFT networks: construction, strength statistics,
//! assortativity, modularity, strongly connected components and
//! strength-preserving null models.

mod build;
mod graph;
mod metrics;
mod modularity;
mod null_model;
mod scc;

pub use build::{
    active_days, build_nft_network, build_trader_network, specialization, specialization_all, NftNetworkOptions,
    Specialization, TraderBuildStats,
};
pub use graph::{Edge, NodeIx, NodeMeta, TradeGraph};
pub use metrics::{assortativity, log_log_slope, strength_activity_slope};
pub use modularity::{community_sizes, modularity, Partition};
pub use null_model::{
    null_modularity, randomize, randomize_with_rng, realization_rng, NullModelResult, RandomizeStats,
};
pub use scc::{scc, scc_summary, SccSummary};

#[doc(hidden)]
pub use build::sequential_links;
