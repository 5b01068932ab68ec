//! Predictors of NFT prices and resale: trader-network centrality, visual
//! PCA scores and market history, fed to OLS regressions and boosted
//! decision-stump classifiers.

pub mod centrality;
pub mod classify;
pub mod experiment;
pub mod features;
pub mod ols;
pub mod transform;

pub use centrality::{degree_centrality, degrees, pagerank, PageRankOptions};
pub use classify::{
    adaboost_train, auc, evaluate, evaluate_scores, random_oversample, temporal_split, AdaBoost, AdaBoostOptions,
    ClassifierReport, Stump,
};
pub use experiment::{
    default_feature_sets, regression_targets, resale_labels, run_experiments, ClassificationCell, ClassificationSpec,
    CoefficientTable, CoefficientTableSpec, ExperimentReport, ExperimentSpec, FeatureSet, RegressionCell,
    RegressionSpec, TargetMode,
};
pub use features::{
    build_features, median, median_collection_price, p_resale, write_feature_rows, Feature, FeatureOptions, FeatureRow,
    Window,
};
pub use ols::{ols_fit, Coefficient, RegressionReport, Significance, CONST_NAME};
pub use transform::{
    boxcox, boxcox_loglik, boxcox_mle, default_transform, ColumnTransform, FeatureTransform, ValueTransform,
    BOXCOX_RANGE,
};
