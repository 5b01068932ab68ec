//! Regression and classification grids over categories, feature sets and
//! time windows.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{adaboost_train, evaluate, random_oversample, temporal_split, AdaBoostOptions, ClassifierReport};
use super::features::{Feature, FeatureRow, Window};
use super::ols::{ols_fit, RegressionReport, CONST_NAME};
use super::transform::{ColumnTransform, FeatureTransform, ValueTransform};
use crate::error::{Error, Result};
use crate::ingest::{Category, SECONDS_PER_DAY};
use crate::stats::SaleTimeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// Price of the primary sale.
    Primary,
    /// Median price of secondary sales within the window after the primary sale.
    Secondary,
}

impl TargetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetMode::Primary => "primary",
            TargetMode::Secondary => "secondary",
        }
    }
}

fn excluded_near_end(t_s: i64, window: Window, dataset_end: i64) -> bool {
    window.days().is_some_and(|d| t_s > dataset_end - d * SECONDS_PER_DAY)
}

fn secondary_in_window(t: &SaleTimeline, window: Window) -> impl Iterator<Item = &crate::stats::Sale> {
    let t_s = t.primary().ts;
    let end = window.days().map_or(i64::MAX, |d| t_s + d * SECONDS_PER_DAY);
    t.secondary().iter().filter(move |s| s.ts <= end)
}

/// Regression target in USD per NFT. Secondary mode takes the median price
/// of priced secondary sales in `(t_s, t_s + window]`, skipping NFTs without
/// one and NFTs whose `t_s` is within one window of `dataset_end`.
pub fn regression_targets(
    timelines: &[SaleTimeline],
    mode: TargetMode,
    window_after: Window,
    dataset_end: i64,
) -> BTreeMap<String, f64> {
    timelines
        .iter()
        .filter_map(|t| {
            let y = match mode {
                TargetMode::Primary => t.primary().price_usd?,
                TargetMode::Secondary => {
                    if excluded_near_end(t.primary().ts, window_after, dataset_end) {
                        return None;
                    }
                    let mut prices: Vec<f64> =
                        secondary_in_window(t, window_after).filter_map(|s| s.price_usd).collect();
                    super::features::median(&mut prices)?
                }
            };
            Some((t.nft_id.clone(), y))
        })
        .collect()
}

/// Whether each NFT was resold within `window_after` of its primary sale;
/// NFTs whose `t_s` is within one window of `dataset_end` are left out.
pub fn resale_labels(timelines: &[SaleTimeline], window_after: Window, dataset_end: i64) -> BTreeMap<String, bool> {
    timelines
        .iter()
        .filter(|t| !excluded_near_end(t.primary().ts, window_after, dataset_end))
        .map(|t| (t.nft_id.clone(), secondary_in_window(t, window_after).next().is_some()))
        .collect()
}

/// A named group of predictors. Names are `centrality`, `visual`, `history`,
/// `all`, single feature names, or `+`-joined unions of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSet {
    pub name: String,
    pub features: Vec<Feature>,
}

impl FeatureSet {
    pub fn parse(name: &str) -> Result<Self> {
        let mut set = BTreeSet::new();
        for part in name.split('+').map(str::trim) {
            match part.to_ascii_lowercase().as_str() {
                "centrality" => set.extend([Feature::KBuyer, Feature::KSeller, Feature::PrBuyer, Feature::PrSeller]),
                "visual" => set.extend((0..5).map(Feature::VisPca)),
                "history" => set.extend([Feature::PResale, Feature::MedianPrice]),
                "all" => set.extend(Feature::ALL),
                _ => {
                    set.insert(part.parse::<Feature>()?);
                }
            }
        }
        Ok(FeatureSet { name: name.trim().to_string(), features: set.into_iter().collect() })
    }
}

pub fn default_feature_sets() -> Vec<String> {
    ["centrality", "visual", "history", "centrality+visual", "centrality+history", "visual+history", "all"]
        .map(String::from)
        .to_vec()
}

/// `All` or one category name.
fn category_matches(filter: &str, c: Category) -> bool {
    filter.eq_ignore_ascii_case("all") || filter.eq_ignore_ascii_case(c.as_str())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientTableSpec {
    pub target: TargetMode,
    pub window_after: Window,
    pub window_before: Window,
    pub feature_set: String,
}

impl Default for CoefficientTableSpec {
    fn default() -> Self {
        CoefficientTableSpec {
            target: TargetMode::Secondary,
            window_after: Window::Month,
            window_before: Window::Week,
            feature_set: "all".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSpec {
    pub enabled: bool,
    pub targets: Vec<TargetMode>,
    pub windows_after: Vec<Window>,
    pub windows_before: Vec<Window>,
    pub table: CoefficientTableSpec,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        RegressionSpec {
            enabled: true,
            targets: vec![TargetMode::Primary, TargetMode::Secondary],
            windows_after: vec![Window::Month],
            windows_before: vec![Window::Week],
            table: CoefficientTableSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationSpec {
    pub enabled: bool,
    pub windows_after: Vec<Window>,
    pub window_before: Window,
    pub train_frac: f64,
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for ClassificationSpec {
    fn default() -> Self {
        ClassificationSpec {
            enabled: true,
            windows_after: vec![Window::Month],
            window_before: Window::Week,
            train_frac: 0.95,
            n_estimators: 100,
            learning_rate: 1.0,
        }
    }
}

/// Experiment grid, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    /// `All` and/or category names.
    pub categories: Vec<String>,
    pub feature_sets: Vec<String>,
    pub regression: RegressionSpec,
    pub classification: ClassificationSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            seed: 0,
            categories: std::iter::once("All".to_string())
                .chain(Category::ALL.iter().map(|c| c.as_str().to_string()))
                .collect(),
            feature_sets: default_feature_sets(),
            regression: RegressionSpec::default(),
            classification: ClassificationSpec::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.categories {
            if !c.eq_ignore_ascii_case("all") {
                c.parse::<Category>().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        for f in self.feature_sets.iter().chain([&self.regression.table.feature_set]) {
            FeatureSet::parse(f).map_err(|e| Error::Config(e.to_string()))?;
        }
        let frac = self.classification.train_frac;
        if !(frac > 0.0 && frac < 1.0) {
            return Err(Error::Config(format!("train_frac {frac} must be in (0, 1)")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionCell {
    pub target: TargetMode,
    pub window_after: Option<Window>,
    pub window_before: Window,
    pub category: String,
    pub feature_set: String,
    pub n_samples: usize,
    pub n_collections: usize,
    pub r2_adj: Option<f64>,
    /// `ok` or why the cell has no fit.
    pub status: String,
    pub report: Option<RegressionReport>,
    pub dropped_features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationCell {
    pub window_after: Window,
    pub window_before: Window,
    pub category: String,
    pub feature_set: String,
    pub n_train: usize,
    pub n_train_balanced: usize,
    pub n_test: usize,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
    pub status: String,
    pub report: Option<ClassifierReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub spec: CoefficientTableSpec,
    /// One regression per category, in the order requested.
    pub columns: Vec<RegressionCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub regression: Vec<RegressionCell>,
    pub table: Option<CoefficientTable>,
    pub classification: Vec<ClassificationCell>,
}

fn feature_matrix<'a>(
    rows: impl Iterator<Item = &'a FeatureRow>,
    set: &FeatureSet,
    window_before: Window,
) -> Vec<(&'a FeatureRow, Vec<f64>)> {
    rows.filter_map(|r| {
        let x: Option<Vec<f64>> = set.features.iter().map(|f| r.get(*f, window_before)).collect();
        x.map(|x| (r, x))
    })
    .collect()
}

fn regression_cell(
    rows: &[FeatureRow],
    targets: &BTreeMap<String, f64>,
    target: TargetMode,
    window_after: Window,
    window_before: Window,
    category: &str,
    set: &FeatureSet,
) -> RegressionCell {
    let sample = feature_matrix(
        rows.iter().filter(|r| category_matches(category, r.category) && targets.contains_key(&r.nft_id)),
        set,
        window_before,
    );
    let n_collections = sample.iter().map(|(r, _)| r.collection.as_str()).collect::<BTreeSet<_>>().len();
    let mut cell = RegressionCell {
        target,
        window_after: (target == TargetMode::Secondary).then_some(window_after),
        window_before,
        category: category.to_string(),
        feature_set: set.name.clone(),
        n_samples: sample.len(),
        n_collections,
        r2_adj: None,
        status: "ok".into(),
        report: None,
        dropped_features: Vec::new(),
    };
    let fit = || -> Result<(RegressionReport, Vec<String>)> {
        let x_raw: Vec<Vec<f64>> = sample.iter().map(|(_, x)| x.clone()).collect();
        let y_raw: Vec<f64> = sample.iter().map(|(r, _)| targets[&r.nft_id]).collect();
        if sample.is_empty() {
            return Err(Error::InsufficientData("no rows".into()));
        }
        let ft = FeatureTransform::fit(&set.features, &x_raw)?;
        let yt = ColumnTransform::fit("target", ValueTransform::Log1p, &y_raw)
            .ok_or_else(|| Error::Degenerate("target has zero variance".into()))?;
        let x = ft.apply_all(&x_raw);
        let y: Vec<f64> = y_raw.iter().map(|v| yt.apply(*v)).collect();
        Ok((ols_fit(&x, &y, &ft.names())?, ft.dropped))
    };
    match fit() {
        Ok((rep, dropped)) => {
            cell.r2_adj = Some(rep.r2_adj);
            cell.report = Some(rep);
            cell.dropped_features = dropped;
        }
        Err(e) => cell.status = e.to_string(),
    }
    cell
}

#[allow(clippy::too_many_arguments)]
fn classification_cell(
    rows: &[FeatureRow],
    labels: &BTreeMap<String, bool>,
    spec: &ClassificationSpec,
    window_after: Window,
    category: &str,
    set: &FeatureSet,
    seed: u64,
) -> ClassificationCell {
    let sample: Vec<(&FeatureRow, Vec<f64>, bool)> = feature_matrix(
        rows.iter().filter(|r| category_matches(category, r.category) && labels.contains_key(&r.nft_id)),
        set,
        spec.window_before,
    )
    .into_iter()
    .map(|(r, x)| {
        let l = labels[&r.nft_id];
        (r, x, l)
    })
    .collect();
    let (train, test) = temporal_split(sample, spec.train_frac, |(r, _, _)| (r.t_s, r.nft_id.as_str()));
    let mut cell = ClassificationCell {
        window_after,
        window_before: spec.window_before,
        category: category.to_string(),
        feature_set: set.name.clone(),
        n_train: train.len(),
        n_train_balanced: 0,
        n_test: test.len(),
        f1: None,
        auc: None,
        status: "ok".into(),
        report: None,
    };
    let run = || -> Result<(ClassifierReport, usize)> {
        if test.is_empty() {
            return Err(Error::InsufficientData("empty test split".into()));
        }
        let x_train: Vec<Vec<f64>> = train.iter().map(|(_, x, _)| x.clone()).collect();
        let ft = FeatureTransform::fit(&set.features, &x_train)?;
        let balanced =
            random_oversample(train.iter().map(|(_, x, l)| (ft.apply(x), *l)).collect::<Vec<_>>(), |(_, l)| *l, seed)?;
        let (x, y): (Vec<Vec<f64>>, Vec<bool>) = balanced.into_iter().unzip();
        let model = adaboost_train(
            &x,
            &y,
            AdaBoostOptions { n_estimators: spec.n_estimators, learning_rate: spec.learning_rate },
        )?;
        let x_test: Vec<Vec<f64>> = test.iter().map(|(_, x, _)| ft.apply(x)).collect();
        let y_test: Vec<bool> = test.iter().map(|(_, _, l)| *l).collect();
        Ok((evaluate(&model, &x_test, &y_test), x.len()))
    };
    match run() {
        Ok((rep, n_bal)) => {
            cell.f1 = Some(rep.f1);
            cell.auc = rep.auc;
            cell.n_train_balanced = n_bal;
            if rep.auc.is_none() {
                cell.status = "test split has a single class; AUC undefined".into();
            }
            cell.report = Some(rep);
        }
        Err(e) => cell.status = e.to_string(),
    }
    cell
}

/// Runs every configured cell. Cells are independent and run in parallel;
/// the output order follows `spec` and does not depend on thread count.
pub fn run_experiments(
    rows: &[FeatureRow],
    timelines: &[SaleTimeline],
    dataset_end: i64,
    spec: &ExperimentSpec,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let sets: Vec<FeatureSet> = spec.feature_sets.iter().map(|s| FeatureSet::parse(s)).collect::<Result<_>>()?;

    let mut regression = Vec::new();
    let mut table = None;
    if spec.regression.enabled {
        let r = &spec.regression;
        let mut jobs = Vec::new();
        for &target in &r.targets {
            let afters: Vec<Window> = match target {
                TargetMode::Primary => vec![Window::All],
                TargetMode::Secondary => r.windows_after.clone(),
            };
            for wa in afters {
                let targets = regression_targets(timelines, target, wa, dataset_end);
                for &wb in &r.windows_before {
                    for cat in &spec.categories {
                        for set in &sets {
                            jobs.push((target, wa, wb, cat.clone(), set.clone(), targets.clone()));
                        }
                    }
                }
            }
        }
        regression = jobs
            .par_iter()
            .map(|(t, wa, wb, cat, set, targets)| regression_cell(rows, targets, *t, *wa, *wb, cat, set))
            .collect();

        let ts = &r.table;
        let set = FeatureSet::parse(&ts.feature_set)?;
        let targets = regression_targets(timelines, ts.target, ts.window_after, dataset_end);
        let columns = spec
            .categories
            .par_iter()
            .map(|cat| regression_cell(rows, &targets, ts.target, ts.window_after, ts.window_before, cat, &set))
            .collect();
        table = Some(CoefficientTable { spec: ts.clone(), columns });
    }

    let mut classification = Vec::new();
    if spec.classification.enabled {
        let c = &spec.classification;
        let mut jobs = Vec::new();
        for &wa in &c.windows_after {
            let labels = resale_labels(timelines, wa, dataset_end);
            for cat in &spec.categories {
                for set in &sets {
                    jobs.push((wa, cat.clone(), set.clone(), labels.clone()));
                }
            }
        }
        classification = jobs
            .par_iter()
            .enumerate()
            .map(|(k, (wa, cat, set, labels))| {
                classification_cell(rows, labels, c, *wa, cat, set, spec.seed.wrapping_add(k as u64))
            })
            .collect();
    }
    Ok(ExperimentReport { spec: spec.clone(), regression, table, classification })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl ExperimentReport {
    /// One line per regression cell.
    pub fn write_regression_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "target",
            "window_after",
            "window_before",
            "category",
            "feature_set",
            "n_samples",
            "n_collections",
            "r2_adj",
            "status",
        ])?;
        for c in &self.regression {
            w.write_record([
                c.target.as_str(),
                c.window_after.map_or("", |w| w.as_str()),
                c.window_before.as_str(),
                &c.category,
                &c.feature_set,
                &c.n_samples.to_string(),
                &c.n_collections.to_string(),
                &opt(c.r2_adj),
                &c.status,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `R²_adj` with feature sets as rows and categories as columns for one
    /// target and window pair.
    pub fn write_r2_grid<W: Write>(
        &self,
        writer: W,
        target: TargetMode,
        window_after: Option<Window>,
        window_before: Window,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["feature_set".to_string()];
        header.extend(self.spec.categories.iter().cloned());
        w.write_record(&header)?;
        for set in &self.spec.feature_sets {
            let mut rec = vec![set.clone()];
            for cat in &self.spec.categories {
                let cell = self.regression.iter().find(|c| {
                    c.target == target
                        && c.window_after == window_after
                        && c.window_before == window_before
                        && &c.category == cat
                        && &c.feature_set == set
                });
                rec.push(opt(cell.and_then(|c| c.r2_adj)));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Coefficient table: one row per coefficient (`β` to three decimals
    /// with its significance marker), then `#NFTs`, `#Collections` and
    /// `R2_adj`; one column per category.
    pub fn write_coefficient_table<W: Write>(&self, writer: W) -> Result<()> {
        let Some(table) = &self.table else {
            return Err(Error::InvalidArgument("regression disabled; no coefficient table".into()));
        };
        let set = FeatureSet::parse(&table.spec.feature_set)?;
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["feature".to_string()];
        header.extend(table.columns.iter().map(|c| c.category.clone()));
        w.write_record(&header)?;
        let names: Vec<String> =
            std::iter::once(CONST_NAME.to_string()).chain(set.features.iter().map(|f| f.name())).collect();
        for name in &names {
            let mut rec = vec![name.clone()];
            for col in &table.columns {
                rec.push(
                    col.report
                        .as_ref()
                        .and_then(|r| r.coefficient(name))
                        .map(|c| format!("{:.3}{}", c.beta, c.significance.marker()))
                        .unwrap_or_default(),
                );
            }
            w.write_record(&rec)?;
        }
        let mut nfts = vec!["#NFTs".to_string()];
        let mut colls = vec!["#Collections".to_string()];
        let mut r2 = vec!["R2_adj".to_string()];
        for col in &table.columns {
            nfts.push(col.n_samples.to_string());
            colls.push(col.n_collections.to_string());
            r2.push(col.r2_adj.map(|v| format!("{v:.3}")).unwrap_or_default());
        }
        w.write_record(&nfts)?;
        w.write_record(&colls)?;
        w.write_record(&r2)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_classification_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "window_after",
            "window_before",
            "category",
            "feature_set",
            "n_train",
            "n_train_balanced",
            "n_test",
            "f1",
            "auc",
            "status",
        ])?;
        for c in &self.classification {
            w.write_record([
                c.window_after.as_str(),
                c.window_before.as_str(),
                &c.category,
                &c.feature_set,
                &c.n_train.to_string(),
                &c.n_train_balanced.to_string(),
                &c.n_test.to_string(),
                &opt(c.f1),
                &opt(c.auc),
                &c.status,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
