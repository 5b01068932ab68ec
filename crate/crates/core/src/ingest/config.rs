use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::normalize::NormalizeRules;
use super::Category;
use crate::error::{Error, Result};

/// Normalized collection name → category. Unmapped names are `Other`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryMap(BTreeMap<String, Category>);

impl CategoryMap {
    /// Keys are stored in normalized capitalization ("cryptoKitties" → "Cryptokitties").
    pub fn insert(&mut self, collection: &str, category: Category) {
        self.0.insert(capitalized(collection), category);
    }

    pub fn get(&self, collection: &str) -> Category {
        self.0.get(collection).or_else(|| self.0.get(&capitalized(collection))).copied().unwrap_or(Category::Other)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Category)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn normalize_keys(&mut self) {
        let entries = std::mem::take(&mut self.0);
        for (k, v) in entries {
            self.insert(&k, v);
        }
    }
}

fn capitalized(s: &str) -> String {
    let lower = s.trim().to_ascii_lowercase();
    let mut chars = lower.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

/// The ingest key-value config: category map, merge-prefix word list,
/// generic-name list and extra unusual-pattern regexes.
///
/// ```toml
/// merge_prefixes = ["Aavegotchi"]
/// generic_names = ["Stuff"]
/// unusual_patterns = []
/// run_threshold = 4
///
/// [categories]
/// Cryptokitties = "Art"
/// Decentraland = "Metaverse"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub merge_prefixes: Vec<String>,
    pub generic_names: Vec<String>,
    pub unusual_patterns: Vec<String>,
    pub run_threshold: usize,
    pub categories: CategoryMap,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            merge_prefixes: ["Aavegotchi", "Cryptokitties", "Sorare", "Godsunchained"].map(String::from).to_vec(),
            generic_names: ["Stuff", "Items", "Things", "Nft", "Nfts", "Collection", "Untitled"]
                .map(String::from)
                .to_vec(),
            unusual_patterns: Vec::new(),
            run_threshold: 4,
            categories: CategoryMap::default(),
        }
    }
}

impl IngestConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let mut cfg: IngestConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.categories.normalize_keys();
        for p in &cfg.unusual_patterns {
            Regex::new(p).map_err(|e| Error::Config(format!("pattern `{p}`: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("ingest config is always serializable")
    }

    pub fn rules(&self) -> NormalizeRules {
        let mut rules = NormalizeRules::default().with_prefixes(self.merge_prefixes.iter().cloned());
        rules.generic_names = self.generic_names.iter().map(|s| s.to_ascii_lowercase()).collect::<HashSet<_>>();
        rules.unusual_patterns = self.unusual_patterns.iter().filter_map(|p| Regex::new(p).ok()).collect();
        rules.run_threshold = self.run_threshold;
        rules
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_config() {
        let cfg = IngestConfig::from_toml_str(
            r#"
            merge_prefixes = ["Aavegotchi"]
            generic_names = ["Stuff"]
            [categories]
            cryptokitties = "Art"
            Decentraland = "Metaverse"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.categories.get("Cryptokitties"), Category::Art);
        assert_eq!(cfg.categories.get("Decentraland"), Category::Metaverse);
        assert_eq!(cfg.categories.get("Nope"), Category::Other);
        assert_eq!(cfg.run_threshold, 4);
        let rules = cfg.rules();
        assert!(rules.generic_names.contains("stuff"));
    }

    #[test]
    fn rejects_bad_category_and_pattern() {
        assert!(IngestConfig::from_toml_str("[categories]\nX = \"Sports\"").is_err());
        assert!(IngestConfig::from_toml_str("unusual_patterns = [\"(\"]").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = IngestConfig::default();
        cfg.categories.insert("Punks", Category::Collectible);
        let back = IngestConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
