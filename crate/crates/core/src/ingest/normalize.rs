use std::collections::HashSet;

use regex::Regex;

/// Name given to collections whose cleaned name is empty or generic.
pub const MISCELLANEA: &str = "Miscellanea";

#[derive(Debug, Clone)]
pub struct NormalizeRules {
    /// Collections whose cleaned name starts with one of these are renamed to it.
    pub merge_prefixes: Vec<String>,
    /// Lowercase generic names mapped to [`MISCELLANEA`].
    pub generic_names: HashSet<String>,
    /// Extra patterns removed from the raw name before cleaning.
    pub unusual_patterns: Vec<Regex>,
    /// Runs of at least this many identical letters are removed.
    pub run_threshold: usize,
}

impl Default for NormalizeRules {
    fn default() -> Self {
        NormalizeRules {
            merge_prefixes: Vec::new(),
            generic_names: HashSet::new(),
            unusual_patterns: Vec::new(),
            run_threshold: 4,
        }
    }
}

impl NormalizeRules {
    pub fn with_prefixes<I, S>(mut self, prefixes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.merge_prefixes = prefixes.into_iter().map(Into::into).collect();
        // longest first, so "Aavegotchiwearables" wins over "Aave" if both are listed
        self.merge_prefixes.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        self
    }
}

fn capitalize(lower: &str) -> String {
    let mut chars = lower.chars();
    match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn strip_runs(s: &str, threshold: usize) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        let mut j = i + 1;
        while j < chars.len() && chars[j] == chars[i] {
            j += 1;
        }
        if threshold == 0 || j - i < threshold {
            out.extend(&chars[i..j]);
        }
        i = j;
    }
    out
}

/// Cleans a raw collection name: strips digits, non-letters and runs of
/// repeated characters, capitalizes, then applies prefix merging and the
/// generic-name list. Empty results become [`MISCELLANEA`].
pub fn normalize_collection(raw: &str, rules: &NormalizeRules) -> String {
    let mut name = raw.to_string();
    for pattern in &rules.unusual_patterns {
        name = pattern.replace_all(&name, "").into_owned();
    }
    let letters: String = name.chars().filter(char::is_ascii_alphabetic).map(|c| c.to_ascii_lowercase()).collect();
    let cleaned = strip_runs(&letters, rules.run_threshold);
    if cleaned.is_empty() {
        return MISCELLANEA.to_string();
    }
    for prefix in &rules.merge_prefixes {
        let p = prefix.to_ascii_lowercase();
        if !p.is_empty() && cleaned.starts_with(&p) {
            return capitalize(&p);
        }
    }
    if rules.generic_names.contains(&cleaned) {
        return MISCELLANEA.to_string();
    }
    capitalize(&cleaned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_digits_and_punctuation() {
        let rules = NormalizeRules::default();
        assert_eq!(normalize_collection("cryptokitties-123", &rules), "Cryptokitties");
        assert_eq!(normalize_collection("Gods_Unchained!", &rules), "Godsunchained");
    }

    #[test]
    fn merges_by_prefix() {
        let rules = NormalizeRules::default().with_prefixes(["Aavegotchi"]);
        assert_eq!(normalize_collection("aavegotchiwearables", &rules), "Aavegotchi");
        assert_eq!(normalize_collection("Aavegotchi", &rules), "Aavegotchi");
        assert_eq!(normalize_collection("aave", &rules), "Aave");
    }

    #[test]
    fn unusual_patterns_become_miscellanea() {
        let rules = NormalizeRules::default();
        assert_eq!(normalize_collection("xxxxx777", &rules), MISCELLANEA);
        assert_eq!(normalize_collection("1234", &rules), MISCELLANEA);
        // three in a row is below the threshold
        assert_eq!(normalize_collection("booo", &rules), "Booo");
        assert_eq!(normalize_collection("boooo", &rules), "B");
    }

    #[test]
    fn generic_names_and_extra_patterns() {
        let mut rules = NormalizeRules::default();
        rules.generic_names.insert("stuff".into());
        rules.unusual_patterns.push(Regex::new("(?i)test").unwrap());
        assert_eq!(normalize_collection("Stuff", &rules), MISCELLANEA);
        assert_eq!(normalize_collection("testpunks", &rules), "Punks");
    }

    proptest! {
        #[test]
        fn output_is_letters_only_and_capitalized(raw in "\\PC{1,40}") {
            let out = normalize_collection(&raw, &NormalizeRules::default());
            prop_assert!(!out.is_empty());
            prop_assert!(out.chars().all(|c| c.is_ascii_alphabetic()));
            let mut chars = out.chars();
            prop_assert!(chars.next().unwrap().is_ascii_uppercase());
            prop_assert!(chars.all(|c| c.is_ascii_lowercase()));
        }
    }
}
