//! Tweet cleaning: character normalization, markup/URL stripping, emoji
//! replacement, repeat collapsing, tokenization, stopwords, stemming and
//! conservative spelling correction.

mod resources;
mod text;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use resources::{
    load_dictionary, load_emoji_map, load_stem_rules, load_stopwords, ResourcePaths,
};
pub use text::{
    collapse_repeats, correct_spelling, edit_distance, is_emoji, normalize_chars, remove_stopwords,
    replace_emojis, stem, strip_html_urls, tokenize, StemRule, ZWNJ,
};

/// A document as read from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub text: String,
    pub label: String,
}

/// Ordered tokens; never holds an empty token or one containing whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList(Vec<String>);

impl TokenList {
    /// Drops any empty token and splits tokens that contain whitespace.
    pub fn new(tokens: Vec<String>) -> Self {
        if tokens
            .iter()
            .all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace))
        {
            return TokenList(tokens);
        }
        TokenList(
            tokens
                .iter()
                .flat_map(|t| t.split_whitespace())
                .map(str::to_owned)
                .collect(),
        )
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for TokenList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

/// Toggleable pipeline steps. Tokenization always runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    NormalizeChars,
    StripHtmlUrls,
    ReplaceEmojis,
    CollapseRepeats,
    RemoveStopwords,
    Stem,
    CorrectSpelling,
}

impl Step {
    /// Execution order, independent of the order steps were enabled in.
    pub const ALL: [Step; 7] = [
        Step::NormalizeChars,
        Step::StripHtmlUrls,
        Step::ReplaceEmojis,
        Step::CollapseRepeats,
        Step::RemoveStopwords,
        Step::Stem,
        Step::CorrectSpelling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Step::NormalizeChars => "normalize_chars",
            Step::StripHtmlUrls => "strip_html_urls",
            Step::ReplaceEmojis => "replace_emojis",
            Step::CollapseRepeats => "collapse_repeats",
            Step::RemoveStopwords => "remove_stopwords",
            Step::Stem => "stem",
            Step::CorrectSpelling => "correct_spelling",
        }
    }
}

impl FromStr for Step {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Step::ALL
            .into_iter()
            .find(|step| step.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preprocessing step `{s}`")))
    }
}

/// Immutable resources and switches for [`preprocess`].
#[derive(Debug, Clone, Default)]
pub struct PreprocessConfig {
    stopwords: BTreeSet<String>,
    emoji_map: HashMap<String, String>,
    stem_rules: Vec<StemRule>,
    dictionary: Option<BTreeSet<String>>,
    steps_enabled: Vec<Step>,
}

impl PreprocessConfig {
    pub fn new(
        stopwords: BTreeSet<String>,
        emoji_map: HashMap<String, String>,
        mut stem_rules: Vec<StemRule>,
        dictionary: Option<BTreeSet<String>>,
        steps_enabled: Vec<Step>,
    ) -> Result<Self> {
        for (i, step) in steps_enabled.iter().enumerate() {
            if steps_enabled[..i].contains(step) {
                return Err(Error::Config(format!(
                    "step `{}` enabled more than once",
                    step.name()
                )));
            }
        }
        for key in emoji_map.keys() {
            if !resources::is_single_grapheme(key) {
                return Err(Error::Config(format!(
                    "emoji map key `{key}` is not a single grapheme cluster"
                )));
            }
        }
        // Stable: rules of equal length keep file order.
        stem_rules.sort_by_key(|r| std::cmp::Reverse(r.suffix.chars().count()));
        Ok(PreprocessConfig {
            stopwords,
            emoji_map,
            stem_rules,
            dictionary,
            steps_enabled,
        })
    }

    /// Every step enabled, with empty resources.
    pub fn all_steps() -> Self {
        PreprocessConfig {
            steps_enabled: Step::ALL.to_vec(),
            ..Default::default()
        }
    }

    /// Loads every resource file named in `paths`; missing entries stay empty.
    pub fn load(paths: &ResourcePaths, steps_enabled: Vec<Step>) -> Result<Self> {
        let stopwords = match &paths.stopwords {
            Some(p) => load_stopwords(p)?,
            None => BTreeSet::new(),
        };
        let emoji_map = match &paths.emoji_map {
            Some(p) => load_emoji_map(p)?,
            None => HashMap::new(),
        };
        let stem_rules = match &paths.stem_rules {
            Some(p) => load_stem_rules(p)?,
            None => Vec::new(),
        };
        let dictionary = match &paths.dictionary {
            Some(p) => Some(load_dictionary(p)?),
            None => None,
        };
        Self::new(stopwords, emoji_map, stem_rules, dictionary, steps_enabled)
    }

    pub fn enabled(&self, step: Step) -> bool {
        self.steps_enabled.contains(&step)
    }

    pub fn steps_enabled(&self) -> &[Step] {
        &self.steps_enabled
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn emoji_map(&self) -> &HashMap<String, String> {
        &self.emoji_map
    }

    pub fn stem_rules(&self) -> &[StemRule] {
        &self.stem_rules
    }

    pub fn dictionary(&self) -> Option<&BTreeSet<String>> {
        self.dictionary.as_ref()
    }
}

/// Runs the enabled steps in their fixed order over one text.
pub fn preprocess_text(text: &str, cfg: &PreprocessConfig) -> TokenList {
    let mut s = text.to_owned();
    if cfg.enabled(Step::NormalizeChars) {
        s = normalize_chars(&s);
    }
    if cfg.enabled(Step::StripHtmlUrls) {
        s = strip_html_urls(&s);
    }
    if cfg.enabled(Step::ReplaceEmojis) {
        s = replace_emojis(&s, &cfg.emoji_map);
    }
    if cfg.enabled(Step::CollapseRepeats) {
        s = collapse_repeats(&s);
    }
    let mut tokens = tokenize(&s);
    if cfg.enabled(Step::RemoveStopwords) {
        tokens = remove_stopwords(&tokens, &cfg.stopwords);
    }
    if cfg.enabled(Step::Stem) && !cfg.stem_rules.is_empty() {
        tokens = TokenList::new(tokens.iter().map(|t| stem(t, &cfg.stem_rules)).collect());
    }
    if cfg.enabled(Step::CorrectSpelling) {
        if let Some(dict) = &cfg.dictionary {
            tokens = TokenList::new(tokens.iter().map(|t| correct_spelling(t, dict)).collect());
        }
    }
    tokens
}

pub fn preprocess(doc: &RawDocument, cfg: &PreprocessConfig) -> TokenList {
    preprocess_text(&doc.text, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_pipeline_example() {
        let mut emoji = HashMap::new();
        emoji.insert("😂".to_owned(), "خنده".to_owned());
        let cfg =
            PreprocessConfig::new(BTreeSet::new(), emoji, Vec::new(), None, Step::ALL.to_vec())
                .unwrap();
        let doc = RawDocument {
            text: "خوووووب 😂".into(),
            label: "happy".into(),
        };
        assert_eq!(preprocess(&doc, &cfg).as_slice(), ["خوب", "خنده"]);
        assert!(preprocess_text("", &cfg).is_empty());
    }

    #[test]
    fn tokenize_only_path() {
        let cfg = PreprocessConfig::default();
        assert_eq!(preprocess_text("a b", &cfg).as_slice(), ["a", "b"]);
        // nothing else runs
        assert_eq!(preprocess_text("aaa ٤", &cfg).as_slice(), ["aaa", "٤"]);
    }

    #[test]
    fn stem_runs_before_spelling() {
        let dict: BTreeSet<String> = ["کتاب".to_owned()].into();
        let rules = vec![StemRule {
            suffix: "ها".into(),
            replacement: String::new(),
        }];
        let cfg = PreprocessConfig::new(
            BTreeSet::new(),
            HashMap::new(),
            rules,
            Some(dict),
            vec![Step::Stem, Step::CorrectSpelling],
        )
        .unwrap();
        // "کتابب" + "ها": stem gives "کتابب", then correction gives "کتاب"
        assert_eq!(preprocess_text("کتاببها", &cfg).as_slice(), ["کتاب"]);
    }

    #[test]
    fn duplicate_steps_rejected() {
        let err = PreprocessConfig::new(
            BTreeSet::new(),
            HashMap::new(),
            Vec::new(),
            None,
            vec![Step::Stem, Step::Stem],
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn multi_grapheme_emoji_key_rejected() {
        let mut emoji = HashMap::new();
        emoji.insert("😂😂".to_owned(), "x".to_owned());
        let err = PreprocessConfig::new(BTreeSet::new(), emoji, vec![], None, vec![]);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn stem_rules_sorted_longest_first() {
        let rules = vec![
            StemRule {
                suffix: "ها".into(),
                replacement: String::new(),
            },
            StemRule {
                suffix: "های".into(),
                replacement: String::new(),
            },
        ];
        let cfg = PreprocessConfig::new(
            BTreeSet::new(),
            HashMap::new(),
            rules,
            None,
            vec![Step::Stem],
        )
        .unwrap();
        assert_eq!(cfg.stem_rules()[0].suffix, "های");
        assert_eq!(preprocess_text("کتابهای", &cfg).as_slice(), ["کتاب"]);
    }

    #[test]
    fn step_names_round_trip() {
        for step in Step::ALL {
            assert_eq!(step.name().parse::<Step>().unwrap(), step);
        }
        assert!("tokenize".parse::<Step>().is_err());
    }
}
