//! Individual text-cleaning steps. Every function here is total and pure.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

use super::TokenList;

pub const ZWNJ: char = '\u{200C}';

fn canonical_char(c: char) -> char {
    match c {
        // Arabic Yeh and Alef Maksura -> Farsi Yeh
        '\u{064A}' | '\u{0649}' => '\u{06CC}',
        // Arabic Kaf -> Keheh
        '\u{0643}' => '\u{06A9}',
        // Arabic-Indic digits -> Extended Arabic-Indic digits
        '\u{0660}'..='\u{0669}' => char::from_u32(c as u32 - 0x0660 + 0x06F0).unwrap_or(c),
        _ => c,
    }
}

fn is_presentation_form(c: char) -> bool {
    matches!(c, '\u{FB50}'..='\u{FDFF}' | '\u{FE70}'..='\u{FEFF}')
}

/// Maps Arabic code points that have a canonical Persian counterpart.
///
/// Presentation forms are first decomposed through NFKC so that contextual
/// glyph variants collapse onto their base letters.
pub fn normalize_chars(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if is_presentation_form(c) {
            for d in c.to_string().nfkc() {
                out.push(canonical_char(d));
            }
        } else {
            out.push(canonical_char(c));
        }
    }
    out
}

fn html_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<[^<>]*>").expect("valid regex"))
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid regex"))
}

/// Removes `<...>` tags and `http(s)://` / `www.` URLs.
///
/// Runs to a fixpoint: deleting a tag can splice two halves into a new URL or tag.
pub fn strip_html_urls(text: &str) -> String {
    let mut current = text.to_owned();
    loop {
        let no_tags = html_tag_re().replace_all(&current, "");
        let next = url_re().replace_all(&no_tags, "").into_owned();
        if next == current {
            return next;
        }
        current = next;
    }
}

/// Reduces any run of three or more identical grapheme clusters to a single one.
/// Whitespace runs are left alone.
pub fn collapse_repeats(text: &str) -> String {
    let graphemes: Vec<&str> = text.graphemes(true).collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < graphemes.len() {
        let g = graphemes[i];
        let mut j = i + 1;
        while j < graphemes.len() && graphemes[j] == g {
            j += 1;
        }
        let run = j - i;
        let is_space = g.chars().all(char::is_whitespace);
        if run >= 3 && !is_space {
            out.push_str(g);
        } else {
            for _ in 0..run {
                out.push_str(g);
            }
        }
        i = j;
    }
    out
}

fn is_pictographic(c: char) -> bool {
    matches!(c as u32,
        0x00A9 | 0x00AE | 0x203C | 0x2049 | 0x2122 | 0x2139
        | 0x2194..=0x21AA
        | 0x231A..=0x23FF
        | 0x24C2
        | 0x25AA..=0x25FE
        | 0x2600..=0x27BF
        | 0x2934 | 0x2935
        | 0x2B00..=0x2BFF
        | 0x3030 | 0x303D | 0x3297 | 0x3299
        | 0x1F000..=0x1FAFF
        | 0x20E3)
}

/// True if the grapheme cluster is (or contains) an emoji.
pub fn is_emoji(grapheme: &str) -> bool {
    grapheme.chars().any(is_pictographic)
}

/// Replaces mapped emojis by their text, drops unmapped ones, and normalizes
/// whitespace to single spaces.
pub fn replace_emojis(text: &str, emoji_map: &HashMap<String, String>) -> String {
    let mut out = String::with_capacity(text.len());
    for g in text.graphemes(true) {
        let replacement = emoji_map.get(g).or_else(|| {
            let bare: String = g.chars().filter(|&c| c != '\u{FE0F}').collect();
            emoji_map.get(&bare)
        });
        match replacement {
            Some(r) => {
                out.push(' ');
                out.push_str(r);
                out.push(' ');
            }
            None if is_emoji(g) => out.push(' '),
            None => out.push_str(g),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

/// Splits on whitespace and Unicode punctuation. ZWNJ survives inside tokens
/// but is trimmed from token edges; `#` is punctuation, so hashtag bodies
/// come out as plain tokens.
pub fn tokenize(text: &str) -> TokenList {
    let tokens = text
        .split(|c: char| c.is_whitespace() || is_punctuation(c))
        .map(|t| t.trim_matches(ZWNJ))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    TokenList::new(tokens)
}

pub fn remove_stopwords(tokens: &TokenList, stopwords: &BTreeSet<String>) -> TokenList {
    TokenList::new(
        tokens
            .iter()
            .filter(|t| !stopwords.contains(*t))
            .cloned()
            .collect(),
    )
}

/// One suffix-stripping rule: `suffix` is replaced by `replacement`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRule {
    pub suffix: String,
    pub replacement: String,
}

/// Applies the first matching rule (rules must already be ordered longest
/// suffix first). A rule that would empty the token is skipped.
pub fn stem(token: &str, rules: &[StemRule]) -> String {
    for rule in rules {
        if let Some(base) = token.strip_suffix(rule.suffix.as_str()) {
            let base = base.trim_end_matches(ZWNJ);
            let candidate = format!("{base}{}", rule.replacement);
            if candidate.is_empty() || candidate.chars().any(char::is_whitespace) {
                continue;
            }
            return candidate;
        }
    }
    token.to_owned()
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Replaces an unknown token by the single dictionary word at edit distance 1.
/// Ambiguous or absent candidates leave the token unchanged.
pub fn correct_spelling(token: &str, dictionary: &BTreeSet<String>) -> String {
    if dictionary.contains(token) {
        return token.to_owned();
    }
    let len = token.chars().count();
    let mut found: Option<&String> = None;
    for word in dictionary {
        if word.chars().count().abs_diff(len) > 1 {
            continue;
        }
        if edit_distance(token, word) == 1 {
            if found.is_some() {
                return token.to_owned();
            }
            found = Some(word);
        }
    }
    found.cloned().unwrap_or_else(|| token.to_owned())
}
