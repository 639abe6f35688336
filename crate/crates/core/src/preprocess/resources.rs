use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use super::StemRule;
use crate::error::{Error, Result};

/// Locations of the optional preprocessing resource files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourcePaths {
    pub stopwords: Option<PathBuf>,
    pub emoji_map: Option<PathBuf>,
    pub stem_rules: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
}

pub(crate) fn is_single_grapheme(s: &str) -> bool {
    s.graphemes(true).count() == 1
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Yields (1-based line number, line) for non-blank lines, without the BOM
/// and trailing carriage returns.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.trim_start_matches('\u{FEFF}')
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// One token per line; lines starting with `#` are comments.
pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let text = read(path)?;
    Ok(content_lines(&text)
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .map(|(_, l)| l.trim().to_owned())
        .collect())
}

/// One valid word per line.
pub fn load_dictionary(path: &Path) -> Result<BTreeSet<String>> {
    let text = read(path)?;
    Ok(content_lines(&text)
        .map(|(_, l)| l.trim().to_owned())
        .collect())
}

fn split_tsv<'a>(path: &Path, line_no: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    let mut parts = line.split('\t');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if !k.is_empty() => Ok((k, v)),
        _ => Err(Error::format(
            path.display().to_string(),
            line_no,
            "expected exactly two tab-separated fields",
        )),
    }
}

/// `emoji<TAB>replacement` per line.
pub fn load_emoji_map(path: &Path) -> Result<HashMap<String, String>> {
    let text = read(path)?;
    let mut map = HashMap::new();
    for (line_no, line) in content_lines(&text) {
        let (emoji, replacement) = split_tsv(path, line_no, line)?;
        if !is_single_grapheme(emoji) {
            return Err(Error::format(
                path.display().to_string(),
                line_no,
                format!("`{emoji}` is not a single grapheme cluster"),
            ));
        }
        map.insert(emoji.to_owned(), replacement.trim().to_owned());
    }
    Ok(map)
}

/// `suffix<TAB>replacement` per line, returned longest suffix first.
pub fn load_stem_rules(path: &Path) -> Result<Vec<StemRule>> {
    let text = read(path)?;
    let mut rules = Vec::new();
    for (line_no, line) in content_lines(&text) {
        if line.starts_with('#') {
            continue;
        }
        let (suffix, replacement) = split_tsv(path, line_no, line)?;
        rules.push(StemRule {
            suffix: suffix.to_owned(),
            replacement: replacement.to_owned(),
        });
    }
    rules.sort_by_key(|r| std::cmp::Reverse(r.suffix.chars().count()));
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn stopwords_skip_comments() {
        let f = file("# header\nاز\n\nبه\r\n");
        let sw = load_stopwords(f.path()).unwrap();
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("از") && sw.contains("به"));
    }

    #[test]
    fn emoji_map_parses_and_validates() {
        let f = file("😂\tخنده\n❤\tعشق\n");
        let m = load_emoji_map(f.path()).unwrap();
        assert_eq!(m["😂"], "خنده");
        let bad = file("😂😂\tx\n");
        assert!(matches!(
            load_emoji_map(bad.path()),
            Err(Error::Format { line: 1, .. })
        ));
        let bad = file("😂 x\n");
        assert!(load_emoji_map(bad.path()).is_err());
    }

    #[test]
    fn stem_rules_ordered() {
        let f = file("ها\t\nهای\t\nترین\t\n");
        let rules = load_stem_rules(f.path()).unwrap();
        let suffixes: Vec<_> = rules.iter().map(|r| r.suffix.as_str()).collect();
        assert_eq!(suffixes, vec!["ترین", "های", "ها"]);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_dictionary(Path::new("/nonexistent/dict.txt")),
            Err(Error::Io { .. })
        ));
    }
}
