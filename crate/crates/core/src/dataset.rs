//! Labeled CSV datasets: UTF-8, header `text,label`, RFC 4180 quoting.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::preprocess::RawDocument;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub documents: Vec<RawDocument>,
    /// Sorted distinct labels; a class index is a position in this list.
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    /// Derives the sorted class list from the documents.
    pub fn new(documents: Vec<RawDocument>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyDataset("no documents".into()));
        }
        let class_names: Vec<String> = documents
            .iter()
            .map(|d| d.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(LabeledDataset {
            documents,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_names
            .binary_search_by(|c| c.as_str().cmp(label))
            .ok()
    }

    /// Class index of every document, in file order.
    pub fn labels(&self) -> Vec<usize> {
        self.documents
            .iter()
            .map(|d| {
                self.class_index(&d.label)
                    .expect("label drawn from documents")
            })
            .collect()
    }
}

/// Reads documents in file order from any CSV source. `source` names the
/// input in error messages.
pub fn parse_dataset<R: Read>(reader: R, source: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::format(source, 1, e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{FEFF}').trim() == name)
            .ok_or_else(|| Error::format(source, 1, format!("missing `{name}` column")))
    };
    let text_col = column("text")?;
    let label_col = column("label")?;

    let mut documents = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::format(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let label = record.get(label_col).unwrap_or_default().trim();
        if label.is_empty() {
            return Err(Error::format(source, line, "empty label"));
        }
        documents.push(RawDocument {
            text: record.get(text_col).unwrap_or_default().to_owned(),
            label: label.to_owned(),
        });
    }
    if documents.is_empty() {
        return Err(Error::EmptyDataset(format!("{source} has no documents")));
    }
    LabeledDataset::new(documents)
}

pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, &path.display().to_string())
}

/// Serializes documents with a `text,label` header.
pub fn write_dataset<W: Write>(writer: W, documents: &[RawDocument]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["text", "label"])?;
    for d in documents {
        wtr.write_record([&d.text, &d.label])?;
    }
    wtr.flush()
}

pub fn save_dataset(path: &Path, documents: &[RawDocument]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(file, documents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let csv =
            "text,label\nhello,positive\n\"a, \"\"quoted\"\" one\",neutral\nbad day,negative\n";
        let ds = parse_dataset(csv.as_bytes(), "mem").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.class_names, ["negative", "neutral", "positive"]);
        assert_eq!(ds.documents[1].text, "a, \"quoted\" one");
        assert_eq!(ds.labels(), vec![2, 1, 0]);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(
            parse_dataset("text,label\n".as_bytes(), "mem"),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn missing_column() {
        let err = parse_dataset("text,tag\nx,y\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse_dataset("text,label\na,b\nc\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn columns_in_any_order_and_round_trip() {
        let ds = parse_dataset("label,text\nx,\"multi\nline\"\n".as_bytes(), "mem").unwrap();
        assert_eq!(ds.documents[0].text, "multi\nline");
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds.documents).unwrap();
        assert_eq!(parse_dataset(buf.as_slice(), "mem").unwrap(), ds);
    }
}
