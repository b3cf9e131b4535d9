use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfMatrix {
    pub vocabulary: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TfidfMatrix {
    pub fn weight(&self, doc: usize, term: &str) -> Option<f64> {
        let j = self
            .vocabulary
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()?;
        Some(self.rows[doc][j])
    }
}

/// Lower-cases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Unigram TF-IDF with raw counts and smoothed idf `ln((1 + N) / (1 + df)) + 1`.
/// The vocabulary is sorted lexicographically.
pub fn tfidf<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<TfidfMatrix> {
    if corpus.iter().all(|doc| doc.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let counts: Vec<HashMap<&str, usize>> = corpus
        .iter()
        .map(|doc| {
            let mut m = HashMap::new();
            for token in doc {
                *m.entry(token.as_ref()).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &counts {
        for term in doc.keys() {
            *doc_freq.entry(term).or_insert(0) += 1;
        }
    }
    let n_docs = corpus.len() as f64;
    let idf: Vec<f64> = doc_freq
        .values()
        .map(|&df| ((1.0 + n_docs) / (1.0 + df as f64)).ln() + 1.0)
        .collect();
    let rows = counts
        .iter()
        .map(|doc| {
            doc_freq
                .keys()
                .zip(&idf)
                .map(|(term, idf)| doc.get(term).map_or(0.0, |&tf| tf as f64 * idf))
                .collect()
        })
        .collect();
    Ok(TfidfMatrix {
        vocabulary: doc_freq.keys().map(|t| t.to_string()).collect(),
        rows,
    })
}
