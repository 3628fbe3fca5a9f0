use std::collections::HashMap;

use crate::corpus::Corpus;

/// Lowercase, split on anything that is not alphanumeric, drop empties.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct Postings {
    /// `(doc index, term frequency)` sorted by doc index.
    pub docs: Vec<(u32, u32)>,
    /// Collection frequency of the term.
    pub cf: u64,
}

impl Postings {
    pub fn tf(&self, doc: u32) -> u32 {
        self.docs
            .binary_search_by_key(&doc, |p| p.0)
            .map(|i| self.docs[i].1)
            .unwrap_or(0)
    }
}

/// Term to postings map over the corpus texts.
#[derive(Debug, Clone, Default)]
pub struct InvertedIndex {
    postings: HashMap<String, Postings>,
    doc_len: Vec<u32>,
    collection_len: u64,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> InvertedIndex {
        let mut postings: HashMap<String, Postings> = HashMap::new();
        let mut doc_len = Vec::with_capacity(corpus.len());
        let mut collection_len = 0u64;
        for (i, doc) in corpus.documents().iter().enumerate() {
            let tokens = doc.text.as_deref().map(tokenize).unwrap_or_default();
            doc_len.push(tokens.len() as u32);
            collection_len += tokens.len() as u64;
            let mut counts: HashMap<String, u32> = HashMap::new();
            for t in tokens {
                *counts.entry(t).or_default() += 1;
            }
            for (term, tf) in counts {
                let p = postings.entry(term).or_default();
                // documents are visited in index order, so postings stay sorted
                p.docs.push((i as u32, tf));
                p.cf += tf as u64;
            }
        }
        InvertedIndex {
            postings,
            doc_len,
            collection_len,
        }
    }

    pub fn postings(&self, term: &str) -> Option<&Postings> {
        self.postings.get(term)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn doc_len(&self, doc: usize) -> u32 {
        self.doc_len[doc]
    }

    pub fn collection_len(&self) -> u64 {
        self.collection_len
    }

    pub fn is_empty(&self) -> bool {
        self.collection_len == 0
    }
}
