//! Document ingestion, tokenization, n-gram vocabularies and bag-of-words
//! matrices.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Maximal runs of Unicode letters, digits and underscore.
pub const DEFAULT_TOKEN_PATTERN: &str = r"[\p{L}\p{N}_]+";

/// Sparse document-term counts, one row per document.
pub type CountMatrix = CsrMatrix<u32>;

#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub stopwords: HashSet<String>,
    pattern: Regex,
    /// Minimum token length in characters.
    pub min_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            stopwords: HashSet::new(),
            pattern: Regex::new(DEFAULT_TOKEN_PATTERN).expect("default pattern compiles"),
            min_len: 2,
        }
    }
}

impl TokenizerConfig {
    pub fn with_pattern(mut self, pattern: &str) -> Result<Self> {
        self.pattern = Regex::new(pattern)
            .map_err(|e| Error::Config(format!("bad token pattern {pattern:?}: {e}")))?;
        Ok(self)
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let lower = self.lowercase;
        self.stopwords = words
            .into_iter()
            .map(|w| {
                let w = w.into();
                if lower {
                    w.to_lowercase()
                } else {
                    w
                }
            })
            .collect();
        self
    }

    pub fn pattern(&self) -> &str {
        self.pattern.as_str()
    }

    fn normalize(&self, token: &str) -> Option<String> {
        let tok = if self.lowercase {
            token.to_lowercase()
        } else {
            token.to_owned()
        };
        (tok.chars().count() >= self.min_len && !self.stopwords.contains(&tok)).then_some(tok)
    }
}

/// Reads a stopword file: one term per LF-separated line, blank lines ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .split('\n')
        .map(|l| l.trim_end_matches('\r').trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let owned;
    let text = if config.lowercase {
        owned = text.to_lowercase();
        owned.as_str()
    } else {
        text
    };
    config
        .pattern
        .find_iter(text)
        .filter_map(|m| config.normalize(m.as_str()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub text: String,
    /// Pre-annotated token stream (e.g. lemmatized upstream). When present it
    /// replaces pattern matching on `text`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            tokens: None,
        }
    }

    pub fn tokens(&self, config: &TokenizerConfig) -> Vec<String> {
        match &self.tokens {
            Some(toks) => toks.iter().filter_map(|t| config.normalize(t)).collect(),
            None => tokenize(&self.text, config),
        }
    }
}

/// Ordered document collection. Position in `docs` is the row index used by
/// every downstream matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    docs: Vec<Document>,
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: String,
    text: Option<String>,
    tokens: Option<Vec<String>>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(docs.len());
        for d in &docs {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::invalid(format!("duplicate document id {:?}", d.id)));
            }
        }
        Ok(Self { docs })
    }

    /// Convenience constructor for tests and synthetic data; ids are `d0`, `d1`, ...
    pub fn from_texts<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let docs = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("d{i}"), t))
            .collect();
        Self { docs }
    }

    pub fn from_jsonl_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_jsonl_reader(File::open(path)?)
    }

    pub fn from_jsonl_reader(reader: impl Read) -> Result<Self> {
        let mut docs = Vec::new();
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JsonlRecord = serde_json::from_str(&line).map_err(|e| {
                Error::Format(format!("corpus line {}: {e}", lineno + 1))
            })?;
            if rec.text.is_none() && rec.tokens.is_none() {
                return Err(Error::Format(format!(
                    "corpus line {}: needs \"text\" or \"tokens\"",
                    lineno + 1
                )));
            }
            docs.push(Document {
                id: rec.id,
                text: rec.text.unwrap_or_default(),
                tokens: rec.tokens,
            });
        }
        Self::new(docs)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(File::create(path)?);
        for d in &self.docs {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.id.as_str())
    }

    pub fn tokenized(&self, config: &TokenizerConfig) -> Vec<Vec<String>> {
        self.docs.iter().map(|d| d.tokens(config)).collect()
    }
}

/// Contiguous token windows of length `min..=max` joined by `_`, ordered by
/// start position and then length.
pub fn ngrams(tokens: &[String], range: (usize, usize)) -> impl Iterator<Item = String> + '_ {
    let (lo, hi) = range;
    (0..tokens.len()).flat_map(move |start| {
        (lo..=hi)
            .take_while(move |n| start + n <= tokens.len())
            .map(move |n| tokens[start..start + n].join("_"))
    })
}

fn check_range(range: (usize, usize)) -> Result<()> {
    let (lo, hi) = range;
    if lo < 1 || lo > hi || hi > 3 {
        return Err(Error::invalid(format!(
            "n-gram range ({lo},{hi}) must satisfy 1 <= min <= max <= 3"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    ngram_range: (usize, usize),
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from already tokenized documents. Terms are
    /// ordered by descending document frequency, ties broken lexicographically.
    pub fn from_tokens(
        docs: &[Vec<String>],
        ngram_range: (usize, usize),
        min_count: usize,
    ) -> Result<Self> {
        check_range(ngram_range)?;
        if min_count < 1 {
            return Err(Error::invalid("min_count must be >= 1"));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            let distinct: BTreeSet<String> = ngrams(doc, ngram_range).collect();
            for g in distinct {
                *df.entry(g).or_default() += 1;
            }
        }
        let mut kept: Vec<(String, usize)> =
            df.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (terms, doc_freq): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
        Ok(Self::assemble(terms, doc_freq, ngram_range))
    }

    fn assemble(terms: Vec<String>, doc_freq: Vec<usize>, ngram_range: (usize, usize)) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            terms,
            doc_freq,
            ngram_range,
            index,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        self.ngram_range
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    /// Counts in-vocabulary n-grams of each tokenized document.
    pub fn count(&self, docs: &[Vec<String>]) -> CountMatrix {
        let rows = docs.iter().map(|doc| {
            let mut row: HashMap<usize, u32> = HashMap::new();
            for g in ngrams(doc, self.ngram_range) {
                if let Some(id) = self.id(&g) {
                    *row.entry(id).or_default() += 1;
                }
            }
            row.into_iter().collect::<Vec<_>>()
        });
        CsrMatrix::from_rows(self.len(), rows)
    }
}

#[derive(Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    ngram_range: (usize, usize),
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::assemble(r.terms, r.doc_freq, r.ngram_range)
    }
}

pub fn build_vocabulary(
    corpus: &Corpus,
    config: &TokenizerConfig,
    ngram_range: (usize, usize),
    min_count: usize,
) -> Result<Vocabulary> {
    Vocabulary::from_tokens(&corpus.tokenized(config), ngram_range, min_count)
}

pub fn doc_term_counts(corpus: &Corpus, vocab: &Vocabulary, config: &TokenizerConfig) -> CountMatrix {
    vocab.count(&corpus.tokenized(config))
}

/// Smoothed TF-IDF with L2-normalized rows:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
pub fn tfidf(counts: &CountMatrix) -> Result<CsrMatrix<f64>> {
    let n = counts.n_rows();
    if n == 0 || counts.n_cols() == 0 {
        return Err(Error::invalid("tfidf needs a non-empty count matrix"));
    }
    let mut df = vec![0usize; counts.n_cols()];
    for i in 0..n {
        for (j, _) in counts.row(i) {
            df[j] += 1;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    let rows = (0..n).map(|i| {
        let mut row: Vec<(usize, f64)> = counts
            .row(i)
            .map(|(j, c)| (j, f64::from(c) * idf[j]))
            .collect();
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|(_, v)| *v /= norm);
        }
        row
    });
    Ok(CsrMatrix::from_rows(counts.n_cols(), rows))
}
