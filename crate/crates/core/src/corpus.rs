//! Tokenized text ingestion, vocabulary construction and windowed
//! co-occurrence counting.
//!
//! Input text is a sequence of newline-delimited records. Context windows
//! never cross a record boundary. Tokens are opaque strings; any
//! normalization happens before they reach this module (see
//! [`normalize_token`]).

use std::collections::HashMap;

use rayon::prelude::*;

/// Records per counting shard. Fixed so the floating-point summation order
/// does not depend on the worker count.
const SHARD_RECORDS: usize = 256;

/// Lowercases and drops every non-alphabetic character. Returns `None` when
/// nothing is left.
pub fn normalize_token(token: &str) -> Option<String> {
    let t: String = token.chars().filter(|c| c.is_alphabetic()).flat_map(char::to_lowercase).collect();
    if t.is_empty() {
        None
    } else {
        Some(t)
    }
}

/// Splits text into whitespace-tokenized records, one per line. Empty lines
/// yield empty records.
pub fn tokenize_records(text: &str, normalize: bool) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| {
            let toks = line.split_whitespace();
            if normalize {
                toks.filter_map(normalize_token).collect()
            } else {
                toks.map(str::to_string).collect()
            }
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    freq: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from records. Words are ordered by descending
    /// count, ties broken by first appearance.
    pub fn build<R, S>(records: &[R], min_count: u64) -> Vocabulary
    where
        R: AsRef<[S]>,
        S: AsRef<str>,
    {
        let min_count = min_count.max(1);
        // (count, first position)
        let mut counts: HashMap<&str, (u64, usize)> = HashMap::new();
        let mut pos = 0usize;
        for rec in records {
            for tok in rec.as_ref() {
                let e = counts.entry(tok.as_ref()).or_insert((0, pos));
                e.0 += 1;
                pos += 1;
            }
        }
        let mut entries: Vec<(&str, u64, usize)> = counts
            .into_iter()
            .filter(|(_, (c, _))| *c >= min_count)
            .map(|(w, (c, first))| (w, c, first))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        Vocabulary::from_entries(entries.into_iter().map(|(w, c, _)| (w.to_string(), c)))
            .expect("distinct words")
    }

    /// Builds from `(word, count)` pairs already in id order. Fails on a
    /// duplicate word.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, u64)>) -> Result<Vocabulary, String> {
        let mut vocab = Vocabulary::default();
        for (w, c) in entries {
            if vocab.index.contains_key(&w) {
                return Err(format!("duplicate word {w:?}"));
            }
            vocab.index.insert(w.clone(), vocab.words.len());
            vocab.words.push(w);
            vocab.freq.push(c);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn freq(&self, id: usize) -> u64 {
        self.freq[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words.iter().map(String::as_str).zip(self.freq.iter().copied())
    }
}

/// Sparse co-occurrence matrix in compressed-row form with ascending
/// column indices per row. Stored values are strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct CooccurrenceMatrix {
    vocab_size: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl CooccurrenceMatrix {
    pub fn empty(vocab_size: usize) -> Self {
        CooccurrenceMatrix {
            vocab_size,
            row_ptr: vec![0; vocab_size + 1],
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from unordered triplets. Duplicate coordinates are summed in
    /// input order; non-positive totals are dropped.
    pub fn from_triplets(
        vocab_size: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, String> {
        let mut map: HashMap<(u32, u32), f64> = HashMap::new();
        for (i, j, x) in triplets {
            if i >= vocab_size || j >= vocab_size {
                return Err(format!("entry ({i}, {j}) outside vocabulary of size {vocab_size}"));
            }
            *map.entry((i as u32, j as u32)).or_insert(0.0) += x;
        }
        Ok(Self::from_map(vocab_size, map))
    }

    fn from_map(vocab_size: usize, map: HashMap<(u32, u32), f64>) -> Self {
        let mut entries: Vec<((u32, u32), f64)> = map.into_iter().filter(|(_, x)| *x > 0.0).collect();
        entries.sort_unstable_by_key(|(k, _)| *k);
        let mut row_ptr = vec![0usize; vocab_size + 1];
        for ((i, _), _) in &entries {
            row_ptr[*i as usize + 1] += 1;
        }
        for i in 0..vocab_size {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = entries.iter().map(|((_, j), _)| *j).collect();
        let values = entries.iter().map(|(_, x)| *x).collect();
        CooccurrenceMatrix { vocab_size, row_ptr, cols, values }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted context support 𝒦 of row `i`.
    pub fn row_support(&self, i: usize) -> &[u32] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// `(j, X_ij)` for the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_support(i).iter().map(|&j| j as usize).zip(self.row_values(i).iter().copied())
    }

    pub fn support_size(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = self.row_support(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => self.row_values(i)[k],
            Err(_) => 0.0,
        }
    }

    /// All stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.vocab_size).flat_map(move |i| self.row(i).map(move |(j, x)| (i, j, x)))
    }

    /// Total weighted mass `Σ_ij X_ij`, rows summed in ascending column order.
    pub fn total(&self) -> f64 {
        (0..self.vocab_size).map(|i| self.row_values(i).iter().sum::<f64>()).sum()
    }
}

/// GloVe weighting function `f(x) = min(1, (x / x_max)^alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weighting {
    pub x_max: f64,
    pub alpha: f64,
}

impl Default for Weighting {
    fn default() -> Self {
        Weighting { x_max: 100.0, alpha: 0.75 }
    }
}

impl Weighting {
    #[inline]
    pub fn weight(&self, x: f64) -> f64 {
        if x < self.x_max {
            (x / self.x_max).powf(self.alpha)
        } else {
            1.0
        }
    }
}

/// `f(x)` with the default cutoff 100 and exponent 3/4.
#[inline]
pub fn weight_f(x: f64) -> f64 {
    Weighting::default().weight(x)
}

/// Counts inverse-distance weighted co-occurrences.
///
/// Each record is scanned independently. For a center token at position `p`
/// and a context token at `p - d` (and `p + d` when `symmetric`),
/// `1 ≤ d ≤ window`, `1/d` is added to `X[center, context]`. Tokens missing
/// from `vocab` occupy positions but emit nothing.
pub fn count_cooccurrences<R, S>(
    records: &[R],
    vocab: &Vocabulary,
    window: usize,
    symmetric: bool,
) -> CooccurrenceMatrix
where
    R: AsRef<[S]> + Sync,
    S: AsRef<str> + Sync,
{
    assert!(window >= 1, "window must be at least 1");
    let shards: Vec<HashMap<(u32, u32), f64>> = records
        .par_chunks(SHARD_RECORDS)
        .map(|chunk| {
            let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
            let mut ids: Vec<Option<u32>> = Vec::new();
            for rec in chunk {
                ids.clear();
                ids.extend(rec.as_ref().iter().map(|t| vocab.id(t.as_ref()).map(|i| i as u32)));
                count_record(&ids, window, symmetric, &mut acc);
            }
            acc
        })
        .collect();

    // shards merged in record order
    let mut iter = shards.into_iter();
    let mut total = iter.next().unwrap_or_default();
    for shard in iter {
        for (k, x) in shard {
            *total.entry(k).or_insert(0.0) += x;
        }
    }
    CooccurrenceMatrix::from_map(vocab.len(), total)
}

fn count_record(ids: &[Option<u32>], window: usize, symmetric: bool, acc: &mut HashMap<(u32, u32), f64>) {
    for (q, right) in ids.iter().enumerate() {
        let lo = q.saturating_sub(window);
        for p in lo..q {
            let d = (q - p) as f64;
            let (Some(left), Some(right)) = (ids[p], *right) else { continue };
            let inc = 1.0 / d;
            // right token is the center, left token its left context
            *acc.entry((right, left)).or_insert(0.0) += inc;
            if symmetric {
                *acc.entry((left, right)).or_insert(0.0) += inc;
            }
        }
    }
}
