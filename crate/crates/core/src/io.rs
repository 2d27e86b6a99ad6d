//! On-disk formats.
//!
//! * vocabulary text: `word count` per line, in id order
//! * co-occurrence binary: `(i: i32, j: i32, x: f64)` little-endian records,
//!   1-based indices, no header
//! * vectors text: `word v1 … vD` per line
//! * covariance binary: `GLVV` header then one record per word
//!
//! Floats are written in the shortest representation that parses back to
//! the same value, so text formats are lossless. Every writer goes through a
//! temporary file and an atomic rename.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Serialize};

use crate::corpus::{CooccurrenceMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::glove::EmbeddingModel;
use crate::linalg::SymMatrix;
use crate::scalar::{lit, to_f64, Real};
use crate::variance::{CovMethod, CovarianceStore, WordCovariance};

pub const COV_MAGIC: &[u8; 4] = b"GLVV";
pub const COV_VERSION: u32 = 1;
const COOC_RECORD: usize = 16;

/// Writes through a temporary file in the destination directory, renamed
/// into place only if `body` succeeds.
pub fn atomic_write(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    atomic_write(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(0, "json", e.to_string()))
}

fn fmt_float<T: Real>(x: T) -> String {
    format!("{x:?}")
}

/// Lines of a text file with the byte offset at which each starts.
fn lines_with_offsets(bytes: &[u8]) -> Result<Vec<(u64, &str)>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::format(e.valid_up_to() as u64, "text", "invalid UTF-8"))?;
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.split_inclusive('\n') {
        let content = line.strip_suffix('\n').unwrap_or(line);
        out.push((offset, content));
        offset += line.len() as u64;
    }
    Ok(out)
}

pub fn write_vocab_to(w: &mut dyn Write, vocab: &Vocabulary) -> Result<()> {
    for (word, count) in vocab.iter() {
        writeln!(w, "{word} {count}")?;
    }
    Ok(())
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    atomic_write(path, |w| write_vocab_to(w, vocab))
}

pub fn parse_vocab(bytes: &[u8]) -> Result<Vocabulary> {
    let mut entries = Vec::new();
    for (offset, line) in lines_with_offsets(bytes)? {
        let mut parts = line.split(' ');
        let (Some(word), Some(count), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format(offset, "vocab line", format!("expected `word count`, got {line:?}")));
        };
        if word.is_empty() {
            return Err(Error::format(offset, "word", "empty word"));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| Error::format(offset + word.len() as u64 + 1, "count", format!("not an integer: {count:?}")))?;
        entries.push((word.to_string(), count));
    }
    Vocabulary::from_entries(entries).map_err(|m| Error::format(0, "word", m))
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    parse_vocab(&fs::read(path)?)
}

pub fn write_cooccurrence_to(w: &mut dyn Write, x: &CooccurrenceMatrix) -> Result<()> {
    for (i, j, v) in x.entries() {
        w.write_all(&((i + 1) as i32).to_le_bytes())?;
        w.write_all(&((j + 1) as i32).to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_cooccurrence(path: &Path, x: &CooccurrenceMatrix) -> Result<()> {
    atomic_write(path, |w| write_cooccurrence_to(w, x))
}

/// Parses co-occurrence records. With `vocab_size` given, indices beyond it
/// are rejected; otherwise the size is the largest index seen.
pub fn parse_cooccurrence(bytes: &[u8], vocab_size: Option<usize>) -> Result<CooccurrenceMatrix> {
    if bytes.len() % COOC_RECORD != 0 {
        let offset = (bytes.len() / COOC_RECORD * COOC_RECORD) as u64;
        return Err(Error::format(offset, "record", "truncated record (expected 16 bytes)"));
    }
    let mut triplets = Vec::with_capacity(bytes.len() / COOC_RECORD);
    let mut max_index = 0usize;
    for (k, rec) in bytes.chunks_exact(COOC_RECORD).enumerate() {
        let offset = (k * COOC_RECORD) as u64;
        let i = i32::from_le_bytes(rec[0..4].try_into().unwrap());
        let j = i32::from_le_bytes(rec[4..8].try_into().unwrap());
        let x = f64::from_le_bytes(rec[8..16].try_into().unwrap());
        for (value, field, off) in [(i, "i", offset), (j, "j", offset + 4)] {
            if value < 1 {
                return Err(Error::format(off, field, format!("index {value} is not 1-based")));
            }
            if let Some(v) = vocab_size {
                if value as usize > v {
                    return Err(Error::format(off, field, format!("index {value} exceeds vocabulary size {v}")));
                }
            }
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::format(offset + 8, "x", format!("count {x} is not positive and finite")));
        }
        max_index = max_index.max(i as usize).max(j as usize);
        triplets.push((i as usize - 1, j as usize - 1, x));
    }
    let v = vocab_size.unwrap_or(max_index);
    CooccurrenceMatrix::from_triplets(v, triplets).map_err(|m| Error::format(0, "record", m))
}

pub fn read_cooccurrence(path: &Path, vocab_size: Option<usize>) -> Result<CooccurrenceMatrix> {
    parse_cooccurrence(&fs::read(path)?, vocab_size)
}

/// `word v1 … vD` lines for the rows of a row-major `V × D` matrix.
pub fn write_vectors_to<T: Real>(w: &mut dyn Write, words: &[String], data: &[T], dim: usize) -> Result<()> {
    if data.len() != words.len() * dim {
        return Err(Error::DimensionMismatch(format!("{} words but {} values at D={dim}", words.len(), data.len())));
    }
    for (word, row) in words.iter().zip(data.chunks(dim.max(1))) {
        w.write_all(word.as_bytes())?;
        for &x in row {
            write!(w, " {}", fmt_float(x))?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_vectors<T: Real>(path: &Path, words: &[String], data: &[T], dim: usize) -> Result<()> {
    atomic_write(path, |w| write_vectors_to(w, words, data, dim))
}

/// Vectors text table: words, dimension and row-major values.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorTable<T> {
    pub words: Vec<String>,
    pub dim: usize,
    pub data: Vec<T>,
}

pub fn parse_vectors<T: Real>(bytes: &[u8]) -> Result<VectorTable<T>> {
    let mut table = VectorTable { words: Vec::new(), dim: 0, data: Vec::new() };
    for (n, (offset, line)) in lines_with_offsets(bytes)?.into_iter().enumerate() {
        let mut parts = line.split(' ');
        let word = parts.next().unwrap_or_default();
        if word.is_empty() {
            return Err(Error::format(offset, "word", "empty word"));
        }
        let mut pos = offset + word.len() as u64 + 1;
        let mut count = 0;
        for tok in parts {
            let x: T = tok
                .parse()
                .map_err(|_| Error::format(pos, "value", format!("not a number: {tok:?}")))?;
            table.data.push(x);
            pos += tok.len() as u64 + 1;
            count += 1;
        }
        if n == 0 {
            table.dim = count;
        } else if count != table.dim {
            return Err(Error::format(offset, "value", format!("expected {} values, found {count}", table.dim)));
        }
        table.words.push(word.to_string());
    }
    Ok(table)
}

pub fn read_vectors<T: Real>(path: &Path) -> Result<VectorTable<T>> {
    parse_vectors(&fs::read(path)?)
}

/// Sidecar describing a trained model.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelMeta {
    pub dim: usize,
    pub vocab_size: usize,
    pub seed: u64,
    pub epochs: usize,
    pub initial_lr: f64,
    pub threads: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub precision: String,
    pub init: String,
    pub shuffle: String,
    pub refit_center: bool,
    pub version: String,
}

/// File set of a model saved under `prefix`.
#[derive(Clone, Debug)]
pub struct ModelPaths {
    pub center: PathBuf,
    pub context: PathBuf,
    pub center_bias: PathBuf,
    pub context_bias: PathBuf,
    pub meta: PathBuf,
}

impl ModelPaths {
    pub fn new(prefix: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        ModelPaths {
            center: with(".center.txt"),
            context: with(".context.txt"),
            center_bias: with(".center_bias.txt"),
            context_bias: with(".context_bias.txt"),
            meta: with(".meta.json"),
        }
    }
}

pub fn write_model<T: Real>(prefix: &Path, words: &[String], model: &EmbeddingModel<T>, meta: &ModelMeta) -> Result<()> {
    if words.len() != model.vocab_size() {
        return Err(Error::DimensionMismatch(format!("{} words for a model with V={}", words.len(), model.vocab_size())));
    }
    let p = ModelPaths::new(prefix);
    let d = model.dim();
    write_vectors(&p.center, words, model.center_matrix(), d)?;
    write_vectors(&p.context, words, model.context_matrix(), d)?;
    write_vectors(&p.center_bias, words, model.center_biases(), 1)?;
    write_vectors(&p.context_bias, words, model.context_biases(), 1)?;
    write_json(&p.meta, meta)
}

pub fn read_model<T: Real>(prefix: &Path) -> Result<(Vec<String>, EmbeddingModel<T>)> {
    let p = ModelPaths::new(prefix);
    let center: VectorTable<T> = read_vectors(&p.center)?;
    let context: VectorTable<T> = read_vectors(&p.context)?;
    let cb: VectorTable<T> = read_vectors(&p.center_bias)?;
    let xb: VectorTable<T> = read_vectors(&p.context_bias)?;
    if context.words != center.words || cb.words != center.words || xb.words != center.words {
        return Err(Error::DimensionMismatch("model files list different words".into()));
    }
    if context.dim != center.dim || (cb.dim != 1 && !cb.words.is_empty()) || (xb.dim != 1 && !xb.words.is_empty()) {
        return Err(Error::DimensionMismatch("model files have inconsistent widths".into()));
    }
    let model = EmbeddingModel::from_parts(center.dim, center.data, context.data, cb.data, xb.data)?;
    Ok((center.words, model))
}

pub fn write_covariance_to<T: Real>(w: &mut dyn Write, store: &CovarianceStore<T>) -> Result<()> {
    w.write_all(COV_MAGIC)?;
    w.write_all(&COV_VERSION.to_le_bytes())?;
    w.write_all(&(store.len() as u32).to_le_bytes())?;
    w.write_all(&(store.dim() as u32).to_le_bytes())?;
    for b in store.blocks() {
        w.write_all(&(b.word_id as u32).to_le_bytes())?;
        w.write_all(&[b.method.code()])?;
        w.write_all(&(b.support as u32).to_le_bytes())?;
        w.write_all(&(b.dropped_dims as u16).to_le_bytes())?;
        w.write_all(&b.sigma2.map_or(f64::NAN, to_f64).to_le_bytes())?;
        if let Some(cov) = &b.cov {
            for x in cov.lower_triangle() {
                w.write_all(&to_f64(x).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn write_covariance<T: Real>(path: &Path, store: &CovarianceStore<T>) -> Result<()> {
    atomic_write(path, |w| write_covariance_to(w, store))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::format(self.pos as u64, field, format!("truncated: need {n} bytes")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }
}

pub fn parse_covariance<T: Real>(bytes: &[u8]) -> Result<CovarianceStore<T>> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != COV_MAGIC {
        return Err(Error::format(0, "magic", "not a GLVV covariance file"));
    }
    let version = c.u32("version")?;
    if version != COV_VERSION {
        return Err(Error::format(4, "version", format!("unsupported version {version}")));
    }
    let v = c.u32("V")? as usize;
    let d = c.u32("D")? as usize;
    let tri = d * (d + 1) / 2;
    let mut blocks = Vec::with_capacity(v);
    for k in 0..v {
        let start = c.pos as u64;
        let word_id = c.u32("word_id")? as usize;
        if word_id != k {
            return Err(Error::format(start, "word_id", format!("expected {k}, found {word_id}")));
        }
        let code_pos = c.pos as u64;
        let code = c.take(1, "method")?[0];
        let method = CovMethod::from_code(code).ok_or_else(|| Error::format(code_pos, "method", format!("unknown code {code}")))?;
        let support = c.u32("support")? as usize;
        let dropped = c.u16("dropped_dims")? as usize;
        let sigma2 = c.f64("sigma2")?;
        let block = if method == CovMethod::Uncovered {
            WordCovariance::uncovered(word_id, support)
        } else {
            let mut lower = Vec::with_capacity(tri);
            for _ in 0..tri {
                lower.push(lit::<T>(c.f64("covariance")?));
            }
            WordCovariance {
                word_id,
                support,
                sigma2: Some(lit(sigma2)),
                cov: Some(SymMatrix::from_lower(d, &lower)),
                method,
                dropped_dims: dropped,
                diagnostic: None,
            }
        };
        blocks.push(block);
    }
    if c.pos != bytes.len() {
        return Err(Error::format(c.pos as u64, "trailer", "unexpected trailing bytes"));
    }
    CovarianceStore::from_blocks(d, blocks)
}

pub fn read_covariance<T: Real>(path: &Path) -> Result<CovarianceStore<T>> {
    parse_covariance(&fs::read(path)?)
}

/// Plain-text word list, one word per line; blank lines and `#` comments
/// are ignored.
pub fn read_word_set(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Vocab,
    Cooccurrence,
    Vectors,
    Covariance,
}

/// Reads a file, re-serializes it and compares. `Ok(None)` means
/// byte-identical; `Ok(Some(offset))` is the first differing byte.
pub fn roundtrip_check(path: &Path, format: FileFormat) -> Result<Option<u64>> {
    let original = fs::read(path)?;
    let mut rewritten: Vec<u8> = Vec::with_capacity(original.len());
    match format {
        FileFormat::Vocab => write_vocab_to(&mut rewritten, &parse_vocab(&original)?)?,
        FileFormat::Cooccurrence => write_cooccurrence_to(&mut rewritten, &parse_cooccurrence(&original, None)?)?,
        FileFormat::Vectors => {
            let t: VectorTable<f64> = parse_vectors(&original)?;
            write_vectors_to(&mut rewritten, &t.words, &t.data, t.dim)?
        }
        FileFormat::Covariance => write_covariance_to(&mut rewritten, &parse_covariance::<f64>(&original)?)?,
    }
    let first_diff = original.iter().zip(&rewritten).position(|(a, b)| a != b);
    Ok(match first_diff {
        Some(k) => Some(k as u64),
        None if original.len() != rewritten.len() => Some(original.len().min(rewritten.len()) as u64),
        None => None,
    })
}
