#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use glovev::corpus::tokenize_records;
use glovev::propagate::Statistic;
use glovev::{count_cooccurrences, CooccurrenceMatrix, EmbeddingModel, TrainConfig, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn sample_corpus() -> PathBuf {
    data_dir().join("sample_corpus.txt")
}

pub fn normal_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Random sparse positive matrix where every row has at least `min_support`
/// entries, and a random model with normal parameters.
pub fn random_instance(
    rng: &mut impl Rng,
    v: usize,
    d: usize,
    min_support: usize,
) -> (CooccurrenceMatrix, EmbeddingModel<f64>) {
    let mut triplets = Vec::new();
    for i in 0..v {
        let mut cols: Vec<usize> = (0..v).collect();
        for k in (1..cols.len()).rev() {
            cols.swap(k, rng.random_range(0..=k));
        }
        let extra = rng.random_range(0..=(v - min_support));
        for &j in &cols[..min_support + extra] {
            // spans both sides of x_max so weights vary
            let x = 10f64.powf(rng.random_range(-1.0..3.0));
            triplets.push((i, j, x));
        }
    }
    let x = CooccurrenceMatrix::from_triplets(v, triplets).unwrap();
    let model = EmbeddingModel::from_parts(
        d,
        normal_vec(rng, v * d),
        normal_vec(rng, v * d),
        normal_vec(rng, v),
        normal_vec(rng, v),
    )
    .unwrap();
    (x, model)
}

/// `X[i,j]` by looking at every ordered pair of positions in a record.
pub fn brute_force_counts(
    records: &[Vec<String>],
    vocab: &Vocabulary,
    window: usize,
    symmetric: bool,
) -> HashMap<(usize, usize), f64> {
    let mut out: HashMap<(usize, usize), f64> = HashMap::new();
    for rec in records {
        for (p, center) in rec.iter().enumerate() {
            for (q, context) in rec.iter().enumerate() {
                let dist = p.abs_diff(q);
                if dist == 0 || dist > window || (!symmetric && q > p) {
                    continue;
                }
                if let (Some(i), Some(j)) = (vocab.id(center), vocab.id(context)) {
                    *out.entry((i, j)).or_insert(0.0) += 1.0 / dist as f64;
                }
            }
        }
    }
    out
}

/// Central finite-difference gradient of `stat` with respect to every
/// coordinate of every vector.
pub fn finite_difference(stat: &dyn Statistic<f64>, vectors: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    let mut work: Vec<Vec<f64>> = vectors.to_vec();
    let mut grads = Vec::with_capacity(vectors.len());
    for w in 0..vectors.len() {
        let mut g = vec![0.0; vectors[w].len()];
        for k in 0..vectors[w].len() {
            let x0 = work[w][k];
            work[w][k] = x0 + h;
            let up = eval(stat, &work);
            work[w][k] = x0 - h;
            let down = eval(stat, &work);
            work[w][k] = x0;
            g[k] = (up - down) / (2.0 * h);
        }
        grads.push(g);
    }
    grads
}

pub fn eval(stat: &dyn Statistic<f64>, vectors: &[Vec<f64>]) -> f64 {
    let views: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    stat.evaluate(&views).unwrap()
}

pub fn analytic(stat: &dyn Statistic<f64>, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let views: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    stat.gradient(&views).expect("has gradient").unwrap()
}

/// `‖a − b‖ / max(‖b‖, floor)` over the concatenated gradients.
pub fn rel_error(a: &[Vec<f64>], b: &[Vec<f64>], floor: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    num.sqrt() / den.sqrt().max(floor)
}

/// Sample-corpus vocabulary and co-occurrences with the default pipeline
/// settings (min count 5, window 8, symmetric).
pub fn sample_counts() -> (Vocabulary, CooccurrenceMatrix) {
    let text = std::fs::read_to_string(sample_corpus()).unwrap();
    let records = tokenize_records(&text, false);
    let vocab = Vocabulary::build(&records, 5);
    let x = count_cooccurrences(&records, &vocab, 8, true);
    (vocab, x)
}

pub fn train_cfg(dim: usize, epochs: usize) -> TrainConfig {
    TrainConfig { dim, epochs, ..TrainConfig::default() }
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut r = vec![0.0; xs.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        while end + 1 < idx.len() && xs[idx[end + 1]] == xs[idx[k]] {
            end += 1;
        }
        let avg = (k + end) as f64 / 2.0;
        for &i in &idx[k..=end] {
            r[i] = avg;
        }
        k = end + 1;
    }
    r
}
