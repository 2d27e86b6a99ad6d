//! Propagation of block-diagonal embedding covariance to scalar statistics.
//!
//! A [`Statistic`] is a function of the center vectors of a fixed list of
//! words. Its variance is obtained either by the delta method
//! (`Σ_i g_iᵀ Σ_i g_i` over the participating words, which needs an analytic
//! gradient) or by Monte-Carlo draws from the per-word normal distributions.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::glove::EmbeddingModel;
use crate::scalar::{dot, lit, norm, Real};
use crate::variance::CovarianceStore;

/// Default number of Monte-Carlo draws.
pub const DEFAULT_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    Delta,
    MonteCarlo,
}

impl PropagationMethod {
    pub fn name(self) -> &'static str {
        match self {
            PropagationMethod::Delta => "delta",
            PropagationMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// How to propagate: the delta method, or Monte Carlo with a draw count and
/// seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    Delta,
    MonteCarlo { draws: usize, seed: u64 },
}

impl Propagation {
    pub fn method(self) -> PropagationMethod {
        match self {
            Propagation::Delta => PropagationMethod::Delta,
            Propagation::MonteCarlo { .. } => PropagationMethod::MonteCarlo,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertainStatistic<T> {
    pub value: T,
    pub variance: T,
    pub method: PropagationMethod,
    /// Number of draws; 0 for the delta method.
    pub draws: usize,
    pub words_used: Vec<usize>,
}

impl<T: Real> UncertainStatistic<T> {
    pub fn std_error(&self) -> T {
        self.variance.max(T::zero()).sqrt()
    }
}

/// A differentiable (or at least evaluable) function of the center vectors
/// of [`Statistic::word_ids`]. Vectors are passed in that order.
pub trait Statistic<T: Real>: Send + Sync {
    /// Distinct participating word ids.
    fn word_ids(&self) -> &[usize];

    fn evaluate(&self, vectors: &[&[T]]) -> Result<T>;

    /// Per-word gradients in `word_ids` order, when an analytic form exists.
    fn gradient(&self, _vectors: &[&[T]]) -> Option<Result<Vec<Vec<T>>>> {
        None
    }
}

/// Assigns each distinct word id a slot, in order of first appearance.
#[derive(Clone, Debug, Default)]
struct Slots {
    ids: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl Slots {
    fn slot(&mut self, id: usize) -> usize {
        *self.index.entry(id).or_insert_with(|| {
            self.ids.push(id);
            self.ids.len() - 1
        })
    }

    fn slots(&mut self, ids: &[usize]) -> Vec<usize> {
        ids.iter().map(|&i| self.slot(i)).collect()
    }
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

fn zeros<T: Real>(n: usize, d: usize) -> Vec<Vec<T>> {
    vec![vec![T::zero(); d]; n]
}

pub fn cosine<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    let (na, nb) = (norm(a), norm(b));
    if na == T::zero() || nb == T::zero() {
        return Err(Error::ZeroVector("cosine of a zero vector".into()));
    }
    Ok(dot(a, b) / (na * nb))
}

/// `∂cos/∂a = b/(‖a‖‖b‖) − cos(a,b)·a/‖a‖²`, and symmetrically for `b`.
pub fn cosine_gradient<T: Real>(a: &[T], b: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let (na, nb) = (norm(a), norm(b));
    if na == T::zero() || nb == T::zero() {
        return Err(Error::ZeroVector("cosine of a zero vector".into()));
    }
    let c = dot(a, b) / (na * nb);
    let inv = T::one() / (na * nb);
    let ga = a.iter().zip(b).map(|(&ai, &bi)| bi * inv - c * ai / (na * na)).collect();
    let gb = a.iter().zip(b).map(|(&ai, &bi)| ai * inv - c * bi / (nb * nb)).collect();
    Ok((ga, gb))
}

/// Cosine similarity between two words.
#[derive(Clone, Debug)]
pub struct CosineSimilarity {
    slots: Slots,
    pair: [usize; 2],
}

impl CosineSimilarity {
    pub fn new(a: usize, b: usize) -> Self {
        let mut slots = Slots::default();
        let pair = [slots.slot(a), slots.slot(b)];
        CosineSimilarity { slots, pair }
    }
}

impl<T: Real> Statistic<T> for CosineSimilarity {
    fn word_ids(&self) -> &[usize] {
        &self.slots.ids
    }

    fn evaluate(&self, v: &[&[T]]) -> Result<T> {
        cosine(v[self.pair[0]], v[self.pair[1]])
    }

    fn gradient(&self, v: &[&[T]]) -> Option<Result<Vec<Vec<T>>>> {
        Some(cosine_gradient(v[self.pair[0]], v[self.pair[1]]).map(|(ga, gb)| {
            let mut g = zeros(self.slots.ids.len(), ga.len());
            axpy(T::one(), &ga, &mut g[self.pair[0]]);
            axpy(T::one(), &gb, &mut g[self.pair[1]]);
            g
        }))
    }
}

/// Mean cosine of attribute words to the normalized mean of group A minus
/// the same for group B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GargQuery {
    pub attributes: Vec<usize>,
    pub group_a: Vec<usize>,
    pub group_b: Vec<usize>,
}

/// Standardized difference in association between two target sets and two
/// attribute sets, `s(t) = mean_a cos(t, a) − mean_b cos(t, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeatQuery {
    pub targets_x: Vec<usize>,
    pub targets_y: Vec<usize>,
    pub attributes_a: Vec<usize>,
    pub attributes_b: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiasKind {
    Garg,
    Weat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BiasQuery {
    Garg(GargQuery),
    Weat(WeatQuery),
}

impl BiasQuery {
    pub fn kind(&self) -> BiasKind {
        match self {
            BiasQuery::Garg(_) => BiasKind::Garg,
            BiasQuery::Weat(_) => BiasKind::Weat,
        }
    }

    pub fn statistic<T: Real>(&self) -> Result<Box<dyn Statistic<T>>> {
        Ok(match self {
            BiasQuery::Garg(q) => Box::new(GargBias::new(q)?),
            BiasQuery::Weat(q) => Box::new(WeatEffect::new(q)?),
        })
    }
}

#[derive(Clone, Debug)]
pub struct GargBias {
    slots: Slots,
    attributes: Vec<usize>,
    group_a: Vec<usize>,
    group_b: Vec<usize>,
}

impl GargBias {
    pub fn new(q: &GargQuery) -> Result<Self> {
        if q.attributes.is_empty() || q.group_a.is_empty() || q.group_b.is_empty() {
            return Err(Error::InvalidArgument("bias query word sets must be non-empty".into()));
        }
        let mut slots = Slots::default();
        let attributes = slots.slots(&q.attributes);
        let group_a = slots.slots(&q.group_a);
        let group_b = slots.slots(&q.group_b);
        Ok(GargBias { slots, attributes, group_a, group_b })
    }
}

/// Mean of the unit-normalized vectors.
fn normalized_mean<T: Real>(v: &[&[T]], members: &[usize]) -> Result<Vec<T>> {
    let d = v[members[0]].len();
    let mut m = vec![T::zero(); d];
    let scale = T::one() / lit::<T>(members.len() as f64);
    for &k in members {
        let n = norm(v[k]);
        if n == T::zero() {
            return Err(Error::ZeroVector("group member has a zero vector".into()));
        }
        axpy(scale / n, v[k], &mut m);
    }
    Ok(m)
}

impl<T: Real> Statistic<T> for GargBias {
    fn word_ids(&self) -> &[usize] {
        &self.slots.ids
    }

    fn evaluate(&self, v: &[&[T]]) -> Result<T> {
        let ma = normalized_mean(v, &self.group_a)?;
        let mb = normalized_mean(v, &self.group_b)?;
        let mut total = T::zero();
        for &k in &self.attributes {
            total = total + cosine(v[k], &ma)? - cosine(v[k], &mb)?;
        }
        Ok(total / lit::<T>(self.attributes.len() as f64))
    }

    fn gradient(&self, v: &[&[T]]) -> Option<Result<Vec<Vec<T>>>> {
        Some((|| {
            let d = v[0].len();
            let ma = normalized_mean(v, &self.group_a)?;
            let mb = normalized_mean(v, &self.group_b)?;
            let inv_k = T::one() / lit::<T>(self.attributes.len() as f64);
            let mut g = zeros(self.slots.ids.len(), d);
            // gradients with respect to the two group means
            let mut g_ma = vec![T::zero(); d];
            let mut g_mb = vec![T::zero(); d];
            for &k in &self.attributes {
                let (gv_a, gm_a) = cosine_gradient(v[k], &ma)?;
                let (gv_b, gm_b) = cosine_gradient(v[k], &mb)?;
                axpy(inv_k, &gv_a, &mut g[k]);
                axpy(-inv_k, &gv_b, &mut g[k]);
                axpy(inv_k, &gm_a, &mut g_ma);
                axpy(-inv_k, &gm_b, &mut g_mb);
            }
            // M = (1/m) Σ a/‖a‖, so ∂M/∂a = (I − ããᵀ)/(m‖a‖)
            for (members, g_m) in [(&self.group_a, &g_ma), (&self.group_b, &g_mb)] {
                let inv_m = T::one() / lit::<T>(members.len() as f64);
                for &k in members {
                    let n = norm(v[k]);
                    let proj = dot(v[k], g_m) / (n * n);
                    for c in 0..d {
                        g[k][c] = g[k][c] + inv_m * (g_m[c] - proj * v[k][c]) / n;
                    }
                }
            }
            Ok(g)
        })())
    }
}

#[derive(Clone, Debug)]
pub struct WeatEffect {
    slots: Slots,
    targets_x: Vec<usize>,
    targets_y: Vec<usize>,
    attributes_a: Vec<usize>,
    attributes_b: Vec<usize>,
}

impl WeatEffect {
    pub fn new(q: &WeatQuery) -> Result<Self> {
        if q.targets_x.len() != q.targets_y.len() || q.targets_x.len() < 2 {
            return Err(Error::InvalidArgument("WEAT needs two target sets of equal size >= 2".into()));
        }
        if q.attributes_a.is_empty() || q.attributes_b.is_empty() {
            return Err(Error::InvalidArgument("WEAT attribute sets must be non-empty".into()));
        }
        let mut slots = Slots::default();
        let targets_x = slots.slots(&q.targets_x);
        let targets_y = slots.slots(&q.targets_y);
        let attributes_a = slots.slots(&q.attributes_a);
        let attributes_b = slots.slots(&q.attributes_b);
        Ok(WeatEffect { slots, targets_x, targets_y, attributes_a, attributes_b })
    }

    fn association<T: Real>(&self, v: &[&[T]], t: usize) -> Result<T> {
        let mean_cos = |set: &[usize]| -> Result<T> {
            let mut s = T::zero();
            for &a in set {
                s = s + cosine(v[t], v[a])?;
            }
            Ok(s / lit::<T>(set.len() as f64))
        };
        Ok(mean_cos(&self.attributes_a)? - mean_cos(&self.attributes_b)?)
    }

    /// Scores of X then Y, the effect numerator H, the mean E and the
    /// sample standard deviation G.
    fn parts<T: Real>(&self, v: &[&[T]]) -> Result<(Vec<T>, T, T, T)> {
        let scores = self
            .targets_x
            .iter()
            .chain(&self.targets_y)
            .map(|&t| self.association(v, t))
            .collect::<Result<Vec<T>>>()?;
        let k = self.targets_x.len();
        let kt = lit::<T>(k as f64);
        let mean_x = scores[..k].iter().copied().sum::<T>() / kt;
        let mean_y = scores[k..].iter().copied().sum::<T>() / kt;
        let n = lit::<T>(scores.len() as f64);
        let e = scores.iter().copied().sum::<T>() / n;
        let ss: T = scores.iter().map(|&s| (s - e) * (s - e)).sum();
        let g = (ss / (n - T::one())).sqrt();
        if !(g > T::epsilon() * lit(16.0) * (T::one() + e.abs())) {
            return Err(Error::DegenerateEffectSize);
        }
        Ok((scores, mean_x - mean_y, e, g))
    }
}

impl<T: Real> Statistic<T> for WeatEffect {
    fn word_ids(&self) -> &[usize] {
        &self.slots.ids
    }

    fn evaluate(&self, v: &[&[T]]) -> Result<T> {
        let (_, h, _, g) = self.parts(v)?;
        Ok(h / g)
    }

    fn gradient(&self, v: &[&[T]]) -> Option<Result<Vec<Vec<T>>>> {
        Some((|| {
            let d = v[0].len();
            let (scores, h, e, g) = self.parts(v)?;
            let k = lit::<T>(self.targets_x.len() as f64);
            let n1 = lit::<T>((scores.len() - 1) as f64);
            let inv_a = T::one() / lit::<T>(self.attributes_a.len() as f64);
            let inv_b = T::one() / lit::<T>(self.attributes_b.len() as f64);
            let mut grad = zeros(self.slots.ids.len(), d);
            let targets = self.targets_x.iter().map(|&t| (t, T::one())).chain(self.targets_y.iter().map(|&t| (t, -T::one())));
            for ((t, sign), &s) in targets.zip(&scores) {
                // ∂(H/G)/∂s_t = ±1/(kG) − H (s_t − E) / ((n−1) G³)
                let alpha = sign / (k * g) - h * (s - e) / (n1 * g * g * g);
                for (set, w) in [(&self.attributes_a, inv_a), (&self.attributes_b, -inv_b)] {
                    for &a in set.iter() {
                        let (gt, ga) = cosine_gradient(v[t], v[a])?;
                        axpy(alpha * w, &gt, &mut grad[t]);
                        axpy(alpha * w, &ga, &mut grad[a]);
                    }
                }
            }
            Ok(grad)
        })())
    }
}

/// `a − b`, with gradients of shared words combined.
pub struct Difference<'a, T> {
    slots: Slots,
    a: &'a dyn Statistic<T>,
    b: &'a dyn Statistic<T>,
    a_slots: Vec<usize>,
    b_slots: Vec<usize>,
}

impl<'a, T: Real> Difference<'a, T> {
    pub fn new(a: &'a dyn Statistic<T>, b: &'a dyn Statistic<T>) -> Self {
        let mut slots = Slots::default();
        let a_slots = slots.slots(a.word_ids());
        let b_slots = slots.slots(b.word_ids());
        Difference { slots, a, b, a_slots, b_slots }
    }

    fn split<'v>(&self, v: &[&'v [T]]) -> (Vec<&'v [T]>, Vec<&'v [T]>) {
        (self.a_slots.iter().map(|&s| v[s]).collect(), self.b_slots.iter().map(|&s| v[s]).collect())
    }
}

impl<T: Real> Statistic<T> for Difference<'_, T> {
    fn word_ids(&self) -> &[usize] {
        &self.slots.ids
    }

    fn evaluate(&self, v: &[&[T]]) -> Result<T> {
        let (va, vb) = self.split(v);
        Ok(self.a.evaluate(&va)? - self.b.evaluate(&vb)?)
    }

    fn gradient(&self, v: &[&[T]]) -> Option<Result<Vec<Vec<T>>>> {
        let (va, vb) = self.split(v);
        let ga = self.a.gradient(&va)?;
        let gb = self.b.gradient(&vb)?;
        Some((|| {
            let (ga, gb) = (ga?, gb?);
            let mut g = zeros(self.slots.ids.len(), v.first().map_or(0, |x| x.len()));
            for (&s, gi) in self.a_slots.iter().zip(&ga) {
                axpy(T::one(), gi, &mut g[s]);
            }
            for (&s, gi) in self.b_slots.iter().zip(&gb) {
                axpy(-T::one(), gi, &mut g[s]);
            }
            Ok(g)
        })())
    }
}

/// Arbitrary statistic given as a closure; Monte-Carlo propagation only.
pub struct FnStatistic<F> {
    ids: Vec<usize>,
    f: F,
}

impl<F> FnStatistic<F> {
    pub fn new(ids: Vec<usize>, f: F) -> Self {
        FnStatistic { ids, f }
    }
}

impl<T: Real, F> Statistic<T> for FnStatistic<F>
where
    F: Fn(&[&[T]]) -> Result<T> + Send + Sync,
{
    fn word_ids(&self) -> &[usize] {
        &self.ids
    }

    fn evaluate(&self, v: &[&[T]]) -> Result<T> {
        (self.f)(v)
    }
}

fn check_covered<T: Real>(ids: &[usize], store: &CovarianceStore<T>, model: &EmbeddingModel<T>) -> Result<()> {
    if store.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!("store D={} but model D={}", store.dim(), model.dim())));
    }
    let missing: Vec<String> = ids.iter().filter(|&&i| !store.is_covered(i)).map(|i| format!("#{i}")).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Uncovered(missing.join(", ")))
    }
}

fn point_vectors<'m, T: Real>(ids: &[usize], model: &'m EmbeddingModel<T>) -> Result<Vec<&'m [T]>> {
    ids.iter()
        .map(|&i| {
            if i < model.vocab_size() {
                Ok(model.center(i))
            } else {
                Err(Error::InvalidArgument(format!("word id {i} outside vocabulary")))
            }
        })
        .collect()
}

/// Delta-method variance `Σ_i g_iᵀ Σ_i g_i` at the point estimates.
pub fn delta_variance<T: Real>(
    spec: &dyn Statistic<T>,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
) -> Result<UncertainStatistic<T>> {
    let ids = spec.word_ids();
    let vectors = point_vectors(ids, model)?;
    check_covered(ids, store, model)?;
    let value = spec.evaluate(&vectors)?;
    let grads = spec
        .gradient(&vectors)
        .ok_or_else(|| Error::InvalidArgument("statistic has no analytic gradient; use Monte Carlo".into()))??;
    let mut variance = T::zero();
    for (&i, g) in ids.iter().zip(&grads) {
        if g.iter().all(|x| *x == T::zero()) {
            continue;
        }
        variance = variance + store.cov(i)?.quad_form(g);
    }
    Ok(UncertainStatistic {
        value,
        variance: variance.max(T::zero()),
        method: PropagationMethod::Delta,
        draws: 0,
        words_used: ids.to_vec(),
    })
}

/// Point estimate and square-root covariance factor for one word.
struct WordDraw<T> {
    mean: Vec<T>,
    factor: Vec<T>,
}

impl<T: Real> WordDraw<T> {
    fn new(i: usize, store: &CovarianceStore<T>, model: &EmbeddingModel<T>) -> Result<Self> {
        let cov = store.cov(i)?;
        Ok(WordDraw { mean: model.center(i).to_vec(), factor: cov.sym_eigen().sqrt_factor() })
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [T]) {
        let d = self.mean.len();
        let z: Vec<T> = (0..d).map(|_| lit::<T>(StandardNormal.sample(rng))).collect();
        for r in 0..d {
            out[r] = self.mean[r] + dot(&self.factor[r * d..(r + 1) * d], &z);
        }
    }
}

fn draw_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw `w_i + L z` with `L Lᵀ = Σ_i` and `z` standard normal.
pub fn sample_embedding<T: Real>(
    i: usize,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    seed: u64,
) -> Result<Vec<T>> {
    check_covered(&[i], store, model)?;
    let w = WordDraw::new(i, store, model)?;
    let mut out = vec![T::zero(); model.dim()];
    w.draw(&mut draw_rng(seed, 0), &mut out);
    Ok(out)
}

/// `n` draws of one word; draw `k` uses substream `k`.
pub fn sample_embeddings<T: Real>(
    i: usize,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    check_covered(&[i], store, model)?;
    let w = WordDraw::new(i, store, model)?;
    Ok((0..n)
        .map(|k| {
            let mut out = vec![T::zero(); model.dim()];
            w.draw(&mut draw_rng(seed, k as u64), &mut out);
            out
        })
        .collect())
}

/// Monte-Carlo variance: every participating word is drawn independently,
/// the statistic re-evaluated, and the sample variance of the draws
/// reported. The value is the point estimate at the fitted vectors.
pub fn mc_propagate<T: Real>(
    spec: &dyn Statistic<T>,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    n_draws: usize,
    seed: u64,
) -> Result<UncertainStatistic<T>> {
    if n_draws < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 2 draws".into()));
    }
    let ids = spec.word_ids();
    let vectors = point_vectors(ids, model)?;
    check_covered(ids, store, model)?;
    let value = spec.evaluate(&vectors)?;
    let words = ids.iter().map(|&i| WordDraw::new(i, store, model)).collect::<Result<Vec<_>>>()?;
    let d = model.dim();

    let samples = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = draw_rng(seed, k as u64);
            let mut buf = vec![T::zero(); d * words.len()];
            for (w, out) in words.iter().zip(buf.chunks_mut(d)) {
                w.draw(&mut rng, out);
            }
            let views: Vec<&[T]> = buf.chunks(d).collect();
            spec.evaluate(&views)
        })
        .collect::<Result<Vec<T>>>()?;

    // shifted by the first draw: exact zero for constant samples
    let n = lit::<T>(n_draws as f64);
    let shift = samples[0];
    let sum: T = samples.iter().map(|&s| s - shift).sum();
    let ss: T = samples.iter().map(|&s| (s - shift) * (s - shift)).sum();
    let variance = ((ss - sum * sum / n) / (n - T::one())).max(T::zero());
    Ok(UncertainStatistic {
        value,
        variance,
        method: PropagationMethod::MonteCarlo,
        draws: n_draws,
        words_used: ids.to_vec(),
    })
}

/// Dispatches on `how`.
pub fn propagate<T: Real>(
    spec: &dyn Statistic<T>,
    store: &CovarianceStore<T>,
    model: &EmbeddingModel<T>,
    how: Propagation,
) -> Result<UncertainStatistic<T>> {
    match how {
        Propagation::Delta => delta_variance(spec, store, model),
        Propagation::MonteCarlo { draws, seed } => mc_propagate(spec, store, model, draws, seed),
    }
}
