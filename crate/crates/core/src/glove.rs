//! The GloVe model: parameters, exact cost, AdaGrad training and the
//! closed-form weighted least-squares solution for a single center row.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CooccurrenceMatrix, Weighting};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::{all_finite, dot, lit, Real};

/// Center vectors `w_i`, context vectors `v_j` and the two constant terms,
/// each stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel<T> {
    dim: usize,
    center: Vec<T>,
    context: Vec<T>,
    center_bias: Vec<T>,
    context_bias: Vec<T>,
}

impl<T: Real> EmbeddingModel<T> {
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        EmbeddingModel {
            dim,
            center: vec![T::zero(); vocab_size * dim],
            context: vec![T::zero(); vocab_size * dim],
            center_bias: vec![T::zero(); vocab_size],
            context_bias: vec![T::zero(); vocab_size],
        }
    }

    pub fn from_parts(
        dim: usize,
        center: Vec<T>,
        context: Vec<T>,
        center_bias: Vec<T>,
        context_bias: Vec<T>,
    ) -> Result<Self> {
        let v = center_bias.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if center.len() != v * dim || context.len() != v * dim || context_bias.len() != v {
            return Err(Error::DimensionMismatch(format!(
                "center {} / context {} values, {} / {} constants for V={v}, D={dim}",
                center.len(),
                context.len(),
                v,
                context_bias.len()
            )));
        }
        Ok(EmbeddingModel { dim, center, context, center_bias, context_bias })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn vocab_size(&self) -> usize {
        self.center_bias.len()
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[T] {
        &self.center[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn context(&self, j: usize) -> &[T] {
        &self.context[j * self.dim..(j + 1) * self.dim]
    }

    #[inline]
    pub fn center_bias(&self, i: usize) -> T {
        self.center_bias[i]
    }

    #[inline]
    pub fn context_bias(&self, j: usize) -> T {
        self.context_bias[j]
    }

    pub fn center_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.center[i * self.dim..(i + 1) * self.dim]
    }

    pub fn context_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.context[j * self.dim..(j + 1) * self.dim]
    }

    pub fn set_center_bias(&mut self, i: usize, b: T) {
        self.center_bias[i] = b;
    }

    pub fn set_context_bias(&mut self, j: usize, c: T) {
        self.context_bias[j] = c;
    }

    pub fn center_matrix(&self) -> &[T] {
        &self.center
    }

    pub fn context_matrix(&self) -> &[T] {
        &self.context
    }

    pub fn center_biases(&self) -> &[T] {
        &self.center_bias
    }

    pub fn context_biases(&self) -> &[T] {
        &self.context_bias
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.center)
            && all_finite(&self.context)
            && all_finite(&self.center_bias)
            && all_finite(&self.context_bias)
    }

    fn check_against(&self, x: &CooccurrenceMatrix) -> Result<()> {
        if x.vocab_size() != self.vocab_size() {
            return Err(Error::DimensionMismatch(format!(
                "model has V={} but co-occurrence matrix has V={}",
                self.vocab_size(),
                x.vocab_size()
            )));
        }
        Ok(())
    }

    /// `log X_ij − b_i − c_j − w_iᵀ v_j`
    #[inline]
    pub fn residual(&self, i: usize, j: usize, x_ij: f64) -> T {
        lit::<T>(x_ij.ln()) - self.center_bias(i) - self.context_bias(j) - dot(self.center(i), self.context(j))
    }
}

/// Exact weighted least-squares cost over the stored entries, natural log.
pub fn glove_cost<T: Real>(model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<T> {
    glove_cost_with(model, x, &Weighting::default())
}

pub fn glove_cost_with<T: Real>(
    model: &EmbeddingModel<T>,
    x: &CooccurrenceMatrix,
    weighting: &Weighting,
) -> Result<T> {
    model.check_against(x)?;
    let mut cost = T::zero();
    for (i, j, xij) in x.entries() {
        if !(xij > 0.0) {
            return Err(Error::NonPositiveCount { row: i, col: j, value: xij });
        }
        let r = model.residual(i, j, xij);
        cost = cost + lit::<T>(weighting.weight(xij)) * r * r;
    }
    Ok(cost)
}

/// Gradient of the cost with respect to the center vector `w_i`, all other
/// parameters fixed: `−2 Σ_j f(X_ij) r_ij v_j`.
pub fn center_row_gradient<T: Real>(i: usize, model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<Vec<T>> {
    model.check_against(x)?;
    let mut g = vec![T::zero(); model.dim()];
    for (j, xij) in x.row(i) {
        let coef = lit::<T>(-2.0 * weight_of(xij)) * model.residual(i, j, xij);
        for (gk, &vk) in g.iter_mut().zip(model.context(j)) {
            *gk = *gk + coef * vk;
        }
    }
    Ok(g)
}

#[inline]
fn weight_of(x: f64) -> f64 {
    Weighting::default().weight(x)
}

/// Closed-form minimizer of the cost over `w_i` with the context vectors
/// and constants held at the model's values:
/// `w*_i = (V_Kᵀ D_K V_K)⁻¹ V_Kᵀ D_K (log x_i − b_i 1 − c_K)`.
pub fn closed_form_row<T: Real>(i: usize, model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<Vec<T>> {
    model.check_against(x)?;
    if x.support_size(i) == 0 {
        return Err(Error::IsolatedWord(i));
    }
    let d = model.dim();
    let mut normal = SymMatrix::zeros(d);
    let mut rhs = vec![T::zero(); d];
    for (j, xij) in x.row(i) {
        let f = lit::<T>(weight_of(xij));
        let v = model.context(j);
        normal.add_outer(f, v);
        let target = lit::<T>(xij.ln()) - model.center_bias(i) - model.context_bias(j);
        for (r, &vk) in rhs.iter_mut().zip(v) {
            *r = *r + f * target * vk;
        }
    }
    let chol = normal.cholesky().ok_or(Error::RankDeficientRow(i))?;
    Ok(chol.solve(&rhs))
}

/// Replaces every center vector by its closed-form solution. Rows whose
/// normal matrix is singular (or that have no support) are left unchanged;
/// their ids are returned.
pub fn refit_center_rows<T: Real>(model: &mut EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<Vec<usize>> {
    let mut skipped = Vec::new();
    for i in 0..model.vocab_size() {
        match closed_form_row(i, model, x) {
            Ok(w) => model.center_mut(i).copy_from_slice(&w),
            Err(Error::RankDeficientRow(_)) | Err(Error::IsolatedWord(_)) => skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok(skipped)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub seed: u64,
    pub threads: usize,
    pub x_max: f64,
    pub alpha: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { dim: 50, epochs: 80, initial_lr: 0.05, seed: 1, threads: 1, x_max: 100.0, alpha: 0.75 }
    }
}

impl TrainConfig {
    pub fn weighting(&self) -> Weighting {
        Weighting { x_max: self.x_max, alpha: self.alpha }
    }
}

#[derive(Clone, Copy)]
struct Record<T> {
    row: u32,
    col: u32,
    log_x: T,
    weight: T,
}

/// Parameters in the layout of the reference implementation: per word a
/// row of `D` vector entries followed by the constant, for centers and then
/// contexts. Relaxed atomics give lock-free racy updates across workers
/// without undefined behavior.
struct SharedParams {
    stride: usize,
    vocab_size: usize,
    values: Vec<AtomicU64>,
    grad_sq: Vec<AtomicU64>,
}

impl SharedParams {
    #[inline]
    fn load<T: Real>(slot: &AtomicU64) -> T {
        T::from_bits64(slot.load(Ordering::Relaxed))
    }

    #[inline]
    fn store<T: Real>(slot: &AtomicU64, v: T) {
        slot.store(v.to_bits64(), Ordering::Relaxed)
    }

    fn center_offset(&self, i: usize) -> usize {
        i * self.stride
    }

    fn context_offset(&self, j: usize) -> usize {
        (self.vocab_size + j) * self.stride
    }
}

/// Epoch-by-epoch AdaGrad trainer.
///
/// Records are shuffled once with the seeded generator and split into
/// `threads` contiguous ranges, one per worker. With one worker the result is
/// bit-reproducible for a fixed seed.
pub struct Trainer<T> {
    cfg: TrainConfig,
    records: Vec<Record<T>>,
    params: SharedParams,
    epochs_done: usize,
}

impl<T: Real> Trainer<T> {
    pub fn new(x: &CooccurrenceMatrix, cfg: TrainConfig) -> Result<Self> {
        if cfg.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("co-occurrence matrix is empty".into()));
        }
        if !(cfg.initial_lr > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        let weighting = cfg.weighting();
        let mut records = Vec::with_capacity(x.nnz());
        for (i, j, xij) in x.entries() {
            if !(xij > 0.0) {
                return Err(Error::NonPositiveCount { row: i, col: j, value: xij });
            }
            records.push(Record {
                row: i as u32,
                col: j as u32,
                log_x: lit(xij.ln()),
                weight: lit(weighting.weight(xij)),
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let vsize = x.vocab_size();
        let stride = cfg.dim + 1;
        let scale = 1.0 / cfg.dim as f64;
        let values = (0..2 * vsize * stride)
            .map(|_| AtomicU64::new(lit::<T>((rng.random::<f64>() - 0.5) * scale).to_bits64()))
            .collect();
        let grad_sq = (0..2 * vsize * stride).map(|_| AtomicU64::new(T::one().to_bits64())).collect();
        records.shuffle(&mut rng);

        Ok(Trainer {
            cfg,
            records,
            params: SharedParams { stride, vocab_size: vsize, values, grad_sq },
            epochs_done: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    /// Runs one pass over the records; returns the cost accumulated on the
    /// fly during the pass.
    pub fn run_epoch(&mut self) -> Result<T> {
        let threads = self.cfg.threads.max(1);
        let lr = lit::<T>(self.cfg.initial_lr);
        let dim = self.cfg.dim;
        let params = &self.params;
        let result = if threads == 1 || self.records.len() < threads {
            sgd_pass(params, &self.records, dim, lr)
        } else {
            let chunk = self.records.len().div_ceil(threads);
            std::thread::scope(|s| {
                let handles: Vec<_> = self
                    .records
                    .chunks(chunk)
                    .map(|part| s.spawn(move || sgd_pass(params, part, dim, lr)))
                    .collect();
                let mut total = T::zero();
                for h in handles {
                    total = total + h.join().expect("training worker panicked")?;
                }
                Ok(total)
            })
        };
        self.epochs_done += 1;
        let cost = result?;
        log::debug!("epoch {}: cost {}", self.epochs_done, cost);
        Ok(cost)
    }

    /// Snapshot of the current parameters.
    pub fn model(&self) -> EmbeddingModel<T> {
        let p = &self.params;
        let (v, d) = (p.vocab_size, self.cfg.dim);
        let mut m = EmbeddingModel::zeros(v, d);
        for i in 0..v {
            let c = p.center_offset(i);
            let o = p.context_offset(i);
            for k in 0..d {
                m.center[i * d + k] = SharedParams::load(&p.values[c + k]);
                m.context[i * d + k] = SharedParams::load(&p.values[o + k]);
            }
            m.center_bias[i] = SharedParams::load(&p.values[c + d]);
            m.context_bias[i] = SharedParams::load(&p.values[o + d]);
        }
        m
    }
}

fn sgd_pass<T: Real>(p: &SharedParams, records: &[Record<T>], dim: usize, lr: T) -> Result<T> {
    let mut cost = T::zero();
    let mut upd_w = vec![T::zero(); dim];
    let mut upd_v = vec![T::zero(); dim];
    for rec in records {
        let l1 = p.center_offset(rec.row as usize);
        let l2 = p.context_offset(rec.col as usize);
        let w = &p.values[l1..l1 + dim + 1];
        let v = &p.values[l2..l2 + dim + 1];
        let gw = &p.grad_sq[l1..l1 + dim + 1];
        let gv = &p.grad_sq[l2..l2 + dim + 1];

        let mut pred = T::zero();
        for k in 0..dim {
            pred = pred + SharedParams::load::<T>(&w[k]) * SharedParams::load::<T>(&v[k]);
        }
        let diff = pred + SharedParams::load::<T>(&w[dim]) + SharedParams::load::<T>(&v[dim]) - rec.log_x;
        let mut fdiff = rec.weight * diff;
        cost = cost + fdiff * diff;
        fdiff = fdiff * lr;

        for k in 0..dim {
            let wk: T = SharedParams::load(&w[k]);
            let vk: T = SharedParams::load(&v[k]);
            let t1 = fdiff * vk;
            let t2 = fdiff * wk;
            let gwk: T = SharedParams::load(&gw[k]);
            let gvk: T = SharedParams::load(&gv[k]);
            upd_w[k] = t1 / gwk.sqrt();
            upd_v[k] = t2 / gvk.sqrt();
            SharedParams::store(&gw[k], gwk + t1 * t1);
            SharedParams::store(&gv[k], gvk + t2 * t2);
        }
        let gwb: T = SharedParams::load(&gw[dim]);
        let gvb: T = SharedParams::load(&gv[dim]);
        let upd_b = fdiff / gwb.sqrt();
        let upd_c = fdiff / gvb.sqrt();
        if !(all_finite(&upd_w) && all_finite(&upd_v) && upd_b.is_finite() && upd_c.is_finite()) {
            return Err(Error::NonFinite(format!(
                "AdaGrad update for pair ({}, {}) is not finite (residual {diff})",
                rec.row, rec.col
            )));
        }
        for k in 0..dim {
            let wk: T = SharedParams::load(&w[k]);
            let vk: T = SharedParams::load(&v[k]);
            SharedParams::store(&w[k], wk - upd_w[k]);
            SharedParams::store(&v[k], vk - upd_v[k]);
        }
        SharedParams::store(&w[dim], SharedParams::load::<T>(&w[dim]) - upd_b);
        SharedParams::store(&v[dim], SharedParams::load::<T>(&v[dim]) - upd_c);
        let f2 = fdiff * fdiff;
        SharedParams::store(&gw[dim], gwb + f2);
        SharedParams::store(&gv[dim], gvb + f2);
    }
    Ok(cost)
}

/// Trains a model for `cfg.epochs` passes. `epochs = 0` returns the
/// initialization.
pub fn train<T: Real>(x: &CooccurrenceMatrix, cfg: &TrainConfig) -> Result<EmbeddingModel<T>> {
    let mut trainer = Trainer::new(x, cfg.clone())?;
    for _ in 0..cfg.epochs {
        trainer.run_epoch()?;
    }
    Ok(trainer.model())
}
