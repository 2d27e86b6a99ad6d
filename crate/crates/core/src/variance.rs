//! Per-word reconstruction-error covariance of the center vectors.
//!
//! Conditional on the context vectors and constants, each center row is a
//! weighted least-squares estimate, so its covariance is
//! `Σ_i = σ̂²_i H_i⁻¹` with `H_i = Σ_{j∈K} f(X_ij) v_j v_jᵀ` and the plug-in
//! residual variance `σ̂²_i` on `|K| − D` degrees of freedom. Blocks for
//! different words are independent.

use rayon::prelude::*;

use crate::corpus::{weight_f, CooccurrenceMatrix};
use crate::error::{Error, Result};
use crate::glove::EmbeddingModel;
use crate::linalg::{condition_number, SymMatrix};
use crate::scalar::{all_finite, lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CovMethod {
    ExactInverse,
    PseudoInverse,
    Uncovered,
}

impl CovMethod {
    pub fn code(self) -> u8 {
        match self {
            CovMethod::ExactInverse => 0,
            CovMethod::PseudoInverse => 1,
            CovMethod::Uncovered => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CovMethod::ExactInverse),
            1 => Some(CovMethod::PseudoInverse),
            2 => Some(CovMethod::Uncovered),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CovMethod::ExactInverse => "exact_inverse",
            CovMethod::PseudoInverse => "pseudo_inverse",
            CovMethod::Uncovered => "uncovered",
        }
    }
}

/// When to trust a direct inverse of the Hessian block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CondPolicy {
    /// The exact inverse is used iff `cond₂(H) · ε < max_inverse_error`,
    /// with `ε` the machine epsilon of the working precision.
    pub max_inverse_error: f64,
    /// Singular values at or below this fraction of the largest are zeroed
    /// in the pseudo-inverse.
    pub pinv_rel_cutoff: f64,
}

impl Default for CondPolicy {
    fn default() -> Self {
        CondPolicy { max_inverse_error: 1e-10, pinv_rel_cutoff: 1e-3 }
    }
}

impl CondPolicy {
    pub fn accepts<T: Real>(&self, condition_number: T) -> bool {
        let c = crate::scalar::to_f64(condition_number);
        c.is_finite() && c * crate::scalar::to_f64(T::epsilon()) < self.max_inverse_error
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordCovariance<T> {
    pub word_id: usize,
    pub support: usize,
    pub sigma2: Option<T>,
    pub cov: Option<SymMatrix<T>>,
    pub method: CovMethod,
    pub dropped_dims: usize,
    /// Why a word with enough support still ended up uncovered.
    pub diagnostic: Option<String>,
}

impl<T: Real> WordCovariance<T> {
    pub fn uncovered(word_id: usize, support: usize) -> Self {
        WordCovariance {
            word_id,
            support,
            sigma2: None,
            cov: None,
            method: CovMethod::Uncovered,
            dropped_dims: 0,
            diagnostic: None,
        }
    }

    pub fn is_covered(&self) -> bool {
        self.method != CovMethod::Uncovered
    }
}

fn check_dims<T: Real>(model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<()> {
    if model.vocab_size() != x.vocab_size() {
        return Err(Error::DimensionMismatch(format!(
            "model has V={} but co-occurrence matrix has V={}",
            model.vocab_size(),
            x.vocab_size()
        )));
    }
    Ok(())
}

/// `H_i = Σ_{j∈K} f(X_ij) v_j v_jᵀ`
pub fn hessian_block<T: Real>(i: usize, model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<SymMatrix<T>> {
    check_dims(model, x)?;
    if x.support_size(i) == 0 {
        return Err(Error::IsolatedWord(i));
    }
    let mut h = SymMatrix::zeros(model.dim());
    for (j, xij) in x.row(i) {
        h.add_outer(lit(weight_f(xij)), model.context(j));
    }
    Ok(h)
}

/// Plug-in residual variance `1/(|K|−D) Σ_j f(X_ij)(log X_ij − b_i − c_j − w_iᵀv_j)²`.
pub fn sigma2_hat<T: Real>(i: usize, model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> Result<T> {
    check_dims(model, x)?;
    let support = x.support_size(i);
    let dim = model.dim();
    if support <= dim {
        return Err(Error::InsufficientSupport { word: i, support, dim });
    }
    let sum: T = x
        .row(i)
        .map(|(j, xij)| {
            let r = model.residual(i, j, xij);
            lit::<T>(weight_f(xij)) * r * r
        })
        .sum();
    Ok(sum / lit::<T>((support - dim) as f64))
}

fn row_is_finite<T: Real>(i: usize, model: &EmbeddingModel<T>, x: &CooccurrenceMatrix) -> bool {
    all_finite(model.center(i))
        && model.center_bias(i).is_finite()
        && x.row_support(i).iter().all(|&j| {
            let j = j as usize;
            all_finite(model.context(j)) && model.context_bias(j).is_finite()
        })
}

/// Covariance block for one word.
pub fn covariance_block<T: Real>(
    i: usize,
    model: &EmbeddingModel<T>,
    x: &CooccurrenceMatrix,
    policy: &CondPolicy,
) -> Result<WordCovariance<T>> {
    check_dims(model, x)?;
    let support = x.support_size(i);
    let dim = model.dim();
    if support <= dim {
        return Ok(WordCovariance::uncovered(i, support));
    }
    if !row_is_finite(i, model, x) {
        return Err(Error::NonFinite(format!("parameters involved in word {i} are not finite")));
    }
    let h = hessian_block(i, model, x)?;
    let sigma2 = sigma2_hat(i, model, x)?;

    let mut exact = None;
    if policy.accepts(condition_number(&h.sym_eigenvalues())) {
        exact = h.cholesky().map(|c| c.inverse());
    }
    let (inv, method, dropped) = match exact {
        Some(inv) => (inv, CovMethod::ExactInverse, 0),
        None => {
            let (pinv, dropped) = h.sym_eigen().pseudo_inverse(lit(policy.pinv_rel_cutoff));
            (pinv, CovMethod::PseudoInverse, dropped.max(1))
        }
    };
    let cov = inv.scaled(sigma2);
    if !cov.is_finite() {
        return Err(Error::NonFinite(format!("covariance of word {i} is not finite")));
    }
    Ok(WordCovariance {
        word_id: i,
        support,
        sigma2: Some(sigma2),
        cov: Some(cov),
        method,
        dropped_dims: dropped,
        diagnostic: None,
    })
}

/// Covariance blocks for the whole vocabulary, indexed by word id.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceStore<T> {
    dim: usize,
    blocks: Vec<WordCovariance<T>>,
}

impl<T: Real> CovarianceStore<T> {
    /// Blocks must be ordered by word id starting at 0.
    pub fn from_blocks(dim: usize, blocks: Vec<WordCovariance<T>>) -> Result<Self> {
        for (k, b) in blocks.iter().enumerate() {
            if b.word_id != k {
                return Err(Error::InvalidArgument(format!("block {k} carries word id {}", b.word_id)));
            }
            if let Some(c) = &b.cov {
                if c.dim() != dim {
                    return Err(Error::DimensionMismatch(format!("block {k} is {}x{0}, expected D={dim}", c.dim())));
                }
            }
        }
        Ok(CovarianceStore { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[WordCovariance<T>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> Option<&WordCovariance<T>> {
        self.blocks.get(i)
    }

    pub fn is_covered(&self, i: usize) -> bool {
        self.block(i).is_some_and(WordCovariance::is_covered)
    }

    /// `Σ_i`, or an error naming the word id when it has no block.
    pub fn cov(&self, i: usize) -> Result<&SymMatrix<T>> {
        self.block(i).and_then(|b| b.cov.as_ref()).ok_or_else(|| Error::Uncovered(format!("#{i}")))
    }

    /// Fraction of the vocabulary with a covariance block.
    pub fn coverage(&self) -> f64 {
        if self.blocks.is_empty() {
            return 0.0;
        }
        self.blocks.iter().filter(|b| b.is_covered()).count() as f64 / self.blocks.len() as f64
    }

    pub fn count(&self, method: CovMethod) -> usize {
        self.blocks.iter().filter(|b| b.method == method).count()
    }

    /// Copy with every `Σ_i` multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| WordCovariance {
                sigma2: b.sigma2.map(|s| s * factor),
                cov: b.cov.as_ref().map(|c| c.scaled(factor)),
                ..b.clone()
            })
            .collect();
        CovarianceStore { dim: self.dim, blocks }
    }
}

/// Applies [`covariance_block`] to every word. Per-word failures become
/// uncovered blocks carrying a diagnostic; the batch never aborts.
pub fn build_store<T: Real>(
    model: &EmbeddingModel<T>,
    x: &CooccurrenceMatrix,
    policy: &CondPolicy,
) -> Result<CovarianceStore<T>> {
    check_dims(model, x)?;
    let blocks = (0..model.vocab_size())
        .into_par_iter()
        .map(|i| {
            covariance_block(i, model, x, policy).unwrap_or_else(|e| {
                log::warn!("word {i}: {e}");
                WordCovariance { diagnostic: Some(e.to_string()), ..WordCovariance::uncovered(i, x.support_size(i)) }
            })
        })
        .collect();
    Ok(CovarianceStore { dim: model.dim(), blocks })
}
