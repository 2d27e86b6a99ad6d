//! GloVe word embeddings with per-word uncertainty.
//!
//! The pipeline is: count inverse-distance weighted co-occurrences
//! ([`corpus`]), fit GloVe with AdaGrad ([`glove`]), estimate a D×D
//! covariance block for every center vector ([`variance`]), push that
//! uncertainty through downstream statistics ([`propagate`]) and turn the
//! result into intervals and tests ([`inference`]).
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common double-precision instantiation.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod glove;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod propagate;
pub mod scalar;
pub mod variance;

pub use corpus::{count_cooccurrences, weight_f, CooccurrenceMatrix, Vocabulary, Weighting};
pub use error::{Error, Result};
pub use glove::{closed_form_row, glove_cost, train, EmbeddingModel, TrainConfig, Trainer};
pub use inference::{compare_bias_types, neighbor_ranks, z_test_difference, IntervalResult, RankedNeighbor, ZTest};
pub use propagate::{
    delta_variance, mc_propagate, sample_embedding, BiasQuery, GargQuery, Propagation, Statistic, UncertainStatistic,
    WeatQuery,
};
pub use scalar::Real;
pub use variance::{build_store, covariance_block, CondPolicy, CovMethod, CovarianceStore, WordCovariance};

pub type Model = EmbeddingModel<f64>;
pub type Model32 = EmbeddingModel<f32>;
pub type Store = CovarianceStore<f64>;
pub type Store32 = CovarianceStore<f32>;
pub type Matrix = linalg::SymMatrix<f64>;
pub type Uncertain = UncertainStatistic<f64>;
