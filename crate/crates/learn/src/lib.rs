//! Knowledge-graph embedding models (translation, rotation, and
//! relation-scaled distance scoring), negative samplers driven by the edit
//! history, walk-based entity embeddings with a random-forest type
//! classifier, and a bounded random-search harness.

pub mod embedding;
pub mod forest;
pub mod sampler;
pub mod search;
pub mod synthetic;
pub mod train;
pub mod typer;
pub mod walks;

pub use embedding::{EmbeddingModel, ModelError, ModelKind, Norm};
pub use sampler::{
    CorruptSide, NegativeSampler, SamplerConfig, SamplerContext, SamplerError, SamplerKind,
};
pub use train::{train, TrainConfig, TrainError, TrainReport};
