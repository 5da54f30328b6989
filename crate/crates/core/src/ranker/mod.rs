//! A small pointwise ranker: hashed lexical-interaction features, a
//! two-layer ReLU network producing two logits, exact backpropagation and
//! Adam.

mod adam;
mod checkpoint;
mod features;
mod network;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{
    decode as decode_checkpoint, encode as encode_checkpoint, load_checkpoint, save_checkpoint,
    Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use features::{
    extract_features, extract_features_tokens, fnv1a, FeatureVector, FEATURE_DIM, HASH_BINS,
    SCALAR_FEATURES,
};
pub use network::{backward, forward, init_params, ModelParams, DEFAULT_HIDDEN};

/// Parameter gradients share the parameter layout.
pub type Gradients = ModelParams;
pub(crate) use network::accumulate_gradients;
