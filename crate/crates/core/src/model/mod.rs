//! Differentiable components: embeddings, bidirectional LSTM encoder with
//! attention, softmax heads, gradient reversal and saliency.
//!
//! Backpropagation is written out by hand; every forward pass keeps the
//! activations its backward pass needs.

mod encoder;
mod grl;
mod head;
mod lstm;
mod network;
mod optim;
mod pool;
mod rng;
mod tensor;

pub use encoder::{EncoderParams, EncoderTrace};
pub use grl::{grl_forward, grl_transform, DEFAULT_LAMBDA};
pub use head::{classify, HeadParams, HeadTrace};
pub use lstm::LstmParams;
pub use network::{
    encode, init_params, predicted_probability_gradient, saliency_map, AdversaryTerm, LossParts,
    ModelConfig, Network, NetworkGradients,
};
pub use optim::{Optimizer, OptimizerKind};
pub use pool::AdversaryPool;
pub use rng::SeededRng;
pub use tensor::{Matrix, Parameters};

pub(crate) use head::ce_logit_grad;
