//! Minimal feed-forward CNN: layer kernels, exact reverse-mode gradients,
//! softmax cross-entropy, plain SGD and evaluation.

mod backward;
pub mod gradcheck;
mod layers;
mod loss;
mod network;
mod spec;
mod train;

pub use backward::{backward, input_gradient};
pub use layers::{activation_forward, affine_forward};
pub use loss::softmax_cross_entropy;
pub use network::{GradientSet, Network, Params};
pub use spec::{ActShape, LayerSpec, NetworkSpec};
pub use train::{batch_gradient, evaluate, sgd_step};
