//! Dense tensors, reverse-mode differentiation, the optimizer and the
//! checkpoint container.

pub mod checkpoint;
pub mod gradcheck;
pub mod graph;
pub mod optim;
pub mod params;
pub mod tensor;

pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, grad_check_at, relative_error};
pub use graph::{BatchStats, BnMode, Gradients, Graph, NodeId};
pub use optim::RmsProp;
pub use params::{Binding, ParamEntry, ParamKind, ParamStore};
pub use tensor::{matmul, Real, Tensor};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.9;
pub const LEAKY_SLOPE: f64 = 0.2;
