//! Algebraic curvature tensors, Young symmetrizers and curvature two-jets.

pub mod curvature;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod report;
pub mod suite;
pub mod symbiform;
pub mod tensor;
pub mod young;

pub use error::{Error, Result};
pub use tensor::{Space, Tensor};
