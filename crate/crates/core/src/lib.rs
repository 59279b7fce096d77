//! Weyl channels on qudits: minimal output entropy, classical capacity, and
//! majorization bounds for deformations of quantum-classical Weyl channels.

pub mod capacity;
pub mod error;
pub mod linalg;
pub mod majorization;
pub mod optimizer;
pub mod prob;
pub mod weyl;

pub use error::{Error, Result};
pub use linalg::LogBase;
pub use prob::ProbVector;
pub use weyl::WeylChannelSpec;
