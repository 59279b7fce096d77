//! Dense complex linear algebra and entropy primitives.

pub mod channel;
pub mod eig;
pub mod entropy;
pub mod matrix;
pub mod random;
pub mod state;

pub use channel::KrausChannel;
pub use eig::{hermitian_eig, hermitian_eigenvalues, EigenDecomposition};
pub use entropy::{relative_entropy, shannon_entropy, von_neumann_entropy, LogBase};
pub use matrix::{tensor_product, ComplexMatrix};
pub use random::{random_channel, random_density_matrix, random_pure_state};
pub use state::{partial_trace, DensityMatrix, Keep, PureState};
