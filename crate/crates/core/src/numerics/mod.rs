//! Dense linear algebra, nonlinearities, losses and the finite-difference
//! oracle. Everything is generic over [`Real`].

mod gradcheck;
mod loss;
mod matrix;
mod decomp;
mod rng;
mod scalar;

pub use gradcheck::{finite_diff_grad, relative_error};
pub use loss::{binary_xent, clip_prob, logistic_xent, sigmoid, softmax, softmax_xent, SoftmaxXent};
pub use matrix::{axpy, dot, norm, Matrix};
pub use decomp::{orthonormal_basis, spectral_norm};
pub use rng::RngStream;
pub use scalar::Real;
