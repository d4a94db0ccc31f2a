//! Dense linear algebra and the differentiable building blocks used by the
//! models. Gradients are hand-written per primitive and checked against
//! central finite differences in the tests.

mod adam;
mod dense;
mod gradcheck;
mod lstm;
mod matrix;
mod ops;
mod params;

pub use adam::{AdamConfig, AdamState};
pub use dense::Dense;
pub use gradcheck::{finite_difference_check, relative_error};
pub use lstm::{LstmCache, LstmParams};
pub use matrix::Matrix;
pub use ops::{
    concat, cosine_distance, dot, hadamard, l2_normalize, l2_normalize_backward, pairwise_sum,
    relu, relu_derivative, sigmoid,
};
pub use params::ParamSet;
