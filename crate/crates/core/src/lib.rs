//! Difference-of-convex approximation of Lipschitz functions on
//! finite-dimensional `l_p` spaces.
//!
//! * [`space`]: `l_p` norms, convexity defects, modulus of convexity and
//!   power-type constants.
//! * [`lipschitz`]: Lipschitz functions, distance functions and a test corpus.
//! * [`regularization`]: the quadratic and power regularizers, the
//!   inf-convolution baseline, the convex decomposition and error bounds.
//! * [`tree`]: dyadic trees, the tree-family counterexample and the
//!   branch walk that certifies approximation lower bounds.
//! * [`solver`]: the derivative-free inner minimizer shared by all of them.

pub mod error;
pub mod lipschitz;
pub mod numeric;
pub mod regularization;
pub mod solver;
pub mod space;
pub mod tree;
pub mod vector;

pub use error::{Error, Result};
pub use lipschitz::{distance_function, make_corpus, verify_lipschitz, LipschitzFunction, PointSet};
pub use regularization::{
    decompose, inf_convolve, rate_bound, regularize_power, regularize_quadratic, search_radius,
    sup_distance, ConvexPair, RegularizationResult,
};
pub use solver::{inner_minimize, Ball, SolverConfig};
pub use space::{Exponent, ModulusEstimate, NormedSpace, PowerTypeConstant, SampleBudget};
pub use vector::Vector;
