//! Multilevel Picard (MLP) approximations for McKean–Vlasov SDEs with additive
//! noise, a ReLU network calculus, and the constructive synthesis of networks
//! whose realization is exactly the MLP / Monte-Carlo estimator for one fixed
//! noise realization.
//!
//! Module map:
//!
//! - [`network`]: ReLU networks, their realization, dimension vectors and
//!   parameter counts, plus a plain-text serialization.
//! - [`calculus`]: the dimension-vector operators `⊙`, `⊞`, `⊡` and the
//!   matching network constructions (composition, scaled sums, merging,
//!   identities, affine wraps, depth extension).
//! - [`mlp`]: the order-independent noise tree and the MLP recursion.
//! - [`synthesis`]: networks realizing the MLP and Monte-Carlo estimators,
//!   with their depth/width bookkeeping.
//! - [`oracle`]: interacting-particle reference solver and empirical checks of
//!   the moment, perturbation and MLP error bounds.
//! - [`experiment`]: parameter selection, the end-to-end pipeline and the
//!   CSV-producing suites driven by the `mkv-dnn` binary.

pub mod calculus;
pub mod error;
pub mod experiment;
pub mod mlp;
pub mod network;
pub mod numeric;
pub mod oracle;
pub mod synthesis;

pub use error::{Error, Result};
pub use mlp::{MlpParams, NoiseTree, TestProblem, ThetaIndex};
pub use network::{DimVector, NeuralNetwork};
