//! Stochastic projective splitting (SPS) for monotone inclusions
//!
//! Solves `0 ∈ A_1(z) + ... + A_n(z) + B(z)` where each `A_i` is maximal
//! monotone and accessed only through its resolvent, and `B` is monotone,
//! Lipschitz and accessed through a (possibly stochastic) oracle.
//!
//! The crate is organised as:
//!
//! * [`operators`]: operator traits plus the proximal/projection toolbox.
//! * [`sps`]: the stochastic solver, its separating hyperplane, residuals
//!   and the memory-saving variant.
//! * [`baselines`]: product-space reformulation, deterministic projective
//!   splitting, Tseng, FRB, DSEG and simultaneous GDA.
//! * [`problems`]: the distributionally robust sparse logistic regression game
//!   and synthetic games with known solutions.
//! * [`data`]: LIBSVM parsing, trace CSV and run manifests.
//! * [`experiment`]: run configurations wiring everything together.
//! * [`verify`]: brute-force oracles and the self-check suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lipschitz;
pub mod operators;
pub mod problems;
pub mod sps;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{SolverRng, Vector};
pub use operators::{LipschitzMap, Problem, SetValuedOperator};
