//! Cold-start cutting-plane separator configuration for MILP solvers.
//!
//! Candidate configurations are sampled from a language model prompted with
//! a problem description (or with the constraint structure of an MPS file),
//! clustered with k-medoids, and reduced to a single configuration. The
//! [`harness`] module runs solvers to measure relative solve-time improvement
//! over the solver default, and [`baselines`] provides the pruning and random
//! search comparisons.

pub mod artifact;
pub mod baselines;
pub mod catalog;
pub mod ensemble;
pub mod harness;
mod hashing;
pub mod llm;
pub mod mps;
pub mod pool;
pub mod stats;
pub mod textfree;

pub use hashing::sha256_hex;
