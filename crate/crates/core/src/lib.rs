//! Rank-1 inhomogeneous random graphs with finite-variance degrees.
//!
//! Every node carries a positive capacity `λ_i`; an edge between `i` and `j`
//! is present with probability `h(λ_i λ_j / l_N)` where `l_N` is the total
//! capacity. The crate provides:
//!
//! * capacity sequences (deterministic quantile grids and i.i.d. draws) and
//!   their derived mixed-Poisson offspring laws ([`capacities`]),
//! * expected `O(N + E)` graph generators for the Poissonian,
//!   expected-degree and generalized kernels ([`graphgen`]),
//! * BFS shells, hopcount sampling and survival curves ([`distances`]),
//! * the delayed branching process, the marked process with thinning, the
//!   martingale limit and the hopcount fluctuation law ([`branching`]),
//! * an exact per-edge coupling between the Poissonian graph and any other
//!   kernel, with mismatch bookkeeping ([`coupling`]).
//!
//! All randomness is derived from explicit 64-bit seeds through counter-based
//! sub-streams, so every result is reproducible and independent of thread
//! count.

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alias;
pub mod branching;
pub mod capacities;
pub mod coupling;
pub mod distances;
pub mod error;
pub mod graphgen;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
