//! Resolvent calculus, martingale approximation, and central limit
//! theorem diagnostics for finite-state continuous-time Markov chains.
//!
//! The library constructs irreducible chains with their stationary
//! distribution and L²(π) geometry ([`chain`]), splits the generator
//! into its symmetric and antisymmetric parts and computes resolvents,
//! semigroup actions and semigroup integrals ([`calculus`]), verifies
//! the resolvent conditions, identities and singular-integral bounds
//! that drive the martingale approximation ([`conditions`]), computes
//! the asymptotic variance and the approximating martingale along
//! simulated paths ([`martingale`]), and runs exact stochastic
//! simulation with CLT statistics ([`simulate`]).
//!
//! See the crate examples for runnable walkthroughs of each capability,
//! and the `ctmc-clt` binary for the batch/file interface.

pub mod calculus;
pub mod chain;
pub mod cli;
pub mod conditions;
pub mod error;
pub mod martingale;
pub mod quad;
pub mod simulate;

pub use chain::{build_chain, make_example, ChainSpec, ExampleFamily, MarkovChain, Observable};
pub use error::{Error, Result};
