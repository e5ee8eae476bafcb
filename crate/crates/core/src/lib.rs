//! Prune Sampling for discrete Bayesian networks with deterministic relations.
//!
//! The crate provides the network model ([`network`]), file formats and
//! benchmark generators ([`io`]), exact ground truth ([`exact`]), the pruning
//! machinery ([`prune`]), Prune/Gibbs/Metropolis chains ([`samplers`]),
//! convergence metrics ([`diagnostics`]) and a batch runner ([`harness`]).

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod harness;
pub mod io;
pub mod network;
pub mod prune;
pub mod samplers;
mod search;

pub use error::{Error, Result};
pub use exact::{exact_marginals, MarginalTable, TransitionMatrix};
pub use harness::{run_experiment, ExperimentConfig, ExperimentReport};
pub use network::{Assignment, Cpt, CptLabel, LabelSet, Network, State, VarId, Variable};
pub use prune::{PruneMode, PrunedSpace};
pub use samplers::{run_chain, InitStrategy, Method, RunTrace, SamplerConfig};
