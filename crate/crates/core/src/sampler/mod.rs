//! Proposal, rejection and Markov chain samplers over a partition envelope.

mod alias;
mod lmhs;
mod rng;
mod trio;

pub use alias::AliasTable;
pub use lmhs::{lmhs_run, ChainState, LocalChain};
pub use rng::{derive_seed, rng_from_seed, splitmix64, RngSeed, SamplerRng};
pub use trio::{draw_trio, propose, propose_in, SampleRecord, TrioSampler};
