//! Samplers for the point processes under study: binomial processes,
//! hidden-chain processes with blocked densities, order-`m` density chains,
//! delay embeddings and two-dimensional lattice fields.
//!
//! Randomness: every sampler takes a `u64` seed and draws from ChaCha8
//! streams derived from it ([`stream_rng`]). Discrete (hidden) variates and
//! continuous coordinates use separate streams, so the hidden path never
//! depends on the coordinates drawn for it. Replication seeds are split from
//! a master seed with [`derive_seed`].

mod blocked;
mod delay;
mod density_chain;
mod lattice;
mod process;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{GeometryError, PointCloud};

pub use blocked::{
    sample_binomial, sample_blocked_chain, sample_blocked_chain_with, Block, BlockedDensity, HiddenChainSpec,
};
pub use delay::{delay_embed, sample_delay_embedding, DelayEmbeddingSpec};
pub use density_chain::{sample_density_chain, DensityChainSpec, DensityFamily};
pub use lattice::{sample_lattice_field, total_order, total_order_2d, InteriorKernel, LatticeFieldSpec};
pub use process::{DensityConfig, HiddenConfig, ProcessSpec};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid block partition: {0}")]
    InvalidBlocks(String),
    #[error("invalid hidden chain: {0}")]
    InvalidChain(String),
    #[error("invalid density chain: {0}")]
    InvalidDensity(String),
    #[error("rejection envelope too loose: acceptance rate {rate:.3e} after {proposals} proposals")]
    EnvelopeTooLoose { rate: f64, proposals: u64 },
    #[error("delay lags must be positive and strictly increasing, got {0:?}")]
    InvalidLags(Vec<usize>),
    #[error("series of length {len} too short for maximal lag {tau_max}")]
    SeriesTooShort { len: usize, tau_max: usize },
    #[error("lattice fields are only supported for d = 2, got d = {0}")]
    UnsupportedLatticeDimension(usize),
    #[error("invalid lattice field: {0}")]
    InvalidLattice(String),
    #[error("invalid process spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One realization of a process.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cloud: PointCloud<f64>,
    /// Block index of every observation, when the process has hidden states.
    pub hidden_path: Option<Vec<usize>>,
    pub seed: u64,
    pub process_tag: String,
}

/// Stream for discrete hidden-state variates.
pub const HIDDEN_STREAM: u64 = 0;
/// Stream for continuous within-block coordinates.
pub const COORD_STREAM: u64 = 1;

/// ChaCha8 generator for `(seed, stream)`. Streams of one seed are independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hierarchical seed splitting: `derive_seed(master, &[a, b])` is the seed of
/// child `b` of child `a` of `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &child| {
        splitmix64(acc ^ splitmix64(child.wrapping_add(0x5851_f42d_4c95_7f2d)))
    })
}
