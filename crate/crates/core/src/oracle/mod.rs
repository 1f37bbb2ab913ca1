//! Brute-force DP-coloring: covers, independent transversals, exhaustive and
//! sampled colorability checks, and the complete multipartite bound.

mod check;
mod cover;
mod multipartite;

pub use check::{
    check_dp_colorable, check_stdp_implication, find_transversal, normalized_family_size, DpCheck,
    DpStrategy, DpVerdict, StdpReport, Transversal,
};
pub use cover::{
    all_perfect_covers, all_permutations, build_cover, cover_from_json, identity_perm,
    normalized_cover, spanning_forest, Cover, CoverSpec, Matching,
};
pub use multipartite::{
    multipartite_bound, multipartite_order_scan, MultipartiteBound, BISECTION_TOL,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("fold a = {0} must be between 1 and 64")]
    BadFold(usize),
    #[error("transversal size b = {b} must be between 1 and a = {a}")]
    BadTransversalSize { a: usize, b: usize },
    #[error("permutation on edge {edge} is not a bijection on 0..{a}")]
    PermutationArity { edge: String, a: usize },
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("part sizes must be a nonempty list of positive integers")]
    BadParts,
    #[error("search failed: {0}")]
    Search(String),
}

/// The documented sampling generator: ChaCha8 seeded from a `u64`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
