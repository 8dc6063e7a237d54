//! Verification, search and cataloguing of product blocks over finite fields.
//!
//! A system of `q`-product blocks is a family of subsets `B_s ⊆ GF(q)`, one
//! per field element `s`, such that `(b - a)(s - r) != 1` whenever
//! `a ∈ B_r` and `b ∈ B_s`. Uniform systems with block size `k` are
//! `(q,k)` systems; those using exactly `t` distinct symbols are `(q,k,t)`
//! systems.
//!
//! * [`gf`]: arithmetic in GF(q).
//! * [`blocks`]: the block model, verifier and symmetry transforms.
//! * [`codec`]: letter sequences, integer lists, JSON and CSV.
//! * [`search`]: exhaustive and local search, and the κ(q) driver.
//! * [`bounds`]: the resulting lower bound on `M(q, q-3)`.
//! * [`fixtures`]: the bundled table corpus and its re-verification.

pub mod blocks;
pub mod bounds;
pub mod codec;
pub mod fixtures;
pub mod gf;
pub mod search;

pub use blocks::{
    check_pair, stats, transform, verify, BlockSystem, Conflict, ConflictReport, SystemStats,
    Transform,
};
pub use bounds::{bound_from_system, theorem1_bound, BoundResult};
pub use gf::{Field, FieldElement, FieldSpec};
pub use search::{SearchConfig, SearchResult, Status};
