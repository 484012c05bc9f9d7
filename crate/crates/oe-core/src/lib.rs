//! Exact combinatorics of **m-overlapping set-family systems**.
//!
//! # Overview
//!
//! A *system* is a list of families 𝓕_1, …, 𝓕_ℓ of subsets of a ground set
//! [n] together with a symmetric bound matrix `m_{k,k'}`; it is
//! *m-overlapping* when every set from family k meets every set from family
//! k' (k ≠ k') in at most `m_{k,k'}` elements. The quantity of interest is
//! the maximum of ∏|𝓕_k| over all such systems.
//!
//! The crate provides, as independent modules:
//!
//! * [`family`] — bitmask families, the ∧/∨ algebra, selectors, overlap
//!   checking, normalized degrees, and a product inequality check;
//! * [`shadow`] — lexicographic order, initial segments, upper/lower shadows,
//!   and shadow-minimality verification;
//! * [`tournament`] — oriented graphs on [ℓ], the common-in-neighbor pair
//!   count r(T), its exact maximization for ℓ ≤ 7, Paley and random
//!   tournaments;
//! * [`formulas`] — exact closed-form main terms for the product maximum and
//!   block-size targets;
//! * [`conflict`] — the conflict hypergraph of a family against the rest of
//!   its system, independence tests, and maximal completion;
//! * [`coloring`] — hypergraph edge colorings, monochromatic-clique counts,
//!   the clique-family correspondence, and exact/annealing product search;
//! * [`construct`] — the octopus construction over an oriented graph, the
//!   five-family refinement, the two-family extremal pair, and
//!   center/direction diagnostics;
//! * [`symmetrize`] — the three-step tentacle-replacement transformation and
//!   the high-degree candidate slice I_Δ.
//!
//! # Design
//!
//! Everything is exact: sets are `u64` bitmasks, degrees are `Ratio<i128>`,
//! products are `BigUint`. No floating point participates in any decision.
//! All containers are canonical (sorted, deduplicated), so equality is
//! bit-exact and results are deterministic, including under parallelism.

pub mod coloring;
pub mod conflict;
pub mod construct;
pub mod family;
pub mod formulas;
pub mod shadow;
pub mod symmetrize;
pub mod tournament;

pub use family::{
    check_overlap, degree, directed_degree, rinott_check, select, vee, vee_all, wedge, Family,
    FamilySystem, GroundSet, OverlapReport, OverlapSpec, OverlapWitness, RinottReport, SelectMode,
    SetWord,
};

/// Errors shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ground set size {0} exceeds the 62-element cap")]
    GroundTooLarge(u32),
    #[error("ground-set mismatch: {0} elements vs {1}")]
    GroundMismatch(u32, u32),
    #[error("mask {mask:#x} has bits outside the {n}-element ground set")]
    MaskOutOfGround { mask: u64, n: u32 },
    #[error("family index {0} out of range 1..={1}")]
    BadFamilyIndex(usize, usize),
    #[error("operation undefined on an empty family")]
    EmptyFamily,
    #[error("trace selector needs A ⊆ B")]
    TraceNotNested,
    #[error("materialization cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal verification failed (implementation bug): {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
