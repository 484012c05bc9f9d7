//! Conflict hypergraphs and maximal family completion.
//!
//! # Overview
//!
//! Fixing one family index k of a system, every other family 𝓕_{k'} forbids
//! the (m_{k,k'}+1)-element subsets of its members from appearing inside a
//! set of 𝓕_k. Collecting those forbidden sets — the (m_{k,k'}+1)-uniform
//! layers of the opposing families — gives the conflict hypergraph H_k; the
//! sets that may live in family k are exactly the independent sets of H_k
//! (those containing no edge). [`maximal_completion`] enumerates all of
//! them, and [`round_robin_completion`] grows every family in ascending
//! order until nothing changes.
//!
//! # Design
//!
//! Independent sets are enumerated by recursive descent over elements n
//! down to 1 (exclude branch first), testing edges grouped by their minimum
//! element, so output is produced directly in ascending mask order and the
//! ground-set cap can sit at 24 rather than a filter-all-2^n 20.
//!
//! Replacing 𝓕_k by its completion preserves the overlap property when the
//! opposing families are down-closed (then the layers capture every
//! violation); for non-down-closed opponents the layers may miss large
//! members, so [`round_robin_completion`] requires a down-closed,
//! overlap-satisfying input.

use crate::family::{GroundSet, SetWord};
use crate::{check_overlap, Error, Family, FamilySystem, Result};

/// Edges forbidden from appearing inside a candidate member of family k.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConflictHypergraph {
    ground: GroundSet,
    edges: Family,
}

impl ConflictHypergraph {
    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    /// The edge list (mixed uniformities allowed, one per opposing family).
    #[inline]
    pub fn edges(&self) -> &Family {
        &self.edges
    }

    /// True iff no edge is contained in `set`.
    pub fn is_independent(&self, set: SetWord) -> bool {
        self.edges.sets().iter().all(|&e| e & set != e)
    }
}

/// H_k: the union over k' ≠ k of the (m_{k,k'}+1)-uniform layers of 𝓕_{k'}.
pub fn build_conflict(sys: &FamilySystem, k: usize) -> Result<ConflictHypergraph> {
    sys.family(k)?; // validates k
    let ground = sys.ground();
    let mut edges: Vec<SetWord> = Vec::new();
    for k_other in 1..=sys.ell() {
        if k_other == k {
            continue;
        }
        let t = sys.spec().m(k, k_other) + 1;
        edges.extend(
            sys.family(k_other)?
                .sets()
                .iter()
                .copied()
                .filter(|s| s.count_ones() == t),
        );
    }
    Ok(ConflictHypergraph {
        ground,
        edges: Family::new(ground, edges)?,
    })
}

/// Every independent set of `h`, in ascending mask order.
fn all_independent_sets(h: &ConflictHypergraph) -> Vec<SetWord> {
    let n = h.ground.n();
    // triggers[v-1]: the masks e∖{v} of edges whose minimum element is v.
    // Including v completes edge e exactly when e∖{v} was already chosen
    // (all its elements exceed v, hence were decided earlier).
    let mut triggers: Vec<Vec<SetWord>> = vec![Vec::new(); n as usize];
    for &e in h.edges.sets() {
        let v = e.trailing_zeros();
        triggers[v as usize].push(e & !(1u64 << v));
    }
    let mut out = Vec::new();
    descend(n, 0, &triggers, &mut out);
    out
}

fn descend(v: u32, chosen: SetWord, triggers: &[Vec<SetWord>], out: &mut Vec<SetWord>) {
    if v == 0 {
        out.push(chosen);
        return;
    }
    descend(v - 1, chosen, triggers, out);
    if triggers[v as usize - 1]
        .iter()
        .all(|&rest| rest & chosen != rest)
    {
        descend(v - 1, chosen | (1u64 << (v - 1)), triggers, out);
    }
}

/// The family of ALL independent sets of H_k, under the default ground cap.
pub fn maximal_completion(sys: &FamilySystem, k: usize) -> Result<Family> {
    maximal_completion_capped(sys, k, crate::family::DEFAULT_CAP)
}

/// As [`maximal_completion`] with an explicit ground-set cap.
pub fn maximal_completion_capped(sys: &FamilySystem, k: usize, cap: u32) -> Result<Family> {
    let n = sys.ground().n();
    if n > cap {
        return Err(Error::CapExceeded(format!(
            "independent-set enumeration over [{n}] exceeds cap {cap}"
        )));
    }
    let h = build_conflict(sys, k)?;
    let sets = all_independent_sets(&h);
    Ok(Family::from_sorted_unchecked(sys.ground(), sets))
}

/// Complete families in ascending k repeatedly until a full pass changes
/// nothing, then re-verify the result. Input must be down-closed and satisfy
/// its overlap bounds (weaker inputs can lose members or break bounds).
pub fn round_robin_completion(sys: &FamilySystem) -> Result<FamilySystem> {
    if !sys.all_down_closed() {
        return Err(Error::Precondition(
            "round-robin completion needs every family down-closed".into(),
        ));
    }
    if !check_overlap(sys).ok {
        return Err(Error::Precondition(
            "round-robin completion needs an overlap-satisfying system".into(),
        ));
    }
    let mut cur = sys.clone();
    loop {
        let mut changed = false;
        for k in 1..=cur.ell() {
            let completed = maximal_completion(&cur, k)?;
            if &completed != cur.family(k)? {
                cur = cur.with_family(k, completed)?;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let report = check_overlap(&cur);
    if !report.ok {
        return Err(Error::Internal(format!(
            "completion fixpoint violates overlap bounds: witness {:?}",
            report.witness
        )));
    }
    Ok(cur)
}
