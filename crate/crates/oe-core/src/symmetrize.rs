//! The tentacle-replacement transformation: chop a low-degree tentacle S_0
//! off one family and graft copies of a high-degree tentacle S in its
//! place, preserving down-closedness and the overlap bounds — plus the
//! I_Δ diagnostic classifying which replacement tentacles would gain at
//! least Δ in normalized degree.
//!
//! # Overview
//!
//! Given a down-closed, bound-respecting system, an index k_0, a tentacle
//! S_0 inside the union of the centers of k_0's out-neighbor families, and
//! a replacement S with the same center-intersection profile, the
//! transformation runs three steps:
//!
//! 1. every family drops all sets containing S_0;
//! 2. (the choice of S — here an input);
//! 3. with 𝓥 = 𝓕_{k0}(↑S) ∩ ⋂_{S' ⊊ S_0} 𝓕_{k0}(↑S') computed from the
//!    ORIGINAL family k_0 (𝓕(↑A) = {F ∖ A : A ⊆ F ∈ 𝓕}; the intersection
//!    over proper subsets includes S' = ∅ and is therefore 𝓕_{k0} itself
//!    when |S_0| = 1), the sets {F ∪ S_0 : F ∈ 𝓥} are added to family k_0.
//!
//! The result is provably down-closed and bound-respecting; both are
//! re-verified at runtime and a failure aborts with an internal error
//! rather than returning a corrupt system.
//!
//! # Design
//!
//! * Preconditions get `Error::Precondition`; they are caller mistakes.
//!   Post-verification failures get `Error::Internal`; they are bugs here.
//! * The subset-intersection guard is what keeps overlap safe: a grafted
//!   set (F ∪ S_0) ∩ F' decomposes into (F ∩ F') ∪ (S_0 ∩ F'), and since
//!   F ∪ S' stayed in the original family for every proper S' ⊂ S_0, the
//!   bound applies to each decomposition.

use crate::construct::tentacle_direction;
use crate::family::{mask_elems, select, SelectMode, SetWord, SubsetIter};
use crate::{check_overlap, Error, Family, FamilySystem, Result};
use num::rational::Ratio;
use num::BigUint;

/// Intersection of two canonical families (sorted-merge).
fn intersect(a: &Family, b: &Family) -> Family {
    let (xs, ys) = (a.sets(), b.sets());
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(xs[i]);
                i += 1;
                j += 1;
            }
        }
    }
    Family::from_sorted_unchecked(a.ground(), out)
}

/// All sets of `f` not containing `s0` (order-preserving filter).
fn drop_supersets(f: &Family, s0: SetWord) -> Family {
    let sets: Vec<SetWord> = f
        .sets()
        .iter()
        .copied()
        .filter(|&w| w & s0 != s0)
        .collect();
    Family::from_sorted_unchecked(f.ground(), sets)
}

/// 𝓥 = 𝓕(↑S) ∩ ⋂_{S' ⊊ s0} 𝓕(↑S'), from the given (original) family.
/// The S' = ∅ term contributes 𝓕 itself, realizing the |S_0| = 1
/// convention automatically.
fn replacement_base(f: &Family, s: SetWord, s0: SetWord) -> Result<Family> {
    let mut v = select(f, SelectMode::Require, s, 0)?;
    for s_prime in SubsetIter::new(s0) {
        if s_prime == s0 {
            continue;
        }
        v = intersect(&v, &select(f, SelectMode::Require, s_prime, 0)?);
    }
    Ok(v)
}

/// Inputs of the transformation. `centers[k-1]` is the probabilistic
/// center used for family k; tentacle legality and the replacement profile
/// are checked against these masks.
#[derive(Clone, Debug)]
pub struct SymmetrizationRequest {
    pub sys: FamilySystem,
    pub k0: usize,
    /// The tentacle to chop.
    pub s0: SetWord,
    /// The replacement tentacle.
    pub s: SetWord,
    pub centers: Vec<SetWord>,
}

/// Outcome of the transformation.
#[derive(Clone, Debug)]
pub struct SymmetrizationResult {
    pub new_sys: FamilySystem,
    pub old_product: BigUint,
    pub new_product: BigUint,
    /// Whether the product strictly increased.
    pub accepted: bool,
}

/// Runs the three-step replacement. Errors with `Precondition` on caller
/// mistakes (see module docs) and `Internal` if the provably-preserved
/// invariants fail re-verification on the output.
pub fn symmetrize(req: &SymmetrizationRequest) -> Result<SymmetrizationResult> {
    let sys = &req.sys;
    let ground = sys.ground();
    let f_k0 = sys.family(req.k0)?;
    ground.check_mask(req.s0)?;
    ground.check_mask(req.s)?;
    if req.s0 == 0 {
        return Err(Error::Precondition(
            "the chopped tentacle must be non-empty (every set contains ∅)".into(),
        ));
    }
    if !sys.all_down_closed() {
        return Err(Error::Precondition(
            "the input system is not down-closed".into(),
        ));
    }
    let overlap = check_overlap(sys);
    if !overlap.ok {
        return Err(Error::Precondition(format!(
            "the input system violates its bounds: {:?}",
            overlap.witness
        )));
    }
    // Tentacle legality: S_0 inside the union of the centers of the
    // out-neighbor families of k_0 (directions read off the system).
    let direction = tentacle_direction(sys, &req.centers)?;
    let (_, out_m) = direction.graph.in_out(req.k0)?;
    let allowed: SetWord = mask_elems(out_m)
        .into_iter()
        .fold(0, |acc, k| acc | req.centers[k as usize - 1]);
    if req.s0 & !allowed != 0 {
        return Err(Error::Precondition(format!(
            "tentacle {:?} is not inside the out-neighbor centers {:?}",
            mask_elems(req.s0),
            mask_elems(allowed)
        )));
    }
    // Replacement profile: |S ∩ C*_k| = |S_0 ∩ C*_k| for every k.
    for (k, &c) in req.centers.iter().enumerate() {
        if (req.s & c).count_ones() != (req.s0 & c).count_ones() {
            return Err(Error::Precondition(format!(
                "replacement profile differs on center {}: |S ∩ C*| = {}, |S_0 ∩ C*| = {}",
                k + 1,
                (req.s & c).count_ones(),
                (req.s0 & c).count_ones()
            )));
        }
    }

    // Step 1: drop every superset of S_0 from every family.
    let mut families: Vec<Family> = sys
        .families()
        .iter()
        .map(|f| drop_supersets(f, req.s0))
        .collect();
    // Step 3: graft S_0 onto the replacement base of the ORIGINAL family.
    let base = replacement_base(f_k0, req.s, req.s0)?;
    let grafted: Vec<SetWord> = base.sets().iter().map(|&w| w | req.s0).collect();
    let grafted = Family::new(ground, grafted)?;
    families[req.k0 - 1] = families[req.k0 - 1].union(&grafted)?;

    let new_sys = FamilySystem::new(sys.spec().clone(), families)?;
    // Both invariants are provably preserved by this construction; a
    // failure here is an implementation bug, not bad input.
    for k in 1..=new_sys.ell() {
        let f = new_sys.family(k)?;
        if f.down_closure() != *f {
            return Err(Error::Internal(format!(
                "family {k} lost down-closedness after replacement"
            )));
        }
    }
    let report = check_overlap(&new_sys);
    if !report.ok {
        return Err(Error::Internal(format!(
            "replacement broke the overlap bounds: {:?}",
            report.witness
        )));
    }

    let old_product = sys.product();
    let new_product = new_sys.product();
    let accepted = new_product > old_product;
    Ok(SymmetrizationResult {
        new_sys,
        old_product,
        new_product,
        accepted,
    })
}

/// I_Δ: the candidates S whose replacement-base ratio
/// |𝓥(S)| / |𝓕_{k0}| is at least d_{k0}(S_0) + Δ — the tentacles worth at
/// least Δ more than the one being chopped.
///
/// The candidate universe (a subfamily of the joined out-center levels)
/// and S_0 ∈ candidates are the caller's obligations; `centers` is carried
/// for request symmetry and only bounds-checked.
pub fn i_delta(
    sys: &FamilySystem,
    k0: usize,
    s0: SetWord,
    candidates: &Family,
    delta: Ratio<i128>,
    centers: &[SetWord],
) -> Result<Family> {
    let f = sys.family(k0)?;
    sys.ground().check_mask(s0)?;
    for &c in centers {
        sys.ground().check_mask(c)?;
    }
    let threshold = crate::family::degree(f, s0)? + delta;
    let mut kept = Vec::new();
    for &s in candidates.sets() {
        let ratio = Ratio::new(
            replacement_base(f, s, s0)?.len() as i128,
            f.len() as i128,
        );
        if ratio >= threshold {
            kept.push(s);
        }
    }
    Ok(Family::from_sorted_unchecked(sys.ground(), kept))
}
