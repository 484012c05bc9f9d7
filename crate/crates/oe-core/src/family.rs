//! Bitmask set families over a small ground set and their algebra.
//!
//! # Overview
//!
//! Elements of the ground set [n] (n ≤ 62) are numbered 1..=n; element `i`
//! is bit `i−1` of a [`SetWord`]. A [`Family`] is a canonical — sorted by
//! mask value, deduplicated — list of member masks, so family equality is
//! bit-exact. [`OverlapSpec`] stores the symmetric bound matrix m_{k,k'} for
//! ℓ families in a fixed triangular pair order (1,2),(1,3),…,(ℓ−1,ℓ);
//! [`FamilySystem`] bundles ℓ families over one shared ground set.
//!
//! Operations: the join algebra [`wedge`] (pairwise intersections) and
//! [`vee`] (pairwise unions), the four [`select`] restrictions, overlap
//! verification with a lexicographically first witness, down-closure,
//! normalized degrees as exact `Ratio<i128>`, directed degrees toward a
//! center mask, and the product inequality check [`rinott_check`].

use crate::{Error, Result};
use num::rational::Ratio;
use num::BigUint;
use num::One;
use std::fmt;

/// A subset of the ground set as a bitmask: element `i` ↔ bit `i−1`.
pub type SetWord = u64;

/// Largest supported ground-set size; keeps every subset in one `u64`.
pub const MAX_GROUND: u32 = 62;

/// Default cap on materializing power sets 2^C: at most 2^24 member sets.
pub const DEFAULT_CAP: u32 = 24;

/// Mask of a single element `i ≥ 1`.
#[inline]
pub fn elem_mask(i: u32) -> SetWord {
    debug_assert!(i >= 1);
    1u64 << (i - 1)
}

/// Ascending list of elements of a mask.
pub fn mask_elems(mut w: SetWord) -> Vec<u32> {
    let mut out = Vec::with_capacity(w.count_ones() as usize);
    while w != 0 {
        let b = w.trailing_zeros();
        out.push(b + 1);
        w &= w - 1;
    }
    out
}

/// The ground set [n], n ≤ 62.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundSet {
    n: u32,
}

impl GroundSet {
    pub fn new(n: u32) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(Error::GroundTooLarge(n));
        }
        Ok(GroundSet { n })
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    /// Mask of the full ground set.
    #[inline]
    pub fn full(self) -> SetWord {
        if self.n == 0 {
            0
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Error unless `w ⊆ [n]`.
    pub fn check_mask(self, w: SetWord) -> Result<()> {
        if w & !self.full() != 0 {
            return Err(Error::MaskOutOfGround { mask: w, n: self.n });
        }
        Ok(())
    }

    /// Mask from a list of elements in 1..=n (any order, duplicates allowed).
    pub fn mask_from_elems(self, elems: &[u32]) -> Result<SetWord> {
        let mut w = 0u64;
        for &e in elems {
            if e < 1 || e > self.n {
                return Err(Error::Invalid(format!(
                    "element {e} out of range 1..={}",
                    self.n
                )));
            }
            w |= elem_mask(e);
        }
        Ok(w)
    }
}

impl fmt::Debug for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.n)
    }
}

/// Iterate the subsets of `mask` in ascending numeric order (includes 0 and
/// `mask` itself).
pub(crate) struct SubsetIter {
    mask: SetWord,
    next: Option<SetWord>,
}

impl SubsetIter {
    pub(crate) fn new(mask: SetWord) -> Self {
        SubsetIter {
            mask,
            next: Some(0),
        }
    }
}

impl Iterator for SubsetIter {
    type Item = SetWord;
    fn next(&mut self) -> Option<SetWord> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            // Increment within the mask: carry through the gaps.
            Some((cur | !self.mask).wrapping_add(1) & self.mask)
        };
        Some(cur)
    }
}

/// A canonical family of subsets of a shared ground set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Family {
    ground: GroundSet,
    sets: Vec<SetWord>,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Family(n={}, {} sets)", self.ground.n(), self.sets.len())
    }
}

impl Family {
    /// Build from arbitrary masks: validates against the ground set, sorts,
    /// deduplicates.
    pub fn new(ground: GroundSet, mut sets: Vec<SetWord>) -> Result<Self> {
        for &s in &sets {
            ground.check_mask(s)?;
        }
        sets.sort_unstable();
        sets.dedup();
        Ok(Family { ground, sets })
    }

    /// Internal constructor for already-canonical data.
    pub(crate) fn from_sorted_unchecked(ground: GroundSet, sets: Vec<SetWord>) -> Self {
        debug_assert!(sets.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(sets.iter().all(|&s| s & !ground.full() == 0));
        Family { ground, sets }
    }

    /// The empty family (no member sets).
    pub fn empty(ground: GroundSet) -> Self {
        Family {
            ground,
            sets: Vec::new(),
        }
    }

    /// `{∅}`: the one-member family containing only the empty set.
    pub fn just_empty_set(ground: GroundSet) -> Self {
        Family {
            ground,
            sets: vec![0],
        }
    }

    /// The power set 2^a of a mask, under the default materialization cap.
    pub fn cube(ground: GroundSet, a: SetWord) -> Result<Self> {
        Self::cube_capped(ground, a, DEFAULT_CAP)
    }

    /// The power set 2^a with an explicit cap on |a|.
    pub fn cube_capped(ground: GroundSet, a: SetWord, cap: u32) -> Result<Self> {
        ground.check_mask(a)?;
        let k = a.count_ones();
        if k > cap {
            return Err(Error::CapExceeded(format!(
                "2^C with |C| = {k} > cap {cap}"
            )));
        }
        let sets: Vec<SetWord> = SubsetIter::new(a).collect();
        Ok(Family { ground, sets })
    }

    /// C(a, ≤ t): subsets of the mask `a` of size at most `t`.
    pub fn low(ground: GroundSet, a: SetWord, t: u32) -> Result<Self> {
        ground.check_mask(a)?;
        let elems = mask_elems(a);
        let mut sets = vec![0u64];
        for k in 1..=t.min(elems.len() as u32) {
            push_k_subsets(&elems, k as usize, &mut sets);
        }
        sets.sort_unstable();
        Ok(Family { ground, sets })
    }

    /// C(a, t): subsets of the mask `a` of size exactly `t`.
    pub fn layer(ground: GroundSet, a: SetWord, t: u32) -> Result<Self> {
        ground.check_mask(a)?;
        let elems = mask_elems(a);
        let mut sets = Vec::new();
        if t == 0 {
            sets.push(0);
        } else if (t as usize) <= elems.len() {
            push_k_subsets(&elems, t as usize, &mut sets);
        }
        sets.sort_unstable();
        Ok(Family { ground, sets })
    }

    /// All singletons {x}, x ∈ [n].
    pub fn singletons(ground: GroundSet) -> Self {
        let sets = (1..=ground.n()).map(elem_mask).collect();
        Family { ground, sets }
    }

    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    #[inline]
    pub fn sets(&self) -> &[SetWord] {
        &self.sets
    }

    pub fn contains(&self, w: SetWord) -> bool {
        self.sets.binary_search(&w).is_ok()
    }

    /// Number of member sets containing `s` (i.e. supersets of `s`).
    pub fn count_supersets(&self, s: SetWord) -> usize {
        self.sets.iter().filter(|&&f| f & s == s).count()
    }

    /// Union of two families as plain set collections.
    pub fn union(&self, other: &Family) -> Result<Family> {
        same_ground(self, other)?;
        let mut sets = Vec::with_capacity(self.sets.len() + other.sets.len());
        let (a, b) = (&self.sets, &other.sets);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    sets.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    sets.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    sets.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        sets.extend_from_slice(&a[i..]);
        sets.extend_from_slice(&b[j..]);
        Ok(Family {
            ground: self.ground,
            sets,
        })
    }

    /// Is the family closed under taking subsets?
    pub fn is_down_closed(&self) -> bool {
        // Closure under removing one element is equivalent to full closure.
        self.sets.iter().all(|&s| {
            let mut rest = s;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest &= rest - 1;
                if self.sets.binary_search(&(s & !bit)).is_err() {
                    return false;
                }
            }
            true
        })
    }

    /// Smallest down-closed superfamily.
    pub fn down_closure(&self) -> Family {
        let mut seen: std::collections::HashSet<SetWord> = self.sets.iter().copied().collect();
        let mut stack: Vec<SetWord> = self.sets.clone();
        while let Some(s) = stack.pop() {
            let mut rest = s;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest &= rest - 1;
                let t = s & !bit;
                if seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        let mut sets: Vec<SetWord> = seen.into_iter().collect();
        sets.sort_unstable();
        Family {
            ground: self.ground,
            sets,
        }
    }
}

/// Push all k-subsets of `elems` (as masks) onto `out`.
fn push_k_subsets(elems: &[u32], k: usize, out: &mut Vec<SetWord>) {
    let n = elems.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mask = idx.iter().fold(0u64, |m, &i| m | elem_mask(elems[i]));
        out.push(mask);
        // Standard lexicographic successor on the index tuple.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn same_ground(a: &Family, b: &Family) -> Result<()> {
    if a.ground != b.ground {
        return Err(Error::GroundMismatch(a.ground.n(), b.ground.n()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The ∧ / ∨ algebra.
//
// Three interchangeable evaluation strategies, all producing the same
// canonical output:
//   * sort+dedup of all |a|·|b| combinations (any n);
//   • presence-bitset accumulation over 2^n (n ≤ 16);
//   * zeta/Möbius union- or intersection-product counting (n ≤ 16), which is
//     O(n·2^n) regardless of family sizes and wins when |a|·|b| is large.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum Join {
    Union,
    Intersection,
}

fn join_masks(op: Join, x: SetWord, y: SetWord) -> SetWord {
    match op {
        Join::Union => x | y,
        Join::Intersection => x & y,
    }
}

fn join_pairwise_bitset(op: Join, a: &Family, b: &Family) -> Vec<SetWord> {
    let n = a.ground.n() as usize;
    let words = (1usize << n).div_ceil(64);
    let mut present = vec![0u64; words];
    for &x in &a.sets {
        for &y in &b.sets {
            let z = join_masks(op, x, y);
            present[(z >> 6) as usize] |= 1u64 << (z & 63);
        }
    }
    collect_bitset(&present)
}

fn collect_bitset(present: &[u64]) -> Vec<SetWord> {
    let mut out = Vec::new();
    for (w, &bits) in present.iter().enumerate() {
        let mut rest = bits;
        while rest != 0 {
            let b = rest.trailing_zeros();
            out.push(((w as u64) << 6) | b as u64);
            rest &= rest - 1;
        }
    }
    out
}

fn join_pairwise_sorted(op: Join, a: &Family, b: &Family) -> Vec<SetWord> {
    let mut out = Vec::with_capacity(a.sets.len().saturating_mul(b.sets.len()).min(1 << 24));
    for &x in &a.sets {
        for &y in &b.sets {
            out.push(join_masks(op, x, y));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Subset-sum (zeta) transform in place: out[z] = Σ_{x ⊆ z} in[x].
fn zeta_subsets(f: &mut [u64], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for z in 0..f.len() {
            if z & bit != 0 {
                f[z] = f[z].wrapping_add(f[z ^ bit]);
            }
        }
    }
}

/// Inverse (Möbius) of `zeta_subsets`.
fn mobius_subsets(f: &mut [u64], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for z in 0..f.len() {
            if z & bit != 0 {
                f[z] = f[z].wrapping_sub(f[z ^ bit]);
            }
        }
    }
}

/// Superset-sum transform in place: out[z] = Σ_{x ⊇ z} in[x].
fn zeta_supersets(f: &mut [u64], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for z in 0..f.len() {
            if z & bit == 0 {
                f[z] = f[z].wrapping_add(f[z | bit]);
            }
        }
    }
}

fn mobius_supersets(f: &mut [u64], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for z in 0..f.len() {
            if z & bit == 0 {
                f[z] = f[z].wrapping_sub(f[z | bit]);
            }
        }
    }
}

/// Union/intersection product via counting transforms: h[z] = #{(x,y) : x∘y = z}.
/// Nonzero entries of h are exactly the members of the join family.
fn join_transform(op: Join, a: &Family, b: &Family) -> Vec<SetWord> {
    let n = a.ground.n() as usize;
    let size = 1usize << n;
    let mut fa = vec![0u64; size];
    let mut fb = vec![0u64; size];
    for &x in &a.sets {
        fa[x as usize] = 1;
    }
    for &y in &b.sets {
        fb[y as usize] = 1;
    }
    match op {
        Join::Union => {
            zeta_subsets(&mut fa, n);
            zeta_subsets(&mut fb, n);
            for z in 0..size {
                fa[z] = fa[z].wrapping_mul(fb[z]);
            }
            mobius_subsets(&mut fa, n);
        }
        Join::Intersection => {
            zeta_supersets(&mut fa, n);
            zeta_supersets(&mut fb, n);
            for z in 0..size {
                fa[z] = fa[z].wrapping_mul(fb[z]);
            }
            mobius_supersets(&mut fa, n);
        }
    }
    let mut out = Vec::new();
    for (z, &c) in fa.iter().enumerate() {
        if c != 0 {
            out.push(z as u64);
        }
    }
    out
}

fn join(op: Join, a: &Family, b: &Family) -> Result<Family> {
    same_ground(a, b)?;
    let n = a.ground.n() as usize;
    let pairs = a.sets.len().saturating_mul(b.sets.len());
    let sets = if n <= 16 {
        // Transform cost ≈ 2·n·2^n word ops; pairwise cost ≈ |a|·|b|.
        if pairs > 4 * n.max(1) * (1usize << n) {
            join_transform(op, a, b)
        } else {
            join_pairwise_bitset(op, a, b)
        }
    } else {
        join_pairwise_sorted(op, a, b)
    };
    Ok(Family {
        ground: a.ground,
        sets,
    })
}

/// 𝓐 ∧ 𝓑 = { A ∩ B : A ∈ 𝓐, B ∈ 𝓑 }, deduplicated.
pub fn wedge(a: &Family, b: &Family) -> Result<Family> {
    join(Join::Intersection, a, b)
}

/// 𝓐 ∨ 𝓑 = { A ∪ B : A ∈ 𝓐, B ∈ 𝓑 }, deduplicated.
pub fn vee(a: &Family, b: &Family) -> Result<Family> {
    join(Join::Union, a, b)
}

/// ∨-fold over a list of families; the empty fold is {∅} (the ∨-identity).
pub fn vee_all<'a, I>(ground: GroundSet, fams: I) -> Result<Family>
where
    I: IntoIterator<Item = &'a Family>,
{
    let mut acc = Family::just_empty_set(ground);
    for f in fams {
        acc = vee(&acc, f)?;
    }
    Ok(acc)
}

/// The four selector restrictions of a family.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SelectMode {
    /// 𝓕|_B: members contained in B (uses B only).
    Restrict,
    /// 𝓕(A) = { F∖A : A ⊆ F ∈ 𝓕 } (uses A only).
    Require,
    /// 𝓕(Ā): members disjoint from A (uses A only).
    Avoid,
    /// 𝓕(A,B) = { F∖B : F ∈ 𝓕, F ∩ B = A }; needs A ⊆ B.
    Trace,
}

/// Apply a selector. Unused mask arguments are still validated against the
/// ground set.
pub fn select(f: &Family, mode: SelectMode, a: SetWord, b: SetWord) -> Result<Family> {
    f.ground.check_mask(a)?;
    f.ground.check_mask(b)?;
    let sets: Vec<SetWord> = match mode {
        SelectMode::Restrict => f.sets.iter().copied().filter(|&s| s & !b == 0).collect(),
        // For sets containing a fixed mask, stripping that mask is strictly
        // monotone (s = (s∖A) + A), so the output stays sorted.
        SelectMode::Require => f
            .sets
            .iter()
            .copied()
            .filter(|&s| s & a == a)
            .map(|s| s & !a)
            .collect(),
        SelectMode::Avoid => f.sets.iter().copied().filter(|&s| s & a == 0).collect(),
        SelectMode::Trace => {
            if a & !b != 0 {
                return Err(Error::TraceNotNested);
            }
            f.sets
                .iter()
                .copied()
                .filter(|&s| s & b == a)
                .map(|s| s & !b)
                .collect()
        }
    };
    Ok(Family {
        ground: f.ground,
        sets,
    })
}

// ---------------------------------------------------------------------------
// Overlap specifications and family systems.
// ---------------------------------------------------------------------------

/// Index of the unordered pair {k1,k2} (1-based, k1 ≠ k2) in the fixed order
/// (1,2),(1,3),…,(1,ℓ),(2,3),…,(ℓ−1,ℓ).
pub fn pair_index(ell: usize, k1: usize, k2: usize) -> usize {
    let (a, b) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
    debug_assert!(a >= 1 && b <= ell && a != b);
    (a - 1) * (2 * ell - a) / 2 + (b - a - 1)
}

/// All unordered pairs of [ℓ] in the fixed order.
pub fn pair_list(ell: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(ell * (ell.saturating_sub(1)) / 2);
    for k1 in 1..=ell {
        for k2 in k1 + 1..=ell {
            out.push((k1, k2));
        }
    }
    out
}

/// The symmetric overlap-bound matrix m_{k,k'} for ℓ ≥ 1 families.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OverlapSpec {
    ell: usize,
    m: Vec<u32>, // triangular, pair_index order
}

impl OverlapSpec {
    /// Uniform bound m for every pair.
    pub fn uniform(ell: usize, m: u32) -> Result<Self> {
        if ell < 1 {
            return Err(Error::Invalid("ℓ must be ≥ 1".into()));
        }
        Ok(OverlapSpec {
            ell,
            m: vec![m; ell * (ell - 1) / 2],
        })
    }

    /// From explicit entries; every unordered pair must appear exactly once.
    pub fn from_entries(ell: usize, entries: &[(usize, usize, u32)]) -> Result<Self> {
        if ell < 1 {
            return Err(Error::Invalid("ℓ must be ≥ 1".into()));
        }
        let npairs = ell * (ell - 1) / 2;
        let mut m = vec![u32::MAX; npairs];
        for &(k1, k2, v) in entries {
            if k1 < 1 || k2 < 1 || k1 > ell || k2 > ell || k1 == k2 {
                return Err(Error::Invalid(format!("bad pair ({k1},{k2}) for ℓ={ell}")));
            }
            let idx = pair_index(ell, k1, k2);
            if m[idx] != u32::MAX {
                return Err(Error::Invalid(format!("duplicate pair ({k1},{k2})")));
            }
            m[idx] = v;
        }
        if m.iter().any(|&v| v == u32::MAX) {
            return Err(Error::Invalid(format!(
                "overlap spec must define all {npairs} pairs"
            )));
        }
        Ok(OverlapSpec { ell, m })
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Bound for the unordered pair {k1,k2}.
    #[inline]
    pub fn m(&self, k1: usize, k2: usize) -> u32 {
        self.m[pair_index(self.ell, k1, k2)]
    }

    /// (k1, k2, m) triples in the fixed pair order.
    pub fn pairs(&self) -> Vec<(usize, usize, u32)> {
        pair_list(self.ell)
            .into_iter()
            .map(|(k1, k2)| (k1, k2, self.m(k1, k2)))
            .collect()
    }

    pub fn sum_m(&self) -> u64 {
        self.m.iter().map(|&v| v as u64).sum()
    }

    pub fn is_uniform(&self) -> Option<u32> {
        match self.m.first() {
            None => None,
            Some(&first) => self.m.iter().all(|&v| v == first).then_some(first),
        }
    }
}

/// ℓ families over one ground set plus their overlap bounds.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FamilySystem {
    spec: OverlapSpec,
    families: Vec<Family>,
}

impl FamilySystem {
    pub fn new(spec: OverlapSpec, families: Vec<Family>) -> Result<Self> {
        if families.len() != spec.ell() {
            return Err(Error::Invalid(format!(
                "spec has ℓ={} but {} families given",
                spec.ell(),
                families.len()
            )));
        }
        let g = families
            .first()
            .ok_or_else(|| Error::Invalid("a system needs ℓ ≥ 1 families".into()))?
            .ground();
        for f in &families {
            if f.ground() != g {
                return Err(Error::GroundMismatch(g.n(), f.ground().n()));
            }
        }
        Ok(FamilySystem { spec, families })
    }

    #[inline]
    pub fn spec(&self) -> &OverlapSpec {
        &self.spec
    }

    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.families[0].ground()
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.spec.ell()
    }

    /// Family k, 1-based.
    pub fn family(&self, k: usize) -> Result<&Family> {
        self.families
            .get(k.wrapping_sub(1))
            .ok_or(Error::BadFamilyIndex(k, self.ell()))
    }

    #[inline]
    pub fn families(&self) -> &[Family] {
        &self.families
    }

    /// Replace family k (1-based) with a new one over the same ground set.
    pub fn with_family(&self, k: usize, f: Family) -> Result<Self> {
        if k < 1 || k > self.ell() {
            return Err(Error::BadFamilyIndex(k, self.ell()));
        }
        if f.ground() != self.ground() {
            return Err(Error::GroundMismatch(self.ground().n(), f.ground().n()));
        }
        let mut families = self.families.clone();
        families[k - 1] = f;
        Ok(FamilySystem {
            spec: self.spec.clone(),
            families,
        })
    }

    /// ∏ |𝓕_k| as a big integer.
    pub fn product(&self) -> BigUint {
        let mut p = BigUint::one();
        for f in &self.families {
            p *= BigUint::from(f.len());
        }
        p
    }

    pub fn all_down_closed(&self) -> bool {
        self.families.iter().all(|f| f.is_down_closed())
    }
}

/// First overlap violation, if any: family indices are 1-based and
/// (k1, k2, f1, f2) is lexicographically minimal.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OverlapWitness {
    pub k1: usize,
    pub k2: usize,
    pub f1: SetWord,
    pub f2: SetWord,
}

/// Result of an overlap scan.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OverlapReport {
    pub ok: bool,
    pub witness: Option<OverlapWitness>,
}

/// Verify |F ∩ F'| ≤ m_{k,k'} for every cross-family pair; on failure report
/// the lexicographically first witness (k1, k2, f1, f2).
pub fn check_overlap(sys: &FamilySystem) -> OverlapReport {
    let ell = sys.ell();
    for k1 in 1..=ell {
        for k2 in k1 + 1..=ell {
            let bound = sys.spec().m(k1, k2);
            let fam1 = &sys.families[k1 - 1];
            let fam2 = &sys.families[k2 - 1];
            for &f1 in fam1.sets() {
                // Sets smaller than the bound can never violate it.
                if (f1.count_ones()) <= bound {
                    continue;
                }
                for &f2 in fam2.sets() {
                    if (f1 & f2).count_ones() > bound {
                        return OverlapReport {
                            ok: false,
                            witness: Some(OverlapWitness { k1, k2, f1, f2 }),
                        };
                    }
                }
            }
        }
    }
    OverlapReport {
        ok: true,
        witness: None,
    }
}

/// Normalized degree d(S, 𝓕) = |𝓕(S)| / |𝓕| as an exact rational.
pub fn degree(f: &Family, s: SetWord) -> Result<Ratio<i128>> {
    f.ground().check_mask(s)?;
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let count = f.count_supersets(s);
    Ok(Ratio::new(count as i128, f.len() as i128))
}

/// Directed degree d_{k1→k2}^{(≥s)}: the fraction of members of 𝓕_{k1}
/// meeting `center2` (the center of family k2) in at least `s` elements.
pub fn directed_degree(
    sys: &FamilySystem,
    k1: usize,
    k2: usize,
    center2: SetWord,
    s: u32,
) -> Result<Ratio<i128>> {
    if k2 < 1 || k2 > sys.ell() {
        return Err(Error::BadFamilyIndex(k2, sys.ell()));
    }
    if k1 == k2 {
        return Err(Error::Invalid("directed degree needs k1 ≠ k2".into()));
    }
    sys.ground().check_mask(center2)?;
    let f = sys.family(k1)?;
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if s == 0 {
        return Ok(Ratio::one());
    }
    let count = f
        .sets()
        .iter()
        .filter(|&&w| (w & center2).count_ones() >= s)
        .count();
    Ok(Ratio::new(count as i128, f.len() as i128))
}

/// Both sides of the product inequality
/// ∏_k |𝓐_k| ≤ ∏_{j=1..M} |⋁_{|S|=j} (⋀_{s∈S} 𝓐_s)|.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RinottReport {
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub ok: bool,
}

/// Evaluate the product inequality exactly. It holds unconditionally, so a
/// violation is reported as an internal error rather than `ok = false`.
pub fn rinott_check(families: &[Family]) -> Result<RinottReport> {
    let first = families
        .first()
        .ok_or_else(|| Error::Invalid("need at least one family".into()))?;
    let ground = first.ground();
    for f in families {
        if f.ground() != ground {
            return Err(Error::GroundMismatch(ground.n(), f.ground().n()));
        }
    }
    let m = families.len();
    let mut lhs = BigUint::one();
    for f in families {
        lhs *= BigUint::from(f.len());
    }
    let mut rhs = BigUint::one();
    let indices: Vec<usize> = (0..m).collect();
    for j in 1..=m {
        // ⋁ over all j-subsets S of the wedge-fold ⋀_{s∈S} 𝓐_s.
        let mut level: Option<Family> = None;
        let mut sel: Vec<usize> = (0..j).collect();
        loop {
            let mut w = families[indices[sel[0]]].clone();
            for &i in &sel[1..] {
                w = wedge(&w, &families[i])?;
            }
            level = Some(match level {
                None => w,
                Some(acc) => vee(&acc, &w)?,
            });
            // Next j-combination.
            let mut i = j;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if sel[i] != i + m - j {
                    break;
                }
                if i == 0 {
                    break;
                }
            }
            if sel[i] == i + m - j {
                break;
            }
            sel[i] += 1;
            for t in i + 1..j {
                sel[t] = sel[t - 1] + 1;
            }
        }
        rhs *= BigUint::from(level.expect("j-level nonempty").len());
    }
    if lhs > rhs {
        return Err(Error::Internal(format!(
            "product inequality violated: lhs {lhs} > rhs {rhs}"
        )));
    }
    Ok(RinottReport {
        lhs,
        rhs,
        ok: true,
    })
}

// ---------------------------------------------------------------------------
// Text formats.
//
// Family:   first significant line `n=<int>`, then one line per member set:
//           comma-separated strictly increasing elements, or `-` for ∅.
// System:   `ell=<int>`, then C(ℓ,2) lines `k k' m_{kk'}`, then the ℓ family
//           blocks in the family format, separated by lines `---`.
// Blank lines and lines starting with `#` are ignored everywhere.
// ---------------------------------------------------------------------------

impl Family {
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.ground.n());
        for &s in &self.sets {
            if s == 0 {
                out.push_str("-\n");
            } else {
                let elems: Vec<String> = mask_elems(s).iter().map(|e| e.to_string()).collect();
                out.push_str(&elems.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Family> {
        let mut lines = significant_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty family text".into()))?;
        let ground = parse_ground_header(header)?;
        let mut sets = Vec::new();
        for line in lines {
            sets.push(parse_set_line(ground, line)?);
        }
        Family::new(ground, sets)
    }
}

pub(crate) fn significant_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_ground_header(line: &str) -> Result<GroundSet> {
    let rest = line
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse(format!("expected `n=<int>`, got `{line}`")))?;
    let n: u32 = rest
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad ground size `{rest}`")))?;
    GroundSet::new(n)
}

pub(crate) fn parse_set_line(ground: GroundSet, line: &str) -> Result<SetWord> {
    if line == "-" {
        return Ok(0);
    }
    let mut prev = 0u32;
    let mut mask = 0u64;
    for tok in line.split(',') {
        let e: u32 = tok
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad element `{tok}` in `{line}`")))?;
        if e <= prev {
            return Err(Error::Parse(format!(
                "elements must be strictly increasing in `{line}`"
            )));
        }
        if e > ground.n() {
            return Err(Error::Parse(format!(
                "element {e} outside ground set [{}]",
                ground.n()
            )));
        }
        mask |= elem_mask(e);
        prev = e;
    }
    Ok(mask)
}

impl FamilySystem {
    pub fn to_text(&self) -> String {
        let mut out = format!("ell={}\n", self.ell());
        for (k1, k2, m) in self.spec.pairs() {
            out.push_str(&format!("{k1} {k2} {m}\n"));
        }
        for (i, f) in self.families.iter().enumerate() {
            if i > 0 {
                out.push_str("---\n");
            }
            out.push_str(&f.to_text());
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<FamilySystem> {
        let lines: Vec<&str> = significant_lines(text).collect();
        let mut pos = 0;
        let header = lines
            .first()
            .ok_or_else(|| Error::Parse("empty system text".into()))?;
        let ell: usize = header
            .strip_prefix("ell=")
            .ok_or_else(|| Error::Parse(format!("expected `ell=<int>`, got `{header}`")))?
            .trim()
            .parse()
            .map_err(|_| Error::Parse("bad ℓ".into()))?;
        pos += 1;
        let npairs = ell * ell.saturating_sub(1) / 2;
        let mut entries = Vec::with_capacity(npairs);
        for _ in 0..npairs {
            let line = lines
                .get(pos)
                .ok_or_else(|| Error::Parse("missing overlap-bound lines".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse(format!(
                    "expected `k k' m` line, got `{line}`"
                )));
            }
            let k1: usize = toks[0].parse().map_err(|_| Error::Parse("bad k".into()))?;
            let k2: usize = toks[1].parse().map_err(|_| Error::Parse("bad k'".into()))?;
            let m: u32 = toks[2].parse().map_err(|_| Error::Parse("bad m".into()))?;
            entries.push((k1, k2, m));
            pos += 1;
        }
        let spec = OverlapSpec::from_entries(ell, &entries)?;
        // Family blocks separated by `---`.
        let mut blocks: Vec<Vec<&str>> = vec![Vec::new()];
        for &line in &lines[pos..] {
            if line == "---" {
                blocks.push(Vec::new());
            } else {
                blocks.last_mut().unwrap().push(line);
            }
        }
        if blocks.len() != ell {
            return Err(Error::Parse(format!(
                "expected {ell} family blocks, found {}",
                blocks.len()
            )));
        }
        let mut families = Vec::with_capacity(ell);
        for block in blocks {
            let text = block.join("\n");
            families.push(Family::parse_text(&text)?);
        }
        FamilySystem::new(spec, families)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: u32) -> GroundSet {
        GroundSet::new(n).unwrap()
    }

    fn fam(n: u32, sets: &[SetWord]) -> Family {
        Family::new(g(n), sets.to_vec()).unwrap()
    }

    #[test]
    fn ground_set_caps_at_62() {
        assert!(GroundSet::new(62).is_ok());
        assert!(matches!(
            GroundSet::new(63),
            Err(Error::GroundTooLarge(63))
        ));
        assert_eq!(g(62).full(), (1u64 << 62) - 1);
        assert_eq!(g(0).full(), 0);
    }

    #[test]
    fn cube_low_layer_basics() {
        let c = Family::cube(g(3), 0b111).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.sets(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        let l = Family::low(g(4), g(4).full(), 1).unwrap();
        assert_eq!(l.sets(), &[0, 1, 2, 4, 8]);
        let layer = Family::layer(g(4), g(4).full(), 2).unwrap();
        assert_eq!(layer.len(), 6);
        assert!(layer.sets().iter().all(|s| s.count_ones() == 2));
        // Power-set cap is enforced.
        assert!(matches!(
            Family::cube_capped(g(30), g(30).full(), 24),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn wedge_with_empty_set_family_collapses() {
        let a = Family::just_empty_set(g(2));
        let b = Family::cube(g(2), 0b11).unwrap();
        let w = wedge(&a, &b).unwrap();
        assert_eq!(w.sets(), &[0]);
    }

    #[test]
    fn wedge_of_subsets_is_identity_here() {
        let a = fam(2, &[0b01, 0b10]);
        let b = fam(2, &[0b11]);
        assert_eq!(wedge(&a, &b).unwrap(), a);
    }

    #[test]
    fn wedge_full_square_is_power_set() {
        let b = Family::cube(g(2), 0b11).unwrap();
        assert_eq!(wedge(&b, &b).unwrap(), b);
    }

    #[test]
    fn vee_identity_and_products() {
        let f = fam(3, &[0b001, 0b110]);
        let e = Family::just_empty_set(g(3));
        assert_eq!(vee(&e, &f).unwrap(), f);
        let a = fam(2, &[0b01]);
        let b = fam(2, &[0b10]);
        assert_eq!(vee(&a, &b).unwrap().sets(), &[0b11]);
        let a = fam(2, &[0, 0b01]);
        let b = fam(2, &[0, 0b10]);
        assert_eq!(vee(&a, &b).unwrap().sets(), &[0, 1, 2, 3]);
    }

    #[test]
    fn vee_fold_empty_is_empty_set_family() {
        let v = vee_all(g(4), std::iter::empty()).unwrap();
        assert_eq!(v.sets(), &[0]);
    }

    #[test]
    fn join_paths_agree() {
        // Force both the bitset and transform paths and compare.
        let ground = g(8);
        let mut sets_a = Vec::new();
        let mut sets_b = Vec::new();
        let mut x: u64 = 0x9e3779b97f4a7c15;
        for _ in 0..150 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            sets_a.push((x >> 20) & 0xff);
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            sets_b.push((x >> 20) & 0xff);
        }
        let a = Family::new(ground, sets_a).unwrap();
        let b = Family::new(ground, sets_b).unwrap();
        for op in [Join::Union, Join::Intersection] {
            let via_bitset = join_pairwise_bitset(op, &a, &b);
            let via_transform = join_transform(op, &a, &b);
            let via_sorted = join_pairwise_sorted(op, &a, &b);
            assert_eq!(via_bitset, via_transform);
            assert_eq!(via_bitset, via_sorted);
        }
    }

    #[test]
    fn selectors_match_definitions() {
        // restrict: 2^[3] to {1,2}.
        let f = Family::cube(g(3), 0b111).unwrap();
        let r = select(&f, SelectMode::Restrict, 0, 0b011).unwrap();
        assert_eq!(r, Family::cube(g(3), 0b011).unwrap());
        // require on {∅,{1},{1,2}} with A={1} gives {∅,{2}}.
        let f = fam(2, &[0, 0b01, 0b11]);
        let r = select(&f, SelectMode::Require, 0b01, 0).unwrap();
        assert_eq!(r.sets(), &[0, 0b10]);
        // avoid A={1} keeps the A-free members.
        let r = select(&f, SelectMode::Avoid, 0b01, 0).unwrap();
        assert_eq!(r.sets(), &[0]);
        // trace: 2^{1,2} with A={1}, B={1,2} gives {∅}.
        let f = fam(2, &[0, 0b01, 0b10, 0b11]);
        let r = select(&f, SelectMode::Trace, 0b01, 0b11).unwrap();
        assert_eq!(r.sets(), &[0]);
        assert!(matches!(
            select(&f, SelectMode::Trace, 0b01, 0b10),
            Err(Error::TraceNotNested)
        ));
    }

    #[test]
    fn require_then_vee_reconstructs_supersets() {
        let f = fam(4, &[0b0000, 0b0011, 0b0101, 0b1011, 0b0110]);
        let a = 0b0011u64;
        let req = select(&f, SelectMode::Require, a, 0).unwrap();
        let back = vee(&req, &fam(4, &[a])).unwrap();
        let expected: Vec<SetWord> = f
            .sets()
            .iter()
            .copied()
            .filter(|&s| s & a == a)
            .collect();
        assert_eq!(back.sets(), expected.as_slice());
    }

    #[test]
    fn overlap_check_finds_first_witness() {
        let spec = OverlapSpec::uniform(2, 0).unwrap();
        let sys = FamilySystem::new(
            spec,
            vec![fam(2, &[0b01]), fam(2, &[0b10])],
        )
        .unwrap();
        assert!(check_overlap(&sys).ok);

        let spec = OverlapSpec::uniform(2, 1).unwrap();
        let sys = FamilySystem::new(
            spec,
            vec![fam(2, &[0b11]), fam(2, &[0b11])],
        )
        .unwrap();
        let rep = check_overlap(&sys);
        assert!(!rep.ok);
        assert_eq!(
            rep.witness,
            Some(OverlapWitness {
                k1: 1,
                k2: 2,
                f1: 0b11,
                f2: 0b11
            })
        );
    }

    #[test]
    fn down_closure_examples() {
        let f = fam(2, &[0b11]);
        let dc = f.down_closure();
        assert_eq!(dc.sets(), &[0, 1, 2, 3]);
        assert!(dc.is_down_closed());
        assert!(!f.is_down_closed());
        assert_eq!(dc.down_closure(), dc);

        let f = fam(2, &[0, 0b01, 0b11]);
        assert!(!f.is_down_closed());
        assert_eq!(f.down_closure().sets(), &[0, 1, 2, 3]);

        let full = Family::cube(g(3), 0b111).unwrap();
        assert!(full.is_down_closed());
        assert_eq!(full.down_closure(), full);
    }

    #[test]
    fn degree_examples() {
        let f = Family::cube(g(5), g(5).full()).unwrap();
        assert_eq!(degree(&f, 0b1).unwrap(), Ratio::new(1, 2));
        let f = Family::just_empty_set(g(3));
        assert_eq!(degree(&f, 0b1).unwrap(), Ratio::new(0, 1));
        let f = Family::low(g(4), g(4).full(), 1).unwrap();
        assert_eq!(degree(&f, 0b1).unwrap(), Ratio::new(1, 5));
        assert_eq!(degree(&f, 0).unwrap(), Ratio::new(1, 1));
        assert!(matches!(
            degree(&Family::empty(g(3)), 0),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn directed_degree_examples() {
        // Canonical two-family pair: C([4],≤1) and 2^[4].
        let spec = OverlapSpec::uniform(2, 1).unwrap();
        let sys = FamilySystem::new(
            spec,
            vec![
                Family::low(g(4), g(4).full(), 1).unwrap(),
                Family::cube(g(4), g(4).full()).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(
            directed_degree(&sys, 1, 2, g(4).full(), 1).unwrap(),
            Ratio::new(4, 5)
        );
        assert_eq!(
            directed_degree(&sys, 1, 2, g(4).full(), 0).unwrap(),
            Ratio::new(1, 1)
        );
        let sys2 = FamilySystem::new(
            OverlapSpec::uniform(2, 1).unwrap(),
            vec![Family::just_empty_set(g(4)), Family::cube(g(4), 0b1).unwrap()],
        )
        .unwrap();
        assert_eq!(
            directed_degree(&sys2, 1, 2, g(4).full(), 1).unwrap(),
            Ratio::new(0, 1)
        );
    }

    #[test]
    fn rinott_small_cases() {
        let a = Family::cube(g(1), 0b1).unwrap();
        let rep = rinott_check(&[a.clone(), a]).unwrap();
        assert_eq!(rep.lhs, BigUint::from(4u32));
        assert_eq!(rep.rhs, BigUint::from(4u32));
        assert!(rep.ok);

        let e = Family::just_empty_set(g(3));
        let rep = rinott_check(&[e]).unwrap();
        assert_eq!(rep.lhs, BigUint::from(1u32));
        assert_eq!(rep.rhs, BigUint::from(1u32));
    }

    #[test]
    fn family_text_round_trip() {
        let f = fam(5, &[0, 0b00011, 0b10100]);
        let text = f.to_text();
        assert_eq!(text, "n=5\n-\n1,2\n3,5\n");
        assert_eq!(Family::parse_text(&text).unwrap(), f);
        // Comments and blanks are ignored.
        let f2 = Family::parse_text("# c\n\nn=5\n-\n1,2\n\n3,5\n").unwrap();
        assert_eq!(f2, f);
        assert!(Family::parse_text("n=5\n2,1\n").is_err());
        assert!(Family::parse_text("n=5\n6\n").is_err());
    }

    #[test]
    fn system_text_round_trip() {
        let spec = OverlapSpec::from_entries(3, &[(1, 2, 1), (1, 3, 0), (2, 3, 2)]).unwrap();
        let sys = FamilySystem::new(
            spec,
            vec![
                fam(3, &[0, 0b001]),
                fam(3, &[0, 0b010, 0b110]),
                Family::empty(g(3)),
            ],
        )
        .unwrap();
        let text = sys.to_text();
        let back = FamilySystem::parse_text(&text).unwrap();
        assert_eq!(back, sys);
        // An empty family block round-trips as an empty block.
        assert!(text.ends_with("---\nn=3\n"));
    }

    #[test]
    fn pair_index_layout() {
        assert_eq!(pair_index(5, 1, 2), 0);
        assert_eq!(pair_index(5, 1, 5), 3);
        assert_eq!(pair_index(5, 2, 3), 4);
        assert_eq!(pair_index(5, 4, 5), 9);
        assert_eq!(pair_index(5, 5, 4), 9);
        let pairs = pair_list(4);
        assert_eq!(pairs, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            assert_eq!(pair_index(4, a, b), i);
        }
    }
}
