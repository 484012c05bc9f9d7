//! Lexicographic order on k-sets, initial segments, and shadows.
//!
//! # Overview
//!
//! The order on equal-size sets is A < B iff min(A △ B) ∈ A, which for
//! bitmasks is decided by the lowest differing bit. [`initial_segment`]
//! produces the first `size` k-subsets of [n] in this order by combinatorial
//! successor generation (never by materializing and sorting all of C([n],k)).
//! [`upper_shadow`] / [`lower_shadow`] move a [`UniformFamily`] one layer up
//! or down, and [`kk_verify`] checks that the lex initial segment minimizes
//! the upper-shadow size among families of the same cardinality — either
//! exhaustively (hard-capped at C(n,k) ≤ 12) or on seeded random samples.
//!
//! # Design
//!
//! Shadow sizes are compared against the materialized initial segment; the
//! cascade-binomial bound formula is deliberately not implemented.

use crate::family::{elem_mask, GroundSet, SetWord};
use crate::{Error, Family, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::cmp::Ordering;

/// A family whose members all have the same size `k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniformFamily {
    ground: GroundSet,
    k: u32,
    sets: Family,
}

impl UniformFamily {
    /// Wrap a family after checking every member has popcount `k`.
    pub fn new(sets: Family, k: u32) -> Result<Self> {
        if let Some(&bad) = sets.sets().iter().find(|s| s.count_ones() != k) {
            return Err(Error::Invalid(format!(
                "set {bad:#b} has size {}, expected uniformity {k}",
                bad.count_ones()
            )));
        }
        Ok(UniformFamily {
            ground: sets.ground(),
            k,
            sets,
        })
    }

    /// Infer the uniformity from the members; errors on mixed sizes or on an
    /// empty family (where k is ambiguous).
    pub fn infer(sets: Family) -> Result<Self> {
        let k = sets
            .sets()
            .first()
            .map(|s| s.count_ones())
            .ok_or_else(|| Error::Invalid("cannot infer uniformity of an empty family".into()))?;
        Self::new(sets, k)
    }

    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn family(&self) -> &Family {
        &self.sets
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// The element-wise complement image {[n]∖F : F ∈ 𝓕} (uniformity n−k).
    pub fn complement_image(&self) -> UniformFamily {
        let full = self.ground.full();
        let mut masks: Vec<SetWord> = self.sets.sets().iter().map(|&s| full & !s).collect();
        masks.sort_unstable();
        UniformFamily {
            ground: self.ground,
            k: self.ground.n() - self.k,
            sets: Family::from_sorted_unchecked(self.ground, masks),
        }
    }
}

/// Compare equal-size sets: A < B iff min(A △ B) ∈ A.
pub fn lex_compare(a: SetWord, b: SetWord) -> Ordering {
    let d = a ^ b;
    if d == 0 {
        return Ordering::Equal;
    }
    let low = d & d.wrapping_neg();
    if a & low != 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// C(n, k) as u128 (exact for n ≤ 62).
pub(crate) fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// The rank-`r` k-subset of [n] in the lex order (0-based rank).
pub(crate) fn kset_unrank(n: u32, k: u32, mut r: u128) -> SetWord {
    let mut mask = 0u64;
    let mut c = 1u32; // smallest candidate element
    let mut remaining = k;
    while remaining > 0 {
        // Sets with current prefix and next element c: choose the remaining
        // `remaining−1` elements from {c+1, …, n}.
        let count = binom((n - c) as u64, (remaining - 1) as u64);
        if r < count {
            mask |= elem_mask(c);
            remaining -= 1;
        } else {
            r -= count;
        }
        c += 1;
    }
    mask
}

/// Lex successor of a k-set within [n]; None when `s` is the last one.
fn lex_successor(s: SetWord, n: u32) -> Option<SetWord> {
    let elems = crate::family::mask_elems(s);
    let k = elems.len();
    // Rightmost element that can still be pushed up.
    let mut i = k;
    while i > 0 {
        i -= 1;
        if elems[i] < n - (k - 1 - i) as u32 {
            let mut out = 0u64;
            for &e in &elems[..i] {
                out |= elem_mask(e);
            }
            let mut e = elems[i] + 1;
            for _ in i..k {
                out |= elem_mask(e);
                e += 1;
            }
            return Some(out);
        }
    }
    None
}

/// The first `size` k-subsets of [n] under the lex order.
pub fn initial_segment(n: u32, k: u32, size: u64) -> Result<UniformFamily> {
    let ground = GroundSet::new(n)?;
    let total = binom(n as u64, k as u64);
    if (size as u128) > total {
        return Err(Error::Invalid(format!(
            "segment size {size} exceeds C({n},{k}) = {total}"
        )));
    }
    let mut masks = Vec::with_capacity(size as usize);
    if size > 0 {
        let mut cur: SetWord = if k == 0 { 0 } else { (1u64 << k) - 1 };
        masks.push(cur);
        for _ in 1..size {
            cur = lex_successor(cur, n).expect("size checked against C(n,k)");
            masks.push(cur);
        }
    }
    masks.sort_unstable();
    Ok(UniformFamily {
        ground,
        k,
        sets: Family::from_sorted_unchecked(ground, masks),
    })
}

/// All (k+1)-subsets of [n] containing some member. Needs k < n.
pub fn upper_shadow(f: &UniformFamily) -> Result<UniformFamily> {
    let n = f.ground.n();
    if f.k >= n {
        return Err(Error::Invalid(format!(
            "upper shadow undefined at uniformity k = n = {n}"
        )));
    }
    let full = f.ground.full();
    let mut out: Vec<SetWord> = Vec::new();
    for &s in f.sets.sets() {
        let mut rest = full & !s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            out.push(s | bit);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(UniformFamily {
        ground: f.ground,
        k: f.k + 1,
        sets: Family::from_sorted_unchecked(f.ground, out),
    })
}

/// All (k−1)-subsets contained in some member. Needs k > 0.
pub fn lower_shadow(f: &UniformFamily) -> Result<UniformFamily> {
    if f.k == 0 {
        return Err(Error::Invalid(
            "lower shadow undefined at uniformity k = 0".into(),
        ));
    }
    let mut out: Vec<SetWord> = Vec::new();
    for &s in f.sets.sets() {
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            out.push(s & !bit);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(UniformFamily {
        ground: f.ground,
        k: f.k - 1,
        sets: Family::from_sorted_unchecked(f.ground, out),
    })
}

/// How `kk_verify` explores families of the given size.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum KkMode {
    /// Enumerate all C(C(n,k), size) families; requires C(n,k) ≤ 12.
    Exhaustive,
    /// Check `samples` uniformly random families, seeded.
    Sample { samples: u64, seed: u64 },
}

/// Hard cap on C(n,k) for exhaustive verification (2^12 subsets per size).
pub const KK_EXHAUSTIVE_CAP: u64 = 12;

/// Check |∂_u(initial segment of `size`)| ≤ |∂_u(F)| for every (exhaustive)
/// or sampled family F of `size` k-sets in [n].
pub fn kk_verify(n: u32, k: u32, size: u64, mode: KkMode) -> Result<bool> {
    let ground = GroundSet::new(n)?;
    if k >= n {
        return Err(Error::Invalid(
            "kk_verify needs k < n so the upper shadow exists".into(),
        ));
    }
    let total = binom(n as u64, k as u64);
    if (size as u128) > total {
        return Err(Error::Invalid(format!(
            "size {size} exceeds C({n},{k}) = {total}"
        )));
    }
    let seg = initial_segment(n, k, size)?;
    let seg_shadow = upper_shadow(&seg)?.len();

    let shadow_len = |masks: &[SetWord]| -> usize {
        let fam = Family::new(ground, masks.to_vec()).expect("masks in ground");
        let uf = UniformFamily {
            ground,
            k,
            sets: fam,
        };
        upper_shadow(&uf).expect("k < n").len()
    };

    match mode {
        KkMode::Exhaustive => {
            let total = total as u64;
            if total > KK_EXHAUSTIVE_CAP {
                return Err(Error::CapExceeded(format!(
                    "exhaustive kk_verify needs C(n,k) ≤ {KK_EXHAUSTIVE_CAP}, got {total}"
                )));
            }
            let all: Vec<SetWord> = (0..total).map(|r| kset_unrank(n, k, r as u128)).collect();
            // Walk all subsets of C([n],k) and test those of the right size.
            for choice in 0u64..(1u64 << total) {
                if choice.count_ones() as u64 != size {
                    continue;
                }
                let masks: Vec<SetWord> = (0..total)
                    .filter(|&i| choice >> i & 1 == 1)
                    .map(|i| all[i as usize])
                    .collect();
                if shadow_len(&masks) < seg_shadow {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        KkMode::Sample { samples, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let total_usize: usize = total.try_into().map_err(|_| {
                Error::CapExceeded(format!("C({n},{k}) = {total} too large to sample from"))
            })?;
            for _ in 0..samples {
                let picks =
                    rand::seq::index::sample(&mut rng, total_usize, size as usize).into_vec();
                let masks: Vec<SetWord> = picks
                    .into_iter()
                    .map(|r| kset_unrank(n, k, r as u128))
                    .collect();
                if shadow_len(&masks) < seg_shadow {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
