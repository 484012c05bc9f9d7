//! Oriented graphs on [ℓ] and the common-in-neighbor pair functional.
//!
//! # Overview
//!
//! An [`OrientedGraph`] assigns at most one direction to each vertex pair
//! (pairs may stay unoriented). The functional [`r_functional`] counts the
//! unordered pairs {s₁,s₂} whose in-neighbor sets intersect; [`max_r`]
//! maximizes it exactly over all complete orientations (tournaments) for
//! ℓ ≤ 7 and returns the isomorphism-reduced maximizer list. [`paley`]
//! builds the quadratic-residue tournament for primes p ≡ 3 (mod 4), and
//! [`random_tournament`] plus [`success_probability_bound`] cover the
//! probabilistic existence argument.
//!
//! # Design
//!
//! Tournaments are encoded as C(ℓ,2)-bit words in the fixed pair order
//! (1,2),(1,3),…,(ℓ−1,ℓ): bit t = 1 orients the pair low→high. Isomorphism
//! reduction applies all ℓ! vertex permutations, but only to maximizers; a
//! maximizer scanned in ascending word order that was not produced as the
//! image of an earlier one is exactly the minimum of a fresh orbit.

use crate::family::{elem_mask, pair_index, pair_list, SetWord};
use crate::{Error, Result};
use num::rational::{BigRational, Ratio};
use num::{BigInt, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// Largest ℓ for which complete-orientation code words fit in a `u64`.
pub const MAX_CODE_ELL: usize = 11;

/// Enumeration cap for [`max_r`] (2^21 tournaments at ℓ = 7).
pub const MAX_R_ELL: usize = 7;

/// An orientation of some pairs of [ℓ]: at most one direction per pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrientedGraph {
    ell: usize,
    out: Vec<SetWord>, // out[k-1] bit j-1 set ⟺ edge k→j
}

impl OrientedGraph {
    pub fn new(ell: usize) -> Result<Self> {
        if ell < 1 || ell > 62 {
            return Err(Error::Invalid(format!("ℓ = {ell} outside 1..=62")));
        }
        Ok(OrientedGraph {
            ell,
            out: vec![0; ell],
        })
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.ell
    }

    fn check_vertex(&self, k: usize) -> Result<()> {
        if k < 1 || k > self.ell {
            return Err(Error::Invalid(format!(
                "vertex {k} outside [{}]",
                self.ell
            )));
        }
        Ok(())
    }

    /// Orient k1 → k2. Errors if the pair is already oriented either way.
    pub fn add_edge(&mut self, k1: usize, k2: usize) -> Result<()> {
        self.check_vertex(k1)?;
        self.check_vertex(k2)?;
        if k1 == k2 {
            return Err(Error::Invalid(format!("loop at vertex {k1}")));
        }
        if self.has_edge(k1, k2) || self.has_edge(k2, k1) {
            return Err(Error::Invalid(format!(
                "pair {{{k1},{k2}}} already oriented"
            )));
        }
        self.out[k1 - 1] |= elem_mask(k2 as u32);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, k1: usize, k2: usize) -> bool {
        k1 >= 1
            && k1 <= self.ell
            && k2 >= 1
            && k2 <= self.ell
            && self.out[k1 - 1] & elem_mask(k2 as u32) != 0
    }

    /// Out-neighbor mask of k (bit j−1 ⟺ k→j).
    pub fn out_mask(&self, k: usize) -> Result<SetWord> {
        self.check_vertex(k)?;
        Ok(self.out[k - 1])
    }

    /// In-neighbor mask of k.
    pub fn in_mask(&self, k: usize) -> Result<SetWord> {
        self.check_vertex(k)?;
        let mut m = 0;
        for j in 1..=self.ell {
            if self.has_edge(j, k) {
                m |= elem_mask(j as u32);
            }
        }
        Ok(m)
    }

    /// (In_k, Out_k) as vertex masks.
    pub fn in_out(&self, k: usize) -> Result<(SetWord, SetWord)> {
        Ok((self.in_mask(k)?, self.out_mask(k)?))
    }

    /// Directed edges (k, k') in the fixed unordered-pair scan order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k1, k2) in pair_list(self.ell) {
            if self.has_edge(k1, k2) {
                out.push((k1, k2));
            } else if self.has_edge(k2, k1) {
                out.push((k2, k1));
            }
        }
        out
    }

    /// Every pair oriented?
    pub fn is_tournament(&self) -> bool {
        pair_list(self.ell)
            .into_iter()
            .all(|(k1, k2)| self.has_edge(k1, k2) || self.has_edge(k2, k1))
    }

    /// Graph with vertex k relabeled to perm[k−1] (perm is a permutation of
    /// 1..=ℓ).
    pub fn relabel(&self, perm: &[usize]) -> Result<OrientedGraph> {
        if perm.len() != self.ell {
            return Err(Error::Invalid("permutation length ≠ ℓ".into()));
        }
        let mut check: Vec<bool> = vec![false; self.ell];
        for &p in perm {
            if p < 1 || p > self.ell || check[p - 1] {
                return Err(Error::Invalid("not a permutation of [ℓ]".into()));
            }
            check[p - 1] = true;
        }
        let mut g = OrientedGraph::new(self.ell)?;
        for (k1, k2) in self.edges() {
            g.add_edge(perm[k1 - 1], perm[k2 - 1])?;
        }
        Ok(g)
    }

    /// Text form: `ell=<int>` then one `k -> k'` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("ell={}\n", self.ell);
        for (k1, k2) in self.edges() {
            s.push_str(&format!("{k1} -> {k2}\n"));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<OrientedGraph> {
        let mut lines = crate::family::significant_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty oriented-graph text".into()))?;
        let ell: usize = header
            .strip_prefix("ell=")
            .ok_or_else(|| Error::Parse(format!("expected `ell=<int>`, got `{header}`")))?
            .trim()
            .parse()
            .map_err(|_| Error::Parse("bad ℓ".into()))?;
        let mut g = OrientedGraph::new(ell)?;
        for line in lines {
            let (a, b) = line
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("expected `k -> k'`, got `{line}`")))?;
            let k1: usize = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex in `{line}`")))?;
            let k2: usize = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex in `{line}`")))?;
            g.add_edge(k1, k2)
                .map_err(|e| Error::Parse(format!("edge `{line}`: {e}")))?;
        }
        Ok(g)
    }
}

/// r(T): the number of unordered pairs {s₁,s₂} with In_{s₁} ∩ In_{s₂} ≠ ∅.
pub fn r_functional(t: &OrientedGraph) -> u32 {
    let ell = t.ell;
    let mut in_masks = vec![0u64; ell];
    for k in 1..=ell {
        let mut rest = t.out[k - 1];
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            in_masks[j] |= elem_mask(k as u32);
        }
    }
    let mut r = 0;
    for s1 in 0..ell {
        for s2 in s1 + 1..ell {
            if in_masks[s1] & in_masks[s2] != 0 {
                r += 1;
            }
        }
    }
    r
}

/// Decode a C(ℓ,2)-bit word (bit t = 1 ⟺ the t-th pair is oriented low→high)
/// into a tournament.
pub fn decode_tournament(ell: usize, word: u64) -> Result<OrientedGraph> {
    if ell > MAX_CODE_ELL {
        return Err(Error::Invalid(format!(
            "code words support ℓ ≤ {MAX_CODE_ELL}, got {ell}"
        )));
    }
    let mut g = OrientedGraph::new(ell)?;
    for (t, (k1, k2)) in pair_list(ell).into_iter().enumerate() {
        if word >> t & 1 == 1 {
            g.add_edge(k1, k2)?;
        } else {
            g.add_edge(k2, k1)?;
        }
    }
    Ok(g)
}

/// Inverse of [`decode_tournament`]; errors unless every pair is oriented.
pub fn encode_tournament(t: &OrientedGraph) -> Result<u64> {
    if t.ell > MAX_CODE_ELL {
        return Err(Error::Invalid(format!(
            "code words support ℓ ≤ {MAX_CODE_ELL}, got {}",
            t.ell
        )));
    }
    let mut word = 0u64;
    for (i, (k1, k2)) in pair_list(t.ell).into_iter().enumerate() {
        if t.has_edge(k1, k2) {
            word |= 1 << i;
        } else if !t.has_edge(k2, k1) {
            return Err(Error::Invalid(format!(
                "pair {{{k1},{k2}}} unoriented; not a tournament"
            )));
        }
    }
    Ok(word)
}

/// All permutations of 0..n via Heap's algorithm, in a deterministic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_recurse(n, &mut cur, &mut out);
    out
}

fn heap_recurse(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_recurse(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Per-permutation slot table: image bit of pair slot t lands at
/// `dst_slot[t]`, XORed with `flip[t]` (set when the permutation reverses
/// the pair's low/high order).
struct PermTable {
    dst_slot: Vec<u8>,
    flip: Vec<bool>,
}

fn perm_tables(ell: usize) -> Vec<PermTable> {
    let pairs = pair_list(ell);
    permutations(ell)
        .into_iter()
        .map(|perm| {
            let mut dst_slot = Vec::with_capacity(pairs.len());
            let mut flip = Vec::with_capacity(pairs.len());
            for &(k1, k2) in &pairs {
                let (i1, i2) = (perm[k1 - 1] + 1, perm[k2 - 1] + 1);
                dst_slot.push(pair_index(ell, i1.min(i2), i1.max(i2)) as u8);
                flip.push(i1 > i2);
            }
            PermTable { dst_slot, flip }
        })
        .collect()
}

fn apply_table(word: u64, npairs: usize, table: &PermTable) -> u64 {
    let mut out = 0u64;
    for t in 0..npairs {
        let bit = (word >> t & 1 == 1) ^ table.flip[t];
        if bit {
            out |= 1 << table.dst_slot[t];
        }
    }
    out
}

/// Lex-min code word over all vertex relabelings: a complete isomorphism
/// invariant for tournaments with ℓ ≤ 9.
pub fn canonical_code(t: &OrientedGraph) -> Result<u64> {
    if t.ell > 9 {
        return Err(Error::CapExceeded(format!(
            "canonical_code enumerates ℓ! permutations; ℓ = {} > 9",
            t.ell
        )));
    }
    let word = encode_tournament(t)?;
    let npairs = t.ell * (t.ell - 1) / 2;
    Ok(perm_tables(t.ell)
        .iter()
        .map(|tab| apply_table(word, npairs, tab))
        .min()
        .expect("ℓ ≥ 1 has at least the identity permutation"))
}

/// Exact maximum of r over all tournaments on [ℓ], with every maximizer up
/// to isomorphism (each witness is the lex-min code word of its orbit,
/// listed in ascending order).
pub fn max_r(ell: usize) -> Result<(u32, Vec<OrientedGraph>)> {
    if ell > MAX_R_ELL {
        return Err(Error::CapExceeded(format!(
            "max_r enumerates 2^C(ℓ,2) tournaments; ℓ = {ell} > {MAX_R_ELL}"
        )));
    }
    if ell < 1 {
        return Err(Error::Invalid("ℓ must be ≥ 1".into()));
    }
    let pairs = pair_list(ell);
    let npairs = pairs.len();
    let total: u64 = 1u64 << npairs;

    // Scan partitioned by high-order word bits; each chunk reports its own
    // maximum and maximizer list, merged in chunk order for determinism.
    let chunks: u64 = if npairs >= 8 { 64 } else { 1 };
    let span = total / chunks;
    let pair_idx: Vec<(u8, u8)> = pairs
        .iter()
        .map(|&(k1, k2)| ((k1 - 1) as u8, (k2 - 1) as u8))
        .collect();

    let scan_chunk = |c: u64| -> (u32, Vec<u64>) {
        let mut best = 0u32;
        let mut words = Vec::new();
        let mut in_masks = [0u16; MAX_R_ELL];
        for word in c * span..(c + 1) * span {
            in_masks[..ell].fill(0);
            for (t, &(a, b)) in pair_idx.iter().enumerate() {
                if word >> t & 1 == 1 {
                    in_masks[b as usize] |= 1 << a;
                } else {
                    in_masks[a as usize] |= 1 << b;
                }
            }
            let mut r = 0u32;
            for &(a, b) in &pair_idx {
                if in_masks[a as usize] & in_masks[b as usize] != 0 {
                    r += 1;
                }
            }
            if r > best {
                best = r;
                words.clear();
                words.push(word);
            } else if r == best {
                words.push(word);
            }
        }
        (best, words)
    };

    let chunk_results: Vec<(u32, Vec<u64>)> = (0..chunks).into_par_iter().map(scan_chunk).collect();
    let best = chunk_results.iter().map(|&(b, _)| b).max().unwrap();
    // Ascending concatenation: chunks cover ascending ranges.
    let maximizers: Vec<u64> = chunk_results
        .iter()
        .filter(|&&(b, _)| b == best)
        .flat_map(|(_, ws)| ws.iter().copied())
        .collect();

    // Orbit-insertion dedup: walking ascending, a word not yet seen is the
    // minimum of its isomorphism orbit.
    let tables = perm_tables(ell);
    let mut seen = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for &w in &maximizers {
        if seen.contains(&w) {
            continue;
        }
        reps.push(w);
        for tab in &tables {
            seen.insert(apply_table(w, npairs, tab));
        }
    }
    let witnesses = reps
        .into_iter()
        .map(|w| decode_tournament(ell, w).expect("decoded from scan"))
        .collect();
    Ok((best, witnesses))
}

/// The quadratic-residue tournament on Z_p (vertex x+1 for x ∈ Z_p):
/// x → y iff x − y is a nonzero square mod p. Needs p prime, p ≡ 3 (mod 4).
pub fn paley(p: u32) -> Result<OrientedGraph> {
    if p < 3 || p > 61 || !is_prime(p) || p % 4 != 3 {
        return Err(Error::Invalid(format!(
            "Paley tournament needs a prime p ≡ 3 (mod 4) with 3 ≤ p ≤ 61, got {p}"
        )));
    }
    let mut qr = vec![false; p as usize];
    for x in 1..p {
        qr[((x as u64 * x as u64) % p as u64) as usize] = true;
    }
    let mut g = OrientedGraph::new(p as usize)?;
    for x in 0..p {
        for y in 0..p {
            if x != y && qr[((x + p - y) % p) as usize] {
                g.add_edge(x as usize + 1, y as usize + 1)?;
            }
        }
    }
    Ok(g)
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A uniformly random tournament: one fair draw per pair in the fixed pair
/// order, from a deterministic seeded generator.
pub fn random_tournament(ell: usize, seed: u64) -> Result<OrientedGraph> {
    let mut g = OrientedGraph::new(ell)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for (k1, k2) in pair_list(ell) {
        if rng.gen::<bool>() {
            g.add_edge(k1, k2)?;
        } else {
            g.add_edge(k2, k1)?;
        }
    }
    Ok(g)
}

/// 1 − C(ℓ,2)·(3/4)^{ℓ−2}: a lower bound on the probability that a random
/// tournament attains r = C(ℓ,2). May be negative for small ℓ; returned
/// as-is.
pub fn success_probability_bound(ell: usize) -> BigRational {
    if ell < 2 {
        return BigRational::one();
    }
    let pairs = BigInt::from((ell * (ell - 1) / 2) as u64);
    let p34 = BigRational::new(BigInt::from(3), BigInt::from(4));
    let term = BigRational::from(pairs) * num::pow::pow(p34, ell - 2);
    BigRational::one() - term
}

/// Fraction of `samples` seeded random tournaments with r = C(ℓ,2).
pub fn mc_success_fraction(ell: usize, samples: u64, seed: u64) -> Result<Ratio<i128>> {
    if ell < 1 || ell > 62 {
        return Err(Error::Invalid(format!("ℓ = {ell} outside 1..=62")));
    }
    if samples == 0 {
        return Err(Error::Invalid("need at least one sample".into()));
    }
    let full = (ell * (ell - 1) / 2) as u32;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hits: i128 = 0;
    for _ in 0..samples {
        let mut g = OrientedGraph::new(ell)?;
        for (k1, k2) in pair_list(ell) {
            if rng.gen::<bool>() {
                g.add_edge(k1, k2)?;
            } else {
                g.add_edge(k2, k1)?;
            }
        }
        if r_functional(&g) == full {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, samples as i128))
}

/// The five-vertex maximizer with one 3-cycle feeding two common sinks:
/// 1→2→3→1, every k ∈ [3] beats 4 and 5, and 4→5 by convention (the other
/// choice gives an isomorphic graph).
pub fn t5_graph() -> OrientedGraph {
    let mut g = OrientedGraph::new(5).expect("5 ≤ 62");
    for (a, b) in [
        (1, 2),
        (2, 3),
        (3, 1),
        (1, 4),
        (2, 4),
        (3, 4),
        (1, 5),
        (2, 5),
        (3, 5),
        (4, 5),
    ] {
        g.add_edge(a, b).expect("valid fixed edge list");
    }
    g
}
