//! Edge colorings of the complete (m+1)-uniform hypergraph and the
//! clique-count product — the brute-force oracle for the extremal problem.
//!
//! # Overview
//!
//! Coloring every (m+1)-subset of [n] with one of ℓ colors, let k_i count
//! the color-i-monochromatic vertex subsets (every (m+1)-subset inside
//! colored i; sets of size ≤ m qualify vacuously for every color). The
//! maximum of k_1⋯k_ℓ over colorings equals the maximum of ∏|𝓕_k| over
//! m-overlapping systems; [`families_from_coloring`] realizes the forward
//! direction by collecting the clique families. [`exact_search`] maximizes
//! the product exhaustively with canonical pruning; [`anneal_search`] is a
//! seeded simulated-annealing heuristic for sizes beyond exact reach.
//!
//! # Design
//!
//! * Edges are indexed by their rank in the lex order on (m+1)-sets.
//! * Clique counting is a subset DP: a per-mask bitmask of colors for which
//!   the mask is monochromatic, extended one vertex at a time — never a
//!   rescan of all edges per subset.
//! * Canonical pruning fixes color 1 on the first edge and requires colors
//!   to be first-used in increasing order (restricted growth), which keeps
//!   exactly one representative per color-permutation orbit — the orbit's
//!   lex-least member — so the first optimum found in ascending-color DFS
//!   is the lexicographically smallest optimal coloring outright.
//! * The search tree is split at a fixed depth into prefix tasks (
//!   independent of worker count), each with an equal node-budget share;
//!   results merge in prefix order, so outputs are identical for any
//!   thread count.
//! * Products are arbitrary-precision; per-color counts fit u64 under the
//!   n ≤ 20 table cap.

use crate::family::{GroundSet, OverlapSpec, SetWord};
use crate::shadow::{binom, kset_unrank};
use crate::{Error, Family, FamilySystem, Result};
use num::{BigUint, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// Cap on n for clique counting and search (2^n DP tables).
pub const MAX_CLIQUE_N: u32 = 20;

/// Cap on the number of colors (color sets live in a u64 bitmask).
pub const MAX_ELL: usize = 64;

/// Cap on edge arity (m + 1).
pub const MAX_ARITY: u32 = 8;

/// Default node budget for [`exact_search`].
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// A total color assignment to the (m+1)-subsets of [n].
///
/// Edge e is identified by its rank in the lex order on (m+1)-sets; colors
/// are 1-based. Arity 1 (m = 0) colors the singletons.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EdgeColoring {
    ground: GroundSet,
    arity: u32,
    colors: Vec<u8>,
}

impl EdgeColoring {
    /// Validates the color vector length (C(n, arity)) and range (≥ 1).
    pub fn new(ground: GroundSet, arity: u32, colors: Vec<u8>) -> Result<Self> {
        if arity < 1 || arity > MAX_ARITY {
            return Err(Error::Invalid(format!(
                "edge arity {arity} outside 1..={MAX_ARITY}"
            )));
        }
        let expect = binom(ground.n() as u64, arity as u64);
        if expect > 1 << 24 {
            return Err(Error::CapExceeded(format!(
                "C({}, {arity}) = {expect} edges exceeds the 2^24 storage cap",
                ground.n()
            )));
        }
        if colors.len() as u128 != expect {
            return Err(Error::Invalid(format!(
                "{} colors given for {expect} edges",
                colors.len()
            )));
        }
        if colors.iter().any(|&c| c == 0) {
            return Err(Error::Invalid("colors are 1-based; found 0".into()));
        }
        Ok(EdgeColoring {
            ground,
            arity,
            colors,
        })
    }

    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    #[inline]
    pub fn arity(&self) -> u32 {
        self.arity
    }

    /// m = arity − 1.
    #[inline]
    pub fn m(&self) -> u32 {
        self.arity - 1
    }

    #[inline]
    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.colors.len()
    }

    /// Edge mask of rank r in the lex order.
    pub fn edge_mask(&self, r: usize) -> SetWord {
        kset_unrank(self.ground.n(), self.arity, r as u128)
    }

    /// Largest color value used (0 for the edgeless coloring).
    pub fn max_color(&self) -> u8 {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    /// Text form: header `n=<int> arity=<int> ell=<int>`, then one line per
    /// edge `e1,e2,…,e_arity -> c` in lex edge order.
    pub fn to_text(&self, ell: usize) -> String {
        let mut out = format!("n={} arity={} ell={}\n", self.ground.n(), self.arity, ell);
        for (r, &c) in self.colors.iter().enumerate() {
            let elems: Vec<String> = crate::family::mask_elems(self.edge_mask(r))
                .iter()
                .map(|e| e.to_string())
                .collect();
            out.push_str(&format!("{} -> {c}\n", elems.join(",")));
        }
        out
    }

    /// Parse the text form; returns the coloring and the declared ℓ.
    pub fn parse_text(text: &str) -> Result<(EdgeColoring, usize)> {
        let mut lines = crate::family::significant_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty coloring text".into()))?;
        let mut n = None;
        let mut arity = None;
        let mut ell = None;
        for tok in header.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
            let v: u64 = val
                .parse()
                .map_err(|_| Error::Parse(format!("bad value in `{tok}`")))?;
            match key {
                "n" => n = Some(v as u32),
                "arity" => arity = Some(v as u32),
                "ell" => ell = Some(v as usize),
                _ => return Err(Error::Parse(format!("unknown header key `{key}`"))),
            }
        }
        let (n, arity, ell) = match (n, arity, ell) {
            (Some(n), Some(a), Some(l)) => (n, a, l),
            _ => return Err(Error::Parse("header needs n=, arity=, ell=".into())),
        };
        if ell < 1 || ell > MAX_ELL {
            return Err(Error::Parse(format!("ell={ell} outside 1..={MAX_ELL}")));
        }
        let ground = GroundSet::new(n)?;
        let mut colors = Vec::new();
        for line in lines {
            let (elems_part, color_part) = line
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("expected `e1,… -> c`, got `{line}`")))?;
            let mask = crate::family::parse_set_line(ground, elems_part.trim())?;
            let expect = kset_unrank(n, arity, colors.len() as u128);
            if mask != expect {
                return Err(Error::Parse(format!(
                    "edge `{}` out of lex order (expected rank {})",
                    elems_part.trim(),
                    colors.len()
                )));
            }
            let c: u8 = color_part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad color in `{line}`")))?;
            if c as usize > ell || c == 0 {
                return Err(Error::Parse(format!("color {c} outside 1..={ell}")));
            }
            colors.push(c);
        }
        Ok((EdgeColoring::new(ground, arity, colors)?, ell))
    }
}

/// Bitmask with the low `ell` bits set.
#[inline]
fn all_colors_mask(ell: usize) -> u64 {
    if ell >= 64 {
        u64::MAX
    } else {
        (1u64 << ell) - 1
    }
}

fn check_clique_params(c: &EdgeColoring, ell: usize) -> Result<()> {
    if ell < 1 || ell > MAX_ELL {
        return Err(Error::Invalid(format!("ℓ = {ell} outside 1..={MAX_ELL}")));
    }
    if c.ground.n() > MAX_CLIQUE_N {
        return Err(Error::CapExceeded(format!(
            "clique counting needs n ≤ {MAX_CLIQUE_N}, got {}",
            c.ground.n()
        )));
    }
    if c.max_color() as usize > ell {
        return Err(Error::Invalid(format!(
            "coloring uses color {} but ℓ = {ell}",
            c.max_color()
        )));
    }
    Ok(())
}

/// Table mapping each arity-subset mask to its color (0 elsewhere).
fn color_table(c: &EdgeColoring) -> Vec<u8> {
    let mut table = vec![0u8; 1usize << c.ground.n()];
    for (r, &col) in c.colors.iter().enumerate() {
        table[c.edge_mask(r) as usize] = col;
    }
    table
}

/// Per-mask monochromatic color sets: bit i−1 of `mono[S]` is set iff every
/// arity-subset of S has color i. Sets too small to contain an edge carry
/// every color bit.
fn mono_masks(n: u32, arity: u32, ell: usize, color_table: &[u8]) -> Vec<u64> {
    let size = 1usize << n;
    let all = all_colors_mask(ell);
    let mut mono = vec![0u64; size];
    let m = (arity - 1) as usize;
    let mut elems = [0u32; 32];
    for s in 0..size {
        let pc = (s as u64).count_ones();
        if pc < arity {
            mono[s] = all;
            continue;
        }
        let v = (s as u64).trailing_zeros();
        let rest = s & !(1usize << v);
        let mut acc = mono[rest];
        if acc != 0 {
            // AND in the colors of the edges {v} ∪ U, U an m-subset of rest.
            let mut cnt = 0usize;
            let mut w = rest as u64;
            while w != 0 {
                elems[cnt] = w.trailing_zeros();
                cnt += 1;
                w &= w - 1;
            }
            if m == 0 {
                let col = color_table[1usize << v];
                acc &= 1u64 << (col - 1);
            } else {
                let mut idx = [0usize; 8];
                for (i, slot) in idx.iter_mut().enumerate().take(m) {
                    *slot = i;
                }
                'combos: loop {
                    let mut t = 1u64 << v;
                    for &i in idx.iter().take(m) {
                        t |= 1u64 << elems[i];
                    }
                    let col = color_table[t as usize];
                    acc &= 1u64 << (col - 1);
                    if acc == 0 {
                        break 'combos;
                    }
                    // Next m-combination of 0..cnt.
                    let mut i = m;
                    loop {
                        if i == 0 {
                            break 'combos;
                        }
                        i -= 1;
                        if idx[i] != i + cnt - m {
                            break;
                        }
                        if i == 0 {
                            break 'combos;
                        }
                    }
                    idx[i] += 1;
                    for j in i + 1..m {
                        idx[j] = idx[j - 1] + 1;
                    }
                }
            }
        }
        mono[s] = acc;
    }
    mono
}

/// k_i for i ∈ [ℓ]: the number of color-i-monochromatic subsets of [n].
pub fn mono_clique_counts(c: &EdgeColoring, ell: usize) -> Result<Vec<u64>> {
    check_clique_params(c, ell)?;
    let table = color_table(c);
    let mono = mono_masks(c.ground.n(), c.arity, ell, &table);
    let mut counts = vec![0u64; ell];
    for &bits in &mono {
        let mut w = bits;
        while w != 0 {
            counts[w.trailing_zeros() as usize] += 1;
            w &= w - 1;
        }
    }
    Ok(counts)
}

/// The system of clique families: 𝓕_i = all color-i-monochromatic subsets,
/// under the uniform bound m = arity − 1. Always m-overlapping.
pub fn families_from_coloring(c: &EdgeColoring, ell: usize) -> Result<FamilySystem> {
    check_clique_params(c, ell)?;
    let table = color_table(c);
    let mono = mono_masks(c.ground.n(), c.arity, ell, &table);
    let mut buckets: Vec<Vec<SetWord>> = vec![Vec::new(); ell];
    for (s, &bits) in mono.iter().enumerate() {
        let mut w = bits;
        while w != 0 {
            buckets[w.trailing_zeros() as usize].push(s as u64);
            w &= w - 1;
        }
    }
    let families = buckets
        .into_iter()
        .map(|sets| Family::from_sorted_unchecked(c.ground, sets))
        .collect();
    FamilySystem::new(OverlapSpec::uniform(ell, c.arity - 1)?, families)
}

/// Outcome of a product search.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchResult {
    pub best_value: BigUint,
    pub best_coloring: EdgeColoring,
    pub per_color_counts: Vec<u64>,
    pub nodes_explored: u64,
    pub exhaustive: bool,
}

/// Tuning knobs for [`exact_search`].
#[derive(Clone, Debug)]
pub struct SearchOpts {
    /// Stop expanding once this many tree nodes were visited (the result is
    /// then marked non-exhaustive).
    pub node_budget: u64,
    /// Test knob: relabel hypergraph vertices by this permutation of [n]
    /// before searching. The optimal value must not change.
    pub vertex_relabel: Option<Vec<u32>>,
}

impl Default for SearchOpts {
    fn default() -> Self {
        SearchOpts {
            node_budget: DEFAULT_NODE_BUDGET,
            vertex_relabel: None,
        }
    }
}

fn product_of(counts: &[u64]) -> BigUint {
    let mut p = BigUint::one();
    for &k in counts {
        p *= BigUint::from(k);
    }
    p
}

struct DfsCtx<'a> {
    edge_masks: &'a [SetWord],
    n: u32,
    arity: u32,
    ell: usize,
    budget: u64,
    nodes: u64,
    exhausted_budget: bool,
    color_table: Vec<u8>,
    colors: Vec<u8>,
    best_value: Option<BigUint>,
    best_colors: Vec<u8>,
    best_counts: Vec<u64>,
}

impl DfsCtx<'_> {
    fn eval_leaf(&mut self) {
        let mono = mono_masks(self.n, self.arity, self.ell, &self.color_table);
        let mut counts = vec![0u64; self.ell];
        for &bits in &mono {
            let mut w = bits;
            while w != 0 {
                counts[w.trailing_zeros() as usize] += 1;
                w &= w - 1;
            }
        }
        let value = product_of(&counts);
        // Strict improvement only: the first optimum found in lex DFS order
        // is the lexicographically smallest optimal coloring.
        if self.best_value.as_ref().is_none_or(|b| value > *b) {
            self.best_value = Some(value);
            self.best_colors = self.colors.clone();
            self.best_counts = counts;
        }
    }

    fn dfs(&mut self, depth: usize, max_used: u8) {
        // The budget prunes only after the task has produced one candidate,
        // so every task always returns a valid coloring.
        if self.nodes >= self.budget && self.best_value.is_some() {
            self.exhausted_budget = true;
            return;
        }
        self.nodes += 1;
        if depth == self.edge_masks.len() {
            self.eval_leaf();
            return;
        }
        let limit = (max_used + 1).min(self.ell as u8);
        for c in 1..=limit {
            self.colors[depth] = c;
            self.color_table[self.edge_masks[depth] as usize] = c;
            self.dfs(depth + 1, max_used.max(c));
            if self.exhausted_budget {
                break;
            }
        }
        self.color_table[self.edge_masks[depth] as usize] = 0;
    }
}

/// Exhaustive maximization of ∏k_i with canonical color pruning, a node
/// budget, and deterministic parallel prefix decomposition. When the budget
/// runs out, the best coloring found so far is returned with
/// `exhaustive = false`.
pub fn exact_search(n: u32, ell: usize, m: u32, opts: &SearchOpts) -> Result<SearchResult> {
    let ground = GroundSet::new(n)?;
    if ell < 1 || ell > MAX_ELL {
        return Err(Error::Invalid(format!("ℓ = {ell} outside 1..={MAX_ELL}")));
    }
    if n > MAX_CLIQUE_N {
        return Err(Error::CapExceeded(format!(
            "exact search needs n ≤ {MAX_CLIQUE_N}, got {n}"
        )));
    }
    let arity = m + 1;
    if arity > MAX_ARITY {
        return Err(Error::Invalid(format!(
            "edge arity {arity} outside 1..={MAX_ARITY}"
        )));
    }
    let ecount = binom(n as u64, arity as u64) as usize;

    // Edge masks in search order; an optional vertex relabeling permutes the
    // hypergraph without changing the optimal value.
    let edge_masks: Vec<SetWord> = (0..ecount)
        .map(|r| {
            let mask = kset_unrank(n, arity, r as u128);
            match &opts.vertex_relabel {
                None => Ok(mask),
                Some(perm) => {
                    if perm.len() != n as usize {
                        return Err(Error::Invalid("vertex relabeling length ≠ n".into()));
                    }
                    let mut check = vec![false; n as usize];
                    let mut out: SetWord = 0;
                    for e in crate::family::mask_elems(mask) {
                        let img = perm[e as usize - 1];
                        if img < 1 || img > n || check[img as usize - 1] {
                            return Err(Error::Invalid("not a permutation of [n]".into()));
                        }
                        check[img as usize - 1] = true;
                        out |= crate::family::elem_mask(img);
                    }
                    Ok(out)
                }
            }
        })
        .collect::<Result<_>>()?;

    // No edges at all (m ≥ n): the unique coloring scores (2^n)^ℓ.
    if ecount == 0 {
        let counts = vec![1u64 << n; ell];
        return Ok(SearchResult {
            best_value: product_of(&counts),
            best_coloring: EdgeColoring::new(ground, arity, Vec::new())?,
            per_color_counts: counts,
            nodes_explored: 1,
            exhaustive: true,
        });
    }

    // Fixed prefix decomposition: breadth-first expansion of canonical
    // color prefixes until at least 64 tasks exist (or the colorings are
    // fully enumerated). Independent of thread count.
    let mut prefixes: Vec<(Vec<u8>, u8)> = vec![(vec![1u8], 1)]; // first edge pinned to color 1
    while prefixes.len() < 64 && prefixes[0].0.len() < ecount {
        let mut next = Vec::with_capacity(prefixes.len() * ell);
        for (p, max_used) in &prefixes {
            let limit = (max_used + 1).min(ell as u8);
            for c in 1..=limit {
                let mut q = p.clone();
                q.push(c);
                next.push((q, (*max_used).max(c)));
            }
        }
        prefixes = next;
    }

    let per_task_budget = (opts.node_budget / prefixes.len() as u64).max(1);

    let task_results: Vec<(Option<BigUint>, Vec<u8>, Vec<u64>, u64, bool)> = prefixes
        .par_iter()
        .map(|(prefix, max_used)| {
            let mut ctx = DfsCtx {
                edge_masks: &edge_masks,
                n,
                arity,
                ell,
                budget: per_task_budget,
                nodes: 0,
                exhausted_budget: false,
                color_table: vec![0u8; 1usize << n],
                colors: vec![0u8; ecount],
                best_value: None,
                best_colors: Vec::new(),
                best_counts: Vec::new(),
            };
            for (d, &c) in prefix.iter().enumerate() {
                ctx.colors[d] = c;
                ctx.color_table[edge_masks[d] as usize] = c;
            }
            ctx.dfs(prefix.len(), *max_used);
            (
                ctx.best_value,
                ctx.best_colors,
                ctx.best_counts,
                ctx.nodes,
                ctx.exhausted_budget,
            )
        })
        .collect();

    // Merge in prefix (lex) order, strict improvement only.
    let mut best_value: Option<BigUint> = None;
    let mut best_colors = Vec::new();
    let mut best_counts = Vec::new();
    let mut nodes = 0u64;
    let mut exhausted = false;
    for (value, colors, counts, task_nodes, task_exhausted) in task_results {
        nodes += task_nodes;
        exhausted |= task_exhausted;
        if let Some(v) = value {
            if best_value.as_ref().is_none_or(|b| v > *b) {
                best_value = Some(v);
                best_colors = colors;
                best_counts = counts;
            }
        }
    }

    let best_value = best_value.ok_or_else(|| {
        Error::Internal("search budget too small to reach any leaf".into())
    })?;
    Ok(SearchResult {
        best_value,
        best_coloring: EdgeColoring::new(ground, arity, best_colors)?,
        per_color_counts: best_counts,
        nodes_explored: nodes,
        exhaustive: !exhausted,
    })
}

/// Cooling plan for [`anneal_search`]: geometric interpolation from
/// `t_start` to `t_end` over `steps` proposed moves.
#[derive(Clone, Copy, Debug)]
pub struct AnnealSchedule {
    pub steps: u64,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            steps: 200_000,
            t_start: 1.0,
            t_end: 0.005,
        }
    }
}

/// Seeded simulated annealing over colorings. Maintains per-color "bad edge"
/// counts per subset so each recoloring updates 2^{n−arity} masks, accepts
/// product-improving moves outright (compared exactly) and worse moves with
/// Metropolis probability, and re-counts the reported best coloring from
/// scratch before returning (an internal error on mismatch).
pub fn anneal_search(
    n: u32,
    ell: usize,
    m: u32,
    seed: u64,
    schedule: &AnnealSchedule,
) -> Result<SearchResult> {
    let ground = GroundSet::new(n)?;
    if ell < 1 || ell > MAX_ELL {
        return Err(Error::Invalid(format!("ℓ = {ell} outside 1..={MAX_ELL}")));
    }
    if n > 16 {
        return Err(Error::CapExceeded(format!(
            "annealing tables need n ≤ 16, got {n}"
        )));
    }
    let arity = m + 1;
    if arity > MAX_ARITY {
        return Err(Error::Invalid(format!(
            "edge arity {arity} outside 1..={MAX_ARITY}"
        )));
    }
    let ecount = binom(n as u64, arity as u64) as usize;
    let size = 1usize << n;

    // Degenerate spaces with a single coloring.
    if ecount == 0 || ell == 1 {
        let colors = vec![1u8; ecount];
        let coloring = EdgeColoring::new(ground, arity, colors)?;
        let counts = mono_clique_counts(&coloring, ell)?;
        return Ok(SearchResult {
            best_value: product_of(&counts),
            best_coloring: coloring,
            per_color_counts: counts,
            nodes_explored: 0,
            exhaustive: false,
        });
    }

    let edge_masks: Vec<SetWord> = (0..ecount)
        .map(|r| kset_unrank(n, arity, r as u128))
        .collect();
    // Supersets of each edge, for delta updates.
    let complement: Vec<SetWord> = edge_masks.iter().map(|&e| ground.full() & !e).collect();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut colors: Vec<u8> = (0..ecount)
        .map(|_| rng.gen_range(1..=ell as u8))
        .collect();

    // cnt_bad[i][S] = number of edges inside S not colored i+1.
    let mut cnt_bad: Vec<Vec<u16>> = vec![vec![0u16; size]; ell];
    let mut k = vec![0u64; ell];
    for (r, &e) in edge_masks.iter().enumerate() {
        let c = colors[r] as usize - 1;
        let mut x: SetWord = 0;
        loop {
            let s = (e | x) as usize;
            for (i, row) in cnt_bad.iter_mut().enumerate() {
                if i != c {
                    row[s] += 1;
                }
            }
            x = (x | !complement[r]).wrapping_add(1) & complement[r];
            if x == 0 {
                break;
            }
        }
    }
    for (i, row) in cnt_bad.iter().enumerate() {
        k[i] = row.iter().filter(|&&b| b == 0).count() as u64;
    }

    let mut best_value = product_of(&k);
    let mut best_colors = colors.clone();
    let sched_steps = schedule.steps.max(1);

    for step in 0..schedule.steps {
        let frac = step as f64 / sched_steps as f64;
        let temp = schedule.t_start * (schedule.t_end / schedule.t_start).powf(frac);
        let r = rng.gen_range(0..ecount);
        let a = colors[r] as usize - 1;
        let mut b = rng.gen_range(0..ell - 1);
        if b >= a {
            b += 1;
        }

        // Apply the recoloring to the tables, tracking k-transitions.
        let (old_ka, old_kb) = (k[a], k[b]);
        let apply = |cnt_bad: &mut Vec<Vec<u16>>, k: &mut Vec<u64>, from: usize, to: usize| {
            let e = edge_masks[r];
            let comp = complement[r];
            let mut x: SetWord = 0;
            loop {
                let s = (e | x) as usize;
                cnt_bad[from][s] += 1;
                if cnt_bad[from][s] == 1 {
                    k[from] -= 1;
                }
                cnt_bad[to][s] -= 1;
                if cnt_bad[to][s] == 0 {
                    k[to] += 1;
                }
                x = (x | !comp).wrapping_add(1) & comp;
                if x == 0 {
                    break;
                }
            }
        };
        apply(&mut cnt_bad, &mut k, a, b);

        let accept = {
            let old = old_ka as u128 * old_kb as u128;
            let new = k[a] as u128 * k[b] as u128;
            if new >= old {
                true
            } else {
                let ratio = new as f64 / old as f64;
                rng.gen::<f64>() < ratio.powf(1.0 / temp)
            }
        };
        if accept {
            colors[r] = b as u8 + 1;
            // Track the incumbent by exact product.
            let value = product_of(&k);
            if value > best_value {
                best_value = value;
                best_colors = colors.clone();
            }
        } else {
            apply(&mut cnt_bad, &mut k, b, a);
        }
    }

    // Verifying recount of the reported coloring.
    let best_coloring = EdgeColoring::new(ground, arity, best_colors)?;
    let counts = mono_clique_counts(&best_coloring, ell)?;
    let recount = product_of(&counts);
    if recount != best_value {
        return Err(Error::Internal(format!(
            "anneal bookkeeping mismatch: tracked {best_value}, recounted {recount}"
        )));
    }
    Ok(SearchResult {
        best_value,
        best_coloring,
        per_color_counts: counts,
        nodes_explored: schedule.steps,
        exhaustive: false,
    })
}
