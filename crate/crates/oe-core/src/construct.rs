//! Generators for the explicit extremal family systems: the octopus system
//! over an oriented graph, its refined five-family variant, the two-family
//! extremal pair, and the center/direction diagnostics that read the
//! underlying oriented graph back off a system.
//!
//! # Overview
//!
//! An *octopus plan* partitions [n] into blocks A_{(k,k')}, one per edge of
//! an oriented graph on [ℓ] whose edges mark exactly the pairs with a
//! nonzero overlap bound. Family k is the join of the full cube over its
//! in-blocks (the *body*) with a ≤m-levels family over each out-block (the
//! *tentacles*); these systems are m-overlapping and asymptotically
//! extremal. For ℓ = 5 the extremal system refines the octopus over the
//! specific tournament returned by [`crate::tournament::t5_graph`] with
//! extra cross and W terms; [`l5_system`] builds those five families
//! literally, term by term.
//!
//! # Design
//!
//! * Plans are validated on construction (block partition, edge/bound
//!   agreement); generators after that cannot fail except on caps.
//! * The five-family formulas are transcribed without algebraic
//!   simplification so each term can be audited against its definition;
//!   deduplication happens in the canonical [`Family`] constructor.
//! * Centers and tentacle directions use exact rational degrees; the
//!   direction rule is the finite-n surrogate "strictly smaller opposing
//!   degree", with ties reported, never silently oriented.

use crate::coloring::EdgeColoring;
use crate::family::{
    degree, directed_degree, elem_mask, mask_elems, pair_list, vee, vee_all, GroundSet,
    OverlapSpec, SetWord, DEFAULT_CAP,
};
use crate::shadow::binom;
use crate::tournament::{t5_graph, OrientedGraph};
use crate::{Error, Family, FamilySystem, Result};
use num::rational::Ratio;
use num::{BigUint, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A block partition of [n] indexed by the edges of an oriented graph whose
/// edges are exactly the pairs with a nonzero overlap bound.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OctopusPlan {
    ground: GroundSet,
    spec: OverlapSpec,
    graph: OrientedGraph,
    /// `blocks[i]` belongs to `graph.edges()[i]`.
    blocks: Vec<SetWord>,
}

impl OctopusPlan {
    /// Validates edge/bound agreement, block membership, disjointness, and
    /// that the blocks cover [n]. Empty blocks are allowed.
    pub fn new(
        ground: GroundSet,
        spec: OverlapSpec,
        graph: OrientedGraph,
        blocks: Vec<SetWord>,
    ) -> Result<Self> {
        if spec.ell() != graph.ell() {
            return Err(Error::Invalid(format!(
                "bound matrix is on [{}] but the graph is on [{}]",
                spec.ell(),
                graph.ell()
            )));
        }
        for (k1, k2, m) in spec.pairs() {
            let has = graph.has_edge(k1, k2) || graph.has_edge(k2, k1);
            if (m > 0) != has {
                return Err(Error::Invalid(format!(
                    "pair ({k1},{k2}) has bound {m} but edge-present = {has}"
                )));
            }
        }
        let edges = graph.edges();
        if blocks.len() != edges.len() {
            return Err(Error::Invalid(format!(
                "{} blocks given for {} edges",
                blocks.len(),
                edges.len()
            )));
        }
        let mut seen: SetWord = 0;
        for &b in &blocks {
            ground.check_mask(b)?;
            if seen & b != 0 {
                return Err(Error::Invalid("blocks are not pairwise disjoint".into()));
            }
            seen |= b;
        }
        if seen != ground.full() {
            return Err(Error::Invalid(
                "blocks do not cover the whole ground set".into(),
            ));
        }
        Ok(OctopusPlan {
            ground,
            spec,
            graph,
            blocks,
        })
    }

    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    #[inline]
    pub fn spec(&self) -> &OverlapSpec {
        &self.spec
    }

    #[inline]
    pub fn graph(&self) -> &OrientedGraph {
        &self.graph
    }

    /// Blocks aligned with `graph().edges()`.
    #[inline]
    pub fn blocks(&self) -> &[SetWord] {
        &self.blocks
    }

    /// The block of the directed edge k1 → k2, if that edge exists.
    pub fn block(&self, k1: usize, k2: usize) -> Option<SetWord> {
        self.graph
            .edges()
            .iter()
            .position(|&e| e == (k1, k2))
            .map(|i| self.blocks[i])
    }

    /// Union of the in-blocks of k — the body ⊔_{k'∈In_k} A_{(k',k)}.
    pub fn body_mask(&self, k: usize) -> Result<SetWord> {
        let (in_m, _) = self.graph.in_out(k)?;
        let mut body: SetWord = 0;
        for k_in in mask_elems(in_m) {
            body |= self.block(k_in as usize, k).unwrap();
        }
        Ok(body)
    }

    /// Out-edges of k as (k', block, bound) triples in ascending k'.
    pub fn out_blocks(&self, k: usize) -> Result<Vec<(usize, SetWord, u32)>> {
        let (_, out_m) = self.graph.in_out(k)?;
        Ok(mask_elems(out_m)
            .into_iter()
            .map(|k2| {
                let k2 = k2 as usize;
                (k2, self.block(k, k2).unwrap(), self.spec.m(k, k2))
            })
            .collect())
    }
}

/// |C(A, ≤m)| = Σ_{i=0}^{m} C(|A|, i).
fn low_size(a_len: u32, m: u32) -> BigUint {
    let mut s = BigUint::ZERO;
    for i in 0..=m.min(a_len) {
        s += BigUint::from(binom(a_len as u64, i as u64));
    }
    s
}

/// Family k of the octopus system:
/// 2^{⊔_{k'∈In_k} A_{(k',k)}} ∨ ⋁_{k'∈Out_k} C(A_{(k,k')}, ≤ m_{k,k'}).
pub fn octopus_family(plan: &OctopusPlan, k: usize) -> Result<Family> {
    let body = Family::cube_capped(plan.ground, plan.body_mask(k)?, DEFAULT_CAP)?;
    let tentacles: Vec<Family> = plan
        .out_blocks(k)?
        .into_iter()
        .map(|(_, a, m)| Family::low(plan.ground, a, m))
        .collect::<Result<_>>()?;
    let mut parts = vec![body];
    parts.extend(tentacles);
    vee_all(plan.ground, parts.iter())
}

/// Closed-form size of [`octopus_family`]:
/// 2^{|body|} · ∏_{k'∈Out_k} Σ_{i=0}^{m} C(|A_{(k,k')}|, i).
pub fn octopus_family_size(plan: &OctopusPlan, k: usize) -> Result<BigUint> {
    let mut size = BigUint::one() << plan.body_mask(k)?.count_ones();
    for (_, a, m) in plan.out_blocks(k)? {
        size *= low_size(a.count_ones(), m);
    }
    Ok(size)
}

/// The full octopus system over the plan's graph.
pub fn octopus_system(plan: &OctopusPlan) -> Result<FamilySystem> {
    let families = (1..=plan.spec.ell())
        .map(|k| octopus_family(plan, k))
        .collect::<Result<_>>()?;
    FamilySystem::new(plan.spec.clone(), families)
}

/// ∏_k |𝓕_k| as an arbitrary-precision integer.
pub fn system_product(sys: &FamilySystem) -> BigUint {
    sys.product()
}

/// Block sizes proportional to m_S·n / Σ m_{S'}, rounded by largest
/// remainder (ties broken toward earlier edges), laid out as consecutive
/// intervals of [n] in edge order.
pub fn balanced_plan(n: u32, spec: &OverlapSpec, graph: &OrientedGraph) -> Result<OctopusPlan> {
    let ground = GroundSet::new(n)?;
    let edges = graph.edges();
    if edges.is_empty() {
        if n == 0 {
            return OctopusPlan::new(ground, spec.clone(), graph.clone(), Vec::new());
        }
        return Err(Error::Invalid(
            "no positive bounds: cannot partition a nonempty ground set into blocks".into(),
        ));
    }
    if (n as usize) < edges.len() {
        return Err(Error::Invalid(format!(
            "n = {n} is smaller than the number of edges with nonzero bound ({})",
            edges.len()
        )));
    }
    let ms: Vec<u64> = edges
        .iter()
        .map(|&(k1, k2)| spec.m(k1, k2) as u64)
        .collect();
    let total: u64 = ms.iter().sum();
    // Exact largest-remainder apportionment of n over targets m_e·n/total.
    let mut sizes: Vec<u64> = ms.iter().map(|&m| m * n as u64 / total).collect();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(ms[i] * n as u64 % total), i));
    let assigned: u64 = sizes.iter().sum();
    for &i in order.iter().take((n as u64 - assigned) as usize) {
        sizes[i] += 1;
    }
    let mut blocks = Vec::with_capacity(edges.len());
    let mut next = 1u32;
    for &s in &sizes {
        let mut b: SetWord = 0;
        for e in next..next + s as u32 {
            b |= elem_mask(e);
        }
        next += s as u32;
        blocks.push(b);
    }
    OctopusPlan::new(ground, spec.clone(), graph.clone(), blocks)
}

/// An octopus plan over the extremal five-vertex tournament together with a
/// three-way split W_1 ⊔ W_2 ⊔ W_3 of the block A_{(4,5)}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct L5Plan {
    plan: OctopusPlan,
    w: [SetWord; 3],
}

impl L5Plan {
    /// Validates the block partition (via [`OctopusPlan`]) and that the W
    /// parts partition A_{(4,5)}.
    pub fn new(ground: GroundSet, blocks: Vec<SetWord>, w: [SetWord; 3]) -> Result<Self> {
        let plan = OctopusPlan::new(ground, OverlapSpec::uniform(5, 1)?, t5_graph(), blocks)?;
        let a45 = plan.block(4, 5).unwrap();
        if w[0] & w[1] != 0 || w[0] & w[2] != 0 || w[1] & w[2] != 0 {
            return Err(Error::Invalid("W parts are not pairwise disjoint".into()));
        }
        if w[0] | w[1] | w[2] != a45 {
            return Err(Error::Invalid(
                "W parts do not partition the block of edge 4 → 5".into(),
            ));
        }
        Ok(L5Plan { plan, w })
    }

    #[inline]
    pub fn ground(&self) -> GroundSet {
        self.plan.ground()
    }

    /// The underlying octopus plan (uniform bound 1 over the five-vertex
    /// extremal tournament).
    #[inline]
    pub fn octopus(&self) -> &OctopusPlan {
        &self.plan
    }

    #[inline]
    pub fn block(&self, k1: usize, k2: usize) -> Option<SetWord> {
        self.plan.block(k1, k2)
    }

    #[inline]
    pub fn w(&self) -> [SetWord; 3] {
        self.w
    }
}

/// Splits `a45`'s elements (ascending) into three consecutive runs of the
/// given sizes.
fn split_w(a45: SetWord, sizes: [u64; 3]) -> Result<[SetWord; 3]> {
    let elems = mask_elems(a45);
    if sizes.iter().sum::<u64>() != elems.len() as u64 {
        return Err(Error::Invalid(format!(
            "W sizes {sizes:?} do not sum to |A_(4,5)| = {}",
            elems.len()
        )));
    }
    let mut w = [0 as SetWord; 3];
    let mut it = elems.into_iter();
    for (wi, &s) in w.iter_mut().zip(&sizes) {
        for _ in 0..s {
            *wi |= elem_mask(it.next().unwrap());
        }
    }
    Ok(w)
}

/// Balanced blocks and a near-equal three-way W split (largest remainder,
/// earlier parts first).
pub fn l5_balanced_plan(n: u32) -> Result<L5Plan> {
    let plan = balanced_plan(n, &OverlapSpec::uniform(5, 1)?, &t5_graph())?;
    let a45 = plan.block(4, 5).unwrap();
    let len = a45.count_ones() as u64;
    let mut sizes = [len / 3; 3];
    for wi in sizes.iter_mut().take((len % 3) as usize) {
        *wi += 1;
    }
    let w = split_w(a45, sizes)?;
    L5Plan::new(plan.ground(), plan.blocks().to_vec(), w)
}

/// Balanced blocks with explicit W sizes (must sum to |A_{(4,5)}|).
pub fn l5_plan_with_w(n: u32, w_sizes: [u64; 3]) -> Result<L5Plan> {
    let plan = balanced_plan(n, &OverlapSpec::uniform(5, 1)?, &t5_graph())?;
    let w = split_w(plan.block(4, 5).unwrap(), w_sizes)?;
    L5Plan::new(plan.ground(), plan.blocks().to_vec(), w)
}

/// Balanced blocks with each element of A_{(4,5)} assigned to a W part
/// uniformly at random (seeded).
pub fn l5_random_w_plan(n: u32, seed: u64) -> Result<L5Plan> {
    let plan = balanced_plan(n, &OverlapSpec::uniform(5, 1)?, &t5_graph())?;
    let a45 = plan.block(4, 5).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut w = [0 as SetWord; 3];
    for e in mask_elems(a45) {
        w[rng.gen_range(0..3)] |= elem_mask(e);
    }
    L5Plan::new(plan.ground(), plan.blocks().to_vec(), w)
}

/// The refined five-family system. With i_k the unique in-neighbor and o_k
/// the unique out-neighbor inside [3] of k ∈ [3]:
///
/// 𝓕_k = 2^{A_{i_k,k}} ∨ ( ⋁_{k'∈Out_k} C(A_{k,k'},≤1)
///        ∪ ⋃_{{s,s'}={4,5}} C(A_{o_k,s},≤1) ∨ C(A_{k,s'},≤1)
///        ∪ C(W_k,≤1) ∨ C(A_{k,o_k},≤1)
///        ∪ C(W_{o_k},≤1) ) ∪ C([n],1),      k ∈ [3],
///
/// and for k ∈ {4,5} the plain octopus family ∪ C([n],1).
pub fn l5_system(plan: &L5Plan) -> Result<FamilySystem> {
    let ground = plan.ground();
    let graph = t5_graph();
    let three: SetWord = elem_mask(1) | elem_mask(2) | elem_mask(3);
    let singles = Family::singletons(ground);
    let mut families = Vec::with_capacity(5);
    for k in 1..=3usize {
        let (in_m, out_m) = graph.in_out(k)?;
        let i_k = mask_elems(in_m)[0] as usize;
        let o_k = mask_elems(out_m & three)[0] as usize;
        let body = Family::cube_capped(ground, plan.block(i_k, k).unwrap(), DEFAULT_CAP)?;
        let t_out: Vec<Family> = mask_elems(out_m)
            .into_iter()
            .map(|k2| Family::low(ground, plan.block(k, k2 as usize).unwrap(), 1))
            .collect::<Result<_>>()?;
        let t_out = vee_all(ground, t_out.iter())?;
        let cross_a = vee(
            &Family::low(ground, plan.block(o_k, 4).unwrap(), 1)?,
            &Family::low(ground, plan.block(k, 5).unwrap(), 1)?,
        )?;
        let cross_b = vee(
            &Family::low(ground, plan.block(o_k, 5).unwrap(), 1)?,
            &Family::low(ground, plan.block(k, 4).unwrap(), 1)?,
        )?;
        let w_own = vee(
            &Family::low(ground, plan.w()[k - 1], 1)?,
            &Family::low(ground, plan.block(k, o_k).unwrap(), 1)?,
        )?;
        let w_other = Family::low(ground, plan.w()[o_k - 1], 1)?;
        let bracket = t_out
            .union(&cross_a)?
            .union(&cross_b)?
            .union(&w_own)?
            .union(&w_other)?;
        families.push(vee(&body, &bracket)?.union(&singles)?);
    }
    for k in 4..=5usize {
        families.push(octopus_family(plan.octopus(), k)?.union(&singles)?);
    }
    FamilySystem::new(OverlapSpec::uniform(5, 1)?, families)
}

/// The pair coloring realizing [`l5_system`]: every 2-subset of [n] lies in
/// exactly one of the five families (it may not belong to two, since a set
/// shared by two families would meet itself in 2 > 1 elements), and that
/// family index is its color.
pub fn l5_coloring(plan: &L5Plan) -> Result<EdgeColoring> {
    let sys = l5_system(plan)?;
    let ground = plan.ground();
    let n = ground.n();
    let ecount = binom(n as u64, 2) as usize;
    let mut colors = Vec::with_capacity(ecount);
    for r in 0..ecount {
        let mask = crate::shadow::kset_unrank(n, 2, r as u128);
        let mut owner = None;
        for k in 1..=5usize {
            if sys.family(k)?.contains(mask) {
                if owner.is_some() {
                    return Err(Error::Internal(format!(
                        "pair {:?} lies in two families",
                        mask_elems(mask)
                    )));
                }
                owner = Some(k as u8);
            }
        }
        match owner {
            Some(k) => colors.push(k),
            None => {
                return Err(Error::Internal(format!(
                    "pair {:?} lies in no family",
                    mask_elems(mask)
                )))
            }
        }
    }
    EdgeColoring::new(ground, 2, colors)
}

/// 𝓕_1 = C([n], ≤t), 𝓕_2 = 2^[n]: the extremal two-family pair with
/// product 2^n · Σ_{i=0}^{t} C(n, i).
pub fn two_family_extremal(n: u32, t: u32) -> Result<FamilySystem> {
    let ground = GroundSet::new(n)?;
    if t > n {
        return Err(Error::Invalid(format!("t = {t} exceeds n = {n}")));
    }
    let f1 = Family::low(ground, ground.full(), t)?;
    let f2 = Family::cube_capped(ground, ground.full(), DEFAULT_CAP)?;
    FamilySystem::new(OverlapSpec::uniform(2, t)?, vec![f1, f2])
}

/// Exact threshold classification of the elements of [n] by normalized
/// degree in one family.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CenterReport {
    /// {x : d_k(x) ≥ 1/2 − α}, the probabilistic center.
    pub center: SetWord,
    /// d_k(x) for x = 1..n (index x − 1), as exact rationals.
    pub degrees: Vec<Ratio<i128>>,
    /// The threshold offset used.
    pub alpha: Ratio<i128>,
}

/// Computes the probabilistic center C*_k = {x : d_k(x) ≥ 1/2 − α} with
/// exact rational arithmetic (boundary degrees are included).
pub fn probabilistic_center(
    sys: &FamilySystem,
    k: usize,
    alpha: Ratio<i128>,
) -> Result<CenterReport> {
    let f = sys.family(k)?;
    let threshold = Ratio::new(1, 2) - alpha;
    let mut center: SetWord = 0;
    let mut degrees = Vec::with_capacity(sys.ground().n() as usize);
    for x in 1..=sys.ground().n() {
        let d = degree(f, elem_mask(x))?;
        if d >= threshold {
            center |= elem_mask(x);
        }
        degrees.push(d);
    }
    Ok(CenterReport {
        center,
        degrees,
        alpha,
    })
}

/// Orientation read off a system by comparing directed degrees against
/// given centers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DirectionReport {
    /// Edge k1 → k2 present iff d_{k2→k1}^{(≥1)} < d_{k1→k2}^{(≥1)}.
    pub graph: OrientedGraph,
    /// (k1, k2, d_{k1→k2}^{(≥1)}, d_{k2→k1}^{(≥1)}) per pair with m > 0.
    pub degrees: Vec<(usize, usize, Ratio<i128>, Ratio<i128>)>,
    /// Pairs with equal degrees, left unoriented.
    pub ties: Vec<(usize, usize)>,
}

/// For each pair with a nonzero bound, orients k1 → k2 exactly when the
/// degree of 𝓕_{k2} into C*_{k1} is strictly smaller than the degree of
/// 𝓕_{k1} into C*_{k2} (the finite-n surrogate for "the opposing tentacle
/// is exponentially small"). Requires pairwise-disjoint centers.
pub fn tentacle_direction(sys: &FamilySystem, centers: &[SetWord]) -> Result<DirectionReport> {
    if centers.len() != sys.ell() {
        return Err(Error::Invalid(format!(
            "{} centers given for {} families",
            centers.len(),
            sys.ell()
        )));
    }
    let mut seen: SetWord = 0;
    for &c in centers {
        sys.ground().check_mask(c)?;
        if seen & c != 0 {
            return Err(Error::Precondition("centers are not disjoint".into()));
        }
        seen |= c;
    }
    let mut graph = OrientedGraph::new(sys.ell())?;
    let mut degrees = Vec::new();
    let mut ties = Vec::new();
    for (k1, k2) in pair_list(sys.ell()) {
        if sys.spec().m(k1, k2) == 0 {
            continue;
        }
        let d12 = directed_degree(sys, k1, k2, centers[k2 - 1], 1)?;
        let d21 = directed_degree(sys, k2, k1, centers[k1 - 1], 1)?;
        if d21 < d12 {
            graph.add_edge(k1, k2)?;
        } else if d12 < d21 {
            graph.add_edge(k2, k1)?;
        } else {
            ties.push((k1, k2));
        }
        degrees.push((k1, k2, d12, d21));
    }
    Ok(DirectionReport {
        graph,
        degrees,
        ties,
    })
}
