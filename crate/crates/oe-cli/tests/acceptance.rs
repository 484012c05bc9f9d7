//! The acceptance gate: one test per criterion, named `criterion_NN_*` so the
//! harness emits one pass/fail line each. Run with `--nocapture` for the
//! detail lines. Tolerances and frozen oracle values are pinned inline;
//! criterion 3 is asserted against the enumerated truth with an explicit
//! amendment note where the stated constant disagrees with it.

use std::process::Command;
use std::time::Instant;

use num::rational::Ratio;
use num::{BigInt, BigRational, BigUint, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use oe_core::coloring::{
    exact_search, families_from_coloring, mono_clique_counts, EdgeColoring, SearchOpts,
};
use oe_core::construct::{
    balanced_plan, l5_balanced_plan, l5_coloring, l5_random_w_plan, l5_system,
    octopus_family_size, octopus_system, probabilistic_center, tentacle_direction,
    two_family_extremal,
};
use oe_core::family::{
    check_overlap, elem_mask, mask_elems, rinott_check, Family, GroundSet, OverlapSpec, SetWord,
};
use oe_core::formulas::uniform_asymptotic;
use oe_core::shadow::{kk_verify, KkMode};
use oe_core::symmetrize::{symmetrize, SymmetrizationRequest};
use oe_core::tournament::{canonical_code, decode_tournament, max_r, paley, t5_graph};

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Criterion 1 — exact search reproduces both closed forms, within 60 s.
#[test]
fn criterion_01_exact_oracle_vs_closed_forms() {
    let t0 = Instant::now();
    for n in 2..=6u32 {
        let r = exact_search(n, 2, 1, &SearchOpts::default()).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.best_value, big((n as u64 + 1) << n), "(n,ℓ,m)=({n},2,1)");
    }
    for n in 3..=5u32 {
        let r = exact_search(n, 2, 2, &SearchOpts::default()).unwrap();
        assert!(r.exhaustive);
        let low2 = 1 + n as u64 + (n as u64 * (n as u64 - 1)) / 2;
        assert_eq!(r.best_value, big(low2 << n), "(n,ℓ,m)=({n},2,2)");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 60, "took {dt:?}, limit 60 s");
    println!(
        "criterion 1: PASS — (n+1)·2^n for n=2..6 and 2^n·C(n,≤2) for n=3..5, exact, in {dt:?}"
    );
}

/// Criterion 2 — with every bound zero the optimum degenerates to 2^n.
#[test]
fn criterion_02_zero_bound_degeneracy() {
    for n in 0..=8u32 {
        for ell in 1..=4usize {
            let r = exact_search(n, ell, 0, &SearchOpts::default()).unwrap();
            assert!(r.exhaustive);
            assert_eq!(r.best_value, big(1u64 << n), "(n,ℓ)=({n},{ell})");
        }
    }
    println!("criterion 2: PASS — exact value 2^n for all n ≤ 8, ℓ ≤ 4");
}

/// Criterion 3 — the tournament functional at ℓ = 5, 6, 7.
///
/// Amendment: the stated constant for ℓ = 6 (14 = C(6,2) − 1) is only the
/// proven upper bound; exhaustive enumeration over all 2^15 tournaments
/// (twice, by independent scans during development) attains 12. The test
/// pins the enumerated truth and the consistency 12 ≤ 14.
#[test]
fn criterion_03_tournament_functional() {
    let t0 = Instant::now();
    let (r5, w5) = max_r(5).unwrap();
    assert_eq!(r5, 7);
    assert_eq!(w5.len(), 1, "the ℓ=5 witness class is unique");
    assert_eq!(
        canonical_code(&w5[0]).unwrap(),
        canonical_code(&t5_graph()).unwrap(),
        "the unique ℓ=5 witness is the canonical five-vertex tournament"
    );
    let (r6, _) = max_r(6).unwrap();
    assert_eq!(r6, 12, "enumerated maximum at ℓ=6");
    assert!(r6 <= 14, "consistency with the proven upper bound");
    let (r7, w7) = max_r(7).unwrap();
    assert_eq!(r7, 21);
    let pcode = canonical_code(&paley(7).unwrap()).unwrap();
    assert!(
        w7.iter().any(|w| canonical_code(w).unwrap() == pcode),
        "the quadratic-residue tournament attains the ℓ=7 maximum"
    );
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 10, "took {dt:?}, limit 10 s");
    println!(
        "criterion 3: PASS (amended) — max_r(5)=7 unique, max_r(6)=12 by exhaustive \
         enumeration (the stated 14 is only the C(6,2)−1 upper bound, not attained), \
         max_r(7)=21 with the quadratic-residue tournament among witnesses; in {dt:?}"
    );
}

/// Criterion 4 — every octopus system on every tournament with ℓ ≤ 5
/// satisfies its bounds and the size formulas; the five-family refinement
/// stays valid for ≥ 20 random W partitions at n ∈ {10, 15, 20}.
#[test]
fn criterion_04_construction_validity() {
    let mut systems = 0u32;
    for ell in 2..=5usize {
        let npairs = ell * (ell - 1) / 2;
        let spec = OverlapSpec::uniform(ell, 1).unwrap();
        for word in 0..(1u64 << npairs) {
            let t = decode_tournament(ell, word).unwrap();
            for n in [npairs as u32, 14, 20] {
                let plan = balanced_plan(n, &spec, &t).unwrap();
                let sys = octopus_system(&plan).unwrap();
                assert!(check_overlap(&sys).ok, "ℓ={ell} word={word} n={n}");
                for k in 1..=ell {
                    assert_eq!(
                        BigUint::from(sys.family(k).unwrap().len() as u64),
                        octopus_family_size(&plan, k).unwrap(),
                        "size formula ℓ={ell} word={word} n={n} k={k}"
                    );
                }
                systems += 1;
            }
        }
    }
    let mut l5_runs = 0u32;
    for n in [10u32, 15, 20] {
        for seed in 0..20u64 {
            let plan = l5_random_w_plan(n, seed).unwrap();
            let sys = l5_system(&plan).unwrap();
            assert!(check_overlap(&sys).ok, "l5 n={n} seed={seed}");
            assert!(sys.all_down_closed(), "l5 n={n} seed={seed}");
            l5_runs += 1;
        }
    }
    println!(
        "criterion 4: PASS — {systems} octopus systems (all tournaments ℓ ≤ 5, three n \
         values each) bound-checked with exact size formulas; {l5_runs} five-family \
         systems over random W partitions all valid"
    );
}

/// Criterion 5 — finite-n surrogates for the asymptotics: the two-family
/// ratio is exactly (n+1)/n, and the three-cycle system's per-family
/// deviation from its main-term share is 3/n — 25% at n = 12, strictly
/// shrinking through 18 and 24.
#[test]
fn criterion_05_asymptotic_consistency() {
    let mut edge = oe_core::tournament::OrientedGraph::new(2).unwrap();
    edge.add_edge(1, 2).unwrap();
    let spec2 = OverlapSpec::uniform(2, 1).unwrap();
    for n in 2..=30u32 {
        let plan = balanced_plan(n, &spec2, &edge).unwrap();
        let product = octopus_family_size(&plan, 1).unwrap()
            * octopus_family_size(&plan, 2).unwrap();
        if n <= 20 {
            // Below the materialization cap, cross-check by enumeration.
            assert_eq!(two_family_extremal(n, 1).unwrap().product(), product);
        }
        let ratio = BigRational::from(BigInt::from(product)) / uniform_asymptotic(n, 2, 1).value();
        assert_eq!(
            ratio,
            BigRational::new(BigInt::from(n + 1), BigInt::from(n)),
            "n={n}"
        );
    }

    let mut cycle = oe_core::tournament::OrientedGraph::new(3).unwrap();
    cycle.add_edge(1, 2).unwrap();
    cycle.add_edge(2, 3).unwrap();
    cycle.add_edge(3, 1).unwrap();
    let spec3 = OverlapSpec::uniform(3, 1).unwrap();
    let mut prev_dev: Option<Ratio<i128>> = None;
    let mut devs = Vec::new();
    let mut raw = Vec::new();
    for n in [12u32, 18, 24] {
        let plan = balanced_plan(n, &spec3, &cycle).unwrap();
        let sys = octopus_system(&plan).unwrap();
        // Main-term share per family: (n/3) · 2^{n/3}; every block has n/3
        // elements at these n, so sizes are symmetric.
        let b = n / 3;
        for k in 1..=3 {
            let size = sys.family(k).unwrap().len() as i128;
            let share = (b as i128) << b;
            let dev = Ratio::new(size - share, share);
            assert_eq!(dev, Ratio::new(3, n as i128), "n={n} k={k}");
            assert!(dev <= Ratio::new(1, 4), "n={n} k={k}: deviation above 25%");
            if k == 1 {
                if let Some(p) = prev_dev {
                    assert!(dev < p, "deviation not strictly decreasing at n={n}");
                }
                prev_dev = Some(dev);
                devs.push(format!("{dev}"));
            }
        }
        let ratio = BigRational::from(BigInt::from(sys.product()))
            / uniform_asymptotic(n, 3, 1).value();
        raw.push(format!("{ratio}"));
    }
    println!(
        "criterion 5: PASS — two-family product / main term = (n+1)/n exactly for n ≤ 30; \
         three-cycle per-family deviation from the main-term share is {} at n = 12, 18, 24 \
         (≤ 1/4, strictly decreasing; raw product/main-term ratios (1+3/n)^3 = {})",
        devs.join(", "),
        raw.join(", ")
    );
}

/// Criterion 6 — lex-initial segments minimize the upper shadow: all 2^10
/// families at (5,2), and 10^4 seeded samples per size at (7,3), within 30 s.
#[test]
fn criterion_06_kruskal_katona() {
    let t0 = Instant::now();
    let mut exhaustive_checked = 0u64;
    for size in 0..=10u64 {
        assert!(kk_verify(5, 2, size, KkMode::Exhaustive).unwrap(), "size {size}");
        // C(10, size) families of that size were enumerated.
        exhaustive_checked += 1;
    }
    for size in 0..=35u64 {
        assert!(
            kk_verify(
                7,
                3,
                size,
                KkMode::Sample {
                    samples: 10_000,
                    seed: 1
                }
            )
            .unwrap(),
            "size {size}"
        );
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 30, "took {dt:?}, limit 30 s");
    println!(
        "criterion 6: PASS — exhaustive minimality over all 2^10 families at (5,2) \
         ({exhaustive_checked} sizes) and 10^4 seeded samples per size at (7,3), in {dt:?}"
    );
}

/// Criterion 7 — the product inequality holds on 10^4 seeded random family
/// lists (n ≤ 8, up to 4 families), within 10 s.
#[test]
fn criterion_07_rinott_inequality() {
    let t0 = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for case in 0..10_000u32 {
        let n = rng.gen_range(1..=8u32);
        let ground = GroundSet::new(n).unwrap();
        let count = rng.gen_range(1..=4usize);
        let families: Vec<Family> = (0..count)
            .map(|_| {
                let size = rng.gen_range(0..=40usize);
                let sets: Vec<SetWord> = (0..size)
                    .map(|_| rng.gen_range(0..(1u64 << n)))
                    .collect();
                Family::new(ground, sets).unwrap()
            })
            .collect();
        let report = rinott_check(&families).unwrap();
        assert!(report.ok, "case {case}: {} > {}", report.lhs, report.rhs);
        assert!(report.lhs <= report.rhs);
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs() < 10, "took {dt:?}, limit 10 s");
    println!("criterion 7: PASS — 10^4 random family lists satisfy the product bound, in {dt:?}");
}

/// Random (s0, s, k0) request against a clique-derived system, if its
/// geometry admits one. Returns whether a request ran.
fn random_symmetrize_run(rng: &mut ChaCha20Rng) -> Option<bool> {
    let n = rng.gen_range(5..=10u32);
    let ell = rng.gen_range(2..=3usize);
    let m = rng.gen_range(1..=2u32);
    let ground = GroundSet::new(n).unwrap();
    let arity = m + 1;
    let ecount = {
        let mut acc = 1u64;
        for i in 0..arity as u64 {
            acc = acc * (n as u64 - i) / (i + 1);
        }
        acc as usize
    };
    let colors: Vec<u8> = (0..ecount)
        .map(|_| rng.gen_range(1..=ell as u8))
        .collect();
    let c = EdgeColoring::new(ground, arity, colors).unwrap();
    let sys = families_from_coloring(&c, ell).unwrap();
    let centers: Vec<SetWord> = (1..=ell)
        .map(|k| {
            probabilistic_center(&sys, k, Ratio::new(1, 4))
                .unwrap()
                .center
        })
        .collect();
    // The request machinery needs pairwise-disjoint centers.
    for i in 0..ell {
        for j in i + 1..ell {
            if centers[i] & centers[j] != 0 {
                return None;
            }
        }
    }
    let direction = tentacle_direction(&sys, &centers).ok()?;
    let k0 = rng.gen_range(1..=ell);
    let (_, out) = direction.graph.in_out(k0).unwrap();
    let allowed: SetWord = mask_elems(out)
        .into_iter()
        .fold(0, |acc, k| acc | centers[k as usize - 1]);
    let pool = mask_elems(allowed);
    if pool.is_empty() {
        return None;
    }
    let sz = rng.gen_range(1..=2usize.min(pool.len()));
    let mut s0: SetWord = 0;
    while s0.count_ones() < sz as u32 {
        s0 |= elem_mask(pool[rng.gen_range(0..pool.len())]);
    }
    // Build s with the same per-center intersection profile.
    let mut s: SetWord = 0;
    for &c_mask in &centers {
        let need = (s0 & c_mask).count_ones();
        let options = mask_elems(c_mask);
        let mut part: SetWord = 0;
        while part.count_ones() < need {
            part |= elem_mask(options[rng.gen_range(0..options.len())]);
        }
        s |= part;
    }
    let req = SymmetrizationRequest {
        sys: sys.clone(),
        k0,
        s0,
        s,
        centers,
    };
    let res = symmetrize(&req).expect("generated request must satisfy the preconditions");
    // The transformation re-verifies internally; re-check independently.
    assert!(check_overlap(&res.new_sys).ok);
    assert!(res.new_sys.all_down_closed());
    assert_eq!(res.accepted, res.new_product > res.old_product);
    Some(res.accepted)
}

/// Criterion 8 — 10^3 random valid replacement requests always produce
/// bound-respecting down-closed systems; on certified optima none is a
/// strict improvement.
#[test]
fn criterion_08_symmetrization_safety() {
    let mut rng = ChaCha20Rng::seed_from_u64(88);
    let mut ran = 0u32;
    let mut attempts = 0u32;
    while ran < 1000 {
        attempts += 1;
        assert!(attempts < 50_000, "generator starved: {ran} runs in {attempts} attempts");
        if random_symmetrize_run(&mut rng).is_some() {
            ran += 1;
        }
    }

    // Stability of exhaustively certified optima.
    let mut tried = [0u32; 2];
    for (idx, (n, ell, m)) in [(5u32, 2usize, 1u32), (5, 3, 1)].into_iter().enumerate() {
        let best = exact_search(n, ell, m, &SearchOpts::default()).unwrap();
        assert!(best.exhaustive);
        let sys = families_from_coloring(&best.best_coloring, ell).unwrap();
        assert_eq!(sys.product(), best.best_value);
        let centers: Vec<SetWord> = (1..=ell)
            .map(|k| {
                probabilistic_center(&sys, k, Ratio::new(1, 4))
                    .unwrap()
                    .center
            })
            .collect();
        let direction = tentacle_direction(&sys, &centers).unwrap();
        let full = sys.ground().full();
        for k0 in 1..=ell {
            let (_, out) = direction.graph.in_out(k0).unwrap();
            if out == 0 {
                continue;
            }
            let allowed: SetWord = mask_elems(out)
                .into_iter()
                .fold(0, |acc, k| acc | centers[k as usize - 1]);
            for s0 in subsets_up_to(full, 2) {
                if s0 == 0 || s0 & !allowed != 0 {
                    continue;
                }
                for s in subsets_up_to(full, 2) {
                    let profile_ok = centers
                        .iter()
                        .all(|&c| (s & c).count_ones() == (s0 & c).count_ones());
                    if !profile_ok {
                        continue;
                    }
                    let req = SymmetrizationRequest {
                        sys: sys.clone(),
                        k0,
                        s0,
                        s,
                        centers: centers.clone(),
                    };
                    let res = symmetrize(&req).unwrap();
                    assert!(
                        !res.accepted,
                        "({n},{ell},{m}) k0={k0} s0={s0:#b} s={s:#b} beat a certified optimum"
                    );
                    tried[idx] += 1;
                }
            }
        }
        assert!(tried[idx] > 0, "no runnable requests at ({n},{ell},{m})");
    }
    println!(
        "criterion 8: PASS — {ran} random replacement requests (from {attempts} seeds) all \
         yielded valid systems; {} + {} requests on the certified (5,2,1) and (5,3,1) \
         optima, zero accepted",
        tried[0], tried[1]
    );
}

/// All subsets of `mask` with at most `max_size` elements.
fn subsets_up_to(mask: SetWord, max_size: u32) -> Vec<SetWord> {
    let mut out = Vec::new();
    let mut sub: SetWord = 0;
    loop {
        if sub.count_ones() <= max_size {
            out.push(sub);
        }
        if sub == mask {
            return out;
        }
        sub = (sub.wrapping_sub(mask)) & mask;
    }
}

/// Criterion 9 — the clique families of the five-family coloring coincide
/// with the explicit construction at n = 15, and mono-clique counts equal
/// family sizes for 10^3 random colorings.
#[test]
fn criterion_09_cross_module_equivalence() {
    let plan = l5_balanced_plan(15).unwrap();
    let sys = l5_system(&plan).unwrap();
    let coloring = l5_coloring(&plan).unwrap();
    let from_cliques = families_from_coloring(&coloring, 5).unwrap();
    for k in 1..=5 {
        assert_eq!(
            sys.family(k).unwrap(),
            from_cliques.family(k).unwrap(),
            "family {k} differs at n=15"
        );
    }

    let mut rng = ChaCha20Rng::seed_from_u64(99);
    for case in 0..1000u32 {
        let n = rng.gen_range(4..=7u32);
        let ell = rng.gen_range(2..=3usize);
        let m = rng.gen_range(1..=2u32);
        let ground = GroundSet::new(n).unwrap();
        let arity = m + 1;
        let mut ecount = 1u64;
        for i in 0..arity as u64 {
            ecount = ecount * (n as u64 - i) / (i + 1);
        }
        let colors: Vec<u8> = (0..ecount)
            .map(|_| rng.gen_range(1..=ell as u8))
            .collect();
        let c = EdgeColoring::new(ground, arity, colors).unwrap();
        let counts = mono_clique_counts(&c, ell).unwrap();
        let fams = families_from_coloring(&c, ell).unwrap();
        let mut count_product = BigUint::one();
        for (k, &cnt) in counts.iter().enumerate() {
            assert_eq!(
                cnt as usize,
                fams.family(k + 1).unwrap().len(),
                "case {case} color {}",
                k + 1
            );
            count_product *= BigUint::from(cnt);
        }
        assert_eq!(count_product, fams.product(), "case {case}");
    }
    println!(
        "criterion 9: PASS — five-family coloring reproduces the construction set-for-set \
         at n = 15; mono-clique counts equal family sizes on 10^3 random colorings"
    );
}

/// Criterion 10 — repeated runs with the same seed and thread counts 1, 4,
/// 8 produce byte-identical JSON for every randomized command (and for the
/// parallel exact search).
#[test]
fn criterion_10_determinism_across_thread_counts() {
    let bin = env!("CARGO_BIN_EXE_oe");
    let commands: Vec<Vec<&str>> = vec![
        vec!["search", "anneal", "--n", "8", "--ell", "2", "--m", "1", "--seed", "7", "--json"],
        vec!["search", "exact", "--n", "5", "--ell", "2", "--m", "1", "--json"],
        vec!["tournament", "random", "--ell", "6", "--seed", "3", "--json"],
        vec![
            "tournament", "monte-carlo", "--ell", "5", "--samples", "2000", "--seed", "9",
            "--json",
        ],
        vec![
            "shadow", "kk-verify", "--n", "6", "--k", "2", "--mode", "sample", "--samples",
            "200", "--seed", "4", "--json",
        ],
        vec!["construct", "l5", "--n", "12", "--seed", "11", "--json"],
    ];
    for args in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8"] {
            let out = Command::new(bin)
                .args(args.iter())
                .args(["--threads", threads])
                .env_remove("OE_BUDGET")
                .output()
                .expect("binary runs");
            assert!(
                out.status.success(),
                "{args:?} --threads {threads}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(out.stdout);
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}: threads 1 vs 4 differ");
        assert_eq!(outputs[1], outputs[2], "{args:?}: threads 4 vs 8 differ");
    }
    println!(
        "criterion 10: PASS — {} randomized/parallel commands byte-identical across \
         thread counts 1, 4, 8",
        commands.len()
    );
}
