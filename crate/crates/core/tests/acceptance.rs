//! Acceptance gate: one test per numbered criterion, each asserting the
//! published reference values at the stated tolerances and printing a single
//! PASS line (visible with `--nocapture`).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigUint;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbancode::analysis::{
    binomial, census, feasibility_caps, upper_bound_profile, DecodingPolynomial,
};
use wbancode::montecarlo::{simulate, TrialConfig};
use wbancode::multigraph::MultiGraph;
use wbancode::scheme::{CodingScheme, DecodeError, Encoding, Slot, WbanParams};

fn interleaved(n: usize, k: usize, r: usize, loops: usize) -> CodingScheme {
    CodingScheme::interleaved(WbanParams::derive(n, k, r).unwrap(), loops).unwrap()
}

fn plain_9_3_2() -> CodingScheme {
    CodingScheme::plain(WbanParams::derive(9, 3, 2).unwrap())
}

/// Reference censuses c_x, x = 1..9, for the (9,3,2) interleaved schemes
/// with 1..9 plain slots. Two circulated x = 9 cells are corrected: the
/// one- and two-loop rows print 10340 and 12365 (values shifted in from
/// the rows below), but the exact probabilities published alongside them
/// (0.7728010935 and 0.9257409618, criterion 5) force 6500 and 10340, and
/// criterion 2 re-derives both cells in-test through independent oracles
/// (spanning-tree count, GF(2) rank sweep).
const CENSUS_ROWS: [[u64; 9]; 9] = [
    [17, 136, 677, 2333, 5842, 10803, 14540, 13297, 6500],
    [18, 152, 797, 2889, 7603, 14769, 20880, 20073, 10340],
    [18, 153, 812, 2994, 8052, 16053, 23388, 23277, 12500],
    [18, 153, 812, 2993, 8042, 16008, 23273, 23101, 12365],
    [18, 153, 811, 2979, 7952, 15660, 22402, 21731, 11273],
    [18, 153, 810, 2964, 7851, 15260, 21405, 20232, 10192],
    [18, 153, 809, 2948, 7736, 14779, 20135, 18161, 8532],
    [18, 153, 808, 2932, 7621, 14299, 18886, 16199, 7053],
    [18, 153, 807, 2916, 7506, 13821, 17667, 14373, 5776],
];

/// Reference exact decoding probabilities at p = 0.8 for the same schemes.
const EXACT_PROBS: [f64; 9] = [
    0.7728010935,
    0.9257409618,
    0.9558104057,
    0.9551821038,
    0.9493923505,
    0.9429367740,
    0.9353111111,
    0.9277553360,
    0.9202926069,
];

const D_ROW: [u64; 9] = [18, 153, 812, 2994, 8064, 17472, 29952, 41184, 45760];

#[test]
fn c01_interleaved_grid_is_reproduced_exactly() {
    use Encoding::{Pair, Single};
    let expected: [Vec<Encoding>; 4] = [
        vec![Single(1), Single(2), Pair(3, 4), Pair(4, 5), Pair(5, 6), Pair(6, 1)],
        vec![Single(4), Pair(5, 8), Pair(6, 7), Pair(7, 8), Pair(8, 9), Pair(9, 4)],
        vec![Single(7), Pair(8, 11), Pair(9, 10), Pair(10, 11), Pair(11, 12), Pair(12, 7)],
        vec![Single(10), Pair(11, 2), Pair(12, 1), Pair(1, 2), Pair(2, 3), Pair(3, 10)],
    ];
    // Warm-up pass so the timed run measures generation, not first-touch cost.
    let _ = interleaved(12, 4, 2, 5);
    let started = Instant::now();
    let scheme = interleaved(12, 4, 2, 5);
    assert_eq!(scheme.relays(), &expected);
    let elapsed = started.elapsed();
    assert!(elapsed.as_micros() < 1000, "took {elapsed:?}, budget 1 ms");
    println!("criterion 01: PASS - 4x6 interleaved grid for (12,4,2) with 5 plain slots reproduced exactly in {elapsed:?}");
}

/// With a single loop, deleting 9 of the 18 edges leaves a decodable graph
/// exactly when the loop plus a spanning tree of the 17 pair edges survive,
/// so c_9 equals the spanning-tree count. Counted here by brute force over
/// all C(17,8) = 24310 subsets as an oracle independent of the census sweep.
fn one_loop_c9_oracle(g: &MultiGraph) -> u64 {
    let pair_ids: Vec<usize> = (0..g.edge_count())
        .filter(|&id| !g.edges()[id].is_loop())
        .collect();
    assert_eq!(pair_ids.len(), 17);
    let mut count = 0u64;
    let mut chosen = [0usize; 8];
    fn recurse(
        g: &MultiGraph,
        pair_ids: &[usize],
        chosen: &mut [usize; 8],
        depth: usize,
        start: usize,
        count: &mut u64,
    ) {
        if depth == 8 {
            let delete: Vec<usize> = (0..g.edge_count())
                .filter(|id| !g.edges()[*id].is_loop() && !chosen.contains(id))
                .collect();
            if g.delete_edges(delete).unwrap().components().len() == 1 {
                *count += 1;
            }
            return;
        }
        for i in start..pair_ids.len() {
            chosen[depth] = pair_ids[i];
            recurse(g, pair_ids, chosen, depth + 1, i + 1, count);
        }
    }
    recurse(g, &pair_ids, &mut chosen, 0, 0, &mut count);
    count
}

/// Counts the decodable 9-deletion subsets through the GF(2) rank oracle
/// instead of the component criterion.
fn rank_c9_oracle(scheme: &CodingScheme) -> u64 {
    let slots: Vec<Slot> = scheme.slots().map(|(slot, _)| slot).collect();
    let m = slots.len();
    let mut count = 0u64;
    for mask in 0u32..1 << m {
        if mask.count_ones() as usize != m - 9 {
            continue;
        }
        let kept = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| slots[i]);
        if scheme.rank_decodable(kept) {
            count += 1;
        }
    }
    count
}

#[test]
fn c02_censuses_match_the_reference_table() {
    let started = Instant::now();
    for (i, row) in CENSUS_ROWS.iter().enumerate() {
        let loops = i + 1;
        let g = interleaved(9, 3, 2, loops).to_graph().unwrap();
        let result = census(&g).unwrap();
        for (x, &cell) in row.iter().enumerate() {
            assert_eq!(
                result.c[x + 1],
                BigUint::from(cell),
                "scheme with {loops} plain slots, x = {}",
                x + 1
            );
        }
        if loops == 1 {
            // Pin the corrected x = 9 cell (6500, printed as 10340 in the
            // reference table) with the spanning-tree oracle.
            assert_eq!(one_loop_c9_oracle(&g), 6500);
        }
        if loops == 2 {
            // Pin the corrected x = 9 cell (10340, printed as 12365) with
            // the rank oracle, a fully separate decodability code path.
            assert_eq!(rank_c9_oracle(&interleaved(9, 3, 2, 2)), 10340);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}, budget 30 s");
    println!(
        "criterion 02: PASS - all 90 census cells for the nine (9,3,2) schemes match in {elapsed:?} \
         (x=9 cells for the one- and two-loop rows are 6500 and 10340 per the spanning-tree and \
         rank oracles and their exact probabilities; the circulated 10340/12365 cells are shifted \
         misprints)"
    );
}

#[test]
fn c03_plain_census_matches_the_closed_form() {
    let g = plain_9_3_2().to_graph().unwrap();
    let result = census(&g).unwrap();
    for x in 0..=result.m {
        let expected = binomial(9, x) * BigUint::from(2u32).pow(x as u32);
        assert_eq!(result.c[x], expected, "x = {x}");
    }
    // The x = 8 cell is C(9,8)*2^8 = 2304; a circulated table prints 2034
    // there, which the closed form (and criterion 5's probability
    // cross-check) rules out.
    assert_eq!(result.c[8], BigUint::from(2304u32));
    println!(
        "criterion 03: PASS - plain (9,3,2) census equals C(9,x)*2^x for every x; \
         x=8 is 2304, flagging the circulated 2034 cell as a misprint"
    );
}

#[test]
fn c04_bound_row_matches_the_reference() {
    let report = upper_bound_profile(9, 18, 3, 1).unwrap();
    let got: Vec<BigUint> = report.d.iter().map(|e| e.value.clone()).collect();
    let expected: Vec<BigUint> = D_ROW.iter().map(|&v| BigUint::from(v)).collect();
    assert_eq!(got, expected);
    println!("criterion 04: PASS - cap row D_1..D_9 for (n,m,mG,dL) = (9,18,3,1) reproduced exactly");
}

#[test]
fn c05_exact_probabilities_match_to_1e9() {
    let mut worst: f64 = 0.0;
    for (i, &expected) in EXACT_PROBS.iter().enumerate() {
        let g = interleaved(9, 3, 2, i + 1).to_graph().unwrap();
        let result = census(&g).unwrap();
        let got: f64 = DecodingPolynomial::from_census(&result)
            .evaluate(0.8)
            .unwrap();
        let err = (got - expected).abs();
        worst = worst.max(err);
        assert!(err <= 1e-9, "{} plain slots: got {got}, expected {expected}", i + 1);
    }

    let g = plain_9_3_2().to_graph().unwrap();
    let result = census(&g).unwrap();
    let poly = DecodingPolynomial::from_census(&result);
    let got: f64 = poly.evaluate(0.8).unwrap();
    let closed_form = (1.0f64 - 0.04).powi(9);
    assert!((got - closed_form).abs() <= 1e-9, "got {got}, closed form {closed_form}");

    // The misprinted census cell (2034 instead of 2304) shifts the
    // probability by exactly (2304 - 2034) * p^10 * q^8, which is how the
    // circulated 0.6924597789 figure arises.
    let mut misprinted: Vec<BigUint> = result.c[1..].to_vec();
    misprinted[7] = BigUint::from(2034u32);
    let typo_value: f64 = DecodingPolynomial::from_caps(18, &misprinted)
        .evaluate(0.8)
        .unwrap();
    let shift = 270.0 * 0.8f64.powi(10) * 0.2f64.powi(8);
    assert!(
        ((got - typo_value) - shift).abs() <= 1e-12,
        "difference {} vs 270*p^10*q^8 = {shift}",
        got - typo_value
    );
    assert!((typo_value - 0.6924597789).abs() <= 1e-9);
    println!(
        "criterion 05: PASS - nine exact probabilities at p=0.8 within 1e-9 (worst |err| = {worst:.2e}); \
         plain scheme equals (1-q^2)^9 = {closed_form:.10} and the circulated cell differs by exactly 270*p^10*q^8"
    );
}

#[test]
fn c06_gap_to_the_analytic_optimum() {
    let g3 = interleaved(9, 3, 2, 3).to_graph().unwrap();
    let g3_poly = DecodingPolynomial::from_census(&census(&g3).unwrap());
    let caps: Vec<BigUint> = upper_bound_profile(9, 18, 3, 1)
        .unwrap()
        .d
        .into_iter()
        .map(|e| e.value)
        .collect();
    let cap_poly = DecodingPolynomial::from_caps(18, &caps);

    let gap_08: f64 =
        cap_poly.evaluate(0.8).unwrap() - g3_poly.evaluate::<f64>(0.8).unwrap();
    let gap_09: f64 =
        cap_poly.evaluate(0.9).unwrap() - g3_poly.evaluate::<f64>(0.9).unwrap();
    assert!((gap_08 - 0.0208769770).abs() <= 1e-9, "gap at 0.8: {gap_08}");
    assert!((gap_09 - 0.0007125786).abs() <= 1e-9, "gap at 0.9: {gap_09}");
    println!(
        "criterion 06: PASS - hypothetical-census gaps are {gap_08:.10} at p=0.8 and {gap_09:.10} at p=0.9"
    );
}

#[test]
fn c07_graph_and_rank_oracles_agree_on_all_subsets() {
    let started = Instant::now();
    let scheme = interleaved(9, 3, 2, 3);
    let g = scheme.to_graph().unwrap();
    let slots: Vec<Slot> = scheme.slots().map(|(slot, _)| slot).collect();
    let m = slots.len();
    assert_eq!(m, 18);
    let mut decodable_by_deleted = vec![0u64; m + 1];
    for mask in 0u32..1 << m {
        let kept = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| slots[i]);
        let deleted: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 0).collect();
        let deleted_count = deleted.len();
        let by_graph = g.delete_edges(deleted).unwrap().is_decodable();
        let by_rank = scheme.rank_decodable(kept);
        assert_eq!(by_rank, by_graph, "mask {mask:#020b}");
        if by_graph {
            decodable_by_deleted[deleted_count] += 1;
        }
    }
    // The sweep re-derives the census row, tying both oracles to criterion 2.
    for (x, &cell) in CENSUS_ROWS[2].iter().enumerate() {
        assert_eq!(decodable_by_deleted[x + 1], cell, "x = {}", x + 1);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}, budget 5 min");
    println!(
        "criterion 07: PASS - all 262144 received subsets classify identically under the \
         component criterion and the GF(2) rank oracle in {elapsed:?}"
    );
}

#[test]
fn c08_generated_schemes_reach_the_degree_cut() {
    let mut checked = 0usize;
    for k in [2usize, 3] {
        for r in [2usize, 3] {
            for s in 2.. {
                let n = s * k;
                if n > 18 {
                    break;
                }
                let lo = (2 * r - 1).max(k);
                let hi = (s - 1) * k;
                for loops in lo..=hi {
                    let g = interleaved(n, k, r, loops).to_graph().unwrap();
                    let target = 2 * r - 1;
                    let stats = g.stats();
                    assert_eq!(
                        stats.min_incidence_degree, target,
                        "({n},{k},{r}) loops {loops}: min incidence degree"
                    );
                    assert_eq!(
                        g.min_loop_cut().unwrap(),
                        target,
                        "({n},{k},{r}) loops {loops}: loop-cut number"
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
    println!(
        "criterion 08: PASS - min_loop_cut = min incidence degree = 2r-1 for all {checked} \
         generated (n,k,r,L) combinations with k,r in {{2,3}}, n <= 18"
    );
}

#[test]
fn c09_randomized_decodable_graphs_respect_every_published_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut produced = 0usize;
    while produced < 200 {
        let n = 1 + (rng.next_u64() % 8) as usize;
        let extra = (rng.next_u64() % (15 - n) as u64) as usize;
        let pairs: Vec<(usize, usize)> = (0..n + extra)
            .map(|_| {
                (
                    1 + (rng.next_u64() % n as u64) as usize,
                    1 + (rng.next_u64() % n as u64) as usize,
                )
            })
            .collect();
        let base = MultiGraph::new(n, pairs.clone()).unwrap();
        let looped: BTreeSet<usize> = base
            .edges()
            .iter()
            .filter(|e| e.is_loop())
            .map(|e| e.u)
            .collect();
        let mut pairs = pairs;
        for comp in base.components() {
            if !comp.iter().any(|v| looped.contains(v)) {
                pairs.push((comp[0], comp[0]));
            }
        }
        if pairs.len() > 14 {
            continue;
        }
        let g = MultiGraph::new(n, pairs).unwrap();
        assert!(g.is_decodable());
        let m = g.edge_count();
        let stats = g.stats();
        let cut = g.min_loop_cut().unwrap();

        assert!(cut <= stats.loop_count.min(stats.min_incidence_degree));
        if g.components().len() == 1 && n >= 2 {
            let kappa = g.edge_connectivity().unwrap();
            if stats.loop_count >= kappa {
                assert!(kappa <= cut, "kappa {kappa} > cut {cut}");
            }
        }
        assert!(cut <= feasibility_caps(n, m).unwrap().loop_cut);

        let result = census(&g).unwrap();
        for x in 0..=m {
            for z in 0..=(m - x) {
                let lhs = result.k[x + z].clone() * binomial(x + z, z);
                let rhs = result.k[x].clone() * binomial(m - x, z);
                assert!(lhs >= rhs, "n {n} m {m} x {x} z {z}");
            }
        }
        produced += 1;
    }
    println!(
        "criterion 09: PASS - 200 randomized decodable multigraphs satisfy the cut caps, \
         the connectivity floor, and the ratio floor for every (x,z); zero violations"
    );
}

#[test]
fn c10_simulation_agrees_with_the_exact_value_and_replays() {
    let exact = 0.9558104057f64;
    let g = interleaved(9, 3, 2, 3).to_graph().unwrap();
    let config = TrialConfig::with_workers(0.8, 5_000_000, 20_260_814, 4).unwrap();
    let run = simulate(&g, config);
    let z = run.z_score(exact).unwrap();
    assert!(
        z.abs() <= 3.0,
        "estimate {} vs exact {exact}: z = {z}",
        run.estimate
    );
    let replay = simulate(&g, config);
    assert_eq!(run.successes, replay.successes, "replay diverged");
    println!(
        "criterion 10: PASS - {} / {} successes (estimate {:.7}, exact {exact}, z = {z:+.2}); \
         replay reproduced the identical count",
        run.successes, run.trials, run.estimate
    );
}

#[test]
fn c11_decoder_round_trips_every_survivable_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let params = WbanParams::derive(9, 3, 2).unwrap();
    let mut survivable_count = 0usize;
    for trial in 0..1000 {
        let scheme = match trial % 10 {
            0 => CodingScheme::plain(params),
            loops => CodingScheme::interleaved(params, loops).unwrap(),
        };
        let g = scheme.to_graph().unwrap();
        let len = 1 + (rng.next_u64() % 6) as usize;
        let payloads: Vec<Vec<u8>> = (0..9)
            .map(|_| (0..len).map(|_| rng.next_u64() as u8).collect())
            .collect();
        let mask = rng.next_u64() & ((1 << 18) - 1);
        let frames = scheme.encode(&payloads).unwrap();
        let received: BTreeMap<Slot, Vec<u8>> = frames
            .into_iter()
            .enumerate()
            .filter_map(|(id, frame)| (mask >> id & 1 == 1).then_some(frame))
            .collect();
        let missing: Vec<usize> = (0..18).filter(|id| mask >> id & 1 == 0).collect();
        let sub = g.delete_edges(missing).unwrap();
        if sub.is_decodable() {
            survivable_count += 1;
            let out = scheme.decode(&received).unwrap_or_else(|e| {
                panic!("trial {trial}: survivable pattern failed to decode: {e}")
            });
            assert_eq!(out, payloads, "trial {trial}");
        } else {
            let looped: BTreeSet<usize> = sub
                .edges()
                .iter()
                .filter(|e| e.is_loop())
                .map(|e| e.u)
                .collect();
            let expected: Vec<Vec<usize>> = sub
                .components()
                .into_iter()
                .filter(|comp| !comp.iter().any(|v| looped.contains(v)))
                .collect();
            match scheme.decode(&received) {
                Err(DecodeError::Undecodable { components }) => {
                    assert_eq!(components, expected, "trial {trial}");
                    assert!(!components.is_empty(), "trial {trial}");
                }
                other => panic!("trial {trial}: expected an undecodable failure, got {other:?}"),
            }
        }
    }
    assert!(survivable_count > 0 && survivable_count < 1000);
    println!(
        "criterion 11: PASS - 1000 round-trip trials: {survivable_count} survivable patterns \
         recovered all payloads exactly; the rest named their loopless components"
    );
}
