mod common;

use std::collections::BTreeSet;

use isobisect::balance::*;
use isobisect::coloring::*;
use isobisect::decompose::thomassen_decompose;
use isobisect::fixtures;
use isobisect::graph::{CubicGraph, Graph};
use isobisect::reducers::find_reducer;

const M: usize = 1000;
const D: usize = 16;
const BUDGET: usize = 14;

/// `CL_1000` coloured anti-periodically (outer `i` red iff `i` even, inner
/// `m + i` red iff `i` odd), which is an isomorphic bisection made of `P_2`s,
/// then flipped at `defects`.
fn ladder_with_defects(defects: &[usize]) -> (CubicGraph, VertexColoring) {
    let g = fixtures::circular_ladder(M);
    let red: Vec<usize> = (0..M).filter(|i| i % 2 == 0).chain((0..M).filter(|i| i % 2 == 1).map(|i| M + i)).collect();
    let mut c = VertexColoring::from_red_set(2 * M, &red);
    for &v in defects {
        c.flip(v);
    }
    (g, c)
}

fn shift(defects: &[usize], by: usize) -> Vec<usize> {
    defects.iter().map(|&v| if v < M { (v + by) % M } else { M + (v - M + by) % M }).collect()
}

fn pairing_for(g: &Graph, c: &VertexColoring) -> BallPairing {
    let centres = select_separated_centres(g, D);
    let classes = classify_balls(g, c, &centres, D).unwrap();
    pair_opposite_balls(g, &classes, c)
}

const DEFECTS: &[(&[usize], [i64; 6])] = &[
    (&[503, 1491, 500, 1492, 495, 1495, 1494, 492], [1, -1, 0, 0, -1, 1]),
    (&[498, 497, 1497, 499, 501, 1501], [0, 1, -1, -1, 1, 0]),
    (&[492, 1491, 493, 491], [-1, 1, 1, -1, 0, 0]),
];

#[test]
fn base_ladder_colouring_is_isomorphic() {
    let (g, c) = ladder_with_defects(&[]);
    let cert = verify_isomorphic_bisection(&g, &c).unwrap();
    assert_eq!(cert.class_size, M);
    assert_eq!(BalanceState::new(&g, c).discrepancies(), [0; 6]);
}

#[test]
fn reducer_route_balances_ladder_defects() {
    for &(defects, expected) in DEFECTS {
        for offset in [0, 2, 100, 358] {
            let (g, c) = ladder_with_defects(&shift(defects, offset));
            assert_eq!(c.imbalance(), 0);
            assert_eq!(BalanceState::new(&g, c.clone()).discrepancies(), expected);
            let pairing = pairing_for(&g, &c);
            assert!(pairing.len() >= 4);
            let out = balance_all(&g, &c, &pairing, &BalanceConfig { radius_budget: BUDGET })
                .unwrap_or_else(|f| panic!("offset {offset}: {f}"));
            assert!(!out.steps.is_empty());
            assert_eq!(out.coloring.imbalance(), 0);
            assert_eq!(out.steps.last().unwrap().discrepancies, [0; 6]);
            // independent re-check of the certificate
            assert_eq!(verify_isomorphic_bisection(&g, &out.coloring).unwrap(), out.certificate);
            p2_closure_check(&g, &out.coloring).unwrap();
        }
    }
}

#[test]
fn steps_only_touch_reducer_domains() {
    let (defects, _) = DEFECTS[0];
    let (g, c) = ladder_with_defects(defects);
    let pairing = pairing_for(&g, &c);
    let out = balance_all(&g, &c, &pairing, &BalanceConfig { radius_budget: BUDGET }).unwrap();
    let mut allowed: BTreeSet<usize> = BTreeSet::new();
    for step in &out.steps {
        let m = &pairing.pairs[step.pair_index];
        let r = find_reducer(&g, m.u, step.t, BUDGET).unwrap();
        for &v in &r.domain {
            allowed.insert(v);
            allowed.insert(m.image(v).unwrap());
        }
    }
    let changed: Vec<usize> = (0..g.order()).filter(|&v| c.get(v) != out.coloring.get(v)).collect();
    assert!(!changed.is_empty());
    assert!(changed.iter().all(|v| allowed.contains(v)));
    let recoloured: usize = out.steps.iter().map(|s| s.recoloured).sum();
    assert!(changed.len() <= recoloured);
}

#[test]
fn single_step_keeps_bisection_or_reverts() {
    let (defects, _) = DEFECTS[2];
    let (g, c) = ladder_with_defects(defects);
    let pairing = pairing_for(&g, &c);
    let mut applied = 0;
    for t in 3..=6 {
        for (i, m) in pairing.pairs.iter().enumerate().take(3) {
            let r = find_reducer(&g, m.u, t, BUDGET).unwrap();
            for surplus in [Color::Red, Color::Blue] {
                let mut state = BalanceState::new(&g, c.clone());
                let before = state.discrepancies();
                match apply_reducer_pair(&mut state, i, m, &r, surplus) {
                    Ok(step) => {
                        assert_eq!(state.coloring().imbalance(), 0);
                        let after = state.discrepancies();
                        let sign = if surplus == Color::Red { -1 } else { 1 };
                        assert_eq!(after[t - 1], before[t - 1] + sign);
                        assert!(after[t..].iter().zip(&before[t..]).all(|(a, b)| a == b));
                        assert_eq!(step.discrepancies, after);
                        applied += 1;
                    }
                    Err(_) => assert_eq!(state.coloring(), &c),
                }
            }
        }
    }
    assert!(applied > 0);
}

#[test]
fn balance_rejects_non_bisections() {
    let (g, mut c) = ladder_with_defects(&[]);
    c.flip(0);
    let pairing = pairing_for(&g, &c);
    let err = balance_all(&g, &c, &pairing, &BalanceConfig { radius_budget: BUDGET }).unwrap_err();
    assert!(matches!(err.failure, BalanceFailureKind::NotBisection { .. }));
}

/// Colour classes compared by trying every bijection between them.
fn isomorphic_by_permutation(g: &Graph, c: &VertexColoring) -> bool {
    let red = c.red_vertices();
    let blue: Vec<usize> = (0..g.order()).filter(|&v| c.get(v) == Color::Blue).collect();
    if red.len() != blue.len() {
        return false;
    }
    fn extend(g: &Graph, red: &[usize], blue: &[usize], image: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let k = image.len();
        if k == red.len() {
            return true;
        }
        for j in 0..blue.len() {
            if used[j] {
                continue;
            }
            let ok = (0..k).all(|i| g.has_edge(red[i], red[k]) == g.has_edge(image[i], blue[j]));
            if ok {
                used[j] = true;
                image.push(blue[j]);
                if extend(g, red, blue, image, used) {
                    return true;
                }
                image.pop();
                used[j] = false;
            }
        }
        false
    }
    extend(g, &red, &blue, &mut Vec::new(), &mut vec![false; blue.len()])
}

fn bisections(n: usize) -> impl Iterator<Item = VertexColoring> {
    (0u32..1 << n)
        .filter(move |m| m.count_ones() as usize == n / 2 && m & 1 == 1)
        .map(move |m| VertexColoring::from_red_set(n, &(0..n).filter(|&v| m >> v & 1 == 1).collect::<Vec<_>>()))
}

#[test]
fn certificates_agree_with_permutation_search() {
    for n in [4, 6, 8, 10] {
        let mut agree = (0, 0);
        for g in fixtures::connected_cubic(n) {
            for c in bisections(n) {
                let census = verify_isomorphic_bisection(&g, &c).is_ok();
                assert_eq!(census, isomorphic_by_permutation(&g, &c), "n = {n}, {}", c.to_letters());
                if census {
                    agree.0 += 1;
                } else {
                    agree.1 += 1;
                }
            }
        }
        assert!(agree.0 > 0);
        if n >= 8 {
            assert!(agree.1 > 0);
        }
    }
}

#[test]
fn repair_from_every_bisection_of_small_graphs() {
    let mut outcomes = (0, 0);
    for n in [6, 8, 10] {
        for g in fixtures::connected_cubic(n) {
            let pair = thomassen_decompose(&g, 5, 5, 1 << 20).found().unwrap();
            for c in bisections(n) {
                match greedy_repair(&g, &c, &pair, &RepairConfig::default()) {
                    Ok(out) => {
                        assert!(isomorphic_by_permutation(&g, &out.coloring));
                        outcomes.0 += 1;
                    }
                    Err(RepairFailure::Stuck { .. } | RepairFailure::IterationLimit { .. }) => outcomes.1 += 1,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
    assert_eq!(outcomes.1, 0, "repaired {} of {}", outcomes.0, outcomes.0 + outcomes.1);
}
