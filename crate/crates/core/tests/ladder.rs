use asymptotics_core::engine::{build_ladder, ExponentLadder, LadderFlags};
use proptest::prelude::*;

/// All sums `Σ n_i b_i (+ k)` with `Σ n_i ≥ 1`, by exhaustive enumeration.
fn brute_force(base: &[f64], unit: bool, cutoff: f64) -> Vec<f64> {
    let mut sums = vec![0.0];
    for &b in base {
        let mut next = Vec::new();
        for &s in &sums {
            let mut x = s;
            while x <= cutoff + 1e-9 {
                next.push(x);
                x += b;
            }
        }
        sums = next;
    }
    let mut out: Vec<f64> = sums.into_iter().filter(|&x| x > 1e-12).collect();
    if unit {
        let mut more = Vec::new();
        for &x in &out {
            let mut y = x + 1.0;
            while y <= cutoff + 1e-9 {
                more.push(y);
                y += 1.0;
            }
        }
        out.extend(more);
    }
    out.retain(|&x| x <= cutoff * (1.0 + 1e-10));
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * b.max(1.0));
    out
}

fn assert_same(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
    }
}

/// Multisets of ladder values with 2..=arity elements summing to `mu`.
fn brute_decompositions(values: &[f64], mu: f64, arity: usize) -> Vec<Vec<f64>> {
    fn go(
        values: &[f64],
        start: usize,
        rest: f64,
        left: usize,
        cur: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
    ) {
        if rest.abs() < 1e-9 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        if left == 0 {
            return;
        }
        for i in start..values.len() {
            if values[i] > rest + 1e-9 {
                break;
            }
            cur.push(values[i]);
            go(values, i, rest - values[i], left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(values, 0, mu, arity, &mut Vec::new(), &mut out);
    out
}

#[test]
fn irrational_base_matches_enumeration() {
    let base = [1.0, 2f64.sqrt()];
    let ladder = build_ladder(&base, LadderFlags::ADDITIVE, 7.0).unwrap();
    assert_same(ladder.values(), &brute_force(&base, false, 7.0));
    for (i, &mu) in ladder.values().iter().enumerate() {
        let mut got: Vec<Vec<f64>> = ladder.decompose(mu, 4).unwrap();
        let mut want = brute_decompositions(&ladder.values()[..i], mu, 4);
        for v in got.iter_mut().chain(want.iter_mut()) {
            v.sort_by(f64::total_cmp);
        }
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), want.len(), "mu = {mu}");
        for (g, w) in got.iter().zip(&want) {
            assert_same(g, w);
        }
    }
}

fn multinomial(parts: &[usize]) -> usize {
    let mut counts = std::collections::BTreeMap::new();
    for p in parts {
        *counts.entry(p).or_insert(0usize) += 1;
    }
    let fact = |n: usize| (1..=n).product::<usize>();
    counts
        .values()
        .fold(fact(parts.len()), |acc, &k| acc / fact(k))
}

#[test]
fn ordered_tuples_count_permutations() {
    let ladder =
        ExponentLadder::covering(&[0.5, 1.25], LadderFlags::ADDITIVE_UNIT, 12, 0.0).unwrap();
    for idx in 0..ladder.len() {
        for arity in 2..=3 {
            let tuples = ladder.ordered_tuples(idx, arity);
            let expected: usize = ladder
                .decompose_indices(idx, arity)
                .iter()
                .filter(|m| m.len() == arity)
                .map(|m| multinomial(m))
                .sum();
            assert_eq!(tuples.len(), expected);
            for t in &tuples {
                let s: f64 = t.iter().map(|&j| ladder.values()[j]).sum();
                assert!((s - ladder.values()[idx]).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #[test]
    fn generated_sets_match_enumeration(
        base in prop::collection::vec(0.3f64..2.5, 1..=3),
        unit in any::<bool>(),
    ) {
        let flags = if unit { LadderFlags::ADDITIVE_UNIT } else { LadderFlags::ADDITIVE };
        let ladder = build_ladder(&base, flags, 5.0).unwrap();
        let want = brute_force(&base, unit, 5.0);
        prop_assert_eq!(ladder.len(), want.len());
        for (x, y) in ladder.values().iter().zip(&want) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        for w in ladder.values().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }
}
