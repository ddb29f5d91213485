//! Sorted exponent ladders generated from positive base rates.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::EngineError;

/// Two ladder values are identified when `|a - b| < LADDER_TOL · max(1, |a|)`.
pub const LADDER_TOL: f64 = 1e-10;

pub(crate) fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() < LADDER_TOL * a.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderFlags {
    /// Closed under addition.
    pub additive: bool,
    /// Closed under `μ ↦ μ + 1`.
    pub unit_increment: bool,
}

impl LadderFlags {
    pub const ADDITIVE: LadderFlags = LadderFlags {
        additive: true,
        unit_increment: false,
    };
    pub const ADDITIVE_UNIT: LadderFlags = LadderFlags {
        additive: true,
        unit_increment: true,
    };
}

/// Realised prefix `μ_1 < μ_2 < …` of the set generated by `base`, up to a cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentLadder {
    base: Vec<f64>,
    flags: LadderFlags,
    cutoff: f64,
    values: Vec<f64>,
}

/// Every element of the generated set that is `≤ cutoff`, sorted and deduplicated.
pub fn build_ladder(
    base: &[f64],
    flags: LadderFlags,
    cutoff: f64,
) -> Result<ExponentLadder, EngineError> {
    if base.is_empty() {
        return Err(EngineError::EmptyBase);
    }
    if let Some(&bad) = base.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(EngineError::NonPositiveBase(bad));
    }
    let min = base.iter().copied().fold(f64::INFINITY, f64::min);
    if !(cutoff >= min) {
        return Err(EngineError::InvalidCutoff { cutoff, min });
    }
    let mut generators: Vec<f64> = Vec::new();
    if flags.additive {
        generators.extend_from_slice(base);
    }
    if flags.unit_increment {
        generators.push(1.0);
    }
    // Positive floats order like their bit patterns.
    let mut heap: BinaryHeap<Reverse<u64>> = base
        .iter()
        .filter(|&&b| b <= cutoff * (1.0 + LADDER_TOL))
        .map(|b| Reverse(b.to_bits()))
        .collect();
    let mut values: Vec<f64> = Vec::new();
    while let Some(Reverse(bits)) = heap.pop() {
        let x = f64::from_bits(bits);
        if values.last().is_some_and(|&last| same_rate(x, last)) {
            continue;
        }
        values.push(x);
        for g in &generators {
            let y = x + g;
            if y <= cutoff * (1.0 + LADDER_TOL) {
                heap.push(Reverse(y.to_bits()));
            }
        }
    }
    let mut sorted_base = base.to_vec();
    sorted_base.sort_by(f64::total_cmp);
    Ok(ExponentLadder {
        base: sorted_base,
        flags,
        cutoff,
        values,
    })
}

impl ExponentLadder {
    /// Smallest ladder whose realised prefix has at least `min_len` elements
    /// and reaches `min_cutoff`.
    pub fn covering(
        base: &[f64],
        flags: LadderFlags,
        min_len: usize,
        min_cutoff: f64,
    ) -> Result<Self, EngineError> {
        let min = base.iter().copied().fold(f64::INFINITY, f64::min);
        let max = base.iter().copied().fold(0.0, f64::max);
        let mut cutoff = max.max(min_cutoff).max(min);
        loop {
            let ladder = build_ladder(base, flags, cutoff)?;
            if ladder.len() >= min_len {
                return Ok(ladder);
            }
            if !flags.additive && !flags.unit_increment {
                return Err(EngineError::LadderOverflow {
                    needed: min_len,
                    realized: ladder.len(),
                    cutoff,
                });
            }
            cutoff = cutoff * 2.0 + 1.0;
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn flags(&self) -> LadderFlags {
        self.flags
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `μ_{idx+1}`.
    pub fn get(&self, idx: usize) -> Option<f64> {
        self.values.get(idx).copied()
    }

    /// Position of `mu` in the realised prefix.
    pub fn index_of(&self, mu: f64) -> Option<usize> {
        let pos = self
            .values
            .partition_point(|&v| v < mu && !same_rate(v, mu));
        (pos < self.values.len() && same_rate(self.values[pos], mu)).then_some(pos)
    }

    pub fn contains(&self, mu: f64) -> bool {
        self.index_of(mu).is_some()
    }

    /// All multisets `{μ_{j_1}, …, μ_{j_m}}` of realised values with
    /// `2 ≤ m ≤ max_arity` summing to `mu`.
    pub fn decompose(&self, mu: f64, max_arity: usize) -> Result<Vec<Vec<f64>>, EngineError> {
        let idx = self.index_of(mu).ok_or(EngineError::NotInLadder { mu })?;
        Ok(self
            .decompose_indices(idx, max_arity)
            .into_iter()
            .map(|parts| parts.into_iter().map(|i| self.values[i]).collect())
            .collect())
    }

    /// Index form of [`decompose`](Self::decompose); each multiset is a
    /// nondecreasing index list.
    pub fn decompose_indices(&self, idx: usize, max_arity: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut parts = Vec::new();
        self.search(self.values[idx], 0, idx, max_arity, &mut parts, &mut out);
        out
    }

    fn search(
        &self,
        remaining: f64,
        start: usize,
        end: usize,
        max_arity: usize,
        parts: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let target = self.values[end];
        let tol = LADDER_TOL * target.max(1.0);
        for i in start..end {
            let v = self.values[i];
            if v > remaining + tol {
                break;
            }
            parts.push(i);
            let rest = remaining - v;
            if rest.abs() <= tol {
                if parts.len() >= 2 {
                    out.push(parts.clone());
                }
            } else if parts.len() < max_arity && rest >= self.values[0] - tol {
                self.search(rest, i, end, max_arity, parts, out);
            }
            parts.pop();
        }
    }

    /// Ordered index tuples `(j_1, …, j_m)` with `Σ μ_{j_ℓ} = μ_{idx+1}` and
    /// exactly `arity` entries.
    pub fn ordered_tuples(&self, idx: usize, arity: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for multiset in self.decompose_indices(idx, arity) {
            if multiset.len() == arity {
                distinct_permutations(multiset, &mut out);
            }
        }
        out
    }
}

/// Appends every distinct permutation of a sorted list.
fn distinct_permutations(mut items: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    loop {
        out.push(items.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..items.len()).rev().find(|&i| items[i - 1] < items[i]) else {
            return;
        };
        let j = (i..items.len())
            .rev()
            .find(|&j| items[j] > items[i - 1])
            .unwrap();
        items.swap(i - 1, j);
        items[i..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_ladder() {
        let l = build_ladder(&[1.0], LadderFlags::ADDITIVE, 6.0).unwrap();
        assert_eq!(l.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn spectrum_and_forcing_base() {
        let l = build_ladder(&[2.0, 1.0], LadderFlags::ADDITIVE, 5.0).unwrap();
        assert_eq!(l.values(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(l.get(0), Some(1.0));
    }

    #[test]
    fn unit_increment_without_additive() {
        let l = build_ladder(
            &[0.5],
            LadderFlags {
                additive: false,
                unit_increment: true,
            },
            3.0,
        )
        .unwrap();
        assert_eq!(l.values(), &[0.5, 1.5, 2.5]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            build_ladder(&[], LadderFlags::ADDITIVE, 1.0),
            Err(EngineError::EmptyBase)
        );
        assert_eq!(
            build_ladder(&[-1.0], LadderFlags::ADDITIVE, 1.0),
            Err(EngineError::NonPositiveBase(-1.0))
        );
        let l = build_ladder(&[1.0], LadderFlags::ADDITIVE, 4.0).unwrap();
        assert_eq!(
            l.decompose(2.5, 4),
            Err(EngineError::NotInLadder { mu: 2.5 })
        );
    }

    #[test]
    fn decompositions() {
        let l = build_ladder(&[1.0], LadderFlags::ADDITIVE, 8.0).unwrap();
        assert_eq!(l.decompose(2.0, 8).unwrap(), vec![vec![1.0, 1.0]]);
        let mut four = l.decompose(4.0, 8).unwrap();
        four.sort_by(|a, b| a.len().cmp(&b.len()).then(a.partial_cmp(b).unwrap()));
        assert_eq!(
            four,
            vec![
                vec![1.0, 3.0],
                vec![2.0, 2.0],
                vec![1.0, 1.0, 2.0],
                vec![1.0, 1.0, 1.0, 1.0]
            ]
        );
        assert!(l.decompose(1.0, 8).unwrap().is_empty());
        assert_eq!(l.decompose(4.0, 2).unwrap().len(), 2);
    }

    #[test]
    fn ordered_tuples_expand_multisets() {
        let l = build_ladder(&[1.0], LadderFlags::ADDITIVE, 8.0).unwrap();
        let mut t = l.ordered_tuples(3, 2);
        t.sort();
        assert_eq!(t, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(l.ordered_tuples(3, 3).len(), 3);
        assert_eq!(l.ordered_tuples(3, 4), vec![vec![0, 0, 0, 0]]);
    }

    #[test]
    fn covering_grows_cutoff() {
        let l = ExponentLadder::covering(&[1.0], LadderFlags::ADDITIVE, 10, 0.0).unwrap();
        assert!(l.len() >= 10);
        assert_eq!(l.get(9), Some(10.0));
    }
}
