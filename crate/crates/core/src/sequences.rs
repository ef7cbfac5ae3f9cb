//! Simulation inputs: the integer domain, threshold classes, realizable and
//! all-ones labelings, and permutation streams over a base sequence.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{FiniteHypothesisClass, Instance, Label, LabeledExample, Sequence};

/// Largest `T` for which exhaustive enumeration is allowed by default (9! = 362,880).
pub const DEFAULT_FACTORIAL_CAP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Realizable,
    Unrealizable,
}

impl std::fmt::Display for CaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseKind::Realizable => "realizable",
            CaseKind::Unrealizable => "unrealizable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentCase {
    pub kind: CaseKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub d: usize,
}

impl ExperimentCase {
    /// Requires `1 <= d <= T`.
    pub fn new(kind: CaseKind, horizon: usize, d: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidCase("T must be at least 1".into()));
        }
        if d == 0 {
            return Err(Error::InvalidCase("d must be at least 1".into()));
        }
        if d > horizon {
            return Err(Error::InvalidCase(format!("d = {d} exceeds T = {horizon}")));
        }
        Ok(ExperimentCase { kind, horizon, d })
    }
}

/// The `T` consecutive integers ending at `floor(T/2)`; `-3..=4` for `T = 8`.
pub fn make_domain(horizon: usize) -> Vec<Instance> {
    let hi = (horizon / 2) as i64;
    let lo = hi - horizon as i64 + 1;
    (lo..=hi).map(Instance).collect()
}

/// Thresholds `h_0..h_{d-1}` with `h_i(x) = 0` iff `x <= i`.
pub fn make_threshold_class(d: usize, domain: &[Instance]) -> Result<FiniteHypothesisClass> {
    if d == 0 || d > domain.len() {
        return Err(Error::InvalidCase(format!(
            "threshold class needs 1 <= d <= {} (got {d})",
            domain.len()
        )));
    }
    FiniteHypothesisClass::from_fn(domain.to_vec(), d, |i, j| domain[j].0 > i as i64)
}

/// Realizable cases are labeled by `h_0` (0 on non-positive points), unrealizable
/// ones are all ones.
pub fn label_sequence(case: &ExperimentCase, domain: &[Instance]) -> Sequence {
    domain
        .iter()
        .map(|&x| {
            let y = match case.kind {
                CaseKind::Realizable => Label::from(x.0 > 0),
                CaseKind::Unrealizable => Label::ONE,
            };
            LabeledExample { x, y }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum PermutationSource {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

/// Orderings of a base sequence, either every one of the `T!` orderings in
/// lexicographic order of original positions, or `count` uniform shuffles.
///
/// Shuffle `k` is drawn from a ChaCha8 generator seeded with `seed` on stream
/// `k`, so any permutation can be produced independently of the others.
#[derive(Debug, Clone)]
pub struct PermutationStream {
    source: PermutationSource,
    base: Sequence,
    len: usize,
}

impl PermutationStream {
    pub fn new(source: PermutationSource, base: Sequence) -> Result<Self> {
        Self::with_cap(source, base, DEFAULT_FACTORIAL_CAP)
    }

    pub fn with_cap(source: PermutationSource, base: Sequence, cap: usize) -> Result<Self> {
        let len = match source {
            PermutationSource::Exhaustive => {
                if base.len() > cap {
                    return Err(Error::FactorialCapExceeded {
                        len: base.len(),
                        cap,
                    });
                }
                (1..=base.len()).product()
            }
            PermutationSource::Sampled { count, .. } => {
                if count == 0 {
                    return Err(Error::InvalidCase(
                        "sampled permutation count must be >= 1".into(),
                    ));
                }
                count
            }
        };
        Ok(PermutationStream { source, base, len })
    }

    pub fn source(&self) -> PermutationSource {
        self.source
    }

    pub fn base(&self) -> &Sequence {
        &self.base
    }

    /// Number of permutations the stream yields.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Original positions of the `k`-th permutation.
    pub fn order(&self, k: usize) -> Vec<usize> {
        assert!(k < self.len, "permutation index {k} out of range");
        match self.source {
            PermutationSource::Exhaustive => nth_lexicographic(self.base.len(), k),
            PermutationSource::Sampled { seed, .. } => {
                let mut rng = stream_rng(seed, k as u64);
                let mut order: Vec<usize> = (0..self.base.len()).collect();
                order.shuffle(&mut rng);
                order
            }
        }
    }

    pub fn get(&self, k: usize) -> Sequence {
        self.base.reordered(&self.order(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = Sequence> + '_ {
        (0..self.len).map(move |k| self.get(k))
    }
}

/// ChaCha8 generator for `seed` positioned on `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-seed for item `index` of a run seeded with `seed` (one SplitMix64 step
/// over `seed + (index + 1) * 0x9E3779B97F4A7C15`).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `k`-th permutation of `0..n` in lexicographic order (factorial number system).
fn nth_lexicographic(n: usize, mut k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut radix: usize = (1..n).product();
    let mut out = Vec::with_capacity(n);
    for remaining in (1..=n).rev() {
        let pick = k / radix;
        k %= radix;
        out.push(pool.remove(pick));
        if remaining > 1 {
            radix /= remaining - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{best_mistakes, mistake_profile};
    use std::collections::HashSet;

    fn ints(v: &[Instance]) -> Vec<i64> {
        v.iter().map(|x| x.0).collect()
    }

    #[test]
    fn domains() {
        assert_eq!(ints(&make_domain(8)), vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        assert_eq!(ints(&make_domain(1)), vec![0]);
        assert_eq!(ints(&make_domain(2)), vec![0, 1]);
        assert_eq!(ints(&make_domain(3)), vec![-1, 0, 1]);
        assert_eq!(make_domain(1000).len(), 1000);
    }

    #[test]
    fn threshold_class_matches_table_v() {
        let class = make_threshold_class(5, &make_domain(8)).unwrap();
        let expected: Vec<Vec<u8>> = vec![
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            vec![0, 0, 0, 0, 0, 1, 1, 1],
            vec![0, 0, 0, 0, 0, 0, 1, 1],
            vec![0, 0, 0, 0, 0, 0, 0, 1],
            vec![0, 0, 0, 0, 0, 0, 0, 0],
        ];
        assert_eq!(class.rows(), expected);
        assert_eq!(class.evaluate(0, Instance(0)).unwrap(), Label::ZERO);
        assert_eq!(class.evaluate(0, Instance(1)).unwrap(), Label::ONE);
        assert!(make_threshold_class(9, &make_domain(8)).is_err());
        assert!(make_threshold_class(0, &make_domain(8)).is_err());
    }

    #[test]
    fn threshold_rows_distinct_when_room() {
        let domain = make_domain(10);
        let nonneg = domain.iter().filter(|x| x.0 >= 0).count();
        let class = make_threshold_class(nonneg, &domain).unwrap();
        let rows: HashSet<_> = class.rows().into_iter().collect();
        assert_eq!(rows.len(), nonneg);
    }

    #[test]
    fn labelings_match_tables_iii_and_iv() {
        let domain = make_domain(8);
        let real = label_sequence(
            &ExperimentCase::new(CaseKind::Realizable, 8, 4).unwrap(),
            &domain,
        );
        let ys: Vec<u8> = real.iter().map(|e| e.y.bit()).collect();
        assert_eq!(ys, vec![0, 0, 0, 0, 1, 1, 1, 1]);
        let unreal = label_sequence(
            &ExperimentCase::new(CaseKind::Unrealizable, 8, 4).unwrap(),
            &domain,
        );
        assert!(unreal.iter().all(|e| e.y == Label::ONE));
    }

    #[test]
    fn best_mistakes_of_generated_cases() {
        for (t, d) in [(8, 4), (10, 3), (7, 5), (1000, 500)] {
            let domain = make_domain(t);
            let class = make_threshold_class(d, &domain).unwrap();
            let nonpos = domain.iter().filter(|x| x.0 <= 0).count() as u64;
            for kind in [CaseKind::Realizable, CaseKind::Unrealizable] {
                let seq = label_sequence(&ExperimentCase::new(kind, t, d).unwrap(), &domain);
                let best = best_mistakes(&mistake_profile(&class, &seq).unwrap()).count;
                match kind {
                    CaseKind::Realizable => assert_eq!(best, 0),
                    CaseKind::Unrealizable => assert_eq!(best, nonpos),
                }
            }
        }
    }

    #[test]
    fn case_validation() {
        assert!(ExperimentCase::new(CaseKind::Realizable, 4, 8).is_err());
        assert!(ExperimentCase::new(CaseKind::Realizable, 0, 0).is_err());
        assert!(ExperimentCase::new(CaseKind::Realizable, 4, 0).is_err());
    }

    fn base(t: usize) -> Sequence {
        label_sequence(
            &ExperimentCase::new(CaseKind::Realizable, t, 1).unwrap(),
            &make_domain(t),
        )
    }

    #[test]
    fn exhaustive_counts_and_uniqueness() {
        let s = PermutationStream::new(PermutationSource::Exhaustive, base(8)).unwrap();
        assert_eq!(s.len(), 40_320);
        let orders: HashSet<Vec<usize>> = (0..s.len()).map(|k| s.order(k)).collect();
        assert_eq!(orders.len(), 40_320);
        assert_eq!(s.order(0), (0..8).collect::<Vec<_>>());
        assert_eq!(s.order(1), vec![0, 1, 2, 3, 4, 5, 7, 6]);
        assert_eq!(s.order(40_319), (0..8).rev().collect::<Vec<_>>());

        let one = PermutationStream::new(PermutationSource::Exhaustive, base(1)).unwrap();
        assert_eq!(one.iter().count(), 1);
    }

    #[test]
    fn exhaustive_is_lexicographic() {
        let s = PermutationStream::new(PermutationSource::Exhaustive, base(5)).unwrap();
        let orders: Vec<Vec<usize>> = (0..s.len()).map(|k| s.order(k)).collect();
        assert!(orders.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exhaustive_cap() {
        let err = PermutationStream::new(PermutationSource::Exhaustive, base(10)).unwrap_err();
        assert_eq!(err, Error::FactorialCapExceeded { len: 10, cap: 9 });
    }

    #[test]
    fn sampled_is_seed_deterministic() {
        let src = PermutationSource::Sampled {
            count: 100,
            seed: 42,
        };
        let a: Vec<_> = PermutationStream::new(src, base(50))
            .unwrap()
            .iter()
            .collect();
        let b: Vec<_> = PermutationStream::new(src, base(50))
            .unwrap()
            .iter()
            .collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        let other = PermutationStream::new(
            PermutationSource::Sampled {
                count: 100,
                seed: 43,
            },
            base(50),
        )
        .unwrap()
        .get(0);
        assert_ne!(a[0], other);
    }

    #[test]
    fn permutations_preserve_multiset() {
        let b = base(30);
        let mut sorted_base: Vec<_> = b.examples().to_vec();
        sorted_base.sort_by_key(|e| e.x);
        let s =
            PermutationStream::new(PermutationSource::Sampled { count: 20, seed: 1 }, b).unwrap();
        for p in s.iter() {
            let mut v = p.examples().to_vec();
            v.sort_by_key(|e| e.x);
            assert_eq!(v, sorted_base);
        }
    }
}
