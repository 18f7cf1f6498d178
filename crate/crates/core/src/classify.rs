//! Exact conditional probabilities over block products and the
//! good / small / bad classification of triples with respect to a
//! rectangle of matchings and labelings.
//!
//! A triple is *good* when, for every consistent block-level alternative on
//! its tail, the rectangle probability of the canonical tail object stays
//! within a multiplicative `(1 + epsilon)` band of the alternative's (and
//! both are positive); *small* when the canonical probability on either
//! side is at most `2^(-delta m)`; *bad* otherwise. Small takes precedence
//! over good, so a small triple is never classified good.

use thiserror::Error;

use crate::graph::Edge;
use crate::labeling::{Labeling, ParityTarget};
use crate::matching::Matching;
use crate::partition::{
    all_block_labelings, all_block_matchings, canonical_block, violation_core, Partition,
    SubLabeling, Triple,
};
use crate::rat::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("enumeration of {total} block products exceeds cap {cap}")]
    CapExceeded { total: u128, cap: u128 },
    #[error("delta must be a positive rational with small denominator")]
    BadDelta,
    #[error(transparent)]
    Partition(#[from] crate::partition::PartitionError),
}

/// Predicate side of a rectangle over full matchings.
pub type MatchingPredicate<'a> = dyn Fn(&Matching) -> bool + Sync + 'a;
/// Predicate side of a rectangle over full labelings.
pub type LabelingPredicate<'a> = dyn Fn(&Labeling) -> bool + Sync + 'a;

fn checked_total(choices_per_block: u128, blocks: usize, cap: u128) -> Result<u128, ClassifyError> {
    let mut total: u128 = 1;
    for _ in 0..blocks {
        total = total
            .checked_mul(choices_per_block)
            .ok_or(ClassifyError::CapExceeded {
                total: u128::MAX,
                cap,
            })?;
        if total > cap {
            return Err(ClassifyError::CapExceeded { total, cap });
        }
    }
    Ok(total)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Exact probability that a uniform matching respecting `partition`, with
/// its core restriction pinned to `core_edges`, satisfies the predicate.
/// Enumerates the full product of per-B-block consistent matchings.
pub fn conditional_matching_probability(
    partition: &Partition,
    core_edges: &[Edge],
    predicate: &MatchingPredicate<'_>,
    cap: u128,
) -> Result<Rat, ClassifyError> {
    let m = partition.m();
    let per_block = factorial(4 * partition.k());
    let total = checked_total(per_block, m, cap)?;

    let block_choices: Vec<Vec<Vec<Edge>>> = partition
        .b_blocks()
        .iter()
        .map(|b| all_block_matchings(b))
        .collect();
    let mut fixed: Vec<Edge> = Vec::new();
    for a in partition.a_blocks() {
        fixed.extend(canonical_block(a)?.0);
    }
    fixed.extend_from_slice(core_edges);

    let mut hits: u128 = 0;
    let mut odometer = vec![0usize; m];
    loop {
        let mut edges = fixed.clone();
        for (i, &c) in odometer.iter().enumerate() {
            edges.extend_from_slice(&block_choices[i][c]);
        }
        let matching = Matching::new(edges).expect("blocks are vertex-disjoint");
        if predicate(&matching) {
            hits += 1;
        }
        // Advance the odometer.
        let mut pos = 0;
        loop {
            if pos == m {
                let num = i64::try_from(hits).expect("cap bounds count");
                let den = i64::try_from(total).expect("cap bounds total");
                return Ok(Rat::new(num, den));
            }
            odometer[pos] += 1;
            if odometer[pos] < block_choices[pos].len() {
                break;
            }
            odometer[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact probability that a uniform labeling respecting `partition`, with
/// its core restriction pinned to `core_labels`, satisfies the predicate.
pub fn conditional_labeling_probability(
    partition: &Partition,
    core_labels: &SubLabeling,
    predicate: &LabelingPredicate<'_>,
    cap: u128,
) -> Result<Rat, ClassifyError> {
    let m = partition.m();
    let per_block = 1u128 << (4 * partition.k());
    let total = checked_total(per_block, m, cap)?;

    let block_choices: Vec<Vec<SubLabeling>> = partition
        .a_blocks()
        .iter()
        .map(|a| all_block_labelings(a))
        .collect();
    let n = partition.n();
    let mut base_left = vec![false; n];
    let mut base_right = vec![false; n];
    let apply = |labels: &SubLabeling, left: &mut [bool], right: &mut [bool]| {
        for (&p, &(lb, rb)) in labels {
            left[p] = lb;
            right[p] = rb;
        }
    };
    for b in partition.b_blocks() {
        apply(&canonical_block(b)?.1, &mut base_left, &mut base_right);
    }
    apply(core_labels, &mut base_left, &mut base_right);

    let mut hits: u128 = 0;
    let mut odometer = vec![0usize; m];
    loop {
        let mut left = base_left.clone();
        let mut right = base_right.clone();
        for (i, &c) in odometer.iter().enumerate() {
            apply(&block_choices[i][c], &mut left, &mut right);
        }
        let labeling = Labeling::new(left, right, ParityTarget::Odd);
        if predicate(&labeling) {
            hits += 1;
        }
        let mut pos = 0;
        loop {
            if pos == m {
                let num = i64::try_from(hits).expect("cap bounds count");
                let den = i64::try_from(total).expect("cap bounds total");
                return Ok(Rat::new(num, den));
            }
            odometer[pos] += 1;
            if odometer[pos] < block_choices[pos].len() {
                break;
            }
            odometer[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripleClass {
    Good,
    Small,
    Bad,
}

#[derive(Clone, Debug)]
pub struct TripleClassification {
    pub class: TripleClass,
    pub matching_good: bool,
    pub labeling_good: bool,
    pub matching_bad: bool,
    pub labeling_bad: bool,
    /// Canonical-tail rectangle probabilities (matching and labeling side).
    pub p_matching: Rat,
    pub p_labeling: Rat,
}

/// Is `p <= 2^(-delta * m)` for rational `delta = a/b`? Equivalent to
/// `p^b * 2^(a*m) <= 1`, which is exact.
fn at_most_two_pow_neg(p: &Rat, delta: &Rat, m: usize) -> Result<bool, ClassifyError> {
    if !delta.is_positive() {
        return Err(ClassifyError::BadDelta);
    }
    let a: u32 = delta
        .numer_string()
        .parse()
        .map_err(|_| ClassifyError::BadDelta)?;
    let b: u32 = delta
        .denom_string()
        .parse()
        .map_err(|_| ClassifyError::BadDelta)?;
    let m = u32::try_from(m).map_err(|_| ClassifyError::BadDelta)?;
    let lhs = p.pow(b) * Rat::from_int(2).pow(a.saturating_mul(m));
    Ok(lhs <= Rat::one())
}

fn within_band(canon: &Rat, alt: &Rat, one_plus_eps: &Rat) -> bool {
    // 0 < alt/(1+eps) <= canon <= (1+eps) * alt
    alt.is_positive() && canon <= &(one_plus_eps * alt) && alt <= &(one_plus_eps * canon)
}

/// Classifies a triple against a rectangle given by its two predicate
/// sides. All conditional probabilities are computed exactly.
pub fn classify_triple(
    triple: &Triple,
    matching_side: &MatchingPredicate<'_>,
    labeling_side: &LabelingPredicate<'_>,
    epsilon: &Rat,
    delta: &Rat,
    cap: u128,
) -> Result<TripleClassification, ClassifyError> {
    let partition = &triple.partition;
    let one_plus_eps = &Rat::one() + epsilon;

    let (core_m, core_l) = violation_core(&triple.core)?;
    let (tail_m, tail_l) = canonical_block(&triple.tail)?;

    // Canonical core objects: violation core plus canonical tail.
    let canon_edges: Vec<Edge> = core_m.iter().chain(tail_m.iter()).copied().collect();
    let mut canon_labels = core_l.clone();
    canon_labels.extend(tail_l);

    let p_matching = conditional_matching_probability(partition, &canon_edges, matching_side, cap)?;
    let p_labeling =
        conditional_labeling_probability(partition, &canon_labels, labeling_side, cap)?;

    let small = at_most_two_pow_neg(&p_matching, delta, partition.m())?
        || at_most_two_pow_neg(&p_labeling, delta, partition.m())?;

    // Matching side: every consistent matching of the tail as alternative.
    let mut matching_good = true;
    for alt in all_block_matchings(&triple.tail) {
        let edges: Vec<Edge> = core_m.iter().chain(alt.iter()).copied().collect();
        let p_alt = conditional_matching_probability(partition, &edges, matching_side, cap)?;
        if !within_band(&p_matching, &p_alt, &one_plus_eps) {
            matching_good = false;
            break;
        }
    }
    // Labeling side: every labeling of the tail consistent with its cross
    // matching.
    let mut labeling_good = true;
    for alt in all_block_labelings(&triple.tail) {
        let mut labels = core_l.clone();
        labels.extend(alt);
        let p_alt = conditional_labeling_probability(partition, &labels, labeling_side, cap)?;
        if !within_band(&p_labeling, &p_alt, &one_plus_eps) {
            labeling_good = false;
            break;
        }
    }

    let class = if small {
        TripleClass::Small
    } else if matching_good && labeling_good {
        TripleClass::Good
    } else {
        TripleClass::Bad
    };
    Ok(TripleClassification {
        class,
        matching_good,
        labeling_good,
        matching_bad: !small && !matching_good,
        labeling_bad: !small && !labeling_good,
        p_matching,
        p_labeling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{matching_respects_with, restrict_matching, sample_partition};

    const CAP: u128 = 1 << 24;

    fn k1_triple(seed: u64) -> Triple {
        let p = sample_partition(15, 1, 1, seed).unwrap();
        let core = p.core_pairs()[..3].to_vec();
        let tail = p.core_pairs()[3..].to_vec();
        Triple::new(p, core, tail).unwrap()
    }

    #[test]
    fn trivial_predicates() {
        let t = k1_triple(3);
        let all = classify_triple(
            &t,
            &|_| true,
            &|_| true,
            &Rat::new(3, 10),
            &Rat::new(1, 10),
            CAP,
        )
        .unwrap();
        assert_eq!(all.class, TripleClass::Good);
        assert_eq!(all.p_matching, Rat::one());
        assert_eq!(all.p_labeling, Rat::one());

        let none = classify_triple(
            &t,
            &|_| false,
            &|_| true,
            &Rat::new(3, 10),
            &Rat::new(1, 10),
            CAP,
        )
        .unwrap();
        assert_eq!(none.class, TripleClass::Small);
        assert_eq!(none.p_matching, Rat::zero());
    }

    #[test]
    fn conditional_probability_of_pinned_block() {
        // Probability that the first B-block matching equals its canonical
        // cross matching: exactly 1/24 at k = 1.
        let t = k1_triple(8);
        let (core_m, _) = violation_core(&t.core).unwrap();
        let (tail_m, _) = canonical_block(&t.tail).unwrap();
        let core_edges: Vec<Edge> = core_m.iter().chain(tail_m.iter()).copied().collect();
        let block = t.partition.b_blocks()[0].clone();
        let (canon, _) = canonical_block(&block).unwrap();
        let mut canon_sorted = canon.clone();
        canon_sorted.sort_unstable();
        let pred = move |m: &Matching| {
            let mut inside = restrict_matching(m, &block).unwrap();
            inside.sort_unstable();
            inside == canon_sorted
        };
        let p = conditional_matching_probability(&t.partition, &core_edges, &pred, CAP).unwrap();
        assert_eq!(p, Rat::new(1, 24));
    }

    #[test]
    fn pinned_block_classification_consistent_with_probabilities() {
        // With delta = 5 the threshold is 2^-5 = 1/32 < 1/24, so the pinned
        // block is not small, and it is good: the pinned B-block marginal
        // does not depend on the tail's core objects.
        let t = k1_triple(8);
        let block = t.partition.b_blocks()[0].clone();
        let (canon, _) = canonical_block(&block).unwrap();
        let mut canon_sorted = canon.clone();
        canon_sorted.sort_unstable();
        let pred = move |m: &Matching| {
            let mut inside = restrict_matching(m, &block).unwrap();
            inside.sort_unstable();
            inside == canon_sorted
        };
        let out = classify_triple(
            &t,
            &pred,
            &|_| true,
            &Rat::new(3, 10),
            &Rat::from_int(5),
            CAP,
        )
        .unwrap();
        assert_eq!(out.p_matching, Rat::new(1, 24));
        assert_eq!(out.class, TripleClass::Good);

        // With delta = 1/10 the probability 1/24 <= 2^(-1/10) fails; the
        // threshold 2^(-0.1) ~ 0.93 makes it small.
        let out = classify_triple(
            &t,
            &pred,
            &|_| true,
            &Rat::new(3, 10),
            &Rat::new(1, 10),
            CAP,
        )
        .unwrap();
        assert_eq!(out.class, TripleClass::Small);
    }

    #[test]
    fn membership_with_pinned_core_objects() {
        let s = crate::partition::sample_three_violation(15, 1, 1, 5).unwrap();
        let (core_m, _) = violation_core(&s.triple.core).unwrap();
        let (tail_m, _) = canonical_block(&s.triple.tail).unwrap();
        let pinned: Vec<Edge> = core_m.iter().chain(tail_m.iter()).copied().collect();
        assert!(matching_respects_with(
            &s.triple.partition,
            &s.matching,
            &pinned
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let t = k1_triple(1);
        let err = conditional_matching_probability(&t.partition, &[], &|_| true, 8).unwrap_err();
        assert!(matches!(err, ClassifyError::CapExceeded { .. }));
    }
}
