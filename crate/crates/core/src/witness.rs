//! Construction of a one-violation pair on the core from two overlapping
//! triples.
//!
//! Given two triples over the same partition whose tails agree on the back
//! half and whose violation cores share at most one pair, and given two
//! pairs of the second core that the first tail labels differently, the
//! construction produces a labeling `L'` (all ones except zeros on the
//! right vertices of the second core) and a matching `M'` (straight red
//! everywhere except one blue swap on those two pairs) such that exactly
//! one edge of `M'` violates `L'`. Five conditions are checked
//! programmatically rather than assumed.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Color, Edge};
use crate::partition::{canonical_block, violation_core, PairId, Partition, SubLabeling};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("triples do not live on the same core pair set")]
    CoreSetMismatch,
    #[error("back halves of the tails differ")]
    BackHalfMismatch,
    #[error("violation cores share {0} pairs, need at most 1")]
    CoresOverlap(usize),
    #[error("no two pairs of the second core get different tail labels")]
    NoSplitPair,
    #[error("shape error: {0}")]
    BadShape(String),
    #[error("internal check ({0}) failed")]
    CheckFailed(&'static str),
}

#[derive(Clone, Debug)]
pub struct OneViolationWitness {
    /// The matching on the core pair set: straight red except the blue swap.
    pub matching_edges: Vec<Edge>,
    /// The labeling on the core pair set.
    pub labels: SubLabeling,
    /// The two pairs whose right vertices were swapped.
    pub swapped: (PairId, PairId),
    /// The unique violating edge.
    pub violating_edge: Edge,
}

/// Builds the one-violation pair for cores `h`, `h'` and tails `d`, `d'`
/// over `partition`. All preconditions are validated and reported
/// individually; the five contract conditions are re-checked on the
/// constructed objects.
pub fn one_violation_witness(
    partition: &Partition,
    h: &[PairId],
    d: &[PairId],
    h_prime: &[PairId],
    d_prime: &[PairId],
) -> Result<OneViolationWitness, WitnessError> {
    let k = partition.k();
    if h.len() != 3 || h_prime.len() != 3 || d.len() != 4 * k || d_prime.len() != 4 * k {
        return Err(WitnessError::BadShape(
            "cores must have 3 pairs and tails 4k".into(),
        ));
    }
    let core_set: BTreeSet<PairId> = partition.core_pairs().iter().copied().collect();
    let union_a: BTreeSet<PairId> = h.iter().chain(d.iter()).copied().collect();
    let union_b: BTreeSet<PairId> = h_prime.iter().chain(d_prime.iter()).copied().collect();
    if union_a != core_set || union_b != core_set || union_a.len() != 4 * k + 3 {
        return Err(WitnessError::CoreSetMismatch);
    }
    if d[2 * k..] != d_prime[2 * k..] {
        return Err(WitnessError::BackHalfMismatch);
    }
    let h_set: BTreeSet<PairId> = h.iter().copied().collect();
    let overlap = h_prime.iter().filter(|p| h_set.contains(p)).count();
    if overlap > 1 {
        return Err(WitnessError::CoresOverlap(overlap));
    }

    // Tail labels of the first triple; pairs of h' \ h always sit in d.
    let (_, tail_labels) = canonical_block(d).expect("validated shape");
    let fresh: Vec<PairId> = h_prime
        .iter()
        .filter(|p| !h_set.contains(p))
        .copied()
        .collect();
    let mut swap: Option<(PairId, PairId)> = None;
    'search: for (i, &p1) in fresh.iter().enumerate() {
        for &p2 in &fresh[i + 1..] {
            if tail_labels[&p1].1 != tail_labels[&p2].1 {
                swap = Some((p1, p2));
                break 'search;
            }
        }
    }
    let (p1, p2) = swap.ok_or(WitnessError::NoSplitPair)?;

    // L': ones everywhere, zeros on the right vertices of h'.
    let labels: SubLabeling = core_set
        .iter()
        .map(|&p| (p, (true, !h_prime.contains(&p))))
        .collect();
    // M': straight red except the blue swap on (p1, p2).
    let mut matching_edges: Vec<Edge> = core_set
        .iter()
        .filter(|&&p| p != p1 && p != p2)
        .map(|&p| Edge::new(p, p, Color::Red))
        .collect();
    matching_edges.push(Edge::new(p1, p2, Color::Blue));
    matching_edges.push(Edge::new(p2, p1, Color::Blue));
    matching_edges.sort_unstable();

    // (i) the labeling restricted to h' is the violation-core labeling.
    let (_, expected) = violation_core(h_prime).expect("h' has 3 pairs");
    for (&p, bits) in &expected {
        if labels[&p] != *bits {
            return Err(WitnessError::CheckFailed("core labeling on h'"));
        }
    }
    // (ii) the labeling restricted to d' is consistent with the canonical
    // cross matching of d' (all red, so equal labels are needed).
    let (cross, _) = canonical_block(d_prime).expect("validated shape");
    for e in &cross {
        if labels[&e.u].0 != labels[&e.v].1 {
            return Err(WitnessError::CheckFailed("labeling consistent on d'"));
        }
    }
    // (iii) the matching restricted to h is the violation core of h.
    for &p in h {
        if !matching_edges.contains(&Edge::new(p, p, Color::Red)) {
            return Err(WitnessError::CheckFailed("core matching on h"));
        }
    }
    // (iv) the matching restricted to d is consistent with the tail labels.
    for e in &matching_edges {
        let (inside_u, inside_v) = (
            tail_labels.contains_key(&e.u),
            tail_labels.contains_key(&e.v),
        );
        if !(inside_u && inside_v) {
            continue;
        }
        let lu = tail_labels[&e.u].0;
        let rv = tail_labels[&e.v].1;
        let consistent = match e.color {
            Color::Red => lu == rv,
            Color::Blue => lu != rv,
        };
        if !consistent {
            return Err(WitnessError::CheckFailed("matching consistent on d"));
        }
    }
    // (v) exactly one violating edge.
    let violating: Vec<Edge> = matching_edges
        .iter()
        .filter(|e| {
            let lu = labels[&e.u].0;
            let rv = labels[&e.v].1;
            match e.color {
                Color::Red => lu != rv,
                Color::Blue => lu == rv,
            }
        })
        .copied()
        .collect();
    if violating.len() != 1 {
        return Err(WitnessError::CheckFailed("exactly one violation"));
    }
    let violating_edge = violating[0];
    // The violation is the straight red edge on the third pair of h'.
    let third: Vec<PairId> = h_prime
        .iter()
        .filter(|&&p| p != p1 && p != p2)
        .copied()
        .collect();
    if violating_edge.color != Color::Red
        || violating_edge.u != violating_edge.v
        || !third.contains(&violating_edge.u)
    {
        return Err(WitnessError::CheckFailed("violation on third core pair"));
    }

    Ok(OneViolationWitness {
        matching_edges,
        labels,
        swapped: (p1, p2),
        violating_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{expected_n, half_split_bit, sample_partition};
    use crate::seeding::rng_from;

    /// Builds a valid (h, d, h', d') configuration over the sampled
    /// partition: h' takes `overlap` pairs of h plus fresh tail pairs from
    /// differently labeled front slots.
    fn config(
        k: usize,
        seed: u64,
        overlap: usize,
    ) -> (
        Partition,
        Vec<PairId>,
        Vec<PairId>,
        Vec<PairId>,
        Vec<PairId>,
    ) {
        let n = expected_n(k, 1);
        let p = sample_partition(n, k, 1, seed).unwrap();
        let core: Vec<PairId> = p.core_pairs().to_vec();
        let h = core[..3].to_vec();
        let d: Vec<PairId> = core[3..].to_vec();
        // Fresh picks from the front half of d with both label values:
        // position 0 has label 1, position k has label 0.
        let mut h_prime: Vec<PairId> = h[..overlap].to_vec();
        h_prime.push(d[0]);
        h_prime.push(d[k]);
        if overlap == 0 {
            assert!(k >= 2, "zero overlap needs a third fresh front slot");
            h_prime.push(d[1]);
        }
        h_prime.sort_unstable();
        h_prime.dedup();
        assert_eq!(h_prime.len(), 3);
        let back = d[2 * k..].to_vec();
        let mut d_prime: Vec<PairId> = core
            .iter()
            .filter(|p| !h_prime.contains(p) && !back.contains(p))
            .copied()
            .collect();
        d_prime.extend_from_slice(&back);
        (p, h, d, h_prime, d_prime)
    }

    #[test]
    fn one_overlap_case() {
        for seed in 0..20 {
            let (p, h, d, h_prime, d_prime) = config(1, seed, 1);
            let w = one_violation_witness(&p, &h, &d, &h_prime, &d_prime).unwrap();
            assert_eq!(w.violating_edge.color, Color::Red);
            assert_eq!(w.matching_edges.len(), 7);
        }
    }

    #[test]
    fn zero_overlap_needs_k_at_least_two() {
        for seed in 0..20 {
            let (p, h, d, h_prime, d_prime) = config(2, seed, 0);
            let w = one_violation_witness(&p, &h, &d, &h_prime, &d_prime).unwrap();
            assert_eq!(w.matching_edges.len(), 11);
        }
    }

    #[test]
    fn equal_tail_labels_rejected() {
        // Build h' from two same-label front slots only: positions 0 and
        // 2k (both label 1 at k = 2: positions 0..2 are 1, 2..4 are 0 on
        // the front half). Use positions 0 and 1 (both label 1).
        let k = 2;
        let n = expected_n(k, 1);
        let p = sample_partition(n, k, 1, 3).unwrap();
        let core: Vec<PairId> = p.core_pairs().to_vec();
        let h = core[..3].to_vec();
        let d: Vec<PairId> = core[3..].to_vec();
        assert!(half_split_bit(k, 0) && half_split_bit(k, 1));
        let mut h_prime = vec![h[0], d[0], d[1]];
        h_prime.sort_unstable();
        let back = d[2 * k..].to_vec();
        let mut d_prime: Vec<PairId> = core
            .iter()
            .filter(|q| !h_prime.contains(q) && !back.contains(q))
            .copied()
            .collect();
        d_prime.extend_from_slice(&back);
        let err = one_violation_witness(&p, &h, &d, &h_prime, &d_prime).unwrap_err();
        assert_eq!(err, WitnessError::NoSplitPair);
    }

    #[test]
    fn precondition_gates() {
        let (p, h, d, h_prime, d_prime) = config(1, 0, 1);
        // Too much overlap.
        let err = one_violation_witness(&p, &h, &d, &h, &d).unwrap_err();
        assert!(matches!(err, WitnessError::CoresOverlap(3)), "{err:?}");
        // Wrong back half: rotate the tail.
        let mut d_rot = d.clone();
        d_rot.rotate_left(1);
        let err = one_violation_witness(&p, &h, &d_rot, &h_prime, &d_prime).unwrap_err();
        assert_eq!(err, WitnessError::BackHalfMismatch);
        // Foreign pair.
        let mut h_bad = h_prime.clone();
        h_bad[0] = p.a_blocks()[0][0];
        let err = one_violation_witness(&p, &h, &d, &h_bad, &d_prime).unwrap_err();
        assert_eq!(err, WitnessError::CoreSetMismatch);
    }

    #[test]
    fn randomized_valid_configurations_always_pass() {
        let mut rng = rng_from(17);
        for trial in 0..500 {
            let k = 1 + (trial % 2);
            let n = expected_n(k, 1);
            let seed = rand::Rng::random::<u64>(&mut rng);
            let p = sample_partition(n, k, 1, seed).unwrap();
            let core: Vec<PairId> = p.core_pairs().to_vec();
            let h = core[..3].to_vec();
            let d: Vec<PairId> = core[3..].to_vec();
            let overlap = if k == 1 { 1 } else { trial % 2 };
            let mut h_prime: Vec<PairId> = h[..overlap].to_vec();
            h_prime.push(d[rand::Rng::random_range(&mut rng, 0..k)]);
            h_prime.push(d[rand::Rng::random_range(&mut rng, k..2 * k)]);
            while h_prime.len() < 3 {
                let cand = d[rand::Rng::random_range(&mut rng, 0..2 * k)];
                if !h_prime.contains(&cand) {
                    h_prime.push(cand);
                }
            }
            h_prime.sort_unstable();
            let back = d[2 * k..].to_vec();
            let mut d_prime: Vec<PairId> = core
                .iter()
                .filter(|q| !h_prime.contains(q) && !back.contains(q))
                .copied()
                .collect();
            d_prime.extend_from_slice(&back);
            let w = one_violation_witness(&p, &h, &d, &h_prime, &d_prime).unwrap();
            assert_eq!(w.matching_edges.len(), 4 * k + 3);
        }
    }
}
