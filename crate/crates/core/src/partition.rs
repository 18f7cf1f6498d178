//! Block partitions of the vertex pairs and the two seeded samplers built
//! on them.
//!
//! The ambient graph is the complete double graph on `n = 4k(2m+1) + 3`
//! pairs. A partition splits the pair indices into `m` ordered A-blocks and
//! `m` ordered B-blocks of `4k` pairs each plus an unordered core set of
//! `4k + 3` pairs. A-blocks carry a fixed all-red cross matching (labels
//! free but consistent with it); B-blocks carry a fixed half-split labeling
//! (matchings free but consistent with it). All violations of a sampled
//! pair live inside the core set: the three-violation sampler places three
//! violating red edges on a random 3-subset, the full sampler makes the
//! whole core violate.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Color, Edge};
use crate::labeling::{Labeling, ParityTarget};
use crate::matching::Matching;
use crate::seeding::rng_from;

pub type PairId = usize;

/// Labels on a subset of pairs: `pair -> (left bit, right bit)`.
pub type SubLabeling = BTreeMap<PairId, (bool, bool)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("n = {n} does not equal 4k(2m+1)+3 for k = {k}, m = {m}")]
    ParamMismatch { n: usize, k: usize, m: usize },
    #[error("blocks and core do not partition the pair indices")]
    NotAPartition,
    #[error("block has wrong length")]
    BadBlockLength,
}

pub fn expected_n(k: usize, m: usize) -> usize {
    4 * k * (2 * m + 1) + 3
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    m: usize,
    a_blocks: Vec<Vec<PairId>>,
    b_blocks: Vec<Vec<PairId>>,
    core_pairs: Vec<PairId>, // sorted; the unordered 4k+3 remainder
}

impl Partition {
    pub fn new(
        k: usize,
        m: usize,
        a_blocks: Vec<Vec<PairId>>,
        b_blocks: Vec<Vec<PairId>>,
        mut core_pairs: Vec<PairId>,
    ) -> Result<Self, PartitionError> {
        let n = expected_n(k, m);
        if a_blocks.len() != m || b_blocks.len() != m {
            return Err(PartitionError::ParamMismatch { n, k, m });
        }
        if a_blocks
            .iter()
            .chain(b_blocks.iter())
            .any(|b| b.len() != 4 * k)
            || core_pairs.len() != 4 * k + 3
        {
            return Err(PartitionError::BadBlockLength);
        }
        core_pairs.sort_unstable();
        let mut all: Vec<PairId> = a_blocks
            .iter()
            .chain(b_blocks.iter())
            .flatten()
            .copied()
            .chain(core_pairs.iter().copied())
            .collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(PartitionError::NotAPartition);
        }
        Ok(Partition {
            k,
            m,
            a_blocks,
            b_blocks,
            core_pairs,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        expected_n(self.k, self.m)
    }

    pub fn a_blocks(&self) -> &[Vec<PairId>] {
        &self.a_blocks
    }

    pub fn b_blocks(&self) -> &[Vec<PairId>] {
        &self.b_blocks
    }

    pub fn core_pairs(&self) -> &[PairId] {
        &self.core_pairs
    }
}

/// A partition plus a 3-pair violation core `h` and an ordering `tail` of
/// the remaining `4k` core pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub partition: Partition,
    pub core: Vec<PairId>, // sorted, 3 pairs
    pub tail: Vec<PairId>, // ordered, 4k pairs
}

impl Triple {
    pub fn new(
        partition: Partition,
        mut core: Vec<PairId>,
        tail: Vec<PairId>,
    ) -> Result<Self, PartitionError> {
        core.sort_unstable();
        let mut union: Vec<PairId> = core.iter().chain(tail.iter()).copied().collect();
        union.sort_unstable();
        if core.len() != 3 || union != partition.core_pairs {
            return Err(PartitionError::NotAPartition);
        }
        Ok(Triple {
            partition,
            core,
            tail,
        })
    }
}

/// Uniformly random partition: a uniform permutation of the pair indices,
/// read off as A-blocks, B-blocks, core. Deterministic per seed.
pub fn sample_partition(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Partition, PartitionError> {
    if n != expected_n(k, m) || k == 0 {
        return Err(PartitionError::ParamMismatch { n, k, m });
    }
    let mut rng = rng_from(seed);
    let perm = random_permutation(n, &mut rng);
    partition_from_permutation(k, m, &perm)
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

pub(crate) fn partition_from_permutation(
    k: usize,
    m: usize,
    perm: &[PairId],
) -> Result<Partition, PartitionError> {
    let block = 4 * k;
    let a_blocks: Vec<Vec<PairId>> = (0..m)
        .map(|i| perm[i * block..(i + 1) * block].to_vec())
        .collect();
    let b_blocks: Vec<Vec<PairId>> = (0..m)
        .map(|i| perm[(m + i) * block..(m + i + 1) * block].to_vec())
        .collect();
    let core = perm[2 * m * block..].to_vec();
    Partition::new(k, m, a_blocks, b_blocks, core)
}

/// Canonical half-split bit for position `pos` in a `4k`-pair block:
/// positions `[0,k) ∪ [2k,3k)` carry 1, the rest 0.
pub fn half_split_bit(k: usize, pos: usize) -> bool {
    pos < k || (2 * k..3 * k).contains(&pos)
}

/// The canonical block objects for an ordered `4k`-pair block: the all-red
/// cross matching (pair `j` to pair `2k+j` in both directions) and the
/// half-split labeling. The matching is consistent with the labeling.
pub fn canonical_block(block: &[PairId]) -> Result<(Vec<Edge>, SubLabeling), PartitionError> {
    if block.len() % 4 != 0 || block.is_empty() {
        return Err(PartitionError::BadBlockLength);
    }
    let k = block.len() / 4;
    let mut edges = Vec::with_capacity(4 * k);
    for j in 0..2 * k {
        edges.push(Edge::new(block[j], block[2 * k + j], Color::Red));
        edges.push(Edge::new(block[2 * k + j], block[j], Color::Red));
    }
    let labels: SubLabeling = block
        .iter()
        .enumerate()
        .map(|(pos, &p)| {
            let bit = half_split_bit(k, pos);
            (p, (bit, bit))
        })
        .collect();
    Ok((edges, labels))
}

/// The 3-pair violation core: straight red edges with left vertices labeled
/// 1 and right vertices 0, so all three edges violate.
pub fn violation_core(core: &[PairId]) -> Result<(Vec<Edge>, SubLabeling), PartitionError> {
    if core.len() != 3 {
        return Err(PartitionError::BadBlockLength);
    }
    let edges = core.iter().map(|&p| Edge::new(p, p, Color::Red)).collect();
    let labels = core.iter().map(|&p| (p, (true, false))).collect();
    Ok((edges, labels))
}

/// The full violation core on an ordered `4k+3`-pair set: straight red
/// edges everywhere; the first `2k+3` pairs are labeled (1,0) and the last
/// `2k` pairs (0,1), so every edge violates and the ones-count is odd.
pub fn full_violation_core(ordered: &[PairId]) -> Result<(Vec<Edge>, SubLabeling), PartitionError> {
    if ordered.len() % 4 != 3 {
        return Err(PartitionError::BadBlockLength);
    }
    let k = (ordered.len() - 3) / 4;
    let edges = ordered
        .iter()
        .map(|&p| Edge::new(p, p, Color::Red))
        .collect();
    let labels = ordered
        .iter()
        .enumerate()
        .map(|(pos, &p)| {
            if pos < 2 * k + 3 {
                (p, (true, false))
            } else {
                (p, (false, true))
            }
        })
        .collect();
    Ok((edges, labels))
}

/// Uniform consistent matching of a B-block: a uniform permutation with
/// colors forced by the half-split labels.
pub(crate) fn sample_block_matching(block: &[PairId], rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let k = block.len() / 4;
    let perm = random_permutation(block.len(), rng);
    (0..block.len())
        .map(|j| {
            let color = if half_split_bit(k, j) == half_split_bit(k, perm[j]) {
                Color::Red
            } else {
                Color::Blue
            };
            Edge::new(block[j], block[perm[j]], color)
        })
        .collect()
}

/// Uniform labeling of an A-block consistent with its canonical matching:
/// one free bit per cross edge.
pub(crate) fn sample_block_labels(block: &[PairId], rng: &mut ChaCha8Rng) -> SubLabeling {
    let k = block.len() / 4;
    let mut labels: SubLabeling = block.iter().map(|&p| (p, (false, false))).collect();
    for j in 0..2 * k {
        let bit = rng.random_bool(0.5);
        labels.get_mut(&block[j]).unwrap().0 = bit;
        labels.get_mut(&block[2 * k + j]).unwrap().1 = bit;
        let bit = rng.random_bool(0.5);
        labels.get_mut(&block[2 * k + j]).unwrap().0 = bit;
        labels.get_mut(&block[j]).unwrap().1 = bit;
    }
    labels
}

/// All consistent matchings of a block, lexicographic in the permutation.
pub(crate) fn all_block_matchings(block: &[PairId]) -> Vec<Vec<Edge>> {
    let k = block.len() / 4;
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..block.len()).collect();
    loop {
        out.push(
            (0..block.len())
                .map(|j| {
                    let color = if half_split_bit(k, j) == half_split_bit(k, perm[j]) {
                        Color::Red
                    } else {
                        Color::Blue
                    };
                    Edge::new(block[j], block[perm[j]], color)
                })
                .collect(),
        );
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

/// All labelings of a block consistent with its canonical matching.
pub(crate) fn all_block_labelings(block: &[PairId]) -> Vec<SubLabeling> {
    let k = block.len() / 4;
    let bits = 4 * k;
    (0..(1usize << bits))
        .map(|code| {
            let mut labels: SubLabeling = block.iter().map(|&p| (p, (false, false))).collect();
            for j in 0..2 * k {
                let b0 = code >> (2 * j) & 1 == 1;
                labels.get_mut(&block[j]).unwrap().0 = b0;
                labels.get_mut(&block[2 * k + j]).unwrap().1 = b0;
                let b1 = code >> (2 * j + 1) & 1 == 1;
                labels.get_mut(&block[2 * k + j]).unwrap().0 = b1;
                labels.get_mut(&block[j]).unwrap().1 = b1;
            }
            labels
        })
        .collect()
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Assembles a full matching and labeling from per-part pieces.
pub(crate) fn assemble(
    partition: &Partition,
    core_edges: &[Edge],
    core_labels: &SubLabeling,
    rng: &mut ChaCha8Rng,
) -> (Matching, Labeling) {
    let n = partition.n();
    let mut edges: Vec<Edge> = Vec::with_capacity(n);
    let mut left = vec![false; n];
    let mut right = vec![false; n];
    let set = |labels: &SubLabeling, left: &mut Vec<bool>, right: &mut Vec<bool>| {
        for (&p, &(lb, rb)) in labels {
            left[p] = lb;
            right[p] = rb;
        }
    };
    // A-blocks: canonical matching, sampled labels. B-blocks: sampled
    // matching, canonical labels. Draws happen in block order, A side first.
    for a in &partition.a_blocks {
        let (block_edges, _) = canonical_block(a).expect("valid block");
        edges.extend(block_edges);
        set(&sample_block_labels(a, rng), &mut left, &mut right);
    }
    for b in &partition.b_blocks {
        edges.extend(sample_block_matching(b, rng));
        let (_, labels) = canonical_block(b).expect("valid block");
        set(&labels, &mut left, &mut right);
    }
    edges.extend_from_slice(core_edges);
    set(core_labels, &mut left, &mut right);
    let matching = Matching::new(edges).expect("blocks are vertex-disjoint");
    let labeling = Labeling::new(left, right, ParityTarget::Odd);
    (matching, labeling)
}

#[derive(Clone, Debug)]
pub struct ThreeViolationSample {
    pub seed: u64,
    pub triple: Triple,
    pub matching: Matching,
    pub labeling: Labeling,
    pub violations: usize,
}

#[derive(Clone, Debug)]
pub struct FullViolationSample {
    pub seed: u64,
    pub partition: Partition,
    pub core_order: Vec<PairId>,
    pub matching: Matching,
    pub labeling: Labeling,
    pub violations: usize,
}

fn count_violations(m: &Matching, l: &Labeling) -> usize {
    m.edges()
        .iter()
        .filter(|e| crate::labeling::edge_violates(e, l))
        .count()
}

/// Draws one sample of the three-violation distribution: a uniform triple,
/// then an independent uniform matching and labeling respecting it. The
/// output always has violation count exactly 3.
pub fn sample_three_violation(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<ThreeViolationSample, PartitionError> {
    if n != expected_n(k, m) || k == 0 {
        return Err(PartitionError::ParamMismatch { n, k, m });
    }
    let mut rng = rng_from(seed);
    let partition = partition_from_permutation(k, m, &random_permutation(n, &mut rng))?;
    // Uniform 3-subset of the core, then a uniform ordering of the rest.
    let picks = random_permutation(partition.core_pairs.len(), &mut rng);
    let mut core: Vec<PairId> = picks[..3]
        .iter()
        .map(|&i| partition.core_pairs[i])
        .collect();
    core.sort_unstable();
    let tail: Vec<PairId> = picks[3..]
        .iter()
        .map(|&i| partition.core_pairs[i])
        .collect();
    let triple = Triple::new(partition, core, tail)?;
    sample_from_triple(triple, seed, &mut rng)
}

/// Shared product-sampling stage for both three-violation generators.
fn sample_from_triple(
    triple: Triple,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<ThreeViolationSample, PartitionError> {
    let (mut core_edges, mut core_labels) = violation_core(&triple.core)?;
    let (tail_edges, tail_labels) = canonical_block(&triple.tail)?;
    core_edges.extend(tail_edges);
    core_labels.extend(tail_labels);
    let (matching, labeling) = assemble(&triple.partition, &core_edges, &core_labels, rng);
    let violations = count_violations(&matching, &labeling);
    Ok(ThreeViolationSample {
        seed,
        triple,
        matching,
        labeling,
        violations,
    })
}

/// Draws one sample of the full-violation distribution: a uniform partition
/// and a uniform ordering of its core; every core edge violates, so the
/// violation count is exactly `4k + 3`.
pub fn sample_full_violation(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<FullViolationSample, PartitionError> {
    if n != expected_n(k, m) || k == 0 {
        return Err(PartitionError::ParamMismatch { n, k, m });
    }
    let mut rng = rng_from(seed);
    let partition = partition_from_permutation(k, m, &random_permutation(n, &mut rng))?;
    let order = random_permutation(partition.core_pairs.len(), &mut rng);
    let core_order: Vec<PairId> = order.iter().map(|&i| partition.core_pairs[i]).collect();
    let (core_edges, core_labels) = full_violation_core(&core_order)?;
    let (matching, labeling) = assemble(&partition, &core_edges, &core_labels, &mut rng);
    let violations = count_violations(&matching, &labeling);
    Ok(FullViolationSample {
        seed,
        partition,
        core_order,
        matching,
        labeling,
        violations,
    })
}

/// Restriction of a matching to the pairs of one block: the edges with both
/// endpoints inside. Returns `None` if any edge straddles the boundary.
pub fn restrict_matching(m: &Matching, pairs: &[PairId]) -> Option<Vec<Edge>> {
    let set: std::collections::BTreeSet<PairId> = pairs.iter().copied().collect();
    let mut inside = Vec::new();
    for e in m.edges() {
        match (set.contains(&e.u), set.contains(&e.v)) {
            (true, true) => inside.push(*e),
            (false, false) => {}
            _ => return None,
        }
    }
    Some(inside)
}

fn edges_equal_as_sets(a: &[Edge], b: &[Edge]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// Does `m` respect the partition: canonical on A-blocks, consistent with
/// the half-split labels on B-blocks, odd red count on the core?
pub fn matching_respects(partition: &Partition, m: &Matching) -> bool {
    if m.len() != partition.n() {
        return false;
    }
    for a in partition.a_blocks() {
        let Some(inside) = restrict_matching(m, a) else {
            return false;
        };
        let (canon, _) = canonical_block(a).expect("valid block");
        if !edges_equal_as_sets(&inside, &canon) {
            return false;
        }
    }
    for b in partition.b_blocks() {
        let Some(inside) = restrict_matching(m, b) else {
            return false;
        };
        if inside.len() != b.len() {
            return false;
        }
        let (_, labels) = canonical_block(b).expect("valid block");
        for e in &inside {
            let lu = labels[&e.u].0;
            let lv = labels[&e.v].1;
            let consistent = match e.color {
                Color::Red => lu == lv,
                Color::Blue => lu != lv,
            };
            if !consistent {
                return false;
            }
        }
    }
    let Some(core) = restrict_matching(m, partition.core_pairs()) else {
        return false;
    };
    if core.len() != partition.core_pairs().len() {
        return false;
    }
    core.iter().filter(|e| e.color == Color::Red).count() % 2 == 1
}

/// Does `l` respect the partition: half-split on B-blocks, consistent with
/// the cross matching on A-blocks, odd ones-count on the core?
pub fn labeling_respects(partition: &Partition, l: &Labeling) -> bool {
    if l.left_bits().len() != partition.n() {
        return false;
    }
    for b in partition.b_blocks() {
        let (_, labels) = canonical_block(b).expect("valid block");
        for (&p, &(lb, rb)) in &labels {
            if l.label_left(p) != lb || l.label_right(p) != rb {
                return false;
            }
        }
    }
    for a in partition.a_blocks() {
        let (edges, _) = canonical_block(a).expect("valid block");
        for e in &edges {
            // Cross edges are red: consistency means equal labels.
            if l.label_left(e.u) != l.label_right(e.v) {
                return false;
            }
        }
    }
    let ones: usize = partition
        .core_pairs()
        .iter()
        .map(|&p| l.label_left(p) as usize + l.label_right(p) as usize)
        .sum();
    ones % 2 == 1
}

/// As `matching_respects`, additionally pinning the core restriction.
pub fn matching_respects_with(partition: &Partition, m: &Matching, core_edges: &[Edge]) -> bool {
    if !matching_respects(partition, m) {
        return false;
    }
    let inside = restrict_matching(m, partition.core_pairs()).expect("checked");
    edges_equal_as_sets(&inside, core_edges)
}

/// As `labeling_respects`, additionally pinning the core labels.
pub fn labeling_respects_with(
    partition: &Partition,
    l: &Labeling,
    core_labels: &SubLabeling,
) -> bool {
    if !labeling_respects(partition, l) {
        return false;
    }
    core_labels
        .iter()
        .all(|(&p, &(lb, rb))| l.label_left(p) == lb && l.label_right(p) == rb)
}
