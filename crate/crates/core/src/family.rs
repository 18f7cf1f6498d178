//! Families of bijections indexed by 3-subsets of positions, and the
//! alternative three-violation generator built on them.
//!
//! For each 3-subset `t` of the `2k+3` front positions, the family holds a
//! bijection from the remaining `2k` positions onto `[2k]`. A family is
//! *split-certified* for a collection of 3-subsets `S` (of size at least
//! `10k`) when some pair `t, t'` in `S` has two elements of `t' \ t` mapped
//! by `sigma_t` to opposite halves of `[2k]`. Random families pass with
//! high probability at large `k`; the builder retries with fresh seeds
//! until verification succeeds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{
    canonical_block, expected_n, partition_from_permutation, random_permutation, violation_core,
    PairId, PartitionError, ThreeViolationSample, Triple,
};
use crate::rat::Rat;
use crate::seeding::{child_seed, rng_from};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("k must be at least 1")]
    BadK,
    #[error("malformed subset collection: {0}")]
    MalformedSet(String),
    #[error("no verified family within {0} retries")]
    RetriesExhausted(usize),
    #[error("family was built for k = {family_k}, expected {expected_k}")]
    WrongK { family_k: usize, expected_k: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyEntry {
    /// A sorted 3-subset of `0..2k+3`.
    pub t: [usize; 3],
    /// Images of the remaining positions in ascending order; a bijection
    /// onto `0..2k`.
    #[serde(rename = "sigma")]
    pub images: Vec<usize>,
}

fn schema_one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationFamily {
    #[serde(default = "schema_one")]
    pub schema_version: u32,
    pub k: usize,
    pub seed: u64,
    /// Sorted by subset.
    entries: Vec<FamilyEntry>,
}

fn three_subsets(universe: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..universe {
        for b in (a + 1)..universe {
            for c in (b + 1)..universe {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Independent uniform bijections per 3-subset.
pub fn build_permutation_family(k: usize, seed: u64) -> Result<PermutationFamily, FamilyError> {
    if k == 0 {
        return Err(FamilyError::BadK);
    }
    let universe = 2 * k + 3;
    let entries = three_subsets(universe)
        .into_iter()
        .enumerate()
        .map(|(idx, t)| {
            let mut rng = rng_from(child_seed(seed, idx as u64));
            FamilyEntry {
                t,
                images: random_permutation(2 * k, &mut rng),
            }
        })
        .collect();
    Ok(PermutationFamily {
        schema_version: 1,
        k,
        seed,
        entries,
    })
}

impl PermutationFamily {
    pub fn subsets(&self) -> impl Iterator<Item = &[usize; 3]> {
        self.entries.iter().map(|e| &e.t)
    }

    fn images_for(&self, t: &[usize; 3]) -> Option<&[usize]> {
        self.entries
            .binary_search_by(|e| e.t.cmp(t))
            .ok()
            .map(|i| self.entries[i].images.as_slice())
    }

    /// Image of position `pos` under the bijection for subset `t`.
    pub fn image(&self, t: &[usize; 3], pos: usize) -> Option<usize> {
        let images = self.images_for(t)?;
        let domain: Vec<usize> = (0..2 * self.k + 3).filter(|p| !t.contains(p)).collect();
        let at = domain.iter().position(|&p| p == pos)?;
        Some(images[at])
    }

    /// Reorders the remaining front items by the subset's bijection:
    /// output slot `sigma_t(pos)` receives the item at position `pos`.
    pub fn permute_front_remainder<T: Copy>(&self, t: &[usize; 3], front: &[T]) -> Option<Vec<T>> {
        let images = self.images_for(t)?;
        if front.len() != 2 * self.k + 3 {
            return None;
        }
        let mut out: Vec<Option<T>> = vec![None; 2 * self.k];
        let mut at = 0;
        for (pos, item) in front.iter().enumerate() {
            if t.contains(&pos) {
                continue;
            }
            out[images[at]] = Some(*item);
            at += 1;
        }
        out.into_iter().collect()
    }
}

fn validate_sets(k: usize, sets: &[Vec<[usize; 3]>]) -> Result<(), FamilyError> {
    let universe = 2 * k + 3;
    for (i, s) in sets.iter().enumerate() {
        if s.len() < 10 * k {
            return Err(FamilyError::MalformedSet(format!(
                "set {i} has {} subsets, need at least {}",
                s.len(),
                10 * k
            )));
        }
        for t in s {
            if t[0] >= t[1] || t[1] >= t[2] || t[2] >= universe {
                return Err(FamilyError::MalformedSet(format!(
                    "set {i} contains invalid subset {t:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Checks the split property on every supplied collection: some `t, t'`
/// with two elements of `t' \ t` mapped to opposite halves. Pairs with
/// `t = t'` contribute nothing and are skipped.
pub fn verify_family(
    family: &PermutationFamily,
    sets: &[Vec<[usize; 3]>],
) -> Result<bool, FamilyError> {
    let k = family.k;
    validate_sets(k, sets)?;
    'sets: for s in sets {
        for t in s {
            for t_prime in s {
                if t == t_prime {
                    continue;
                }
                let diff: Vec<usize> = t_prime.iter().filter(|p| !t.contains(p)).copied().collect();
                let mut low = false;
                let mut high = false;
                for &v in &diff {
                    match family.image(t, v) {
                        Some(img) if img < k => low = true,
                        Some(_) => high = true,
                        None => {}
                    }
                }
                if low && high {
                    continue 'sets;
                }
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Builds families with fresh derived seeds until one verifies, up to the
/// retry cap. Returns the family and the number of retries used.
pub fn build_verified_family(
    k: usize,
    seed: u64,
    sets: &[Vec<[usize; 3]>],
    retry_cap: usize,
) -> Result<(PermutationFamily, usize), FamilyError> {
    for retry in 0..retry_cap {
        let family = build_permutation_family(k, child_seed(seed, retry as u64))?;
        if verify_family(&family, sets)? {
            return Ok((family, retry));
        }
    }
    Err(FamilyError::RetriesExhausted(retry_cap))
}

/// All 3-subsets of the front positions, the only collection of size
/// `>= 10k` that exists at `k = 1`.
pub fn all_front_subsets(k: usize) -> Vec<[usize; 3]> {
    three_subsets(2 * k + 3)
}

/// The alternative three-violation generator: order the core uniformly,
/// pick the 3-subset from the front block, and let the family's bijection
/// build the first tail half. The induced distribution over (core set,
/// tail order) is uniform, identical to the direct generator's.
pub fn alternative_sample_three_violation(
    n: usize,
    k: usize,
    m: usize,
    family: &PermutationFamily,
    seed: u64,
) -> Result<ThreeViolationSample, FamilyError> {
    if family.k != k {
        return Err(FamilyError::WrongK {
            family_k: family.k,
            expected_k: k,
        });
    }
    if n != expected_n(k, m) || k == 0 {
        return Err(FamilyError::Partition(PartitionError::ParamMismatch {
            n,
            k,
            m,
        }));
    }
    let mut rng = rng_from(seed);
    let partition = partition_from_permutation(k, m, &random_permutation(n, &mut rng))?;
    // Uniform ordering of the core, split into front (2k+3) and back (2k).
    let order = random_permutation(partition.core_pairs().len(), &mut rng);
    let ordered: Vec<PairId> = order.iter().map(|&i| partition.core_pairs()[i]).collect();
    let front = &ordered[..2 * k + 3];
    let back = &ordered[2 * k + 3..];
    // Three uniform positions of the front.
    let pos_perm = random_permutation(2 * k + 3, &mut rng);
    let mut positions = [pos_perm[0], pos_perm[1], pos_perm[2]];
    positions.sort_unstable();
    let mut core: Vec<PairId> = positions.iter().map(|&p| front[p]).collect();
    core.sort_unstable();
    let mut tail = family
        .permute_front_remainder(&positions, front)
        .expect("front has the right length");
    tail.extend_from_slice(back);
    let triple = Triple::new(partition, core, tail)?;

    // Identical product-sampling stage as the direct generator.
    let (mut core_edges, mut core_labels) = violation_core(&triple.core)?;
    let (tail_edges, tail_labels) = canonical_block(&triple.tail)?;
    core_edges.extend(tail_edges);
    core_labels.extend(tail_labels);
    let (matching, labeling) =
        crate::partition::assemble(&triple.partition, &core_edges, &core_labels, &mut rng);
    let violations = matching
        .edges()
        .iter()
        .filter(|e| crate::labeling::edge_violates(e, &labeling))
        .count();
    Ok(ThreeViolationSample {
        seed,
        triple,
        matching,
        labeling,
        violations,
    })
}

/// Exact distribution over `(core set, tail order)` of the direct
/// generator on a fixed core pair set `0..4k+3`.
pub fn direct_generator_distribution(k: usize) -> BTreeMap<(Vec<PairId>, Vec<PairId>), Rat> {
    let c = 4 * k + 3;
    let pairs: Vec<PairId> = (0..c).collect();
    let mut out = BTreeMap::new();
    // Every 3-subset, every ordering of the remainder, uniformly.
    let subsets = {
        let mut v = Vec::new();
        for a in 0..c {
            for b in (a + 1)..c {
                for d in (b + 1)..c {
                    v.push(vec![a, b, d]);
                }
            }
        }
        v
    };
    let mut total: u64 = 0;
    for h in &subsets {
        let rest: Vec<PairId> = pairs.iter().filter(|p| !h.contains(p)).copied().collect();
        for perm in permutations_of(&rest) {
            *out.entry((h.clone(), perm)).or_insert_with(Rat::zero) += &Rat::one();
            total += 1;
        }
    }
    let scale = Rat::new(1, total as i64);
    out.into_iter().map(|(key, v)| (key, &v * &scale)).collect()
}

/// Exact distribution over `(core set, tail order)` of the alternative
/// generator with the given family, on the same fixed core `0..4k+3`.
pub fn alternative_generator_distribution(
    family: &PermutationFamily,
) -> BTreeMap<(Vec<PairId>, Vec<PairId>), Rat> {
    let k = family.k;
    let c = 4 * k + 3;
    let pairs: Vec<PairId> = (0..c).collect();
    let mut out: BTreeMap<(Vec<PairId>, Vec<PairId>), u64> = BTreeMap::new();
    let mut total: u64 = 0;
    for ordered in permutations_of(&pairs) {
        let front = &ordered[..2 * k + 3];
        let back = &ordered[2 * k + 3..];
        for t in all_front_subsets(k) {
            let mut core: Vec<PairId> = t.iter().map(|&p| front[p]).collect();
            core.sort_unstable();
            let mut tail = family.permute_front_remainder(&t, front).unwrap();
            tail.extend_from_slice(back);
            *out.entry((core, tail)).or_default() += 1;
            total += 1;
        }
    }
    out.into_iter()
        .map(|(key, count)| (key, Rat::new(count as i64, total as i64)))
        .collect()
}

fn permutations_of(items: &[PairId]) -> Vec<Vec<PairId>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations_of(&rest) {
            let mut perm = vec![x];
            perm.append(&mut tail);
            out.push(perm);
        }
    }
    out
}
