//! Set-system specific machinery: parent computation and tracing, the fast
//! two-coalition checker, bad-packet enumeration, randomized expurgation, the
//! shared-core construction, and structural diagnostics.

use crate::bits::Bitset;
use crate::combi::{binomial_u128, subset_count_up_to, unrank_combination};
use crate::fchannel::{
    block_union_of, coalitions_up_to, is_scheme_direct, u_bound, Channel, FchannelError,
};
use crate::model::{Coalition, SetSystem};
use crate::TraceError;
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IppsError {
    #[error("need {min} <= w <= v, got w = {w}, v = {v}")]
    BadShape { v: u32, w: u32, min: u32 },
    #[error("t must be at least {min}, got {t}")]
    BadT { t: u32, min: u32 },
    #[error("p must lie in (0, 1), got {p}")]
    BadProbability { p: f64 },
    #[error("descendant has {got} distinct points, expected {want}")]
    DescendantSize { got: usize, want: u32 },
    #[error("descendant point {point} is outside 0..{v}")]
    DescendantRange { point: u32, v: u32 },
    #[error("C({v},{w}) exceeds 2^48, too many blocks to sample by rank")]
    UniverseTooLarge { v: u32, w: u32 },
    #[error("packet enumeration over {blocks} blocks needs about {estimate} subset visits, budget is {budget}")]
    BudgetExceeded { blocks: usize, estimate: u128, budget: u64 },
    #[error("constructed system failed verification, which indicates a bug")]
    VerificationFailed,
    #[error(transparent)]
    Channel(#[from] FchannelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A set of blocks spanned by suspiciously few points: `s` blocks whose union
/// holds at most `(s-1)*w` points. Families free of these are always schemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadPacket {
    pub blocks: Vec<usize>,
    pub span: Vec<u32>,
}

/// Why a system fails the two-coalition property: either three blocks whose
/// pairwise unions share `w` points, or two disjoint block pairs whose unions
/// do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ipps2Witness {
    Triple { blocks: [usize; 3], overlap: Vec<u32> },
    DisjointPairs { first_pair: [usize; 2], second_pair: [usize; 2], overlap: Vec<u32> },
}

/// Block-overlap statistics that drive the closed-form size bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub max_pairwise_intersection: usize,
    /// Blocks holding at least one point that appears in no other block.
    pub one_own_subset_block_count: usize,
    /// Blocks sharing exactly two points with some other block.
    pub two_intersection_block_count: usize,
    /// Some pair of blocks shares all but one point.
    pub has_pair_sharing_all_but_one: bool,
}

/// How expurgation picks the member to delete from each bad packet or bad
/// subfamily.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeletionRule {
    /// Delete the lexicographically largest member of every offending group.
    #[default]
    LexLargest,
    /// Repeatedly delete the member lying in the most surviving groups.
    GreedyCover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpurgationOptions {
    pub rule: DeletionRule,
    /// Upper bound on subset visits during bad-packet enumeration.
    pub budget: u64,
}

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000_000;

impl Default for ExpurgationOptions {
    fn default() -> Self {
        ExpurgationOptions { rule: DeletionRule::default(), budget: DEFAULT_ENUMERATION_BUDGET }
    }
}

fn validate_point_set(system: &SetSystem, points: &[u32]) -> Result<Vec<u32>, IppsError> {
    let mut t: Vec<u32> = points.to_vec();
    t.sort_unstable();
    t.dedup();
    if t.len() != system.w() as usize {
        return Err(IppsError::DescendantSize { got: t.len(), want: system.w() });
    }
    if let Some(&point) = t.iter().find(|&&p| p >= system.v()) {
        return Err(IppsError::DescendantRange { point, v: system.v() });
    }
    Ok(t)
}

/// All coalitions of size at most `t` whose block union covers `points`, in
/// canonical order. Empty when no coalition can produce the set.
pub fn possible_parents(
    system: &SetSystem,
    points: &[u32],
    t: u32,
) -> Result<Vec<Coalition>, IppsError> {
    if t < 1 {
        return Err(IppsError::BadT { t, min: 1 });
    }
    let target = validate_point_set(system, points)?;
    let mut parents = Vec::new();
    for members in coalitions_up_to(system.len(), t) {
        let union = block_union_of(system, &members);
        if target.iter().all(|&p| union.contains(p)) {
            parents.push(Coalition::new(members, system.len()).expect("members are in range"));
        }
    }
    Ok(parents)
}

/// The block indices common to every coalition able to produce `points`.
/// `EmptyIntersection` doubles as a falsification witness: it can only happen
/// when the system is not a scheme for this `t`.
pub fn trace_ipps(system: &SetSystem, points: &[u32], t: u32) -> Result<Vec<usize>, IppsError> {
    let parents = possible_parents(system, points, t)?;
    let Some(first) = parents.first() else {
        return Err(TraceError::NotProducible { t }.into());
    };
    let mut traced: Vec<usize> = first.members().to_vec();
    for parent in &parents[1..] {
        traced.retain(|m| parent.contains(*m));
        if traced.is_empty() {
            return Err(TraceError::EmptyIntersection.into());
        }
    }
    Ok(traced)
}

/// Decides the two-coalition property by overlap counting alone: a system is a
/// scheme for t = 2 exactly when every block triple and every disjoint pair of
/// block pairs keeps the relevant union overlap below `w`. Triples are scanned
/// before quadruples, each in lexicographic index order, so the witness is
/// deterministic.
pub fn check_2ipps(system: &SetSystem) -> Option<Ipps2Witness> {
    let w = system.w() as usize;
    let masks: Vec<Bitset> =
        (0..system.len()).map(|i| block_union_of(system, &[i])).collect();
    let union2 = |a: usize, b: usize| {
        let mut u = masks[a].clone();
        u.union_with(&masks[b]);
        u
    };

    for [a, b, c] in (0..system.len()).array_combinations() {
        let mut overlap = union2(a, b);
        overlap.intersect_with(&union2(a, c));
        overlap.intersect_with(&union2(b, c));
        if overlap.count() >= w {
            return Some(Ipps2Witness::Triple { blocks: [a, b, c], overlap: overlap.to_vec() });
        }
    }
    for [a, b, c, d] in (0..system.len()).array_combinations() {
        for (first_pair, second_pair) in [([a, b], [c, d]), ([a, c], [b, d]), ([a, d], [b, c])] {
            let mut overlap = union2(first_pair[0], first_pair[1]);
            overlap.intersect_with(&union2(second_pair[0], second_pair[1]));
            if overlap.count() >= w {
                return Some(Ipps2Witness::DisjointPairs {
                    first_pair,
                    second_pair,
                    overlap: overlap.to_vec(),
                });
            }
        }
    }
    None
}

/// All bad s-packets for 2 <= s <= u_bound(t), in lexicographic order of their
/// block index sets. Enumeration prunes any branch whose running span already
/// exceeds the loosest threshold `(u-1)*w`, since spans only grow.
pub fn find_bad_packets(system: &SetSystem, t: u32) -> Result<Vec<BadPacket>, IppsError> {
    let u = u_bound(t).map_err(|_| IppsError::BadT { t, min: 2 })? as usize;
    let w = system.w() as usize;
    let masks: Vec<Bitset> =
        (0..system.len()).map(|i| block_union_of(system, &[i])).collect();

    fn recurse(
        masks: &[Bitset],
        u: usize,
        w: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        span: &Bitset,
        out: &mut Vec<BadPacket>,
    ) {
        for next in start..masks.len() {
            let mut grown = span.clone();
            grown.union_with(&masks[next]);
            if grown.count() > (u - 1) * w {
                continue;
            }
            chosen.push(next);
            if chosen.len() >= 2 && grown.count() <= (chosen.len() - 1) * w {
                out.push(BadPacket { blocks: chosen.clone(), span: grown.to_vec() });
            }
            if chosen.len() < u {
                recurse(masks, u, w, next + 1, chosen, &grown, out);
            }
            chosen.pop();
        }
    }

    let mut out = Vec::new();
    let mut chosen = Vec::new();
    recurse(&masks, u, w, 0, &mut chosen, &Bitset::new(system.v()), &mut out);
    Ok(out)
}

/// Samples each of the C(v,w) possible blocks independently with probability
/// `p` (by drawing a binomial count and then distinct lexicographic ranks),
/// finds every bad packet among the sample, and deletes one block per packet.
///
/// The survivors contain no bad packet, because a packet is bad regardless of
/// what else survives around it, so the output is a scheme for this `t`. Small
/// outputs are re-verified against the definition before returning.
pub fn random_expurgated_ipps(
    v: u32,
    w: u32,
    t: u32,
    p: f64,
    seed: u64,
) -> Result<SetSystem, IppsError> {
    random_expurgated_ipps_with(v, w, t, p, seed, ExpurgationOptions::default())
}

pub fn random_expurgated_ipps_with(
    v: u32,
    w: u32,
    t: u32,
    p: f64,
    seed: u64,
    options: ExpurgationOptions,
) -> Result<SetSystem, IppsError> {
    if w < 1 || w > v {
        return Err(IppsError::BadShape { v, w, min: 1 });
    }
    let u = u_bound(t).map_err(|_| IppsError::BadT { t, min: 2 })?;
    if !(p > 0.0 && p < 1.0) {
        return Err(IppsError::BadProbability { p });
    }
    let total = match binomial_u128(v as u64, w as u64) {
        Some(n) if n <= 1u128 << 48 => n as u64,
        _ => return Err(IppsError::UniverseTooLarge { v, w }),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = Binomial::new(total, p).expect("p checked above").sample(&mut rng);
    let estimate = subset_count_up_to(count as usize, u);
    if estimate > options.budget as u128 {
        return Err(IppsError::BudgetExceeded {
            blocks: count as usize,
            estimate,
            budget: options.budget,
        });
    }

    let mut ranks: BTreeSet<u64> = BTreeSet::new();
    while (ranks.len() as u64) < count {
        ranks.insert(rng.random_range(0..total));
    }
    let blocks: Vec<Vec<u32>> =
        ranks.iter().map(|&r| unrank_combination(v as u64, w as u64, r as u128)).collect();
    let sample = SetSystem::from_parts(v, w, blocks).expect("ranks yield distinct valid blocks");

    let packets = find_bad_packets(&sample, t)?;
    let families: Vec<&[usize]> = packets.iter().map(|p| p.blocks.as_slice()).collect();
    let deleted = select_deletions(&families, options.rule);
    let survivors: Vec<Vec<u32>> = (0..sample.len())
        .filter(|i| !deleted.contains(i))
        .map(|i| sample.blocks()[i].clone())
        .collect();
    let result = SetSystem::from_parts(v, w, survivors).expect("survivors stay valid");

    debug_assert!(find_bad_packets(&result, t)?.is_empty());
    if result.len() <= 40
        && !is_scheme_direct((&result).into(), t, Channel::Ipps { w })?.holds()
    {
        return Err(IppsError::VerificationFailed);
    }
    Ok(result)
}

/// Indices to delete so that every listed group loses at least one member.
/// Groups hold ascending indices into a sorted universe, so the last index is
/// the lexicographically largest member.
pub(crate) fn select_deletions(families: &[&[usize]], rule: DeletionRule) -> BTreeSet<usize> {
    match rule {
        DeletionRule::LexLargest => families
            .iter()
            .map(|f| *f.last().expect("offending groups have at least two members"))
            .collect(),
        DeletionRule::GreedyCover => {
            let mut remaining: Vec<&[usize]> = families.to_vec();
            let mut deleted = BTreeSet::new();
            while !remaining.is_empty() {
                let mut hits: std::collections::BTreeMap<usize, usize> = Default::default();
                for family in &remaining {
                    for &member in *family {
                        *hits.entry(member).or_insert(0) += 1;
                    }
                }
                let (&best, _) =
                    hits.iter().max_by_key(|&(&member, &count)| (count, member)).expect("nonempty");
                deleted.insert(best);
                remaining.retain(|family| !family.contains(&best));
            }
            deleted
        }
    }
}

/// The family {j} ∪ {0..w-1} for j in w-1..v: every block shares the same
/// w-1 point core and owns one private point, which makes it a scheme for
/// every t >= 2. Size is exactly v-w+1, which is optimal for w = 2.
pub fn delta_construction(v: u32, w: u32) -> Result<SetSystem, IppsError> {
    if w < 2 || v < w {
        return Err(IppsError::BadShape { v, w, min: 2 });
    }
    let core: Vec<u32> = (0..w - 1).collect();
    let blocks: Vec<Vec<u32>> = (w - 1..v)
        .map(|j| {
            let mut b = core.clone();
            b.push(j);
            b
        })
        .collect();
    Ok(SetSystem::from_parts(v, w, blocks).expect("construction is valid by shape"))
}

/// Overlap statistics: the largest pairwise intersection, how many blocks own
/// a private point, how many share exactly two points with a partner, and
/// whether some pair shares all but one point.
pub fn structural_report(system: &SetSystem) -> StructuralReport {
    let m = system.len();
    let masks: Vec<Bitset> = (0..m).map(|i| block_union_of(system, &[i])).collect();
    let pair_overlap = |i: usize, j: usize| {
        let mut x = masks[i].clone();
        x.intersect_with(&masks[j]);
        x.count()
    };

    let mut max_pairwise_intersection = 0;
    for [i, j] in (0..m).array_combinations() {
        max_pairwise_intersection = max_pairwise_intersection.max(pair_overlap(i, j));
    }

    let mut one_own_subset_block_count = 0;
    for i in 0..m {
        let mut others = Bitset::new(system.v());
        for (j, mask) in masks.iter().enumerate() {
            if j != i {
                others.union_with(mask);
            }
        }
        if system.blocks()[i].iter().any(|&p| !others.contains(p)) {
            one_own_subset_block_count += 1;
        }
    }

    let two_intersection_block_count =
        (0..m).filter(|&i| (0..m).any(|j| j != i && pair_overlap(i, j) == 2)).count();

    let has_pair_sharing_all_but_one =
        (0..m).array_combinations().any(|[i, j]| pair_overlap(i, j) == system.w() as usize - 1);

    StructuralReport {
        max_pairwise_intersection,
        one_own_subset_block_count,
        two_intersection_block_count,
        has_pair_sharing_all_but_one,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fchannel::is_scheme_local;
    use crate::model::{parse_set_system, serialize_set_system};

    fn system(text: &str) -> SetSystem {
        parse_set_system(text).unwrap()
    }

    fn triangle() -> SetSystem {
        system(r#"{"v":4,"w":2,"blocks":[[1,2],[1,3],[2,3]]}"#)
    }

    #[test]
    fn delta_construction_shapes() {
        let d = delta_construction(5, 3).unwrap();
        assert_eq!(d.blocks(), &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]);
        let d = delta_construction(4, 2).unwrap();
        assert_eq!(d.blocks(), &[vec![0, 1], vec![0, 2], vec![0, 3]]);
        assert_eq!(d.len() as u32, 4 - 2 + 1);
        let d = delta_construction(3, 3).unwrap();
        assert_eq!(d.blocks(), &[vec![0, 1, 2]]);
        assert!(delta_construction(2, 3).is_err());
        assert!(delta_construction(4, 1).is_err());
    }

    #[test]
    fn delta_construction_verifies_for_several_t() {
        let d = delta_construction(5, 3).unwrap();
        for t in 2..=4 {
            assert!(is_scheme_direct((&d).into(), t, Channel::Ipps { w: 3 }).unwrap().holds());
        }
    }

    #[test]
    fn parents_of_core_descendants() {
        let d = delta_construction(5, 3).unwrap();
        let parents = possible_parents(&d, &[0, 1, 2], 2).unwrap();
        let members: Vec<&[usize]> = parents.iter().map(|c| c.members()).collect();
        assert_eq!(members, vec![&[0][..], &[0, 1][..], &[0, 2][..]]);

        let parents = possible_parents(&d, &[0, 2, 3], 2).unwrap();
        let members: Vec<&[usize]> = parents.iter().map(|c| c.members()).collect();
        assert_eq!(members, vec![&[0, 1][..]]);

        assert!(possible_parents(&d, &[2, 3, 4], 2).unwrap().is_empty());
        assert!(matches!(
            possible_parents(&d, &[0, 1], 2),
            Err(IppsError::DescendantSize { got: 2, want: 3 })
        ));
        assert!(matches!(
            possible_parents(&d, &[0, 1, 9], 2),
            Err(IppsError::DescendantRange { point: 9, v: 5 })
        ));
    }

    #[test]
    fn tracing_returns_common_blocks() {
        let d = delta_construction(5, 3).unwrap();
        assert_eq!(trace_ipps(&d, &[0, 2, 3], 2).unwrap(), vec![0, 1]);
        assert_eq!(trace_ipps(&d, &[0, 1, 2], 2).unwrap(), vec![0]);
        assert!(matches!(
            trace_ipps(&d, &[2, 3, 4], 2),
            Err(IppsError::Trace(TraceError::NotProducible { t: 2 }))
        ));
        assert!(matches!(
            trace_ipps(&triangle(), &[1, 2], 2),
            Err(IppsError::Trace(TraceError::EmptyIntersection))
        ));
    }

    #[test]
    fn two_coalition_checker_witnesses() {
        let star = system(r#"{"v":5,"w":2,"blocks":[[1,2],[1,3],[1,4]]}"#);
        assert_eq!(check_2ipps(&star), None);

        assert_eq!(
            check_2ipps(&triangle()),
            Some(Ipps2Witness::Triple { blocks: [0, 1, 2], overlap: vec![1, 2, 3] })
        );

        // Four blocks on four points: a triple already gives the first witness,
        // even though the two disjoint pairs overlap too.
        let k4 = system(r#"{"v":5,"w":2,"blocks":[[1,2],[3,4],[1,3],[2,4]]}"#);
        assert_eq!(
            check_2ipps(&k4),
            Some(Ipps2Witness::Triple { blocks: [0, 1, 2], overlap: vec![1, 2] })
        );

        // Disjoint supports force the quadruple branch: no triple overlaps.
        let pairs = system(r#"{"v":6,"w":2,"blocks":[[0,2],[0,4],[1,3],[1,5]]}"#);
        assert_eq!(
            check_2ipps(&pairs),
            Some(Ipps2Witness::DisjointPairs {
                first_pair: [0, 2],
                second_pair: [1, 3],
                overlap: vec![0, 1],
            })
        );

        for s in [&star, &triangle(), &k4, &pairs] {
            let direct = is_scheme_direct(s.into(), 2, Channel::Ipps { w: 2 }).unwrap();
            assert_eq!(check_2ipps(s).is_none(), direct.holds());
        }
    }

    #[test]
    fn bad_packets_by_span_counting() {
        let packets = find_bad_packets(&triangle(), 2).unwrap();
        assert_eq!(packets, vec![BadPacket { blocks: vec![0, 1, 2], span: vec![1, 2, 3] }]);

        // The shared-core system carries one bad 3-packet yet is a scheme:
        // packets witness suspicion, not failure.
        let d = delta_construction(5, 3).unwrap();
        let packets = find_bad_packets(&d, 2).unwrap();
        assert_eq!(packets.len(), 1);
        assert_eq!(packets[0].blocks, vec![0, 1, 2]);
        assert_eq!(packets[0].span, vec![0, 1, 2, 3, 4]);

        let two = system(r#"{"v":6,"w":3,"blocks":[[0,1,2],[0,1,3]]}"#);
        assert!(find_bad_packets(&two, 2).unwrap().is_empty());
        assert!(matches!(find_bad_packets(&two, 1), Err(IppsError::BadT { t: 1, min: 2 })));
    }

    #[test]
    fn expurgation_is_deterministic_and_sound() {
        let a = random_expurgated_ipps(20, 2, 2, 0.05, 7).unwrap();
        let b = random_expurgated_ipps(20, 2, 2, 0.05, 7).unwrap();
        assert_eq!(serialize_set_system(&a), serialize_set_system(&b));

        for seed in 0..6 {
            let s = random_expurgated_ipps(18, 2, 2, 0.08, seed).unwrap();
            assert!(find_bad_packets(&s, 2).unwrap().is_empty());
            assert!(is_scheme_local((&s).into(), 2, Channel::Ipps { w: 2 }).unwrap().holds());
        }
    }

    #[test]
    fn expurgation_edge_cases() {
        let empty = random_expurgated_ipps(10, 2, 2, 1e-9, 1).unwrap();
        assert!(empty.len() <= 1);

        assert!(matches!(
            random_expurgated_ipps(10, 2, 2, 1.0, 1),
            Err(IppsError::BadProbability { .. })
        ));
        assert!(matches!(
            random_expurgated_ipps(3, 7, 2, 0.5, 1),
            Err(IppsError::BadShape { .. })
        ));
        assert!(matches!(
            random_expurgated_ipps(200, 50, 2, 0.5, 1),
            Err(IppsError::UniverseTooLarge { .. })
        ));
        let tiny_budget = ExpurgationOptions { budget: 1, ..Default::default() };
        assert!(matches!(
            random_expurgated_ipps_with(20, 2, 2, 0.9, 1, tiny_budget),
            Err(IppsError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn greedy_rule_is_also_sound() {
        let options =
            ExpurgationOptions { rule: DeletionRule::GreedyCover, ..Default::default() };
        for seed in [3, 11] {
            let s = random_expurgated_ipps_with(18, 2, 2, 0.08, seed, options).unwrap();
            assert!(find_bad_packets(&s, 2).unwrap().is_empty());
            assert!(is_scheme_direct((&s).into(), 2, Channel::Ipps { w: 2 }).unwrap().holds());
        }
    }

    #[test]
    fn structural_counts() {
        let report = structural_report(&delta_construction(5, 3).unwrap());
        assert_eq!(report.max_pairwise_intersection, 2);
        assert_eq!(report.one_own_subset_block_count, 3);
        assert_eq!(report.two_intersection_block_count, 3);
        assert!(report.has_pair_sharing_all_but_one);

        let report = structural_report(&system(r#"{"v":5,"w":2,"blocks":[[1,2],[3,4]]}"#));
        assert_eq!(report.max_pairwise_intersection, 0);
        assert_eq!(report.one_own_subset_block_count, 2);
        assert_eq!(report.two_intersection_block_count, 0);
        assert!(!report.has_pair_sharing_all_but_one);
    }
}
