//! Code-specific machinery for the multimedia channel (coordinate symbol
//! sets) and the classical word channel (coordinate products): descendant
//! computation, bad-subfamily detection, randomized expurgation, and tracing.

use crate::combi::subset_count_up_to;
use crate::fchannel::{
    coalitions_up_to, column_sets_of, is_scheme_direct, u_bound, Channel, FchannelError,
    SchemeVerdict,
};
use crate::ipps::{select_deletions, ExpurgationOptions};
use crate::model::{Coalition, Code, Descendant};
use crate::TraceError;
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MippcError {
    #[error("n must be at least 2, got {n}")]
    BadN { n: u32 },
    #[error("q must be at least 2, got {q}")]
    BadQ { q: u32 },
    #[error("word count must be at least 1")]
    BadM,
    #[error("t must be at least {min}, got {t}")]
    BadT { t: u32, min: u32 },
    #[error("subfamily has {got} words, expected between 2 and {max}")]
    SubfamilySize { got: usize, max: u64 },
    #[error("words must share one length, got {a} and {b}")]
    MixedWordLength { a: usize, b: usize },
    #[error("descendant has {got} coordinates, code has {want}")]
    DescendantShape { got: usize, want: u32 },
    #[error("descendant coordinate {index} is empty")]
    EmptyCoordinate { index: usize },
    #[error("descendant symbol {symbol} is outside 0..{q}")]
    SymbolRange { symbol: u32, q: u32 },
    #[error("enumerating subfamilies over {words} words needs about {estimate} visits, budget is {budget}")]
    BudgetExceeded { words: usize, estimate: u128, budget: u64 },
    #[error("constructed code failed verification, which indicates a bug")]
    VerificationFailed,
    #[error(transparent)]
    Channel(#[from] FchannelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A word set that cannot be a subcode of any scheme: some equivalence class
/// of its small subsets under equal descendants covers every word while
/// sharing none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadSubfamily {
    /// Positions of the offending words in the examined list.
    pub words: Vec<usize>,
    /// Subsets with one common descendant, jointly covering `words` with
    /// empty intersection. Each subset lists positions, size-major order.
    pub witness_family: Vec<Vec<usize>>,
}

/// Verdicts for one code under both channels. The word channel is the
/// stricter one: passing it forces passing the symbol-set channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelComparison {
    pub ippc: SchemeVerdict,
    pub mippc: SchemeVerdict,
}

/// The coordinate-wise symbol sets contributed by a coalition: position i
/// holds every symbol some member carries at i.
pub fn desc(code: &Code, coalition: &Coalition) -> Descendant {
    Descendant::ColumnSets(column_sets_of(code, coalition.members()))
}

fn desc_of_positions(words: &[&[u32]], members: &[usize]) -> Vec<Vec<u32>> {
    let n = words[0].len();
    let mut sets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for &m in members {
        for (i, &symbol) in words[m].iter().enumerate() {
            sets[i].insert(symbol);
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// The first descendant-equivalence class of nonempty subsets of at most `t`
/// positions that covers all of 0..len with empty intersection, if any.
/// Classes are keyed by descendant, so the scan order is deterministic.
fn bad_class_of(words: &[&[u32]], t: u32) -> Option<Vec<Vec<usize>>> {
    debug_assert!(words.len() <= 63);
    struct ClassState {
        family: Vec<Vec<usize>>,
        union: u64,
        inter: u64,
    }
    let full: u64 = (1 << words.len()) - 1;
    let mut classes: BTreeMap<Vec<Vec<u32>>, ClassState> = BTreeMap::new();
    for members in coalitions_up_to(words.len(), t) {
        let mask: u64 = members.iter().map(|&m| 1 << m).sum();
        let entry = classes
            .entry(desc_of_positions(words, &members))
            .or_insert_with(|| ClassState { family: Vec::new(), union: 0, inter: full });
        entry.union |= mask;
        entry.inter &= mask;
        entry.family.push(members);
    }
    classes
        .into_values()
        .find(|class| class.union == full && class.inter == 0)
        .map(|class| class.family)
}

/// Tests whether some family of subsets of at most `t` words shares one
/// descendant, covers all of `words`, and has empty intersection. Duplicate
/// words are allowed (two copies alone form a bad pair) and are told apart
/// by position.
pub fn is_bad_subfamily(words: &[Vec<u32>], t: u32) -> Result<Option<BadSubfamily>, MippcError> {
    let u = u_bound(t).map_err(|_| MippcError::BadT { t, min: 2 })?;
    if words.len() < 2 || words.len() as u64 > u {
        return Err(MippcError::SubfamilySize { got: words.len(), max: u });
    }
    if let Some(w) = words.iter().find(|w| w.len() != words[0].len()) {
        return Err(MippcError::MixedWordLength { a: words[0].len(), b: w.len() });
    }
    let refs: Vec<&[u32]> = words.iter().map(|w| w.as_slice()).collect();
    let Some(witness_family) = bad_class_of(&refs, t) else {
        return Ok(None);
    };

    #[cfg(debug_assertions)]
    for i in 0..words[0].len() {
        let symbols: BTreeSet<u32> = words.iter().map(|w| w[i]).collect();
        let cap = if words.len() < 2 * t as usize { words.len() / 2 } else { t as usize };
        debug_assert!(symbols.len() <= cap);
    }

    Ok(Some(BadSubfamily { words: (0..words.len()).collect(), witness_family }))
}

/// Samples `m` words of length `n` over `0..q` independently and uniformly,
/// then deletes the last word of every bad subfamily of size up to
/// u_bound(t) among the sample. Badness is intrinsic to a subfamily, so no
/// bad subfamily survives, and by the small-subcode criterion the survivors
/// form a scheme under the symbol-set channel. Duplicate samples form bad
/// pairs, so the output is duplicate-free. Small outputs are re-verified.
pub fn random_expurgated_mippc(
    n: u32,
    q: u32,
    m: usize,
    t: u32,
    seed: u64,
) -> Result<Code, MippcError> {
    random_expurgated_mippc_with(n, q, m, t, seed, ExpurgationOptions::default())
}

pub fn random_expurgated_mippc_with(
    n: u32,
    q: u32,
    m: usize,
    t: u32,
    seed: u64,
    options: ExpurgationOptions,
) -> Result<Code, MippcError> {
    if n < 2 {
        return Err(MippcError::BadN { n });
    }
    if q < 2 {
        return Err(MippcError::BadQ { q });
    }
    if m < 1 {
        return Err(MippcError::BadM);
    }
    let u = u_bound(t).map_err(|_| MippcError::BadT { t, min: 2 })?;
    let estimate = subset_count_up_to(m, u);
    if estimate > options.budget as u128 {
        return Err(MippcError::BudgetExceeded { words: m, estimate, budget: options.budget });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample: Vec<Vec<u32>> =
        (0..m).map(|_| (0..n).map(|_| rng.random_range(0..q)).collect()).collect();
    sample.sort();
    let refs: Vec<&[u32]> = sample.iter().map(|w| w.as_slice()).collect();

    let mut bad: Vec<Vec<usize>> = Vec::new();
    for s in 2..=(u as usize).min(m) {
        for subset in (0..m).combinations(s) {
            let chosen: Vec<&[u32]> = subset.iter().map(|&i| refs[i]).collect();
            if bad_class_of(&chosen, t).is_some() {
                bad.push(subset);
            }
        }
    }
    let families: Vec<&[usize]> = bad.iter().map(|f| f.as_slice()).collect();
    let deleted = select_deletions(&families, options.rule);
    let survivors: Vec<Vec<u32>> =
        (0..m).filter(|i| !deleted.contains(i)).map(|i| sample[i].clone()).collect();
    let code = Code::from_parts(n, q, survivors).expect("survivors are distinct valid words");

    if code.len() <= 40 && !is_scheme_direct((&code).into(), t, Channel::Mippc)?.holds() {
        return Err(MippcError::VerificationFailed);
    }
    Ok(code)
}

fn validate_column_sets(code: &Code, column_sets: &[Vec<u32>]) -> Result<Vec<Vec<u32>>, MippcError> {
    if column_sets.len() != code.n() as usize {
        return Err(MippcError::DescendantShape { got: column_sets.len(), want: code.n() });
    }
    let mut target = Vec::with_capacity(column_sets.len());
    for (index, set) in column_sets.iter().enumerate() {
        let mut s = set.clone();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(MippcError::EmptyCoordinate { index });
        }
        if let Some(&symbol) = s.iter().find(|&&x| x >= code.q()) {
            return Err(MippcError::SymbolRange { symbol, q: code.q() });
        }
        target.push(s);
    }
    Ok(target)
}

/// Word indices common to every subset of at most `t` words whose descendant
/// equals the given coordinate symbol sets. `EmptyIntersection` can only
/// happen when the code is not a scheme under the symbol-set channel.
pub fn trace_mippc(
    code: &Code,
    column_sets: &[Vec<u32>],
    t: u32,
) -> Result<Vec<usize>, MippcError> {
    if t < 1 {
        return Err(MippcError::BadT { t, min: 1 });
    }
    let target = validate_column_sets(code, column_sets)?;
    let producers: Vec<Vec<usize>> = coalitions_up_to(code.len(), t)
        .into_iter()
        .filter(|members| column_sets_of(code, members) == target)
        .collect();
    intersect_producers(producers, t)
}

/// Word indices common to every subset of at most `t` words whose coordinate
/// products contain the given word.
pub fn trace_ippc(code: &Code, word: &[u32], t: u32) -> Result<Vec<usize>, MippcError> {
    if t < 1 {
        return Err(MippcError::BadT { t, min: 1 });
    }
    if word.len() != code.n() as usize {
        return Err(MippcError::DescendantShape { got: word.len(), want: code.n() });
    }
    if let Some(&symbol) = word.iter().find(|&&x| x >= code.q()) {
        return Err(MippcError::SymbolRange { symbol, q: code.q() });
    }
    let covers = |members: &[usize]| {
        word.iter()
            .enumerate()
            .all(|(i, &x)| members.iter().any(|&m| code.words()[m][i] == x))
    };
    let producers: Vec<Vec<usize>> =
        coalitions_up_to(code.len(), t).into_iter().filter(|m| covers(m)).collect();
    intersect_producers(producers, t)
}

fn intersect_producers(producers: Vec<Vec<usize>>, t: u32) -> Result<Vec<usize>, MippcError> {
    let Some(first) = producers.first() else {
        return Err(TraceError::NotProducible { t }.into());
    };
    let mut traced = first.clone();
    for p in &producers[1..] {
        traced.retain(|m| p.contains(m));
        if traced.is_empty() {
            return Err(TraceError::EmptyIntersection.into());
        }
    }
    Ok(traced)
}

/// Runs both channel verifiers on one code. A word-channel pass forces a
/// symbol-set-channel pass, since equal descendants let any producing set
/// forge every word of the shared coordinate product.
pub fn check_ippc_implies_mippc(code: &Code, t: u32) -> Result<ChannelComparison, MippcError> {
    let ippc = is_scheme_direct(code.into(), t, Channel::Ippc)?;
    let mippc = is_scheme_direct(code.into(), t, Channel::Mippc)?;
    debug_assert!(!(ippc.holds() && !mippc.holds()));
    Ok(ChannelComparison { ippc, mippc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipps::DeletionRule;
    use crate::model::{parse_code, serialize_code};

    fn code(text: &str) -> Code {
        parse_code(text).unwrap()
    }

    fn words(list: &[&[u32]]) -> Vec<Vec<u32>> {
        list.iter().map(|w| w.to_vec()).collect()
    }

    #[test]
    fn desc_takes_symbol_sets_per_coordinate() {
        let c = code(r#"{"n":3,"q":3,"words":[[0,1,2]]}"#);
        let single = Coalition::new([0], 1).unwrap();
        assert_eq!(
            desc(&c, &single),
            Descendant::ColumnSets(vec![vec![0], vec![1], vec![2]])
        );

        let c = code(r#"{"n":2,"q":2,"words":[[0,1],[1,0]]}"#);
        let both = Coalition::new([0, 1], 2).unwrap();
        assert_eq!(desc(&c, &both), Descendant::ColumnSets(vec![vec![0, 1], vec![0, 1]]));

        let c = code(r#"{"n":2,"q":2,"words":[[0,0],[0,1]]}"#);
        let both = Coalition::new([0, 1], 2).unwrap();
        assert_eq!(desc(&c, &both), Descendant::ColumnSets(vec![vec![0], vec![0, 1]]));
    }

    #[test]
    fn bad_subfamily_detection() {
        let all_binary = words(&[&[0, 1], &[1, 0], &[0, 0], &[1, 1]]);
        let found = is_bad_subfamily(&all_binary, 2).unwrap().unwrap();
        assert_eq!(found.words, vec![0, 1, 2, 3]);
        assert_eq!(found.witness_family, vec![vec![0, 1], vec![2, 3]]);

        assert_eq!(is_bad_subfamily(&words(&[&[0, 0], &[0, 1]]), 2).unwrap(), None);

        let twins = words(&[&[0, 1], &[0, 1]]);
        let found = is_bad_subfamily(&twins, 2).unwrap().unwrap();
        assert_eq!(found.witness_family, vec![vec![0], vec![1], vec![0, 1]]);

        assert!(matches!(
            is_bad_subfamily(&words(&[&[0, 0]]), 2),
            Err(MippcError::SubfamilySize { got: 1, max: 4 })
        ));
        let five = words(&[&[0, 0], &[0, 1], &[1, 0], &[1, 1], &[0, 0]]);
        assert!(matches!(
            is_bad_subfamily(&five, 2),
            Err(MippcError::SubfamilySize { got: 5, max: 4 })
        ));
        assert!(matches!(
            is_bad_subfamily(&words(&[&[0, 0], &[0, 1]]), 1),
            Err(MippcError::BadT { t: 1, min: 2 })
        ));
        assert!(matches!(
            is_bad_subfamily(&words(&[&[0, 0], &[0]]), 2),
            Err(MippcError::MixedWordLength { a: 2, b: 1 })
        ));
    }

    // Independent oracle: try every collection of distinct nonempty subsets
    // of at most t positions against the cover, empty-intersection, and
    // equal-descendant conditions directly.
    fn bad_by_family_enumeration(list: &[Vec<u32>], t: u32) -> bool {
        let m = list.len();
        let refs: Vec<&[u32]> = list.iter().map(|w| w.as_slice()).collect();
        let subsets = coalitions_up_to(m, t);
        let full: u64 = (1 << m) - 1;
        for collection in 1u64..(1 << subsets.len()) {
            let picked: Vec<&Vec<usize>> = (0..subsets.len())
                .filter(|&i| collection >> i & 1 == 1)
                .map(|i| &subsets[i])
                .collect();
            let descs: Vec<_> = picked.iter().map(|s| desc_of_positions(&refs, s)).collect();
            if descs.windows(2).any(|pair| pair[0] != pair[1]) {
                continue;
            }
            let masks: Vec<u64> =
                picked.iter().map(|s| s.iter().map(|&i| 1u64 << i).sum()).collect();
            let union = masks.iter().fold(0, |a, &b| a | b);
            let inter = masks.iter().fold(full, |a, &b| a & b);
            if union == full && inter == 0 {
                return true;
            }
        }
        false
    }

    #[test]
    fn class_test_matches_family_enumeration() {
        // Every multiset of binary length-2 words of size 2..4, t = 2.
        let alphabet: Vec<Vec<u32>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        for size in 2..=4usize {
            for pick in (0..alphabet.len()).combinations_with_replacement(size) {
                let list: Vec<Vec<u32>> = pick.iter().map(|&i| alphabet[i].clone()).collect();
                let fast = is_bad_subfamily(&list, 2).unwrap().is_some();
                assert_eq!(fast, bad_by_family_enumeration(&list, 2), "multiset {list:?}");
            }
        }
    }

    #[test]
    fn expurgation_is_deterministic_and_verified() {
        let a = random_expurgated_mippc(2, 8, 16, 2, 7).unwrap();
        let b = random_expurgated_mippc(2, 8, 16, 2, 7).unwrap();
        assert_eq!(serialize_code(&a), serialize_code(&b));
        assert!(!a.is_empty());
        assert!(is_scheme_direct((&a).into(), 2, Channel::Mippc).unwrap().holds());

        let single = random_expurgated_mippc(2, 2, 1, 2, 3).unwrap();
        assert_eq!(single.len(), 1);

        // Ten draws from a four-word space force duplicates; the output is a
        // valid duplicate-free code regardless.
        let crowded = random_expurgated_mippc(2, 2, 10, 2, 5).unwrap();
        assert!(crowded.len() <= 4);
    }

    #[test]
    fn expurgation_rejects_bad_parameters() {
        assert!(matches!(random_expurgated_mippc(1, 2, 4, 2, 0), Err(MippcError::BadN { n: 1 })));
        assert!(matches!(random_expurgated_mippc(2, 1, 4, 2, 0), Err(MippcError::BadQ { q: 1 })));
        assert!(matches!(random_expurgated_mippc(2, 2, 0, 2, 0), Err(MippcError::BadM)));
        assert!(matches!(
            random_expurgated_mippc(2, 2, 4, 1, 0),
            Err(MippcError::BadT { t: 1, min: 2 })
        ));
        let tiny = ExpurgationOptions { budget: 3, ..Default::default() };
        assert!(matches!(
            random_expurgated_mippc_with(2, 8, 16, 2, 0, tiny),
            Err(MippcError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn greedy_rule_output_is_also_verified() {
        let options = ExpurgationOptions { rule: DeletionRule::GreedyCover, ..Default::default() };
        let c = random_expurgated_mippc_with(2, 6, 11, 2, 9, options).unwrap();
        assert!(is_scheme_direct((&c).into(), 2, Channel::Mippc).unwrap().holds());
    }

    #[test]
    fn symbol_set_tracing() {
        let c = code(r#"{"n":2,"q":3,"words":[[0,0],[0,1],[1,2]]}"#);
        assert_eq!(trace_mippc(&c, &[vec![0, 1], vec![1, 2]], 2).unwrap(), vec![1, 2]);
        assert_eq!(trace_mippc(&c, &[vec![0], vec![0]], 2).unwrap(), vec![0]);
        assert!(matches!(
            trace_mippc(&c, &[vec![2], vec![2]], 2),
            Err(MippcError::Trace(TraceError::NotProducible { t: 2 }))
        ));

        let square = code(r#"{"n":2,"q":2,"words":[[0,0],[0,1],[1,0],[1,1]]}"#);
        assert!(matches!(
            trace_mippc(&square, &[vec![0, 1], vec![0, 1]], 2),
            Err(MippcError::Trace(TraceError::EmptyIntersection))
        ));

        assert!(matches!(
            trace_mippc(&c, &[vec![0]], 2),
            Err(MippcError::DescendantShape { got: 1, want: 2 })
        ));
        assert!(matches!(
            trace_mippc(&c, &[vec![0], vec![]], 2),
            Err(MippcError::EmptyCoordinate { index: 1 })
        ));
        assert!(matches!(
            trace_mippc(&c, &[vec![0], vec![3]], 2),
            Err(MippcError::SymbolRange { symbol: 3, q: 3 })
        ));
    }

    #[test]
    fn word_tracing() {
        let diagonal = code(r#"{"n":2,"q":3,"words":[[0,0],[1,1],[2,2]]}"#);
        assert_eq!(trace_ippc(&diagonal, &[0, 1], 2).unwrap(), vec![0, 1]);
        assert_eq!(trace_ippc(&diagonal, &[0, 0], 2).unwrap(), vec![0]);

        let lone = code(r#"{"n":2,"q":2,"words":[[0,0]]}"#);
        assert!(matches!(
            trace_ippc(&lone, &[0, 1], 2),
            Err(MippcError::Trace(TraceError::NotProducible { t: 2 }))
        ));
        assert!(matches!(
            trace_ippc(&diagonal, &[0, 1, 2], 2),
            Err(MippcError::DescendantShape { got: 3, want: 2 })
        ));
        assert!(matches!(
            trace_ippc(&diagonal, &[0, 3], 2),
            Err(MippcError::SymbolRange { symbol: 3, q: 3 })
        ));
    }

    #[test]
    fn word_channel_pass_forces_symbol_channel_pass() {
        let diagonal = code(r#"{"n":2,"q":3,"words":[[0,0],[1,1],[2,2]]}"#);
        let report = check_ippc_implies_mippc(&diagonal, 2).unwrap();
        assert!(report.ippc.holds() && report.mippc.holds());

        let square = code(r#"{"n":2,"q":2,"words":[[0,0],[0,1],[1,0],[1,1]]}"#);
        let report = check_ippc_implies_mippc(&square, 2).unwrap();
        assert!(!report.ippc.holds() && !report.mippc.holds());

        let lone = code(r#"{"n":2,"q":2,"words":[[0,0]]}"#);
        let report = check_ippc_implies_mippc(&lone, 2).unwrap();
        assert!(report.ippc.holds() && report.mippc.holds());
    }
}
