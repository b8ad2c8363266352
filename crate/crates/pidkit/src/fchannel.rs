//! Descendant channels and the generic parent-identification verifiers.
//!
//! A channel maps a coalition to the set of descendants it can forge. The
//! verifiers ask, for every producible descendant, whether all coalitions of
//! size at most `t` able to produce it still share a member. `is_scheme_direct`
//! checks that definition verbatim; `is_scheme_local` instead checks every
//! sub-universe of size at most `u_bound(t)`, which is equivalent because a
//! minimal failing family never spans more members than that.

use crate::bits::Bitset;
use crate::model::{Coalition, Code, Descendant, SetSystem};
use itertools::Itertools;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FchannelError {
    #[error("t must be at least 1")]
    ZeroT,
    #[error("t must be at least 2 for the local verifier, got {t}")]
    SmallT { t: u32 },
    #[error("this channel applies to set systems, not codes")]
    NeedsSystem,
    #[error("this channel applies to codes, not set systems")]
    NeedsCode,
    #[error("channel width {channel_w} differs from system width {system_w}")]
    WidthMismatch { channel_w: u32, system_w: u32 },
    #[error("coalition of size {size} exceeds t = {t}")]
    CoalitionTooLarge { size: usize, t: u32 },
    #[error("member index {member} is outside 0..{len}")]
    MemberRange { member: usize, len: usize },
    #[error("the family of coalitions is empty")]
    EmptyFamily,
}

/// How coalitions forge descendants.
///
/// `Ipps`: any `w`-subset of the union of the coalition's blocks. `Or`: the
/// union itself, as a single output. `Mippc`: the per-coordinate symbol sets,
/// as a single output. `Ippc`: any word drawn coordinate-wise from the
/// coalition's symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Ipps { w: u32 },
    Mippc,
    Ippc,
    Or,
}

/// A borrowed universe: the blocks of a set system or the words of a code.
#[derive(Debug, Clone, Copy)]
pub enum Universe<'a> {
    System(&'a SetSystem),
    Code(&'a Code),
}

impl<'a> From<&'a SetSystem> for Universe<'a> {
    fn from(s: &'a SetSystem) -> Self {
        Universe::System(s)
    }
}

impl<'a> From<&'a Code> for Universe<'a> {
    fn from(c: &'a Code) -> Self {
        Universe::Code(c)
    }
}

impl Universe<'_> {
    pub fn len(&self) -> usize {
        match self {
            Universe::System(s) => s.len(),
            Universe::Code(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Largest number of members a minimal failing family can span: ⌊(t/2 + 1)²⌋.
pub fn u_bound(t: u32) -> Result<u64, FchannelError> {
    if t < 2 {
        return Err(FchannelError::SmallT { t });
    }
    let t = t as u64;
    Ok((t + 2) * (t + 2) / 4)
}

/// One failing instance of the parent-identification property: a coalition,
/// a descendant it produces, and the full list of producing coalitions whose
/// intersection is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeViolation {
    pub coalition: Coalition,
    pub descendant: Descendant,
    pub parents: Vec<Coalition>,
}

/// Outcome of a scheme verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "violation", rename_all = "snake_case")]
pub enum SchemeVerdict {
    Holds,
    Violated(Box<SchemeViolation>),
}

impl SchemeVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SchemeVerdict::Holds)
    }

    pub fn violation(&self) -> Option<&SchemeViolation> {
        match self {
            SchemeVerdict::Holds => None,
            SchemeVerdict::Violated(v) => Some(v),
        }
    }
}

/// Classification of a family of coalitions against one channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigurationReport {
    /// The coalitions share no member.
    pub is_configuration: bool,
    /// A configuration that stops being one when any single coalition is dropped.
    pub is_minimal: bool,
    /// All coalitions can forge one common descendant.
    pub is_forbidden: bool,
    pub witness_descendant: Option<Descendant>,
    /// Number of distinct members across the family.
    pub union_size: usize,
}

pub(crate) fn block_union_of(system: &SetSystem, members: &[usize]) -> Bitset {
    let mut union = Bitset::new(system.v());
    for &i in members {
        for &p in &system.blocks()[i] {
            union.insert(p);
        }
    }
    union
}

pub(crate) fn column_sets_of(code: &Code, members: &[usize]) -> Vec<Vec<u32>> {
    (0..code.n() as usize)
        .map(|coord| {
            let mut symbols: Vec<u32> = members.iter().map(|&i| code.words()[i][coord]).collect();
            symbols.sort_unstable();
            symbols.dedup();
            symbols
        })
        .collect()
}

/// All member subsets of size 1..=t, smaller sizes first, lexicographic within
/// each size. This is the canonical coalition order used for witnesses.
pub(crate) fn coalitions_up_to(len: usize, t: u32) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=(t as usize).min(len) {
        out.extend((0..len).combinations(size));
    }
    out
}

fn check_pairing(channel: Channel, universe: Universe<'_>) -> Result<(), FchannelError> {
    match (channel, universe) {
        (Channel::Ipps { w }, Universe::System(s)) => {
            if w != s.w() {
                Err(FchannelError::WidthMismatch { channel_w: w, system_w: s.w() })
            } else {
                Ok(())
            }
        }
        (Channel::Or, Universe::System(_)) => Ok(()),
        (Channel::Mippc | Channel::Ippc, Universe::Code(_)) => Ok(()),
        (Channel::Ipps { .. } | Channel::Or, Universe::Code(_)) => Err(FchannelError::NeedsSystem),
        (Channel::Mippc | Channel::Ippc, Universe::System(_)) => Err(FchannelError::NeedsCode),
    }
}

fn check_members(members: &[usize], len: usize) -> Result<(), FchannelError> {
    match members.iter().find(|&&m| m >= len) {
        Some(&member) => Err(FchannelError::MemberRange { member, len }),
        None => Ok(()),
    }
}

/// The stream of descendants one coalition can forge, in canonical order.
/// Product channels are generated lazily, never materialized.
pub fn enumerate_descendants(
    coalition: &Coalition,
    channel: Channel,
    universe: Universe<'_>,
) -> Result<Box<dyn Iterator<Item = Descendant>>, FchannelError> {
    check_pairing(channel, universe)?;
    check_members(coalition.members(), universe.len())?;
    match (channel, universe) {
        (Channel::Ipps { w }, Universe::System(s)) => {
            let union = block_union_of(s, coalition.members()).to_vec();
            Ok(Box::new(union.into_iter().combinations(w as usize).map(Descendant::PointSet)))
        }
        (Channel::Or, Universe::System(s)) => {
            let union = block_union_of(s, coalition.members()).to_vec();
            Ok(Box::new(std::iter::once(Descendant::UnionSet(union))))
        }
        (Channel::Mippc, Universe::Code(c)) => {
            let columns = column_sets_of(c, coalition.members());
            Ok(Box::new(std::iter::once(Descendant::ColumnSets(columns))))
        }
        (Channel::Ippc, Universe::Code(c)) => {
            let columns = column_sets_of(c, coalition.members());
            Ok(Box::new(columns.into_iter().multi_cartesian_product().map(Descendant::Word)))
        }
        _ => unreachable!("pairing checked above"),
    }
}

/// Per-coalition channel summaries used to test "does coalition p produce d".
struct Engine<'a> {
    channel: Channel,
    universe: Universe<'a>,
    coalitions: Vec<Vec<usize>>,
    unions: Vec<Bitset>,          // Ipps, Or
    columns: Vec<Vec<Vec<u32>>>,  // Mippc, Ippc
}

impl<'a> Engine<'a> {
    fn build(universe: Universe<'a>, t: u32, channel: Channel) -> Result<Self, FchannelError> {
        check_pairing(channel, universe)?;
        if t == 0 {
            return Err(FchannelError::ZeroT);
        }
        let coalitions = coalitions_up_to(universe.len(), t);
        let (mut unions, mut columns) = (Vec::new(), Vec::new());
        match universe {
            Universe::System(s) => {
                unions = coalitions.iter().map(|c| block_union_of(s, c)).collect();
            }
            Universe::Code(c) => {
                columns = coalitions.iter().map(|m| column_sets_of(c, m)).collect();
            }
        }
        Ok(Engine { channel, universe, coalitions, unions, columns })
    }

    fn descendants(&self, ci: usize) -> Box<dyn Iterator<Item = Descendant>> {
        match self.channel {
            Channel::Ipps { w } => {
                let union = self.unions[ci].to_vec();
                Box::new(union.into_iter().combinations(w as usize).map(Descendant::PointSet))
            }
            Channel::Or => Box::new(std::iter::once(Descendant::UnionSet(self.unions[ci].to_vec()))),
            Channel::Mippc => Box::new(std::iter::once(Descendant::ColumnSets(self.columns[ci].clone()))),
            Channel::Ippc => {
                Box::new(self.columns[ci].clone().into_iter().multi_cartesian_product().map(Descendant::Word))
            }
        }
    }

    /// Indices of all coalitions able to produce `d`, in canonical order.
    fn parents_of(&self, d: &Descendant) -> Vec<usize> {
        match (self.channel, d) {
            (Channel::Ipps { .. }, Descendant::PointSet(points)) => (0..self.coalitions.len())
                .filter(|&pi| points.iter().all(|&p| self.unions[pi].contains(p)))
                .collect(),
            (Channel::Or, Descendant::UnionSet(points)) => {
                let v = match self.universe {
                    Universe::System(s) => s.v(),
                    Universe::Code(_) => unreachable!(),
                };
                let mask = Bitset::from_iter(v, points.iter().copied());
                (0..self.coalitions.len()).filter(|&pi| self.unions[pi] == mask).collect()
            }
            (Channel::Mippc, Descendant::ColumnSets(cols)) => {
                (0..self.coalitions.len()).filter(|&pi| &self.columns[pi] == cols).collect()
            }
            (Channel::Ippc, Descendant::Word(word)) => (0..self.coalitions.len())
                .filter(|&pi| {
                    word.iter()
                        .enumerate()
                        .all(|(coord, s)| self.columns[pi][coord].binary_search(s).is_ok())
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    fn intersect_members(&self, parent_indices: &[usize]) -> Vec<usize> {
        let mut inter = self.coalitions[parent_indices[0]].clone();
        for &pi in &parent_indices[1..] {
            let other = &self.coalitions[pi];
            inter.retain(|m| other.binary_search(m).is_ok());
            if inter.is_empty() {
                break;
            }
        }
        inter
    }

    fn violation(&self, ci: usize, d: Descendant, parent_indices: &[usize]) -> SchemeViolation {
        let len = self.universe.len();
        let as_coalition = |members: &Vec<usize>| {
            Coalition::new(members.iter().copied(), len).expect("engine coalitions are valid")
        };
        SchemeViolation {
            coalition: as_coalition(&self.coalitions[ci]),
            descendant: d,
            parents: parent_indices.iter().map(|&pi| as_coalition(&self.coalitions[pi])).collect(),
        }
    }
}

/// Checks the parent-identification property over every coalition of size at
/// most `t` and every descendant it produces. Witnesses are canonical: the
/// first failing (coalition, descendant) pair in enumeration order.
pub fn is_scheme_direct(
    universe: Universe<'_>,
    t: u32,
    channel: Channel,
) -> Result<SchemeVerdict, FchannelError> {
    let engine = Engine::build(universe, t, channel)?;
    let mut seen: BTreeSet<Descendant> = BTreeSet::new();
    for ci in 0..engine.coalitions.len() {
        for d in engine.descendants(ci) {
            if !seen.insert(d.clone()) {
                continue;
            }
            let parent_indices = engine.parents_of(&d);
            debug_assert!(parent_indices.binary_search(&ci).is_ok());
            if engine.intersect_members(&parent_indices).is_empty() {
                return Ok(SchemeVerdict::Violated(Box::new(engine.violation(ci, d, &parent_indices))));
            }
        }
    }
    Ok(SchemeVerdict::Holds)
}

/// Equivalent to [`is_scheme_direct`], but decided by checking each
/// sub-universe of size at most `u_bound(t)`. The witness names the violation
/// inside the first failing sub-universe, with members mapped back to the full
/// universe and the parent list recomputed against it.
pub fn is_scheme_local(
    universe: Universe<'_>,
    t: u32,
    channel: Channel,
) -> Result<SchemeVerdict, FchannelError> {
    check_pairing(channel, universe)?;
    let u = u_bound(t)? as usize;
    let len = universe.len();
    for size in 1..=u.min(len) {
        for subset in (0..len).combinations(size) {
            let inner = match universe {
                Universe::System(s) => {
                    is_scheme_direct((&s.sub_system(&subset)).into(), t, channel)?
                }
                Universe::Code(c) => is_scheme_direct((&c.sub_code(&subset)).into(), t, channel)?,
            };
            if let SchemeVerdict::Violated(v) = inner {
                let members = v.coalition.members().iter().map(|&i| subset[i]);
                let coalition = Coalition::new(members, len).expect("mapped members are in range");
                // Any violation inside a sub-universe is one in the full
                // universe: extra parents only shrink the intersection.
                let engine = Engine::build(universe, t, channel)?;
                let parent_indices = engine.parents_of(&v.descendant);
                debug_assert!(engine.intersect_members(&parent_indices).is_empty());
                let ci = engine
                    .coalitions
                    .iter()
                    .position(|c| c.as_slice() == coalition.members())
                    .expect("mapped coalition exists in full enumeration");
                return Ok(SchemeVerdict::Violated(Box::new(engine.violation(
                    ci,
                    v.descendant,
                    &parent_indices,
                ))));
            }
        }
    }
    Ok(SchemeVerdict::Holds)
}

/// Classifies a family of coalitions: does it share no member, is it minimal
/// with that property, and can all coalitions forge one common descendant.
pub fn classify_configuration(
    family: &[Coalition],
    t: u32,
    channel: Channel,
    universe: Universe<'_>,
) -> Result<ConfigurationReport, FchannelError> {
    check_pairing(channel, universe)?;
    if family.is_empty() {
        return Err(FchannelError::EmptyFamily);
    }
    let len = universe.len();
    for coalition in family {
        if coalition.size() > t as usize {
            return Err(FchannelError::CoalitionTooLarge { size: coalition.size(), t });
        }
        check_members(coalition.members(), len)?;
    }

    let member_mask = |c: &Coalition| Bitset::from_iter(len as u32, c.members().iter().map(|&m| m as u32));
    let masks: Vec<Bitset> = family.iter().map(member_mask).collect();
    let intersect_all = |skip: Option<usize>| -> Bitset {
        let mut acc: Option<Bitset> = None;
        for (i, mask) in masks.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            match &mut acc {
                None => acc = Some(mask.clone()),
                Some(a) => a.intersect_with(mask),
            }
        }
        acc.unwrap_or_else(|| {
            // Intersection over an empty collection: every member qualifies.
            let mut all = Bitset::new(len as u32);
            for m in 0..len as u32 {
                all.insert(m);
            }
            all
        })
    };

    let is_configuration = intersect_all(None).is_empty();
    let is_minimal =
        is_configuration && (0..family.len()).all(|i| !intersect_all(Some(i)).is_empty());

    let mut union_mask = Bitset::new(len as u32);
    for mask in &masks {
        union_mask.union_with(mask);
    }
    let union_size = union_mask.count();

    let witness_descendant = common_descendant(family, channel, universe);
    Ok(ConfigurationReport {
        is_configuration,
        is_minimal,
        is_forbidden: witness_descendant.is_some(),
        witness_descendant,
        union_size,
    })
}

/// A descendant every coalition of the family can forge, if one exists.
/// Set-valued channels yield the lexicographically least choice.
fn common_descendant(
    family: &[Coalition],
    channel: Channel,
    universe: Universe<'_>,
) -> Option<Descendant> {
    match (channel, universe) {
        (Channel::Ipps { w }, Universe::System(s)) => {
            let mut shared: Option<Bitset> = None;
            for coalition in family {
                let union = block_union_of(s, coalition.members());
                match &mut shared {
                    None => shared = Some(union),
                    Some(acc) => acc.intersect_with(&union),
                }
            }
            let shared = shared?;
            if shared.count() >= w as usize {
                Some(Descendant::PointSet(shared.iter().take(w as usize).collect()))
            } else {
                None
            }
        }
        (Channel::Or, Universe::System(s)) => {
            let unions: Vec<Bitset> =
                family.iter().map(|c| block_union_of(s, c.members())).collect();
            unions[1..]
                .iter()
                .all(|u| *u == unions[0])
                .then(|| Descendant::UnionSet(unions[0].to_vec()))
        }
        (Channel::Mippc, Universe::Code(c)) => {
            let descs: Vec<Vec<Vec<u32>>> =
                family.iter().map(|m| column_sets_of(c, m.members())).collect();
            descs[1..]
                .iter()
                .all(|d| *d == descs[0])
                .then(|| Descendant::ColumnSets(descs[0].clone()))
        }
        (Channel::Ippc, Universe::Code(c)) => {
            let mut word = Vec::with_capacity(c.n() as usize);
            for coord in 0..c.n() as usize {
                let mut shared: Option<BTreeSet<u32>> = None;
                for coalition in family {
                    let symbols: BTreeSet<u32> =
                        coalition.members().iter().map(|&i| c.words()[i][coord]).collect();
                    shared = Some(match shared {
                        None => symbols,
                        Some(acc) => acc.intersection(&symbols).copied().collect(),
                    });
                }
                word.push(*shared.expect("family is nonempty").first()?);
            }
            Some(Descendant::Word(word))
        }
        _ => unreachable!("pairing checked by callers"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_code, parse_set_system};

    fn system(text: &str) -> SetSystem {
        parse_set_system(text).unwrap()
    }

    fn code(text: &str) -> Code {
        parse_code(text).unwrap()
    }

    #[test]
    fn u_bound_small_values_and_identity() {
        assert_eq!(u_bound(2).unwrap(), 4);
        assert_eq!(u_bound(3).unwrap(), 6);
        assert_eq!(u_bound(4).unwrap(), 9);
        assert_eq!(u_bound(5).unwrap(), 12);
        assert!(u_bound(1).is_err());
        for t in 2..=1000u64 {
            let u = u_bound(t as u32).unwrap();
            assert_eq!(u - 1, t * t / 4 + t, "t = {t}");
        }
    }

    #[test]
    fn triangle_family_is_minimal_and_forbidden() {
        let s = system(r#"{"v":4,"w":2,"blocks":[[1,2],[1,3],[2,3]]}"#);
        // Blocks sort to [1,2] [1,3] [2,3]; the family pairs them as a cycle.
        let family = vec![
            Coalition::new([0, 2], 3).unwrap(), // {1,2} {2,3}
            Coalition::new([0, 1], 3).unwrap(), // {1,2} {1,3}
            Coalition::new([1, 2], 3).unwrap(), // {1,3} {2,3}
        ];
        let report = classify_configuration(&family, 2, Channel::Ipps { w: 2 }, (&s).into()).unwrap();
        assert!(report.is_configuration && report.is_minimal && report.is_forbidden);
        assert_eq!(report.union_size, 3);
        assert_eq!(report.witness_descendant, Some(Descendant::PointSet(vec![1, 2])));
    }

    #[test]
    fn nested_family_is_not_a_configuration() {
        let s = system(r#"{"v":4,"w":2,"blocks":[[0,1],[2,3]]}"#);
        let family = vec![Coalition::new([0], 2).unwrap(), Coalition::new([0, 1], 2).unwrap()];
        let report = classify_configuration(&family, 2, Channel::Ipps { w: 2 }, (&s).into()).unwrap();
        assert!(!report.is_configuration && !report.is_minimal);
        assert_eq!(report.union_size, 2);
    }

    #[test]
    fn classification_validates_inputs() {
        let s = system(r#"{"v":4,"w":2,"blocks":[[0,1],[2,3]]}"#);
        let family = vec![Coalition::new([0, 1], 2).unwrap()];
        assert!(matches!(
            classify_configuration(&family, 1, Channel::Ipps { w: 2 }, (&s).into()),
            Err(FchannelError::CoalitionTooLarge { size: 2, t: 1 })
        ));
        assert!(matches!(
            classify_configuration(&[], 2, Channel::Ipps { w: 2 }, (&s).into()),
            Err(FchannelError::EmptyFamily)
        ));
        assert!(matches!(
            classify_configuration(&family, 2, Channel::Mippc, (&s).into()),
            Err(FchannelError::NeedsCode)
        ));
        assert!(matches!(
            classify_configuration(&family, 2, Channel::Ipps { w: 3 }, (&s).into()),
            Err(FchannelError::WidthMismatch { channel_w: 3, system_w: 2 })
        ));
    }

    #[test]
    fn descendant_streams_per_channel() {
        let s = system(r#"{"v":5,"w":2,"blocks":[[0,1],[2,3]]}"#);
        let c = Coalition::new([0, 1], 2).unwrap();
        let points: Vec<Descendant> =
            enumerate_descendants(&c, Channel::Ipps { w: 2 }, (&s).into()).unwrap().collect();
        assert_eq!(points.len(), 6); // all pairs from {0,1,2,3}
        assert_eq!(points[0], Descendant::PointSet(vec![0, 1]));
        assert_eq!(points[5], Descendant::PointSet(vec![2, 3]));

        let unions: Vec<Descendant> =
            enumerate_descendants(&c, Channel::Or, (&s).into()).unwrap().collect();
        assert_eq!(unions, vec![Descendant::UnionSet(vec![0, 1, 2, 3])]);

        let k = code(r#"{"n":2,"q":3,"words":[[0,1],[1,2],[2,0]]}"#);
        let c = Coalition::new([0, 1, 2], 3).unwrap();
        let cols: Vec<Descendant> =
            enumerate_descendants(&c, Channel::Mippc, (&k).into()).unwrap().collect();
        assert_eq!(cols, vec![Descendant::ColumnSets(vec![vec![0, 1, 2], vec![0, 1, 2]])]);

        let words: Vec<Descendant> =
            enumerate_descendants(&c, Channel::Ippc, (&k).into()).unwrap().collect();
        assert_eq!(words.len(), 9);
        assert_eq!(words[0], Descendant::Word(vec![0, 0]));
        assert_eq!(words[8], Descendant::Word(vec![2, 2]));
    }

    #[test]
    fn single_member_universes_hold_for_every_channel() {
        let s = system(r#"{"v":3,"w":3,"blocks":[[0,1,2]]}"#);
        for channel in [Channel::Ipps { w: 3 }, Channel::Or] {
            for t in [1, 2, 3, 5] {
                assert!(is_scheme_direct((&s).into(), t, channel).unwrap().holds());
            }
        }
        let k = code(r#"{"n":2,"q":2,"words":[[1,0]]}"#);
        for channel in [Channel::Mippc, Channel::Ippc] {
            assert!(is_scheme_direct((&k).into(), 2, channel).unwrap().holds());
            assert!(is_scheme_local((&k).into(), 2, channel).unwrap().holds());
        }
    }

    #[test]
    fn empty_universes_hold_vacuously() {
        let s = system(r#"{"v":3,"w":2,"blocks":[]}"#);
        assert!(is_scheme_direct((&s).into(), 2, Channel::Ipps { w: 2 }).unwrap().holds());
        assert!(is_scheme_local((&s).into(), 2, Channel::Ipps { w: 2 }).unwrap().holds());
    }

    #[test]
    fn disjoint_pairs_defeat_the_full_binary_square() {
        let k = code(r#"{"n":2,"q":2,"words":[[0,0],[0,1],[1,0],[1,1]]}"#);
        let verdict = is_scheme_direct((&k).into(), 2, Channel::Mippc).unwrap();
        let v = verdict.violation().expect("the full square is not 2-identifying");
        assert_eq!(v.coalition.members(), &[0, 3]);
        assert_eq!(v.descendant, Descendant::ColumnSets(vec![vec![0, 1], vec![0, 1]]));
        let parents: Vec<&[usize]> = v.parents.iter().map(|p| p.members()).collect();
        assert_eq!(parents, vec![&[0, 3][..], &[1, 2][..]]);

        let local = is_scheme_local((&k).into(), 2, Channel::Mippc).unwrap();
        assert!(!local.holds());
        assert_eq!(local.violation().unwrap().descendant, v.descendant);
    }

    #[test]
    fn triangle_system_fails_both_verifiers() {
        let s = system(r#"{"v":4,"w":2,"blocks":[[1,2],[1,3],[2,3]]}"#);
        let direct = is_scheme_direct((&s).into(), 2, Channel::Ipps { w: 2 }).unwrap();
        assert!(!direct.holds());
        let v = direct.violation().unwrap();
        // First failing descendant: the first block itself, producible by the
        // coalition of the other two blocks as well.
        assert_eq!(v.descendant, Descendant::PointSet(vec![1, 2]));
        assert!(v.parents.iter().any(|p| p.members() == [1, 2]));
        assert!(!is_scheme_local((&s).into(), 2, Channel::Ipps { w: 2 }).unwrap().holds());
    }

    #[test]
    fn near_disjoint_blocks_hold_under_or() {
        let s = system(r#"{"v":6,"w":2,"blocks":[[0,1],[2,3],[4,5]]}"#);
        assert!(is_scheme_direct((&s).into(), 2, Channel::Or).unwrap().holds());
        // Two coalitions with equal unions but no shared member break it.
        let bad = system(r#"{"v":4,"w":2,"blocks":[[0,1],[0,3],[1,2],[2,3]]}"#);
        let verdict = is_scheme_direct((&bad).into(), 2, Channel::Or).unwrap();
        let v = verdict.violation().expect("two disjoint pairs share the union 0..4");
        assert_eq!(v.descendant, Descendant::UnionSet(vec![0, 1, 2, 3]));
    }

    #[test]
    fn diagonal_code_is_ippc_identifying() {
        let k = code(r#"{"n":2,"q":3,"words":[[0,0],[1,1],[2,2]]}"#);
        assert!(is_scheme_direct((&k).into(), 2, Channel::Ippc).unwrap().holds());
        assert!(is_scheme_local((&k).into(), 2, Channel::Ippc).unwrap().holds());
    }

    #[test]
    fn verifier_rejects_mismatched_inputs() {
        let s = system(r#"{"v":3,"w":2,"blocks":[[0,1]]}"#);
        assert!(matches!(
            is_scheme_direct((&s).into(), 2, Channel::Ippc),
            Err(FchannelError::NeedsCode)
        ));
        assert!(matches!(
            is_scheme_direct((&s).into(), 0, Channel::Ipps { w: 2 }),
            Err(FchannelError::ZeroT)
        ));
        let k = code(r#"{"n":1,"q":2,"words":[[0]]}"#);
        assert!(matches!(
            is_scheme_local((&k).into(), 1, Channel::Mippc),
            Err(FchannelError::SmallT { t: 1 })
        ));
        assert!(matches!(
            is_scheme_direct((&k).into(), 2, Channel::Or),
            Err(FchannelError::NeedsSystem)
        ));
    }
}
