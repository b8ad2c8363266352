//! Set systems, codes, coalitions and descendants, with canonical JSON forms.
//!
//! Canonical form: blocks are sorted point lists and the block list is sorted
//! lexicographically; code words are sorted lexicographically. Parsing accepts
//! any order and normalizes, so equal families always serialize identically.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("w is {w} but v is {v}; need 1 <= w <= v")]
    BadSystemShape { v: u32, w: u32 },
    #[error("block {index} has {got} points, expected {want}")]
    BlockSize { index: usize, got: usize, want: u32 },
    #[error("block {index} repeats point {point}")]
    RepeatedPoint { index: usize, point: u32 },
    #[error("block {index} contains point {point}, outside 0..{v}")]
    PointRange { index: usize, point: u32, v: u32 },
    #[error("blocks {first} and {second} are equal")]
    DuplicateBlock { first: usize, second: usize },
    #[error("need n >= 1 and q >= 1, got n = {n}, q = {q}")]
    BadCodeShape { n: u32, q: u32 },
    #[error("word {index} has {got} symbols, expected {want}")]
    WordLength { index: usize, got: usize, want: u32 },
    #[error("word {index} contains symbol {symbol}, outside 0..{q}")]
    SymbolRange { index: usize, symbol: u32, q: u32 },
    #[error("words {first} and {second} are equal")]
    DuplicateWord { first: usize, second: usize },
    #[error("coalition has no members")]
    EmptyCoalition,
    #[error("member index {member} is outside 0..{len}")]
    MemberRange { member: usize, len: usize },
}

/// A family of distinct w-subsets (blocks) of the point set `0..v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetSystem {
    v: u32,
    w: u32,
    blocks: Vec<Vec<u32>>,
}

/// A set of distinct length-n words over the alphabet `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Code {
    n: u32,
    q: u32,
    words: Vec<Vec<u32>>,
}

impl SetSystem {
    /// Validates and normalizes raw parts into a canonical system.
    pub fn from_parts(v: u32, w: u32, blocks: Vec<Vec<u32>>) -> Result<Self, ModelError> {
        if w < 1 || w > v {
            return Err(ModelError::BadSystemShape { v, w });
        }
        let mut seen: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut normalized = Vec::with_capacity(blocks.len());
        for (index, mut block) in blocks.into_iter().enumerate() {
            if block.len() != w as usize {
                return Err(ModelError::BlockSize { index, got: block.len(), want: w });
            }
            block.sort_unstable();
            for pair in block.windows(2) {
                if pair[0] == pair[1] {
                    return Err(ModelError::RepeatedPoint { index, point: pair[0] });
                }
            }
            if let Some(&point) = block.iter().find(|&&p| p >= v) {
                return Err(ModelError::PointRange { index, point, v });
            }
            if let Some(&first) = seen.get(&block) {
                return Err(ModelError::DuplicateBlock { first, second: index });
            }
            seen.insert(block.clone(), index);
            normalized.push(block);
        }
        normalized.sort_unstable();
        Ok(SetSystem { v, w, blocks: normalized })
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The sub-system holding the chosen blocks. Indices must be strictly
    /// increasing, so canonical block order is preserved.
    pub fn sub_system(&self, indices: &[usize]) -> SetSystem {
        debug_assert!(indices.windows(2).all(|p| p[0] < p[1]));
        SetSystem {
            v: self.v,
            w: self.w,
            blocks: indices.iter().map(|&i| self.blocks[i].clone()).collect(),
        }
    }
}

impl Code {
    /// Validates and normalizes raw parts into a canonical code.
    pub fn from_parts(n: u32, q: u32, words: Vec<Vec<u32>>) -> Result<Self, ModelError> {
        if n < 1 || q < 1 {
            return Err(ModelError::BadCodeShape { n, q });
        }
        let mut seen: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut normalized = Vec::with_capacity(words.len());
        for (index, word) in words.into_iter().enumerate() {
            if word.len() != n as usize {
                return Err(ModelError::WordLength { index, got: word.len(), want: n });
            }
            if let Some(&symbol) = word.iter().find(|&&s| s >= q) {
                return Err(ModelError::SymbolRange { index, symbol, q });
            }
            if let Some(&first) = seen.get(&word) {
                return Err(ModelError::DuplicateWord { first, second: index });
            }
            seen.insert(word.clone(), index);
            normalized.push(word);
        }
        normalized.sort_unstable();
        Ok(Code { n, q, words: normalized })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn words(&self) -> &[Vec<u32>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The sub-code holding the chosen words, given in increasing index order.
    pub fn sub_code(&self, indices: &[usize]) -> Code {
        debug_assert!(indices.windows(2).all(|p| p[0] < p[1]));
        Code {
            n: self.n,
            q: self.q,
            words: indices.iter().map(|&i| self.words[i].clone()).collect(),
        }
    }
}

/// A nonempty set of member indices into a system's blocks or a code's words.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Coalition {
    members: Vec<usize>,
}

impl Coalition {
    pub fn new(members: impl IntoIterator<Item = usize>, universe_len: usize) -> Result<Self, ModelError> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(ModelError::EmptyCoalition);
        }
        if let Some(&member) = members.iter().find(|&&m| m >= universe_len) {
            return Err(ModelError::MemberRange { member, len: universe_len });
        }
        Ok(Coalition { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, member: usize) -> bool {
        self.members.binary_search(&member).is_ok()
    }
}

/// What a coalition can forge: a point set (set systems), a word or the
/// per-coordinate symbol sets (codes), or the plain union of blocks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Descendant {
    PointSet(Vec<u32>),
    Word(Vec<u32>),
    ColumnSets(Vec<Vec<u32>>),
    UnionSet(Vec<u32>),
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
}

/// Parses and normalizes a set system document `{"v":..,"w":..,"blocks":[..]}`.
pub fn parse_set_system(text: &str) -> Result<SetSystem, ModelError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        v: u32,
        w: u32,
        blocks: Vec<Vec<u32>>,
    }
    let raw: Raw = parse_json(text)?;
    SetSystem::from_parts(raw.v, raw.w, raw.blocks)
}

/// Parses and normalizes a code document `{"n":..,"q":..,"words":[..]}`.
pub fn parse_code(text: &str) -> Result<Code, ModelError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        n: u32,
        q: u32,
        words: Vec<Vec<u32>>,
    }
    let raw: Raw = parse_json(text)?;
    Code::from_parts(raw.n, raw.q, raw.words)
}

/// Parses a descendant document, normalizing set-valued kinds.
pub fn parse_descendant(text: &str) -> Result<Descendant, ModelError> {
    let mut d: Descendant = parse_json(text)?;
    match &mut d {
        Descendant::PointSet(points) | Descendant::UnionSet(points) => {
            points.sort_unstable();
            points.dedup();
        }
        Descendant::ColumnSets(columns) => {
            for column in columns {
                column.sort_unstable();
                column.dedup();
            }
        }
        Descendant::Word(_) => {}
    }
    Ok(d)
}

/// Canonical single-line JSON for a set system.
pub fn serialize_set_system(system: &SetSystem) -> String {
    serde_json::to_string(system).expect("set system always serializes")
}

/// Canonical single-line JSON for a code.
pub fn serialize_code(code: &Code) -> String {
    serde_json::to_string(code).expect("code always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_normalizes_and_round_trips() {
        let text = r#"{"v":5,"w":3,"blocks":[[0,1,3],[2,1,0],[0,1,4]]}"#;
        let system = parse_set_system(text).unwrap();
        assert_eq!(system.blocks(), &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]);
        let canonical = serialize_set_system(&system);
        assert_eq!(canonical, r#"{"v":5,"w":3,"blocks":[[0,1,2],[0,1,3],[0,1,4]]}"#);
        let again = parse_set_system(&canonical).unwrap();
        assert_eq!(again, system);
        assert_eq!(serialize_set_system(&again), canonical);
    }

    #[test]
    fn parse_rejects_malformed_systems() {
        assert!(matches!(
            parse_set_system(r#"{"v":4,"w":2,"blocks":[[0,1],[0]]}"#),
            Err(ModelError::BlockSize { index: 1, got: 1, want: 2 })
        ));
        assert!(matches!(
            parse_set_system(r#"{"v":4,"w":2,"blocks":[[0,4]]}"#),
            Err(ModelError::PointRange { index: 0, point: 4, v: 4 })
        ));
        assert!(matches!(
            parse_set_system(r#"{"v":4,"w":2,"blocks":[[1,1]]}"#),
            Err(ModelError::RepeatedPoint { index: 0, point: 1 })
        ));
        assert!(matches!(
            parse_set_system(r#"{"v":4,"w":2,"blocks":[[0,1],[1,0]]}"#),
            Err(ModelError::DuplicateBlock { first: 0, second: 1 })
        ));
        assert!(matches!(
            parse_set_system(r#"{"v":1,"w":2,"blocks":[]}"#),
            Err(ModelError::BadSystemShape { v: 1, w: 2 })
        ));
        // Trailing data and unknown fields are both malformed.
        assert!(parse_set_system(r#"{"v":4,"w":2,"blocks":[]} x"#).is_err());
        assert!(parse_set_system(r#"{"v":4,"w":2,"blocks":[],"extra":1}"#).is_err());
    }

    #[test]
    fn parse_code_normalizes_and_rejects() {
        let code = parse_code(r#"{"n":2,"q":2,"words":[[1,0],[0,0],[0,1]]}"#).unwrap();
        assert_eq!(code.words(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(serialize_code(&code), r#"{"n":2,"q":2,"words":[[0,0],[0,1],[1,0]]}"#);

        assert!(matches!(
            parse_code(r#"{"n":2,"q":2,"words":[[0,2]]}"#),
            Err(ModelError::SymbolRange { index: 0, symbol: 2, q: 2 })
        ));
        assert!(matches!(
            parse_code(r#"{"n":2,"q":2,"words":[[0],[0,1]]}"#),
            Err(ModelError::WordLength { index: 0, got: 1, want: 2 })
        ));
        assert!(matches!(
            parse_code(r#"{"n":2,"q":2,"words":[[0,1],[0,1]]}"#),
            Err(ModelError::DuplicateWord { first: 0, second: 1 })
        ));
        assert!(matches!(
            parse_code(r#"{"n":0,"q":2,"words":[]}"#),
            Err(ModelError::BadCodeShape { n: 0, q: 2 })
        ));
    }

    #[test]
    fn empty_families_are_valid() {
        let system = parse_set_system(r#"{"v":3,"w":2,"blocks":[]}"#).unwrap();
        assert!(system.is_empty());
        let code = parse_code(r#"{"n":1,"q":1,"words":[]}"#).unwrap();
        assert!(code.is_empty());
    }

    #[test]
    fn coalition_sorts_and_checks_range() {
        let c = Coalition::new([2, 0, 2], 3).unwrap();
        assert_eq!(c.members(), &[0, 2]);
        assert_eq!(c.size(), 2);
        assert!(c.contains(2) && !c.contains(1));
        assert!(matches!(Coalition::new([], 3), Err(ModelError::EmptyCoalition)));
        assert!(matches!(Coalition::new([3], 3), Err(ModelError::MemberRange { member: 3, len: 3 })));
    }

    #[test]
    fn descendant_documents_round_trip() {
        let d = parse_descendant(r#"{"kind":"point_set","value":[2,1]}"#).unwrap();
        assert_eq!(d, Descendant::PointSet(vec![1, 2]));
        let d = parse_descendant(r#"{"kind":"column_sets","value":[[1,0],[1,2]]}"#).unwrap();
        assert_eq!(d, Descendant::ColumnSets(vec![vec![0, 1], vec![1, 2]]));
        let d = parse_descendant(r#"{"kind":"word","value":[1,0]}"#).unwrap();
        assert_eq!(d, Descendant::Word(vec![1, 0]));
        let text = serde_json::to_string(&Descendant::UnionSet(vec![0, 3])).unwrap();
        assert_eq!(text, r#"{"kind":"union_set","value":[0,3]}"#);
    }
}
