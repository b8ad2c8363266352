//! Fixed-width bitsets for point sets and member sets during verification.

/// Bitset over `0..len`. All binary operations require equal `len`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Bitset {
    len: u32,
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(len: u32) -> Self {
        let nwords = (len as usize).div_ceil(64).max(1);
        Bitset { len, words: vec![0; nwords] }
    }

    pub fn from_iter(len: u32, items: impl IntoIterator<Item = u32>) -> Self {
        let mut s = Self::new(len);
        for x in items {
            s.insert(x);
        }
        s
    }

    pub fn insert(&mut self, x: u32) {
        debug_assert!(x < self.len);
        self.words[(x / 64) as usize] |= 1 << (x % 64);
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.len && self.words[(x / 64) as usize] & (1 << (x % 64)) != 0
    }

    pub fn union_with(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len).filter(move |&x| self.contains(x))
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}
