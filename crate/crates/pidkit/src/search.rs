//! Exhaustive maximum-size search at desk scale: branch and bound over the
//! full candidate universe, pruned through the small-subset criterion.

use crate::combi::binomial_u128;
use crate::fchannel::{is_scheme_direct, u_bound, Channel, FchannelError};
use crate::model::{Code, SetSystem};
use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("need 1 <= w <= v, got w = {w}, v = {v}")]
    BadShape { v: u32, w: u32 },
    #[error("need n >= 1 and q >= 1, got n = {n}, q = {q}")]
    BadCodeShape { n: u32, q: u32 },
    #[error("t must be at least 2, got {t}")]
    BadT { t: u32 },
    #[error("universe holds {candidates} candidates, cap is {cap}")]
    UniverseTooLarge { candidates: u128, cap: u64 },
    #[error("node budget {budget} exhausted during search")]
    BudgetExceeded { budget: u64 },
    #[error("search result failed its maximality certificate, which indicates a bug")]
    VerificationFailed,
    #[error(transparent)]
    Channel(#[from] FchannelError),
}

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;
const UNIVERSE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Candidate evaluations allowed before the search gives up.
    pub node_budget: u64,
    /// Explore only families containing the least candidate. Safe because
    /// relabeling points or symbols preserves the scheme property, so some
    /// maximum family always contains it.
    pub isomorph_rejection: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { node_budget: DEFAULT_NODE_BUDGET, isomorph_rejection: true }
    }
}

/// An exact maximum together with the first witness of that size in
/// lexicographic search order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult<T> {
    pub max_size: usize,
    pub witness: T,
    pub nodes_explored: u64,
}

/// The largest number of blocks any scheme on v points with w-point blocks
/// can have, by exhaustive search over all C(v,w) blocks.
pub fn max_ipps(v: u32, w: u32, t: u32) -> Result<SearchResult<SetSystem>, SearchError> {
    max_ipps_with(v, w, t, SearchOptions::default())
}

pub fn max_ipps_with(
    v: u32,
    w: u32,
    t: u32,
    options: SearchOptions,
) -> Result<SearchResult<SetSystem>, SearchError> {
    if w < 1 || w > v {
        return Err(SearchError::BadShape { v, w });
    }
    let u = u_bound(t).map_err(|_| SearchError::BadT { t })? as usize;
    match binomial_u128(v as u64, w as u64) {
        Some(c) if c <= UNIVERSE_CAP as u128 => {}
        other => {
            let candidates = other.unwrap_or(u128::MAX);
            return Err(SearchError::UniverseTooLarge { candidates, cap: UNIVERSE_CAP });
        }
    }
    let blocks: Vec<Vec<u32>> = (0..v).combinations(w as usize).collect();
    let universe = SetSystem::from_parts(v, w, blocks).expect("all w-subsets form a valid system");
    let channel = Channel::Ipps { w };

    let mut feasible = |chosen: &[usize], candidate: usize| -> Result<bool, SearchError> {
        subsets_with_candidate_hold(chosen, candidate, u, |indices| {
            Ok(is_scheme_direct((&universe.sub_system(indices)).into(), t, channel)?.holds())
        })
    };
    let (best, nodes_explored) = branch_and_bound(universe.len(), options, &mut feasible)?;

    let witness = universe.sub_system(&best);
    if !is_scheme_direct((&witness).into(), t, channel)?.holds() {
        return Err(SearchError::VerificationFailed);
    }
    for b in 0..universe.len() {
        if !best.contains(&b) && feasible(&best, b)? {
            return Err(SearchError::VerificationFailed);
        }
    }
    Ok(SearchResult { max_size: best.len(), witness, nodes_explored })
}

/// The largest t-identifying code size over words of length n on q symbols,
/// by exhaustive search over all q^n words.
pub fn max_mippc(n: u32, q: u32, t: u32) -> Result<SearchResult<Code>, SearchError> {
    max_mippc_with(n, q, t, SearchOptions::default())
}

pub fn max_mippc_with(
    n: u32,
    q: u32,
    t: u32,
    options: SearchOptions,
) -> Result<SearchResult<Code>, SearchError> {
    if n < 1 || q < 1 {
        return Err(SearchError::BadCodeShape { n, q });
    }
    let u = u_bound(t).map_err(|_| SearchError::BadT { t })? as usize;
    let candidates = (q as u128).checked_pow(n).unwrap_or(u128::MAX);
    if candidates > UNIVERSE_CAP as u128 {
        return Err(SearchError::UniverseTooLarge { candidates, cap: UNIVERSE_CAP });
    }
    let words: Vec<Vec<u32>> = (0..n).map(|_| 0..q).multi_cartesian_product().collect();
    let universe = Code::from_parts(n, q, words).expect("all length-n words form a valid code");

    let mut feasible = |chosen: &[usize], candidate: usize| -> Result<bool, SearchError> {
        subsets_with_candidate_hold(chosen, candidate, u, |indices| {
            Ok(is_scheme_direct((&universe.sub_code(indices)).into(), t, Channel::Mippc)?.holds())
        })
    };
    let (best, nodes_explored) = branch_and_bound(universe.len(), options, &mut feasible)?;

    let witness = universe.sub_code(&best);
    if !is_scheme_direct((&witness).into(), t, Channel::Mippc)?.holds() {
        return Err(SearchError::VerificationFailed);
    }
    for b in 0..universe.len() {
        if !best.contains(&b) && feasible(&best, b)? {
            return Err(SearchError::VerificationFailed);
        }
    }
    Ok(SearchResult { max_size: best.len(), witness, nodes_explored })
}

/// Whether every subset of `chosen` plus `candidate` of size at most `u`
/// still verifies. Subsets avoiding the candidate need no recheck: they were
/// verified when their own last member arrived, and the property is closed
/// under taking subfamilies.
fn subsets_with_candidate_hold(
    chosen: &[usize],
    candidate: usize,
    u: usize,
    mut holds: impl FnMut(&[usize]) -> Result<bool, SearchError>,
) -> Result<bool, SearchError> {
    for k in 1..=(u - 1).min(chosen.len()) {
        for others in chosen.iter().copied().combinations(k) {
            let mut indices = others;
            indices.push(candidate);
            indices.sort_unstable();
            if !holds(&indices)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn branch_and_bound(
    len: usize,
    options: SearchOptions,
    feasible: &mut impl FnMut(&[usize], usize) -> Result<bool, SearchError>,
) -> Result<(Vec<usize>, u64), SearchError> {
    let mut best: Vec<usize> = Vec::new();
    let mut nodes: u64 = 0;
    let mut chosen: Vec<usize> = Vec::new();
    let start = if options.isomorph_rejection && len > 0 {
        chosen.push(0);
        1
    } else {
        0
    };
    explore(&mut chosen, start, len, options.node_budget, &mut nodes, &mut best, feasible)?;
    Ok((best, nodes))
}

fn explore(
    chosen: &mut Vec<usize>,
    start: usize,
    len: usize,
    budget: u64,
    nodes: &mut u64,
    best: &mut Vec<usize>,
    feasible: &mut impl FnMut(&[usize], usize) -> Result<bool, SearchError>,
) -> Result<(), SearchError> {
    // Strictly-larger updates keep the first maximum in visit order, which
    // is lexicographic on index sequences.
    if chosen.len() > best.len() {
        *best = chosen.clone();
    }
    for next in start..len {
        // Even taking every remaining candidate cannot beat the incumbent.
        if chosen.len() + (len - next) <= best.len() {
            break;
        }
        if *nodes >= budget {
            return Err(SearchError::BudgetExceeded { budget });
        }
        *nodes += 1;
        if feasible(chosen, next)? {
            chosen.push(next);
            explore(chosen, next + 1, len, budget, nodes, best, feasible)?;
            chosen.pop();
        }
    }
    Ok(())
}
