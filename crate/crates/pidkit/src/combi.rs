//! Exact binomial coefficients and lexicographic combination (un)ranking.

use num::BigUint;

/// C(n, k) as an arbitrary-precision integer. Returns 0 when k > n.
pub(crate) fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 1..=k {
        // (acc * (n - k + i)) is divisible by i at every step.
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

/// C(n, k) for arbitrary-precision n and small k. Returns 0 when n < k.
pub(crate) fn big_binomial_big_n(n: &BigUint, k: u64) -> BigUint {
    if *n < BigUint::from(k) {
        return BigUint::ZERO;
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - BigUint::from(i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// C(n, k) in u128, or None on overflow.
pub(crate) fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(acc)
}

/// Sum of C(m, s) over s in 2..=u, saturating at u128::MAX. Estimates the
/// cost of enumerating all subsets of at most u of m items.
pub(crate) fn subset_count_up_to(m: usize, u: u64) -> u128 {
    let mut total: u128 = 0;
    for s in 2..=u.min(m as u64) {
        match binomial_u128(m as u64, s) {
            Some(c) => total = total.saturating_add(c),
            None => return u128::MAX,
        }
    }
    total
}

/// The combination of `w` elements of `0..v` at position `rank` in
/// lexicographic order. `rank` must be below C(v, w).
pub(crate) fn unrank_combination(v: u64, w: u64, mut rank: u128) -> Vec<u32> {
    debug_assert!(rank < binomial_u128(v, w).expect("combination count overflows u128"));
    let mut out = Vec::with_capacity(w as usize);
    let mut remaining = w;
    let mut x = 0u64;
    while remaining > 0 {
        // Combinations whose smallest undecided element is x.
        let with_x = binomial_u128(v - x - 1, remaining - 1).expect("checked by caller");
        if rank < with_x {
            out.push(x as u32);
            remaining -= 1;
        } else {
            rank -= with_x;
        }
        x += 1;
    }
    out
}
