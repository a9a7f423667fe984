//! Lexicographic subset enumeration and exact counting.

use std::ops::ControlFlow;

/// Calls `visit` on every `size`-subset of `0..universe` in lexicographic
/// order, stopping early when it returns `Break`.
pub fn for_each_combination<B>(
    universe: usize,
    size: usize,
    mut visit: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> Option<B> {
    if size > universe {
        return None;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if let ControlFlow::Break(b) = visit(&idx) {
            return Some(b);
        }
        // rightmost position that can still advance
        let mut i = size;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] < universe - size + i {
                break;
            }
            if i == 0 {
                return None;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}
