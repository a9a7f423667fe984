//! Small helpers for bitstrings written as `'0'`/`'1'` text, most significant
//! bit first.

use crate::error::{Error, Result};

pub fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::domain(format!("`{other}` is not a bit"))),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Reads `bits` as an unsigned integer, first bit most significant.
pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Writes the low `width` bits of `value`, most significant first.
pub fn index_to_bits(value: usize, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Smallest `b` with `2^b >= x` (0 for `x <= 1`).
pub fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// `log2(x)` when `x` is a power of two.
pub fn exact_log2(x: u128) -> Option<u32> {
    x.is_power_of_two().then(|| x.trailing_zeros())
}
