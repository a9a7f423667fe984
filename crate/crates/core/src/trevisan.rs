//! Ingredients of the Trevisan function `TR(u, y) = û(y|S_1) ... û(y|S_m)`:
//! weak designs, the Hadamard code with brute-force list decoding, and
//! coordinate restriction. Coordinates of the seed `y` are numbered `1..=d`.

use std::fs;
use std::ops::ControlFlow;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_index, index_to_bits};
use crate::combinatorics::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::extractor::ExtractorView;
use crate::graph::BipartiteGraph;
use crate::limits::Limits;
use crate::ratio::{self, Rational};
use crate::rng::SplitMix64;

/// Sets `S_1..S_m`, each a `block_size`-subset of `{1..d}`, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakDesign {
    pub d: usize,
    pub block_size: usize,
    pub sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DesignVerdict {
    Ok,
    /// Set `i` (1-based) is not a `block_size`-subset of `{1..d}`.
    BadSet {
        i: usize,
        reason: String,
    },
    /// `sum_{j<i} 2^|S_i ∩ S_j|` exceeds `m - 1` at set `i` (1-based).
    Witness {
        i: usize,
        sum: u128,
        bound: u128,
    },
}

impl DesignVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, DesignVerdict::Ok)
    }
}

impl WeakDesign {
    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from_json)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

fn partial_sum(candidate: &[usize], earlier: &[Vec<usize>]) -> u128 {
    earlier
        .iter()
        .map(|s| 1u128 << intersection_size(candidate, s).min(127))
        .fold(0u128, u128::saturating_add)
}

/// Checks set shapes and the partial-sum inequality, in order of `i`.
pub fn verify_weak_design(w: &WeakDesign) -> DesignVerdict {
    for (idx, set) in w.sets.iter().enumerate() {
        let i = idx + 1;
        if set.len() != w.block_size {
            return DesignVerdict::BadSet {
                i,
                reason: format!("{} coordinates, expected {}", set.len(), w.block_size),
            };
        }
        if let Some(&c) = set.iter().find(|&&c| c == 0 || c > w.d) {
            return DesignVerdict::BadSet {
                i,
                reason: format!("coordinate {c} outside 1..={}", w.d),
            };
        }
        if set.windows(2).any(|p| p[0] >= p[1]) {
            return DesignVerdict::BadSet {
                i,
                reason: "coordinates must be strictly ascending".into(),
            };
        }
    }
    let bound = w.m().saturating_sub(1) as u128;
    for i in 1..w.m() {
        let sum = partial_sum(&w.sets[i], &w.sets[..i]);
        if sum > bound {
            return DesignVerdict::Witness { i: i + 1, sum, bound };
        }
    }
    DesignVerdict::Ok
}

/// Candidate pools up to this size are enumerated in full, larger ones sampled.
const CANDIDATES: usize = 4096;

/// Randomized greedy: each `S_i` is the candidate with the smallest partial
/// sum, ties going to the earlier candidate in a seeded shuffle. A run that
/// cannot place some set restarts with fresh randomness. Running out of
/// restarts means `d` is too small.
pub fn greedy_weak_design(block_size: usize, m: usize, d: usize, seed: u64, restarts: u32) -> Result<WeakDesign> {
    if block_size == 0 || block_size > d {
        return Err(Error::domain(format!(
            "need 1 <= block size <= d, got {block_size} and {d}"
        )));
    }
    if m == 0 {
        return Err(Error::domain("need m >= 1"));
    }
    if d > 4096 || m > 1 << 16 {
        return Err(Error::domain("design beyond desk scale (d <= 4096, m <= 65536)"));
    }
    let mut rng = SplitMix64::new(seed);
    let enumerate = binomial(d as u128, block_size as u128) <= CANDIDATES as u128;
    let bound = (m - 1) as u128;
    for _ in 0..=restarts {
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(m);
        let mut failed = false;
        for _ in 0..m {
            let pool = candidate_pool(d, block_size, enumerate, &mut rng);
            let best = pool
                .into_iter()
                .map(|c| (partial_sum(&c, &sets), c))
                .min_by_key(|(sum, _)| *sum)
                .expect("pool is never empty");
            if best.0 > bound {
                failed = true;
                break;
            }
            sets.push(best.1);
        }
        if !failed {
            return Ok(WeakDesign { d, block_size, sets });
        }
    }
    Err(Error::AttemptsExhausted {
        attempts: u64::from(restarts) + 1,
    })
}

fn candidate_pool(d: usize, block_size: usize, enumerate: bool, rng: &mut SplitMix64) -> Vec<Vec<usize>> {
    let mut pool = Vec::new();
    if enumerate {
        for_each_combination(d, block_size, |c| {
            pool.push(c.iter().map(|x| x + 1).collect());
            ControlFlow::<()>::Continue(())
        });
        rng.shuffle(&mut pool);
    } else {
        for _ in 0..CANDIDATES {
            pool.push(rng.subset(d, block_size).into_iter().map(|x| x + 1).collect());
        }
    }
    pool
}

/// Hadamard code: `n_msg`-bit messages, `2^n_msg`-bit codewords, decoding
/// radius `1/2 + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CodeTable {
    pub n_msg: u32,
    #[serde(with = "ratio::as_text")]
    pub delta: Rational,
}

impl CodeTable {
    pub fn new(n_msg: u32, delta: Rational) -> Result<Self> {
        if n_msg > 20 {
            return Err(Error::domain("message length beyond desk scale (n_msg <= 20)"));
        }
        if delta <= Rational::zero() || delta > Rational::new(1, 4) {
            return Err(Error::domain("need 0 < delta <= 1/4"));
        }
        Ok(CodeTable { n_msg, delta })
    }

    pub fn codeword_length(&self) -> usize {
        1 << self.n_msg
    }

    /// Bit `a` of the codeword is `<u, a> mod 2`, with `a` read MSB first.
    pub fn encode(&self, u: &[bool]) -> Result<Vec<bool>> {
        self.check_len("message", u.len(), self.n_msg as usize)?;
        let u = bits_to_index(u);
        Ok(self.encode_index(u))
    }

    fn encode_index(&self, u: usize) -> Vec<bool> {
        (0..self.codeword_length()).map(|a| hadamard_bit(u, a)).collect()
    }

    /// Every message whose codeword agrees with `word` on at least
    /// `(1/2 + delta) * n̄` positions, in message order.
    pub fn list_decode(&self, word: &[bool]) -> Result<Vec<Vec<bool>>> {
        self.check_len("word", word.len(), self.codeword_length())?;
        let (num, den) = (*self.delta.numer() as i128, *self.delta.denom() as i128);
        let len = self.codeword_length() as i128;
        Ok((0..self.codeword_length())
            .filter(|&u| {
                let agree = word
                    .iter()
                    .enumerate()
                    .filter(|&(a, &b)| hadamard_bit(u, a) == b)
                    .count() as i128;
                2 * agree * den >= (den + 2 * num) * len
            })
            .map(|u| index_to_bits(u, self.n_msg as usize))
            .collect())
    }

    fn check_len(&self, what: &str, got: usize, want: usize) -> Result<()> {
        if got == want {
            Ok(())
        } else {
            Err(Error::domain(format!("{what} has {got} bits, expected {want}")))
        }
    }
}

fn hadamard_bit(u: usize, a: usize) -> bool {
    (u & a).count_ones() % 2 == 1
}

/// Bits of `y` at the 1-based coordinates of `set`, in ascending order.
pub fn restrict(y: &[bool], set: &[usize]) -> Result<Vec<bool>> {
    let mut coords = set.to_vec();
    coords.sort_unstable();
    coords
        .into_iter()
        .map(|c| {
            if c == 0 || c > y.len() {
                Err(Error::domain(format!("coordinate {c} outside 1..={}", y.len())))
            } else {
                Ok(y[c - 1])
            }
        })
        .collect()
}

fn check_pair(code: &CodeTable, design: &WeakDesign) -> Result<()> {
    if design.block_size != code.n_msg as usize {
        return Err(Error::domain(format!(
            "design block size {} differs from log2 of the codeword length {}",
            design.block_size, code.n_msg
        )));
    }
    match verify_weak_design(design) {
        DesignVerdict::BadSet { i, reason } => Err(Error::domain(format!("design set {i}: {reason}"))),
        _ => Ok(()),
    }
}

/// `m` output bits; bit `i` is the codeword of `u` read at position `y|S_i`.
pub fn trevisan_eval(code: &CodeTable, design: &WeakDesign, u: &[bool], y: &[bool]) -> Result<Vec<bool>> {
    check_pair(code, design)?;
    if y.len() != design.d {
        return Err(Error::domain(format!(
            "seed has {} bits, design needs {}",
            y.len(),
            design.d
        )));
    }
    let codeword = code.encode(u)?;
    design
        .sets
        .iter()
        .map(|s| Ok(codeword[bits_to_index(&restrict(y, s)?)]))
        .collect()
}

/// The function as a bipartite graph: left vertex `u`, one edge per seed `y`
/// (in numeric order) to the output read as an `m`-bit index.
pub fn trevisan_graph(code: &CodeTable, design: &WeakDesign, limits: &Limits) -> Result<BipartiteGraph> {
    check_pair(code, design)?;
    let left = 1usize << code.n_msg;
    Limits::guard("generated left part", left as u128, limits.generated_left as u128)?;
    if design.d > 24 || design.m() > 24 {
        return Err(Error::domain("graph export needs d <= 24 and m <= 24"));
    }
    let right = 1usize << design.m();
    Limits::guard("generated right part", right as u128, limits.generated_right as u128)?;
    Limits::guard("trevisan edges", (left as u128) << design.d, limits.subsets)?;
    let degree = 1usize << design.d;
    let positions: Vec<Vec<usize>> = (0..degree)
        .map(|y| {
            let y = index_to_bits(y, design.d);
            design
                .sets
                .iter()
                .map(|s| bits_to_index(&restrict(&y, s).expect("design checked")))
                .collect()
        })
        .collect();
    let neighbors = (0..left)
        .map(|u| {
            let word = code.encode_index(u);
            positions
                .iter()
                .map(|pos| pos.iter().fold(0, |acc, &p| (acc << 1) | usize::from(word[p])))
                .collect()
        })
        .collect();
    BipartiteGraph::new(code.n_msg, right, degree, neighbors)
}

/// [`trevisan_graph`] wrapped as an extractor view for deviation checks.
pub fn trevisan_view(
    code: &CodeTable,
    design: &WeakDesign,
    k_size: u64,
    eps: Rational,
    limits: &Limits,
) -> Result<ExtractorView> {
    ExtractorView::from_graph(trevisan_graph(code, design, limits)?, k_size, eps)
}
