//! Off-line matchability: maximum matchings, Hall's condition up to a size
//! bound, and random graphs whose Hall property holds with high probability.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::combinatorics::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::limits::Limits;
use crate::registry::{Named, Registry};
use crate::rng::SplitMix64;

/// Parameters of the off-line construction: `2^n` left vertices of degree
/// `n^c`, `2^k * n^c` right vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OfflineParams {
    pub n: u32,
    pub k: u32,
    pub c: u32,
}

impl OfflineParams {
    pub fn new(n: u32, k: u32, c: u32) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::domain(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        if c < 1 {
            return Err(Error::domain("need c >= 1"));
        }
        Ok(OfflineParams { n, k, c })
    }

    pub fn degree(&self) -> Result<usize> {
        (self.n as usize)
            .checked_pow(self.c)
            .ok_or_else(|| Error::domain("n^c overflows"))
    }

    pub fn right_size(&self) -> Result<usize> {
        self.degree()?
            .checked_mul(1usize << self.k)
            .ok_or_else(|| Error::domain("2^k * n^c overflows"))
    }

    /// Number of requests the construction must serve.
    pub fn capacity(&self) -> usize {
        1 << self.k
    }
}

fn check_subset(g: &BipartiteGraph, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; g.left_count()];
    for &x in subset {
        if x >= g.left_count() {
            return Err(Error::OutOfRange {
                index: x,
                size: g.left_count(),
            });
        }
        if std::mem::replace(&mut seen[x], true) {
            return Err(Error::domain(format!("left vertex {x} repeated in subset")));
        }
    }
    Ok(())
}

/// Maximum-cardinality matching between `subset` and the right part.
///
/// Augmenting paths are grown from subset members in the given order, and
/// neighbors are tried in stored order, so the result is deterministic.
pub fn max_matching(g: &BipartiteGraph, subset: &[usize]) -> Result<Vec<(usize, usize)>> {
    check_subset(g, subset)?;
    Ok(kuhn(g, subset))
}

fn kuhn(g: &BipartiteGraph, subset: &[usize]) -> Vec<(usize, usize)> {
    let mut owner: Vec<Option<usize>> = vec![None; g.right_size()];
    let mut visited = vec![false; g.right_size()];
    for &x in subset {
        visited.iter_mut().for_each(|v| *v = false);
        augment(g, x, &mut owner, &mut visited);
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(r, o)| o.map(|l| (l, r)))
        .collect();
    let pos = |l: usize| subset.iter().position(|&x| x == l);
    pairs.sort_by_key(|&(l, _)| pos(l));
    pairs
}

fn augment(g: &BipartiteGraph, x: usize, owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &r in &g.adjacency()[x] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        let free = match owner[r] {
            None => true,
            Some(y) => augment(g, y, owner, visited),
        };
        if free {
            owner[r] = Some(x);
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HallVerdict {
    Ok,
    /// Smallest violating set in (size, lexicographic) order.
    Witness {
        set: Vec<usize>,
        neighborhood: usize,
    },
}

impl HallVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, HallVerdict::Ok)
    }
}

/// A procedure deciding whether every left set of size at most `s_max` has at
/// least as many distinct neighbors as elements.
pub trait HallChecker: Named + Send + Sync {
    fn check(&self, g: &BipartiteGraph, s_max: usize, limits: &Limits) -> Result<HallVerdict>;
}

fn effective_bound(g: &BipartiteGraph, s_max: usize) -> Result<usize> {
    if s_max as u128 > 1u128 << g.n() {
        return Err(Error::domain(format!("s = {s_max} exceeds 2^n = {}", 1u128 << g.n())));
    }
    Ok(s_max.min(g.left_count()))
}

fn neighborhood_size(g: &BipartiteGraph, set: &[usize]) -> usize {
    let mut seen = vec![false; g.right_size()];
    let mut count = 0;
    for &x in set {
        for &r in &g.adjacency()[x] {
            if !std::mem::replace(&mut seen[r], true) {
                count += 1;
            }
        }
    }
    count
}

/// Enumerates every subset up to the size bound and counts its neighborhood
/// with a bitset union.
pub struct ExhaustiveHall;

impl Named for ExhaustiveHall {
    fn name(&self) -> &'static str {
        "exhaustive"
    }
}

impl HallChecker for ExhaustiveHall {
    fn check(&self, g: &BipartiteGraph, s_max: usize, limits: &Limits) -> Result<HallVerdict> {
        let s = effective_bound(g, s_max)?;
        Limits::guard(
            "left part for exhaustive Hall check",
            g.left_count() as u128,
            limits.exhaustive_left as u128,
        )?;
        let total: u128 = (1..=s)
            .map(|t| binomial(g.left_count() as u128, t as u128))
            .fold(0, u128::saturating_add);
        Limits::guard("Hall subsets", total, limits.subsets)?;

        let words = g.right_size().div_ceil(64);
        let masks: Vec<Vec<u64>> = g
            .adjacency()
            .iter()
            .map(|list| {
                let mut m = vec![0u64; words];
                for &r in list {
                    m[r / 64] |= 1 << (r % 64);
                }
                m
            })
            .collect();
        let mut union = vec![0u64; words];
        for t in 1..=s {
            let hit = for_each_combination(g.left_count(), t, |set| {
                union.iter_mut().for_each(|w| *w = 0);
                for &x in set {
                    for (u, m) in union.iter_mut().zip(&masks[x]) {
                        *u |= m;
                    }
                }
                let size = union.iter().map(|w| w.count_ones() as usize).sum::<usize>();
                if size < t {
                    ControlFlow::Break(HallVerdict::Witness {
                        set: set.to_vec(),
                        neighborhood: size,
                    })
                } else {
                    ControlFlow::Continue(())
                }
            });
            if let Some(w) = hit {
                return Ok(w);
            }
        }
        Ok(HallVerdict::Ok)
    }
}

/// Deficiency search through maximum matchings.
///
/// A smallest violator `X` of size `t` has `|N(X)| < t`, so each member has
/// fewer than `t` distinct neighbors; only such vertices are combined, and a
/// candidate set violates Hall exactly when no matching saturates it.
pub struct MatchingHall;

impl Named for MatchingHall {
    fn name(&self) -> &'static str {
        "matching"
    }
}

impl HallChecker for MatchingHall {
    fn check(&self, g: &BipartiteGraph, s_max: usize, limits: &Limits) -> Result<HallVerdict> {
        let s = effective_bound(g, s_max)?;
        let distinct: Vec<usize> = (0..g.left_count()).map(|x| g.distinct_neighbors(x).len()).collect();
        for t in 1..=s {
            let candidates: Vec<usize> = (0..g.left_count()).filter(|&x| distinct[x] < t).collect();
            Limits::guard(
                "Hall candidate subsets",
                binomial(candidates.len() as u128, t as u128),
                limits.subsets,
            )?;
            let hit = for_each_combination(candidates.len(), t, |pick| {
                let set: Vec<usize> = pick.iter().map(|&i| candidates[i]).collect();
                if kuhn(g, &set).len() < t {
                    ControlFlow::Break(set)
                } else {
                    ControlFlow::Continue(())
                }
            });
            if let Some(set) = hit {
                let neighborhood = neighborhood_size(g, &set);
                return Ok(HallVerdict::Witness { set, neighborhood });
            }
        }
        Ok(HallVerdict::Ok)
    }
}

pub fn hall_checkers() -> Registry<dyn HallChecker> {
    Registry::<dyn HallChecker>::new("Hall checker")
        .with(Box::new(ExhaustiveHall))
        .with(Box::new(MatchingHall))
}

/// Exhaustive enumeration for small left parts, matching-based search beyond
/// `limits.exhaustive_left`.
pub fn hall_check(g: &BipartiteGraph, s_max: usize, limits: &Limits) -> Result<HallVerdict> {
    if g.left_count() <= limits.exhaustive_left {
        ExhaustiveHall.check(g, s_max, limits)
    } else {
        MatchingHall.check(g, s_max, limits)
    }
}

/// Draws a graph with each left vertex getting `n^c` independent uniform
/// neighbors (with replacement).
pub fn random_offline_graph(p: OfflineParams, seed: u64, limits: &Limits) -> Result<BipartiteGraph> {
    random_offline_graph_from(p, &mut SplitMix64::new(seed), limits)
}

fn random_offline_graph_from(p: OfflineParams, rng: &mut SplitMix64, limits: &Limits) -> Result<BipartiteGraph> {
    let degree = p.degree()?;
    let right = p.right_size()?;
    let left = 1u128 << p.n;
    Limits::guard("generated left part", left, limits.generated_left as u128)?;
    Limits::guard("generated right part", right as u128, limits.generated_right as u128)?;
    let neighbors = (0..left)
        .map(|_| (0..degree).map(|_| rng.index(right)).collect())
        .collect();
    BipartiteGraph::new(p.n, right, degree, neighbors)
}

/// Union bound on the probability that a random graph violates Hall's
/// condition for some set of size at most `2^k`:
/// `sum_{t=1}^{2^k} base^t` with `base = 2^(n+k) / n^(c (n^c - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesBound {
    pub base: f64,
    pub sum: f64,
}

fn series_domain(n: u32, k: u32, c: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::domain("series bound needs n >= 2"));
    }
    if c < 1 || k > 64 {
        return Err(Error::domain("series bound needs c >= 1 and k <= 64"));
    }
    Ok(())
}

pub fn series_bound(n: u32, k: u32, c: u32) -> Result<SeriesBound> {
    series_domain(n, k, c)?;
    let nf = f64::from(n);
    let nc = nf.powi(c as i32);
    let ln_base = f64::from(n + k) * std::f64::consts::LN_2 - f64::from(c) * (nc - 1.0) * nf.ln();
    let base = ln_base.exp();
    let terms = 1u128 << k;
    let sum = if base == 0.0 {
        0.0
    } else if base == 1.0 {
        terms as f64
    } else if base < 1.0 && (terms as f64) * ln_base < -745.0 {
        // remaining terms vanish in f64
        base / (1.0 - base)
    } else {
        base * (terms as f64 * ln_base).exp_m1() / ln_base.exp_m1()
    };
    Ok(SeriesBound { base, sum })
}

/// Exact rational value of the same series; `(base, sum)`.
pub fn series_bound_exact(n: u32, k: u32, c: u32) -> Result<(BigRational, BigRational)> {
    series_domain(n, k, c)?;
    if k > 16 {
        return Err(Error::domain("exact series limited to k <= 16"));
    }
    let nc = BigInt::from(n).pow(c);
    let exponent = u32::try_from(BigInt::from(c) * (&nc - 1u32))
        .map_err(|_| Error::domain("exponent too large for exact evaluation"))?;
    let num = BigInt::one() << (n + k) as usize;
    let den = BigInt::from(n).pow(exponent);
    let base = BigRational::new(num, den);
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    for _ in 0..(1u64 << k) {
        power *= &base;
        sum += &power;
    }
    Ok((base, sum))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifiedGraph {
    pub graph: BipartiteGraph,
    pub attempts: u64,
}

/// Redraws random graphs from one seeded stream until one passes
/// `hall_check(2^k)`. The first attempt equals `random_offline_graph(p, seed)`.
pub fn construct_verified_offline_graph(
    p: OfflineParams,
    seed: u64,
    max_attempts: u64,
    checker: &dyn HallChecker,
    limits: &Limits,
) -> Result<VerifiedGraph> {
    let mut rng = SplitMix64::new(seed);
    for attempt in 1..=max_attempts {
        let graph = random_offline_graph_from(p, &mut rng, limits)?;
        if checker.check(&graph, p.capacity(), limits)?.is_ok() {
            return Ok(VerifiedGraph {
                graph,
                attempts: attempt,
            });
        }
    }
    Err(Error::AttemptsExhausted { attempts: max_attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::hall_counterexample;
    use num_traits::ToPrimitive;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn complete_graph_saturates() {
        let g = BipartiteGraph::complete(2, 4);
        let m = max_matching(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(m.len(), 4);
        assert!(max_matching(&g, &[]).unwrap().is_empty());
    }

    #[test]
    fn counterexample_pair_matches() {
        let g = hall_counterexample();
        // x takes r1 first, y then displaces it along the augmenting path
        assert_eq!(max_matching(&g, &[0, 1]).unwrap(), vec![(0, 1), (1, 0)]);
        assert_eq!(max_matching(&g, &[0, 1, 2]).unwrap().len(), 2);
    }

    #[test]
    fn subset_errors() {
        let g = hall_counterexample();
        assert!(max_matching(&g, &[0, 0]).is_err());
        assert!(max_matching(&g, &[3]).is_err());
    }

    #[test]
    fn hall_on_complete_graph() {
        let g = BipartiteGraph::complete(2, 4);
        for c in hall_checkers().iter() {
            assert_eq!(c.check(&g, 4, &limits()).unwrap(), HallVerdict::Ok);
        }
    }

    #[test]
    fn isolated_vertex_is_witness() {
        let g = BipartiteGraph::new(2, 3, 2, vec![vec![0, 1], vec![2], vec![], vec![1]]).unwrap();
        for c in hall_checkers().iter() {
            assert_eq!(
                c.check(&g, 1, &limits()).unwrap(),
                HallVerdict::Witness {
                    set: vec![2],
                    neighborhood: 0
                },
                "{}",
                c.name()
            );
        }
    }

    #[test]
    fn counterexample_hall_levels() {
        let g = hall_counterexample();
        for c in hall_checkers().iter() {
            assert!(c.check(&g, 2, &limits()).unwrap().is_ok());
            assert_eq!(
                c.check(&g, 3, &limits()).unwrap(),
                HallVerdict::Witness {
                    set: vec![0, 1, 2],
                    neighborhood: 2
                }
            );
        }
    }

    #[test]
    fn s_above_two_to_the_n_is_rejected() {
        let g = hall_counterexample();
        assert!(hall_check(&g, 5, &limits()).is_err());
    }

    #[test]
    fn exhaustive_guard() {
        let l = Limits {
            exhaustive_left: 2,
            ..Limits::default()
        };
        assert!(matches!(
            ExhaustiveHall.check(&hall_counterexample(), 2, &l),
            Err(Error::LimitExceeded { .. })
        ));
        // matching mode is not bound by the exhaustive ceiling
        assert!(MatchingHall.check(&hall_counterexample(), 2, &l).unwrap().is_ok());
    }

    #[test]
    fn random_graph_shape_and_determinism() {
        let p = OfflineParams::new(2, 1, 2).unwrap();
        let a = random_offline_graph(p, 11, &limits()).unwrap();
        let b = random_offline_graph(p, 11, &limits()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.right_size(), 8);
        assert_eq!(a.left_count(), 4);
        assert!(a.adjacency().iter().all(|l| l.len() == 4));
        assert_ne!(a, random_offline_graph(p, 12, &limits()).unwrap());
    }

    #[test]
    fn params_domain() {
        assert!(OfflineParams::new(2, 0, 2).is_err());
        assert!(OfflineParams::new(2, 3, 2).is_err());
        assert!(OfflineParams::new(2, 1, 0).is_err());
    }

    #[test]
    fn series_examples() {
        let b = series_bound(2, 1, 2).unwrap();
        assert!((b.base - 0.125).abs() < 1e-15);
        assert!((b.sum - 0.140625).abs() < 1e-15);

        let (base, sum) = series_bound_exact(2, 1, 2).unwrap();
        assert_eq!(base, BigRational::new(1.into(), 8.into()));
        assert_eq!(sum, BigRational::new(9.into(), 64.into()));

        let (base, sum) = series_bound_exact(4, 1, 2).unwrap();
        let two55 = BigRational::new(1.into(), BigInt::one() << 55);
        assert_eq!(base, two55);
        assert_eq!(sum, &two55 + &two55 * &two55);
        let f = series_bound(4, 1, 2).unwrap();
        assert!((f.base / 2f64.powi(-55) - 1.0).abs() < 1e-12);

        assert!(series_bound(1, 1, 2).is_err());
    }

    #[test]
    fn float_and_exact_series_agree() {
        for n in 2..=6 {
            for k in 1..=n.min(4) {
                for c in 1..=2 {
                    let f = series_bound(n, k, c).unwrap();
                    let (_, exact) = series_bound_exact(n, k, c).unwrap();
                    let e = exact.to_f64().unwrap();
                    if e == 0.0 || !e.is_finite() {
                        continue;
                    }
                    assert!((f.sum / e - 1.0).abs() < 1e-12, "n={n} k={k} c={c}: {} vs {e}", f.sum);
                }
            }
        }
    }

    #[test]
    fn series_decreases_in_n() {
        for k in 1..=2 {
            let mut prev = series_bound(2.max(k), k, 2).unwrap().sum;
            for n in 3.max(k + 1)..=12 {
                let cur = series_bound(n, k, 2).unwrap().sum;
                assert!(cur < prev, "k={k} n={n}");
                prev = cur;
            }
        }
    }

    #[test]
    fn verified_construction() {
        let checker = ExhaustiveHall;
        let p = OfflineParams::new(2, 1, 2).unwrap();
        let v = construct_verified_offline_graph(p, 5, 50, &checker, &limits()).unwrap();
        assert!(hall_check(&v.graph, 2, &limits()).unwrap().is_ok());
        if v.attempts == 1 {
            assert_eq!(v.graph, random_offline_graph(p, 5, &limits()).unwrap());
        }

        let p = OfflineParams::new(3, 2, 2).unwrap();
        let v = construct_verified_offline_graph(p, 5, 50, &checker, &limits()).unwrap();
        assert!(hall_check(&v.graph, 4, &limits()).unwrap().is_ok());

        assert!(matches!(
            construct_verified_offline_graph(p, 5, 0, &checker, &limits()),
            Err(Error::AttemptsExhausted { attempts: 0 })
        ));
    }
}
