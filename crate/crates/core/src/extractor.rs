//! Randomness extractors as left-regular bipartite graphs.
//!
//! A view with `N = 2^n` left vertices, `M = 2^m` right vertices and left
//! degree `D = 2^d` is a `(K, eps)`-extractor when, for every left set `S` with
//! `|S| >= K`, the distribution of a random edge leaving a uniform element of
//! `S` is within `eps` of uniform on the right part, on every right set `Y`.
//! All distances here are exact rationals.

use std::fs;
use std::ops::ControlFlow;
use std::path::Path;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::exact_log2;
use crate::combinatorics::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::limits::Limits;
use crate::ratio::{self, Rational};
use crate::registry::{Named, Registry};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractorView {
    graph: BipartiteGraph,
    n: u32,
    d: u32,
    m: u32,
    #[serde(rename = "K")]
    k_size: u64,
    #[serde(with = "ratio::as_text")]
    eps: Rational,
}

impl ExtractorView {
    /// Reads `n`, `d` and `m` off the graph: `2^n` left vertices, all of degree
    /// `2^d`, and `2^m` right vertices.
    pub fn from_graph(graph: BipartiteGraph, k_size: u64, eps: Rational) -> Result<Self> {
        let n = graph.n();
        if graph.left_count() as u128 != 1u128 << n {
            return Err(Error::domain(format!(
                "extractor needs exactly 2^n = {} left vertices, found {}",
                1u128 << n,
                graph.left_count()
            )));
        }
        let m = exact_log2(graph.right_size() as u128)
            .ok_or_else(|| Error::domain("right part size must be a power of two"))?;
        let degree = graph.adjacency().first().map_or(0, Vec::len);
        if graph.adjacency().iter().any(|l| l.len() != degree) {
            return Err(Error::domain("extractor graphs need equal left degrees"));
        }
        let d = exact_log2(degree as u128).ok_or_else(|| Error::domain("left degree must be a power of two"))?;
        if k_size < 1 || k_size as u128 > 1u128 << n {
            return Err(Error::domain(format!("need 1 <= K <= N, got K = {k_size}")));
        }
        if eps <= Rational::zero() || eps >= Rational::from_integer(1) {
            return Err(Error::domain("need 0 < eps < 1"));
        }
        Ok(ExtractorView {
            graph,
            n,
            d,
            m,
            k_size,
            eps,
        })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn left_count(&self) -> usize {
        self.graph.left_count()
    }

    pub fn degree(&self) -> usize {
        1 << self.d
    }

    pub fn right_size(&self) -> usize {
        1 << self.m
    }

    /// The set-size threshold `K`.
    pub fn k_size(&self) -> u64 {
        self.k_size
    }

    pub fn eps(&self) -> Rational {
        self.eps
    }

    pub fn with_k_size(mut self, k_size: u64) -> Result<Self> {
        if k_size < 1 || k_size as u128 > 1u128 << self.n {
            return Err(Error::domain(format!("need 1 <= K <= N, got K = {k_size}")));
        }
        self.k_size = k_size;
        Ok(self)
    }

    fn check_set(&self, set: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.left_count()];
        for &x in set {
            if x >= self.left_count() {
                return Err(Error::OutOfRange {
                    index: x,
                    size: self.left_count(),
                });
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::domain(format!("left vertex {x} repeated in set")));
            }
        }
        Ok(())
    }

    /// Edge endpoints of `set` per right vertex, with multiplicity.
    pub fn edge_counts(&self, set: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.right_size()];
        self.fill_counts(set, &mut counts);
        counts
    }

    fn fill_counts(&self, set: &[usize], counts: &mut [u64]) {
        counts.iter_mut().for_each(|c| *c = 0);
        for &x in set {
            for &r in &self.graph.adjacency()[x] {
                counts[r] += 1;
            }
        }
    }

    /// Numerator over the common denominator `D * |S| * M`.
    fn excess(&self, counts: &[u64], set_len: usize) -> i128 {
        let mass = (self.degree() * set_len) as i128;
        let big_m = self.right_size() as i128;
        counts.iter().map(|&e| (e as i128 * big_m - mass).max(0)).sum()
    }

    fn denominator(&self, set_len: usize) -> i128 {
        (self.degree() * set_len * self.right_size()) as i128
    }
}

/// File form of a view: the graph plus the two thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewSpec {
    #[serde(rename = "K")]
    pub k_size: u64,
    #[serde(with = "ratio::as_text")]
    pub eps: Rational,
    pub graph: BipartiteGraph,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ViewFile {
    One(ViewSpec),
    Many(Vec<ViewSpec>),
}

impl ExtractorView {
    pub fn spec(&self) -> ViewSpec {
        ViewSpec {
            k_size: self.k_size,
            eps: self.eps,
            graph: self.graph.clone(),
        }
    }

    pub fn from_spec(spec: ViewSpec) -> Result<Self> {
        spec.graph.validate().map_err(Error::InvalidGraph)?;
        Self::from_graph(spec.graph, spec.k_size, spec.eps)
    }
}

/// Parses one view object or an array of them (a layer stack).
pub fn views_from_json_str(text: &str) -> Result<Vec<ExtractorView>> {
    let specs = match serde_json::from_str(text).map_err(Error::from_json)? {
        ViewFile::One(spec) => vec![spec],
        ViewFile::Many(specs) => specs,
    };
    specs.into_iter().map(ExtractorView::from_spec).collect()
}

pub fn load_views(path: impl AsRef<Path>) -> Result<Vec<ExtractorView>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    views_from_json_str(&text)
}

pub fn views_to_json(views: &[ExtractorView]) -> String {
    let specs: Vec<ViewSpec> = views.iter().map(ExtractorView::spec).collect();
    let mut text = if specs.len() == 1 {
        serde_json::to_string_pretty(&specs[0])
    } else {
        serde_json::to_string_pretty(&specs)
    }
    .expect("views serialize");
    text.push('\n');
    text
}

fn to_rational(num: i128, den: i128) -> Result<Rational> {
    let g = num_integer::gcd(num, den).max(1);
    let (num, den) = (num / g, den / g);
    match (i64::try_from(num), i64::try_from(den)) {
        (Ok(a), Ok(b)) => Ok(Rational::new(a, b)),
        _ => Err(Error::domain("deviation does not fit a 64-bit rational")),
    }
}

/// Largest `|#E(S,Y) / (D |S|) - |Y| / M|` over all right sets `Y`.
///
/// The maximum is attained by `Y = {y : p_y > 1/M}`, which gives the total
/// variation distance `sum_y max(0, p_y - 1/M)` between the edge-endpoint
/// distribution `p` of `S` and the uniform distribution. The deficit side
/// is the same quantity on the complement of `Y`.
pub fn deviation(view: &ExtractorView, set: &[usize]) -> Result<Rational> {
    if set.is_empty() {
        return Err(Error::domain("deviation of an empty set"));
    }
    view.check_set(set)?;
    let counts = view.edge_counts(set);
    to_rational(view.excess(&counts, set.len()), view.denominator(set.len()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExtractorVerdict {
    Ok,
    Witness {
        set: Vec<usize>,
        #[serde(with = "ratio::as_text")]
        deviation: Rational,
    },
    /// Sampling found nothing; this is not a proof.
    NoCounterexampleFound {
        samples: u64,
    },
}

impl ExtractorVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ExtractorVerdict::Ok)
    }

    pub fn is_witness(&self) -> bool {
        matches!(self, ExtractorVerdict::Witness { .. })
    }
}

/// Decides the extractor property on sets of size exactly `K`. Larger sets
/// follow because the uniform distribution on a larger set averages the
/// uniform distributions on its `K`-subsets.
pub trait ExtractorVerifier: Named + Send + Sync {
    fn verify(&self, view: &ExtractorView, limits: &Limits) -> Result<ExtractorVerdict>;
}

/// Every `K`-subset, in lexicographic order; the first failing set is the
/// witness.
pub struct ExhaustiveVerifier;

impl Named for ExhaustiveVerifier {
    fn name(&self) -> &'static str {
        "exhaustive"
    }
}

impl ExtractorVerifier for ExhaustiveVerifier {
    fn verify(&self, view: &ExtractorView, limits: &Limits) -> Result<ExtractorVerdict> {
        let size = view.k_size as usize;
        Limits::guard(
            "extractor subsets",
            binomial(view.left_count() as u128, size as u128),
            limits.subsets,
        )?;
        let den = view.denominator(size);
        let (eps_num, eps_den) = (*view.eps.numer() as i128, *view.eps.denom() as i128);
        let mut counts = vec![0u64; view.right_size()];
        let hit = for_each_combination(view.left_count(), size, |set| {
            view.fill_counts(set, &mut counts);
            let num = view.excess(&counts, size);
            // num / den < eps_num / eps_den
            if num * eps_den < eps_num * den {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break((set.to_vec(), num))
            }
        });
        match hit {
            None => Ok(ExtractorVerdict::Ok),
            Some((set, num)) => Ok(ExtractorVerdict::Witness {
                set,
                deviation: to_rational(num, den)?,
            }),
        }
    }
}

/// Uniformly random `K`-subsets from a seeded stream. Never reports `Ok`.
pub struct SampledVerifier {
    pub samples: u64,
    pub seed: u64,
}

impl Named for SampledVerifier {
    fn name(&self) -> &'static str {
        "sampled"
    }
}

impl ExtractorVerifier for SampledVerifier {
    fn verify(&self, view: &ExtractorView, _limits: &Limits) -> Result<ExtractorVerdict> {
        let mut rng = SplitMix64::new(self.seed);
        let size = view.k_size as usize;
        for _ in 0..self.samples {
            let set = rng.subset(view.left_count(), size);
            let dev = deviation(view, &set)?;
            if dev >= view.eps {
                return Ok(ExtractorVerdict::Witness { set, deviation: dev });
            }
        }
        Ok(ExtractorVerdict::NoCounterexampleFound { samples: self.samples })
    }
}

pub fn extractor_verifiers(samples: u64, seed: u64) -> Registry<dyn ExtractorVerifier> {
    Registry::<dyn ExtractorVerifier>::new("extractor verifier")
        .with(Box::new(ExhaustiveVerifier))
        .with(Box::new(SampledVerifier { samples, seed }))
}

/// Exhaustive check over all `K`-subsets.
pub fn is_extractor(view: &ExtractorView, limits: &Limits) -> Result<ExtractorVerdict> {
    ExhaustiveVerifier.verify(view, limits)
}

/// Keeps the high `m - i` bits of every edge endpoint. The threshold becomes
/// `ceil(K / 2^i)`; epsilon is unchanged.
pub fn truncate(view: &ExtractorView, i: u32) -> Result<ExtractorView> {
    if i > view.m {
        return Err(Error::domain(format!(
            "cannot truncate {i} bits of an m = {} output",
            view.m
        )));
    }
    let neighbors = view
        .graph
        .adjacency()
        .iter()
        .map(|l| l.iter().map(|&r| r >> i).collect())
        .collect();
    let graph = BipartiteGraph::new_unchecked(view.n, view.right_size() >> i, view.degree(), neighbors);
    let k_size = view.k_size.div_ceil(1 << i).max(1);
    Ok(ExtractorView {
        graph,
        n: view.n,
        d: view.d,
        m: view.m - i,
        k_size,
        eps: view.eps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelVerdict {
    pub level: u32,
    #[serde(rename = "K")]
    pub k_size: u64,
    pub verdict: ExtractorVerdict,
}

/// Checks that truncating `i` bits leaves a `(2^(k-i), eps)`-extractor for
/// every `0 <= i <= k`. Stops at the first failing level.
pub fn is_prefix_extractor(
    view: &ExtractorView,
    k: u32,
    verifier: &dyn ExtractorVerifier,
    limits: &Limits,
) -> Result<Vec<LevelVerdict>> {
    if k > view.m || k > view.n {
        return Err(Error::domain(format!(
            "prefix depth k = {k} exceeds m = {} or n = {}",
            view.m, view.n
        )));
    }
    let mut levels = Vec::new();
    for i in 0..=k {
        let level = truncate(view, i)?.with_k_size(1 << (k - i))?;
        let verdict = verifier.verify(&level, limits)?;
        let failed = verdict.is_witness();
        levels.push(LevelVerdict {
            level: i,
            k_size: 1 << (k - i),
            verdict,
        });
        if failed {
            break;
        }
    }
    Ok(levels)
}

pub fn prefix_verdict_ok(levels: &[LevelVerdict]) -> bool {
    levels.iter().all(|l| l.verdict.is_ok())
}

/// Bad right vertices and (weakly) dangerous left vertices of a set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HazardReport {
    pub set: Vec<usize>,
    /// Right vertices with more than `threshold` edge endpoints in the set.
    pub bad: Vec<usize>,
    /// Members whose edges all land in `bad`, in set order.
    pub dangerous: Vec<usize>,
    /// Members with at least half their edges in `bad`, in set order.
    pub weakly_dangerous: Vec<usize>,
    #[serde(with = "ratio::as_text")]
    pub threshold: Rational,
    #[serde(with = "ratio::as_text")]
    pub bad_factor: Rational,
}

pub fn default_bad_factor() -> Rational {
    Rational::from_integer(2)
}

/// Classifies `set` (of size at most `K`) with threshold
/// `bad_factor * D * K / M`, counting edges with multiplicity.
pub fn hazard_report(view: &ExtractorView, set: &[usize], bad_factor: Rational) -> Result<HazardReport> {
    if set.len() as u64 > view.k_size {
        return Err(Error::domain(format!(
            "|S| = {} exceeds K = {}",
            set.len(),
            view.k_size
        )));
    }
    if bad_factor <= Rational::zero() {
        return Err(Error::domain("bad factor must be positive"));
    }
    view.check_set(set)?;
    let threshold = bad_factor * Rational::new((view.degree() as u64 * view.k_size) as i64, view.right_size() as i64);
    let counts = view.edge_counts(set);
    let is_bad: Vec<bool> = counts
        .iter()
        .map(|&e| Rational::from_integer(e as i64) > threshold)
        .collect();
    let bad = (0..counts.len()).filter(|&y| is_bad[y]).collect();
    let bad_edges = |x: usize| view.graph.adjacency()[x].iter().filter(|&&r| is_bad[r]).count();
    let dangerous = set.iter().copied().filter(|&x| bad_edges(x) == view.degree()).collect();
    let weakly_dangerous = set
        .iter()
        .copied()
        .filter(|&x| 2 * bad_edges(x) >= view.degree())
        .collect();
    Ok(HazardReport {
        set: set.to_vec(),
        bad,
        dangerous,
        weakly_dangerous,
        threshold,
        bad_factor,
    })
}

/// Outcome of classifying every `K`-subset of a view.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HazardSweep {
    pub sets: u64,
    pub sets_with_bad: u64,
    pub max_bad: usize,
    pub max_dangerous: usize,
    pub max_weakly_dangerous: usize,
    /// Sets with `|dangerous| >= 2 eps K`.
    pub dangerous_violations: u64,
    /// Sets with `|weakly dangerous| > 4 eps K`.
    pub weak_violations: u64,
    /// Sets whose bad fraction `|bad| / M` is not below `eps`.
    pub bad_fraction_violations: u64,
}

impl HazardSweep {
    pub fn clean(&self) -> bool {
        self.dangerous_violations == 0 && self.weak_violations == 0 && self.bad_fraction_violations == 0
    }
}

pub fn hazard_sweep(view: &ExtractorView, bad_factor: Rational, limits: &Limits) -> Result<HazardSweep> {
    let size = view.k_size as usize;
    Limits::guard(
        "hazard subsets",
        binomial(view.left_count() as u128, size as u128),
        limits.subsets,
    )?;
    let eps_k = view.eps * Rational::from_integer(view.k_size as i64);
    let mut sweep = HazardSweep::default();
    let mut failure = None;
    for_each_combination(view.left_count(), size, |set| {
        match hazard_report(view, set, bad_factor) {
            Ok(h) => {
                sweep.sets += 1;
                sweep.sets_with_bad += u64::from(!h.bad.is_empty());
                sweep.max_bad = sweep.max_bad.max(h.bad.len());
                sweep.max_dangerous = sweep.max_dangerous.max(h.dangerous.len());
                sweep.max_weakly_dangerous = sweep.max_weakly_dangerous.max(h.weakly_dangerous.len());
                let count = |v: usize| Rational::from_integer(v as i64);
                sweep.dangerous_violations += u64::from(count(h.dangerous.len()) >= Rational::from_integer(2) * eps_k);
                sweep.weak_violations += u64::from(count(h.weakly_dangerous.len()) > Rational::from_integer(4) * eps_k);
                sweep.bad_fraction_violations +=
                    u64::from(Rational::new(h.bad.len() as i64, view.right_size() as i64) >= view.eps);
                ControlFlow::Continue(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(sweep),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeChoice {
    /// `ceil(max{(M/K) ln 2 / eps^2, (ln(N/K) + 1) / eps^2})`.
    pub raw: u64,
    /// Smallest power of two not below `raw`.
    pub power_of_two: u64,
    pub log2: u32,
}

/// Left degree sufficient for a random `(K, eps)`-extractor to exist.
pub fn optimal_degree(big_n: u64, k_size: u64, big_m: u64, eps: Rational) -> Result<DegreeChoice> {
    if !(1 < k_size && k_size <= big_n) {
        return Err(Error::domain("need 1 < K <= N"));
    }
    if big_m == 0 {
        return Err(Error::domain("need M > 0"));
    }
    if eps <= Rational::zero() || eps >= Rational::from_integer(1) {
        return Err(Error::domain("need 0 < eps < 1"));
    }
    let e = ratio::to_f64(&eps);
    let inv = 1.0 / (e * e);
    let by_output = big_m as f64 / k_size as f64 * std::f64::consts::LN_2 * inv;
    let by_input = inv * ((big_n as f64 / k_size as f64).ln() + 1.0);
    let raw = by_output.max(by_input).ceil();
    let raw = raw
        .to_u64()
        .ok_or_else(|| Error::domain("degree does not fit 64 bits"))?;
    let power_of_two = raw.max(1).next_power_of_two();
    Ok(DegreeChoice {
        raw,
        power_of_two,
        log2: power_of_two.trailing_zeros(),
    })
}

/// `ln C(n, k)` by summing logarithms of the product form.
fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Union bound on the probability that a random graph is not a prefix
/// extractor: `sum_{i=0}^{k} C(N, K/2^i) 2^(M/2^i) exp(-2 eps^2 K D / 2^i)`
/// with `K = 2^k`, evaluated term by term in log space.
pub fn prefix_failure_bound(n: u32, k: u32, m: u32, d: u32, eps: Rational) -> Result<f64> {
    if n == 0 || n > 62 || m > 62 || d > 62 {
        return Err(Error::domain("need 1 <= n <= 62 and m, d <= 62"));
    }
    if k > n || k > m {
        return Err(Error::domain("need k <= n and k <= m"));
    }
    if eps <= Rational::zero() {
        return Err(Error::domain("need eps > 0"));
    }
    let (big_n, big_k, big_m, big_d) = (1u64 << n, 1u64 << k, 1u64 << m, 1u64 << d);
    let e = ratio::to_f64(&eps);
    let sum = (0..=k)
        .map(|i| {
            let scale = (1u64 << i) as f64;
            let ln_term = ln_binomial(big_n, big_k >> i) + (big_m >> i) as f64 * std::f64::consts::LN_2
                - 2.0 * e * e * big_k as f64 * big_d as f64 / scale;
            ln_term.exp()
        })
        .sum();
    Ok(sum)
}

/// Smallest `d <= max_d` at which [`prefix_failure_bound`] drops below 1.
pub fn minimal_prefix_degree(n: u32, k: u32, m: u32, eps: Rational, max_d: u32) -> Result<Option<u32>> {
    for d in 0..=max_d.min(62) {
        if prefix_failure_bound(n, k, m, d, eps)? < 1.0 {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Parameters for a seeded search over random left-regular graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchParams {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub d: u32,
    #[serde(with = "ratio::as_text")]
    pub eps: Rational,
}

impl SearchParams {
    pub fn new(n: u32, k: u32, m: u32, d: u32, eps: Rational) -> Result<Self> {
        if k > n {
            return Err(Error::domain("need k <= n"));
        }
        if n > 24 || m > 30 || d > 20 {
            return Err(Error::domain(
                "parameters beyond desk scale (n <= 24, m <= 30, d <= 20)",
            ));
        }
        Ok(SearchParams { n, k, m, d, eps })
    }
}

/// One random view: every left vertex gets `2^d` independent uniform
/// endpoints in `0..2^m`.
pub fn random_view(p: SearchParams, rng: &mut SplitMix64, limits: &Limits) -> Result<ExtractorView> {
    let left = 1usize << p.n;
    let right = 1usize << p.m;
    let degree = 1usize << p.d;
    Limits::guard("generated left part", left as u128, limits.generated_left as u128)?;
    Limits::guard("generated right part", right as u128, limits.generated_right as u128)?;
    let neighbors = (0..left)
        .map(|_| (0..degree).map(|_| rng.index(right)).collect())
        .collect();
    let graph = BipartiteGraph::new(p.n, right, degree, neighbors)?;
    ExtractorView::from_graph(graph, 1 << p.k, p.eps)
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub view: ExtractorView,
    pub attempts: u64,
}

/// Redraws random views from one seeded stream until one verifies
/// exhaustively (as an extractor, or as a prefix extractor of depth `k`).
pub fn random_extractor_search(
    p: SearchParams,
    seed: u64,
    max_attempts: u64,
    prefix: bool,
    limits: &Limits,
) -> Result<SearchResult> {
    if prefix && p.k > p.m {
        return Err(Error::domain("prefix search needs k <= m"));
    }
    let mut rng = SplitMix64::new(seed);
    for attempt in 1..=max_attempts {
        let view = random_view(p, &mut rng, limits)?;
        let ok = if prefix {
            prefix_verdict_ok(&is_prefix_extractor(&view, p.k, &ExhaustiveVerifier, limits)?)
        } else {
            is_extractor(&view, limits)?.is_ok()
        };
        if ok {
            return Ok(SearchResult {
                view,
                attempts: attempt,
            });
        }
    }
    Err(Error::AttemptsExhausted { attempts: max_attempts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    /// Each left vertex hits every right vertex `reps` times.
    fn uniform_view(n: u32, m: u32, reps: usize, k_size: u64, eps: Rational) -> ExtractorView {
        let row: Vec<usize> = (0..reps).flat_map(|_| 0..1usize << m).collect();
        let g = BipartiteGraph::new(n, 1 << m, row.len(), vec![row; 1 << n]).unwrap();
        ExtractorView::from_graph(g, k_size, eps).unwrap()
    }

    fn point_mass_view(eps: Rational) -> ExtractorView {
        let g = BipartiteGraph::new(0, 2, 2, vec![vec![0, 0]]).unwrap();
        ExtractorView::from_graph(g, 1, eps).unwrap()
    }

    #[test]
    fn uniform_view_has_zero_deviation() {
        let v = uniform_view(2, 2, 2, 2, r(1, 4));
        assert_eq!(deviation(&v, &[0, 3]).unwrap(), Rational::zero());
        assert_eq!(is_extractor(&v, &Limits::default()).unwrap(), ExtractorVerdict::Ok);
    }

    #[test]
    fn point_mass_deviation() {
        let v = point_mass_view(r(1, 4));
        assert_eq!(deviation(&v, &[0]).unwrap(), r(1, 2));
        assert_eq!(
            is_extractor(&v, &Limits::default()).unwrap(),
            ExtractorVerdict::Witness {
                set: vec![0],
                deviation: r(1, 2)
            }
        );
    }

    #[test]
    fn deviation_input_errors() {
        let v = uniform_view(2, 1, 1, 2, r(1, 4));
        assert!(deviation(&v, &[]).is_err());
        assert!(deviation(&v, &[1, 1]).is_err());
        assert!(deviation(&v, &[4]).is_err());
    }

    #[test]
    fn view_shape_checks() {
        let odd_right = BipartiteGraph::new(1, 3, 1, vec![vec![0], vec![1]]).unwrap();
        assert!(ExtractorView::from_graph(odd_right, 1, r(1, 2)).is_err());
        let ragged = BipartiteGraph::new(1, 2, 2, vec![vec![0], vec![1, 0]]).unwrap();
        assert!(ExtractorView::from_graph(ragged, 1, r(1, 2)).is_err());
        let short = BipartiteGraph::new(2, 2, 1, vec![vec![0], vec![1]]).unwrap();
        assert!(ExtractorView::from_graph(short, 1, r(1, 2)).is_err());
        let ok = BipartiteGraph::new(1, 2, 1, vec![vec![0], vec![1]]).unwrap();
        assert!(ExtractorView::from_graph(ok.clone(), 3, r(1, 2)).is_err());
        assert!(ExtractorView::from_graph(ok, 1, r(1, 1)).is_err());
    }

    #[test]
    fn sampled_never_says_ok() {
        let v = uniform_view(3, 1, 1, 2, r(1, 4));
        let verdict = SampledVerifier { samples: 50, seed: 1 }
            .verify(&v, &Limits::default())
            .unwrap();
        assert_eq!(verdict, ExtractorVerdict::NoCounterexampleFound { samples: 50 });
        let verdict = SampledVerifier { samples: 5, seed: 1 }
            .verify(&point_mass_view(r(1, 4)), &Limits::default())
            .unwrap();
        assert!(verdict.is_witness());
    }

    #[test]
    fn registry_lookup() {
        let reg = extractor_verifiers(10, 1);
        assert_eq!(reg.names(), vec!["exhaustive", "sampled"]);
        assert!(reg.get("fourier").is_err());
    }

    #[test]
    fn hazards_on_uniform_view() {
        let v = uniform_view(2, 2, 1, 2, r(1, 4));
        let h = hazard_report(&v, &[0, 1], default_bad_factor()).unwrap();
        assert!(h.bad.is_empty() && h.dangerous.is_empty() && h.weakly_dangerous.is_empty());
        assert!(hazard_report(&v, &[0, 1, 2], default_bad_factor()).is_err());
    }

    #[test]
    fn bad_threshold_is_strict() {
        // threshold 2 * 2 * 1 / 2 = 2, and y0 carries exactly 2 endpoints
        let h = hazard_report(&point_mass_view(r(1, 4)), &[0], default_bad_factor()).unwrap();
        assert_eq!(h.threshold, Rational::from_integer(2));
        assert!(h.bad.is_empty());
        // halving the factor makes y0 bad and the vertex dangerous
        let h = hazard_report(&point_mass_view(r(1, 4)), &[0], Rational::from_integer(1)).unwrap();
        assert_eq!(h.bad, vec![0]);
        assert_eq!(h.dangerous, vec![0]);
        assert_eq!(h.weakly_dangerous, vec![0]);
    }

    #[test]
    fn weakly_dangerous_counts_half() {
        // left 0: edges 0,0,0,1 ; left 1: edges 2,3,2,3 ; K = 2, M = 4, D = 4
        let g = BipartiteGraph::new(1, 4, 4, vec![vec![0, 0, 0, 1], vec![2, 3, 2, 3]]).unwrap();
        let v = ExtractorView::from_graph(g, 2, r(1, 2)).unwrap();
        // threshold 1 * 4 * 2 / 4 = 2: y0 (3 endpoints) is bad
        let h = hazard_report(&v, &[0, 1], Rational::from_integer(1)).unwrap();
        assert_eq!(h.bad, vec![0]);
        assert!(h.dangerous.is_empty());
        assert_eq!(h.weakly_dangerous, vec![0]);
    }

    #[test]
    fn truncation() {
        let v = uniform_view(2, 3, 1, 4, r(1, 4));
        assert_eq!(truncate(&v, 0).unwrap(), v);
        let t = truncate(&v, 3).unwrap();
        assert_eq!(t.right_size(), 1);
        assert!(t.graph().adjacency().iter().flatten().all(|&r| r == 0));
        assert_eq!(deviation(&t, &[0, 1]).unwrap(), Rational::zero());
        assert!(truncate(&v, 4).is_err());

        let g = BipartiteGraph::new(0, 8, 1, vec![vec![6]]).unwrap();
        let v = ExtractorView::from_graph(g, 1, r(1, 2)).unwrap();
        assert_eq!(truncate(&v, 1).unwrap().graph().adjacency()[0], vec![3]);
    }

    #[test]
    fn uniform_prefix_extractor() {
        let v = uniform_view(3, 2, 1, 4, r(1, 4));
        let levels = is_prefix_extractor(&v, 2, &ExhaustiveVerifier, &Limits::default()).unwrap();
        assert_eq!(levels.len(), 3);
        assert!(prefix_verdict_ok(&levels));
        assert_eq!(levels.iter().map(|l| l.k_size).collect::<Vec<_>>(), vec![4, 2, 1]);
    }

    #[test]
    fn prefix_failure_reported_at_level_zero() {
        let g = BipartiteGraph::new(1, 2, 2, vec![vec![0, 0], vec![0, 0]]).unwrap();
        let v = ExtractorView::from_graph(g, 2, r(1, 4)).unwrap();
        let levels = is_prefix_extractor(&v, 1, &ExhaustiveVerifier, &Limits::default()).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].level, 0);
        assert!(levels[0].verdict.is_witness());
    }

    #[test]
    fn degree_formula() {
        let d = optimal_degree(16, 16, 16, r(1, 2)).unwrap();
        assert_eq!((d.raw, d.power_of_two), (4, 4));
        assert_eq!(optimal_degree(16, 4, 16, r(1, 2)).unwrap().raw, 12);
        assert_eq!(optimal_degree(16, 4, 16, r(1, 2)).unwrap().power_of_two, 16);
        assert_eq!(optimal_degree(16, 16, 16, r(1, 4)).unwrap().raw, 16);
        assert_eq!(optimal_degree(8, 2, 2, r(1, 2)).unwrap().raw, 10);
        assert!(optimal_degree(16, 1, 16, r(1, 2)).is_err());
        assert!(optimal_degree(16, 32, 16, r(1, 2)).is_err());
        assert!(optimal_degree(16, 4, 0, r(1, 2)).is_err());
        assert!(optimal_degree(16, 4, 16, r(0, 1)).is_err());
    }

    #[test]
    fn prefix_bound_single_level() {
        // k = 0: C(N, 1) * 2^M * exp(-2 eps^2 D)
        let b = prefix_failure_bound(3, 0, 2, 4, r(1, 2)).unwrap();
        let expect = 8.0 * 16.0 * (-2.0f64 * 0.25 * 16.0).exp();
        assert!((b / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prefix_bound_minimal_degree() {
        // sweep for n = 8, k = 3, m = 3, eps = 1/4: the bound first drops
        // below 1 at d = 6 (0.18648...), independently evaluated
        let b = |d| prefix_failure_bound(8, 3, 3, d, r(1, 4)).unwrap();
        assert!(b(5) > 1.0);
        assert!(b(6) < 1.0);
        assert!((b(6) / 0.1864848755611279 - 1.0).abs() < 1e-9);
        for d in 1..12 {
            assert!(b(d + 1) < b(d));
        }
        assert!(prefix_failure_bound(3, 3, 2, 1, r(1, 4)).is_err());
        assert_eq!(minimal_prefix_degree(8, 3, 3, r(1, 4), 20).unwrap(), Some(6));
        assert_eq!(minimal_prefix_degree(8, 3, 3, r(1, 4), 5).unwrap(), None);
    }

    #[test]
    fn view_file_roundtrip() {
        let one = vec![uniform_view(2, 1, 2, 2, r(1, 4))];
        assert_eq!(views_from_json_str(&views_to_json(&one)).unwrap(), one);
        let two = vec![one[0].clone(), point_mass_view(r(1, 2))];
        assert_eq!(views_from_json_str(&views_to_json(&two)).unwrap(), two);
        let bad = r#"{"K": 1, "eps": "1/2", "graph": {"n": 0, "right_size": 2, "max_degree": 1, "neighbors": [[2]]}}"#;
        assert!(matches!(views_from_json_str(bad), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn search_is_deterministic() {
        let p = SearchParams::new(3, 1, 1, 4, r(1, 2)).unwrap();
        let a = random_extractor_search(p, 7, 20, false, &Limits::default()).unwrap();
        let b = random_extractor_search(p, 7, 20, false, &Limits::default()).unwrap();
        assert_eq!(a.view, b.view);
        assert_eq!(a.attempts, b.attempts);
        assert!(a.attempts <= 5);
        assert!(is_extractor(&a.view, &Limits::default()).unwrap().is_ok());
    }
}
