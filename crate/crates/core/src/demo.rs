//! End-to-end checks, one per headline property, each returning a
//! serializable report with a `passed` flag. The CLI `demo` commands and the
//! acceptance suite both run these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::bits::index_to_bits;
use crate::error::{Error, Result};
use crate::extractor::{
    self, deviation, hazard_sweep, is_extractor, minimal_prefix_degree, optimal_degree, prefix_failure_bound,
    random_extractor_search, truncate, ExtractorVerdict, ExtractorView, HazardSweep, SearchParams,
};
use crate::fingerprint::{
    decode_extractor, decode_matching, decode_via_p, decode_via_q, encode_extractor, encode_matching,
    encode_two_conditions, search_layer_stack, shrinkage_audit, EnumeratedSet, Fingerprint,
};
use crate::graph::{hall_counterexample, BipartiteGraph};
use crate::limits::Limits;
use crate::offline::{
    construct_verified_offline_graph, hall_check, random_offline_graph, series_bound, series_bound_exact,
    ExhaustiveHall, HallVerdict, OfflineParams,
};
use crate::online::{online_strategy_exists, sweep_all_sequences, LayeredGraph};
use crate::ratio::{format_rational, Rational};
use crate::rng::SplitMix64;
use crate::trevisan::{greedy_weak_design, verify_weak_design, CodeTable, DesignVerdict};

const MAX_ATTEMPTS: u64 = 1000;

fn seed_for(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index)
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleDemo {
    pub graph: BipartiteGraph,
    pub hall_s2: HallVerdict,
    pub hall_s3: HallVerdict,
    pub online_exists: bool,
    pub passed: bool,
}

/// Hall's condition holds up to size 2 on the 3x2 graph, yet no on-line
/// strategy serves two requests.
pub fn counterexample(limits: &Limits) -> Result<CounterexampleDemo> {
    use crate::offline::HallChecker;
    let graph = hall_counterexample();
    let hall_s2 = ExhaustiveHall.check(&graph, 2, limits)?;
    let hall_s3 = ExhaustiveHall.check(&graph, 3, limits)?;
    let online_exists = online_strategy_exists(&graph, 2, limits)?.exists();
    Ok(CounterexampleDemo {
        passed: hall_s2.is_ok() && !online_exists,
        graph,
        hall_s2,
        hall_s3,
        online_exists,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesDemo {
    pub n: u32,
    pub k: u32,
    pub c: u32,
    pub bound_exact: String,
    pub bound: f64,
    pub trials: u64,
    pub failures: u64,
    pub frequency: f64,
    pub sigma: f64,
    pub ceiling: f64,
    pub passed: bool,
}

/// Hall failure frequency of random graphs against the union bound plus
/// three standard deviations.
pub fn series(n: u32, k: u32, c: u32, trials: u64, seed: u64, limits: &Limits) -> Result<SeriesDemo> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let p = OfflineParams::new(n, k, c)?;
    let bound = series_bound(n, k, c)?.sum;
    let bound_exact = series_bound_exact(n, k, c)?.1;
    let mut failures = 0;
    for i in 0..trials {
        let g = random_offline_graph(p, seed_for(seed, i), limits)?;
        failures += u64::from(!hall_check(&g, p.capacity(), limits)?.is_ok());
    }
    let q = bound.min(1.0);
    let sigma = (q * (1.0 - q) / trials as f64).sqrt();
    let frequency = failures as f64 / trials as f64;
    let ceiling = bound + 3.0 * sigma;
    Ok(SeriesDemo {
        n,
        k,
        c,
        bound_exact: big_ratio_text(&bound_exact),
        bound,
        trials,
        failures,
        frequency,
        sigma,
        ceiling,
        passed: frequency <= ceiling,
    })
}

fn big_ratio_text(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OmCase {
    pub n: u32,
    pub k: u32,
    pub c: u32,
    pub seed: u64,
    pub attempts: u64,
    pub sequences: u64,
    pub rejected_runs: u64,
    pub audit_violations: u64,
    pub first_failure: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OmDemo {
    pub cases: Vec<OmCase>,
    pub passed: bool,
}

/// For each `n` and `1 <= k <= n`, layers `bases` Hall-verified random bases
/// and runs every request sequence of at most `2^k` distinct vertices.
pub fn online_matching(ns: &[u32], c: u32, bases: u64, seed: u64, limits: &Limits) -> Result<OmDemo> {
    let mut cases = Vec::new();
    let mut index = 0;
    for &n in ns {
        for k in 1..=n {
            for _ in 0..bases {
                let case_seed = seed_for(seed, index);
                index += 1;
                let p = OfflineParams::new(n, k, c)?;
                let base = construct_verified_offline_graph(p, case_seed, MAX_ATTEMPTS, &ExhaustiveHall, limits)?;
                let lg = LayeredGraph::new(base.graph, k, &ExhaustiveHall, limits)?;
                let sweep = sweep_all_sequences(&lg, p.capacity(), limits)?;
                cases.push(OmCase {
                    n,
                    k,
                    c,
                    seed: case_seed,
                    attempts: base.attempts,
                    sequences: sweep.sequences,
                    rejected_runs: sweep.rejected_runs,
                    audit_violations: sweep.audit_violations,
                    first_failure: sweep.first_failure,
                });
            }
        }
    }
    let passed = cases.iter().all(|c| c.rejected_runs == 0 && c.audit_violations == 0);
    Ok(OmDemo { cases, passed })
}

/// `max_Y |E(S,Y) / (D |S|) - |Y| / M|` by enumerating all `2^M` right sets.
pub fn deviation_by_enumeration(view: &ExtractorView, set: &[usize]) -> Rational {
    let big_m = view.right_size();
    let total = (view.degree() * set.len()) as i64;
    let mut best = Rational::zero();
    for mask in 0u64..1 << big_m {
        let hits: i64 = set
            .iter()
            .flat_map(|&x| view.graph().adjacency()[x].iter())
            .filter(|&&r| mask >> r & 1 == 1)
            .count() as i64;
        let gap = Rational::new(hits, total) - Rational::new(i64::from(mask.count_ones()), big_m as i64);
        best = best.max(if gap < Rational::zero() { -gap } else { gap });
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationMismatch {
    pub view: ExtractorView,
    pub set: Vec<usize>,
    pub formula: String,
    pub enumeration: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationDemo {
    pub cases: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<DeviationMismatch>,
    pub passed: bool,
}

/// Random views with `N <= 8`, `M <= 4`, `D <= 8` and random nonempty sets:
/// the closed-form deviation against enumeration over all right sets.
pub fn deviation_oracle(cases: u64, seed: u64, limits: &Limits) -> Result<DeviationDemo> {
    let mut rng = SplitMix64::new(seed);
    let mut mismatches = 0;
    let mut first_mismatch = None;
    for _ in 0..cases {
        let n = 1 + rng.below(3) as u32;
        let m = rng.below(3) as u32;
        let d = rng.below(4) as u32;
        let p = SearchParams::new(n, 0, m, d, Rational::new(1, 2))?;
        let view = extractor::random_view(p, &mut rng, limits)?;
        let size = 1 + rng.index(view.left_count());
        let set = rng.subset(view.left_count(), size);
        let formula = deviation(&view, &set)?;
        let enumeration = deviation_by_enumeration(&view, &set);
        if formula != enumeration {
            mismatches += 1;
            first_mismatch.get_or_insert(DeviationMismatch {
                view,
                set,
                formula: format_rational(&formula),
                enumeration: format_rational(&enumeration),
            });
        }
    }
    Ok(DeviationDemo {
        cases,
        mismatches,
        first_mismatch,
        passed: mismatches == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HazardCase {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub d: u32,
    pub eps: String,
    pub seed: u64,
    pub attempts: u64,
    pub sweep: HazardSweep,
}

#[derive(Debug, Clone, Serialize)]
pub struct HazardDemo {
    pub cases: Vec<HazardCase>,
    pub views: usize,
    pub sets: u64,
    pub dangerous_violations: u64,
    pub weak_violations: u64,
    /// Every set has fewer than `2 eps K` dangerous elements.
    pub dangerous_passed: bool,
    /// Every set has at most `4 eps K` weakly dangerous elements.
    pub weak_passed: bool,
}

/// One grid point: `n`, `k` (so `K = 2^k`) and epsilon. The view uses
/// `m = k` and the sufficient degree from [`optimal_degree`].
pub type HazardPoint = (u32, u32, Rational);

/// Classifies every `K`-subset of `views_per_point` exhaustively verified
/// random extractors per grid point.
pub fn hazards(grid: &[HazardPoint], views_per_point: u64, seed: u64, limits: &Limits) -> Result<HazardDemo> {
    let mut cases = Vec::new();
    let mut index = 0;
    for &(n, k, eps) in grid {
        let m = k;
        let d = optimal_degree(1 << n, 1 << k, 1 << m, eps)?.log2;
        let p = SearchParams::new(n, k, m, d, eps)?;
        for _ in 0..views_per_point {
            let view_seed = seed_for(seed, index);
            index += 1;
            let found = random_extractor_search(p, view_seed, MAX_ATTEMPTS, false, limits)?;
            let sweep = hazard_sweep(&found.view, extractor::default_bad_factor(), limits)?;
            cases.push(HazardCase {
                n,
                k,
                m,
                d,
                eps: format_rational(&eps),
                seed: view_seed,
                attempts: found.attempts,
                sweep,
            });
        }
    }
    let dangerous_violations = cases.iter().map(|c| c.sweep.dangerous_violations).sum();
    let weak_violations = cases.iter().map(|c| c.sweep.weak_violations).sum();
    Ok(HazardDemo {
        views: cases.len(),
        sets: cases.iter().map(|c| c.sweep.sets).sum(),
        dangerous_violations,
        weak_violations,
        dangerous_passed: dangerous_violations == 0 && !cases.is_empty(),
        weak_passed: weak_violations == 0 && !cases.is_empty(),
        cases,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    pub level: u32,
    #[serde(rename = "K")]
    pub k_size: u64,
    pub verdict: ExtractorVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrefixDemo {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub d: u32,
    pub eps: String,
    pub seed: u64,
    pub attempts: u64,
    pub levels: Vec<LevelCheck>,
    /// `(d', bound)` for `d' = d, d + 1, d + 2`.
    pub bounds: Vec<(u32, f64)>,
    pub finite: bool,
    pub decreasing: bool,
    pub passed: bool,
}

/// Searches a prefix extractor, re-verifies every truncation level on its
/// own, and evaluates the failure bound around the chosen degree. Without
/// `d`, the smallest degree whose bound is below 1 is used.
pub fn prefix(n: u32, k: u32, m: u32, eps: Rational, d: Option<u32>, seed: u64, limits: &Limits) -> Result<PrefixDemo> {
    let d = match d {
        Some(d) => d,
        None => minimal_prefix_degree(n, k, m, eps, 20)?
            .ok_or_else(|| Error::domain("failure bound stays above 1 for d <= 20"))?,
    };
    let p = SearchParams::new(n, k, m, d, eps)?;
    let found = random_extractor_search(p, seed, MAX_ATTEMPTS, true, limits)?;
    let mut levels = Vec::new();
    for i in 0..=k {
        let k_size = 1u64 << (k - i);
        let view = truncate(&found.view, i)?.with_k_size(k_size)?;
        levels.push(LevelCheck {
            level: i,
            k_size,
            verdict: is_extractor(&view, limits)?,
        });
    }
    let bounds = (d..=d + 2)
        .map(|dd| Ok((dd, prefix_failure_bound(n, k, m, dd, eps)?)))
        .collect::<Result<Vec<_>>>()?;
    let finite = bounds.iter().all(|(_, b)| b.is_finite());
    let decreasing = bounds.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(PrefixDemo {
        n,
        k,
        m,
        d,
        eps: format_rational(&eps),
        seed,
        attempts: found.attempts,
        passed: finite && decreasing && levels.iter().all(|l| l.verdict.is_ok()),
        levels,
        bounds,
        finite,
        decreasing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignCase {
    pub block_size: usize,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    pub verdict: DesignVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodeCheck {
    pub n_msg: u32,
    pub delta: String,
    pub words: u64,
    pub exhaustive: bool,
    pub mismatches: u64,
    pub max_list: usize,
    pub list_bound: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrevisanDemo {
    pub designs: Vec<DesignCase>,
    pub decoding: Vec<DecodeCheck>,
    pub passed: bool,
}

/// `(block_size, m, d)` points at which the greedy construction is run. With
/// the partial-sum bound fixed at `m - 1`, the last set must miss all the
/// others, so `d` grows roughly like `block_size * m`.
pub const DESIGN_GRID: &[(usize, usize, usize)] = &[
    (1, 1, 1),
    (1, 4, 4),
    (2, 3, 6),
    (2, 4, 8),
    (2, 8, 16),
    (3, 4, 12),
    (3, 6, 18),
    (4, 3, 12),
    (4, 6, 25),
    (5, 4, 22),
];

/// Messages whose codeword agrees with `word` on at least `(1/2 + delta)`
/// of the positions, from bitwise inner products.
fn decode_by_agreement(codewords: &[Vec<bool>], delta: Rational, word: &[bool]) -> Vec<Vec<bool>> {
    let n_msg = codewords.len().trailing_zeros() as usize;
    let need = (Rational::new(1, 2) + delta) * Rational::from_integer(word.len() as i64);
    codewords
        .iter()
        .enumerate()
        .filter(|(_, c)| Rational::from_integer(c.iter().zip(word).filter(|(x, y)| x == y).count() as i64) >= need)
        .map(|(u, _)| index_to_bits(u, n_msg))
        .collect()
}

/// Codewords built from bitwise inner products of message and position.
fn inner_product_codewords(n_msg: u32) -> Vec<Vec<bool>> {
    let width = n_msg as usize;
    (0..1usize << n_msg)
        .map(|u| {
            let u_bits = index_to_bits(u, width);
            (0..1usize << n_msg)
                .map(|a| {
                    let a_bits = index_to_bits(a, width);
                    u_bits.iter().zip(&a_bits).filter(|(x, y)| **x && **y).count() % 2 == 1
                })
                .collect()
        })
        .collect()
}

/// Greedy designs on [`DESIGN_GRID`], then Hadamard list decoding against
/// agreement counting: every word for `n_msg = 2`, `random_words` words for
/// `n_msg = 4`.
pub fn trevisan(random_words: u64, seed: u64) -> Result<TrevisanDemo> {
    let mut designs = Vec::new();
    for (i, &(l, m, d)) in DESIGN_GRID.iter().enumerate() {
        let s = seed_for(seed, i as u64);
        let verdict = match greedy_weak_design(l, m, d, s, 50) {
            Ok(w) => verify_weak_design(&w),
            Err(Error::AttemptsExhausted { .. }) => DesignVerdict::BadSet {
                i: 0,
                reason: "construction infeasible".into(),
            },
            Err(e) => return Err(e),
        };
        designs.push(DesignCase {
            block_size: l,
            m,
            d,
            seed: s,
            verdict,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut decoding = Vec::new();
    for (n_msg, exhaustive) in [(2u32, true), (4, false)] {
        let codewords = inner_product_codewords(n_msg);
        for delta in [Rational::new(1, 4), Rational::new(1, 8)] {
            let code = CodeTable::new(n_msg, delta)?;
            let len = code.codeword_length();
            let words: Vec<usize> = if exhaustive {
                (0..1usize << len).collect()
            } else {
                (0..random_words).map(|_| rng.below(1u64 << len) as usize).collect()
            };
            let list_bound = (Rational::from_integer(1) / (Rational::from_integer(4) * delta * delta)).to_integer();
            let mut check = DecodeCheck {
                n_msg,
                delta: format_rational(&delta),
                words: words.len() as u64,
                exhaustive,
                mismatches: 0,
                max_list: 0,
                list_bound,
            };
            for w in words {
                let word = index_to_bits(w, len);
                let list = code.list_decode(&word)?;
                check.mismatches += u64::from(list != decode_by_agreement(&codewords, delta, &word));
                check.max_list = check.max_list.max(list.len());
            }
            decoding.push(check);
        }
    }
    let passed = designs.iter().all(|d| d.verdict.is_ok())
        && decoding
            .iter()
            .all(|c| c.mismatches == 0 && c.max_list as i64 <= c.list_bound);
    Ok(TrevisanDemo {
        designs,
        decoding,
        passed,
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RoundtripStats {
    pub sets: u64,
    pub encodes: u64,
    pub failures: u64,
    pub bound_violations: u64,
    pub collisions: u64,
    pub shrinkage_violations: u64,
    pub max_layers_used: usize,
    pub first_failure: Option<String>,
}

impl RoundtripStats {
    fn fail(&mut self, what: String) {
        self.failures += 1;
        self.first_failure.get_or_insert(what);
    }

    pub fn clean(&self) -> bool {
        self.failures == 0 && self.bound_violations == 0 && self.collisions == 0 && self.shrinkage_violations == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchFlavor {
    pub n: u32,
    pub k: u32,
    pub c: u32,
    pub exhaustive: bool,
    pub base_attempts: u64,
    pub stats: RoundtripStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtFlavor {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub d: u32,
    pub eps: String,
    pub thresholds: Vec<u64>,
    pub attempts: Vec<u64>,
    pub exhaustive: bool,
    pub stats: RoundtripStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct MuchnikDemo {
    pub matching: Vec<MatchFlavor>,
    pub extractor: Vec<ExtFlavor>,
    pub passed: bool,
}

/// Every ordered sequence of distinct elements of `0..universe` with length
/// `1..=max_len`.
fn all_sequences(universe: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(seq) = stack.pop() {
        if !seq.is_empty() {
            out.push(seq.clone());
        }
        if seq.len() < max_len {
            for x in (0..universe).rev().filter(|x| !seq.contains(x)) {
                let mut next = seq.clone();
                next.push(x);
                stack.push(next);
            }
        }
    }
    out
}

fn random_sequence(rng: &mut SplitMix64, universe: usize, max_len: usize) -> Vec<usize> {
    let len = 1 + rng.index(max_len.min(universe));
    let mut seq = rng.subset(universe, len);
    rng.shuffle(&mut seq);
    seq
}

fn matching_roundtrips(g: &LayeredGraph, sequences: &[Vec<usize>], stats: &mut RoundtripStats) -> Result<()> {
    for seq in sequences {
        let set = EnumeratedSet::new("S", g.k(), seq.clone())?;
        stats.sets += 1;
        let mut seen = Vec::new();
        for &a in seq {
            stats.encodes += 1;
            let fp = match encode_matching(g, &set, a) {
                Ok(fp) => fp,
                Err(e) => {
                    stats.fail(format!("encode {a} in {seq:?}: {e}"));
                    continue;
                }
            };
            stats.bound_violations += u64::from(!fp.within_bounds());
            if let Fingerprint::Match { p, .. } = fp {
                stats.collisions += u64::from(seen.contains(&p));
                seen.push(p);
            }
            match decode_matching(g, &set, &fp) {
                Ok(x) if x == a => {}
                other => stats.fail(format!("decode {a} in {seq:?}: {other:?}")),
            }
        }
    }
    Ok(())
}

fn extractor_roundtrips(views: &[ExtractorView], sequences: &[Vec<usize>], stats: &mut RoundtripStats) -> Result<()> {
    let bf = extractor::default_bad_factor();
    let k = views[0].k_size().trailing_zeros();
    for seq in sequences {
        let set = EnumeratedSet::new("S", k, seq.clone())?;
        stats.sets += 1;
        let audit = shrinkage_audit(views, &set, bf)?;
        stats.shrinkage_violations += u64::from(!audit.clean());
        stats.max_layers_used = stats.max_layers_used.max(audit.layers_used.unwrap_or(usize::MAX));
        for &a in seq {
            stats.encodes += 1;
            let fp = match encode_extractor(views, &set, a, bf) {
                Ok(fp) => fp,
                Err(e) => {
                    stats.fail(format!("encode {a} in {seq:?}: {e}"));
                    continue;
                }
            };
            stats.bound_violations += u64::from(!fp.within_bounds());
            match decode_extractor(views, &set, &fp, bf) {
                Ok(x) if x == a => {}
                other => stats.fail(format!("decode {a} in {seq:?}: {other:?}")),
            }
        }
    }
    Ok(())
}

/// Matching flavor on `(n, k) = (2, 1)` over every set and order, and on
/// `(3, 2)` over `random_sets` random ordered sets; extractor flavor over
/// verified layer stacks, exhaustively for `n = 2` and on random ordered sets
/// for `n = 3`.
pub fn muchnik(random_sets: u64, seed: u64, limits: &Limits) -> Result<MuchnikDemo> {
    let mut rng = SplitMix64::new(seed);
    let mut matching = Vec::new();
    for (n, k, exhaustive) in [(2u32, 1u32, true), (3, 2, false)] {
        let p = OfflineParams::new(n, k, 1)?;
        let base =
            construct_verified_offline_graph(p, seed_for(seed, u64::from(n)), MAX_ATTEMPTS, &ExhaustiveHall, limits)?;
        let g = LayeredGraph::new(base.graph, k, &ExhaustiveHall, limits)?;
        let sequences = if exhaustive {
            all_sequences(1 << n, 1 << k)
        } else {
            (0..random_sets)
                .map(|_| random_sequence(&mut rng, 1 << n, 1 << k))
                .collect()
        };
        let mut stats = RoundtripStats::default();
        matching_roundtrips(&g, &sequences, &mut stats)?;
        matching.push(MatchFlavor {
            n,
            k,
            c: 1,
            exhaustive,
            base_attempts: base.attempts,
            stats,
        });
    }
    let mut extractor_runs = Vec::new();
    for (n, k, exhaustive) in [(2u32, 1u32, true), (3, 2, false)] {
        let eps = Rational::new(1, 4);
        let m = k;
        let d = optimal_degree(1 << n, 2, 1 << m, eps)?.log2;
        let stack = search_layer_stack(
            SearchParams::new(n, k, m, d, eps)?,
            seed_for(seed, 10 + u64::from(n)),
            MAX_ATTEMPTS,
            limits,
        )?;
        let sequences = if exhaustive {
            all_sequences(1 << n, 1 << k)
        } else {
            (0..random_sets)
                .map(|_| random_sequence(&mut rng, 1 << n, 1 << k))
                .collect()
        };
        let mut stats = RoundtripStats::default();
        extractor_roundtrips(&stack.views, &sequences, &mut stats)?;
        extractor_runs.push(ExtFlavor {
            n,
            k,
            m,
            d,
            eps: format_rational(&eps),
            thresholds: stack.views.iter().map(ExtractorView::k_size).collect(),
            attempts: stack.attempts,
            exhaustive,
            stats,
        });
    }
    let passed = matching.iter().all(|f| f.stats.clean()) && extractor_runs.iter().all(|f| f.stats.clean());
    Ok(MuchnikDemo {
        matching,
        extractor: extractor_runs,
        passed,
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TwoCondStats {
    pub pairs: u64,
    pub encodes: u64,
    /// Targets skipped because they are weakly dangerous for one of the sets.
    pub skipped: u64,
    pub failures: u64,
    pub prefix_violations: u64,
    pub bound_violations: u64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoCondDemo {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub d: u32,
    pub eps: String,
    pub attempts: u64,
    pub exhaustive: bool,
    pub stats: TwoCondStats,
    pub passed: bool,
}

/// Pairs `(S_b, S_c)` with a shared element: every pair when `n <= 2`,
/// otherwise `random_pairs` random ones.
fn set_pairs(n: u32, k: u32, random_pairs: u64, rng: &mut SplitMix64) -> Result<Vec<(EnumeratedSet, EnumeratedSet)>> {
    let universe = 1usize << n;
    let mut out = Vec::new();
    if n <= 2 {
        let bs = all_sequences(universe, 1 << k);
        for l in 0..=k {
            for sc in all_sequences(universe, 1 << l) {
                for sb in &bs {
                    if sb.iter().any(|x| sc.contains(x)) {
                        out.push((
                            EnumeratedSet::new("b", k, sb.clone())?,
                            EnumeratedSet::new("c", l, sc.clone())?,
                        ));
                    }
                }
            }
        }
    } else {
        for _ in 0..random_pairs {
            let sb = random_sequence(rng, universe, 1 << k);
            let l = rng.below(u64::from(k) + 1) as u32;
            let shared = sb[rng.index(sb.len())];
            let extra = rng.index(1 << l);
            let mut others: Vec<usize> = (0..universe).filter(|&x| x != shared).collect();
            rng.shuffle(&mut others);
            let mut sc: Vec<usize> = std::iter::once(shared).chain(others.into_iter().take(extra)).collect();
            rng.shuffle(&mut sc);
            out.push((EnumeratedSet::new("b", k, sb)?, EnumeratedSet::new("c", l, sc)?));
        }
    }
    Ok(out)
}

/// Searches a prefix extractor with `m = k` at the smallest degree whose
/// failure bound is below 1, then checks both decoders on every target
/// that is not weakly dangerous for either set.
pub fn two_conditions(
    n: u32,
    k: u32,
    eps: Rational,
    random_pairs: u64,
    seed: u64,
    limits: &Limits,
) -> Result<TwoCondDemo> {
    let m = k;
    let d = minimal_prefix_degree(n, k, m, eps, 20)?
        .ok_or_else(|| Error::domain("failure bound stays above 1 for d <= 20"))?;
    let found = random_extractor_search(SearchParams::new(n, k, m, d, eps)?, seed, MAX_ATTEMPTS, true, limits)?;
    let pview = found.view;
    let bf = extractor::default_bad_factor();
    let mut rng = SplitMix64::new(seed ^ 0x5EED);
    let mut stats = TwoCondStats::default();
    for (sb, sc) in set_pairs(n, k, random_pairs, &mut rng)? {
        stats.pairs += 1;
        let qview = truncate(&pview, k - sc.k)?.with_k_size(1 << sc.k)?;
        let hb = extractor::hazard_report(&pview, &sb.elements, bf)?;
        let hc = extractor::hazard_report(&qview, &sc.elements, bf)?;
        for &a in sb.elements.iter().filter(|a| sc.contains(**a)) {
            if hb.weakly_dangerous.contains(&a) || hc.weakly_dangerous.contains(&a) {
                stats.skipped += 1;
                continue;
            }
            stats.encodes += 1;
            let mut fail = |what: String| {
                stats.failures += 1;
                stats.first_failure.get_or_insert(what);
            };
            let fp = match encode_two_conditions(&pview, &sb, &sc, a, bf) {
                Ok(fp) => fp,
                Err(e) => {
                    fail(format!("encode {a} for {:?} / {:?}: {e}", sb.elements, sc.elements));
                    continue;
                }
            };
            let via_p = decode_via_p(&pview, &sb, &fp);
            let via_q = decode_via_q(&pview, &sc, &fp);
            if !matches!((&via_p, &via_q), (Ok(x), Ok(y)) if *x == a && *y == a) {
                fail(format!(
                    "decode {a} for {:?} / {:?}: {via_p:?} {via_q:?}",
                    sb.elements, sc.elements
                ));
            }
            if let Fingerprint::Two { p, q, shift, .. } = fp {
                stats.prefix_violations += u64::from(q != p >> shift || shift != k - sc.k);
            }
            stats.bound_violations += u64::from(!fp.within_bounds());
        }
    }
    let passed =
        stats.failures == 0 && stats.prefix_violations == 0 && stats.bound_violations == 0 && stats.encodes > 0;
    Ok(TwoCondDemo {
        n,
        k,
        m,
        d,
        eps: format_rational(&eps),
        attempts: found.attempts,
        exhaustive: n <= 2,
        stats,
        passed,
    })
}
