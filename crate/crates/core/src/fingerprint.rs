//! Fingerprints: short descriptions of an element `a` that, together with an
//! enumeration of a set containing `a`, identify it.
//!
//! The set stands in for "all strings of complexity below `k` given some
//! condition" and is only ever used through its enumeration order. Three
//! flavors are implemented:
//!
//! * `match`: the right vertex matched to `a` by the on-line engine run over
//!   the set in order;
//! * `ext`: a non-bad extractor neighbor of `a`, plus the ordinal of `a` among
//!   that neighbor's preimages in the set, with dangerous elements pushed to
//!   further layers;
//! * `two`: one prefix-extractor neighbor `p` that works for a set `S_b` while
//!   its prefix `q` works for a second set `S_c`.

use std::fs;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bits::{ceil_log2, exact_log2};
use crate::error::{Error, Result};
use crate::extractor::{hazard_report, is_extractor, random_view, truncate, ExtractorView, HazardReport, SearchParams};
use crate::limits::Limits;
use crate::online::{LayeredGraph, MatchingSession, RequestOutcome};
use crate::ratio::Rational;
use crate::registry::{Named, Registry};
use crate::rng::SplitMix64;

/// Distinct left vertices in enumeration order, at most `2^k` of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumeratedSet {
    pub label: String,
    pub k: u32,
    pub elements: Vec<usize>,
}

impl EnumeratedSet {
    pub fn new(label: impl Into<String>, k: u32, elements: Vec<usize>) -> Result<Self> {
        let set = EnumeratedSet {
            label: label.into(),
            k,
            elements,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k >= 64 || self.elements.len() as u128 > 1u128 << self.k {
            return Err(Error::domain(format!(
                "set `{}` has {} elements, more than 2^{}",
                self.label,
                self.elements.len(),
                self.k
            )));
        }
        let mut sorted = self.elements.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("set `{}` lists {} twice", self.label, w[0])));
        }
        Ok(())
    }

    pub fn contains(&self, a: usize) -> bool {
        self.elements.contains(&a)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let set: EnumeratedSet = serde_json::from_str(text).map_err(Error::from_json)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    fn check_range(&self, left_count: usize) -> Result<()> {
        match self.elements.iter().find(|&&x| x >= left_count) {
            Some(&x) => Err(Error::OutOfRange {
                index: x,
                size: left_count,
            }),
            None => Ok(()),
        }
    }

    fn require_member(&self, a: usize) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{a} is not in set `{}`", self.label)))
        }
    }
}

/// Bit accounting for one fingerprint. `total` counts what a decoder reads
/// besides the set; `bound` is the flavor's stated limit for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitAccount {
    pub p_bits: u32,
    pub layer_bits: u32,
    pub ordinal_bits: u32,
    pub total: u32,
    pub bound: u32,
}

impl BitAccount {
    pub fn within_bound(&self) -> bool {
        self.total <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "snake_case")]
pub enum Fingerprint {
    /// `p` is a layered right index; `ordinal` is its position in `a`'s
    /// neighbor list, the advice that recovers `p` from `a`. Only `p` is read
    /// by the decoder.
    Match {
        p: usize,
        layer: usize,
        ordinal: usize,
        bits: BitAccount,
    },
    Ext {
        layer: usize,
        p: usize,
        ordinal: usize,
        bits: BitAccount,
    },
    /// `q` is `p` with its low `k - l` bits dropped.
    Two {
        p: usize,
        q: usize,
        shift: u32,
        ordinal_b: usize,
        ordinal_c: usize,
        bits_b: BitAccount,
        bits_c: BitAccount,
    },
}

impl Fingerprint {
    pub fn flavor(&self) -> &'static str {
        match self {
            Fingerprint::Match { .. } => "match",
            Fingerprint::Ext { .. } => "ext",
            Fingerprint::Two { .. } => "two",
        }
    }

    pub fn accounts(&self) -> Vec<BitAccount> {
        match self {
            Fingerprint::Match { bits, .. } | Fingerprint::Ext { bits, .. } => vec![*bits],
            Fingerprint::Two { bits_b, bits_c, .. } => vec![*bits_b, *bits_c],
        }
    }

    pub fn within_bounds(&self) -> bool {
        self.accounts().iter().all(BitAccount::within_bound)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from_json)
    }
}

/// `k + ceil(log2(k+1)) + ceil(log2(ceil(W / 2^k)))` for base width `W`.
fn matching_bound(g: &LayeredGraph) -> u32 {
    let k = g.k();
    let per_block = (g.base().right_size() as u128).div_ceil(1u128 << k);
    k + ceil_log2(k as u128 + 1) + ceil_log2(per_block)
}

fn matching_session_for<'g>(g: &'g LayeredGraph, set: &EnumeratedSet) -> Result<MatchingSession<'g>> {
    set.check_range(g.graph().left_count())?;
    if set.elements.len() as u128 > 1u128 << g.k() {
        return Err(Error::Precondition(format!(
            "set `{}` has {} elements but the layered graph serves at most 2^{}",
            set.label,
            set.elements.len(),
            g.k()
        )));
    }
    Ok(MatchingSession::layered(g, 1 << g.k()))
}

/// Runs the on-line engine over the set in order up to `a`; `a`'s match is
/// the fingerprint.
pub fn encode_matching(g: &LayeredGraph, set: &EnumeratedSet, a: usize) -> Result<Fingerprint> {
    set.require_member(a)?;
    let mut session = matching_session_for(g, set)?;
    for &x in &set.elements {
        let outcome = session.request(x)?;
        if x != a {
            continue;
        }
        return match outcome {
            RequestOutcome::Matched { right, layer } => {
                let ordinal = g.graph().adjacency()[a]
                    .iter()
                    .position(|&r| r == right)
                    .expect("matched right vertex is a neighbor");
                let p_bits = ceil_log2(g.graph().right_size() as u128);
                Ok(Fingerprint::Match {
                    p: right,
                    layer,
                    ordinal,
                    bits: BitAccount {
                        p_bits,
                        layer_bits: 0,
                        ordinal_bits: ceil_log2(g.graph().adjacency()[a].len() as u128),
                        total: p_bits,
                        bound: matching_bound(g),
                    },
                })
            }
            RequestOutcome::Rejected => Err(Error::Precondition(format!(
                "on-line engine rejected {a}; the base graph does not satisfy Hall's condition"
            ))),
        };
    }
    unreachable!("membership checked above")
}

/// Replays the engine over the set until `p` is taken.
pub fn decode_matching(g: &LayeredGraph, set: &EnumeratedSet, fp: &Fingerprint) -> Result<usize> {
    let Fingerprint::Match { p, .. } = fp else {
        return Err(Error::Decode(format!(
            "expected a match fingerprint, got {}",
            fp.flavor()
        )));
    };
    let mut session = matching_session_for(g, set)?;
    for &x in &set.elements {
        session.request(x)?;
        if let Some(owner) = session.owner_of(*p) {
            return Ok(owner);
        }
    }
    Err(Error::Decode(format!(
        "right vertex {p} never matched while replaying `{}`",
        set.label
    )))
}

/// Members of `elements` adjacent to `p`, in enumeration order.
fn preimages(view: &ExtractorView, elements: &[usize], p: usize) -> Vec<usize> {
    elements
        .iter()
        .copied()
        .filter(|&x| view.graph().adjacency()[x].contains(&p))
        .collect()
}

fn threshold_floor(t: Rational) -> u128 {
    t.floor().to_integer().max(0) as u128
}

/// `ceil(2 * bad_factor * D * K / M)` bits for an ordinal below the bad
/// threshold.
fn ordinal_bound_bits(view: &ExtractorView, bad_factor: Rational) -> u32 {
    let x = Rational::from_integer(2)
        * bad_factor
        * Rational::new((view.degree() as u64 * view.k_size()) as i64, view.right_size() as i64);
    ceil_log2(x.ceil().to_integer().max(0) as u128)
}

fn check_stack(views: &[ExtractorView], set: &EnumeratedSet, bad_factor: Rational) -> Result<()> {
    let Some(first) = views.first() else {
        return Err(Error::domain("at least one extractor layer is needed"));
    };
    if views.iter().any(|v| v.left_count() != first.left_count()) {
        return Err(Error::domain("all layers need the same left part"));
    }
    if bad_factor <= Rational::zero() {
        return Err(Error::domain("bad factor must be positive"));
    }
    set.check_range(first.left_count())
}

/// Walks the layers: at layer `t` the remaining set `S_t` is classified, and
/// its dangerous elements form `S_{t+1}`. Calls `visit` until it returns a
/// value.
fn walk_layers<T>(
    views: &[ExtractorView],
    set: &EnumeratedSet,
    bad_factor: Rational,
    mut visit: impl FnMut(usize, &ExtractorView, &[usize], &HazardReport) -> Option<T>,
) -> Result<Option<T>> {
    check_stack(views, set, bad_factor)?;
    let mut current = set.elements.clone();
    for (t, view) in views.iter().enumerate() {
        if current.is_empty() {
            break;
        }
        if current.len() as u64 > view.k_size() {
            return Err(Error::Precondition(format!(
                "layer {t} receives {} elements but its view has K = {}",
                current.len(),
                view.k_size()
            )));
        }
        let report = hazard_report(view, &current, bad_factor)?;
        if let Some(found) = visit(t, view, &current, &report) {
            return Ok(Some(found));
        }
        current = report.dangerous;
    }
    Ok(None)
}

/// Encodes `a` at the first layer where it is not dangerous, using its first
/// neighbor that is not bad there.
pub fn encode_extractor(
    views: &[ExtractorView],
    set: &EnumeratedSet,
    a: usize,
    bad_factor: Rational,
) -> Result<Fingerprint> {
    set.require_member(a)?;
    let layer_bits = ceil_log2(views.len() as u128);
    let found = walk_layers(views, set, bad_factor, |t, view, current, report| {
        if report.dangerous.contains(&a) {
            return None;
        }
        let p = view.graph().adjacency()[a]
            .iter()
            .copied()
            .find(|r| !report.bad.contains(r))
            .expect("a non-dangerous element has a good neighbor");
        let ordinal = preimages(view, current, p)
            .iter()
            .position(|&x| x == a)
            .expect("a is a preimage of its own neighbor");
        let ordinal_bits = ceil_log2(threshold_floor(report.threshold));
        let bits = BitAccount {
            p_bits: view.m(),
            layer_bits,
            ordinal_bits,
            total: view.m() + layer_bits + ordinal_bits,
            bound: stack_bound(views, bad_factor),
        };
        Some(Fingerprint::Ext {
            layer: t,
            p,
            ordinal,
            bits,
        })
    })?;
    found.ok_or_else(|| {
        Error::Precondition(format!(
            "{a} is dangerous at all {} layers; supply more layers",
            views.len()
        ))
    })
}

/// `max_t (m_t + ordinal bound bits) + ceil(log2(T + 1))`.
fn stack_bound(views: &[ExtractorView], bad_factor: Rational) -> u32 {
    let per_layer = views
        .iter()
        .map(|v| v.m() + ordinal_bound_bits(v, bad_factor))
        .max()
        .unwrap_or(0);
    per_layer + ceil_log2(views.len() as u128)
}

pub fn decode_extractor(
    views: &[ExtractorView],
    set: &EnumeratedSet,
    fp: &Fingerprint,
    bad_factor: Rational,
) -> Result<usize> {
    let &Fingerprint::Ext { layer, p, ordinal, .. } = fp else {
        return Err(Error::Decode(format!(
            "expected an ext fingerprint, got {}",
            fp.flavor()
        )));
    };
    if layer >= views.len() {
        return Err(Error::Decode(format!("layer {layer} but only {} views", views.len())));
    }
    if p >= views[layer].right_size() {
        return Err(Error::Decode(format!("right vertex {p} outside layer {layer}")));
    }
    let found = walk_layers(views, set, bad_factor, |t, view, current, _| {
        (t == layer).then(|| preimages(view, current, p).get(ordinal).copied())
    })?;
    match found {
        Some(Some(a)) => Ok(a),
        Some(None) => Err(Error::Decode(format!(
            "ordinal {ordinal} out of range for {p} at layer {layer}"
        ))),
        None => Err(Error::Decode(format!(
            "layer {layer} is never reached for `{}`",
            set.label
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerStat {
    pub layer: usize,
    pub size: usize,
    #[serde(rename = "K")]
    pub k_size: u64,
    pub dangerous: usize,
    /// `dangerous < 2 eps K` at this layer.
    pub shrinks: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShrinkageReport {
    pub layers: Vec<LayerStat>,
    /// Number of layers used before the dangerous set became empty, if it did.
    pub layers_used: Option<usize>,
}

impl ShrinkageReport {
    pub fn clean(&self) -> bool {
        self.layers_used.is_some() && self.layers.iter().all(|l| l.shrinks)
    }
}

/// Layer sizes `|S_t|` for a set, with the shrinkage check per layer.
pub fn shrinkage_audit(views: &[ExtractorView], set: &EnumeratedSet, bad_factor: Rational) -> Result<ShrinkageReport> {
    let mut layers = Vec::new();
    let mut layers_used = None;
    walk_layers(views, set, bad_factor, |t, view, current, report| {
        let two_eps_k = Rational::from_integer(2) * view.eps() * Rational::from_integer(view.k_size() as i64);
        layers.push(LayerStat {
            layer: t,
            size: current.len(),
            k_size: view.k_size(),
            dangerous: report.dangerous.len(),
            shrinks: Rational::from_integer(report.dangerous.len() as i64) < two_eps_k,
        });
        if report.dangerous.is_empty() {
            layers_used = Some(t + 1);
            Some(())
        } else {
            None
        }
    })?;
    if set.elements.is_empty() {
        layers_used = Some(0);
    }
    Ok(ShrinkageReport { layers, layers_used })
}

/// Layer thresholds `K_0 = 2^k`, `K_{t+1} = ceil(2 eps K_t)`, down to 1.
pub fn stack_thresholds(k: u32, eps: Rational) -> Result<Vec<u64>> {
    if eps <= Rational::zero() || eps > Rational::new(1, 2) {
        return Err(Error::domain("layer stacks need 0 < eps <= 1/2"));
    }
    if k >= 63 {
        return Err(Error::domain("k too large"));
    }
    let mut out = vec![1u64 << k];
    while *out.last().unwrap() > 1 {
        let next = (Rational::from_integer(2) * eps * Rational::from_integer(*out.last().unwrap() as i64))
            .ceil()
            .to_integer() as u64;
        // eps = 1/2 would never shrink
        let next = next.min(out.last().unwrap() - 1).max(1);
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerStack {
    pub views: Vec<ExtractorView>,
    pub attempts: Vec<u64>,
}

/// One exhaustively verified random view per threshold of
/// [`stack_thresholds`], all with left degree `2^d` and `2^m` outputs, drawn
/// from one seeded stream.
pub fn search_layer_stack(p: SearchParams, seed: u64, max_attempts: u64, limits: &Limits) -> Result<LayerStack> {
    let mut rng = SplitMix64::new(seed);
    let mut views = Vec::new();
    let mut attempts = Vec::new();
    for k_size in stack_thresholds(p.k, p.eps)? {
        let mut found = None;
        for attempt in 1..=max_attempts {
            let view = random_view(p, &mut rng, limits)?.with_k_size(k_size)?;
            if is_extractor(&view, limits)?.is_ok() {
                found = Some((view, attempt));
                break;
            }
        }
        let (view, attempt) = found.ok_or(Error::AttemptsExhausted { attempts: max_attempts })?;
        views.push(view);
        attempts.push(attempt);
    }
    Ok(LayerStack { views, attempts })
}

/// The prefix view and its truncation for a second set with bound `l`.
fn two_views(pview: &ExtractorView, set_b: &EnumeratedSet, set_c: &EnumeratedSet) -> Result<(u32, ExtractorView)> {
    let k = exact_log2(pview.k_size() as u128).ok_or_else(|| Error::domain("prefix view needs K = 2^k"))?;
    let l = set_c.k;
    if l > k {
        return Err(Error::Precondition(format!("second bound l = {l} exceeds k = {k}")));
    }
    if set_b.elements.len() as u64 > pview.k_size() || set_c.elements.len() as u128 > 1u128 << l {
        return Err(Error::Precondition("set larger than its view's K".into()));
    }
    set_b.check_range(pview.left_count())?;
    set_c.check_range(pview.left_count())?;
    let shift = k - l;
    let qview = truncate(pview, shift)?.with_k_size(1 << l)?;
    Ok((shift, qview))
}

/// Finds `p` among `a`'s neighbors, in stored order, such that `p` is not
/// bad for `S_b` and its prefix `q = p >> (k - l)` is not bad for `S_c`.
pub fn encode_two_conditions(
    pview: &ExtractorView,
    set_b: &EnumeratedSet,
    set_c: &EnumeratedSet,
    a: usize,
    bad_factor: Rational,
) -> Result<Fingerprint> {
    set_b.require_member(a)?;
    set_c.require_member(a)?;
    let (shift, qview) = two_views(pview, set_b, set_c)?;
    let hb = hazard_report(pview, &set_b.elements, bad_factor)?;
    let hc = hazard_report(&qview, &set_c.elements, bad_factor)?;
    if hb.weakly_dangerous.contains(&a) || hc.weakly_dangerous.contains(&a) {
        return Err(Error::Precondition(format!(
            "{a} is weakly dangerous for one of the sets"
        )));
    }
    let p = pview.graph().adjacency()[a]
        .iter()
        .copied()
        .find(|&p| !hb.bad.contains(&p) && !hc.bad.contains(&(p >> shift)))
        .ok_or_else(|| Error::Precondition(format!("no neighbor of {a} is good for both sets")))?;
    let q = p >> shift;
    let position = |view: &ExtractorView, elements: &[usize], r: usize| {
        preimages(view, elements, r)
            .iter()
            .position(|&x| x == a)
            .expect("a is a preimage")
    };
    let account = |view: &ExtractorView, threshold: Rational| {
        let ordinal_bits = ceil_log2(threshold_floor(threshold));
        BitAccount {
            p_bits: view.m(),
            layer_bits: 0,
            ordinal_bits,
            total: view.m() + ordinal_bits,
            bound: view.m() + ordinal_bound_bits(view, bad_factor),
        }
    };
    Ok(Fingerprint::Two {
        p,
        q,
        shift,
        ordinal_b: position(pview, &set_b.elements, p),
        ordinal_c: position(&qview, &set_c.elements, q),
        bits_b: account(pview, hb.threshold),
        bits_c: account(&qview, hc.threshold),
    })
}

/// Recovers `a` from `p` and `S_b`.
pub fn decode_via_p(pview: &ExtractorView, set_b: &EnumeratedSet, fp: &Fingerprint) -> Result<usize> {
    let &Fingerprint::Two { p, ordinal_b, .. } = fp else {
        return Err(Error::Decode(format!(
            "expected a two fingerprint, got {}",
            fp.flavor()
        )));
    };
    set_b.check_range(pview.left_count())?;
    preimages(pview, &set_b.elements, p)
        .get(ordinal_b)
        .copied()
        .ok_or_else(|| Error::Decode(format!("ordinal {ordinal_b} out of range for p = {p}")))
}

/// Recovers `a` from `q` and `S_c`, using the view truncated to `S_c`'s bound.
pub fn decode_via_q(pview: &ExtractorView, set_c: &EnumeratedSet, fp: &Fingerprint) -> Result<usize> {
    let &Fingerprint::Two {
        q, shift, ordinal_c, ..
    } = fp
    else {
        return Err(Error::Decode(format!(
            "expected a two fingerprint, got {}",
            fp.flavor()
        )));
    };
    set_c.check_range(pview.left_count())?;
    let qview = truncate(pview, shift)?.with_k_size(1 << set_c.k.min(62))?;
    preimages(&qview, &set_c.elements, q)
        .get(ordinal_c)
        .copied()
        .ok_or_else(|| Error::Decode(format!("ordinal {ordinal_c} out of range for q = {q}")))
}

/// Everything a scheme may need; each scheme reads its own fields.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolInputs<'a> {
    pub layered: Option<&'a LayeredGraph>,
    pub views: &'a [ExtractorView],
    pub set: &'a EnumeratedSet,
    pub set2: Option<&'a EnumeratedSet>,
    pub bad_factor: Rational,
}

impl<'a> ProtocolInputs<'a> {
    fn layered(&self) -> Result<&'a LayeredGraph> {
        self.layered
            .ok_or_else(|| Error::domain("the match flavor needs a layered graph"))
    }

    fn pview(&self) -> Result<&'a ExtractorView> {
        self.views
            .first()
            .ok_or_else(|| Error::domain("the two flavor needs a prefix extractor view"))
    }

    fn set2(&self) -> Result<&'a EnumeratedSet> {
        self.set2
            .ok_or_else(|| Error::domain("the two flavor needs a second set"))
    }
}

/// A recovered element and the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Recovery {
    pub route: &'static str,
    pub left: usize,
}

pub trait FingerprintScheme: Named + Send + Sync {
    fn encode(&self, inputs: &ProtocolInputs<'_>, a: usize) -> Result<Fingerprint>;
    fn decode(&self, inputs: &ProtocolInputs<'_>, fp: &Fingerprint) -> Result<Vec<Recovery>>;
}

pub struct MatchScheme;

impl Named for MatchScheme {
    fn name(&self) -> &'static str {
        "match"
    }
}

impl FingerprintScheme for MatchScheme {
    fn encode(&self, inputs: &ProtocolInputs<'_>, a: usize) -> Result<Fingerprint> {
        encode_matching(inputs.layered()?, inputs.set, a)
    }

    fn decode(&self, inputs: &ProtocolInputs<'_>, fp: &Fingerprint) -> Result<Vec<Recovery>> {
        let left = decode_matching(inputs.layered()?, inputs.set, fp)?;
        Ok(vec![Recovery { route: "p", left }])
    }
}

pub struct ExtScheme;

impl Named for ExtScheme {
    fn name(&self) -> &'static str {
        "ext"
    }
}

impl FingerprintScheme for ExtScheme {
    fn encode(&self, inputs: &ProtocolInputs<'_>, a: usize) -> Result<Fingerprint> {
        encode_extractor(inputs.views, inputs.set, a, inputs.bad_factor)
    }

    fn decode(&self, inputs: &ProtocolInputs<'_>, fp: &Fingerprint) -> Result<Vec<Recovery>> {
        let left = decode_extractor(inputs.views, inputs.set, fp, inputs.bad_factor)?;
        Ok(vec![Recovery { route: "p", left }])
    }
}

pub struct TwoScheme;

impl Named for TwoScheme {
    fn name(&self) -> &'static str {
        "two"
    }
}

impl FingerprintScheme for TwoScheme {
    fn encode(&self, inputs: &ProtocolInputs<'_>, a: usize) -> Result<Fingerprint> {
        encode_two_conditions(inputs.pview()?, inputs.set, inputs.set2()?, a, inputs.bad_factor)
    }

    fn decode(&self, inputs: &ProtocolInputs<'_>, fp: &Fingerprint) -> Result<Vec<Recovery>> {
        let pview = inputs.pview()?;
        Ok(vec![
            Recovery {
                route: "p",
                left: decode_via_p(pview, inputs.set, fp)?,
            },
            Recovery {
                route: "q",
                left: decode_via_q(pview, inputs.set2()?, fp)?,
            },
        ])
    }
}

pub fn fingerprint_schemes() -> Registry<dyn FingerprintScheme> {
    Registry::<dyn FingerprintScheme>::new("fingerprint scheme")
        .with(Box::new(MatchScheme))
        .with(Box::new(ExtScheme))
        .with(Box::new(TwoScheme))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::default_bad_factor;
    use crate::graph::BipartiteGraph;
    use crate::offline::ExhaustiveHall;

    fn set(k: u32, elements: &[usize]) -> EnumeratedSet {
        EnumeratedSet::new("S", k, elements.to_vec()).unwrap()
    }

    /// Complete bipartite base on 4 left and 2 right vertices, k = 1.
    fn small_layered() -> LayeredGraph {
        LayeredGraph::new(BipartiteGraph::complete(2, 2), 1, &ExhaustiveHall, &Limits::default()).unwrap()
    }

    fn uniform_view(n: u32, m: u32, k_size: u64) -> ExtractorView {
        let row: Vec<usize> = (0..1usize << m).collect();
        let g = BipartiteGraph::new(n, 1 << m, row.len(), vec![row; 1 << n]).unwrap();
        ExtractorView::from_graph(g, k_size, Rational::new(1, 4)).unwrap()
    }

    #[test]
    fn set_validation() {
        assert!(EnumeratedSet::new("b", 1, vec![0, 1, 2]).is_err());
        assert!(EnumeratedSet::new("b", 2, vec![0, 1, 0]).is_err());
        assert!(EnumeratedSet::from_json_str(r#"{"label": "b", "k": 1, "elements": [3, 1]}"#).is_ok());
        assert!(EnumeratedSet::from_json_str(r#"{"label": "b", "elements": [3]}"#).is_err());
    }

    #[test]
    fn matching_singleton_takes_first_neighbor() {
        let g = small_layered();
        let fp = encode_matching(&g, &set(1, &[3]), 3).unwrap();
        match fp {
            Fingerprint::Match { p, ordinal, layer, .. } => assert_eq!((p, ordinal, layer), (0, 0, 0)),
            _ => unreachable!(),
        }
        assert_eq!(decode_matching(&g, &set(1, &[3]), &fp).unwrap(), 3);
    }

    #[test]
    fn matching_roundtrip_and_injective() {
        let g = small_layered();
        let s = set(1, &[2, 0]);
        let fps: Vec<_> = [2, 0].iter().map(|&a| encode_matching(&g, &s, a).unwrap()).collect();
        assert_ne!(fps[0], fps[1]);
        for (fp, a) in fps.iter().zip([2, 0]) {
            assert_eq!(decode_matching(&g, &s, fp).unwrap(), a);
            assert!(fp.within_bounds());
        }
        assert!(encode_matching(&g, &s, 1).is_err());
        assert!(encode_matching(&g, &set(2, &[0, 1, 2]), 0).is_err());
    }

    #[test]
    fn matching_wrong_set_is_detected() {
        let g = small_layered();
        let fp = encode_matching(&g, &set(1, &[2, 0]), 0).unwrap();
        // without 2 in front, 0 takes right vertex 0 and nobody takes 1
        assert!(decode_matching(&g, &set(1, &[0]), &fp).is_err());
    }

    #[test]
    fn matching_rejection_is_reported() {
        // vertex 1 has no neighbors, so Hall's condition fails at size 1
        let base = BipartiteGraph::new(1, 1, 1, vec![vec![0], vec![]]).unwrap();
        assert!(LayeredGraph::new(base.clone(), 0, &ExhaustiveHall, &Limits::default()).is_err());
        let g = LayeredGraph::new_unchecked(base, 1);
        assert!(matches!(
            encode_matching(&g, &set(0, &[1]), 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn extractor_uniform_layer_zero() {
        let v = vec![uniform_view(3, 2, 4)];
        let s = set(2, &[5, 1, 6, 2]);
        for &a in &s.elements {
            let fp = encode_extractor(&v, &s, a, default_bad_factor()).unwrap();
            let Fingerprint::Ext { layer, p, .. } = fp else {
                unreachable!()
            };
            assert_eq!((layer, p), (0, 0));
            assert!(fp.within_bounds());
            assert_eq!(decode_extractor(&v, &s, &fp, default_bad_factor()).unwrap(), a);
        }
    }

    #[test]
    fn extractor_second_layer() {
        // layer 0 sends everything to right vertex 0, which carries 2 edges
        // against a threshold of 1, so both elements move to layer 1
        let g = BipartiteGraph::new(2, 4, 1, vec![vec![0]; 4]).unwrap();
        let constant = ExtractorView::from_graph(g, 2, Rational::new(1, 4)).unwrap();
        let views = vec![constant, uniform_view(2, 1, 2)];
        let bf = default_bad_factor();
        let s = set(1, &[3, 1]);
        for a in [3, 1] {
            let fp = encode_extractor(&views, &s, a, bf).unwrap();
            assert!(matches!(fp, Fingerprint::Ext { layer: 1, .. }));
            assert_eq!(decode_extractor(&views, &s, &fp, bf).unwrap(), a);
        }
        assert!(encode_extractor(&views[..1], &s, 3, bf).is_err());
        let audit = shrinkage_audit(&views, &s, bf).unwrap();
        assert_eq!(audit.layers_used, Some(2));
        assert!(!audit.layers[0].shrinks);
    }

    #[test]
    fn thresholds() {
        assert_eq!(stack_thresholds(3, Rational::new(1, 4)).unwrap(), vec![8, 4, 2, 1]);
        assert_eq!(stack_thresholds(2, Rational::new(1, 8)).unwrap(), vec![4, 1]);
        assert_eq!(stack_thresholds(0, Rational::new(1, 4)).unwrap(), vec![1]);
        assert_eq!(stack_thresholds(2, Rational::new(1, 2)).unwrap(), vec![4, 3, 2, 1]);
        assert!(stack_thresholds(2, Rational::new(3, 4)).is_err());
    }

    #[test]
    fn two_conditions_on_uniform_view() {
        let pview = uniform_view(3, 2, 4);
        let sb = set(2, &[4, 7, 1]);
        let sc = set(1, &[7, 2]);
        let fp = encode_two_conditions(&pview, &sb, &sc, 7, default_bad_factor()).unwrap();
        let Fingerprint::Two { p, q, shift, .. } = fp else {
            unreachable!()
        };
        assert_eq!((p, q, shift), (0, 0, 1));
        assert_eq!(decode_via_p(&pview, &sb, &fp).unwrap(), 7);
        assert_eq!(decode_via_q(&pview, &sc, &fp).unwrap(), 7);
        assert!(fp.within_bounds());
        assert!(encode_two_conditions(&pview, &sb, &sc, 4, default_bad_factor()).is_err());
    }

    #[test]
    fn two_conditions_equal_bounds() {
        let pview = uniform_view(2, 1, 2);
        let s = set(1, &[3, 0]);
        let fp = encode_two_conditions(&pview, &s, &s, 0, default_bad_factor()).unwrap();
        let Fingerprint::Two {
            p,
            q,
            shift,
            ordinal_b,
            ordinal_c,
            ..
        } = fp
        else {
            unreachable!()
        };
        assert_eq!(shift, 0);
        assert_eq!((p, ordinal_b), (q, ordinal_c));
    }

    #[test]
    fn prefix_shift_arithmetic() {
        // k = 1, l = 0: p = 110 loses one low bit
        let g = BipartiteGraph::new(1, 8, 1, vec![vec![6], vec![1]]).unwrap();
        let pview = ExtractorView::from_graph(g, 2, Rational::new(1, 2)).unwrap();
        let sb = set(1, &[0]);
        let sc = set(0, &[0]);
        let fp = encode_two_conditions(&pview, &sb, &sc, 0, Rational::from_integer(8)).unwrap();
        let Fingerprint::Two { p, q, shift, .. } = fp else {
            unreachable!()
        };
        assert_eq!((p, q, shift), (6, 3, 1));
        assert_eq!(decode_via_q(&pview, &sc, &fp).unwrap(), 0);
    }

    #[test]
    fn registry_and_json() {
        let reg = fingerprint_schemes();
        assert_eq!(reg.names(), vec!["match", "ext", "two"]);
        let g = small_layered();
        let s = set(1, &[1, 3]);
        let inputs = ProtocolInputs {
            layered: Some(&g),
            views: &[],
            set: &s,
            set2: None,
            bad_factor: default_bad_factor(),
        };
        let fp = reg.get("match").unwrap().encode(&inputs, 3).unwrap();
        let text = serde_json::to_string(&fp).unwrap();
        assert!(text.contains("\"flavor\":\"match\""));
        let back = Fingerprint::from_json_str(&text).unwrap();
        assert_eq!(reg.get("match").unwrap().decode(&inputs, &back).unwrap()[0].left, 3);
        assert!(reg.get("ext").unwrap().encode(&inputs, 3).is_err());
        assert!(reg.get("two").unwrap().encode(&inputs, 3).is_err());
    }
}
