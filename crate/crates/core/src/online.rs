//! On-line matching.
//!
//! Requests arrive one at a time and each is either matched to an unused
//! neighbor, permanently, or rejected. A [`LayeredGraph`] stacks `k + 1`
//! copies of a Hall-verified right part; the greedy engine tries layer 0
//! first and forwards a request to the next layer when every neighbor copy
//! in the current one is taken.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::limits::Limits;
use crate::offline::{HallChecker, HallVerdict};
use crate::rng::SplitMix64;

/// `copies` copies of `base`'s right part, each joined to the same left
/// vertices as the original. Right vertex `(r, layer)` has index
/// `layer * base.right_size() + r`, and neighbor lists are layer-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredGraph {
    base: BipartiteGraph,
    copies: usize,
    graph: BipartiteGraph,
}

impl LayeredGraph {
    /// Layers `base` with `k + 1` copies after checking Hall's condition up
    /// to size `2^k`.
    pub fn new(base: BipartiteGraph, k: u32, checker: &dyn HallChecker, limits: &Limits) -> Result<Self> {
        let s = 1usize.checked_shl(k).ok_or_else(|| Error::domain("k too large"))?;
        match checker.check(&base, s, limits)? {
            HallVerdict::Ok => Ok(Self::new_unchecked(base, k as usize + 1)),
            HallVerdict::Witness { set, neighborhood } => Err(Error::Precondition(format!(
                "base violates Hall's condition: {} left vertices {set:?} have {neighborhood} neighbors",
                set.len()
            ))),
        }
    }

    /// Layers without the Hall check.
    pub fn new_unchecked(base: BipartiteGraph, copies: usize) -> Self {
        assert!(copies >= 1, "at least one copy");
        let width = base.right_size();
        let neighbors = base
            .adjacency()
            .iter()
            .map(|list| {
                (0..copies)
                    .flat_map(|layer| list.iter().map(move |&r| layer * width + r))
                    .collect()
            })
            .collect();
        let graph = BipartiteGraph::new_unchecked(base.n(), width * copies, base.max_degree() * copies, neighbors);
        LayeredGraph { base, copies, graph }
    }

    pub fn base(&self) -> &BipartiteGraph {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// `k` such that the stack serves up to `2^k` requests.
    pub fn k(&self) -> u32 {
        (self.copies - 1) as u32
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn into_graph(self) -> BipartiteGraph {
        self.graph
    }

    /// Splits a layered right index into `(layer, base right index)`.
    pub fn split(&self, right: usize) -> (usize, usize) {
        let w = self.base.right_size();
        (right / w, right % w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RequestOutcome {
    Matched { right: usize, layer: usize },
    Rejected,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LayerCount {
    pub reached: usize,
    pub served: usize,
}

impl LayerCount {
    pub fn forwarded(&self) -> usize {
        self.reached - self.served
    }
}

/// Mutable state of one on-line run. Matches are final.
#[derive(Debug, Clone)]
pub struct MatchingSession<'g> {
    graph: &'g BipartiteGraph,
    layer_width: usize,
    capacity: usize,
    matched: Vec<Option<usize>>,
    used: Vec<bool>,
    requests: Vec<usize>,
    rejections: Vec<usize>,
    layers: Vec<LayerCount>,
}

impl<'g> MatchingSession<'g> {
    /// Single-layer session on a plain graph.
    pub fn new(graph: &'g BipartiteGraph, capacity: usize) -> Self {
        Self::with_layers(graph, graph.right_size().max(1), 1, capacity)
    }

    pub fn layered(graph: &'g LayeredGraph, capacity: usize) -> Self {
        Self::with_layers(
            graph.graph(),
            graph.base().right_size().max(1),
            graph.copies(),
            capacity,
        )
    }

    fn with_layers(graph: &'g BipartiteGraph, layer_width: usize, layers: usize, capacity: usize) -> Self {
        MatchingSession {
            graph,
            layer_width,
            capacity,
            matched: vec![None; graph.left_count()],
            used: vec![false; graph.right_size()],
            requests: Vec::new(),
            rejections: Vec::new(),
            layers: vec![LayerCount::default(); layers],
        }
    }

    /// Serves `left`: the first layer holding an unused neighbor copy wins,
    /// and inside it the first unused neighbor in stored order is taken.
    pub fn request(&mut self, left: usize) -> Result<RequestOutcome> {
        if left >= self.graph.left_count() {
            return Err(Error::OutOfRange {
                index: left,
                size: self.graph.left_count(),
            });
        }
        if self.requests.contains(&left) {
            return Err(Error::DuplicateRequest(left));
        }
        if self.requests.len() >= self.capacity {
            return Err(Error::CapacityExceeded(self.capacity));
        }
        self.requests.push(left);
        let list = &self.graph.adjacency()[left];
        for layer in 0..self.layers.len() {
            self.layers[layer].reached += 1;
            let pick = list
                .iter()
                .copied()
                .find(|&r| r / self.layer_width == layer && !self.used[r]);
            if let Some(right) = pick {
                self.layers[layer].served += 1;
                self.used[right] = true;
                self.matched[left] = Some(right);
                return Ok(RequestOutcome::Matched { right, layer });
            }
        }
        self.rejections.push(left);
        Ok(RequestOutcome::Rejected)
    }

    pub fn matched_right(&self, left: usize) -> Option<usize> {
        self.matched.get(left).copied().flatten()
    }

    /// Left vertex currently holding `right`, if any.
    pub fn owner_of(&self, right: usize) -> Option<usize> {
        self.requests.iter().copied().find(|&l| self.matched[l] == Some(right))
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn rejections(&self) -> &[usize] {
        &self.rejections
    }

    pub fn layer_counts(&self) -> &[LayerCount] {
        &self.layers
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn matched_pairs(&self) -> Vec<(usize, usize)> {
        self.requests
            .iter()
            .filter_map(|&l| self.matched[l].map(|r| (l, r)))
            .collect()
    }

    pub fn dump(&self) -> SessionDump {
        SessionDump {
            requests: self.requests.clone(),
            matched: self
                .matched_pairs()
                .into_iter()
                .map(|(left, right)| MatchedPair {
                    left,
                    right,
                    layer: right / self.layer_width,
                })
                .collect(),
            rejections: self.rejections.clone(),
            layers: self
                .layers
                .iter()
                .map(|c| LayerDump {
                    reached: c.reached,
                    served: c.served,
                    forwarded: c.forwarded(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub left: usize,
    pub right: usize,
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerDump {
    pub reached: usize,
    pub served: usize,
    pub forwarded: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionDump {
    pub requests: Vec<usize>,
    pub matched: Vec<MatchedPair>,
    pub rejections: Vec<usize>,
    pub layers: Vec<LayerDump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AuditVerdict {
    Ok,
    Violation {
        layer: usize,
        reached: usize,
        forwarded: usize,
    },
}

/// Checks that every layer forwarded at most half of the requests reaching
/// it. On a Hall-verified base, the rejected set `X` of a layer has all its
/// neighbors used by served requests, so `|X| <= |N(X)| <= served`.
pub fn half_rejection_audit(session: &MatchingSession<'_>) -> AuditVerdict {
    for (layer, c) in session.layer_counts().iter().enumerate() {
        if 2 * c.forwarded() > c.reached {
            return AuditVerdict::Violation {
                layer,
                reached: c.reached,
                forwarded: c.forwarded(),
            };
        }
    }
    AuditVerdict::Ok
}

/// Totals from running the greedy engine on many request sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SequenceSweep {
    pub sequences: u64,
    pub rejected_runs: u64,
    pub audit_violations: u64,
    pub first_failure: Option<Vec<usize>>,
}

impl SequenceSweep {
    pub fn clean(&self) -> bool {
        self.rejected_runs == 0 && self.audit_violations == 0
    }

    fn record(&mut self, session: &MatchingSession<'_>) {
        self.sequences += 1;
        let rejected = !session.rejections().is_empty();
        let audit_bad = half_rejection_audit(session) != AuditVerdict::Ok;
        self.rejected_runs += u64::from(rejected);
        self.audit_violations += u64::from(audit_bad);
        if (rejected || audit_bad) && self.first_failure.is_none() {
            self.first_failure = Some(session.requests().to_vec());
        }
    }
}

/// Runs the engine on every sequence of `1..=max_len` distinct left vertices.
/// Prefixes share a session, so each sequence costs one request.
pub fn sweep_all_sequences(graph: &LayeredGraph, max_len: usize, limits: &Limits) -> Result<SequenceSweep> {
    let left = graph.graph().left_count();
    let max_len = max_len.min(left);
    let total: u128 = (1..=max_len)
        .map(|t| (0..t).map(|i| (left - i) as u128).product::<u128>())
        .fold(0, u128::saturating_add);
    Limits::guard("request sequences", total, limits.subsets)?;
    let mut sweep = SequenceSweep::default();
    let root = MatchingSession::layered(graph, max_len);
    sweep_from(&root, max_len, &mut sweep)?;
    Ok(sweep)
}

fn sweep_from(session: &MatchingSession<'_>, max_len: usize, sweep: &mut SequenceSweep) -> Result<()> {
    if session.requests().len() == max_len {
        return Ok(());
    }
    for x in 0..session.graph.left_count() {
        if session.requests().contains(&x) {
            continue;
        }
        let mut next = session.clone();
        next.request(x)?;
        sweep.record(&next);
        sweep_from(&next, max_len, sweep)?;
    }
    Ok(())
}

/// Runs the engine on `count` random sequences of `len` distinct vertices.
pub fn sweep_random_sequences(graph: &LayeredGraph, len: usize, count: u64, seed: u64) -> Result<SequenceSweep> {
    let left = graph.graph().left_count();
    let len = len.min(left);
    let mut rng = SplitMix64::new(seed);
    let mut sweep = SequenceSweep::default();
    let mut order: Vec<usize> = (0..left).collect();
    for _ in 0..count {
        rng.shuffle(&mut order);
        let mut session = MatchingSession::layered(graph, len);
        for &x in &order[..len] {
            session.request(x)?;
        }
        sweep.record(&session);
    }
    Ok(sweep)
}

/// Winning responses for the matching side: for each possible next request,
/// the right vertex to use and the continuation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StrategyTree {
    pub moves: Vec<StrategyMove>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyMove {
    pub request: usize,
    pub respond: usize,
    pub next: StrategyTree,
}

impl StrategyTree {
    pub fn node_count(&self) -> usize {
        1 + self.moves.iter().map(|m| m.next.node_count()).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameOutcome {
    Yes { strategy: StrategyTree },
    No,
}

impl GameOutcome {
    pub fn exists(&self) -> bool {
        matches!(self, GameOutcome::Yes { .. })
    }
}

type Position = (u64, Vec<u64>);

struct GameSearch<'a> {
    graph: &'a BipartiteGraph,
    rounds: usize,
    options: Vec<Vec<usize>>,
    memo: HashMap<Position, bool>,
    limit: u128,
}

impl GameSearch<'_> {
    fn wins(&mut self, requested: u64, used: &mut Vec<u64>, depth: usize) -> Result<bool> {
        let all = self.graph.left_count();
        if depth == self.rounds || requested.count_ones() as usize == all {
            return Ok(true);
        }
        let key = (requested, used.clone());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        Limits::guard("game positions", self.memo.len() as u128 + 1, self.limit)?;
        let mut result = true;
        for x in 0..all {
            if requested >> x & 1 == 1 {
                continue;
            }
            if self.answer(requested, used, depth, x)?.is_none() {
                result = false;
                break;
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    /// First unused neighbor of `x` (stored order) that keeps the game won.
    fn answer(&mut self, requested: u64, used: &mut Vec<u64>, depth: usize, x: usize) -> Result<Option<usize>> {
        for i in 0..self.options[x].len() {
            let y = self.options[x][i];
            if used[y / 64] >> (y % 64) & 1 == 1 {
                continue;
            }
            used[y / 64] |= 1 << (y % 64);
            let ok = self.wins(requested | 1 << x, used, depth + 1)?;
            used[y / 64] &= !(1 << (y % 64));
            if ok {
                return Ok(Some(y));
            }
        }
        Ok(None)
    }

    fn tree(&mut self, requested: u64, used: &mut Vec<u64>, depth: usize, budget: &mut u128) -> Result<StrategyTree> {
        if *budget == 0 {
            return Err(Error::LimitExceeded {
                what: "strategy tree nodes",
                value: u128::MAX,
                limit: 0,
            });
        }
        *budget -= 1;
        let mut tree = StrategyTree::default();
        if depth == self.rounds {
            return Ok(tree);
        }
        for x in 0..self.graph.left_count() {
            if requested >> x & 1 == 1 {
                continue;
            }
            let y = self
                .answer(requested, used, depth, x)?
                .expect("winning position has an answer for every request");
            used[y / 64] |= 1 << (y % 64);
            let next = self.tree(requested | 1 << x, used, depth + 1, budget)?;
            used[y / 64] &= !(1 << (y % 64));
            tree.moves.push(StrategyMove {
                request: x,
                respond: y,
                next,
            });
        }
        Ok(tree)
    }
}

/// Exhaustive alternating search: the adversary names any unrequested left
/// vertex, the matcher answers with any unused neighbor. Returns a winning
/// strategy iff the matcher survives every adversary sequence of length up
/// to `s`.
pub fn online_strategy_exists(g: &BipartiteGraph, s: usize, limits: &Limits) -> Result<GameOutcome> {
    if g.left_count() > 64 {
        return Err(Error::LimitExceeded {
            what: "left part for game search",
            value: g.left_count() as u128,
            limit: 64,
        });
    }
    let options: Vec<Vec<usize>> = (0..g.left_count())
        .map(|x| {
            let mut seen = Vec::new();
            for &r in &g.adjacency()[x] {
                if !seen.contains(&r) {
                    seen.push(r);
                }
            }
            seen
        })
        .collect();
    let mut search = GameSearch {
        graph: g,
        rounds: s.min(g.left_count()),
        options,
        memo: HashMap::new(),
        limit: limits.game_positions,
    };
    let mut used = vec![0u64; g.right_size().div_ceil(64).max(1)];
    if !search.wins(0, &mut used, 0)? {
        return Ok(GameOutcome::No);
    }
    let mut budget = limits.strategy_nodes;
    let strategy = search.tree(0, &mut used, 0, &mut budget).map_err(|e| match e {
        Error::LimitExceeded { what, .. } => Error::LimitExceeded {
            what,
            value: limits.strategy_nodes + 1,
            limit: limits.strategy_nodes,
        },
        other => other,
    })?;
    Ok(GameOutcome::Yes { strategy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::hall_counterexample;
    use crate::offline::{construct_verified_offline_graph, ExhaustiveHall, OfflineParams};

    fn limits() -> Limits {
        Limits::default()
    }

    fn verified_base(n: u32, k: u32, seed: u64) -> BipartiteGraph {
        let p = OfflineParams::new(n, k, 2).unwrap();
        construct_verified_offline_graph(p, seed, 100, &ExhaustiveHall, &limits())
            .unwrap()
            .graph
    }

    #[test]
    fn complete_graph_disjoint_picks() {
        let g = BipartiteGraph::complete(1, 2);
        let mut s = MatchingSession::new(&g, 2);
        assert_eq!(s.request(0).unwrap(), RequestOutcome::Matched { right: 0, layer: 0 });
        assert_eq!(s.request(1).unwrap(), RequestOutcome::Matched { right: 1, layer: 0 });
        assert_eq!(half_rejection_audit(&s), AuditVerdict::Ok);
        assert_eq!(s.layer_counts()[0].forwarded(), 0);
    }

    #[test]
    fn counterexample_blocks_after_x() {
        let g = hall_counterexample();
        let mut s = MatchingSession::new(&g, 2);
        assert_eq!(s.request(0).unwrap(), RequestOutcome::Matched { right: 0, layer: 0 });
        assert_eq!(s.request(1).unwrap(), RequestOutcome::Rejected);
        assert_eq!(s.rejections(), &[1]);
    }

    #[test]
    fn request_errors() {
        let g = hall_counterexample();
        let mut s = MatchingSession::new(&g, 2);
        s.request(0).unwrap();
        assert!(matches!(s.request(0), Err(Error::DuplicateRequest(0))));
        assert!(matches!(s.request(7), Err(Error::OutOfRange { .. })));
        s.request(2).unwrap();
        assert!(matches!(s.request(1), Err(Error::CapacityExceeded(2))));
        assert_eq!(s.requests().len(), s.matched_pairs().len() + s.rejections().len());
    }

    #[test]
    fn layering_shape() {
        let base = verified_base(2, 1, 1);
        let lg = LayeredGraph::new(base.clone(), 1, &ExhaustiveHall, &limits()).unwrap();
        assert_eq!(lg.graph().right_size(), 16);
        assert_eq!(lg.graph().max_degree(), 8);
        for x in 0..base.left_count() {
            let b = base.neighbors_of(x).unwrap();
            let l = lg.graph().neighbors_of(x).unwrap();
            assert_eq!(&l[..4], b);
            assert!(l[4..].iter().zip(b).all(|(&a, &r)| a == r + 8));
        }
        assert_eq!(lg.split(13), (1, 5));

        let single = LayeredGraph::new(base.clone(), 0, &ExhaustiveHall, &limits()).unwrap();
        assert_eq!(single.graph(), &base);
    }

    #[test]
    fn layering_refuses_non_hall_base() {
        let err = LayeredGraph::new(hall_counterexample(), 2, &ExhaustiveHall, &limits()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn layered_pairs_always_served() {
        let lg = LayeredGraph::new(verified_base(2, 1, 3), 1, &ExhaustiveHall, &limits()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    continue;
                }
                let mut s = MatchingSession::layered(&lg, 2);
                s.request(a).unwrap();
                s.request(b).unwrap();
                assert!(s.rejections().is_empty());
                assert_eq!(half_rejection_audit(&s), AuditVerdict::Ok);
            }
        }
    }

    #[test]
    fn audit_flags_smuggled_isolated_vertex() {
        let base = BipartiteGraph::new(1, 2, 1, vec![vec![], vec![1]]).unwrap();
        let lg = LayeredGraph::new_unchecked(base, 2);
        let mut s = MatchingSession::layered(&lg, 2);
        assert_eq!(s.request(0).unwrap(), RequestOutcome::Rejected);
        assert_eq!(
            half_rejection_audit(&s),
            AuditVerdict::Violation {
                layer: 0,
                reached: 1,
                forwarded: 1
            }
        );
    }

    #[test]
    fn counterexample_game() {
        let g = hall_counterexample();
        assert_eq!(online_strategy_exists(&g, 2, &limits()).unwrap(), GameOutcome::No);
        match online_strategy_exists(&g, 1, &limits()).unwrap() {
            GameOutcome::Yes { strategy } => {
                assert_eq!(strategy.moves.len(), 3);
                assert!(strategy.moves.iter().all(|m| m.next.moves.is_empty()));
            }
            GameOutcome::No => panic!("single requests are always servable"),
        }
    }

    #[test]
    fn layered_game_is_won() {
        let lg = LayeredGraph::new(verified_base(2, 1, 8), 1, &ExhaustiveHall, &limits()).unwrap();
        let out = online_strategy_exists(lg.graph(), 2, &limits()).unwrap();
        let GameOutcome::Yes { strategy } = out else {
            panic!("layered graph must admit an on-line strategy");
        };
        // 4 first requests, 3 replies each
        assert_eq!(strategy.node_count(), 1 + 4 + 12);
    }

    #[test]
    fn game_position_guard() {
        let l = Limits {
            game_positions: 1,
            ..Limits::default()
        };
        let lg = LayeredGraph::new(verified_base(2, 1, 8), 1, &ExhaustiveHall, &limits()).unwrap();
        assert!(matches!(
            online_strategy_exists(lg.graph(), 2, &l),
            Err(Error::LimitExceeded { .. })
        ));
    }

    #[test]
    fn sweep_small_layered() {
        let lg = LayeredGraph::new(verified_base(2, 2, 4), 2, &ExhaustiveHall, &limits()).unwrap();
        let sweep = sweep_all_sequences(&lg, 4, &limits()).unwrap();
        assert_eq!(sweep.sequences, 4 + 12 + 24 + 24);
        assert!(sweep.clean(), "{sweep:?}");
        let random = sweep_random_sequences(&lg, 4, 200, 1).unwrap();
        assert_eq!(random.sequences, 200);
        assert!(random.clean());
    }

    #[test]
    fn greedy_is_deterministic() {
        let lg = LayeredGraph::new(verified_base(3, 2, 2), 2, &ExhaustiveHall, &limits()).unwrap();
        let run = |seq: &[usize]| {
            let mut s = MatchingSession::layered(&lg, 4);
            for &x in seq {
                s.request(x).unwrap();
            }
            s.dump()
        };
        assert_eq!(run(&[5, 1, 7, 0]), run(&[5, 1, 7, 0]));
    }
}
