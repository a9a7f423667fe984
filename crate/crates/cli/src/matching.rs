use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Subcommand;
use serde_json::json;

use omex_core::offline::{
    construct_verified_offline_graph, hall_check, hall_checkers, random_offline_graph, series_bound,
    series_bound_exact, OfflineParams,
};
use omex_core::online::{
    half_rejection_audit, online_strategy_exists, sweep_all_sequences, sweep_random_sequences, GameOutcome,
    LayeredGraph, MatchingSession,
};
use omex_core::{BipartiteGraph, Limits};

use crate::report::Outcome;

#[derive(Subcommand)]
pub enum OfflineCmd {
    /// Draw a random graph with 2^n left vertices of degree n^c.
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        c: u32,
        #[arg(long)]
        seed: u64,
        /// Redraw until the graph passes a Hall check with this checker.
        #[arg(long)]
        verify: Option<String>,
        #[arg(long, default_value_t = 1000)]
        max_attempts: u64,
        /// Write the graph here instead of embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check Hall's condition for all left sets of size at most s.
    Hall {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        s: usize,
        /// exhaustive, matching, or auto (by left part size).
        #[arg(long, default_value = "auto")]
        checker: String,
    },
    /// Union bound on the Hall failure probability of a random graph.
    Bound {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        c: u32,
        /// Also give the exact rational value (k <= 16).
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Subcommand)]
pub enum OnlineCmd {
    /// Serve a request sequence with the greedy on-line engine.
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        requests: Vec<usize>,
        /// Layer the graph with k + 1 copies (Hall-checked at 2^k) first.
        #[arg(long)]
        layers: Option<u32>,
    },
    /// Decide whether any on-line strategy serves every sequence of s requests.
    Game {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        s: usize,
    },
    /// Build the (k+1)-copy layered graph and optionally sweep sequences.
    Layered {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run every sequence of up to 2^k distinct requests.
        #[arg(long)]
        sweep: bool,
        /// Run this many random sequences of length 2^k instead.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &PathBuf) -> Result<BipartiteGraph> {
    BipartiteGraph::load(path).with_context(|| format!("loading graph {}", path.display()))
}

fn save_or_embed(graph: &BipartiteGraph, out: &Option<PathBuf>) -> Result<serde_json::Value> {
    match out {
        Some(path) => {
            graph.save(path)?;
            Ok(serde_json::Value::Null)
        }
        None => Ok(serde_json::to_value(graph)?),
    }
}

pub fn offline(cmd: OfflineCmd, limits: &Limits) -> Result<Outcome> {
    match cmd {
        OfflineCmd::Gen {
            n,
            k,
            c,
            seed,
            verify,
            max_attempts,
            out,
        } => {
            let p = OfflineParams::new(n, k, c)?;
            let (graph, attempts) = match &verify {
                Some(name) => {
                    let checkers = hall_checkers();
                    let v = construct_verified_offline_graph(p, seed, max_attempts, checkers.get(name)?, limits)?;
                    (v.graph, Some(v.attempts))
                }
                None => (random_offline_graph(p, seed, limits)?, None),
            };
            let outcome = json!({
                "left": graph.left_count(),
                "right_size": graph.right_size(),
                "degree": graph.max_degree(),
                "hall": if verify.is_some() { "verified" } else { "unchecked" },
                "attempts": attempts,
                "graph": save_or_embed(&graph, &out)?,
            });
            let params = json!({"n": n, "k": k, "c": c, "verify": verify, "max_attempts": max_attempts});
            Ok(Outcome::new(params, outcome, true)?
                .seeded(seed)
                .artifact(out.as_deref()))
        }
        OfflineCmd::Hall { graph, s, checker } => {
            let g = load(&graph)?;
            let verdict = if checker == "auto" {
                hall_check(&g, s, limits)?
            } else {
                hall_checkers().get(&checker)?.check(&g, s, limits)?
            };
            let ok = verdict.is_ok();
            let params = json!({"graph": graph, "s": s, "checker": checker});
            Outcome::new(params, json!({"ok": ok, "verdict": verdict}), ok)
        }
        OfflineCmd::Bound { n, k, c, exact } => {
            let b = series_bound(n, k, c)?;
            let mut outcome = json!({"base": b.base, "sum": b.sum});
            if exact {
                let (base, sum) = series_bound_exact(n, k, c)?;
                outcome["exact_base"] = json!(base.to_string());
                outcome["exact_sum"] = json!(sum.to_string());
            }
            Outcome::new(json!({"n": n, "k": k, "c": c}), outcome, true)
        }
    }
}

pub fn online(cmd: OnlineCmd, limits: &Limits) -> Result<Outcome> {
    match cmd {
        OnlineCmd::Run {
            graph,
            requests,
            layers,
        } => {
            let base = load(&graph)?;
            let layered;
            let mut session = match layers {
                Some(k) => {
                    layered = LayeredGraph::new(base, k, &omex_core::offline::ExhaustiveHall, limits)?;
                    MatchingSession::layered(&layered, 1 << k)
                }
                None => MatchingSession::new(&base, requests.len()),
            };
            for &r in &requests {
                session.request(r)?;
            }
            let audit = half_rejection_audit(&session);
            let ok = session.rejections().is_empty() && matches!(audit, omex_core::online::AuditVerdict::Ok);
            let params = json!({"graph": graph, "requests": requests, "layers": layers});
            Outcome::new(params, json!({"session": session.dump(), "audit": audit}), ok)
        }
        OnlineCmd::Game { graph, s } => {
            let g = load(&graph)?;
            let outcome = match online_strategy_exists(&g, s, limits)? {
                GameOutcome::Yes { strategy } => json!({
                    "exists": true,
                    "strategy_nodes": strategy.node_count(),
                    "strategy": strategy,
                }),
                GameOutcome::No => json!({"exists": false}),
            };
            let ok = outcome["exists"] == json!(true);
            Outcome::new(json!({"graph": graph, "s": s}), outcome, ok)
        }
        OnlineCmd::Layered {
            graph,
            k,
            out,
            sweep,
            random,
            seed,
        } => {
            let base = load(&graph)?;
            let lg = LayeredGraph::new(base, k, &omex_core::offline::ExhaustiveHall, limits)?;
            let capacity = 1usize << k;
            let result = match (sweep, random) {
                (true, Some(_)) => bail!("--sweep and --random are exclusive"),
                (true, None) => Some(sweep_all_sequences(&lg, capacity, limits)?),
                (false, Some(count)) => {
                    let seed = seed.context("--random needs --seed")?;
                    Some(sweep_random_sequences(&lg, capacity, count, seed)?)
                }
                (false, None) => None,
            };
            let ok = result.as_ref().is_none_or(|s| s.clean());
            let outcome = json!({
                "copies": lg.copies(),
                "right_size": lg.graph().right_size(),
                "degree": lg.graph().max_degree(),
                "sweep": result,
                "graph": save_or_embed(lg.graph(), &out)?,
            });
            let params = json!({"graph": graph, "k": k, "sweep": sweep, "random": random});
            let mut o = Outcome::new(params, outcome, ok)?.artifact(out.as_deref());
            o.seed = seed;
            Ok(o)
        }
    }
}
