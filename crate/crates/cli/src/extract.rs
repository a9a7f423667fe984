use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Subcommand;
use serde_json::json;

use omex_core::extractor::{
    default_bad_factor, extractor_verifiers, hazard_report, hazard_sweep, is_prefix_extractor, load_views,
    minimal_prefix_degree, optimal_degree, prefix_failure_bound, prefix_verdict_ok, random_extractor_search,
    views_to_json, ExtractorView, SearchParams,
};
use omex_core::fingerprint::search_layer_stack;
use omex_core::ratio::{format_rational, Rational};
use omex_core::Limits;

use crate::rational;
use crate::report::Outcome;

#[derive(Subcommand)]
pub enum ExtCmd {
    /// Verify the (K, eps)-extractor property of a view. Exit 1 only on a witness;
    /// a sampled run without one reports `extractor: false` since it proves nothing.
    Check {
        #[arg(long)]
        view: PathBuf,
        /// Override the view's K.
        #[arg(long = "K")]
        k_size: Option<u64>,
        /// Override the view's eps.
        #[arg(long, value_parser = rational)]
        eps: Option<Rational>,
        #[arg(long, default_value = "exhaustive")]
        verifier: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Required with the sampled verifier.
        #[arg(long)]
        seed: Option<u64>,
        /// Check every truncation level 0..=k instead.
        #[arg(long)]
        prefix: Option<u32>,
    },
    /// Draw random views until one verifies.
    Search {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_attempts: u64,
        /// Require the prefix property down to depth k.
        #[arg(long)]
        prefix: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bad and (weakly) dangerous vertices of one set, or a sweep over all K-sets.
    Hazards {
        #[arg(long)]
        view: PathBuf,
        #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
        set: Option<Vec<usize>>,
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_parser = rational)]
        bad_factor: Option<Rational>,
    },
    /// Left degree sufficient for a random extractor.
    Degree {
        #[arg(long = "N")]
        big_n: u64,
        #[arg(long = "K")]
        k_size: u64,
        #[arg(long = "M")]
        big_m: u64,
        #[arg(long, value_parser = rational)]
        eps: Rational,
    },
    /// Failure bound for random prefix extractors.
    Pbound {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        /// Tabulate d = 1..=span and report the smallest d with bound < 1.
        #[arg(long)]
        span: Option<u32>,
    },
    /// Verified views for every layer threshold 2^k, ceil(2 eps K), ..., 1.
    Stack {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_attempts: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_one(path: &Path) -> Result<ExtractorView> {
    let mut views = load_views(path).with_context(|| format!("loading view {}", path.display()))?;
    if views.len() != 1 {
        bail!("{} holds {} views; expected one", path.display(), views.len());
    }
    Ok(views.remove(0))
}

fn save_views(views: &[ExtractorView], out: &Option<PathBuf>) -> Result<serde_json::Value> {
    match out {
        Some(path) => {
            fs::write(path, views_to_json(views)).with_context(|| format!("writing {}", path.display()))?;
            Ok(serde_json::Value::Null)
        }
        None => Ok(serde_json::from_str(&views_to_json(views))?),
    }
}

pub fn run(cmd: ExtCmd, limits: &Limits) -> Result<Outcome> {
    match cmd {
        ExtCmd::Check {
            view,
            k_size,
            eps,
            verifier,
            samples,
            seed,
            prefix,
        } => {
            let mut v = load_one(&view)?;
            if let Some(k) = k_size {
                v = v.with_k_size(k)?;
            }
            if let Some(e) = eps {
                v = ExtractorView::from_graph(v.graph().clone(), v.k_size(), e)?;
            }
            if verifier == "sampled" && seed.is_none() {
                bail!("the sampled verifier needs --seed");
            }
            let registry = extractor_verifiers(samples, seed.unwrap_or(0));
            let chosen = registry.get(&verifier)?;
            let params = json!({
                "view": view,
                "K": v.k_size(),
                "eps": format_rational(&v.eps()),
                "verifier": verifier,
                "samples": (verifier == "sampled").then_some(samples),
                "prefix": prefix,
            });
            let out = match prefix {
                Some(k) => {
                    let levels = is_prefix_extractor(&v, k, chosen, limits)?;
                    let proven = prefix_verdict_ok(&levels);
                    let ok = !levels.iter().any(|l| l.verdict.is_witness());
                    Outcome::new(params, json!({"prefix_extractor": proven, "levels": levels}), ok)?
                }
                None => {
                    let verdict = chosen.verify(&v, limits)?;
                    let ok = !verdict.is_witness();
                    Outcome::new(params, json!({"extractor": verdict.is_ok(), "verdict": verdict}), ok)?
                }
            };
            Ok(match seed {
                Some(s) if verifier == "sampled" => out.seeded(s),
                _ => out,
            })
        }
        ExtCmd::Search {
            n,
            k,
            m,
            d,
            eps,
            seed,
            max_attempts,
            prefix,
            out,
        } => {
            let p = SearchParams::new(n, k, m, d, eps)?;
            let found = random_extractor_search(p, seed, max_attempts, prefix, limits)?;
            let outcome = json!({
                "found": true,
                "attempts": found.attempts,
                "view": save_views(std::slice::from_ref(&found.view), &out)?,
            });
            let params = json!({"n": n, "k": k, "m": m, "d": d, "eps": format_rational(&eps),
                "max_attempts": max_attempts, "prefix": prefix});
            Ok(Outcome::new(params, outcome, true)?
                .seeded(seed)
                .artifact(out.as_deref()))
        }
        ExtCmd::Hazards {
            view,
            set,
            sweep,
            bad_factor,
        } => {
            let v = load_one(&view)?;
            let bf = bad_factor.unwrap_or_else(default_bad_factor);
            let params = json!({"view": view, "set": set, "sweep": sweep, "bad_factor": format_rational(&bf)});
            match (set, sweep) {
                (Some(s), false) => {
                    let report = hazard_report(&v, &s, bf)?;
                    Outcome::new(params, report, true)
                }
                (None, true) => {
                    let s = hazard_sweep(&v, bf, limits)?;
                    let ok = s.clean();
                    Outcome::new(params, s, ok)
                }
                _ => bail!("give exactly one of --set or --sweep"),
            }
        }
        ExtCmd::Degree {
            big_n,
            k_size,
            big_m,
            eps,
        } => {
            let choice = optimal_degree(big_n, k_size, big_m, eps)?;
            let params = json!({"N": big_n, "K": k_size, "M": big_m, "eps": format_rational(&eps)});
            Outcome::new(params, choice, true)
        }
        ExtCmd::Pbound { n, k, m, d, eps, span } => {
            let params = json!({"n": n, "k": k, "m": m, "d": d, "eps": format_rational(&eps), "span": span});
            match (d, span) {
                (Some(d), None) => {
                    let bound = prefix_failure_bound(n, k, m, d, eps)?;
                    Outcome::new(params, json!({"bound": bound, "below_one": bound < 1.0}), true)
                }
                (None, Some(span)) => {
                    let table = (1..=span)
                        .map(|d| Ok(json!({"d": d, "bound": prefix_failure_bound(n, k, m, d, eps)?})))
                        .collect::<Result<Vec<_>>>()?;
                    let minimal = minimal_prefix_degree(n, k, m, eps, span)?;
                    Outcome::new(params, json!({"table": table, "minimal_d": minimal}), minimal.is_some())
                }
                _ => bail!("give exactly one of --d or --span"),
            }
        }
        ExtCmd::Stack {
            n,
            k,
            m,
            d,
            eps,
            seed,
            max_attempts,
            out,
        } => {
            let p = SearchParams::new(n, k, m, d, eps)?;
            let stack = search_layer_stack(p, seed, max_attempts, limits)?;
            let thresholds: Vec<u64> = stack.views.iter().map(|v| v.k_size()).collect();
            let outcome = json!({
                "layers": stack.views.len(),
                "thresholds": thresholds,
                "attempts": stack.attempts,
                "views": save_views(&stack.views, &out)?,
            });
            let params = json!({"n": n, "k": k, "m": m, "d": d, "eps": format_rational(&eps),
                "max_attempts": max_attempts});
            Ok(Outcome::new(params, outcome, true)?
                .seeded(seed)
                .artifact(out.as_deref()))
        }
    }
}
