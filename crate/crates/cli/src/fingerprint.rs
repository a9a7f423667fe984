use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use serde_json::json;

use omex_core::extractor::{default_bad_factor, load_views, ExtractorView};
use omex_core::fingerprint::{fingerprint_schemes, EnumeratedSet, Fingerprint, ProtocolInputs};
use omex_core::offline::ExhaustiveHall;
use omex_core::online::LayeredGraph;
use omex_core::ratio::{format_rational, Rational};
use omex_core::{BipartiteGraph, Limits};

use crate::rational;
use crate::report::Outcome;

/// Inputs shared by encoding and decoding.
#[derive(Args)]
pub struct Setup {
    /// match, ext, or two.
    #[arg(long)]
    flavor: String,
    /// Base graph for the match flavor; layered with k + 1 copies.
    #[arg(long, required_if_eq("flavor", "match"))]
    graph: Option<PathBuf>,
    #[arg(long, required_if_eq("flavor", "match"))]
    k: Option<u32>,
    /// View file: a layer stack for ext, one prefix view for two.
    #[arg(long)]
    views: Option<PathBuf>,
    /// Enumerated set file.
    #[arg(long)]
    set: PathBuf,
    /// Second set for the two flavor.
    #[arg(long, required_if_eq("flavor", "two"))]
    set2: Option<PathBuf>,
    #[arg(long, value_parser = rational)]
    bad_factor: Option<Rational>,
}

#[derive(Subcommand)]
pub enum FpCmd {
    /// Fingerprint one member of the set.
    Encode {
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        target: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the member behind a fingerprint.
    Decode {
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        fingerprint: PathBuf,
        /// Expected member; the run fails when any route disagrees.
        #[arg(long)]
        target: Option<usize>,
    },
}

struct Loaded {
    layered: Option<LayeredGraph>,
    views: Vec<ExtractorView>,
    set: EnumeratedSet,
    set2: Option<EnumeratedSet>,
    bad_factor: Rational,
}

impl Loaded {
    fn new(s: &Setup, limits: &Limits) -> Result<Self> {
        let layered = match (&s.graph, s.k) {
            (Some(path), Some(k)) => {
                let base = BipartiteGraph::load(path).with_context(|| format!("loading graph {}", path.display()))?;
                Some(LayeredGraph::new(base, k, &ExhaustiveHall, limits)?)
            }
            _ => None,
        };
        let views = match &s.views {
            Some(path) => load_views(path).with_context(|| format!("loading views {}", path.display()))?,
            None => Vec::new(),
        };
        let set = EnumeratedSet::load(&s.set)?;
        let set2 = s.set2.as_ref().map(EnumeratedSet::load).transpose()?;
        Ok(Loaded {
            layered,
            views,
            set,
            set2,
            bad_factor: s.bad_factor.unwrap_or_else(default_bad_factor),
        })
    }

    fn inputs(&self) -> ProtocolInputs<'_> {
        ProtocolInputs {
            layered: self.layered.as_ref(),
            views: &self.views,
            set: &self.set,
            set2: self.set2.as_ref(),
            bad_factor: self.bad_factor,
        }
    }
}

fn params(s: &Setup) -> serde_json::Value {
    json!({
        "flavor": s.flavor,
        "graph": s.graph,
        "k": s.k,
        "views": s.views,
        "set": s.set,
        "set2": s.set2,
        "bad_factor": format_rational(&s.bad_factor.unwrap_or_else(default_bad_factor)),
    })
}

pub fn run(cmd: FpCmd, limits: &Limits) -> Result<Outcome> {
    let schemes = fingerprint_schemes();
    match cmd {
        FpCmd::Encode { setup, target, out } => {
            let scheme = schemes.get(&setup.flavor)?;
            let loaded = Loaded::new(&setup, limits)?;
            let fp = scheme.encode(&loaded.inputs(), target)?;
            let ok = fp.within_bounds();
            let embedded = match &out {
                Some(path) => {
                    fs::write(path, serde_json::to_string_pretty(&fp)? + "\n")
                        .with_context(|| format!("writing {}", path.display()))?;
                    serde_json::Value::Null
                }
                None => serde_json::to_value(&fp)?,
            };
            let mut p = params(&setup);
            p["target"] = json!(target);
            let outcome = json!({"within_bounds": ok, "bits": fp.accounts(), "fingerprint": embedded});
            Ok(Outcome::new(p, outcome, ok)?.artifact(out.as_deref()))
        }
        FpCmd::Decode {
            setup,
            fingerprint,
            target,
        } => {
            let scheme = schemes.get(&setup.flavor)?;
            let loaded = Loaded::new(&setup, limits)?;
            let text = fs::read_to_string(&fingerprint)
                .with_context(|| format!("reading fingerprint {}", fingerprint.display()))?;
            let fp = Fingerprint::from_json_str(&text)?;
            let recovered = scheme.decode(&loaded.inputs(), &fp)?;
            let ok = target.is_none_or(|t| recovered.iter().all(|r| r.left == t));
            let mut p = params(&setup);
            p["fingerprint"] = json!(fingerprint);
            p["target"] = json!(target);
            Outcome::new(
                p,
                json!({"recovered": recovered, "matches_target": target.map(|_| ok)}),
                ok,
            )
        }
    }
}
