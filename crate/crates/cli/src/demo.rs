use anyhow::Result;
use clap::Subcommand;
use serde_json::json;

use omex_core::demo;
use omex_core::ratio::{format_rational, Rational};
use omex_core::Limits;

use crate::rational;
use crate::report::Outcome;

#[derive(Subcommand)]
pub enum DemoCmd {
    /// Hall's condition up to 2 holds on the 3x2 graph, but no on-line strategy exists.
    Counterexample,
    /// Hall failure frequency of random graphs against the union bound.
    Series {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Layered graphs over verified bases serve every request sequence.
    Om {
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        ns: Vec<u32>,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, default_value_t = 3)]
        bases: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Closed-form deviation against enumeration over all right sets.
    Deviation {
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Fewer than 2 eps K dangerous elements in every K-set of verified extractors.
    #[command(name = "lemma1")]
    Dangerous {
        #[command(flatten)]
        point: HazardArgs,
    },
    /// At most 4 eps K weakly dangerous elements in every K-set of verified extractors.
    #[command(name = "lemma3")]
    Weak {
        #[command(flatten)]
        point: HazardArgs,
    },
    /// Search a prefix extractor and re-verify each truncation level.
    Prefix {
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, value_parser = rational, default_value = "1/2")]
        eps: Rational,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        seed: u64,
    },
    /// Weak designs and Hadamard list decoding.
    Trevisan {
        #[arg(long, default_value_t = 2000)]
        words: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Matching and extractor fingerprints on random sets.
    Muchnik {
        #[arg(long, default_value_t = 500)]
        sets: u64,
        #[arg(long)]
        seed: u64,
    },
    /// One fingerprint decoded against two sets through p and its prefix q.
    TwoCond {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_parser = rational, default_value = "1/8")]
        eps: Rational,
        #[arg(long, default_value_t = 500)]
        pairs: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(clap::Args)]
pub struct HazardArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, value_parser = rational)]
    eps: Rational,
    #[arg(long, default_value_t = 20)]
    views: u64,
    #[arg(long)]
    seed: u64,
}

fn hazard_demo(p: HazardArgs, factor: i64, limits: &Limits) -> Result<Outcome> {
    let r = demo::hazards(&[(p.n, p.k, p.eps)], p.views, p.seed, limits)?;
    let bound = p.eps * Rational::from_integer(factor << p.k);
    let passed = if factor == 2 { r.dangerous_passed } else { r.weak_passed };
    let mut outcome = serde_json::to_value(&r)?;
    let key = if factor == 2 { "two_eps_K" } else { "four_eps_K" };
    if let Some(cases) = outcome["cases"].as_array_mut() {
        for case in cases {
            case[key] = json!(format_rational(&bound));
        }
    }
    outcome["passed"] = json!(passed);
    let params = json!({"n": p.n, "k": p.k, "eps": format_rational(&p.eps), "views": p.views});
    Ok(Outcome::new(params, outcome, passed)?.seeded(p.seed))
}

pub fn run(cmd: DemoCmd, limits: &Limits) -> Result<Outcome> {
    match cmd {
        DemoCmd::Counterexample => {
            let r = demo::counterexample(limits)?;
            let ok = r.passed;
            Outcome::new(json!({}), r, ok)
        }
        DemoCmd::Series { n, k, c, trials, seed } => {
            let r = demo::series(n, k, c, trials, seed, limits)?;
            let ok = r.passed;
            Ok(Outcome::new(json!({"n": n, "k": k, "c": c, "trials": trials}), r, ok)?.seeded(seed))
        }
        DemoCmd::Om { ns, c, bases, seed } => {
            let r = demo::online_matching(&ns, c, bases, seed, limits)?;
            let ok = r.passed;
            Ok(Outcome::new(json!({"ns": ns, "c": c, "bases": bases}), r, ok)?.seeded(seed))
        }
        DemoCmd::Deviation { cases, seed } => {
            let r = demo::deviation_oracle(cases, seed, limits)?;
            let ok = r.passed;
            Ok(Outcome::new(json!({"cases": cases}), r, ok)?.seeded(seed))
        }
        DemoCmd::Dangerous { point } => hazard_demo(point, 2, limits),
        DemoCmd::Weak { point } => hazard_demo(point, 4, limits),
        DemoCmd::Prefix { n, k, m, eps, d, seed } => {
            let r = demo::prefix(n, k, m, eps, d, seed, limits)?;
            let ok = r.passed;
            let params = json!({"n": n, "k": k, "m": m, "eps": format_rational(&eps), "d": d});
            Ok(Outcome::new(params, r, ok)?.seeded(seed))
        }
        DemoCmd::Trevisan { words, seed } => {
            let r = demo::trevisan(words, seed)?;
            let ok = r.passed;
            Ok(Outcome::new(json!({"words": words}), r, ok)?.seeded(seed))
        }
        DemoCmd::Muchnik { sets, seed } => {
            let r = demo::muchnik(sets, seed, limits)?;
            let ok = r.passed;
            Ok(Outcome::new(json!({"sets": sets}), r, ok)?.seeded(seed))
        }
        DemoCmd::TwoCond { n, k, eps, pairs, seed } => {
            let r = demo::two_conditions(n, k, eps, pairs, seed, limits)?;
            let ok = r.passed;
            let params = json!({"n": n, "k": k, "eps": format_rational(&eps), "pairs": pairs});
            Ok(Outcome::new(params, r, ok)?.seeded(seed))
        }
    }
}
