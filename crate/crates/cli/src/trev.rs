use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Subcommand;
use serde_json::json;

use omex_core::bits::{format_bits, parse_bits};
use omex_core::ratio::{format_rational, Rational};
use omex_core::trevisan::{greedy_weak_design, restrict, trevisan_eval, verify_weak_design, CodeTable, WeakDesign};
use omex_core::Limits;

use crate::rational;
use crate::report::Outcome;

#[derive(Subcommand)]
pub enum TrevCmd {
    /// Build a weak design greedily, or verify one from a file.
    Design {
        /// Verify this design instead of building one.
        #[arg(long, conflicts_with_all = ["l", "m", "d", "seed"])]
        verify: Option<PathBuf>,
        /// Block size.
        #[arg(long, required_unless_present = "verify")]
        l: Option<usize>,
        /// Number of sets.
        #[arg(long, required_unless_present = "verify")]
        m: Option<usize>,
        /// Universe size.
        #[arg(long, required_unless_present = "verify")]
        d: Option<usize>,
        #[arg(long, required_unless_present = "verify")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 50)]
        restarts: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the extractor on message u and seed y.
    Eval {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        u: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_parser = rational, default_value = "1/4")]
        delta: Rational,
    },
    /// List-decode a Hadamard word.
    Decode {
        #[arg(long)]
        word: String,
        #[arg(long, value_parser = rational, default_value = "1/4")]
        delta: Rational,
    },
}

fn message_len(word_len: usize) -> Result<u32> {
    omex_core::bits::exact_log2(word_len as u128).context("word length must be a power of two")
}

pub fn run(cmd: TrevCmd, _limits: &Limits) -> Result<Outcome> {
    match cmd {
        TrevCmd::Design { verify: Some(path), .. } => {
            let design = WeakDesign::load(&path)?;
            let verdict = verify_weak_design(&design);
            let ok = verdict.is_ok();
            Outcome::new(
                json!({"verify": path}),
                json!({"m": design.m(), "verdict": verdict}),
                ok,
            )
        }
        TrevCmd::Design {
            l,
            m,
            d,
            seed,
            restarts,
            out,
            ..
        } => {
            let (l, m, d, seed) = (l.unwrap(), m.unwrap(), d.unwrap(), seed.unwrap());
            let design = greedy_weak_design(l, m, d, seed, restarts)?;
            let verdict = verify_weak_design(&design);
            let ok = verdict.is_ok();
            let embedded = match &out {
                Some(path) => {
                    std::fs::write(path, serde_json::to_string_pretty(&design)? + "\n")
                        .with_context(|| format!("writing {}", path.display()))?;
                    serde_json::Value::Null
                }
                None => serde_json::to_value(&design)?,
            };
            let params = json!({"l": l, "m": m, "d": d, "restarts": restarts});
            Ok(
                Outcome::new(params, json!({"verdict": verdict, "design": embedded}), ok)?
                    .seeded(seed)
                    .artifact(out.as_deref()),
            )
        }
        TrevCmd::Eval { design, u, y, delta } => {
            let w = WeakDesign::load(&design)?;
            let u_bits = parse_bits(&u)?;
            let y_bits = parse_bits(&y)?;
            let code = CodeTable::new(u_bits.len() as u32, delta)?;
            let output = trevisan_eval(&code, &w, &u_bits, &y_bits)?;
            let restrictions = w
                .sets
                .iter()
                .map(|s| restrict(&y_bits, s).map(|r| format_bits(&r)))
                .collect::<omex_core::Result<Vec<_>>>()?;
            let params = json!({"design": design, "u": u, "y": y, "delta": format_rational(&delta)});
            Outcome::new(
                params,
                json!({"output": format_bits(&output), "restrictions": restrictions}),
                true,
            )
        }
        TrevCmd::Decode { word, delta } => {
            let bits = parse_bits(&word)?;
            let code = CodeTable::new(message_len(bits.len())?, delta)?;
            let list: Vec<String> = code.list_decode(&bits)?.iter().map(|m| format_bits(m)).collect();
            let params = json!({"word": word, "delta": format_rational(&delta)});
            Outcome::new(params, json!({"count": list.len(), "messages": list}), true)
        }
    }
}
