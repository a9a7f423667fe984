//! Ceilings on exhaustive searches.
//!
//! Defaults can be overridden through the `OMEX_LIMITS` environment variable,
//! a comma-separated list of `key=value` pairs, e.g.
//! `OMEX_LIMITS=exhaustive_left=20,subsets=1000000`.

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "OMEX_LIMITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest left part for which Hall subsets are enumerated naively.
    pub exhaustive_left: usize,
    /// Budget on subsets visited by a single Hall or extractor check.
    pub subsets: u128,
    /// Budget on distinct positions explored by the on-line game search.
    pub game_positions: u128,
    /// Budget on strategy-tree nodes materialized after a winning search.
    pub strategy_nodes: u128,
    /// Largest left part for which random graphs are generated.
    pub generated_left: usize,
    /// Largest right part for which random graphs are generated.
    pub generated_right: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exhaustive_left: 16,
            subsets: 20_000_000,
            game_positions: 5_000_000,
            strategy_nodes: 1_000_000,
            generated_left: 1 << 16,
            generated_right: 1 << 24,
        }
    }
}

impl Limits {
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("{ENV_VAR}: expected key=value, got `{item}`")))?;
            let value: u128 = value
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("{ENV_VAR}: `{value}` is not a number")))?;
            let as_usize = || usize::try_from(value).map_err(|_| Error::domain(format!("{ENV_VAR}: {key} too large")));
            match key.trim() {
                "exhaustive_left" => self.exhaustive_left = as_usize()?,
                "subsets" => self.subsets = value,
                "game_positions" => self.game_positions = value,
                "strategy_nodes" => self.strategy_nodes = value,
                "generated_left" => self.generated_left = as_usize()?,
                "generated_right" => self.generated_right = as_usize()?,
                other => return Err(Error::domain(format!("{ENV_VAR}: unknown key `{other}`"))),
            }
        }
        Ok(self)
    }

    pub(crate) fn guard(what: &'static str, value: u128, limit: u128) -> Result<()> {
        if value > limit {
            Err(Error::LimitExceeded { what, value, limit })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let l = Limits::default()
            .with_overrides("exhaustive_left=20, subsets=7")
            .unwrap();
        assert_eq!(l.exhaustive_left, 20);
        assert_eq!(l.subsets, 7);
        assert_eq!(l.game_positions, Limits::default().game_positions);
    }

    #[test]
    fn bad_overrides_rejected() {
        assert!(Limits::default().with_overrides("nope=1").is_err());
        assert!(Limits::default().with_overrides("subsets").is_err());
        assert!(Limits::default().with_overrides("subsets=x").is_err());
    }
}
