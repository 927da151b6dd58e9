use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("config field `{0}` must be positive")]
pub struct ConfigError(pub &'static str);

/// Budgets and knobs shared by the census, the oracles and the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Most subspaces a census may enumerate.
    pub max_subspaces: u64,
    /// Largest `|K|` for orbit enumeration.
    pub max_field_order: u64,
    /// Largest `|GL(n, p)|` the pseudo-isometry oracle will sweep.
    pub gl_guard: u64,
    pub seed: u64,
    /// Worker threads; `None` lets the pool decide.
    pub workers: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_subspaces: 1_000_000,
            max_field_order: 531_441,
            gl_guard: 30_000_000,
            seed: 0x5eed,
            workers: None,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_subspaces == 0 {
            return Err(ConfigError("max_subspaces"));
        }
        if self.max_field_order == 0 {
            return Err(ConfigError("max_field_order"));
        }
        if self.gl_guard == 0 {
            return Err(ConfigError("gl_guard"));
        }
        if self.workers == Some(0) {
            return Err(ConfigError("workers"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_zero_budgets_do_not() {
        assert!(Config::default().validate().is_ok());
        let c = Config { max_subspaces: 0, ..Config::default() };
        assert_eq!(c.validate(), Err(ConfigError("max_subspaces")));
        let parsed: Config = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(parsed.seed, 7);
        assert_eq!(parsed.max_subspaces, 1_000_000);
    }
}
