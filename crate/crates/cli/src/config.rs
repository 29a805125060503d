//! Settings from a TOML file. Keys are the long flag names; flags given on
//! the command line win, and `QACM_SEED` wins over both for the seed.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub no_timestamp: Option<bool>,
    pub sequential: Option<bool>,
    pub cmax: Option<i64>,
    pub seed: Option<u64>,
    pub margin: Option<i64>,
    pub tmin: Option<i64>,
    pub tmax: Option<i64>,
    pub sheaf: Option<String>,
    pub component: Option<u8>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// `QACM_SEED`, if set. A malformed value is an error rather than ignored.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var("QACM_SEED") {
        Ok(s) => s.trim().parse().map(Some).with_context(|| format!("QACM_SEED={s:?} is not a non-negative integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading QACM_SEED"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_match_flags() {
        let c: FileConfig = toml::from_str("cmax = 3\nseed = 9\nno-timestamp = true\nformat = \"csv\"").unwrap();
        assert_eq!(c.cmax, Some(3));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.no_timestamp, Some(true));
        assert!(toml::from_str::<FileConfig>("c_max = 3").is_err());
    }
}
