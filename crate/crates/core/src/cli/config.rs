use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::AnalysisConfig;
use crate::ml::{DatasetConfig, ForestParams, LogregParams, SvmParams};

/// Sectioned TOML configuration. Missing sections and keys take their
/// defaults; command-line flags override whatever is set here.
///
/// ```toml
/// [analysis]
/// welch_segment = 4096
/// [analysis.thresholds]
/// s0 = 1.5
/// [dataset]
/// n_per_class = 50
/// [forest]
/// n_trees = 200
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub analysis: AnalysisConfig,
    pub dataset: DatasetConfig,
    pub logreg: LogregParams,
    pub forest: ForestParams,
    pub svm: SvmParams,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::param(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::param(e.message().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c = Config::parse("[dataset]\nn_per_class = 20\n[analysis.thresholds]\ns0 = 1.5\n").unwrap();
        assert_eq!(c.dataset.n_per_class, 20);
        assert_eq!(c.dataset.base_seed, 123);
        assert_eq!(c.analysis.thresholds.s0, 1.5);
        assert_eq!(c.analysis.welch_segment, 8192);
        assert_eq!(c.forest, ForestParams::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::parse("[dataset]\nsize = 3\n"), Err(Error::Parameter(_))));
        assert!(Config::parse("[nope]\n").is_err());
    }

    #[test]
    fn empty_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }
}
