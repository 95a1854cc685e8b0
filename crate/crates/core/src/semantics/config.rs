use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopViewPolicy {
    FirstRow,
    RequireSingleton,
}

/// Execution knobs whose values are not fixed by the function definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecConfig {
    /// `round_eq` accepts |a - b| within this fraction of |b|.
    pub round_eq_relative_tol: f64,
    /// Absolute floor for `round_eq`. `None` means half a unit in the last
    /// decimal place written in the reference operand.
    pub round_eq_absolute_floor: Option<f64>,
    /// `most_*` holds when strictly more than this fraction of rows satisfy.
    pub most_threshold: f64,
    pub hop_view_policy: HopViewPolicy,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            round_eq_relative_tol: 0.05,
            round_eq_absolute_floor: None,
            most_threshold: 0.5,
            hop_view_policy: HopViewPolicy::FirstRow,
        }
    }
}

impl ExecConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.most_threshold > 0.0 && self.most_threshold < 1.0) {
            return Err(format!("most_threshold must be in (0, 1), got {}", self.most_threshold));
        }
        if !(self.round_eq_relative_tol >= 0.0) {
            return Err("round_eq_relative_tol must be >= 0".into());
        }
        if self.round_eq_absolute_floor.is_some_and(|f| !(f >= 0.0)) {
            return Err("round_eq_absolute_floor must be >= 0".into());
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid { line: 0, message: format!("{}: {e}", path.display()) })?;
        text.parse()
    }
}

/// `key = value` lines; `#` starts a comment. Unset keys keep defaults.
impl FromStr for ExecConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut cfg = ExecConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let invalid = |message: String| ConfigError::Invalid { line: line_no, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| invalid(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let number = || value.parse::<f64>().map_err(|_| invalid(format!("`{value}` is not a number")));
            match key {
                "round_eq_relative_tol" => cfg.round_eq_relative_tol = number()?,
                "round_eq_absolute_floor" => {
                    cfg.round_eq_absolute_floor = if value == "auto" { None } else { Some(number()?) }
                }
                "most_threshold" => cfg.most_threshold = number()?,
                "hop_view_policy" => {
                    cfg.hop_view_policy = match value {
                        "first_row" => HopViewPolicy::FirstRow,
                        "require_singleton" => HopViewPolicy::RequireSingleton,
                        other => return Err(invalid(format!("unknown hop_view_policy `{other}`"))),
                    }
                }
                other => return Err(invalid(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate().map_err(|message| ConfigError::Invalid { line: 0, message })?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let cfg: ExecConfig = "# knobs\nround_eq_relative_tol = 0.1\nmost_threshold=0.34 # a third\n\nhop_view_policy = require_singleton\nround_eq_absolute_floor = 2"
            .parse()
            .unwrap();
        assert_eq!(cfg.round_eq_relative_tol, 0.1);
        assert_eq!(cfg.most_threshold, 0.34);
        assert_eq!(cfg.hop_view_policy, HopViewPolicy::RequireSingleton);
        assert_eq!(cfg.round_eq_absolute_floor, Some(2.0));
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!("".parse::<ExecConfig>().unwrap(), ExecConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!("most_threshold = 1.0".parse::<ExecConfig>().is_err());
        assert!("most_threshold = 0".parse::<ExecConfig>().is_err());
        assert!("round_eq_relative_tol = -1".parse::<ExecConfig>().is_err());
        assert!("colour = blue".parse::<ExecConfig>().is_err());
        let err = "\nmost_threshold".parse::<ExecConfig>().unwrap_err();
        assert_eq!(err, ConfigError::Invalid { line: 2, message: "expected key = value, got `most_threshold`".into() });
    }
}
