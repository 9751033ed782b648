//! Flat `key=value` configuration files for [`SeesawConfig`].
//!
//! Blank lines and lines starting with `#` are skipped. Keys are the
//! `SeesawConfig` field names; values are decimal numbers.

use std::path::Path;

use chsh_core::seesaw::SeesawConfig;
use serde_json::{Map, Value};

use crate::CliError;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "CHSH_SEED";

fn default_map() -> Map<String, Value> {
    match serde_json::to_value(SeesawConfig::default()) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("SeesawConfig serializes to an object"),
    }
}

/// `key = default` lines for every config key.
pub fn defaults_help() -> String {
    let mut out = String::from("Config keys (file format `key=value`, defaults shown):\n");
    for (k, v) in default_map() {
        out.push_str(&format!("  {k} = {v}\n"));
    }
    out.push_str(&format!(
        "\nSeed precedence: --seed, then ${SEED_ENV}, then the config file, then the default."
    ));
    out
}

/// Parses config text on top of the defaults.
pub fn parse_config(text: &str) -> Result<SeesawConfig, CliError> {
    let mut map = default_map();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim();
        if !map.contains_key(key) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        let value: Value = serde_json::from_str(value.trim())
            .ok()
            .filter(Value::is_number)
            .ok_or_else(|| {
                CliError::Usage(format!("config line {}: `{}` is not a number", n + 1, value.trim()))
            })?;
        map.insert(key.to_string(), value);
    }
    let cfg: SeesawConfig = serde_json::from_value(Value::Object(map))
        .map_err(|e| CliError::Usage(format!("config: {e}")))?;
    cfg.validate().map_err(|e| CliError::Usage(format!("config: {e}")))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SeesawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Resolves the final configuration: file, then environment seed, then flags.
pub fn resolve(
    file: Option<&Path>,
    env_seed: Option<&str>,
    seed: Option<u64>,
    restarts: Option<usize>,
) -> Result<SeesawConfig, CliError> {
    let mut cfg = match file {
        Some(p) => load_config(p)?,
        None => SeesawConfig::default(),
    };
    if let Some(s) = env_seed {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{s}` is not an unsigned integer")))?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("# nothing\n\n").unwrap(), SeesawConfig::default());
    }

    #[test]
    fn keys_override_defaults() {
        let cfg = parse_config("epsilon = 0.2\nrestarts=7\n  seed= 99 \nvalue_equality_tol=1e-9").unwrap();
        assert_eq!(cfg.epsilon, 0.2);
        assert_eq!(cfg.restarts, 7);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.value_equality_tol, 1e-9);
        assert_eq!(cfg.max_iterations, SeesawConfig::default().max_iterations);
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        for text in ["restarts", "colour=3", "restarts=many", "restarts=2.5", "epsilon=1.5", "restarts=0"] {
            assert!(matches!(parse_config(text), Err(CliError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn precedence_flag_env_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "seed=1\nrestarts=3\n").unwrap();
        assert_eq!(resolve(Some(&path), None, None, None).unwrap().seed, 1);
        assert_eq!(resolve(Some(&path), Some("5"), None, None).unwrap().seed, 5);
        let cfg = resolve(Some(&path), Some("5"), Some(9), Some(4)).unwrap();
        assert_eq!((cfg.seed, cfg.restarts), (9, 4));
        assert!(resolve(None, Some("x"), None, None).is_err());
    }

    #[test]
    fn help_lists_every_key() {
        let help = defaults_help();
        for key in default_map().keys() {
            assert!(help.contains(key.as_str()), "{key}");
        }
        assert!(help.contains("reseed_margin = 0.0001"));
    }
}
