use std::fs;
use std::path::{Path, PathBuf};

use prkg_core::ingest::Thresholds;
use prkg_core::{access::ADMIN, RelationSpec};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_DATA: &str = "prkg.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub data_path: PathBuf,
    pub default_role: String,
    /// Overrides the thresholds stored in the snapshot when set.
    pub thresholds: Option<Thresholds>,
    pub rdf_base: String,
    pub extra_relations: Vec<RelationSpec>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_path: PathBuf::from(DEFAULT_DATA),
            default_role: ADMIN.to_string(),
            thresholds: None,
            rdf_base: prkg_core::store::DEFAULT_BASE.to_string(),
            extra_relations: Vec::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdFile {
    accept: Option<f64>,
    reject: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    data_path: Option<PathBuf>,
    default_role: Option<String>,
    rdf_base: Option<String>,
    thresholds: Option<ThresholdFile>,
    #[serde(default)]
    relations: Vec<RelationSpec>,
}

impl Config {
    pub fn parse(text: &str, origin: &Path) -> Result<Config, CliError> {
        let bad = |msg: String| CliError::Config(format!("{}: {msg}", origin.display()));
        let file: ConfigFile = toml::from_str(text).map_err(|e| bad(e.message().to_string()))?;
        let mut cfg = Config::default();
        if let Some(p) = file.data_path {
            if p.as_os_str().is_empty() {
                return Err(bad("data_path must not be empty".into()));
            }
            cfg.data_path = p;
        }
        if let Some(r) = file.default_role {
            cfg.default_role = r;
        }
        if let Some(b) = file.rdf_base {
            cfg.rdf_base = b;
        }
        if let Some(t) = file.thresholds {
            let d = Thresholds::default();
            let t = Thresholds::new(t.accept.unwrap_or(d.accept), t.reject.unwrap_or(d.reject))
                .map_err(|e| bad(format!("thresholds: {e}")))?;
            cfg.thresholds = Some(t);
        }
        cfg.extra_relations = file.relations;
        Ok(cfg)
    }

    /// Reads `path` if given; no path means all defaults.
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Config::parse(&text, p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config, CliError> {
        Config::parse(text, Path::new("prkg.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse("").unwrap(), Config::default());
    }

    #[test]
    fn partial_thresholds_keep_the_other_default() {
        let cfg = parse("[thresholds]\naccept = 0.8\n").unwrap();
        assert_eq!(cfg.thresholds, Some(Thresholds::new(0.8, 0.25).unwrap()));
    }

    #[test]
    fn inverted_thresholds_name_the_constraint() {
        let err = parse("[thresholds]\naccept = 0.3\nreject = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("reject"), "{err}");
    }

    #[test]
    fn relations_and_unknown_keys() {
        let cfg = parse("[[relations]]\nname = \"cites\"\nsrc = [\"Paper\"]\ndst = [\"Paper\"]\n").unwrap();
        assert_eq!(cfg.extra_relations[0].name, "cites");
        assert!(parse("colour = \"blue\"\n").is_err());
        assert!(parse("data_path = \"\"\n").is_err());
    }
}
