//! Optional TOML config file. Every key mirrors a command-line flag and
//! flags take precedence. Relative paths resolve against the directory of
//! the config file.
//!
//! ```toml
//! jobs = 4
//!
//! [paths]
//! manifest = "cleaned/manifest.json"
//! cache_dir = "cache"
//! embeddings = "vectors.txt"
//! gold = "gold.jsonl"
//! alignments = "align.jsonl"
//! log = "judgments.jsonl"
//! output = "out"
//! ui_dir = "ui/dist"
//!
//! [scorer]
//! kind = "cosine"        # cosine | l2 | bleu
//! symmetric = false
//! lowercase = false
//! bleu_epsilon = 0.01
//!
//! [aligner]
//! method = "dp"          # dp | flow | greedy
//! max_chunk = 3
//! skip_penalty = 0.0
//! min_pair_score = 0.2
//! flow_cost_scale = 1000000
//!
//! [split]
//! test_volume = 2000
//! dev_volume = 500
//! ratio = 0.5
//! discard_rejected = false
//!
//! [review]
//! port = 8080
//!
//! [cleaning]
//! imbalance_factor = 2.0
//! meta_patterns = ["[Music]", "<<", ">>", "re:\\(laughs?\\)"]
//! detector_command = "my-langid"
//!
//! [translate]
//! src_command = "my-mt --from {src} --to {tgt}"
//! tgt_command = "my-mt --from {src} --to {tgt}"
//! src_template = "mt/{course}/{lecture}.{src}-{tgt}"
//! tgt_template = "mt/{course}/{lecture}.{src}-{tgt}"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub scorer: ScorerSection,
    #[serde(default)]
    pub aligner: AlignerSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub review: ReviewSection,
    #[serde(default)]
    pub cleaning: CleaningSection,
    #[serde(default)]
    pub translate: TranslateSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub manifest: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerSection {
    pub kind: Option<String>,
    pub symmetric: Option<bool>,
    pub lowercase: Option<bool>,
    pub bleu_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignerSection {
    pub method: Option<String>,
    pub max_chunk: Option<usize>,
    pub skip_penalty: Option<f64>,
    pub min_pair_score: Option<f64>,
    pub flow_cost_scale: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub test_volume: Option<usize>,
    pub dev_volume: Option<usize>,
    pub ratio: Option<f64>,
    pub discard_rejected: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewSection {
    pub port: Option<u16>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningSection {
    pub imbalance_factor: Option<f64>,
    pub meta_patterns: Option<Vec<String>>,
    pub detector_command: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateSection {
    pub src_command: Option<String>,
    pub tgt_command: Option<String>,
    pub src_template: Option<String>,
    pub tgt_template: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let p = &mut config.paths;
        for slot in [
            &mut p.manifest,
            &mut p.cache_dir,
            &mut p.embeddings,
            &mut p.gold,
            &mut p.alignments,
            &mut p.log,
            &mut p.output,
            &mut p.ui_dir,
        ] {
            if let Some(rel) = slot.as_mut() {
                if rel.is_relative() {
                    *rel = base.join(&*rel);
                }
            }
        }
        Ok(config)
    }
}

/// Flag value, else config value.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Path that must be given by flag or config, named after its flag.
pub fn required_path(flag: Option<PathBuf>, file: Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    pick(flag, file).ok_or_else(|| CliError::Config(format!("--{name} is required (flag or config file)")))
}

/// Like [`required_path`], and the path must exist.
pub fn existing_path(flag: Option<PathBuf>, file: Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    let path = required_path(flag, file, name)?;
    if !path.exists() {
        return Err(CliError::Config(format!("--{name}: {} does not exist", path.display())));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "jobs = 2\n[paths]\nmanifest = \"m.json\"\nlog = \"/abs/log\"\n[aligner]\nmax_chunk = 2\n",
        )
        .unwrap();
        let c = FileConfig::load(&path).unwrap();
        assert_eq!(c.jobs, Some(2));
        assert_eq!(c.paths.manifest, Some(dir.path().join("m.json")));
        assert_eq!(c.paths.log, Some(PathBuf::from("/abs/log")));
        assert_eq!(c.aligner.max_chunk, Some(2));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        fs::write(&path, "[aligner]\nmax_chunks = 2\n").unwrap();
        assert!(matches!(FileConfig::load(&path), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_win() {
        assert_eq!(pick(Some(1), Some(2)), Some(1));
        assert_eq!(pick(None, Some(2)), Some(2));
        assert!(required_path(None, None, "manifest").is_err());
    }
}
