//! Corpus manifest: a JSON file listing document pairs, with document paths
//! relative to the manifest's directory.
//!
//! ```json
//! {"pairs": [{"course_id": "c", "lecture_id": "l1",
//!             "src": {"language": "en", "path": "docs/c/l1.en"},
//!             "tgt": {"language": "ja", "path": "docs/c/l1.ja"},
//!             "src_translated": {"language": "ja", "path": "mt/c/l1.en-ja"}}]}
//! ```

use std::fs;
use std::path::{Component, Path, PathBuf};

use lectalign::corpus::{read_document, Document, DocumentPair, Language};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocRef {
    pub language: Language,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub course_id: String,
    pub lecture_id: String,
    pub src: DocRef,
    pub tgt: DocRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src_translated: Option<DocRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt_translated: Option<DocRef>,
}

impl PairEntry {
    pub fn pair_id(&self) -> String {
        lectalign::corpus::pair_id(&self.course_id, &self.lecture_id, self.src.language, self.tgt.language)
    }

    /// `course/lecture` as a relative path, rejecting ids that would escape
    /// the output directory.
    pub fn stem(&self) -> CliResult<PathBuf> {
        let mut out = PathBuf::new();
        for id in [&self.course_id, &self.lecture_id] {
            let p = Path::new(id);
            let ok = !id.is_empty() && p.components().all(|c| matches!(c, Component::Normal(_))) && p.components().count() == 1;
            if !ok {
                return Err(CliError::Data(format!("id {id:?} cannot be used as a file name")));
            }
            out.push(id);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub pairs: Vec<PairEntry>,
}

/// A manifest together with the directory its paths are relative to.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub base: PathBuf,
}

impl LoadedManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("manifest {}: {e}", path.display())))?;
        let mut seen = std::collections::BTreeSet::new();
        for p in &manifest.pairs {
            if !seen.insert(p.pair_id()) {
                return Err(CliError::Data(format!("duplicate pair {} in manifest", p.pair_id())));
            }
        }
        Ok(LoadedManifest {
            manifest,
            base: path.parent().unwrap_or(Path::new("")).to_path_buf(),
        })
    }

    pub fn resolve(&self, doc: &DocRef) -> PathBuf {
        self.base.join(&doc.path)
    }

    fn read_doc(&self, entry: &PairEntry, doc: &DocRef) -> CliResult<Document> {
        Ok(read_document(self.resolve(doc), &entry.course_id, &entry.lecture_id, doc.language)?)
    }

    /// Loads the documents of one entry, with any translations.
    pub fn load_pair(&self, entry: &PairEntry) -> CliResult<DocumentPair> {
        let mut pair = DocumentPair::new(self.read_doc(entry, &entry.src)?, self.read_doc(entry, &entry.tgt)?)?;
        if let Some(t) = &entry.src_translated {
            pair = pair.with_src_translation(self.read_doc(entry, t)?)?;
        }
        if let Some(t) = &entry.tgt_translated {
            pair = pair.with_tgt_translation(self.read_doc(entry, t)?)?;
        }
        Ok(pair)
    }
}

/// Path of `target` relative to `base_dir`, for writing into a manifest
/// that lives in `base_dir`.
pub fn relative_to(target: &Path, base_dir: &Path) -> CliResult<PathBuf> {
    let abs = |p: &Path| -> CliResult<PathBuf> {
        let p = if p.is_absolute() {
            p.to_path_buf()
        } else {
            std::env::current_dir().map_err(|e| io_error(p, e))?.join(p)
        };
        Ok(p.canonicalize().unwrap_or(p))
    };
    let (t, b) = (abs(target)?, abs(base_dir)?);
    Ok(pathdiff::diff_paths(&t, &b).unwrap_or(t))
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(course: &str, lecture: &str) -> PairEntry {
        PairEntry {
            course_id: course.into(),
            lecture_id: lecture.into(),
            src: DocRef { language: Language::En, path: "a.en".into() },
            tgt: DocRef { language: Language::Ja, path: "a.ja".into() },
            src_translated: None,
            tgt_translated: None,
        }
    }

    #[test]
    fn round_trip_and_load() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.en"), "Hello.\nWorld.\n").unwrap();
        fs::write(dir.path().join("a.ja"), "こんにちは。\n").unwrap();
        let m = Manifest { pairs: vec![entry("c", "l")] };
        let path = dir.path().join("manifest.json");
        write_manifest(&m, &path).unwrap();
        let loaded = LoadedManifest::read(&path).unwrap();
        assert_eq!(loaded.manifest, m);
        let pair = loaded.load_pair(&loaded.manifest.pairs[0]).unwrap();
        assert_eq!(pair.pair_id, "c/l/en-ja");
        assert_eq!((pair.src.len(), pair.tgt.len()), (2, 1));
    }

    #[test]
    fn duplicate_pairs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        write_manifest(&Manifest { pairs: vec![entry("c", "l"), entry("c", "l")] }, &path).unwrap();
        assert!(LoadedManifest::read(&path).is_err());
    }

    #[test]
    fn unsafe_ids_rejected() {
        assert!(entry("c", "l").stem().is_ok());
        for bad in ["..", "a/b", "", "/x"] {
            assert!(entry("c", bad).stem().is_err(), "{bad}");
        }
    }

    #[test]
    fn relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("in/x.en");
        let b = dir.path().join("out");
        fs::create_dir_all(&b).unwrap();
        assert_eq!(relative_to(&a, &b).unwrap(), PathBuf::from("../in/x.en"));
    }
}
