//! Machine translation through external translators.
//!
//! Nothing here translates by itself: a document is either piped through an
//! external command (one sentence per line on stdin, the same number of
//! lines expected on stdout), or read from a precomputed file whose line `i`
//! is the translation of sentence `i`. Command results are cached on disk,
//! addressed by a hash of the translator and the document content.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use sha2::{Digest, Sha256};

use crate::corpus::{Document, DocumentPair, Language};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslatorMode {
    /// Path template for per-document translation files.
    PrecomputedFile { path_template: String },
    /// Shell command template run once per document.
    ExternalCommand { command_template: String },
}

/// Templates may use `{src}`, `{tgt}`, `{course}` and `{lecture}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatorSpec {
    pub mode: TranslatorMode,
    pub source: Language,
    pub target: Language,
}

impl TranslatorSpec {
    pub fn command(command_template: impl Into<String>, source: Language, target: Language) -> Self {
        TranslatorSpec {
            mode: TranslatorMode::ExternalCommand {
                command_template: command_template.into(),
            },
            source,
            target,
        }
    }

    pub fn precomputed(path_template: impl Into<String>, source: Language, target: Language) -> Self {
        TranslatorSpec {
            mode: TranslatorMode::PrecomputedFile {
                path_template: path_template.into(),
            },
            source,
            target,
        }
    }

    pub fn fingerprint(&self) -> String {
        let desc = match &self.mode {
            TranslatorMode::PrecomputedFile { path_template } => format!("file:{path_template}"),
            TranslatorMode::ExternalCommand { command_template } => format!("cmd:{command_template}"),
        };
        let mut h = Sha256::new();
        h.update(format!("{desc}\0{}\0{}", self.source, self.target));
        hex::encode(h.finalize())
    }

    fn expand(&self, template: &str, doc: &Document) -> String {
        template
            .replace("{src}", self.source.as_str())
            .replace("{tgt}", self.target.as_str())
            .replace("{course}", &doc.course_id)
            .replace("{lecture}", &doc.lecture_id)
    }
}

/// Content-addressed translation cache directory.
#[derive(Debug, Clone)]
pub struct TranslationCache {
    dir: PathBuf,
}

impl TranslationCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(TranslationCache { dir })
    }

    /// Key over document identity, direction, translator fingerprint and
    /// sentence content.
    pub fn key(doc: &Document, spec: &TranslatorSpec) -> String {
        let mut h = Sha256::new();
        h.update(format!("{}/{}\0{}\0", doc.course_id, doc.lecture_id, spec.fingerprint()));
        for s in &doc.sentences {
            h.update(s.text.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.txt"))
    }

    pub fn get(&self, key: &str, expected_lines: usize) -> Result<Option<Vec<String>>> {
        let path = self.path(key);
        match fs::read_to_string(&path) {
            Ok(text) => {
                let lines = split_output_lines(&text);
                if lines.len() != expected_lines {
                    log::warn!("ignoring cache entry {} with {} lines", path.display(), lines.len());
                    return Ok(None);
                }
                Ok(Some(lines))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Writes through a temporary file and renames into place, so
    /// concurrent writers of one key leave one complete entry.
    pub fn put(&self, key: &str, lines: &[String]) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for l in lines {
            writeln!(tmp, "{l}").map_err(|e| Error::io(tmp.path(), e))?;
        }
        let dest = self.path(key);
        tmp.persist(&dest).map_err(|e| Error::io(&dest, e.error))?;
        Ok(())
    }
}

fn split_output_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect()
}

/// Runs `command` through `sh -c`, feeding `lines` on stdin, and returns
/// exactly as many output lines.
pub(crate) fn run_line_command(command: &str, lines: &[&str]) -> Result<Vec<String>> {
    let cmd_err = |message: String| Error::Command {
        command: command.to_string(),
        message,
    };
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| cmd_err(format!("spawn: {e}")))?;

    let mut input = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        input.push_str(l);
        input.push('\n');
    }
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        // A command that exits early closes the pipe; that is reported by
        // the status or the line count instead.
        let _ = stdin.write_all(input.as_bytes());
    });
    let output = child.wait_with_output().map_err(|e| cmd_err(format!("wait: {e}")))?;
    let _ = writer.join();
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(cmd_err(format!("exit status {}: {}", output.status, stderr.trim())));
    }
    let stdout = String::from_utf8(output.stdout).map_err(|_| cmd_err("stdout is not UTF-8".into()))?;
    let out = split_output_lines(&stdout);
    if out.len() != lines.len() {
        return Err(Error::TranslationCount {
            expected: lines.len(),
            actual: out.len(),
        });
    }
    Ok(out)
}

/// Translates every sentence of `doc`, one output sentence per input
/// sentence. The result is tagged with the target language.
pub fn translate_document(doc: &Document, spec: &TranslatorSpec, cache: Option<&TranslationCache>) -> Result<Document> {
    if doc.language != spec.source {
        return Err(Error::Language(format!(
            "translator expects {} input, document is {}",
            spec.source, doc.language
        )));
    }
    let lines = match &spec.mode {
        TranslatorMode::PrecomputedFile { path_template } => {
            let path = PathBuf::from(spec.expand(path_template, doc));
            read_precomputed(&path, doc.len())?
        }
        TranslatorMode::ExternalCommand { command_template } => {
            let key = TranslationCache::key(doc, spec);
            match cache.map(|c| c.get(&key, doc.len())).transpose()?.flatten() {
                Some(hit) => hit,
                None => {
                    let command = spec.expand(command_template, doc);
                    let input: Vec<&str> = doc.texts().collect();
                    let out = run_line_command(&command, &input)?;
                    if let Some(c) = cache {
                        c.put(&key, &out)?;
                    }
                    out
                }
            }
        }
    };
    Ok(Document::new(doc.course_id.clone(), doc.lecture_id.clone(), spec.target, lines))
}

fn read_precomputed(path: &Path, expected: usize) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Encoding { path: path.into() })?;
    let lines = split_output_lines(&text);
    if lines.len() != expected {
        return Err(Error::TranslationCount {
            expected,
            actual: lines.len(),
        });
    }
    Ok(lines)
}

/// Attaches the forward translation always and the backward translation
/// when `tgt_spec` is given.
pub fn attach_translations(
    pair: DocumentPair,
    src_spec: &TranslatorSpec,
    tgt_spec: Option<&TranslatorSpec>,
    cache: Option<&TranslationCache>,
) -> Result<DocumentPair> {
    for (spec, doc, other) in [(Some(src_spec), &pair.src, &pair.tgt), (tgt_spec, &pair.tgt, &pair.src)] {
        if let Some(spec) = spec {
            if spec.source != doc.language || spec.target != other.language {
                return Err(Error::Language(format!(
                    "{}: translator direction {}-{} does not fit documents {}-{}",
                    pair.pair_id, spec.source, spec.target, doc.language, other.language
                )));
            }
        }
    }
    let forward = translate_document(&pair.src, src_spec, cache)?;
    let backward = tgt_spec.map(|s| translate_document(&pair.tgt, s, cache)).transpose()?;
    let pair = pair.with_src_translation(forward)?;
    match backward {
        Some(b) => pair.with_tgt_translation(b),
        None => Ok(pair),
    }
}
