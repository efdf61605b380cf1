//! Raw transcript cleaning.
//!
//! A raw document pair goes through five steps in order: NFKC
//! normalization, language check against the declared tag, sentence
//! splitting on terminal punctuation (documents without any are rejected),
//! meta-token removal, and the sentence-count balance check.

use std::fs;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{pair_id, Document, DocumentPair, Language};
use crate::translate::run_line_command;
use crate::{Error, Result};

pub const DEFAULT_META_PATTERNS: [&str; 3] = ["[Music]", "<<", ">>"];
pub const DEFAULT_TERMINAL_PUNCT: [char; 6] = ['.', '!', '?', '。', '！', '？'];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaPattern {
    Literal(String),
    Regex(String),
}

impl MetaPattern {
    /// `re:` prefix selects a regular expression, anything else is literal.
    pub fn parse(s: &str) -> Self {
        match s.strip_prefix("re:") {
            Some(re) => MetaPattern::Regex(re.to_string()),
            None => MetaPattern::Literal(s.to_string()),
        }
    }

    fn to_regex_source(&self) -> String {
        match self {
            MetaPattern::Literal(s) => regex::escape(s),
            MetaPattern::Regex(s) => format!("(?:{s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    RuleBased,
    /// Command reading the document as one line on stdin and printing a
    /// language tag.
    External { command: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningConfig {
    pub meta_patterns: Vec<MetaPattern>,
    pub imbalance_factor: f64,
    pub terminal_punct: Vec<char>,
    pub detector: Detector,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            meta_patterns: DEFAULT_META_PATTERNS.iter().map(|s| MetaPattern::Literal(s.to_string())).collect(),
            imbalance_factor: 2.0,
            terminal_punct: DEFAULT_TERMINAL_PUNCT.to_vec(),
            detector: Detector::RuleBased,
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.imbalance_factor.is_nan() || self.imbalance_factor < 1.0 {
            return Err(Error::Config(format!("imbalance factor {} must be >= 1", self.imbalance_factor)));
        }
        if self.terminal_punct.is_empty() {
            return Err(Error::Config("terminal punctuation set is empty".into()));
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<Cleaner> {
        self.validate()?;
        for p in &self.meta_patterns {
            if let MetaPattern::Regex(src) = p {
                Regex::new(src).map_err(|source| Error::Pattern {
                    pattern: src.clone(),
                    source,
                })?;
            }
        }
        let meta = if self.meta_patterns.is_empty() {
            None
        } else {
            let source = self
                .meta_patterns
                .iter()
                .map(MetaPattern::to_regex_source)
                .collect::<Vec<_>>()
                .join("|");
            Some(Regex::new(&source).map_err(|source_err| Error::Pattern {
                pattern: source.clone(),
                source: source_err,
            })?)
        };
        Ok(Cleaner {
            config: self.clone(),
            meta,
        })
    }
}

pub fn normalize_encoding(text: &str) -> String {
    text.nfkc().collect()
}

fn is_kana(c: char) -> bool {
    matches!(c, '\u{3040}'..='\u{309F}' | '\u{30A0}'..='\u{30FF}' | '\u{31F0}'..='\u{31FF}' | '\u{FF66}'..='\u{FF9F}')
}

fn is_ideograph(c: char) -> bool {
    matches!(c, '\u{4E00}'..='\u{9FFF}' | '\u{3400}'..='\u{4DBF}' | '\u{F900}'..='\u{FAFF}' | '\u{20000}'..='\u{2A6DF}')
}

/// Character-class rule: kana marks Japanese, ideographs without kana mark
/// Chinese, Latin letters mark English.
pub fn detect_language(text: &str) -> Result<Language> {
    if text.trim().is_empty() {
        return Err(Error::Empty("text for language detection".into()));
    }
    let (mut latin, mut kana, mut han) = (0usize, 0usize, 0usize);
    for c in text.chars() {
        if c.is_ascii_alphabetic() {
            latin += 1;
        } else if is_kana(c) {
            kana += 1;
        } else if is_ideograph(c) {
            han += 1;
        }
    }
    let total = (latin + kana + han) as f64;
    Ok(if kana >= 5 && kana as f64 >= 0.05 * total {
        Language::Ja
    } else if han > latin && kana < 5 {
        Language::Zh
    } else if latin > han && kana < 5 {
        Language::En
    } else {
        Language::Other
    })
}

/// Splits after terminal punctuation. For space-delimited languages the
/// punctuation must be followed by whitespace or the end of the line; for
/// Japanese and Chinese it always ends a sentence. Consecutive terminal
/// marks stay together.
pub fn split_sentences(line: &str, language: Language) -> Vec<String> {
    split_with(line, language, &DEFAULT_TERMINAL_PUNCT)
}

fn split_with(line: &str, language: Language, terminals: &[char]) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = line.char_indices().peekable();
    while let Some((idx, c)) = chars.next() {
        if !terminals.contains(&c) {
            continue;
        }
        let mut end = idx + c.len_utf8();
        while let Some(&(i, next)) = chars.peek() {
            if terminals.contains(&next) {
                end = i + next.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace() || language.is_unsegmented(),
        };
        if boundary {
            push_trimmed(&mut out, &line[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut out, &line[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, segment: &str) {
    let s = segment.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Removes every configured meta pattern; `None` when nothing but
/// whitespace remains.
pub fn strip_meta(sentence: &str, config: &CleaningConfig) -> Result<Option<String>> {
    Ok(config.compile()?.strip(sentence).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    LanguageMismatch,
    NoPunctuation,
    Imbalanced,
    /// No non-blank content at all.
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    Keep,
    Drop,
}

/// Drops when the larger side has at least `factor` times the sentences of
/// the smaller side, or either side is empty.
pub fn balance_counts(n: usize, m: usize, factor: f64) -> Balance {
    let (small, large) = (n.min(m), n.max(m));
    if small == 0 || large as f64 >= factor * small as f64 {
        Balance::Drop
    } else {
        Balance::Keep
    }
}

pub fn check_balance(pair: &DocumentPair, config: &CleaningConfig) -> Balance {
    balance_counts(pair.src.len(), pair.tgt.len(), config.imbalance_factor)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub course_id: String,
    pub lecture_id: String,
    pub language: Language,
    pub lines: Vec<String>,
}

impl RawDocument {
    /// Reads raw transcript lines; a leading byte-order mark is dropped.
    pub fn read(path: impl AsRef<Path>, course_id: &str, lecture_id: &str, language: Language) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Encoding { path: path.into() })?;
        let text = text.strip_prefix('\u{FEFF}').unwrap_or(&text);
        Ok(RawDocument {
            course_id: course_id.into(),
            lecture_id: lecture_id.into(),
            language,
            lines: text.lines().map(String::from).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub pair_id: String,
    pub course_id: String,
    pub lecture_id: String,
    pub language: Language,
    pub lines_in: usize,
    pub sentences_out: usize,
    pub meta_removed: usize,
    pub rejected_reason: Option<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub src: CleaningReport,
    pub tgt: CleaningReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Src,
    Tgt,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum CleanOutcome {
    Kept(DocumentPair, PairReport),
    Rejected {
        reason: RejectReason,
        /// Failing document; `None` for pair-level checks.
        side: Option<Side>,
        report: PairReport,
    },
}

/// Compiled form of a [`CleaningConfig`].
#[derive(Debug, Clone)]
pub struct Cleaner {
    config: CleaningConfig,
    meta: Option<Regex>,
}

struct CleanedDoc {
    sentences: Vec<String>,
    report: CleaningReport,
}

impl Cleaner {
    pub fn config(&self) -> &CleaningConfig {
        &self.config
    }

    /// Returns the residue (if any) and the number of removed matches.
    pub fn strip(&self, sentence: &str) -> (Option<String>, usize) {
        let (text, removed) = match &self.meta {
            Some(re) => {
                let removed = re.find_iter(sentence).count();
                (re.replace_all(sentence, " ").into_owned(), removed)
            }
            None => (sentence.to_string(), 0),
        };
        let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
        ((!collapsed.is_empty()).then_some(collapsed), removed)
    }

    pub fn detect(&self, text: &str) -> Result<Language> {
        match &self.config.detector {
            Detector::RuleBased => detect_language(text),
            Detector::External { command } => {
                let one_line = text.split_whitespace().collect::<Vec<_>>().join(" ");
                let out = run_line_command(command, &[one_line.as_str()])?;
                out[0].trim().parse()
            }
        }
    }

    fn clean_document(&self, raw: &RawDocument, pair_id: &str) -> Result<std::result::Result<CleanedDoc, (RejectReason, CleaningReport)>> {
        let mut report = CleaningReport {
            pair_id: pair_id.to_string(),
            course_id: raw.course_id.clone(),
            lecture_id: raw.lecture_id.clone(),
            language: raw.language,
            lines_in: raw.lines.len(),
            sentences_out: 0,
            meta_removed: 0,
            rejected_reason: None,
        };
        let reject = |mut report: CleaningReport, reason| {
            report.rejected_reason = Some(reason);
            Ok(Err((reason, report)))
        };
        let normalized: Vec<String> = raw.lines.iter().map(|l| normalize_encoding(l)).collect();
        let joined = normalized.join("\n");
        if joined.trim().is_empty() {
            return reject(report, RejectReason::Empty);
        }
        if self.detect(&joined)? != raw.language {
            return reject(report, RejectReason::LanguageMismatch);
        }
        if !joined.chars().any(|c| self.config.terminal_punct.contains(&c)) {
            return reject(report, RejectReason::NoPunctuation);
        }
        let mut sentences = Vec::new();
        for line in &normalized {
            for segment in split_with(line, raw.language, &self.config.terminal_punct) {
                let (kept, removed) = self.strip(&segment);
                report.meta_removed += removed;
                sentences.extend(kept);
            }
        }
        report.sentences_out = sentences.len();
        Ok(Ok(CleanedDoc { sentences, report }))
    }

    pub fn clean_pair(&self, raw_src: &RawDocument, raw_tgt: &RawDocument) -> Result<CleanOutcome> {
        if raw_src.lines.is_empty() || raw_tgt.lines.is_empty() {
            return Err(Error::Empty("raw document line list".into()));
        }
        let id = pair_id(&raw_src.course_id, &raw_src.lecture_id, raw_src.language, raw_tgt.language);
        let src = self.clean_document(raw_src, &id)?;
        let tgt = self.clean_document(raw_tgt, &id)?;
        let (src, tgt) = match (src, tgt) {
            (Ok(s), Ok(t)) => (s, t),
            (s, t) => {
                let (reason, side) = match (&s, &t) {
                    (Err((r, _)), _) => (*r, Side::Src),
                    (_, Err((r, _))) => (*r, Side::Tgt),
                    _ => unreachable!(),
                };
                let to_report = |d: std::result::Result<CleanedDoc, (RejectReason, CleaningReport)>| match d {
                    Ok(mut c) => {
                        c.report.sentences_out = 0;
                        c.report.rejected_reason = Some(reason);
                        c.report
                    }
                    Err((_, r)) => r,
                };
                return Ok(CleanOutcome::Rejected {
                    reason,
                    side: Some(side),
                    report: PairReport {
                        src: to_report(s),
                        tgt: to_report(t),
                    },
                });
            }
        };
        let mut report = PairReport {
            src: src.report,
            tgt: tgt.report,
        };
        if balance_counts(src.sentences.len(), tgt.sentences.len(), self.config.imbalance_factor) == Balance::Drop {
            for r in [&mut report.src, &mut report.tgt] {
                r.sentences_out = 0;
                r.rejected_reason = Some(RejectReason::Imbalanced);
            }
            return Ok(CleanOutcome::Rejected {
                reason: RejectReason::Imbalanced,
                side: None,
                report,
            });
        }
        let src_doc = Document::new(&raw_src.course_id, &raw_src.lecture_id, raw_src.language, src.sentences);
        let tgt_doc = Document::new(&raw_tgt.course_id, &raw_tgt.lecture_id, raw_tgt.language, tgt.sentences);
        let pair = DocumentPair::new(src_doc, tgt_doc)?;
        Ok(CleanOutcome::Kept(pair, report))
    }
}

pub fn clean_pair(raw_src: &RawDocument, raw_tgt: &RawDocument, config: &CleaningConfig) -> Result<CleanOutcome> {
    config.compile()?.clean_pair(raw_src, raw_tgt)
}
