//! Documents, document pairs and alignment results.
//!
//! Cleaned documents hold one sentence per line. Alignments are stored as
//! JSON lines, one chunk alignment per record:
//!
//! ```text
//! {"pair_id":"c1/l1/en-ja","src":[4,5],"tgt":[3],"score":0.91,"method":"dp"}
//! ```
//!
//! Gold files use the same record shape without `score` (and `method`).

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::similarity::builtin_tokens;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Ja,
    Zh,
    Other,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Ja => "ja",
            Language::Zh => "zh",
            Language::Other => "other",
        }
    }

    /// Languages written without spaces between words.
    pub fn is_unsegmented(self) -> bool {
        matches!(self, Language::Ja | Language::Zh)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "ja" => Ok(Language::Ja),
            "zh" => Ok(Language::Zh),
            "other" => Ok(Language::Other),
            _ => Err(Error::Config(format!("unknown language tag {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub course_id: String,
    pub lecture_id: String,
    pub language: Language,
    pub sentences: Vec<Sentence>,
}

impl Document {
    /// Builds a document, assigning indices in order and caching token
    /// counts with the language's default tokenizer.
    pub fn new<I, S>(course_id: impl Into<String>, lecture_id: impl Into<String>, language: Language, texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sentences = texts
            .into_iter()
            .enumerate()
            .map(|(index, text)| {
                let text = text.into();
                let token_count = builtin_tokens(language, &text).len();
                Sentence {
                    index,
                    text,
                    token_count,
                }
            })
            .collect();
        Document {
            course_id: course_id.into(),
            lecture_id: lecture_id.into(),
            language,
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(|s| s.text.as_str())
    }

    /// Sentences `range.start..=range.end` joined by a single space.
    pub fn chunk_text(&self, range: IndexRange) -> String {
        self.sentences[range.start..=range.end]
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Reads a cleaned document: one sentence per non-empty line.
pub fn read_document(path: impl AsRef<Path>, course_id: &str, lecture_id: &str, language: Language) -> Result<Document> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Encoding { path: path.into() })?;
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::Empty(format!("document {}", path.display())));
    }
    Ok(Document::new(course_id, lecture_id, language, lines))
}

/// One sentence per line, newline-terminated.
pub fn write_document(doc: &Document, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for s in &doc.sentences {
        out.push_str(&s.text);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn pair_id(course_id: &str, lecture_id: &str, src: Language, tgt: Language) -> String {
    format!("{course_id}/{lecture_id}/{src}-{tgt}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentPair {
    pub pair_id: String,
    pub src: Document,
    pub tgt: Document,
    /// `src` machine-translated into the target language.
    pub src_translated: Option<Document>,
    /// `tgt` machine-translated into the source language.
    pub tgt_translated: Option<Document>,
}

impl DocumentPair {
    pub fn new(src: Document, tgt: Document) -> Result<Self> {
        if src.language == tgt.language {
            return Err(Error::Language(format!(
                "both documents are {}",
                src.language
            )));
        }
        if src.course_id != tgt.course_id || src.lecture_id != tgt.lecture_id {
            return Err(Error::Config(format!(
                "documents belong to different lectures ({}/{} vs {}/{})",
                src.course_id, src.lecture_id, tgt.course_id, tgt.lecture_id
            )));
        }
        Ok(DocumentPair {
            pair_id: pair_id(&src.course_id, &src.lecture_id, src.language, tgt.language),
            src,
            tgt,
            src_translated: None,
            tgt_translated: None,
        })
    }

    pub fn with_src_translation(mut self, doc: Document) -> Result<Self> {
        check_translation(&self.src, &doc, self.tgt.language)?;
        self.src_translated = Some(doc);
        Ok(self)
    }

    pub fn with_tgt_translation(mut self, doc: Document) -> Result<Self> {
        check_translation(&self.tgt, &doc, self.src.language)?;
        self.tgt_translated = Some(doc);
        Ok(self)
    }
}

fn check_translation(original: &Document, translated: &Document, language: Language) -> Result<()> {
    if translated.len() != original.len() {
        return Err(Error::TranslationCount {
            expected: original.len(),
            actual: translated.len(),
        });
    }
    if translated.language != language {
        return Err(Error::Language(format!(
            "translation is {} but should be {}",
            translated.language, language
        )));
    }
    Ok(())
}

/// Inclusive index interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexRange {
    pub start: usize,
    pub end: usize,
}

impl IndexRange {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "empty range {start}..={end}");
        IndexRange { start, end }
    }

    pub fn single(i: usize) -> Self {
        IndexRange { start: i, end: i }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_single(&self) -> bool {
        self.start == self.end
    }

    pub fn indices(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }

    fn from_indices(indices: &[usize]) -> std::result::Result<Self, String> {
        let (&first, &last) = match (indices.first(), indices.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err("empty index list".into()),
        };
        if indices.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(format!("index list {indices:?} is not a contiguous ascending run"));
        }
        Ok(IndexRange::new(first, last))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkAlignment {
    pub src: IndexRange,
    pub tgt: IndexRange,
    pub score: f64,
}

impl ChunkAlignment {
    pub fn new(src: IndexRange, tgt: IndexRange, score: f64) -> Self {
        ChunkAlignment { src, tgt, score }
    }

    pub fn one_to_one(i: usize, j: usize, score: f64) -> Self {
        ChunkAlignment::new(IndexRange::single(i), IndexRange::single(j), score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Greedy,
    Flow,
    Dp,
    Gold,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Flow => "flow",
            Method::Dp => "dp",
            Method::Gold => "gold",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub pair_id: String,
    pub alignments: Vec<ChunkAlignment>,
    pub method: Method,
}

/// Gold annotations share the result type; `method` is [`Method::Gold`].
pub type GoldAlignment = AlignmentResult;

impl AlignmentResult {
    pub fn new(pair_id: impl Into<String>, method: Method, mut alignments: Vec<ChunkAlignment>) -> Self {
        sort_alignments(&mut alignments);
        AlignmentResult {
            pair_id: pair_id.into(),
            alignments,
            method,
        }
    }

    /// Checks the structural invariants of the result's method.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::InvalidAlignment {
            pair_id: self.pair_id.clone(),
            message,
        };
        match self.method {
            Method::Dp | Method::Gold => {
                let mut sorted = self.alignments.clone();
                sort_alignments(&mut sorted);
                for w in sorted.windows(2) {
                    let (a, b) = (&w[0], &w[1]);
                    if a.src.end >= b.src.start || a.tgt.end >= b.tgt.start {
                        return Err(fail(format!(
                            "chunks src {:?}/tgt {:?} and src {:?}/tgt {:?} overlap or cross",
                            a.src.indices(),
                            a.tgt.indices(),
                            b.src.indices(),
                            b.tgt.indices()
                        )));
                    }
                }
            }
            Method::Flow | Method::Greedy => {
                let mut seen_src = HashSet::new();
                let mut seen_tgt = HashSet::new();
                for a in &self.alignments {
                    if !a.src.is_single() || !a.tgt.is_single() {
                        return Err(fail(format!("{} alignments must be 1-to-1", self.method)));
                    }
                    if !seen_src.insert(a.src.start) {
                        return Err(fail(format!("source index {} repeats", a.src.start)));
                    }
                    if self.method == Method::Flow && !seen_tgt.insert(a.tgt.start) {
                        return Err(fail(format!("target index {} repeats", a.tgt.start)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn mean_score(&self) -> Option<f64> {
        if self.alignments.is_empty() {
            None
        } else {
            Some(self.alignments.iter().map(|a| a.score).sum::<f64>() / self.alignments.len() as f64)
        }
    }
}

fn sort_alignments(alignments: &mut [ChunkAlignment]) {
    alignments.sort_by_key(|a| (a.src.start, a.tgt.start));
}

#[derive(Serialize, Deserialize)]
struct Record {
    pair_id: String,
    src: Vec<usize>,
    tgt: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
}

/// Writes results as JSON lines. Records within a result are ordered by
/// source start; results keep the given order.
pub fn write_alignments<'a, I>(results: I, path: impl AsRef<Path>) -> Result<()>
where
    I: IntoIterator<Item = &'a AlignmentResult>,
{
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for result in results {
        result.validate()?;
        let mut alignments = result.alignments.clone();
        sort_alignments(&mut alignments);
        for a in &alignments {
            let gold = result.method == Method::Gold;
            let record = Record {
                pair_id: result.pair_id.clone(),
                src: a.src.indices(),
                tgt: a.tgt.indices(),
                score: (!gold).then_some(a.score),
                method: (!gold).then_some(result.method),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_alignment(result: &AlignmentResult, path: impl AsRef<Path>) -> Result<()> {
    write_alignments(std::iter::once(result), path)
}

/// Reads every result in a JSON-lines alignment file, grouped by pair id
/// in order of first appearance. Each result is validated.
pub fn read_alignments(path: impl AsRef<Path>) -> Result<Vec<AlignmentResult>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut results: Vec<AlignmentResult> = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Encoding { path: path.into() },
            _ => Error::io(path, e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.into(),
            line: line_no,
            message,
        };
        let record: Record = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let method = record.method.unwrap_or(if record.score.is_some() {
            Method::Dp
        } else {
            Method::Gold
        });
        let src = IndexRange::from_indices(&record.src).map_err(|m| parse_err(format!("src: {m}")))?;
        let tgt = IndexRange::from_indices(&record.tgt).map_err(|m| parse_err(format!("tgt: {m}")))?;
        let alignment = ChunkAlignment::new(src, tgt, record.score.unwrap_or(0.0));
        match results.iter_mut().find(|r| r.pair_id == record.pair_id) {
            Some(r) if r.method != method => {
                return Err(parse_err(format!(
                    "pair {} mixes methods {} and {}",
                    record.pair_id, r.method, method
                )))
            }
            Some(r) => r.alignments.push(alignment),
            None => results.push(AlignmentResult {
                pair_id: record.pair_id,
                alignments: vec![alignment],
                method,
            }),
        }
    }
    for r in &mut results {
        sort_alignments(&mut r.alignments);
        r.validate()?;
    }
    Ok(results)
}

/// Reads a file holding a single result. An empty file yields an empty
/// result with an empty pair id.
pub fn read_alignment(path: impl AsRef<Path>) -> Result<AlignmentResult> {
    let path = path.as_ref();
    let mut results = read_alignments(path)?;
    match results.len() {
        0 => Ok(AlignmentResult::new(String::new(), Method::Dp, Vec::new())),
        1 => Ok(results.remove(0)),
        k => Err(Error::Parse {
            path: path.into(),
            line: 0,
            message: format!("expected one pair, found {k}"),
        }),
    }
}
