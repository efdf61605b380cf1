//! Evaluation split construction by document-aware human filtering.
//!
//! Aligned document pairs are ranked by their mean alignment score. A
//! review session walks the ranking: every candidate pair of the current
//! document is judged good or bad, and once all are judged the document is
//! accepted when strictly more than `ratio` of them are good. Accepted
//! documents contribute their good pairs to the split being filled (test
//! first, then dev); the loop moves on while the pool is below its volume,
//! so the last document may overshoot. Everything never reviewed, plus
//! rejected documents, becomes training data.
//!
//! Judgments are appended to a JSON-lines log before they are applied, and
//! replaying the log rebuilds the session state.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{AlignmentResult, ChunkAlignment, Document, DocumentPair, Language};
use crate::similarity::Tokenizers;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_volume: usize,
    pub dev_volume: usize,
    pub ratio: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_volume: 2000,
            dev_volume: 500,
            ratio: 0.5,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.test_volume == 0 || self.dev_volume == 0 {
            return Err(Error::Config("split volumes must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::Config(format!("ratio {} outside [0, 1]", self.ratio)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Good,
    Bad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub pair_id: String,
    pub alignment_index: usize,
    pub verdict: Verdict,
    pub judge: String,
    pub timestamp: DateTime<Utc>,
}

impl Judgment {
    pub fn now(pair_id: impl Into<String>, alignment_index: usize, verdict: Verdict, judge: impl Into<String>) -> Self {
        Judgment {
            pair_id: pair_id.into(),
            alignment_index,
            verdict,
            judge: judge.into(),
            timestamp: Utc::now(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPair {
    pub pair_id: String,
    /// `None` for documents without alignments; they rank last.
    pub mean_score: Option<f64>,
    pub alignments: usize,
    /// Position in the input list.
    pub input_index: usize,
}

/// Orders documents by mean alignment score, descending; ties by pair id.
pub fn rank_pairs(results: &[(DocumentPair, AlignmentResult)]) -> Vec<RankedPair> {
    let mut ranked: Vec<RankedPair> = results
        .iter()
        .enumerate()
        .map(|(k, (_, r))| RankedPair {
            pair_id: r.pair_id.clone(),
            mean_score: r.mean_score(),
            alignments: r.alignments.len(),
            input_index: k,
        })
        .collect();
    ranked.sort_by(|a, b| {
        let key = |x: &RankedPair| x.mean_score.unwrap_or(f64::NEG_INFINITY);
        key(b)
            .partial_cmp(&key(a))
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.pair_id.cmp(&b.pair_id))
    });
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Test,
    Dev,
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocVerdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub alignment: ChunkAlignmentView,
    pub src_text: String,
    pub tgt_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChunkAlignmentView {
    pub src: (usize, usize),
    pub tgt: (usize, usize),
    pub score: f64,
}

impl From<&ChunkAlignment> for ChunkAlignmentView {
    fn from(a: &ChunkAlignment) -> Self {
        ChunkAlignmentView {
            src: (a.src.start, a.src.end),
            tgt: (a.tgt.start, a.tgt.end),
            score: a.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct QueuedDoc {
    pair_id: String,
    mean_score: Option<f64>,
    candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocDecision {
    pub pair_id: String,
    pub split: SplitKind,
    pub verdict: DocVerdict,
    pub candidates: usize,
    /// Alignment indices judged good, ascending.
    pub good: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct CurrentDoc {
    queue_index: usize,
    split: SplitKind,
    verdicts: Vec<Option<Verdict>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Test,
    Dev,
    /// Both volumes reached.
    Done,
    /// Queue ran out before both volumes were reached.
    Exhausted,
}

/// State derived from the ranked queue and the judgments applied so far.
#[derive(Debug, Clone, PartialEq)]
struct SessionState {
    spec: SplitSpec,
    queue: Vec<QueuedDoc>,
    next_doc: usize,
    current: Option<CurrentDoc>,
    decisions: Vec<DocDecision>,
    test_pool: usize,
    dev_pool: usize,
    phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NextCandidate {
    pub pair_id: String,
    pub alignment_index: usize,
    pub src_text: String,
    pub tgt_text: String,
    pub split: SplitKind,
    pub doc_progress: DocProgress,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DocProgress {
    pub judged: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Next {
    Candidate(NextCandidate),
    Done,
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Progress {
    pub phase: Phase,
    pub test_pool: usize,
    pub test_volume: usize,
    pub dev_pool: usize,
    pub dev_volume: usize,
    pub documents_reviewed: usize,
    pub documents_total: usize,
    pub judgments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JudgmentOutcome {
    pub progress: Progress,
    /// Set when this judgment completed its document.
    pub document_verdict: Option<DocVerdict>,
}

/// Append-only judgment log, one JSON object per line.
#[derive(Debug)]
pub struct JudgmentLog {
    path: PathBuf,
    file: File,
}

impl JudgmentLog {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(JudgmentLog { path, file })
    }

    /// Writes and syncs one judgment.
    pub fn append(&mut self, j: &Judgment) -> Result<()> {
        let mut line = serde_json::to_string(j)?;
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Vec<Judgment>> {
        let path = path.as_ref();
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(path, e)),
        };
        let mut out = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.into(),
                line: n + 1,
                message: e.to_string(),
            })?);
        }
        Ok(out)
    }
}

#[derive(Debug)]
pub struct ReviewSession {
    state: SessionState,
    judgments: usize,
    log: Option<JudgmentLog>,
}

impl ReviewSession {
    /// Starts a session over all aligned pairs, ranked by [`rank_pairs`].
    pub fn new(results: &[(DocumentPair, AlignmentResult)], spec: SplitSpec) -> Result<Self> {
        spec.validate()?;
        let queue = rank_pairs(results)
            .into_iter()
            .map(|r| {
                let (pair, result) = &results[r.input_index];
                QueuedDoc {
                    pair_id: r.pair_id,
                    mean_score: r.mean_score,
                    candidates: result
                        .alignments
                        .iter()
                        .map(|a| Candidate {
                            alignment: a.into(),
                            src_text: pair.src.chunk_text(a.src),
                            tgt_text: pair.tgt.chunk_text(a.tgt),
                        })
                        .collect(),
                }
            })
            .collect();
        let mut session = ReviewSession {
            state: SessionState {
                spec,
                queue,
                next_doc: 0,
                current: None,
                decisions: Vec::new(),
                test_pool: 0,
                dev_pool: 0,
                phase: Phase::Test,
            },
            judgments: 0,
            log: None,
        };
        session.advance();
        Ok(session)
    }

    /// Rebuilds a session by applying `judgments` in order.
    pub fn replay(results: &[(DocumentPair, AlignmentResult)], spec: SplitSpec, judgments: &[Judgment]) -> Result<Self> {
        let mut session = ReviewSession::new(results, spec)?;
        for j in judgments {
            session.record_judgment(j.clone())?;
        }
        Ok(session)
    }

    /// Resumes from the log at `path` (if any) and appends new judgments
    /// to it.
    pub fn with_log(results: &[(DocumentPair, AlignmentResult)], spec: SplitSpec, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let existing = JudgmentLog::read(&path)?;
        let mut session = ReviewSession::replay(results, spec, &existing)?;
        session.log = Some(JudgmentLog::open(path)?);
        Ok(session)
    }

    pub fn spec(&self) -> SplitSpec {
        self.state.spec
    }

    pub fn queue_len(&self) -> usize {
        self.state.queue.len()
    }

    pub fn phase(&self) -> Phase {
        self.state.phase
    }

    pub fn decisions(&self) -> &[DocDecision] {
        &self.state.decisions
    }

    /// True when `other` has reached the identical state.
    pub fn same_state(&self, other: &ReviewSession) -> bool {
        self.state == other.state && self.judgments == other.judgments
    }

    fn pool(&self, split: SplitKind) -> usize {
        match split {
            SplitKind::Test => self.state.test_pool,
            SplitKind::Dev => self.state.dev_pool,
            SplitKind::Train => 0,
        }
    }

    /// Opens the next document if none is open and volumes are not met.
    fn advance(&mut self) {
        let st = &mut self.state;
        while st.current.is_none() {
            if st.phase == Phase::Test && st.test_pool >= st.spec.test_volume {
                st.phase = Phase::Dev;
            }
            if st.phase == Phase::Dev && st.dev_pool >= st.spec.dev_volume {
                st.phase = Phase::Done;
            }
            let split = match st.phase {
                Phase::Test => SplitKind::Test,
                Phase::Dev => SplitKind::Dev,
                Phase::Done | Phase::Exhausted => return,
            };
            if st.next_doc >= st.queue.len() {
                st.phase = Phase::Exhausted;
                return;
            }
            let queue_index = st.next_doc;
            st.next_doc += 1;
            let n = st.queue[queue_index].candidates.len();
            if n == 0 {
                // Nothing to judge: 0 good is never more than 0 * ratio.
                st.decisions.push(DocDecision {
                    pair_id: st.queue[queue_index].pair_id.clone(),
                    split,
                    verdict: DocVerdict::Rejected,
                    candidates: 0,
                    good: Vec::new(),
                });
                continue;
            }
            st.current = Some(CurrentDoc {
                queue_index,
                split,
                verdicts: vec![None; n],
            });
        }
    }

    pub fn next_candidate(&self) -> Next {
        let st = &self.state;
        match &st.current {
            Some(cur) => {
                let doc = &st.queue[cur.queue_index];
                let k = cur
                    .verdicts
                    .iter()
                    .position(Option::is_none)
                    .expect("an open document has an unjudged candidate");
                let c = &doc.candidates[k];
                Next::Candidate(NextCandidate {
                    pair_id: doc.pair_id.clone(),
                    alignment_index: k,
                    src_text: c.src_text.clone(),
                    tgt_text: c.tgt_text.clone(),
                    split: cur.split,
                    doc_progress: DocProgress {
                        judged: cur.verdicts.iter().filter(|v| v.is_some()).count(),
                        total: cur.verdicts.len(),
                    },
                })
            }
            None if st.phase == Phase::Exhausted => Next::Exhausted,
            None => Next::Done,
        }
    }

    pub fn progress(&self) -> Progress {
        let st = &self.state;
        Progress {
            phase: st.phase,
            test_pool: st.test_pool,
            test_volume: st.spec.test_volume,
            dev_pool: st.dev_pool,
            dev_volume: st.spec.dev_volume,
            documents_reviewed: st.decisions.len(),
            documents_total: st.queue.len(),
            judgments: self.judgments,
        }
    }

    fn locate(&self, pair_id: &str) -> Result<usize> {
        self.state
            .queue
            .iter()
            .position(|d| d.pair_id == pair_id)
            .ok_or_else(|| Error::UnknownPair(pair_id.to_string()))
    }

    /// Applies a judgment to the open document. A repeated judgment of the
    /// same alignment replaces the earlier one; the document verdict is
    /// computed as soon as every candidate has one.
    pub fn record_judgment(&mut self, judgment: Judgment) -> Result<JudgmentOutcome> {
        let index = self.locate(&judgment.pair_id)?;
        let cur = match &self.state.current {
            Some(cur) if cur.queue_index == index => cur,
            _ if index < self.state.next_doc => return Err(Error::Consumed(judgment.pair_id)),
            _ => {
                return Err(Error::Review(format!(
                    "document {} is not under review",
                    judgment.pair_id
                )))
            }
        };
        if judgment.alignment_index >= cur.verdicts.len() {
            return Err(Error::Review(format!(
                "alignment index {} out of range for {} ({} candidates)",
                judgment.alignment_index,
                judgment.pair_id,
                cur.verdicts.len()
            )));
        }
        if let Some(log) = &mut self.log {
            log.append(&judgment)?;
        }
        self.judgments += 1;
        let cur = self.state.current.as_mut().expect("checked above");
        cur.verdicts[judgment.alignment_index] = Some(judgment.verdict);
        let mut verdict = None;
        if cur.verdicts.iter().all(Option::is_some) {
            let cur = self.state.current.take().expect("checked above");
            let total = cur.verdicts.len();
            let good: Vec<usize> = cur
                .verdicts
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == Some(Verdict::Good))
                .map(|(k, _)| k)
                .collect();
            let accepted = good.len() as f64 > total as f64 * self.state.spec.ratio;
            let v = if accepted { DocVerdict::Accepted } else { DocVerdict::Rejected };
            if accepted {
                match cur.split {
                    SplitKind::Test => self.state.test_pool += good.len(),
                    SplitKind::Dev => self.state.dev_pool += good.len(),
                    SplitKind::Train => unreachable!("train is never reviewed"),
                }
            }
            self.state.decisions.push(DocDecision {
                pair_id: self.state.queue[cur.queue_index].pair_id.clone(),
                split: cur.split,
                verdict: v,
                candidates: total,
                good,
            });
            verdict = Some(v);
            self.advance();
        }
        Ok(JudgmentOutcome {
            progress: self.progress(),
            document_verdict: verdict,
        })
    }

    /// Verdict of a reviewed document.
    pub fn document_verdict(&self, pair_id: &str) -> Result<DocVerdict> {
        let index = self.locate(pair_id)?;
        if let Some(d) = self.state.decisions.iter().find(|d| d.pair_id == pair_id) {
            return Ok(d.verdict);
        }
        match &self.state.current {
            Some(cur) if cur.queue_index == index => {
                let pending = cur.verdicts.iter().filter(|v| v.is_none()).count();
                Err(Error::Review(format!("{pair_id} still has {pending} unjudged candidates")))
            }
            _ => Err(Error::Review(format!("{pair_id} has not been reviewed"))),
        }
    }

    /// Sizes of the pools, for convenience in callers that fill splits.
    pub fn pool_size(&self, split: SplitKind) -> usize {
        self.pool(split)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitOptions {
    /// Drop rejected evaluation candidates instead of returning them to train.
    pub discard_rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitLine {
    pub pair_id: String,
    pub alignment_index: usize,
    pub src_text: String,
    pub tgt_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub pair_id: String,
    /// 0-based first line in the split files.
    pub first_line: usize,
    pub lines: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Splits {
    pub test: Vec<SplitLine>,
    pub dev: Vec<SplitLine>,
    pub train: Vec<SplitLine>,
}

impl Splits {
    pub fn get(&self, kind: SplitKind) -> &[SplitLine] {
        match kind {
            SplitKind::Test => &self.test,
            SplitKind::Dev => &self.dev,
            SplitKind::Train => &self.train,
        }
    }

    /// Contiguous line ranges per document.
    pub fn manifest(&self, kind: SplitKind) -> Vec<ManifestEntry> {
        let mut out: Vec<ManifestEntry> = Vec::new();
        for (k, line) in self.get(kind).iter().enumerate() {
            match out.last_mut() {
                Some(e) if e.pair_id == line.pair_id => e.lines += 1,
                _ => out.push(ManifestEntry {
                    pair_id: line.pair_id.clone(),
                    first_line: k,
                    lines: 1,
                }),
            }
        }
        out
    }

    /// Writes `{test,dev,train}.{src,tgt}` and `manifest.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, spec: &SplitSpec) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = serde_json::Map::new();
        for kind in [SplitKind::Test, SplitKind::Dev, SplitKind::Train] {
            let name = match kind {
                SplitKind::Test => "test",
                SplitKind::Dev => "dev",
                SplitKind::Train => "train",
            };
            let lines = self.get(kind);
            for (ext, text) in [("src", true), ("tgt", false)] {
                let path = dir.join(format!("{name}.{ext}"));
                let mut body = String::new();
                for l in lines {
                    body.push_str(if text { &l.src_text } else { &l.tgt_text });
                    body.push('\n');
                }
                fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            }
            manifest.insert(name.to_string(), serde_json::to_value(self.manifest(kind))?);
        }
        let doc = serde_json::json!({ "spec": spec, "splits": manifest });
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

/// Materializes splits from a finished session.
pub fn emit_splits(session: &ReviewSession, options: SplitOptions) -> Result<Splits> {
    let st = &session.state;
    match st.phase {
        Phase::Done => {}
        Phase::Exhausted => {
            return Err(Error::VolumeUnreachable(format!(
                "queue exhausted with test {}/{} and dev {}/{}",
                st.test_pool, st.spec.test_volume, st.dev_pool, st.spec.dev_volume
            )))
        }
        Phase::Test | Phase::Dev => return Err(Error::Review("session is not finished".into())),
    }
    let line = |doc: &QueuedDoc, k: usize| SplitLine {
        pair_id: doc.pair_id.clone(),
        alignment_index: k,
        src_text: doc.candidates[k].src_text.clone(),
        tgt_text: doc.candidates[k].tgt_text.clone(),
    };
    let mut splits = Splits::default();
    let mut to_train: Vec<&QueuedDoc> = st.queue[st.next_doc..].iter().collect();
    for d in &st.decisions {
        let doc = st.queue.iter().find(|q| q.pair_id == d.pair_id).expect("decided doc is queued");
        match (d.verdict, d.split) {
            (DocVerdict::Accepted, SplitKind::Test) => splits.test.extend(d.good.iter().map(|&k| line(doc, k))),
            (DocVerdict::Accepted, SplitKind::Dev) => splits.dev.extend(d.good.iter().map(|&k| line(doc, k))),
            (DocVerdict::Rejected, _) if !options.discard_rejected => to_train.push(doc),
            _ => {}
        }
    }
    to_train.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    for doc in to_train {
        splits.train.extend((0..doc.candidates.len()).map(|k| line(doc, k)));
    }
    Ok(splits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthStats {
    pub sentences: usize,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
}

impl LengthStats {
    /// Population standard deviation; the lower middle value is the median
    /// of an even count.
    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::Empty("length list".into()));
        }
        let n = lengths.len() as f64;
        let mean = lengths.iter().sum::<usize>() as f64 / n;
        let var = lengths.iter().map(|&l| (l as f64 - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        let median = sorted[(sorted.len() - 1) / 2] as f64;
        Ok(LengthStats {
            sentences: lengths.len(),
            mean,
            median,
            std_dev: var.sqrt(),
        })
    }
}

/// Sentence token-length statistics per language.
pub fn corpus_stats(corpus: &[Document], tokenizers: &Tokenizers) -> Result<BTreeMap<Language, LengthStats>> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus".into()));
    }
    let mut lengths: BTreeMap<Language, Vec<usize>> = BTreeMap::new();
    for doc in corpus {
        let lines: Vec<&str> = doc.texts().collect();
        let tokens = tokenizers.get(doc.language).tokenize_lines(&lines)?;
        lengths.entry(doc.language).or_default().extend(tokens.iter().map(Vec::len));
    }
    lengths
        .into_iter()
        .filter(|(_, l)| !l.is_empty())
        .map(|(lang, l)| Ok((lang, LengthStats::from_lengths(&l)?)))
        .collect()
}
