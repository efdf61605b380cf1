//! Sentence and chunk similarity.
//!
//! Embedding scorers average word vectors over the tokens of a chunk and
//! compare with cosine or negative L2 distance. The BLEU scorer computes a
//! smoothed sentence-level BLEU-4 of the translated chunk against the other
//! side. A symmetric scorer averages the forward score (translated source
//! against target) and the backward score (translated target against
//! source).

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::align::ChunkSimilarity;
use crate::corpus::{Document, DocumentPair, IndexRange, Language};
use crate::translate::run_line_command;
use crate::{Error, Result};

/// Whitespace split for space-delimited languages, one token per
/// non-space character for Japanese and Chinese.
pub fn builtin_tokens(language: Language, text: &str) -> Vec<String> {
    if language.is_unsegmented() {
        text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
    } else {
        text.split_whitespace().map(String::from).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tokenizer {
    Whitespace,
    Characters,
    /// Shell command reading one sentence per line on stdin and writing
    /// the same number of space-separated token lines on stdout.
    External { command: String },
}

impl Tokenizer {
    pub fn default_for(language: Language) -> Self {
        if language.is_unsegmented() {
            Tokenizer::Characters
        } else {
            Tokenizer::Whitespace
        }
    }

    pub fn tokenize_lines(&self, lines: &[&str]) -> Result<Vec<Vec<String>>> {
        match self {
            Tokenizer::Whitespace => Ok(lines.iter().map(|l| builtin_tokens(Language::En, l)).collect()),
            Tokenizer::Characters => Ok(lines.iter().map(|l| builtin_tokens(Language::Ja, l)).collect()),
            Tokenizer::External { command } => {
                let out = run_line_command(command, lines)?;
                Ok(out.iter().map(|l| l.split_whitespace().map(String::from).collect()).collect())
            }
        }
    }

    fn tokenize_document(&self, doc: &Document) -> Result<Vec<Vec<String>>> {
        let lines: Vec<&str> = doc.texts().collect();
        self.tokenize_lines(&lines)
    }
}

/// Per-language tokenizer choice; languages without an entry use
/// [`Tokenizer::default_for`].
#[derive(Debug, Clone, Default)]
pub struct Tokenizers {
    overrides: BTreeMap<Language, Tokenizer>,
}

impl Tokenizers {
    pub fn set(&mut self, language: Language, tokenizer: Tokenizer) {
        self.overrides.insert(language, tokenizer);
    }

    pub fn get(&self, language: Language) -> Tokenizer {
        self.overrides
            .get(&language)
            .cloned()
            .unwrap_or_else(|| Tokenizer::default_for(language))
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    lowercase: bool,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from in-memory entries. Later duplicates are ignored.
    pub fn from_entries<I, S>(dim: usize, lowercase: bool, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut table = EmbeddingTable {
            dim,
            lowercase,
            index: HashMap::new(),
            data: Vec::new(),
            duplicates: 0,
        };
        for (word, vector) in entries {
            if vector.len() != dim {
                return Err(Error::Dimension(dim, vector.len()));
            }
            if vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config("embedding component is not finite".into()));
            }
            table.insert(word.into(), &vector);
        }
        Ok(table)
    }

    fn insert(&mut self, word: String, vector: &[f64]) {
        let key = if self.lowercase { word.to_lowercase() } else { word };
        if self.index.contains_key(&key) {
            self.duplicates += 1;
            return;
        }
        self.index.insert(key, self.index.len());
        self.data.extend_from_slice(vector);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Rows skipped because their word was already present.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        let slot = if self.lowercase {
            self.index.get(&token.to_lowercase())
        } else {
            self.index.get(token)
        };
        slot.map(|&k| &self.data[k * self.dim..(k + 1) * self.dim])
    }
}

/// Loads a word-vector text file: a `V D` header line followed by `V`
/// rows of `word x1 ... xD`.
pub fn load_embeddings(path: impl AsRef<Path>, lowercase: bool) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.into(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::Empty(format!("embedding file {}", path.display()))),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (rows, dim) = match fields.as_slice() {
        [v, d] => (
            v.parse::<usize>().map_err(|e| parse_err(1, format!("vocabulary size: {e}")))?,
            d.parse::<usize>().map_err(|e| parse_err(1, format!("dimension: {e}")))?,
        ),
        _ => return Err(parse_err(1, "header must be `V D`".into())),
    };
    if dim == 0 {
        return Err(parse_err(1, "dimension must be positive".into()));
    }
    let mut table = EmbeddingTable::from_entries(dim, lowercase, std::iter::empty::<(String, Vec<f64>)>())?;
    let mut seen = 0;
    let mut vector = Vec::with_capacity(dim);
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default().to_string();
        vector.clear();
        for p in parts {
            let x: f64 = p
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric component {p:?}")))?;
            if !x.is_finite() {
                return Err(parse_err(line_no, format!("non-finite component {p:?}")));
            }
            vector.push(x);
        }
        if vector.len() != dim {
            return Err(parse_err(line_no, format!("expected {dim} components, found {}", vector.len())));
        }
        table.insert(word, &vector);
        seen += 1;
    }
    if seen != rows {
        return Err(parse_err(1, format!("header declares {rows} rows, file has {seen}")));
    }
    if table.duplicates > 0 {
        log::warn!("{}: {} duplicate words ignored", path.display(), table.duplicates);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbedding {
    pub vector: Vec<f64>,
    pub covered_tokens: usize,
}

/// Mean of the vectors of in-vocabulary tokens; the zero vector when no
/// token is covered.
pub fn embed_sentence<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Result<SentenceEmbedding> {
    if tokens.is_empty() {
        return Err(Error::Empty("token list".into()));
    }
    Ok(embed_tokens(tokens, table))
}

fn embed_tokens<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> SentenceEmbedding {
    let mut sum = vec![0.0; table.dim()];
    let mut covered = 0;
    for t in tokens {
        if let Some(v) = table.lookup(t.as_ref()) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            covered += 1;
        }
    }
    if covered > 0 {
        let n = covered as f64;
        for s in &mut sum {
            *s /= n;
        }
    }
    SentenceEmbedding {
        vector: sum,
        covered_tokens: covered,
    }
}

/// Cosine similarity, 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Negated Euclidean distance.
pub fn neg_l2(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(a.len(), b.len()));
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(-sq.sqrt())
}

pub const BLEU_ORDER: usize = 4;
pub const DEFAULT_BLEU_EPSILON: f64 = 0.01;

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence-level BLEU-4 with uniform weights. A modified precision whose
/// clipped match count is zero is replaced by `epsilon`; the brevity
/// penalty is `min(1, exp(1 - r/c))`.
pub fn sentence_bleu<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T], epsilon: f64) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Empty("BLEU reference".into()));
    }
    Ok(bleu(candidate, reference, epsilon))
}

fn bleu<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T], epsilon: f64) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=BLEU_ORDER {
        let cand = ngram_counts(candidate, n);
        let refs = ngram_counts(reference, n);
        let total = candidate.len().saturating_sub(n - 1);
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
            .sum();
        let precision = if clipped == 0 {
            epsilon
        } else {
            clipped as f64 / total as f64
        };
        log_sum += precision.ln();
    }
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let brevity = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    brevity * (log_sum / BLEU_ORDER as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    CosineEmbedding,
    NegL2Embedding,
    SentenceBleu,
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cosine_embedding" => Ok(ScorerKind::CosineEmbedding),
            "l2" | "neg_l2" | "neg_l2_embedding" => Ok(ScorerKind::NegL2Embedding),
            "bleu" | "sentence_bleu" => Ok(ScorerKind::SentenceBleu),
            _ => Err(Error::Config(format!("unknown scorer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scorer {
    pub kind: ScorerKind,
    pub symmetric: bool,
    pub embeddings: Option<Arc<EmbeddingTable>>,
    pub bleu_epsilon: f64,
    pub tokenizers: Tokenizers,
}

impl Scorer {
    pub fn embedding(kind: ScorerKind, table: Arc<EmbeddingTable>) -> Self {
        Scorer {
            kind,
            symmetric: false,
            embeddings: Some(table),
            bleu_epsilon: DEFAULT_BLEU_EPSILON,
            tokenizers: Tokenizers::default(),
        }
    }

    pub fn bleu(epsilon: f64) -> Self {
        Scorer {
            kind: ScorerKind::SentenceBleu,
            symmetric: false,
            embeddings: None,
            bleu_epsilon: epsilon,
            tokenizers: Tokenizers::default(),
        }
    }

    pub fn symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ScorerKind::CosineEmbedding | ScorerKind::NegL2Embedding if self.embeddings.is_none() => {
                Err(Error::Config("embedding scorer requires an embedding table".into()))
            }
            ScorerKind::SentenceBleu if !(self.bleu_epsilon > 0.0 && self.bleu_epsilon <= 1.0) => {
                Err(Error::Config(format!("BLEU epsilon {} outside (0, 1]", self.bleu_epsilon)))
            }
            _ => Ok(()),
        }
    }

    /// Tokenizes the pair once and returns a memoizing chunk scorer.
    pub fn prepare<'a>(&'a self, pair: &'a DocumentPair) -> Result<PairScorer<'a>> {
        self.validate()?;
        let translated = pair
            .src_translated
            .as_ref()
            .ok_or_else(|| Error::MissingTranslation(format!("{}: source translation", pair.pair_id)))?;
        let forward = Direction::new(
            self.tokenizers.get(pair.tgt.language).tokenize_document(translated)?,
            self.tokenizers.get(pair.tgt.language).tokenize_document(&pair.tgt)?,
        );
        let backward = if self.symmetric {
            let translated = pair
                .tgt_translated
                .as_ref()
                .ok_or_else(|| Error::MissingTranslation(format!("{}: target translation (symmetric mode)", pair.pair_id)))?;
            // Candidate is always the translated side: MT(tgt) against src.
            Some(Direction::new(
                self.tokenizers.get(pair.src.language).tokenize_document(translated)?,
                self.tokenizers.get(pair.src.language).tokenize_document(&pair.src)?,
            ))
        } else {
            None
        };
        Ok(PairScorer {
            scorer: self,
            dims: (pair.src.len(), pair.tgt.len()),
            forward,
            backward,
        })
    }

    /// Scores a single chunk pair.
    pub fn chunk_score(&self, pair: &DocumentPair, src: IndexRange, tgt: IndexRange) -> Result<f64> {
        self.prepare(pair)?.similarity(src, tgt)
    }
}

/// Tokens for one scoring direction: `candidate` is the translated side,
/// indexed like the document it was translated from.
struct Direction {
    candidate: Vec<Vec<String>>,
    reference: Vec<Vec<String>>,
    candidate_memo: RefCell<HashMap<IndexRange, Rc<Representation>>>,
    reference_memo: RefCell<HashMap<IndexRange, Rc<Representation>>>,
}

enum Representation {
    Embedding(SentenceEmbedding),
    Tokens(Vec<String>),
}

impl Direction {
    fn new(candidate: Vec<Vec<String>>, reference: Vec<Vec<String>>) -> Self {
        Direction {
            candidate,
            reference,
            candidate_memo: RefCell::default(),
            reference_memo: RefCell::default(),
        }
    }
}

pub struct PairScorer<'a> {
    scorer: &'a Scorer,
    dims: (usize, usize),
    forward: Direction,
    backward: Option<Direction>,
}

impl PairScorer<'_> {
    fn represent(
        &self,
        sentences: &[Vec<String>],
        memo: &RefCell<HashMap<IndexRange, Rc<Representation>>>,
        range: IndexRange,
    ) -> Result<Rc<Representation>> {
        if range.end >= sentences.len() {
            return Err(Error::Config(format!(
                "chunk {}..={} outside document of {} sentences",
                range.start,
                range.end,
                sentences.len()
            )));
        }
        if let Some(rep) = memo.borrow().get(&range) {
            return Ok(Rc::clone(rep));
        }
        let tokens: Vec<String> = sentences[range.start..=range.end].iter().flatten().cloned().collect();
        let rep = match (self.scorer.kind, &self.scorer.embeddings) {
            (ScorerKind::SentenceBleu, _) => Representation::Tokens(tokens),
            (_, Some(table)) => Representation::Embedding(embed_tokens(&tokens, table)),
            (_, None) => return Err(Error::Config("embedding scorer requires an embedding table".into())),
        };
        let rep = Rc::new(rep);
        memo.borrow_mut().insert(range, Rc::clone(&rep));
        Ok(rep)
    }

    fn direction_score(&self, dir: &Direction, cand: IndexRange, reference: IndexRange) -> Result<f64> {
        let c = self.represent(&dir.candidate, &dir.candidate_memo, cand)?;
        let r = self.represent(&dir.reference, &dir.reference_memo, reference)?;
        match (&*c, &*r) {
            (Representation::Embedding(a), Representation::Embedding(b)) => match self.scorer.kind {
                ScorerKind::CosineEmbedding => cosine(&a.vector, &b.vector),
                _ => neg_l2(&a.vector, &b.vector),
            },
            (Representation::Tokens(a), Representation::Tokens(b)) => Ok(bleu(a, b, self.scorer.bleu_epsilon)),
            _ => unreachable!("representations of one scorer share a kind"),
        }
    }
}

impl ChunkSimilarity for PairScorer<'_> {
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn similarity(&self, src: IndexRange, tgt: IndexRange) -> Result<f64> {
        let forward = self.direction_score(&self.forward, src, tgt)?;
        match &self.backward {
            Some(dir) => {
                let backward = self.direction_score(dir, tgt, src)?;
                Ok((forward + backward) / 2.0)
            }
            None => Ok(forward),
        }
    }
}
