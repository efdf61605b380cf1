//! Seeded synthetic document pairs with known gold alignments.
//!
//! Every sentence has a topic direction in an embedding space and tokens
//! whose vectors are that direction plus Gaussian noise. Gold units are
//! 1-1, 2-1, 1-2 or 2-2; on the merged side of a 2-1 or 1-2 unit the
//! single sentence carries the normalized sum of both topics, and a 2-2
//! unit crosses its two topics (src a b, tgt b a). Tokens are single CJK
//! ideographs, unique over the corpus, written space-separated on both
//! sides, so the source text doubles as its own identity translation.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{AlignmentResult, ChunkAlignment, Document, DocumentPair, IndexRange, Language, Method};
use crate::similarity::EmbeddingTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    OneToOne,
    TwoToOne,
    OneToTwo,
    TwoToTwo,
}

impl UnitKind {
    pub fn is_merge(self) -> bool {
        self != UnitKind::OneToOne
    }

    fn sides(self) -> (usize, usize) {
        match self {
            UnitKind::OneToOne => (1, 1),
            UnitKind::TwoToOne => (2, 1),
            UnitKind::OneToTwo => (1, 2),
            UnitKind::TwoToTwo => (2, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub documents: usize,
    pub units_per_document: usize,
    pub dim: usize,
    pub noise: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Shares of 1-1, 2-1, 1-2 and 2-2 units.
    pub mix: [f64; 4],
    pub course_id: String,
    pub source: Language,
    pub target: Language,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            documents: 20,
            units_per_document: 10,
            dim: 64,
            noise: 0.05,
            min_tokens: 3,
            max_tokens: 5,
            mix: [0.84, 0.04, 0.11, 0.01],
            course_id: "synth".into(),
            source: Language::En,
            target: Language::Ja,
        }
    }
}

const KINDS: [UnitKind; 4] = [UnitKind::OneToOne, UnitKind::TwoToOne, UnitKind::OneToTwo, UnitKind::TwoToTwo];
const FIRST_TOKEN: u32 = 0x4E00;
const LAST_TOKEN: u32 = 0x9FFF;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.documents == 0 || self.units_per_document == 0 {
            return Err(Error::Config("synthetic corpus needs documents and units".into()));
        }
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return Err(Error::Config("token range must satisfy 1 <= min <= max".into()));
        }
        if self.units_per_document * 2 > self.dim {
            return Err(Error::Config(format!(
                "dimension {} too small for {} units per document",
                self.dim, self.units_per_document
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config("noise must be finite and non-negative".into()));
        }
        if self.mix.iter().any(|&p| p < 0.0) || (self.mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("unit mix must be non-negative and sum to 1".into()));
        }
        if self.source == self.target || !self.target.is_unsegmented() {
            return Err(Error::Config("target language must be ja or zh and differ from the source".into()));
        }
        Ok(())
    }

    /// Unit counts per kind by largest remainder, summing to the total.
    pub fn unit_counts(&self) -> [usize; 4] {
        let total = self.documents * self.units_per_document;
        let raw: Vec<f64> = self.mix.iter().map(|p| p * total as f64).collect();
        let mut counts = [0usize; 4];
        for (c, r) in counts.iter_mut().zip(&raw) {
            *c = r.floor() as usize;
        }
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
        let missing = total - counts.iter().sum::<usize>();
        for &k in order.iter().take(missing) {
            counts[k] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPair {
    /// Source translation attached (identity).
    pub pair: DocumentPair,
    pub gold: AlignmentResult,
    pub units: Vec<UnitKind>,
}

impl SyntheticPair {
    pub fn has_merge(&self) -> bool {
        self.units.iter().any(|u| u.is_merge())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub pairs: Vec<SyntheticPair>,
    pub embeddings: Arc<EmbeddingTable>,
    /// Embedding file lines as written, in token order.
    embedding_rows: Vec<String>,
    dim: usize,
}

impl SyntheticCorpus {
    /// Writes the embedding table in `V D` header format.
    pub fn write_embeddings(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut body = format!("{} {}\n", self.embedding_rows.len(), self.dim);
        for row in &self.embedding_rows {
            body.push_str(row);
            body.push('\n');
        }
        file.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

struct TokenSource {
    next: u32,
}

impl TokenSource {
    fn take(&mut self) -> Result<String> {
        if self.next > LAST_TOKEN {
            return Err(Error::Config("synthetic corpus ran out of token characters".into()));
        }
        let c = char::from_u32(self.next).expect("CJK ideograph range");
        self.next += 1;
        Ok(c.to_string())
    }
}

fn topic(dim: usize, parts: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    let w = 1.0 / (parts.len() as f64).sqrt();
    for &p in parts {
        v[p] += w;
    }
    v
}

pub fn generate(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise).map_err(|e| Error::Config(e.to_string()))?;
    let counts = config.unit_counts();
    let mut kinds: Vec<UnitKind> = KINDS
        .iter()
        .zip(counts)
        .flat_map(|(&k, c)| std::iter::repeat_n(k, c))
        .collect();
    kinds.shuffle(&mut rng);

    let mut tokens = TokenSource { next: FIRST_TOKEN };
    let mut rows: Vec<String> = Vec::new();
    let mut pairs = Vec::with_capacity(config.documents);
    let mut make_sentence = |rng: &mut ChaCha8Rng, direction: &[f64]| -> Result<String> {
        let n = rng.random_range(config.min_tokens..=config.max_tokens);
        let mut words = Vec::with_capacity(n);
        for _ in 0..n {
            let token = tokens.take()?;
            let mut row = token.clone();
            for &x in direction {
                let value = x + noise.sample(rng);
                row.push_str(&format!(" {value:.6}"));
            }
            rows.push(row);
            words.push(token);
        }
        Ok(words.join(" "))
    };

    for (d, units) in kinds.chunks(config.units_per_document).enumerate() {
        let lecture = format!("doc{d:03}");
        let (mut src, mut tgt) = (Vec::new(), Vec::new());
        let mut gold = Vec::with_capacity(units.len());
        let mut next_topic = 0;
        for &unit in units {
            let (a, b) = (next_topic, next_topic + 1);
            next_topic += if unit.is_merge() { 2 } else { 1 };
            let (src_topics, tgt_topics): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match unit {
                UnitKind::OneToOne => (vec![vec![a]], vec![vec![a]]),
                UnitKind::TwoToOne => (vec![vec![a], vec![b]], vec![vec![a, b]]),
                UnitKind::OneToTwo => (vec![vec![a, b]], vec![vec![a], vec![b]]),
                UnitKind::TwoToTwo => (vec![vec![a], vec![b]], vec![vec![b], vec![a]]),
            };
            let (ns, nt) = unit.sides();
            gold.push(ChunkAlignment::new(
                IndexRange::new(src.len(), src.len() + ns - 1),
                IndexRange::new(tgt.len(), tgt.len() + nt - 1),
                1.0,
            ));
            for t in &src_topics {
                src.push(make_sentence(&mut rng, &topic(config.dim, t))?);
            }
            for t in &tgt_topics {
                tgt.push(make_sentence(&mut rng, &topic(config.dim, t))?);
            }
        }
        let src_doc = Document::new(&config.course_id, &lecture, config.source, &src);
        let tgt_doc = Document::new(&config.course_id, &lecture, config.target, &tgt);
        let translated = Document::new(&config.course_id, &lecture, config.target, &src);
        let pair = DocumentPair::new(src_doc, tgt_doc)?.with_src_translation(translated)?;
        let gold = AlignmentResult::new(pair.pair_id.clone(), Method::Gold, gold);
        pairs.push(SyntheticPair {
            pair,
            gold,
            units: units.to_vec(),
        });
    }
    let entries = rows.iter().map(|r| {
        let mut it = r.split(' ');
        let token = it.next().expect("token").to_string();
        let values: Vec<f64> = it.map(|v| v.parse().expect("formatted float")).collect();
        (token, values)
    });
    let table = EmbeddingTable::from_entries(config.dim, false, entries)?;
    Ok(SyntheticCorpus {
        pairs,
        embeddings: Arc::new(table),
        embedding_rows: rows,
        dim: config.dim,
    })
}
