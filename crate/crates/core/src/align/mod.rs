//! Sentence alignment: greedy row-argmax, 1-to-1 min-cost max-flow
//! matching, and the many-to-many monotone dynamic program, plus exact-match
//! precision/recall/F1 against gold alignments.

mod dp;
mod eval;
mod flow;

pub use dp::{align_dp, dp_solve, DpSolution, DpState, Step};
pub use eval::{macro_f1, score_alignment, AlignmentScore};
pub use flow::{align_flow, flow_match, MinCostFlow};

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AlignmentResult, ChunkAlignment, DocumentPair, IndexRange, Method};
use crate::similarity::Scorer;
use crate::{Error, Result};

/// Similarity of a source chunk and a target chunk of one document pair.
pub trait ChunkSimilarity {
    /// `(source sentences, target sentences)`.
    fn dims(&self) -> (usize, usize);

    fn similarity(&self, src: IndexRange, tgt: IndexRange) -> Result<f64>;
}

/// Adapts a closure over chunk ranges, mostly for tests and precomputed
/// score matrices.
pub struct FnSimilarity<F> {
    dims: (usize, usize),
    f: F,
}

impl<F: Fn(IndexRange, IndexRange) -> f64> FnSimilarity<F> {
    pub fn new(n: usize, m: usize, f: F) -> Self {
        FnSimilarity { dims: (n, m), f }
    }
}

impl<F: Fn(IndexRange, IndexRange) -> f64> ChunkSimilarity for FnSimilarity<F> {
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn similarity(&self, src: IndexRange, tgt: IndexRange) -> Result<f64> {
        Ok((self.f)(src, tgt))
    }
}

/// Sentence-level score matrix; multi-sentence chunks are not scorable.
pub struct MatrixSimilarity<'a>(pub &'a [Vec<f64>]);

impl ChunkSimilarity for MatrixSimilarity<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.0.len(), self.0.first().map_or(0, Vec::len))
    }

    fn similarity(&self, src: IndexRange, tgt: IndexRange) -> Result<f64> {
        if !src.is_single() || !tgt.is_single() {
            return Err(Error::Config("score matrix only scores single sentences".into()));
        }
        Ok(self.0[src.start][tgt.start])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignerConfig {
    /// Most sentences merged into one chunk on either side.
    pub max_chunk: usize,
    /// Weight of leaving one sentence unaligned.
    pub skip_penalty: f64,
    /// Alignments scoring below this are dropped from the output.
    pub min_pair_score: Option<f64>,
    /// Multiplier turning similarities into integer flow costs.
    pub flow_cost_scale: i64,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        AlignerConfig {
            max_chunk: 3,
            skip_penalty: 0.0,
            min_pair_score: None,
            flow_cost_scale: 1_000_000,
        }
    }
}

impl AlignerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_chunk == 0 {
            return Err(Error::Config("max_chunk must be at least 1".into()));
        }
        if !self.skip_penalty.is_finite() || self.skip_penalty > 0.0 {
            return Err(Error::Config(format!("skip_penalty {} must be finite and <= 0", self.skip_penalty)));
        }
        if self.flow_cost_scale < 1 {
            return Err(Error::Config("flow_cost_scale must be at least 1".into()));
        }
        Ok(())
    }

    fn post_filter(&self, alignments: &mut Vec<ChunkAlignment>) {
        if let Some(min) = self.min_pair_score {
            alignments.retain(|a| a.score >= min);
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Method::Dp),
            "greedy" => Ok(Method::Greedy),
            "flow" => Ok(Method::Flow),
            "gold" => Ok(Method::Gold),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

fn check_dims(sim: &impl ChunkSimilarity) -> Result<(usize, usize)> {
    let (n, m) = sim.dims();
    if n == 0 || m == 0 {
        return Err(Error::Empty(format!("document pair with {n} and {m} sentences")));
    }
    Ok((n, m))
}

/// For each source sentence, the target sentence it scores highest with;
/// ties go to the smallest target index.
pub fn greedy_match(sim: &impl ChunkSimilarity) -> Result<Vec<ChunkAlignment>> {
    let (n, m) = check_dims(sim)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            let s = sim.similarity(IndexRange::single(i), IndexRange::single(j))?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        let (j, s) = best.expect("m >= 1");
        out.push(ChunkAlignment::one_to_one(i, j, s));
    }
    Ok(out)
}

pub fn align_greedy(pair: &DocumentPair, scorer: &Scorer, cfg: &AlignerConfig) -> Result<AlignmentResult> {
    cfg.validate()?;
    let sim = scorer.prepare(pair)?;
    let mut alignments = greedy_match(&sim)?;
    cfg.post_filter(&mut alignments);
    Ok(AlignmentResult::new(pair.pair_id.clone(), Method::Greedy, alignments))
}

/// Runs the aligner selected by `method`.
pub fn align_pair(pair: &DocumentPair, scorer: &Scorer, method: Method, cfg: &AlignerConfig) -> Result<AlignmentResult> {
    match method {
        Method::Dp => align_dp(pair, scorer, cfg),
        Method::Greedy => align_greedy(pair, scorer, cfg),
        Method::Flow => align_flow(pair, scorer, cfg),
        Method::Gold => Err(Error::Config("gold is not an alignment method".into())),
    }
}
