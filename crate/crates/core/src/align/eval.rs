use std::collections::HashSet;

use serde::Serialize;

use crate::corpus::{AlignmentResult, GoldAlignment, IndexRange};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: usize,
    pub extracted: usize,
    pub total: usize,
}

impl AlignmentScore {
    pub fn from_counts(correct: usize, extracted: usize, total: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, extracted);
        let recall = ratio(correct, total);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        AlignmentScore {
            precision,
            recall,
            f1,
            correct,
            extracted,
            total,
        }
    }
}

/// A prediction is correct when both its source and target index sets
/// equal those of some gold alignment.
pub fn score_alignment(pred: &AlignmentResult, gold: &GoldAlignment) -> Result<AlignmentScore> {
    if pred.pair_id != gold.pair_id {
        return Err(Error::PairMismatch(pred.pair_id.clone(), gold.pair_id.clone()));
    }
    let gold_set: HashSet<(IndexRange, IndexRange)> = gold.alignments.iter().map(|a| (a.src, a.tgt)).collect();
    let pred_set: HashSet<(IndexRange, IndexRange)> = pred.alignments.iter().map(|a| (a.src, a.tgt)).collect();
    let correct = pred_set.intersection(&gold_set).count();
    Ok(AlignmentScore::from_counts(correct, pred_set.len(), gold_set.len()))
}

/// Mean of per-document F1.
pub fn macro_f1(scores: &[AlignmentScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("score list".into()));
    }
    Ok(scores.iter().map(|s| s.f1).sum::<f64>() / scores.len() as f64)
}
