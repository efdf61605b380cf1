//! Independent reference implementations used to cross-check the library.

#![allow(dead_code)]

use std::collections::HashMap;

use lectalign::align::{AlignerConfig, ChunkSimilarity, FnSimilarity};
use lectalign::corpus::{ChunkAlignment, IndexRange};
use rand::Rng;

/// Random chunk scores in [-1, 1] for every pair of chunks up to `k` long.
pub struct ChunkTable {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    scores: HashMap<(usize, usize, usize, usize), f64>,
}

impl ChunkTable {
    pub fn random(rng: &mut impl Rng, n: usize, m: usize, k: usize) -> Self {
        let mut scores = HashMap::new();
        for i0 in 0..n {
            for i1 in i0..n.min(i0 + k) {
                for j0 in 0..m {
                    for j1 in j0..m.min(j0 + k) {
                        scores.insert((i0, i1, j0, j1), rng.random_range(-1.0..=1.0));
                    }
                }
            }
        }
        ChunkTable { n, m, k, scores }
    }

    pub fn score(&self, s: IndexRange, t: IndexRange) -> f64 {
        self.scores[&(s.start, s.end, t.start, t.end)]
    }

    pub fn similarity(&self) -> impl ChunkSimilarity + '_ {
        FnSimilarity::new(self.n, self.m, move |s, t| self.score(s, t))
    }
}

/// Best path total over every monotone chunking, by exhaustive depth-first
/// enumeration. Sums accumulate front to back along each path.
pub fn dp_brute_total(table: &ChunkTable, skip: f64) -> f64 {
    fn walk(t: &ChunkTable, skip: f64, i: usize, j: usize, acc: f64, best: &mut f64) {
        if i == t.n && j == t.m {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        if i < t.n {
            walk(t, skip, i + 1, j, acc + skip, best);
        }
        if j < t.m {
            walk(t, skip, i, j + 1, acc + skip, best);
        }
        for di in 1..=t.k.min(t.n - i) {
            for dj in 1..=t.k.min(t.m - j) {
                let w = t.score(IndexRange::new(i, i + di - 1), IndexRange::new(j, j + dj - 1));
                walk(t, skip, i + di, j + dj, acc + w, best);
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    walk(table, skip, 0, 0, 0.0, &mut best);
    best
}

/// Total of an alignment path: chunk scores plus a penalty per sentence
/// left out.
pub fn path_total(alignments: &[ChunkAlignment], n: usize, m: usize, skip: f64) -> f64 {
    let covered_src: usize = alignments.iter().map(|a| a.src.len()).sum();
    let covered_tgt: usize = alignments.iter().map(|a| a.tgt.len()).sum();
    let skips = (n - covered_src) + (m - covered_tgt);
    alignments.iter().map(|a| a.score).sum::<f64>() + skips as f64 * skip
}

/// Maximum total similarity over injective matchings of size min(n, m).
pub fn assignment_optimum(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let m = matrix[0].len();
    let transposed: Vec<Vec<f64>>;
    let rows: &[Vec<f64>] = if n <= m {
        matrix
    } else {
        transposed = (0..m).map(|j| (0..n).map(|i| matrix[i][j]).collect()).collect();
        &transposed
    };
    fn go(rows: &[Vec<f64>], r: usize, used: &mut Vec<bool>) -> f64 {
        if r == rows.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(rows[r][c] + go(rows, r + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(rows, 0, &mut vec![false; rows[0].len()])
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
}

/// Sentence BLEU-4 computed by direct counting over positions.
pub fn reference_bleu(cand: &[String], reference: &[String], epsilon: f64) -> f64 {
    if cand.is_empty() {
        return 0.0;
    }
    let occurrences = |seq: &[String], gram: &[String]| {
        if seq.len() < gram.len() {
            return 0;
        }
        (0..=seq.len() - gram.len()).filter(|&p| seq[p..p + gram.len()] == *gram).count()
    };
    let mut product = 1.0;
    for n in 1..=4 {
        let mut matched = 0;
        let positions = if cand.len() >= n { cand.len() - n + 1 } else { 0 };
        for p in 0..positions {
            let gram = &cand[p..p + n];
            // Count each distinct n-gram once, at its first position.
            if (0..p).any(|q| cand[q..q + n] == *gram) {
                continue;
            }
            matched += occurrences(cand, gram).min(occurrences(reference, gram));
        }
        product *= if matched == 0 { epsilon } else { matched as f64 / positions as f64 };
    }
    let (c, r) = (cand.len() as f64, reference.len() as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    bp * product.powf(0.25)
}

pub fn random_tokens(rng: &mut impl Rng, max_len: usize, alphabet: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| format!("w{}", rng.random_range(0..alphabet))).collect()
}

pub fn dp_config(k: usize, skip: f64) -> AlignerConfig {
    AlignerConfig {
        max_chunk: k,
        skip_penalty: skip,
        ..Default::default()
    }
}
