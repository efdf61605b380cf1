//! Monotone many-to-many alignment by dynamic programming.
//!
//! `f[i][j]` is the best score of aligning the first `i` source and the
//! first `j` target sentences. A cell is reached either by a match
//! transition `(di, dj)` with `1 <= di, dj <= K`, weighted by the similarity
//! of the two chunks ending at `i` and `j`, or by skipping one sentence on
//! either side at `skip_penalty`. Among equal scores the transition with
//! smaller `di + dj`, then smaller `di`, wins.

use super::{check_dims, AlignerConfig, ChunkSimilarity};
use crate::corpus::{AlignmentResult, ChunkAlignment, DocumentPair, IndexRange, Method};
use crate::similarity::Scorer;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub di: usize,
    pub dj: usize,
}

impl Step {
    pub fn is_match(self) -> bool {
        self.di > 0 && self.dj > 0
    }
}

/// Transitions in tie-breaking order.
fn transitions(max_chunk: usize) -> Vec<Step> {
    let mut steps = vec![Step { di: 0, dj: 1 }, Step { di: 1, dj: 0 }];
    for di in 1..=max_chunk {
        for dj in 1..=max_chunk {
            steps.push(Step { di, dj });
        }
    }
    steps.sort_by_key(|s| (s.di + s.dj, s.di));
    steps
}

/// Filled score and back-pointer tables, `(n + 1) x (m + 1)`.
#[derive(Debug, Clone)]
pub struct DpState {
    n: usize,
    m: usize,
    f: Vec<f64>,
    path: Vec<Option<Step>>,
}

impl DpState {
    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.f[i * (self.m + 1) + j]
    }

    pub fn step(&self, i: usize, j: usize) -> Option<Step> {
        self.path[i * (self.m + 1) + j]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    /// Walks back-pointers from `(n, m)` and returns the match chunks in
    /// document order.
    fn backtrack(&self, matches: &[Vec<(Step, f64)>]) -> Vec<ChunkAlignment> {
        let (mut i, mut j) = (self.n, self.m);
        let mut out = Vec::new();
        while i > 0 || j > 0 {
            let step = self.step(i, j).expect("every non-origin cell has a predecessor");
            if step.is_match() {
                let score = matches[i * (self.m + 1) + j]
                    .iter()
                    .find(|(s, _)| *s == step)
                    .map(|(_, w)| *w)
                    .expect("match weight recorded");
                out.push(ChunkAlignment::new(
                    IndexRange::new(i - step.di, i - 1),
                    IndexRange::new(j - step.dj, j - 1),
                    score,
                ));
            }
            i -= step.di;
            j -= step.dj;
        }
        out.reverse();
        out
    }
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    /// `f[n][m]`: summed chunk scores and skip penalties along the path.
    pub total: f64,
    /// Match chunks before any `min_pair_score` filtering.
    pub alignments: Vec<ChunkAlignment>,
    pub state: DpState,
}

pub fn dp_solve(sim: &impl ChunkSimilarity, cfg: &AlignerConfig) -> Result<DpSolution> {
    cfg.validate()?;
    let (n, m) = check_dims(sim)?;
    let steps = transitions(cfg.max_chunk);
    let width = m + 1;
    let mut f = vec![f64::NEG_INFINITY; (n + 1) * width];
    let mut path = vec![None; (n + 1) * width];
    // Match weights per cell so backtracking needs no rescoring.
    let mut weights: Vec<Vec<(Step, f64)>> = vec![Vec::new(); (n + 1) * width];
    f[0] = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let cell = i * width + j;
            let mut best = f64::NEG_INFINITY;
            let mut best_step = None;
            for &step in &steps {
                if step.di > i || step.dj > j {
                    continue;
                }
                let prev = f[(i - step.di) * width + (j - step.dj)];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                let w = if step.is_match() {
                    let w = sim.similarity(
                        IndexRange::new(i - step.di, i - 1),
                        IndexRange::new(j - step.dj, j - 1),
                    )?;
                    weights[cell].push((step, w));
                    w
                } else {
                    cfg.skip_penalty
                };
                let score = prev + w;
                if score > best || best_step.is_none() {
                    best = score;
                    best_step = Some(step);
                }
            }
            f[cell] = best;
            path[cell] = best_step;
        }
    }
    let state = DpState { n, m, f, path };
    let alignments = state.backtrack(&weights);
    Ok(DpSolution {
        total: state.score(n, m),
        alignments,
        state,
    })
}

pub fn align_dp(pair: &DocumentPair, scorer: &Scorer, cfg: &AlignerConfig) -> Result<AlignmentResult> {
    let sim = scorer.prepare(pair)?;
    let mut alignments = dp_solve(&sim, cfg)?.alignments;
    cfg.post_filter(&mut alignments);
    Ok(AlignmentResult::new(pair.pair_id.clone(), Method::Dp, alignments))
}
