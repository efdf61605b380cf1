//! 1-to-1 matching as minimum-cost maximum flow.
//!
//! Graph: source -> each source sentence (cap 1, cost 0), each target
//! sentence -> sink (cap 1, cost 0), and every source sentence -> every
//! target sentence (cap 1, cost -similarity scaled to an integer). A pair is
//! selected when its middle edge is saturated.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{check_dims, AlignerConfig, ChunkSimilarity};
use crate::corpus::{AlignmentResult, ChunkAlignment, DocumentPair, IndexRange, Method};
use crate::similarity::Scorer;
use crate::Result;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

/// Successive shortest paths with Johnson potentials. Potentials start from
/// Bellman-Ford, so negative edge costs are allowed as long as the graph
/// has no negative cycle.
#[derive(Debug, Clone)]
pub struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from -> to` and its residual twin; returns the edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Residual capacity of an edge.
    pub fn remaining(&self, edge: usize) -> i64 {
        self.edges[edge].cap
    }

    fn bellman_ford(&self, source: usize) -> Vec<i64> {
        let n = self.adj.len();
        let mut dist = vec![i64::MAX; n];
        dist[source] = 0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u] == i64::MAX {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] {
                        dist[edge.to] = dist[u] + edge.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }

    /// Pushes as much flow as possible from `source` to `sink` at minimum
    /// cost; returns `(flow, cost)`.
    pub fn run(&mut self, source: usize, sink: usize) -> (i64, i64) {
        let n = self.adj.len();
        let mut potential: Vec<i64> = self
            .bellman_ford(source)
            .into_iter()
            .map(|d| if d == i64::MAX { 0 } else { d })
            .collect();
        let (mut flow, mut cost) = (0, 0);
        loop {
            let mut dist = vec![i64::MAX; n];
            let mut via = vec![usize::MAX; n];
            dist[source] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap == 0 {
                        continue;
                    }
                    let nd = d + edge.cost + potential[u] - potential[edge.to];
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        via[edge.to] = e;
                        heap.push(Reverse((nd, edge.to)));
                    }
                }
            }
            if dist[sink] == i64::MAX {
                break;
            }
            for v in 0..n {
                if dist[v] != i64::MAX {
                    potential[v] += dist[v];
                }
            }
            let mut push = i64::MAX;
            let mut v = sink;
            while v != source {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                cost += push * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
        (flow, cost)
    }
}

/// Maximum-similarity 1-to-1 matching of size `min(n, m)`.
pub fn flow_match(sim: &impl ChunkSimilarity, cfg: &AlignerConfig) -> Result<Vec<ChunkAlignment>> {
    cfg.validate()?;
    let (n, m) = check_dims(sim)?;
    let source = 0;
    let sink = n + m + 1;
    let mut graph = MinCostFlow::new(n + m + 2);
    for i in 0..n {
        graph.add_edge(source, 1 + i, 1, 0);
    }
    for j in 0..m {
        graph.add_edge(1 + n + j, sink, 1, 0);
    }
    let mut middle = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let score = sim.similarity(IndexRange::single(i), IndexRange::single(j))?;
            let cost = -(score * cfg.flow_cost_scale as f64).round() as i64;
            let id = graph.add_edge(1 + i, 1 + n + j, 1, cost);
            middle.push((id, i, j, score));
        }
    }
    graph.run(source, sink);
    Ok(middle
        .into_iter()
        .filter(|&(id, ..)| graph.remaining(id) == 0)
        .map(|(_, i, j, score)| ChunkAlignment::one_to_one(i, j, score))
        .collect())
}

pub fn align_flow(pair: &DocumentPair, scorer: &Scorer, cfg: &AlignerConfig) -> Result<AlignmentResult> {
    let sim = scorer.prepare(pair)?;
    let mut alignments = flow_match(&sim, cfg)?;
    cfg.post_filter(&mut alignments);
    Ok(AlignmentResult::new(pair.pair_id.clone(), Method::Flow, alignments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::MatrixSimilarity;

    #[test]
    fn diagonal_square() {
        let m = vec![vec![0.9, 0.2, 0.1], vec![0.1, 0.8, 0.3], vec![0.0, 0.2, 0.7]];
        let a = flow_match(&MatrixSimilarity(&m), &AlignerConfig::default()).unwrap();
        let pairs: Vec<_> = a.iter().map(|x| (x.src.start, x.tgt.start)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn global_beats_greedy() {
        // Greedy takes (0,0)=0.9 then (1,1)=0.1; the optimum is 0.8 + 0.85.
        let m = vec![vec![0.9, 0.8], vec![0.85, 0.1]];
        let a = flow_match(&MatrixSimilarity(&m), &AlignerConfig::default()).unwrap();
        let pairs: Vec<_> = a.iter().map(|x| (x.src.start, x.tgt.start)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn rectangular_matches_min_side() {
        let m = vec![vec![0.1, 0.5, 0.2, 0.9, 0.0]; 3];
        let a = flow_match(&MatrixSimilarity(&m), &AlignerConfig::default()).unwrap();
        assert_eq!(a.len(), 3);
        let r = AlignmentResult::new("x", Method::Flow, a);
        r.validate().unwrap();
    }

    #[test]
    fn all_negative_still_matches_max_cardinality() {
        let m = vec![vec![-0.9, -0.1], vec![-0.2, -0.8]];
        let a = flow_match(&MatrixSimilarity(&m), &AlignerConfig::default()).unwrap();
        let pairs: Vec<_> = a.iter().map(|x| (x.src.start, x.tgt.start)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn generic_flow_network() {
        // Two parallel routes of capacity 2 and 1 with different costs.
        let mut g = MinCostFlow::new(4);
        g.add_edge(0, 1, 2, 1);
        g.add_edge(0, 2, 1, 5);
        g.add_edge(1, 3, 1, 1);
        g.add_edge(2, 3, 2, 1);
        g.add_edge(1, 2, 1, 1);
        assert_eq!(g.run(0, 3), (3, 2 + 3 + 6));
    }
}
